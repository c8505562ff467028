//! Real-valued cochains on a cubical complex.
//!
//! A `FormField` of degree `q` stores one coefficient per `q`-cell, holding
//! the average of the corresponding form component over that cell. The
//! coboundary divided by the transverse spacing realizes the exterior
//! derivative with `d∘d = 0` up to rounding; the codifferential is the exact
//! adjoint with respect to the diagonal-Hodge inner product.
//!
//! Interpolation conventions used throughout:
//! * component at a node = arithmetic mean of the incident cells of that
//!   component (fewer cells at the boundary),
//! * pointwise `Q` at a node = sum over components of the squared node value,
//! * `Q` at a `q`-cell = mean of nodal `Q` over the cell's corner nodes,
//! * component at a top-cell center = mean of the parallel cells of that
//!   component inside the top cell.

use std::sync::Arc;

use crate::complex::{mask_axes, CubicalComplex, MAX_DIM};
use crate::density::DensityModel;
use crate::error::{HodgeError, Result};
use crate::real::Real;

/// Inclusion rule used when integrating over a ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BallQuadrature {
    /// Indicator evaluated at the cell center (default).
    CellCenter,
    /// Inside fraction over the cell center plus the 2^n corners.
    CornerSubsample,
}

/// Discrete `q`-form: one scalar per `q`-cell.
#[derive(Clone, Debug)]
pub struct FormField<T> {
    degree: usize,
    complex: Arc<CubicalComplex<T>>,
    coeffs: Vec<T>,
}

impl<T: Real> FormField<T> {
    pub fn zeros(complex: &Arc<CubicalComplex<T>>, degree: usize) -> Result<Self> {
        if degree > complex.dim() {
            return Err(HodgeError::Degree {
                op: "FormField::zeros",
                requirement: "q <= n",
                q: degree,
            });
        }
        Ok(Self {
            degree,
            complex: Arc::clone(complex),
            coeffs: vec![T::zero(); complex.num_cells(degree)],
        })
    }

    pub fn from_coeffs(
        complex: &Arc<CubicalComplex<T>>,
        degree: usize,
        coeffs: Vec<T>,
    ) -> Result<Self> {
        if degree > complex.dim() {
            return Err(HodgeError::Degree {
                op: "FormField::from_coeffs",
                requirement: "q <= n",
                q: degree,
            });
        }
        if coeffs.len() != complex.num_cells(degree) {
            return Err(HodgeError::Mismatch {
                what: format!(
                    "coefficient count {} != {} q-cells",
                    coeffs.len(),
                    complex.num_cells(degree)
                ),
            });
        }
        Ok(Self {
            degree,
            complex: Arc::clone(complex),
            coeffs,
        })
    }

    /// Degree-0 field sampled at the grid nodes.
    pub fn from_node_fn(
        complex: &Arc<CubicalComplex<T>>,
        f: impl Fn(&[T]) -> T,
    ) -> Self {
        let mut coeffs = vec![T::zero(); complex.num_cells(0)];
        let mut x = vec![T::zero(); complex.dim()];
        complex.for_each_cell(0, |_, _, idx, flat| {
            complex.node_coords(idx, &mut x);
            coeffs[flat] = f(&x);
        });
        Self {
            degree: 0,
            complex: Arc::clone(complex),
            coeffs,
        }
    }

    /// Field of degree `q` with each component sampled at cell centers.
    /// `f(axes, x)` receives the spanned axes in ascending order.
    pub fn from_component_fn(
        complex: &Arc<CubicalComplex<T>>,
        degree: usize,
        f: impl Fn(&[usize], &[T]) -> T,
    ) -> Result<Self> {
        let mut field = Self::zeros(complex, degree)?;
        let mut x = vec![T::zero(); complex.dim()];
        let mut axes = [0usize; MAX_DIM];
        let coeffs = &mut field.coeffs;
        complex.for_each_cell(degree, |_, mask, idx, flat| {
            let k = mask_axes(mask, &mut axes);
            complex.cell_center(mask, idx, &mut x);
            coeffs[flat] = f(&axes[..k], &x);
        });
        Ok(field)
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn complex(&self) -> &Arc<CubicalComplex<T>> {
        &self.complex
    }

    #[inline]
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    /// Coefficients of one spanned-axis block.
    pub fn block_slice(&self, block: usize) -> &[T] {
        let lay = self.complex.layout(self.degree);
        let lo = lay.offsets[block];
        let hi = if block + 1 < lay.offsets.len() {
            lay.offsets[block + 1]
        } else {
            lay.total
        };
        &self.coeffs[lo..hi]
    }

    pub fn max_abs(&self) -> T {
        self.coeffs
            .iter()
            .fold(T::zero(), |a, &c| a.max(c.abs()))
    }

    pub fn scaled(&self, c: T) -> Self {
        let mut out = self.clone();
        for v in &mut out.coeffs {
            *v *= c;
        }
        out
    }

    /// `self += c * other` (same complex and degree required).
    pub fn add_scaled(&mut self, other: &Self, c: T) -> Result<()> {
        self.check_compatible(other, "add_scaled")?;
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += c * b;
        }
        Ok(())
    }

    pub fn check_compatible(&self, other: &Self, op: &str) -> Result<()> {
        if self.degree != other.degree {
            return Err(HodgeError::Mismatch {
                what: format!(
                    "{op}: degree {} vs {}",
                    self.degree, other.degree
                ),
            });
        }
        if !Arc::ptr_eq(&self.complex, &other.complex)
            && !self.complex.same_geometry(&other.complex)
        {
            return Err(HodgeError::Mismatch {
                what: format!("{op}: fields live on different complexes"),
            });
        }
        Ok(())
    }

    /// Coboundary divided by the transverse spacing; raises the degree by one.
    pub fn exterior_derivative(&self) -> Result<Self> {
        let q = self.degree;
        let cx = &self.complex;
        let n = cx.dim();
        if q >= n {
            return Err(HodgeError::Degree {
                op: "exterior_derivative",
                requirement: "q < n",
                q,
            });
        }
        let in_lay = cx.layout(q);
        let mut out = vec![T::zero(); cx.num_cells(q + 1)];
        let h = cx.spacing();
        let mut axes = [0usize; MAX_DIM];
        let src = &self.coeffs;
        cx.for_each_cell(q + 1, |_, mask, idx, flat| {
            let k = mask_axes(mask, &mut axes);
            let mut val = T::zero();
            let mut sign = T::one();
            for &t in &axes[..k] {
                let fmask = mask & !(1u32 << t);
                let fb = in_lay.block_of_mask(fmask).expect("face mask exists");
                let base = in_lay.flat(fb, idx);
                let stride = in_lay.strides[fb][t];
                val += sign * (src[base + stride] - src[base]) / h[t];
                sign = -sign;
            }
            out[flat] = val;
        });
        Ok(Self {
            degree: q + 1,
            complex: Arc::clone(cx),
            coeffs: out,
        })
    }

    /// Adjoint of `exterior_derivative` in the diagonal-Hodge inner product;
    /// lowers the degree by one.
    pub fn codifferential(&self) -> Result<Self> {
        let q = self.degree;
        let cx = &self.complex;
        if q == 0 {
            return Err(HodgeError::Degree {
                op: "codifferential",
                requirement: "q >= 1",
                q,
            });
        }
        let out_lay = cx.layout(q - 1);
        let mut out = vec![T::zero(); cx.num_cells(q - 1)];
        let h = cx.spacing();
        let mut axes = [0usize; MAX_DIM];
        let src = &self.coeffs;
        cx.for_each_cell(q, |_, mask, idx, flat| {
            let v = src[flat];
            if v == T::zero() {
                return;
            }
            let w = cx.cell_weight(mask, idx);
            let k = mask_axes(mask, &mut axes);
            let mut sign = T::one();
            for &t in &axes[..k] {
                let fmask = mask & !(1u32 << t);
                let fb = out_lay.block_of_mask(fmask).expect("face mask exists");
                let base = out_lay.flat(fb, idx);
                let stride = out_lay.strides[fb][t];
                let contrib = sign * w * v / h[t];
                out[base + stride] += contrib;
                out[base] -= contrib;
                sign = -sign;
            }
        });
        cx.for_each_cell(q - 1, |_, mask, idx, flat| {
            out[flat] /= cx.cell_weight(mask, idx);
        });
        Ok(Self {
            degree: q - 1,
            complex: Arc::clone(cx),
            coeffs: out,
        })
    }

    /// Diagonal-Hodge inner product `Σ f·g·w(cell)`.
    pub fn inner_product(&self, other: &Self) -> Result<T> {
        self.check_compatible(other, "inner_product")?;
        let cx = &self.complex;
        let mut acc = T::zero();
        let (a, b) = (&self.coeffs, &other.coeffs);
        cx.for_each_cell(self.degree, |_, mask, idx, flat| {
            acc += a[flat] * b[flat] * cx.cell_weight(mask, idx);
        });
        Ok(acc)
    }

    /// Weighted L2 norm over all cells.
    pub fn norm(&self) -> T {
        self.inner_product(self).expect("self-compatible").sqrt()
    }

    /// Weighted L2 norm restricted to interior cells.
    pub fn norm_interior(&self) -> T {
        let cx = &self.complex;
        let mut acc = T::zero();
        let c = &self.coeffs;
        cx.for_each_cell(self.degree, |_, mask, idx, flat| {
            if cx.is_interior(mask, idx) {
                acc += c[flat] * c[flat] * cx.cell_weight(mask, idx);
            }
        });
        acc.sqrt()
    }

    /// Pointwise `Q = |ω|²` sampled at the grid nodes, returned as a
    /// degree-0 field. Each component is averaged over its incident cells
    /// before squaring, so the result is second-order accurate on smooth
    /// fields and nonnegative everywhere.
    pub fn pointwise_q(&self) -> Self {
        let cx = &self.complex;
        let lay = cx.layout(self.degree);
        let mut out = vec![T::zero(); cx.num_cells(0)];
        cx.for_each_cell(0, |_, _, nidx, nflat| {
            let mut qv = T::zero();
            for (b, &mask) in lay.masks.iter().enumerate() {
                let mut sum = T::zero();
                let mut cnt = 0usize;
                gather_incident(cx, self.degree, b, mask, nidx, |f| {
                    sum += self.coeffs[f];
                    cnt += 1;
                });
                if cnt > 0 {
                    let avg = sum / T::from_usize_lossy(cnt);
                    qv += avg * avg;
                }
            }
            out[nflat] = qv;
        });
        Self {
            degree: 0,
            complex: Arc::clone(cx),
            coeffs: out,
        }
    }

    /// Maximum of the nodal `Q` field.
    pub fn max_node_q(&self) -> T {
        self.pointwise_q().max_abs()
    }

    /// Nodal `Q` averaged over the corner nodes of every `target`-cell.
    /// Used to evaluate the density weight `ρ(Q)` on cells.
    pub fn q_at_cells(&self, target: usize) -> Vec<T> {
        let cx = &self.complex;
        let nodal = self.pointwise_q();
        let mut out = vec![T::zero(); cx.num_cells(target)];
        cx.for_each_cell(target, |_, mask, idx, flat| {
            let mut sum = T::zero();
            let mut cnt = 0usize;
            gather_corners(cx, mask, idx, |nf| {
                sum += nodal.coeffs[nf];
                cnt += 1;
            });
            out[flat] = sum / T::from_usize_lossy(cnt);
        });
        out
    }

    /// Coefficients multiplied by `ρ(Q)` evaluated per cell.
    pub fn scaled_by_density(&self, model: &DensityModel<T>) -> Result<Self> {
        let qs = self.q_at_cells(self.degree);
        let mut out = self.clone();
        for (c, q) in out.coeffs.iter_mut().zip(qs) {
            *c *= model.rho(q)?;
        }
        Ok(out)
    }

    /// `Q` sampled at a single top-cell center by component interpolation.
    pub fn q_at_ncell(&self, ncell_idx: &[usize]) -> T {
        let cx = &self.complex;
        let lay = cx.layout(self.degree);
        let mut qv = T::zero();
        for (b, &mask) in lay.masks.iter().enumerate() {
            let mut sum = T::zero();
            let mut cnt = 0usize;
            gather_parallel(cx, self.degree, b, mask, ncell_idx, |f| {
                sum += self.coeffs[f];
                cnt += 1;
            });
            let avg = sum / T::from_usize_lossy(cnt);
            qv += avg * avg;
        }
        qv
    }

    /// Squared contraction against the unit radial direction from `center`,
    /// sampled at every top-cell center. Defined as zero at the center
    /// itself. Supports degrees 1 and 2.
    pub fn radial_contraction_sq(&self, center: &[T]) -> Result<Vec<T>> {
        let cx = &self.complex;
        let n = cx.dim();
        let q = self.degree;
        if q != 1 && q != 2 {
            return Err(HodgeError::Degree {
                op: "radial_contraction_sq",
                requirement: "q in {1, 2}",
                q,
            });
        }
        if center.len() != n {
            return Err(HodgeError::Invalid {
                what: format!("center has {} coordinates, expected {n}", center.len()),
            });
        }
        let lay = cx.layout(q);
        let mut out = vec![T::zero(); cx.num_cells(n)];
        let mut x = vec![T::zero(); n];
        let mut comps = vec![T::zero(); lay.masks.len()];
        let mut axes = [0usize; MAX_DIM];
        let tiny = T::from_f64_lossy(1e-14);
        cx.for_each_cell(n, |_, mask, idx, flat_out| {
            cx.cell_center(mask, idx, &mut x);
            let mut r2 = T::zero();
            for i in 0..n {
                let d = x[i] - center[i];
                x[i] = d;
                r2 += d * d;
            }
            let r = r2.sqrt();
            if r < tiny {
                out[flat_out] = T::zero();
                return;
            }
            for (b, &cmask) in lay.masks.iter().enumerate() {
                let mut sum = T::zero();
                let mut cnt = 0usize;
                gather_parallel(cx, q, b, cmask, idx, |f| {
                    sum += self.coeffs[f];
                    cnt += 1;
                });
                comps[b] = sum / T::from_usize_lossy(cnt);
            }
            let val = if q == 1 {
                // components are indexed by single-axis masks in axis order
                let mut s = T::zero();
                for (b, &cmask) in lay.masks.iter().enumerate() {
                    let ax = cmask.trailing_zeros() as usize;
                    s += comps[b] * x[ax] / r;
                }
                s * s
            } else {
                // (ι_v ω)_j = Σ_i v_i ω_{ij}, ω antisymmetric
                let mut total = T::zero();
                for j in 0..n {
                    let mut tj = T::zero();
                    for (b, &cmask) in lay.masks.iter().enumerate() {
                        if cmask & (1 << j) == 0 {
                            continue;
                        }
                        let k = mask_axes(cmask, &mut axes);
                        debug_assert_eq!(k, 2);
                        let (lo, hi) = (axes[0], axes[1]);
                        let i = if lo == j { hi } else { lo };
                        // stored component is ω_{lo,hi}; ω_{ij} needs i first
                        let signed = if i < j { comps[b] } else { -comps[b] };
                        tj += x[i] / r * signed;
                    }
                    total += tj * tj;
                }
                total
            };
            out[flat_out] = val;
        });
        Ok(out)
    }
}

/// Shared behaviour needed by the energy quadratures: pointwise `Q`
/// reconstructed at top-cell centers or at nodes.
pub trait EnergyField<T: Real> {
    fn complex(&self) -> &Arc<CubicalComplex<T>>;
    fn degree(&self) -> usize;
    fn q_at_ncell(&self, ncell_idx: &[usize]) -> T;
    /// Pointwise `Q` at every node, in node-flat order.
    fn node_q(&self) -> Vec<T>;
    fn max_node_q(&self) -> T {
        self.node_q()
            .into_iter()
            .fold(T::zero(), |a, b| a.max(b))
    }
}

impl<T: Real> EnergyField<T> for FormField<T> {
    fn complex(&self) -> &Arc<CubicalComplex<T>> {
        &self.complex
    }
    fn degree(&self) -> usize {
        self.degree
    }
    fn q_at_ncell(&self, ncell_idx: &[usize]) -> T {
        FormField::q_at_ncell(self, ncell_idx)
    }
    fn node_q(&self) -> Vec<T> {
        self.pointwise_q().coeffs
    }
    fn max_node_q(&self) -> T {
        FormField::max_node_q(self)
    }
}

/// Inclusion weight of one top cell with respect to `B_r(center)`.
pub fn ball_inclusion_weight<T: Real>(
    cx: &CubicalComplex<T>,
    idx: &[usize],
    center: &[T],
    r: T,
    mode: BallQuadrature,
) -> T {
    let n = cx.dim();
    let h = cx.spacing();
    let r2 = r * r;
    let mut corner = [T::zero(); MAX_DIM];
    cx.node_coords(idx, &mut corner[..n]);
    let inside = |shift: &[T]| -> bool {
        let mut d2 = T::zero();
        for i in 0..n {
            let d = corner[i] + shift[i] - center[i];
            d2 += d * d;
        }
        d2 <= r2
    };
    let mut shift = [T::zero(); MAX_DIM];
    for i in 0..n {
        shift[i] = h[i] * T::half();
    }
    match mode {
        BallQuadrature::CellCenter => {
            if inside(&shift[..n]) {
                T::one()
            } else {
                T::zero()
            }
        }
        BallQuadrature::CornerSubsample => {
            let mut cnt = 0usize;
            if inside(&shift[..n]) {
                cnt += 1;
            }
            let mut s = [T::zero(); MAX_DIM];
            for combo in 0u32..(1u32 << n) {
                for i in 0..n {
                    s[i] = if combo & (1 << i) != 0 { h[i] } else { T::zero() };
                }
                if inside(&s[..n]) {
                    cnt += 1;
                }
            }
            T::from_usize_lossy(cnt) / T::from_usize_lossy((1usize << n) + 1)
        }
    }
}

/// Energy of `field` restricted to `B_r(center)`:
/// `Σ e(Q at cell center) · cell volume · inclusion weight`.
pub fn ball_energy<T: Real, F: EnergyField<T>>(
    field: &F,
    model: &DensityModel<T>,
    center: &[T],
    r: T,
    mode: BallQuadrature,
) -> Result<T> {
    let cx = field.complex();
    if !cx.contains_ball(center, r) {
        return Err(HodgeError::Geometry {
            what: format!("ball of radius {} exits the domain", r.to_f64()),
        });
    }
    let vol = cx.cell_volume();
    let n = cx.dim();
    let mut acc = T::zero();
    let mut err = None;
    cx.for_each_cell(n, |_, _, idx, _| {
        if err.is_some() {
            return;
        }
        let w = ball_inclusion_weight(cx, idx, center, r, mode);
        if w == T::zero() {
            return;
        }
        match model.e(field.q_at_ncell(idx)) {
            Ok(e) => acc += e * vol * w,
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

impl<T: Real> FormField<T> {
    /// Convenience wrapper around [`ball_energy`].
    pub fn ball_energy(
        &self,
        model: &DensityModel<T>,
        center: &[T],
        r: T,
        mode: BallQuadrature,
    ) -> Result<T> {
        ball_energy(self, model, center, r, mode)
    }

    /// Total energy `Σ e(Q at cell center)·vol` over the whole domain.
    pub fn total_energy(&self, model: &DensityModel<T>) -> Result<T> {
        total_energy(self, model)
    }
}

/// Domain-wide energy by top-cell center quadrature.
pub fn total_energy<T: Real, F: EnergyField<T>>(field: &F, model: &DensityModel<T>) -> Result<T> {
    let cx = field.complex();
    let vol = cx.cell_volume();
    let n = cx.dim();
    let mut acc = T::zero();
    let mut err = None;
    cx.for_each_cell(n, |_, _, idx, _| {
        if err.is_some() {
            return;
        }
        match model.e(field.q_at_ncell(idx)) {
            Ok(e) => acc += e * vol,
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

/// Visit the cells of component `mask` incident to the node `nidx`.
pub(crate) fn gather_incident<T: Real>(
    cx: &CubicalComplex<T>,
    q: usize,
    block: usize,
    mask: u32,
    nidx: &[usize],
    mut f: impl FnMut(usize),
) {
    let lay = cx.layout(q);
    let strides = &lay.strides[block];
    let res = cx.resolution();
    let mut axes = [0usize; MAX_DIM];
    let k = mask_axes(mask, &mut axes);
    // base: transverse axes at the node position, spanned axes at 0
    let mut base = lay.offsets[block];
    for i in 0..cx.dim() {
        if mask & (1 << i) == 0 {
            base += nidx[i] * strides[i];
        }
    }
    'combo: for combo in 0u32..(1u32 << k) {
        let mut flat = base;
        for (j, &t) in axes[..k].iter().enumerate() {
            let pos = if combo & (1 << j) != 0 {
                nidx[t]
            } else {
                match nidx[t].checked_sub(1) {
                    Some(p) => p,
                    None => continue 'combo,
                }
            };
            if pos >= res[t] {
                continue 'combo;
            }
            flat += pos * strides[t];
        }
        f(flat);
    }
}

/// Visit the 2^(n-q) cells of component `mask` inside the top cell `ncell_idx`.
pub(crate) fn gather_parallel<T: Real>(
    cx: &CubicalComplex<T>,
    q: usize,
    block: usize,
    mask: u32,
    ncell_idx: &[usize],
    f: impl FnMut(usize),
) {
    let full = (1u32 << cx.dim()) - 1;
    gather_within(cx, q, block, mask, full, ncell_idx, f);
}

/// Visit the cells of component `sub_mask` contained in the cell
/// `(sup_mask, idx)`: spanned-but-dropped axes take both node positions,
/// all other axes stay at `idx`.
pub(crate) fn gather_within<T: Real>(
    cx: &CubicalComplex<T>,
    q_sub: usize,
    block: usize,
    sub_mask: u32,
    sup_mask: u32,
    idx: &[usize],
    mut f: impl FnMut(usize),
) {
    let lay = cx.layout(q_sub);
    let strides = &lay.strides[block];
    let n = cx.dim();
    let mut vary = [0usize; MAX_DIM];
    let mut kv = 0;
    let mut base = lay.offsets[block];
    for i in 0..n {
        base += idx[i] * strides[i];
        if sup_mask & (1 << i) != 0 && sub_mask & (1 << i) == 0 {
            vary[kv] = i;
            kv += 1;
        }
    }
    for combo in 0u32..(1u32 << kv) {
        let mut flat = base;
        for (j, &t) in vary[..kv].iter().enumerate() {
            if combo & (1 << j) != 0 {
                flat += strides[t];
            }
        }
        f(flat);
    }
}

/// Visit the corner nodes of the cell `(mask, idx)`.
pub(crate) fn gather_corners<T: Real>(
    cx: &CubicalComplex<T>,
    mask: u32,
    idx: &[usize],
    mut f: impl FnMut(usize),
) {
    let lay = cx.layout(0);
    let strides = &lay.strides[0];
    let mut axes = [0usize; MAX_DIM];
    let k = mask_axes(mask, &mut axes);
    let mut base = 0usize;
    for i in 0..cx.dim() {
        base += idx[i] * strides[i];
    }
    for combo in 0u32..(1u32 << k) {
        let mut flat = base;
        for (j, &t) in axes[..k].iter().enumerate() {
            if combo & (1 << j) != 0 {
                flat += strides[t];
            }
        }
        f(flat);
    }
}
