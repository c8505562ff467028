//! so(3)-valued connections and curvatures on the cubical complex.
//!
//! Lie-algebra coefficients are stored in adjoint coordinates (see
//! [`crate::so3`]), one 3-vector per cell. Gauge transformations act through
//! per-node rotations kept as unit quaternions: tensorially on curvatures,
//! affinely on connections (rotation plus a discrete Maurer-Cartan term from
//! logs of neighbor rotation differences).
//!
//! Pointwise `Q` of a Lie field averages the *squared* cell norms instead of
//! squaring averaged vectors; this keeps `Q`, and with it every energy, bit
//! invariant under arbitrary per-cell gauge rotations. On single-axis
//! (abelian) fields with uniform magnitude the convention coincides with the
//! scalar one.

use std::sync::Arc;

use crate::complex::{mask_axes, CubicalComplex, MAX_DIM};
use crate::density::DensityModel;
use crate::error::{HodgeError, Result};
use crate::forms::{gather_incident, gather_within, EnergyField, FormField};
use crate::real::Real;
use crate::so3::{self, Quat, Vec3};

/// Discrete `q`-form with so(3) coefficients in adjoint coordinates.
#[derive(Clone, Debug)]
pub struct LieFormField<T> {
    degree: usize,
    complex: Arc<CubicalComplex<T>>,
    coeffs: Vec<Vec3<T>>,
}

impl<T: Real> LieFormField<T> {
    pub fn zeros(complex: &Arc<CubicalComplex<T>>, degree: usize) -> Result<Self> {
        if degree > complex.dim() {
            return Err(HodgeError::Degree {
                op: "LieFormField::zeros",
                requirement: "q <= n",
                q: degree,
            });
        }
        Ok(Self {
            degree,
            complex: Arc::clone(complex),
            coeffs: vec![[T::zero(); 3]; complex.num_cells(degree)],
        })
    }

    pub fn from_coeffs(
        complex: &Arc<CubicalComplex<T>>,
        degree: usize,
        coeffs: Vec<Vec3<T>>,
    ) -> Result<Self> {
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

    /// Sample each component's adjoint vector at cell centers.
    pub fn from_component_fn(
        complex: &Arc<CubicalComplex<T>>,
        degree: usize,
        f: impl Fn(&[usize], &[T]) -> Vec3<T>,
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

    /// Embed a scalar cochain on one adjoint axis (abelian embedding).
    pub fn from_scalar_on_axis(scalar: &FormField<T>, axis: usize) -> Result<Self> {
        if axis >= 3 {
            return Err(HodgeError::Invalid {
                what: format!("adjoint axis {axis} out of range"),
            });
        }
        let mut coeffs = vec![[T::zero(); 3]; scalar.coeffs().len()];
        for (v, &s) in coeffs.iter_mut().zip(scalar.coeffs()) {
            v[axis] = s;
        }
        Ok(Self {
            degree: scalar.degree(),
            complex: Arc::clone(scalar.complex()),
            coeffs,
        })
    }

    /// Extract one adjoint axis as a scalar cochain.
    pub fn scalar_component(&self, axis: usize) -> Result<FormField<T>> {
        let coeffs = self.coeffs.iter().map(|v| v[axis]).collect();
        FormField::from_coeffs(&self.complex, self.degree, coeffs)
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
    pub fn coeffs(&self) -> &[Vec3<T>] {
        &self.coeffs
    }
    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Vec3<T>] {
        &mut self.coeffs
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> T {
        self.coeffs
            .iter()
            .fold(T::zero(), |a, v| a.max(so3::norm(v)))
    }

    pub fn add_scaled(&mut self, other: &Self, c: T) -> Result<()> {
        if self.degree != other.degree || self.coeffs.len() != other.coeffs.len() {
            return Err(HodgeError::Mismatch {
                what: "add_scaled: Lie fields differ in shape".into(),
            });
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            for i in 0..3 {
                a[i] += c * b[i];
            }
        }
        Ok(())
    }

    /// Componentwise exterior derivative.
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
        let mut out = vec![[T::zero(); 3]; cx.num_cells(q + 1)];
        let h = cx.spacing();
        let mut axes = [0usize; MAX_DIM];
        let src = &self.coeffs;
        cx.for_each_cell(q + 1, |_, mask, idx, flat| {
            let k = mask_axes(mask, &mut axes);
            let mut val = [T::zero(); 3];
            let mut sign = T::one();
            for &t in &axes[..k] {
                let fmask = mask & !(1u32 << t);
                let fb = in_lay.block_of_mask(fmask).expect("face mask exists");
                let base = in_lay.flat(fb, idx);
                let stride = in_lay.strides[fb][t];
                for c in 0..3 {
                    val[c] += sign * (src[base + stride][c] - src[base][c]) / h[t];
                }
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

    /// Componentwise codifferential (adjoint with the diagonal-Hodge weights).
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
        let mut out = vec![[T::zero(); 3]; cx.num_cells(q - 1)];
        let h = cx.spacing();
        let mut axes = [0usize; MAX_DIM];
        let src = &self.coeffs;
        cx.for_each_cell(q, |_, mask, idx, flat| {
            let v = src[flat];
            let w = cx.cell_weight(mask, idx);
            let k = mask_axes(mask, &mut axes);
            let mut sign = T::one();
            for &t in &axes[..k] {
                let fmask = mask & !(1u32 << t);
                let fb = out_lay.block_of_mask(fmask).expect("face mask exists");
                let base = out_lay.flat(fb, idx);
                let stride = out_lay.strides[fb][t];
                for c in 0..3 {
                    let contrib = sign * w * v[c] / h[t];
                    out[base + stride][c] += contrib;
                    out[base][c] -= contrib;
                }
                sign = -sign;
            }
        });
        cx.for_each_cell(q - 1, |_, mask, idx, flat| {
            let w = cx.cell_weight(mask, idx);
            for c in 0..3 {
                out[flat][c] /= w;
            }
        });
        Ok(Self {
            degree: q - 1,
            complex: Arc::clone(cx),
            coeffs: out,
        })
    }

    /// Pointwise `Q` at nodes: per component the mean of the squared cell
    /// norms over incident cells, summed over components. Exactly invariant
    /// under per-cell rotations.
    pub fn pointwise_q(&self) -> FormField<T> {
        let cx = &self.complex;
        let lay = cx.layout(self.degree);
        let mut out = vec![T::zero(); cx.num_cells(0)];
        cx.for_each_cell(0, |_, _, nidx, nflat| {
            let mut qv = T::zero();
            for (b, &mask) in lay.masks.iter().enumerate() {
                let mut sum = T::zero();
                let mut cnt = 0usize;
                gather_incident(cx, self.degree, b, mask, nidx, |f| {
                    sum += so3::norm_sq(&self.coeffs[f]);
                    cnt += 1;
                });
                if cnt > 0 {
                    qv += sum / T::from_usize_lossy(cnt);
                }
            }
            out[nflat] = qv;
        });
        FormField::from_coeffs(cx, 0, out).expect("node field")
    }

    /// Nodal `Q` averaged over the corner nodes of every `target`-cell.
    pub fn q_at_cells(&self, target: usize) -> Vec<T> {
        let cx = &self.complex;
        let nodal = self.pointwise_q();
        let mut out = vec![T::zero(); cx.num_cells(target)];
        cx.for_each_cell(target, |_, mask, idx, flat| {
            let mut sum = T::zero();
            let mut cnt = 0usize;
            crate::forms::gather_corners(cx, mask, idx, |nf| {
                sum += nodal.coeffs()[nf];
                cnt += 1;
            });
            out[flat] = sum / T::from_usize_lossy(cnt);
        });
        out
    }

    /// Weighted L2 norm over interior cells of the vector magnitude.
    pub fn norm_interior(&self) -> T {
        let cx = &self.complex;
        let mut acc = T::zero();
        cx.for_each_cell(self.degree, |_, mask, idx, flat| {
            if cx.is_interior(mask, idx) {
                acc += so3::norm_sq(&self.coeffs[flat]) * cx.cell_weight(mask, idx);
            }
        });
        acc.sqrt()
    }

    /// Weighted L2 norm over all cells.
    pub fn norm(&self) -> T {
        let cx = &self.complex;
        let mut acc = T::zero();
        cx.for_each_cell(self.degree, |_, mask, idx, flat| {
            acc += so3::norm_sq(&self.coeffs[flat]) * cx.cell_weight(mask, idx);
        });
        acc.sqrt()
    }
}

impl<T: Real> EnergyField<T> for LieFormField<T> {
    fn complex(&self) -> &Arc<CubicalComplex<T>> {
        &self.complex
    }
    fn degree(&self) -> usize {
        self.degree
    }
    fn q_at_ncell(&self, ncell_idx: &[usize]) -> T {
        let cx = &self.complex;
        let lay = cx.layout(self.degree);
        let full = (1u32 << cx.dim()) - 1;
        let mut qv = T::zero();
        for (b, &mask) in lay.masks.iter().enumerate() {
            let mut sum = T::zero();
            let mut cnt = 0usize;
            gather_within(cx, self.degree, b, mask, full, ncell_idx, |f| {
                sum += so3::norm_sq(&self.coeffs[f]);
                cnt += 1;
            });
            qv += sum / T::from_usize_lossy(cnt);
        }
        qv
    }
    fn node_q(&self) -> Vec<T> {
        self.pointwise_q().coeffs().to_vec()
    }
    fn max_node_q(&self) -> T {
        self.pointwise_q().max_abs()
    }
}

/// Per-node rotation field (stored as unit quaternions).
#[derive(Clone, Debug)]
pub struct GaugeField<T> {
    complex: Arc<CubicalComplex<T>>,
    quats: Vec<Quat<T>>,
}

impl<T: Real> GaugeField<T> {
    pub fn identity(complex: &Arc<CubicalComplex<T>>) -> Self {
        Self {
            complex: Arc::clone(complex),
            quats: vec![Quat::identity(); complex.num_nodes()],
        }
    }

    /// Build from raw quaternions; rejects entries away from the unit sphere
    /// and renormalizes the rest.
    pub fn from_quats(complex: &Arc<CubicalComplex<T>>, quats: Vec<Quat<T>>) -> Result<Self> {
        if quats.len() != complex.num_nodes() {
            return Err(HodgeError::Mismatch {
                what: format!(
                    "{} quaternions for {} nodes",
                    quats.len(),
                    complex.num_nodes()
                ),
            });
        }
        let tol = T::from_f64_lossy(1e-6);
        let mut out = Vec::with_capacity(quats.len());
        for (i, q) in quats.into_iter().enumerate() {
            let n = q.norm();
            if !n.is_finite() || (n - T::one()).abs() > tol {
                return Err(HodgeError::GaugeInvalid {
                    what: format!("node {i}: quaternion norm {}", n.to_f64()),
                });
            }
            out.push(q.normalized());
        }
        Ok(Self {
            complex: Arc::clone(complex),
            quats: out,
        })
    }

    /// Rotation field from a smooth scaled-axis function of position.
    pub fn from_axis_angle_fn(
        complex: &Arc<CubicalComplex<T>>,
        f: impl Fn(&[T]) -> Vec3<T>,
    ) -> Self {
        let mut quats = vec![Quat::identity(); complex.num_nodes()];
        let mut x = vec![T::zero(); complex.dim()];
        complex.for_each_cell(0, |_, _, idx, flat| {
            complex.node_coords(idx, &mut x);
            quats[flat] = Quat::from_scaled_axis(&f(&x));
        });
        Self {
            complex: Arc::clone(complex),
            quats,
        }
    }

    #[inline]
    pub fn complex(&self) -> &Arc<CubicalComplex<T>> {
        &self.complex
    }
    #[inline]
    pub fn quats(&self) -> &[Quat<T>] {
        &self.quats
    }

    /// Rotation matrix at a node (for invariant checks and export).
    pub fn rotation(&self, node_flat: usize) -> [[T; 3]; 3] {
        self.quats[node_flat].rotation_matrix()
    }

    /// Largest deviation of `RᵀR` from the identity over all nodes.
    pub fn orthonormality_defect(&self) -> T {
        let mut worst = T::zero();
        for q in &self.quats {
            let m = q.rotation_matrix();
            for i in 0..3 {
                for j in 0..3 {
                    let mut d = T::zero();
                    for k in 0..3 {
                        d += m[k][i] * m[k][j];
                    }
                    let expect = if i == j { T::one() } else { T::zero() };
                    worst = worst.max((d - expect).abs());
                }
            }
        }
        worst
    }

    fn check_same_complex(&self, cx: &Arc<CubicalComplex<T>>, op: &str) -> Result<()> {
        if !Arc::ptr_eq(&self.complex, cx) && !self.complex.same_geometry(cx) {
            return Err(HodgeError::Mismatch {
                what: format!("{op}: gauge and field complexes differ"),
            });
        }
        Ok(())
    }
}

/// Anchor node (lowest corner) of a cell, as a flat node index.
fn anchor_node<T: Real>(cx: &CubicalComplex<T>, idx: &[usize]) -> usize {
    cx.node_flat(idx)
}

/// Curvature of a connection 1-form: componentwise `dA` plus the
/// wedge-bracket `[A∧A]/2` assembled per 2-cell from the averaged edge
/// coefficients of the two spanning directions. Exact (zero bracket) when
/// every coefficient lies on one adjoint axis.
pub fn curvature<T: Real>(a: &LieFormField<T>) -> Result<LieFormField<T>> {
    if a.degree() != 1 {
        return Err(HodgeError::Degree {
            op: "curvature",
            requirement: "q = 1",
            q: a.degree(),
        });
    }
    let mut f = a.exterior_derivative()?;
    let cx = Arc::clone(a.complex());
    let lay1 = cx.layout(1);
    let mut axes = [0usize; MAX_DIM];
    let coeffs = &mut f.coeffs;
    cx.for_each_cell(2, |_, mask, idx, flat| {
        let k = mask_axes(mask, &mut axes);
        debug_assert_eq!(k, 2);
        let (i, j) = (axes[0], axes[1]);
        let avg_edge = |axis: usize| -> Vec3<T> {
            let emask = 1u32 << axis;
            let b = lay1.block_of_mask(emask).expect("edge block");
            let mut sum = [T::zero(); 3];
            let mut cnt = 0usize;
            gather_within(&cx, 1, b, emask, mask, idx, |fl| {
                for c in 0..3 {
                    sum[c] += a.coeffs()[fl][c];
                }
                cnt += 1;
            });
            so3::scale(&sum, T::one() / T::from_usize_lossy(cnt))
        };
        let ai = avg_edge(i);
        let aj = avg_edge(j);
        let br = so3::cross(&ai, &aj);
        for c in 0..3 {
            coeffs[flat][c] += br[c];
        }
    });
    Ok(f)
}

/// Tensorial gauge action on a curvature: rotate each cell's coefficient by
/// the inverse rotation at the cell's anchor node. Pointwise `Q` is exactly
/// invariant (rotations preserve the adjoint norm).
pub fn gauge_transform_curvature<T: Real>(
    f: &LieFormField<T>,
    g: &GaugeField<T>,
) -> Result<LieFormField<T>> {
    g.check_same_complex(f.complex(), "gauge_transform_curvature")?;
    let cx = Arc::clone(f.complex());
    let mut out = f.clone();
    let coeffs = &mut out.coeffs;
    cx.for_each_cell(f.degree(), |_, _, idx, flat| {
        let q = &g.quats[anchor_node(&cx, idx)];
        coeffs[flat] = q.rotate_inv(&coeffs[flat]);
    });
    Ok(out)
}

/// Affine gauge action on a connection: rotated coefficients plus the
/// discrete Maurer-Cartan term `log(g_u⁻¹ g_v)/h` per edge `u → v`.
pub fn gauge_transform_connection<T: Real>(
    a: &LieFormField<T>,
    g: &GaugeField<T>,
) -> Result<LieFormField<T>> {
    if a.degree() != 1 {
        return Err(HodgeError::Degree {
            op: "gauge_transform_connection",
            requirement: "q = 1",
            q: a.degree(),
        });
    }
    g.check_same_complex(a.complex(), "gauge_transform_connection")?;
    let cx = Arc::clone(a.complex());
    let node_lay = cx.layout(0);
    let h = cx.spacing();
    let mut out = a.clone();
    let coeffs = &mut out.coeffs;
    cx.for_each_cell(1, |_, mask, idx, flat| {
        let t = mask.trailing_zeros() as usize;
        let u = node_lay.flat(0, idx);
        let v = u + node_lay.strides[0][t];
        let qu = &g.quats[u];
        let qv = &g.quats[v];
        let rotated = qu.rotate_inv(&coeffs[flat]);
        let mc = qu.conjugate().mul(qv).to_scaled_axis();
        for c in 0..3 {
            coeffs[flat][c] = rotated[c] + mc[c] / h[t];
        }
    });
    Ok(out)
}

/// Energy `Σ e(Q at top-cell center)·vol` of a curvature 2-form.
pub fn gauge_energy<T: Real>(f: &LieFormField<T>, model: &DensityModel<T>) -> Result<T> {
    if f.degree() != 2 {
        return Err(HodgeError::Degree {
            op: "gauge_energy",
            requirement: "q = 2",
            q: f.degree(),
        });
    }
    crate::forms::total_energy(f, model)
}

/// The bracket contraction pairing a connection against a weighted curvature
/// on cells sharing an edge: per `j`-edge, `Σ_{i≠j} [Ḡ_{ij}, ā_i]` with the
/// adjacent faces and edges averaged. This is the discrete counterpart of
/// the inhomogeneous term of the variational equations.
fn bracket_contraction<T: Real>(
    a: &LieFormField<T>,
    g2: &LieFormField<T>,
) -> Result<LieFormField<T>> {
    let cx = Arc::clone(a.complex());
    let n = cx.dim();
    let lay1 = cx.layout(1);
    let lay2 = cx.layout(2);
    let res = cx.resolution();
    let mut out = LieFormField::zeros(&cx, 1)?;
    let coeffs = &mut out.coeffs;
    let mut idx2 = vec![0usize; n];
    cx.for_each_cell(1, |_, emask, idx, flat| {
        let j = emask.trailing_zeros() as usize;
        let mut total = [T::zero(); 3];
        for i in 0..n {
            if i == j {
                continue;
            }
            // average of the (i,j)-faces containing this edge
            let fmask = (1u32 << i) | (1u32 << j);
            let fb = lay2.block_of_mask(fmask).expect("face block");
            let mut gsum = [T::zero(); 3];
            let mut gcnt = 0usize;
            idx2.copy_from_slice(idx);
            for p in [idx[i].checked_sub(1), Some(idx[i])].into_iter().flatten() {
                if p < res[i] {
                    idx2[i] = p;
                    let fl = lay2.flat(fb, &idx2);
                    for c in 0..3 {
                        gsum[c] += g2.coeffs()[fl][c];
                    }
                    gcnt += 1;
                }
            }
            idx2[i] = idx[i];
            let mut gbar = so3::scale(&gsum, T::one() / T::from_usize_lossy(gcnt));
            // stored component is the (min,max) one; flip for i > j
            if i > j {
                gbar = so3::scale(&gbar, -T::one());
            }
            // average of the i-edges touching this edge's endpoints
            let iemask = 1u32 << i;
            let ib = lay1.block_of_mask(iemask).expect("edge block");
            let mut asum = [T::zero(); 3];
            let mut acnt = 0usize;
            for dj in 0..=1usize {
                idx2[j] = idx[j] + dj;
                for p in [idx[i].checked_sub(1), Some(idx[i])].into_iter().flatten() {
                    if p < res[i] {
                        idx2[i] = p;
                        let fl = lay1.flat(ib, &idx2);
                        for c in 0..3 {
                            asum[c] += a.coeffs()[fl][c];
                        }
                        acnt += 1;
                    }
                }
                idx2[i] = idx[i];
            }
            idx2[j] = idx[j];
            let abar = so3::scale(&asum, T::one() / T::from_usize_lossy(acnt));
            let br = so3::cross(&gbar, &abar);
            for c in 0..3 {
                total[c] += br[c];
            }
        }
        coeffs[flat] = total;
    });
    Ok(out)
}

/// Interior norm of the discrete Euler-Lagrange expression
/// `δ(ρ(Q)F) + Σ_{i≠j}[(ρF)_{ij}, A_i]` for a connection/curvature pair.
/// Reduces to the scalar residual when all coefficients share one adjoint
/// axis (the brackets vanish identically).
pub fn nonabelian_el_residual<T: Real>(
    a: &LieFormField<T>,
    f: &LieFormField<T>,
    model: &DensityModel<T>,
) -> Result<T> {
    if a.degree() != 1 || f.degree() != 2 {
        return Err(HodgeError::Degree {
            op: "nonabelian_el_residual",
            requirement: "A of degree 1 and F of degree 2",
            q: f.degree(),
        });
    }
    let qs = f.q_at_cells(2);
    let mut weighted = f.clone();
    for (v, q) in weighted.coeffs_mut().iter_mut().zip(qs) {
        let r = model.rho(q)?;
        for x in v.iter_mut() {
            *x *= r;
        }
    }
    let mut resid = weighted.codifferential()?;
    let brackets = bracket_contraction(a, &weighted)?;
    resid.add_scaled(&brackets, T::one())?;
    Ok(resid.norm_interior())
}

/// Interior norm of `dF + [A, F]` (per 3-cell: cyclic sum of edge/face
/// bracket averages). Vanishes to rounding for abelian data and at `O(h)`
/// when `F = curvature(A)` for smooth `A`.
pub fn bianchi_residual<T: Real>(a: &LieFormField<T>, f: &LieFormField<T>) -> Result<T> {
    if a.degree() != 1 || f.degree() != 2 {
        return Err(HodgeError::Degree {
            op: "bianchi_residual",
            requirement: "A of degree 1 and F of degree 2",
            q: f.degree(),
        });
    }
    let cx = Arc::clone(a.complex());
    if cx.dim() < 3 {
        return Err(HodgeError::Degree {
            op: "bianchi_residual",
            requirement: "n >= 3",
            q: cx.dim(),
        });
    }
    let mut resid = f.exterior_derivative()?;
    let lay1 = cx.layout(1);
    let lay2 = cx.layout(2);
    let mut axes = [0usize; MAX_DIM];
    let coeffs = &mut resid.coeffs;
    cx.for_each_cell(3, |_, mask, idx, flat| {
        let k = mask_axes(mask, &mut axes);
        debug_assert_eq!(k, 3);
        let avg_edge = |axis: usize| -> Vec3<T> {
            let emask = 1u32 << axis;
            let b = lay1.block_of_mask(emask).expect("edge block");
            let mut sum = [T::zero(); 3];
            let mut cnt = 0usize;
            gather_within(&cx, 1, b, emask, mask, idx, |fl| {
                for c in 0..3 {
                    sum[c] += a.coeffs()[fl][c];
                }
                cnt += 1;
            });
            so3::scale(&sum, T::one() / T::from_usize_lossy(cnt))
        };
        let avg_face = |ax1: usize, ax2: usize| -> Vec3<T> {
            let fmask = (1u32 << ax1) | (1u32 << ax2);
            let b = lay2.block_of_mask(fmask).expect("face block");
            let mut sum = [T::zero(); 3];
            let mut cnt = 0usize;
            gather_within(&cx, 2, b, fmask, mask, idx, |fl| {
                for c in 0..3 {
                    sum[c] += f.coeffs()[fl][c];
                }
                cnt += 1;
            });
            so3::scale(&sum, T::one() / T::from_usize_lossy(cnt))
        };
        let (i, j, kk) = (axes[0], axes[1], axes[2]);
        // [A∧F](e_i,e_j,e_k) = [a_i,F_jk] − [a_j,F_ik] + [a_k,F_ij]
        let t1 = so3::cross(&avg_edge(i), &avg_face(j, kk));
        let t2 = so3::cross(&avg_edge(j), &avg_face(i, kk));
        let t3 = so3::cross(&avg_edge(kk), &avg_face(i, j));
        for c in 0..3 {
            coeffs[flat][c] += t1[c] - t2[c] + t3[c];
        }
    });
    Ok(resid.norm_interior())
}

/// Multilinear interpolation of one 1-form component (staggered grid) at an
/// arbitrary point, clamped at the domain boundary.
fn interp_edge_component<T: Real>(
    a: &LieFormField<T>,
    block: usize,
    axis: usize,
    point: &[T],
) -> Vec3<T> {
    let cx = a.complex();
    let n = cx.dim();
    let lay = cx.layout(1);
    let dims = &lay.dims[block];
    let strides = &lay.strides[block];
    let h = cx.spacing();
    let mut cell = [0usize; MAX_DIM];
    let mut frac = [T::zero(); MAX_DIM];
    for i in 0..n {
        let mut u = (point[i] - cx.extents()[i].0) / h[i];
        if i == axis {
            u -= T::half();
        }
        let max_cell = dims[i] - 1;
        let f = u.floor();
        let mut c = if f < T::zero() {
            0usize
        } else {
            (f.to_f64()) as usize
        };
        if c > max_cell.saturating_sub(1) {
            c = max_cell.saturating_sub(1);
        }
        let fr = (u - T::from_usize_lossy(c)).max(T::zero()).min(T::one());
        cell[i] = c;
        frac[i] = fr;
    }
    let mut out = [T::zero(); 3];
    for combo in 0u32..(1u32 << n) {
        let mut wgt = T::one();
        let mut flat = lay.offsets[block];
        for i in 0..n {
            let hi = combo & (1 << i) != 0;
            wgt *= if hi { frac[i] } else { T::one() - frac[i] };
            // single-slot axes collapse both corners onto index 0
            flat += (cell[i] + hi as usize).min(dims[i] - 1) * strides[i];
        }
        for c in 0..3 {
            out[c] += wgt * a.coeffs()[flat][c];
        }
    }
    out
}

/// Result of [`exponential_gauge`]: the transporting gauge field and the
/// transformed connection.
pub struct ExponentialGauge<T> {
    pub gauge: GaugeField<T>,
    pub transformed: LieFormField<T>,
}

/// Build the radial-transport gauge about `center` (a node index): at every
/// node, integrate `g' = −A(ray direction)·g` along the straight ray from
/// the center with 4x oversampling relative to the finest spacing,
/// renormalizing the accumulated rotation each step. In the result the
/// connection vanishes at the center and its radial component is `O(h)`.
pub fn exponential_gauge<T: Real>(
    a: &LieFormField<T>,
    center: &[usize],
) -> Result<ExponentialGauge<T>> {
    if a.degree() != 1 {
        return Err(HodgeError::Degree {
            op: "exponential_gauge",
            requirement: "q = 1",
            q: a.degree(),
        });
    }
    let cx = a.complex();
    let n = cx.dim();
    if center.len() != n || center.iter().zip(cx.resolution()).any(|(&c, &r)| c > r) {
        return Err(HodgeError::Invalid {
            what: "exponential gauge center must be a grid node".into(),
        });
    }
    let lay1 = cx.layout(1);
    let edge_blocks: Vec<usize> = (0..n)
        .map(|ax| lay1.block_of_mask(1u32 << ax).expect("edge block"))
        .collect();
    let mut c0 = vec![T::zero(); n];
    cx.node_coords(center, &mut c0);
    let hmin = cx.min_spacing();
    let mut quats = vec![Quat::identity(); cx.num_nodes()];
    let mut x = vec![T::zero(); n];
    let mut y = vec![T::zero(); n];
    let mut failed = None;
    cx.for_each_cell(0, |_, _, idx, flat| {
        if failed.is_some() {
            return;
        }
        cx.node_coords(idx, &mut x);
        let mut dist2 = T::zero();
        for i in 0..n {
            let d = x[i] - c0[i];
            dist2 += d * d;
        }
        let dist = dist2.sqrt();
        if dist == T::zero() {
            quats[flat] = Quat::identity();
            return;
        }
        let steps = ((T::from_f64_lossy(4.0) * dist / hmin).to_f64().ceil() as usize).max(1);
        let dt = T::one() / T::from_usize_lossy(steps);
        let mut q = Quat::identity();
        for s in 0..steps {
            let tmid = (T::from_usize_lossy(s) + T::half()) * dt;
            let mut step = [T::zero(); 3];
            for i in 0..n {
                y[i] = c0[i] + tmid * (x[i] - c0[i]);
            }
            for i in 0..n {
                let comp = interp_edge_component(a, edge_blocks[i], i, &y);
                let di = (x[i] - c0[i]) * dt;
                for c in 0..3 {
                    step[c] += comp[c] * di;
                }
            }
            q = Quat::from_scaled_axis(&so3::scale(&step, -T::one())).mul(&q);
            let norm = q.norm();
            if !norm.is_finite() {
                failed = Some(HodgeError::GaugeInvalid {
                    what: "radial transport produced a non-finite rotation".into(),
                });
                return;
            }
            q = q.normalized();
        }
        quats[flat] = q;
    });
    if let Some(e) = failed {
        return Err(e);
    }
    let gauge = GaugeField {
        complex: Arc::clone(cx),
        quats,
    };
    let transformed = gauge_transform_connection(a, &gauge)?;
    Ok(ExponentialGauge { gauge, transformed })
}
