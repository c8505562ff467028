//! Radial energy profiles, conformal energies, the inner-variation identity,
//! Liouville growth checks, and singular-set cutoff experiments.
//!
//! All quadratures run over top-cell centers. The radial bump η is the
//! decreasing cubic smoothstep: 1 on `[0, τ]`, `1 − s²(3 − 2s)` with
//! `s = (r−τ)/δ` on the taper, 0 beyond `τ+δ`; it is C¹ with η′ ≤ 0.

use crate::density::DensityModel;
use crate::error::{HodgeError, Result};
use crate::forms::{ball_inclusion_weight, BallQuadrature, EnergyField, FormField};
use crate::real::Real;

/// Absolute floor below which energies/residuals are treated as zero.
const ZERO_FLOOR: f64 = 1e-14;

/// Sampled ball energies about one center.
#[derive(Clone, Debug)]
pub struct RadialEnergyProfile<T> {
    pub center: Vec<T>,
    pub radii: Vec<T>,
    pub energies: Vec<T>,
    pub degree: usize,
    pub dim: usize,
    pub model_id: String,
    /// Maximum nodal `Q` over the largest sampled ball (consistency data
    /// for the Liouville verdict).
    pub max_q_largest_ball: T,
}

/// Ball energies `E|B_r` for each radius, computed in one sweep over the
/// top cells. Requires strictly increasing radii with every ball inside
/// the domain.
pub fn radial_profile<T: Real, F: EnergyField<T>>(
    field: &F,
    model: &DensityModel<T>,
    center: &[T],
    radii: &[T],
    mode: BallQuadrature,
) -> Result<RadialEnergyProfile<T>> {
    let cx = field.complex();
    if radii.is_empty() {
        return Err(HodgeError::Invalid {
            what: "radial_profile needs at least one radius".into(),
        });
    }
    for pair in radii.windows(2) {
        if !(pair[0] < pair[1]) {
            return Err(HodgeError::Invalid {
                what: "radii must be strictly increasing".into(),
            });
        }
    }
    let r_max = radii[radii.len() - 1];
    if !cx.contains_ball(center, r_max) {
        return Err(HodgeError::Geometry {
            what: format!("ball of radius {} exits the domain", r_max.to_f64()),
        });
    }
    let n = cx.dim();
    let vol = cx.cell_volume();
    let mut energies = vec![T::zero(); radii.len()];
    let mut err = None;
    cx.for_each_cell(n, |_, _, idx, _| {
        if err.is_some() {
            return;
        }
        // cheap reject: weight for the largest ball
        let w_max = ball_inclusion_weight(cx, idx, center, r_max, mode);
        if w_max == T::zero() {
            return;
        }
        let e = match model.e(field.q_at_ncell(idx)) {
            Ok(e) => e,
            Err(e) => {
                err = Some(e);
                return;
            }
        };
        for (k, &r) in radii.iter().enumerate() {
            let w = if k + 1 == radii.len() {
                w_max
            } else {
                ball_inclusion_weight(cx, idx, center, r, mode)
            };
            if w > T::zero() {
                energies[k] += e * vol * w;
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }

    // max nodal Q over the largest ball
    let mut max_q = T::zero();
    {
        let mut x = vec![T::zero(); n];
        let r2 = r_max * r_max;
        let nodal = field.node_q();
        cx.for_each_cell(0, |_, _, idx, flat| {
            cx.node_coords(idx, &mut x);
            let mut d2 = T::zero();
            for i in 0..n {
                let d = x[i] - center[i];
                d2 += d * d;
            }
            if d2 <= r2 {
                max_q = max_q.max(nodal[flat]);
            }
        });
    }

    Ok(RadialEnergyProfile {
        center: center.to_vec(),
        radii: radii.to_vec(),
        energies,
        degree: field.degree(),
        dim: n,
        model_id: model.id(),
        max_q_largest_ball: max_q,
    })
}

/// `r^(2q−n)·E|B_r` per radius. Needs the dimension hypothesis `n > 2q`.
pub fn conformal_energy<T: Real>(p: &RadialEnergyProfile<T>) -> Result<Vec<T>> {
    if p.dim <= 2 * p.degree {
        return Err(HodgeError::DimensionHypothesis {
            n: p.dim,
            q: p.degree,
        });
    }
    let expo = 2.0 * p.degree as f64 - p.dim as f64;
    Ok(p.radii
        .iter()
        .zip(&p.energies)
        .map(|(&r, &e)| r.powf(T::from_f64_lossy(expo)) * e)
        .collect())
}

/// Outcome of a conformal monotonicity check.
#[derive(Clone, Debug)]
pub struct MonotonicityReport<T> {
    pub pass: bool,
    pub conformal: Vec<T>,
    /// Largest absolute drop `max(0, c_k − c_{k+1})` between consecutive
    /// conformal energies.
    pub max_violation: T,
    /// Radii bracketing the worst drop, when one exists.
    pub worst_pair: Option<(T, T)>,
    pub tol: T,
}

/// Pass iff the conformal energies are nondecreasing up to the relative
/// slack `tol`.
pub fn monotonicity_check<T: Real>(
    p: &RadialEnergyProfile<T>,
    tol: T,
) -> Result<MonotonicityReport<T>> {
    let conformal = conformal_energy(p)?;
    let floor = T::from_f64_lossy(ZERO_FLOOR);
    let mut max_violation = T::zero();
    let mut worst_pair = None;
    let mut pass = true;
    for k in 0..conformal.len().saturating_sub(1) {
        let (a, b) = (conformal[k], conformal[k + 1]);
        let drop = a - b;
        if drop > max_violation {
            max_violation = drop;
            worst_pair = Some((p.radii[k], p.radii[k + 1]));
        }
        if drop > tol * a.abs().max(b.abs()).max(floor) {
            pass = false;
        }
    }
    Ok(MonotonicityReport {
        pass,
        conformal,
        max_violation,
        worst_pair,
        tol,
    })
}

/// Radial bump for inner variations: plateau radius τ, taper width δ.
#[derive(Clone, Copy, Debug)]
pub struct VariationSpec<T> {
    tau: T,
    delta: T,
}

impl<T: Real> VariationSpec<T> {
    pub fn new(tau: T, delta: T) -> Result<Self> {
        if !(tau > T::zero() && delta > T::zero()) {
            return Err(HodgeError::Invalid {
                what: "variation spec needs tau > 0 and delta > 0".into(),
            });
        }
        Ok(Self { tau, delta })
    }

    pub fn tau(&self) -> T {
        self.tau
    }
    pub fn delta(&self) -> T {
        self.delta
    }
    pub fn support_radius(&self) -> T {
        self.tau + self.delta
    }

    /// η(r): 1 on the plateau, decreasing C¹ taper, 0 beyond τ+δ.
    pub fn eta(&self, r: T) -> T {
        if r <= self.tau {
            T::one()
        } else if r >= self.tau + self.delta {
            T::zero()
        } else {
            let s = (r - self.tau) / self.delta;
            T::one() - s * s * (T::from_f64_lossy(3.0) - T::two() * s)
        }
    }

    /// η′(r) ≤ 0 everywhere.
    pub fn eta_prime(&self, r: T) -> T {
        if r <= self.tau || r >= self.tau + self.delta {
            T::zero()
        } else {
            let s = (r - self.tau) / self.delta;
            -T::from_f64_lossy(6.0) * s * (T::one() - s) / self.delta
        }
    }
}

/// The quadratures entering the first-variation identity and the derived
/// inequality: volume term `∫e(Q)(nη + rη′)`, field terms
/// `2q∫Qρ(Q)η` and `2q∫ρ(Q) rη′ |∂_r ⌟ ω|²`, plus `∫e(Q)η`.
#[derive(Clone, Copy, Debug)]
pub struct InnerVariationTerms<T> {
    pub lhs_volume: T,
    pub rhs_q: T,
    pub rhs_radial: T,
    pub eta_energy: T,
}

impl<T: Real> InnerVariationTerms<T> {
    /// |LHS − RHS| / max(|LHS|, floor); near zero only for discretely
    /// r-stationary fields.
    pub fn relative_residual(&self) -> T {
        let lhs = self.lhs_volume;
        let rhs = self.rhs_q + self.rhs_radial;
        (lhs - rhs).abs() / lhs.abs().max(T::from_f64_lossy(ZERO_FLOOR))
    }

    /// Slack of the one-sided inequality obtained by replacing `Qρ ≤ e`:
    /// `rhs_radial − (lhs_volume − 2q·eta_energy)`; nonnegative up to
    /// discretization for stationary fields with ρ′ ≤ 0.
    pub fn inequality_gap(&self, degree: usize) -> T {
        self.rhs_radial - (self.lhs_volume - T::two() * T::from_usize_lossy(degree) * self.eta_energy)
    }
}

/// Evaluate the inner-variation quadratures for a scalar form field.
pub fn inner_variation_terms<T: Real>(
    field: &FormField<T>,
    model: &DensityModel<T>,
    spec: &VariationSpec<T>,
    center: &[T],
) -> Result<InnerVariationTerms<T>> {
    let cx = field.complex();
    let n = cx.dim();
    let q = field.degree();
    if spec.support_radius() > cx.inscribed_radius(center) {
        return Err(HodgeError::Geometry {
            what: format!(
                "variation support {} exceeds the inscribed radius {}",
                spec.support_radius().to_f64(),
                cx.inscribed_radius(center).to_f64()
            ),
        });
    }
    let contraction = field.radial_contraction_sq(center)?;
    let vol = cx.cell_volume();
    let two_q = T::two() * T::from_usize_lossy(q);
    let nn = T::from_usize_lossy(n);
    let mut terms = InnerVariationTerms {
        lhs_volume: T::zero(),
        rhs_q: T::zero(),
        rhs_radial: T::zero(),
        eta_energy: T::zero(),
    };
    let mut x = vec![T::zero(); n];
    let mut err = None;
    let lay = cx.layout(n);
    cx.for_each_cell(n, |_, mask, idx, _| {
        if err.is_some() {
            return;
        }
        cx.cell_center(mask, idx, &mut x);
        let mut r2 = T::zero();
        for i in 0..n {
            let d = x[i] - center[i];
            r2 += d * d;
        }
        let r = r2.sqrt();
        if r >= spec.support_radius() {
            return;
        }
        let eta = spec.eta(r);
        let etap = spec.eta_prime(r);
        let qv = field.q_at_ncell(idx);
        let (e, rho) = match (model.e(qv), model.rho(qv)) {
            (Ok(e), Ok(rho)) => (e, rho),
            (Err(e), _) | (_, Err(e)) => {
                err = Some(e);
                return;
            }
        };
        let flat = lay.flat(0, idx);
        terms.lhs_volume += e * (nn * eta + r * etap) * vol;
        terms.eta_energy += e * eta * vol;
        terms.rhs_q += two_q * qv * rho * eta * vol;
        terms.rhs_radial += two_q * rho * r * etap * contraction[flat] * vol;
    });
    match err {
        Some(e) => Err(e),
        None => Ok(terms),
    }
}

/// Relative residual of the first-variation identity.
pub fn inner_variation_residual<T: Real>(
    field: &FormField<T>,
    model: &DensityModel<T>,
    spec: &VariationSpec<T>,
    center: &[T],
) -> Result<T> {
    Ok(inner_variation_terms(field, model, spec, center)?.relative_residual())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiouvilleVerdict {
    /// Growth slow enough that the field must vanish (Q ≡ 0 expected).
    Forced,
    NoConclusion,
}

#[derive(Clone, Debug)]
pub struct LiouvilleReport<T> {
    pub verdict: LiouvilleVerdict,
    /// Least-squares growth exponent of `E|B_r ≈ C·r^k̂`.
    pub fitted_exponent: T,
    /// The decisive combination `2q + k − n` for the supplied `k`.
    pub criterion_exponent: T,
    /// Whether max pointwise Q on the largest ball is below `q_tol`.
    pub consistent: bool,
    pub max_q: T,
}

/// Fit `ln y = slope·ln x + c` by ordinary least squares.
pub fn fit_power_law<T: Real>(xs: &[T], ys: &[T]) -> Option<(T, T)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = T::from_usize_lossy(xs.len());
    let mut sx = T::zero();
    let mut sy = T::zero();
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x > T::zero() && y > T::zero()) {
            return None;
        }
        let lx = x.ln();
        let ly = y.ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let denom = n * sxx - sx * sx;
    if denom == T::zero() {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    Some((slope, intercept))
}

/// Growth check: fit `Ê|B_r ≈ C·r^k̂` on the profile and raise the
/// Liouville flag iff `k̂ ≤ k` and `2q + k − n < 0`. Radii with energies
/// below the zero floor are excluded from the fit; an all-zero profile
/// trivially satisfies any growth bound.
pub fn liouville_check<T: Real>(
    p: &RadialEnergyProfile<T>,
    k: T,
    q_tol: T,
) -> Result<LiouvilleReport<T>> {
    if p.radii.len() < 3 {
        return Err(HodgeError::Invalid {
            what: "liouville_check needs at least 3 radii".into(),
        });
    }
    if p.dim <= 2 * p.degree {
        return Err(HodgeError::DimensionHypothesis {
            n: p.dim,
            q: p.degree,
        });
    }
    if k < T::zero() {
        return Err(HodgeError::Invalid {
            what: "growth exponent k must be nonnegative".into(),
        });
    }
    let scale = p.energies.iter().fold(T::zero(), |a, &e| a.max(e));
    let floor = T::from_f64_lossy(ZERO_FLOOR) * scale.max(T::one());
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&r, &e) in p.radii.iter().zip(&p.energies) {
        if e > floor {
            xs.push(r);
            ys.push(e);
        }
    }
    let fitted = if xs.len() >= 2 {
        fit_power_law(&xs, &ys)
            .map(|(s, _)| s)
            .unwrap_or_else(T::zero)
    } else {
        T::zero()
    };
    let criterion =
        T::from_usize_lossy(2 * p.degree) + k - T::from_usize_lossy(p.dim);
    let slack = T::from_f64_lossy(1e-9);
    let verdict = if fitted <= k + slack && criterion < T::zero() {
        LiouvilleVerdict::Forced
    } else {
        LiouvilleVerdict::NoConclusion
    };
    Ok(LiouvilleReport {
        verdict,
        fitted_exponent: fitted,
        criterion_exponent: criterion,
        consistent: p.max_q_largest_ball <= q_tol,
        max_q: p.max_q_largest_ball,
    })
}

/// The singular set of a cutoff experiment.
#[derive(Clone, Debug)]
pub enum SingularSet<T> {
    /// A single point (codimension n).
    Point(Vec<T>),
    /// Axis-aligned box `[lo, hi]`; the codimension is the number of
    /// degenerate axes (`lo_i == hi_i`).
    Box { lo: Vec<T>, hi: Vec<T> },
}

impl<T: Real> SingularSet<T> {
    pub fn codimension(&self, n: usize) -> usize {
        match self {
            SingularSet::Point(_) => n,
            SingularSet::Box { lo, hi } => {
                lo.iter().zip(hi).filter(|(a, b)| *a == *b).count()
            }
        }
    }

    /// Euclidean distance from `x` to the set.
    pub fn distance(&self, x: &[T]) -> T {
        match self {
            SingularSet::Point(p) => {
                let mut d2 = T::zero();
                for i in 0..p.len() {
                    let d = x[i] - p[i];
                    d2 += d * d;
                }
                d2.sqrt()
            }
            SingularSet::Box { lo, hi } => {
                let mut d2 = T::zero();
                for i in 0..lo.len() {
                    let c = x[i].max(lo[i]).min(hi[i]);
                    let d = x[i] - c;
                    d2 += d * d;
                }
                d2.sqrt()
            }
        }
    }

    /// Reference point used as the radial origin for η and the annuli.
    pub fn anchor(&self) -> Vec<T> {
        match self {
            SingularSet::Point(p) => p.clone(),
            SingularSet::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(&a, &b)| (a + b) * T::half())
                .collect(),
        }
    }
}

/// Cutoff profile family around the singular set.
#[derive(Clone, Copy, Debug)]
pub enum CutoffFamily<T> {
    /// ζ = 0 on `B_σ`, linear ramp on `[σ, 2σ]`, 1 outside; |ζ′| = 1/σ.
    Ramp { sigma: T },
    /// χ = 1 for `d ≤ r_in(ν)`, `log(r_out/d)/log(r_out/r_in)` in between,
    /// 0 beyond `r_out`, with `r_in = r_out·ratio^(−ν)`. The standard
    /// zero-capacity construction; `‖∇χ‖_{L^m} → 0` as ν grows for m > 1.
    LogCapacity { nu: u32, r_out: T, ratio: T },
}

impl<T: Real> CutoffFamily<T> {
    /// Inner and outer radii of the transition shell.
    pub fn shell(&self) -> (T, T) {
        match *self {
            CutoffFamily::Ramp { sigma } => (sigma, T::two() * sigma),
            CutoffFamily::LogCapacity { nu, r_out, ratio } => {
                (r_out * ratio.powi(-(nu as i32)), r_out)
            }
        }
    }

    /// |gradient| of the profile at distance `d` from the set.
    pub fn grad_abs(&self, d: T) -> T {
        let (lo, hi) = self.shell();
        if d <= lo || d >= hi {
            return T::zero();
        }
        match *self {
            CutoffFamily::Ramp { sigma } => T::one() / sigma,
            CutoffFamily::LogCapacity { .. } => T::one() / (d * (hi / lo).ln()),
        }
    }

    /// Largest slope of the profile (attained at the inner shell radius for
    /// the log family; constant for the ramp).
    pub fn max_slope(&self) -> T {
        let (lo, hi) = self.shell();
        match *self {
            CutoffFamily::Ramp { sigma } => T::one() / sigma,
            CutoffFamily::LogCapacity { .. } => T::one() / (lo * (hi / lo).ln()),
        }
    }
}

/// A cutoff experiment: the singular set and the profile family.
#[derive(Clone, Debug)]
pub struct CutoffSpec<T> {
    pub singular_set: SingularSet<T>,
    pub family: CutoffFamily<T>,
}

/// Quadrature outputs of a cutoff experiment.
#[derive(Clone, Copy, Debug)]
pub struct CutoffTerms<T> {
    /// `‖∇profile‖_{L^m}` with m the codimension of the set.
    pub grad_norm_lm: T,
    /// `‖Q‖_{L^{m/(m−1)}}` over the domain.
    pub q_norm_dual: T,
    /// `∫_shell e(Q)·η` over the transition shell.
    pub annulus_e: T,
    /// `∫_shell ρ(Q)·η·|∂_r ⌟ ω|²` over the transition shell.
    pub annulus_radial: T,
    /// Largest profile slope (for the ramp this is exactly 1/σ).
    pub max_slope: T,
    pub codimension: usize,
}

/// Evaluate the cutoff quadratures for a scalar form field. The radial
/// coordinate of η is measured from the singular set's anchor point.
pub fn cutoff_terms<T: Real>(
    field: &FormField<T>,
    model: &DensityModel<T>,
    spec: &CutoffSpec<T>,
    eta: &VariationSpec<T>,
) -> Result<CutoffTerms<T>> {
    let cx = field.complex();
    let n = cx.dim();
    let m = spec.singular_set.codimension(n);
    if m <= 2 || m > n {
        return Err(HodgeError::Invalid {
            what: format!("singular set codimension {m} outside (2, {n}]"),
        });
    }
    let anchor = spec.singular_set.anchor();
    if eta.support_radius() > cx.inscribed_radius(&anchor) {
        return Err(HodgeError::Geometry {
            what: "variation support exceeds the inscribed radius about the singular set".into(),
        });
    }
    let (shell_lo, shell_hi) = spec.family.shell();
    if !(shell_lo > T::zero() && shell_lo < shell_hi) {
        return Err(HodgeError::Invalid {
            what: "cutoff transition shell is empty".into(),
        });
    }
    let contraction = field.radial_contraction_sq(&anchor)?;
    let vol = cx.cell_volume();
    let m_t = T::from_usize_lossy(m);
    let dual = m_t / (m_t - T::one());
    let mut grad_m = T::zero();
    let mut q_dual = T::zero();
    let mut annulus_e = T::zero();
    let mut annulus_radial = T::zero();
    let mut x = vec![T::zero(); n];
    let mut err = None;
    let lay = cx.layout(n);
    cx.for_each_cell(n, |_, mask, idx, _| {
        if err.is_some() {
            return;
        }
        cx.cell_center(mask, idx, &mut x);
        let d = spec.singular_set.distance(&x);
        let mut r2 = T::zero();
        for i in 0..n {
            let dd = x[i] - anchor[i];
            r2 += dd * dd;
        }
        let r = r2.sqrt();
        let qv = field.q_at_ncell(idx);
        let g = spec.family.grad_abs(d);
        if g > T::zero() {
            grad_m += g.powf(m_t) * vol;
        }
        q_dual += qv.powf(dual) * vol;
        if d >= shell_lo && d <= shell_hi {
            let etav = eta.eta(r);
            if etav > T::zero() {
                let (e, rho) = match (model.e(qv), model.rho(qv)) {
                    (Ok(e), Ok(rho)) => (e, rho),
                    (Err(e), _) | (_, Err(e)) => {
                        err = Some(e);
                        return;
                    }
                };
                let flat = lay.flat(0, idx);
                annulus_e += e * etav * vol;
                annulus_radial += rho * etav * contraction[flat] * vol;
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(CutoffTerms {
        grad_norm_lm: grad_m.powf(T::one() / m_t),
        q_norm_dual: q_dual.powf(T::one() / dual),
        annulus_e,
        annulus_radial,
        max_slope: spec.family.max_slope(),
        codimension: m,
    })
}
