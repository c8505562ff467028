//! Stationary points of the nonlinear Hodge energy over a cohomology class
//! `ω = ω₀ + dα` with the potential vanishing on boundary cells.
//!
//! Outer iteration: damped Picard. Each step freezes the density weight
//! `σ = ρ(Q)` on the `q`-cells, solves the linear weighted problem
//! `δ(σ(ω₀ + dβ)) = 0` on interior cells by conjugate gradients, and
//! under-relaxes with a backtracking factor that keeps the step energy
//! non-increasing and the pointwise `Q` below the subsonic margin. For
//! `q = 2` the linear operator has the gradient null space; starting CG from
//! a fixed initial guess keeps the iterates in its orthogonal complement, so
//! no explicit gauge fixing is needed.

use crate::density::DensityModel;
use crate::error::{HodgeError, Result};
use crate::forms::FormField;
use crate::real::Real;

/// Iteration controls for [`solve_stationary`].
#[derive(Clone, Copy, Debug)]
pub struct SolverConfig<T> {
    /// Picard iteration budget.
    pub max_iter: usize,
    /// Relative Euler-Lagrange residual target (relative to `‖ρ(Q)ω‖`).
    pub tol: T,
    /// Initial relaxation factor in (0, 1].
    pub damping: T,
    /// Subsonic safety margin: enforce `max Q ≤ q_margin · q_sonic`.
    pub q_margin: T,
    /// Conjugate gradient budget per linear solve.
    pub cg_max_iter: usize,
    /// Relative conjugate gradient residual target.
    pub cg_tol: T,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            max_iter: 60,
            tol: T::from_f64_lossy(1e-10),
            damping: T::one(),
            q_margin: T::from_f64_lossy(0.98),
            cg_max_iter: 20_000,
            cg_tol: T::from_f64_lossy(1e-12),
        }
    }
}

/// A boundary-value problem: cohomology/boundary data `ω₀` (closed), the
/// density model, and iteration controls.
#[derive(Clone, Debug)]
pub struct BoundaryProblem<T> {
    omega0: FormField<T>,
    model: DensityModel<T>,
    config: SolverConfig<T>,
}

impl<T: Real> BoundaryProblem<T> {
    pub fn new(
        omega0: FormField<T>,
        model: DensityModel<T>,
        config: SolverConfig<T>,
    ) -> Result<Self> {
        let q = omega0.degree();
        if q != 1 && q != 2 {
            return Err(HodgeError::Degree {
                op: "BoundaryProblem",
                requirement: "q in {1, 2}",
                q,
            });
        }
        if !(config.q_margin > T::zero() && config.q_margin <= T::one()) {
            return Err(HodgeError::Invalid {
                what: "q_margin must lie in (0, 1]".into(),
            });
        }
        if !(config.tol > T::zero()) {
            return Err(HodgeError::Invalid {
                what: "residual target must be positive".into(),
            });
        }
        if !(config.damping > T::zero() && config.damping <= T::one()) {
            return Err(HodgeError::Invalid {
                what: "damping must lie in (0, 1]".into(),
            });
        }
        let closed = closedness_residual(&omega0)?;
        let scale = omega0.max_abs().max(T::one()) / omega0.complex().min_spacing();
        if closed > T::from_f64_lossy(1e-12) * scale {
            return Err(HodgeError::Invalid {
                what: format!(
                    "omega0 is not closed: ||d omega0|| = {:e}",
                    closed.to_f64()
                ),
            });
        }
        Ok(Self {
            omega0,
            model,
            config,
        })
    }

    pub fn omega0(&self) -> &FormField<T> {
        &self.omega0
    }
    pub fn model(&self) -> &DensityModel<T> {
        &self.model
    }
    pub fn config(&self) -> &SolverConfig<T> {
        &self.config
    }
}

/// One row of the convergence log.
#[derive(Clone, Copy, Debug)]
pub struct SolveLogEntry<T> {
    pub iter: usize,
    pub energy: T,
    pub el_residual: T,
    pub max_q: T,
}

/// Result of a stationary solve.
#[derive(Clone, Debug)]
pub struct SolveOutput<T> {
    /// The stationary field `ω = ω₀ + dα`.
    pub field: FormField<T>,
    /// The potential `α` (zero on boundary cells).
    pub potential: FormField<T>,
    pub iterations: usize,
    /// Final relative Euler-Lagrange residual.
    pub residual: T,
    pub log: Vec<SolveLogEntry<T>>,
}

/// Norm of `δ(ρ(Q)·f)` over interior cells.
pub fn el_residual<T: Real>(f: &FormField<T>, model: &DensityModel<T>) -> Result<T> {
    if f.degree() == 0 {
        return Err(HodgeError::Degree {
            op: "el_residual",
            requirement: "q >= 1",
            q: 0,
        });
    }
    Ok(f.scaled_by_density(model)?.codifferential()?.norm_interior())
}

/// `el_residual` normalized by `‖ρ(Q)f‖` (scale-free stopping quantity).
pub fn el_residual_relative<T: Real>(f: &FormField<T>, model: &DensityModel<T>) -> Result<T> {
    let weighted = f.scaled_by_density(model)?;
    let denom = weighted.norm().max(T::from_f64_lossy(1e-300));
    Ok(weighted.codifferential()?.norm_interior() / denom)
}

/// Norm of `df`; zero (to rounding) for any `ω₀ + dα` with closed `ω₀`.
pub fn closedness_residual<T: Real>(f: &FormField<T>) -> Result<T> {
    Ok(f.exterior_derivative()?.norm())
}

/// Zero every coefficient on a non-interior cell (the Dirichlet mask for
/// the potential).
fn mask_interior<T: Real>(f: &mut FormField<T>) {
    let cx = f.complex().clone();
    let q = f.degree();
    let coeffs = f.coeffs_mut();
    cx.for_each_cell(q, |_, mask, idx, flat| {
        if !cx.is_interior(mask, idx) {
            coeffs[flat] = T::zero();
        }
    });
}

/// Apply the frozen-coefficient operator `β ↦ δ(σ dβ)` restricted to
/// interior cells. `sigma` holds one weight per `q`-cell.
fn apply_operator<T: Real>(beta: &FormField<T>, sigma: &[T]) -> Result<FormField<T>> {
    let mut g = beta.exterior_derivative()?;
    for (c, &s) in g.coeffs_mut().iter_mut().zip(sigma) {
        *c *= s;
    }
    let mut out = g.codifferential()?;
    mask_interior(&mut out);
    Ok(out)
}

/// Solve `δ(σ(ω₀ + dβ)) = 0` for the interior potential `β` by conjugate
/// gradients in the diagonal-Hodge inner product. Returns the potential and
/// the iteration count.
pub fn solve_linear_potential<T: Real>(
    omega0: &FormField<T>,
    sigma: &[T],
    config: &SolverConfig<T>,
    initial: Option<&FormField<T>>,
) -> Result<(FormField<T>, usize)> {
    let cx = omega0.complex();
    let q = omega0.degree();
    // rhs = -δ(σ ω₀) on interior cells
    let mut rhs = {
        let mut g = omega0.clone();
        for (c, &s) in g.coeffs_mut().iter_mut().zip(sigma) {
            *c *= s;
        }
        g.codifferential()?
    };
    for c in rhs.coeffs_mut() {
        *c = -*c;
    }
    mask_interior(&mut rhs);

    let mut x = match initial {
        Some(f) => {
            let mut f = f.clone();
            mask_interior(&mut f);
            f
        }
        None => FormField::zeros(cx, q - 1)?,
    };
    let ax = apply_operator(&x, sigma)?;
    let mut r = rhs.clone();
    r.add_scaled(&ax, -T::one())?;
    let mut p = r.clone();
    let mut rs = r.inner_product(&r)?;
    let bnorm = rhs.norm().max(T::from_f64_lossy(1e-300));
    let target = config.cg_tol * bnorm;
    let mut iters = 0usize;
    while iters < config.cg_max_iter && rs.sqrt() > target {
        let ap = apply_operator(&p, sigma)?;
        let pap = p.inner_product(&ap)?;
        if !(pap > T::zero()) {
            // direction fell into the null space (q = 2 gauge freedom) or
            // the system is numerically singular: stop here
            break;
        }
        let alpha = rs / pap;
        x.add_scaled(&p, alpha)?;
        r.add_scaled(&ap, -alpha)?;
        let rs_next = r.inner_product(&r)?;
        let beta = rs_next / rs;
        rs = rs_next;
        let mut p_next = r.clone();
        p_next.add_scaled(&p, beta)?;
        p = p_next;
        iters += 1;
    }
    Ok((x, iters))
}

/// Compute a stationary field for the boundary problem. See the module
/// docs for the iteration scheme.
pub fn solve_stationary<T: Real>(problem: &BoundaryProblem<T>) -> Result<SolveOutput<T>> {
    solve_stationary_with_initial(problem, None)
}

/// [`solve_stationary`] with an explicit initial potential (masked to
/// interior cells before use).
pub fn solve_stationary_with_initial<T: Real>(
    problem: &BoundaryProblem<T>,
    initial: Option<&FormField<T>>,
) -> Result<SolveOutput<T>> {
    let cfg = problem.config;
    let model = &problem.model;
    let omega0 = &problem.omega0;
    let q = omega0.degree();
    let q_limit = cfg.q_margin * model.q_sonic();

    let mut alpha = match initial {
        Some(f) => {
            f.check_compatible(&FormField::zeros(omega0.complex(), q - 1)?, "initial potential")?;
            let mut f = f.clone();
            mask_interior(&mut f);
            f
        }
        None => FormField::zeros(omega0.complex(), q - 1)?,
    };
    let mut omega = omega0.clone();
    omega.add_scaled(&alpha.exterior_derivative()?, T::one())?;

    let mut max_q = omega.max_node_q();
    if max_q > q_limit {
        return Err(HodgeError::SubsonicViolation {
            max_q: max_q.to_f64(),
            limit: q_limit.to_f64(),
        });
    }
    let mut energy = omega.total_energy(model)?;
    let mut log = Vec::new();
    let mut residual = el_residual_relative(&omega, model)?;
    let theta_floor = T::from_f64_lossy(1e-8);

    for iter in 0..=cfg.max_iter {
        log.push(SolveLogEntry {
            iter,
            energy,
            el_residual: residual,
            max_q,
        });
        if residual <= cfg.tol {
            return Ok(SolveOutput {
                field: omega,
                potential: alpha,
                iterations: iter,
                residual,
                log,
            });
        }
        if iter == cfg.max_iter {
            break;
        }

        let sigma = {
            let qs = omega.q_at_cells(q);
            let mut s = Vec::with_capacity(qs.len());
            for qv in qs {
                s.push(model.rho(qv)?);
            }
            s
        };
        let (beta, _) = solve_linear_potential(omega0, &sigma, &cfg, Some(&alpha))?;
        let mut direction = beta;
        direction.add_scaled(&alpha, -T::one())?;

        let mut theta = cfg.damping;
        let energy_slack = T::from_f64_lossy(1e-12) * energy.abs().max(T::one());
        loop {
            let mut trial_alpha = alpha.clone();
            trial_alpha.add_scaled(&direction, theta)?;
            let mut trial_omega = omega0.clone();
            trial_omega.add_scaled(&trial_alpha.exterior_derivative()?, T::one())?;
            let trial_max_q = trial_omega.max_node_q();
            if trial_max_q > q_limit {
                theta *= T::half();
                if theta < theta_floor {
                    return Err(HodgeError::SubsonicViolation {
                        max_q: trial_max_q.to_f64(),
                        limit: q_limit.to_f64(),
                    });
                }
                continue;
            }
            let trial_energy = trial_omega.total_energy(model)?;
            if trial_energy <= energy + energy_slack || theta < theta_floor {
                alpha = trial_alpha;
                omega = trial_omega;
                energy = trial_energy;
                max_q = trial_max_q;
                break;
            }
            theta *= T::half();
        }
        residual = el_residual_relative(&omega, model)?;
    }

    Err(HodgeError::NonConvergence {
        iterations: cfg.max_iter,
        residual: residual.to_f64(),
        target: cfg.tol.to_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::CubicalComplex;
    use std::sync::Arc;

    fn centered_box(n: usize, half: f64, res: usize) -> Arc<CubicalComplex<f64>> {
        let extents: Vec<(f64, f64)> = (0..n).map(|_| (-half, half)).collect();
        Arc::new(CubicalComplex::new(&extents, &vec![res; n]).unwrap())
    }

    fn grad_of(cx: &Arc<CubicalComplex<f64>>, f: impl Fn(&[f64]) -> f64) -> FormField<f64> {
        FormField::from_node_fn(cx, f).exterior_derivative().unwrap()
    }

    #[test]
    fn closedness_examples() {
        let cx = centered_box(3, 1.0, 8);
        let dx1 = grad_of(&cx, |x| x[0]);
        assert!(closedness_residual(&dx1).unwrap() < 1e-13);
        // any ω₀ + dα stays closed up to rounding
        let phi = FormField::from_node_fn(&cx, |x| (x[0] * 3.0).sin() * x[1]);
        let mut w = dx1.clone();
        w.add_scaled(&phi.exterior_derivative().unwrap(), 1.0).unwrap();
        let scale = w.max_abs() / cx.min_spacing();
        assert!(closedness_residual(&w).unwrap() <= 1e-14 * scale * 10.0);
    }

    #[test]
    fn closedness_of_single_edge_matches_hand_computation() {
        // Unit box, 4^3 grid, h = 0.25. One unit coefficient on the x0-edge
        // at (1,2,2). Its coboundary has four entries of magnitude 1/h = 4,
        // each on a 2-cell of weight h^3, so ||d f|| = sqrt(4 * h^3 * 16) = 1.
        let extents: [(f64, f64); 3] = [(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)];
        let cx = Arc::new(CubicalComplex::new(&extents, &[4, 4, 4]).unwrap());
        let mut f = FormField::zeros(&cx, 1).unwrap();
        let lay = cx.layout(1);
        let b = lay.block_of_mask(0b001).unwrap();
        let flat = lay.flat(b, &[1, 2, 2]);
        f.coeffs_mut()[flat] = 1.0;
        let r = closedness_residual(&f).unwrap();
        assert!((r - 1.0).abs() < 1e-12, "{r}");
    }

    #[test]
    fn el_residual_examples() {
        let cx = centered_box(3, 1.0, 16);
        let model = DensityModel::constant();
        let zero = FormField::zeros(&cx, 1).unwrap();
        assert_eq!(el_residual(&zero, &model).unwrap(), 0.0);
        for m in [
            DensityModel::constant(),
            DensityModel::polytropic(1.4).unwrap(),
            DensityModel::born_infeld(),
        ] {
            let dx1 = grad_of(&cx, |x| x[0] * 0.5);
            assert!(el_residual(&dx1, &m).unwrap() < 1e-12, "{}", m.kind_name());
        }
        // harmonic field, constant density: residual at rounding level
        let cx = centered_box(3, 1.0, 32);
        let w = grad_of(&cx, |x| x[0] * x[0] - 0.5 * (x[1] * x[1] + x[2] * x[2]));
        let r = el_residual(&w, &model).unwrap();
        assert!(r <= 0.25 * cx.min_spacing(), "{r}");
        // degree-0 input is rejected
        let phi = FormField::zeros(&cx, 0).unwrap();
        assert!(el_residual(&phi, &model).is_err());
        // Q beyond cavitation surfaces as a density domain error
        let poly = DensityModel::polytropic(1.4).unwrap();
        let big = grad_of(&cx, |x| 4.0 * x[0]);
        assert!(matches!(
            el_residual(&big, &poly),
            Err(crate::error::HodgeError::DensityDomain { .. })
        ));
    }

    #[test]
    fn uniform_data_is_exactly_stationary() {
        let cx = centered_box(3, 1.0, 12);
        for (model, scale) in [
            (DensityModel::constant(), 1.0),
            (DensityModel::polytropic(1.4).unwrap(), 0.5),
        ] {
            let omega0 = grad_of(&cx, |x| scale * x[0]);
            let problem =
                BoundaryProblem::new(omega0.clone(), model, SolverConfig::default()).unwrap();
            let out = solve_stationary(&problem).unwrap();
            assert_eq!(out.iterations, 0);
            let mut diff: f64 = 0.0;
            for (a, b) in out.field.coeffs().iter().zip(omega0.coeffs()) {
                diff = diff.max((a - b).abs());
            }
            assert!(diff <= 1e-12, "{}: {diff}", model.kind_name());
            assert!(el_residual(&out.field, &model).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn subsonic_precondition_is_enforced() {
        let cx = centered_box(3, 1.0, 8);
        let model = DensityModel::polytropic(1.4).unwrap();
        // Q = 1 exceeds 0.98 * q_sonic = 0.8166...
        let omega0 = grad_of(&cx, |x| x[0]);
        let problem = BoundaryProblem::new(omega0, model, SolverConfig::default()).unwrap();
        assert!(matches!(
            solve_stationary(&problem),
            Err(HodgeError::SubsonicViolation { .. })
        ));
    }

    #[test]
    fn polytropic_solve_converges_and_descends() {
        let cx = centered_box(3, 1.2, 12);
        let model = DensityModel::polytropic(1.4).unwrap();
        let omega0 = grad_of(&cx, |x| {
            0.2 * (x[0] * x[0] - 0.5 * (x[1] * x[1] + x[2] * x[2]))
        });
        let problem = BoundaryProblem::new(omega0, model, SolverConfig::default()).unwrap();
        let out = solve_stationary(&problem).unwrap();
        assert!(out.residual <= 1e-10);
        assert!(out.iterations >= 1);
        for pair in out.log.windows(2) {
            assert!(pair[1].energy <= pair[0].energy + 1e-12 * pair[0].energy.abs().max(1.0));
        }
        let limit = 0.98 * model.q_sonic();
        for entry in &out.log {
            assert!(entry.max_q <= limit);
        }
        // solver output stays closed
        let scale = out.field.max_abs() / cx.min_spacing();
        assert!(closedness_residual(&out.field).unwrap() <= 1e-13 * scale.max(1.0));
    }

    #[test]
    fn exhausted_budget_reports_final_residual() {
        let cx = centered_box(3, 1.0, 8);
        let model = DensityModel::polytropic(1.4).unwrap();
        let omega0 = grad_of(&cx, |x| {
            0.2 * (x[0] * x[0] - 0.5 * (x[1] * x[1] + x[2] * x[2]))
        });
        let config = SolverConfig {
            max_iter: 1,
            tol: 1e-14,
            ..SolverConfig::default()
        };
        let problem = BoundaryProblem::new(omega0, model, config).unwrap();
        match solve_stationary(&problem) {
            Err(HodgeError::NonConvergence {
                iterations,
                residual,
                target,
            }) => {
                assert_eq!(iterations, 1);
                assert!(residual > target);
            }
            other => panic!("expected NonConvergence, got {other:?}"),
        }
    }

    #[test]
    fn constant_density_matches_plain_linear_solve() {
        let cx = centered_box(3, 1.0, 10);
        let model = DensityModel::constant();
        let omega0 = grad_of(&cx, |x| 0.3 * (x[0] * x[0] * x[0] - x[1] * x[2]));
        let problem =
            BoundaryProblem::new(omega0.clone(), model, SolverConfig::default()).unwrap();
        let out = solve_stationary(&problem).unwrap();
        let sigma = vec![1.0; cx.num_cells(1)];
        let (alpha, _) =
            solve_linear_potential(&omega0, &sigma, &SolverConfig::default(), None).unwrap();
        let mut linear = omega0.clone();
        linear
            .add_scaled(&alpha.exterior_derivative().unwrap(), 1.0)
            .unwrap();
        let mut diff: f64 = 0.0;
        for (a, b) in out.field.coeffs().iter().zip(linear.coeffs()) {
            diff = diff.max((a - b).abs());
        }
        assert!(diff <= 1e-9, "{diff}");
    }

    #[test]
    fn q2_solve_is_insensitive_to_gauge_offset() {
        let cx = centered_box(3, 1.0, 8);
        let model = DensityModel::polytropic(1.4).unwrap();
        // closed 2-form data: d of a 1-cochain sampling 0.3 x^1 dx^2
        let a = FormField::from_component_fn(&cx, 1, |axes, x| {
            if axes[0] == 1 {
                0.3 * x[0]
            } else {
                0.0
            }
        })
        .unwrap();
        let omega0 = a.exterior_derivative().unwrap();
        let problem =
            BoundaryProblem::new(omega0.clone(), model, SolverConfig::default()).unwrap();
        let base = solve_stationary(&problem).unwrap();

        // gauge offset: d of an interior-supported node function
        let beta = FormField::from_node_fn(&cx, |x| {
            let bump = |t: f64| (1.0 - (t / 0.5).powi(2)).max(0.0);
            0.2 * bump(x[0]) * bump(x[1]) * bump(x[2])
        });
        let offset = beta.exterior_derivative().unwrap();
        let shifted = solve_stationary_with_initial(&problem, Some(&offset)).unwrap();

        let mut diff: f64 = 0.0;
        for (a, b) in base.field.coeffs().iter().zip(shifted.field.coeffs()) {
            diff = diff.max((a - b).abs());
        }
        assert!(diff <= 1e-8, "gauge offset changed the field by {diff}");
    }
}
