//! Discrete exterior calculus toolkit for nonlinear Hodge energies.
//!
//! The crate works with cochains on a flat cubical complex and provides:
//!
//! * energy density models ρ(Q) with their integrals and ellipticity
//!   classification ([`density`]),
//! * the cochain calculus: exterior derivative, adjoint codifferential,
//!   inner products, pointwise `Q`, and ball-restricted energy quadrature
//!   ([`complex`], [`forms`]),
//! * stationary fields over a cohomology class by damped Picard iteration
//!   ([`solver`]),
//! * so(3)-valued connections: curvature, gauge actions, Euler-Lagrange and
//!   Bianchi residuals, exponential gauges ([`gauge`]),
//! * radial energy profiles, conformal monotonicity, the inner-variation
//!   identity, Liouville growth verdicts, and singular-set cutoff
//!   experiments ([`monotonicity`]),
//! * an analytic field catalog and binary snapshot I/O ([`catalog`],
//!   [`snapshot`]).
//!
//! All numerics are generic over the scalar type through [`Real`]; the
//! `*64` aliases below fix `f64`, which the documented tolerances assume.

// Negated comparisons like `!(x > 0)` reject NaN where `x <= 0` would not;
// indexed loops over fixed small component counts mirror the stencil math.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod catalog;
pub mod complex;
pub mod density;
pub mod error;
pub mod forms;
pub mod gauge;
pub mod monotonicity;
pub mod real;
pub mod snapshot;
pub mod so3;
pub mod solver;

pub use complex::CubicalComplex;
pub use density::{DensityKind, DensityLaw, DensityModel, EllipticityClass};
pub use error::{HodgeError, Result};
pub use forms::{ball_energy, total_energy, BallQuadrature, EnergyField, FormField};
pub use gauge::{
    bianchi_residual, curvature, exponential_gauge, gauge_energy, gauge_transform_connection,
    gauge_transform_curvature, nonabelian_el_residual, ExponentialGauge, GaugeField,
    LieFormField,
};
pub use monotonicity::{
    conformal_energy, cutoff_terms, fit_power_law, inner_variation_residual,
    inner_variation_terms, liouville_check, monotonicity_check, radial_profile, CutoffFamily,
    CutoffSpec, CutoffTerms, InnerVariationTerms, LiouvilleReport, LiouvilleVerdict,
    MonotonicityReport, RadialEnergyProfile, SingularSet, VariationSpec,
};
pub use real::Real;
pub use solver::{
    closedness_residual, el_residual, el_residual_relative, solve_linear_potential,
    solve_stationary, solve_stationary_with_initial, BoundaryProblem, SolveLogEntry,
    SolveOutput, SolverConfig,
};

/// `f64` aliases for the main types.
pub type CubicalComplex64 = CubicalComplex<f64>;
pub type FormField64 = FormField<f64>;
pub type LieFormField64 = LieFormField<f64>;
pub type GaugeField64 = GaugeField<f64>;
pub type DensityModel64 = DensityModel<f64>;
pub type BoundaryProblem64 = BoundaryProblem<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type VariationSpec64 = VariationSpec<f64>;
pub type CutoffSpec64 = CutoffSpec<f64>;

/// `f32` aliases (reduced-precision experiments).
pub type CubicalComplex32 = CubicalComplex<f32>;
pub type FormField32 = FormField<f32>;
pub type LieFormField32 = LieFormField<f32>;
pub type DensityModel32 = DensityModel<f32>;
