//! Analytic field catalog baked into the library so every experiment and
//! test runs without external data.
//!
//! Gradient-type entries are built as `d` of node samples of the potential,
//! which makes them exactly closed and, by the fundamental theorem of
//! calculus, gives exact cell averages of the gradient components. The
//! radial-power entry samples components at cell centers instead (its
//! potential is singular at the origin); it is meant for verification
//! quadratures, not as solver boundary data.

use std::str::FromStr;
use std::sync::Arc;

use crate::complex::CubicalComplex;
use crate::error::{HodgeError, Result};
use crate::forms::FormField;
use crate::gauge::LieFormField;
use crate::real::Real;

/// Named analytic fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CatalogField {
    /// `ω = scale·dx¹` (q = 1) or `scale·dx¹∧dx²` (q = 2).
    Uniform,
    /// `ω = dφ` with `φ = scale·(x₁² − (x₂² + … + x_n²)/(n−1))`; harmonic.
    HarmonicQuadratic,
    /// `ω = dφ` with `φ = |x|^β`; singular at the origin for β < 0.
    RadialPower,
    /// Connection `A = scale·x¹dx²·τ₃` (single adjoint axis).
    AbelianPlaquette,
    /// Smooth connection with transcendental components and brackets on
    /// every adjoint axis; its discrete residuals are genuinely `O(h)`.
    NonabelianSample,
}

impl CatalogField {
    pub fn name(&self) -> &'static str {
        match self {
            CatalogField::Uniform => "uniform",
            CatalogField::HarmonicQuadratic => "harmonic-quadratic",
            CatalogField::RadialPower => "radial-power",
            CatalogField::AbelianPlaquette => "abelian-plaquette",
            CatalogField::NonabelianSample => "nonabelian-sample",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            CatalogField::Uniform => {
                "constant field: scale*dx1 at q=1, scale*dx1^dx2 at q=2; exactly stationary"
            }
            CatalogField::HarmonicQuadratic => {
                "gradient of the harmonic quadratic x1^2 - (x2^2+...+xn^2)/(n-1), scaled"
            }
            CatalogField::RadialPower => {
                "gradient of |x|^beta sampled at cell centers; finite energy, singular at 0"
            }
            CatalogField::AbelianPlaquette => {
                "so(3) connection x1*dx2 on one adjoint axis; curvature = unit plaquettes"
            }
            CatalogField::NonabelianSample => {
                "smooth so(3) connection with sin/cos components and nonzero brackets everywhere"
            }
        }
    }

    /// All catalog entries with descriptions.
    pub fn all() -> &'static [CatalogField] {
        &[
            CatalogField::Uniform,
            CatalogField::HarmonicQuadratic,
            CatalogField::RadialPower,
            CatalogField::AbelianPlaquette,
            CatalogField::NonabelianSample,
        ]
    }
}

impl FromStr for CatalogField {
    type Err = HodgeError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(CatalogField::Uniform),
            "harmonic-quadratic" => Ok(CatalogField::HarmonicQuadratic),
            "radial-power" => Ok(CatalogField::RadialPower),
            "abelian-plaquette" => Ok(CatalogField::AbelianPlaquette),
            "nonabelian-sample" => Ok(CatalogField::NonabelianSample),
            other => Err(HodgeError::Invalid {
                what: format!("unknown catalog field \"{other}\""),
            }),
        }
    }
}

/// Build a scalar catalog field of the requested degree.
///
/// `beta` is only consulted by `radial-power`.
pub fn scalar_field<T: Real>(
    which: CatalogField,
    cx: &Arc<CubicalComplex<T>>,
    degree: usize,
    scale: T,
    beta: Option<T>,
) -> Result<FormField<T>> {
    let n = cx.dim();
    match which {
        CatalogField::Uniform => match degree {
            1 => FormField::from_node_fn(cx, |x| scale * x[0]).exterior_derivative(),
            2 if n >= 2 => {
                let a = FormField::from_component_fn(cx, 1, |axes, x| {
                    if axes[0] == 1 {
                        scale * x[0]
                    } else {
                        T::zero()
                    }
                })?;
                a.exterior_derivative()
            }
            q => Err(HodgeError::Degree {
                op: "catalog uniform",
                requirement: "q in {1, 2}",
                q,
            }),
        },
        CatalogField::HarmonicQuadratic => {
            if degree != 1 {
                return Err(HodgeError::Degree {
                    op: "catalog harmonic-quadratic",
                    requirement: "q = 1",
                    q: degree,
                });
            }
            let inv = T::one() / T::from_usize_lossy(n - 1);
            Ok(FormField::from_node_fn(cx, |x| {
                let mut rest = T::zero();
                for &v in &x[1..] {
                    rest += v * v;
                }
                scale * (x[0] * x[0] - rest * inv)
            })
            .exterior_derivative()?)
        }
        CatalogField::RadialPower => {
            if degree != 1 {
                return Err(HodgeError::Degree {
                    op: "catalog radial-power",
                    requirement: "q = 1",
                    q: degree,
                });
            }
            let beta = beta.ok_or_else(|| HodgeError::Invalid {
                what: "radial-power needs a beta exponent".into(),
            })?;
            FormField::from_component_fn(cx, 1, |axes, x| {
                let r2: T = x.iter().map(|&v| v * v).sum();
                let r = r2.sqrt();
                scale * beta * r.powf(beta - T::two()) * x[axes[0]]
            })
        }
        CatalogField::AbelianPlaquette | CatalogField::NonabelianSample => {
            Err(HodgeError::Invalid {
                what: format!("{} is an so(3) catalog entry", which.name()),
            })
        }
    }
}

/// Build an so(3) connection 1-form from the catalog.
pub fn connection<T: Real>(
    which: CatalogField,
    cx: &Arc<CubicalComplex<T>>,
    scale: T,
) -> Result<LieFormField<T>> {
    if cx.dim() < 3 {
        return Err(HodgeError::Invalid {
            what: "catalog connections need n >= 3".into(),
        });
    }
    match which {
        CatalogField::AbelianPlaquette => LieFormField::from_component_fn(cx, 1, |axes, x| {
            if axes[0] == 1 {
                [T::zero(), T::zero(), scale * x[0]]
            } else {
                [T::zero(); 3]
            }
        }),
        CatalogField::NonabelianSample => LieFormField::from_component_fn(cx, 1, |axes, x| {
            let h = T::half();
            match axes[0] {
                0 => [scale * x[1].sin(), T::zero(), scale * T::from_f64_lossy(0.3) * x[2]],
                1 => [T::zero(), scale * (x[2] + h * x[0]).cos(), T::zero()],
                _ => [
                    scale * T::from_f64_lossy(0.4) * x[0],
                    scale * (x[0] * x[1]).sin(),
                    T::zero(),
                ],
            }
        }),
        other => Err(HodgeError::Invalid {
            what: format!("{} is not an so(3) catalog entry", other.name()),
        }),
    }
}
