//! Energy density models ρ(Q), their integrals e(Q) = ∫₀^Q ρ, and the
//! ellipticity quantity ρ(Q) + 2Qρ′(Q).
//!
//! Three closed-form models ship with the crate:
//!
//! * `constant`: ρ ≡ 1, the Dirichlet case,
//! * `polytropic(γ)`: ρ(Q) = (1 − (γ−1)Q/2)^(1/(γ−1)), steady ideal gas flow,
//!   sonic at Q = 2/(γ+1) and cavitating at Q = 2/(γ−1),
//! * `born_infeld`: ρ(Q) = (1+Q)^(−1/2), elliptic for every Q but with the
//!   ellipticity quantity (1+Q)^(−3/2) tending to zero.
//!
//! All evaluations use the exact closed forms; nothing downstream depends on
//! quadrature of ρ. Custom densities can plug in through [`DensityLaw`].

use crate::error::{HodgeError, Result};
use crate::real::Real;

/// Classification of the ellipticity quantity at one `Q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EllipticityClass {
    Elliptic,
    Degenerate,
    Violated,
}

/// Default classification tolerance for [`DensityModel::ellipticity`].
pub const ELLIPTICITY_TOL: f64 = 1e-12;

/// Interface for energy densities. Implemented by [`DensityModel`]; custom
/// (e.g. tabulated) densities can implement it to reuse the rest of the
/// toolkit, but only the three closed-form models are shipped.
pub trait DensityLaw<T: Real> {
    fn rho(&self, q: T) -> Result<T>;
    fn rho_prime(&self, q: T) -> Result<T>;
    fn e(&self, q: T) -> Result<T>;
    /// Where ρ + 2Qρ′ reaches zero (infinite if it never does).
    fn q_sonic(&self) -> T;
    /// Where ρ reaches zero (infinite if it never does).
    fn q_cavitation(&self) -> T;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DensityKind<T> {
    Constant,
    Polytropic { gamma: T },
    BornInfeld,
}

/// A closed-form energy density model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityModel<T> {
    kind: DensityKind<T>,
}

impl<T: Real> DensityModel<T> {
    pub fn constant() -> Self {
        Self {
            kind: DensityKind::Constant,
        }
    }

    pub fn born_infeld() -> Self {
        Self {
            kind: DensityKind::BornInfeld,
        }
    }

    /// Polytropic model with adiabatic constant γ > 1.
    pub fn polytropic(gamma: T) -> Result<Self> {
        if !(gamma > T::one()) {
            return Err(HodgeError::Invalid {
                what: format!("polytropic gamma must exceed 1, got {}", gamma.to_f64()),
            });
        }
        Ok(Self {
            kind: DensityKind::Polytropic { gamma },
        })
    }

    pub fn kind(&self) -> &DensityKind<T> {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            DensityKind::Constant => "constant",
            DensityKind::Polytropic { .. } => "polytropic",
            DensityKind::BornInfeld => "born_infeld",
        }
    }

    pub fn gamma(&self) -> Option<T> {
        match self.kind {
            DensityKind::Polytropic { gamma } => Some(gamma),
            _ => None,
        }
    }

    /// Short identifier for reports, e.g. `polytropic(gamma=1.4)`.
    pub fn id(&self) -> String {
        match self.kind {
            DensityKind::Constant => "constant".into(),
            DensityKind::BornInfeld => "born_infeld".into(),
            DensityKind::Polytropic { gamma } => {
                format!("polytropic(gamma={})", gamma.to_f64())
            }
        }
    }

    fn check_domain(&self, q: T) -> Result<()> {
        if q < T::zero() || !q.is_finite() {
            return Err(HodgeError::DensityDomain {
                q: q.to_f64(),
                limit: self.q_cavitation().to_f64(),
            });
        }
        if q >= self.q_cavitation() {
            return Err(HodgeError::DensityDomain {
                q: q.to_f64(),
                limit: self.q_cavitation().to_f64(),
            });
        }
        Ok(())
    }

    /// ρ(Q) + 2Qρ′(Q) together with its classification at tolerance `tol`.
    pub fn ellipticity_with_tol(&self, q: T, tol: T) -> Result<(T, EllipticityClass)> {
        let v = self.rho(q)? + T::two() * q * self.rho_prime(q)?;
        let class = if v > tol {
            EllipticityClass::Elliptic
        } else if v < -tol {
            EllipticityClass::Violated
        } else {
            EllipticityClass::Degenerate
        };
        Ok((v, class))
    }

    /// [`Self::ellipticity_with_tol`] at the default tolerance 1e-12.
    pub fn ellipticity(&self, q: T) -> Result<(T, EllipticityClass)> {
        self.ellipticity_with_tol(q, T::from_f64_lossy(ELLIPTICITY_TOL))
    }

    /// Uniform ellipticity bounds (κ₁, κ₂) over `[q_lo, q_hi]`.
    ///
    /// The ellipticity quantity of every built-in model is monotone
    /// nonincreasing in Q, so the bounds are attained at the endpoints.
    pub fn kappa_bounds(&self, q_lo: T, q_hi: T) -> Result<(T, T)> {
        if !(q_lo <= q_hi) {
            return Err(HodgeError::Invalid {
                what: "kappa_bounds: need q_lo <= q_hi".into(),
            });
        }
        let (a, _) = self.ellipticity(q_lo)?;
        let (b, _) = self.ellipticity(q_hi)?;
        Ok((a.min(b), a.max(b)))
    }
}

impl<T: Real> DensityLaw<T> for DensityModel<T> {
    fn rho(&self, q: T) -> Result<T> {
        self.check_domain(q)?;
        Ok(match self.kind {
            DensityKind::Constant => T::one(),
            DensityKind::BornInfeld => (T::one() + q).powf(-T::half()),
            DensityKind::Polytropic { gamma } => {
                let u = T::one() - (gamma - T::one()) * q * T::half();
                u.powf(T::one() / (gamma - T::one()))
            }
        })
    }

    fn rho_prime(&self, q: T) -> Result<T> {
        self.check_domain(q)?;
        Ok(match self.kind {
            DensityKind::Constant => T::zero(),
            DensityKind::BornInfeld => {
                -T::half() * (T::one() + q).powf(T::from_f64_lossy(-1.5))
            }
            DensityKind::Polytropic { gamma } => {
                let u = T::one() - (gamma - T::one()) * q * T::half();
                -T::half() * u.powf((T::two() - gamma) / (gamma - T::one()))
            }
        })
    }

    fn e(&self, q: T) -> Result<T> {
        self.check_domain(q)?;
        Ok(match self.kind {
            DensityKind::Constant => q,
            DensityKind::BornInfeld => T::two() * ((T::one() + q).sqrt() - T::one()),
            DensityKind::Polytropic { gamma } => {
                let u = T::one() - (gamma - T::one()) * q * T::half();
                T::two() / gamma * (T::one() - u.powf(gamma / (gamma - T::one())))
            }
        })
    }

    fn q_sonic(&self) -> T {
        match self.kind {
            DensityKind::Constant | DensityKind::BornInfeld => T::infinity(),
            DensityKind::Polytropic { gamma } => T::two() / (gamma + T::one()),
        }
    }

    fn q_cavitation(&self) -> T {
        match self.kind {
            DensityKind::Constant | DensityKind::BornInfeld => T::infinity(),
            DensityKind::Polytropic { gamma } => T::two() / (gamma - T::one()),
        }
    }
}

// Method-call convenience so call sites don't need the trait in scope.
impl<T: Real> DensityModel<T> {
    pub fn rho(&self, q: T) -> Result<T> {
        DensityLaw::rho(self, q)
    }
    pub fn rho_prime(&self, q: T) -> Result<T> {
        DensityLaw::rho_prime(self, q)
    }
    pub fn e(&self, q: T) -> Result<T> {
        DensityLaw::e(self, q)
    }
    pub fn q_sonic(&self) -> T {
        DensityLaw::q_sonic(self)
    }
    pub fn q_cavitation(&self) -> T {
        DensityLaw::q_cavitation(self)
    }
    /// True when ρ′ ≤ 0 everywhere on the admissible interval. All built-in
    /// models satisfy this; the monotonicity checks require it.
    pub fn nonincreasing(&self) -> bool {
        true
    }
}
