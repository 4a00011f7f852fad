//! Closed-form constants, profiles and potentials of the ring blow-up problem.
//!
//! Everything evaluated elsewhere in the crate (initial data, residuals,
//! diagnostics) goes through [`Profile`], so each formula lives in one place.
//!
//! Notation: `z = y/√s` is the parabolic similarity coordinate, `f(z)` the
//! universal profile and `φ(y, s) = f(y/√s) + κ/(2ps)` the refined ansatz
//! around which the residual `q` is measured.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("exponent p must exceed 1, got {0}")]
    InvalidExponent(f64),
    #[error("space dimension must be at least 2, got {0}")]
    InvalidDimension(u32),
    #[error("self-similar time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("{what} out of domain: {value}")]
    OutOfDomain { what: &'static str, value: f64 },
}

/// Exponent, dimension and ring radius of the radial problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<S> {
    pub p: S,
    pub d: u32,
    /// Ring radius; the problem is scaled so that it equals one.
    pub r_max: S,
}

impl<S: Scalar> ModelParams<S> {
    pub fn new(p: S, d: u32) -> Result<Self, ModelError> {
        let params = Self { p, d, r_max: S::one() };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.p > S::one()) || !self.p.is_finite() {
            return Err(ModelError::InvalidExponent(self.p.to_f64().unwrap_or(f64::NAN)));
        }
        if self.d < 2 {
            return Err(ModelError::InvalidDimension(self.d));
        }
        if !(self.r_max > S::zero()) {
            return Err(ModelError::OutOfDomain {
                what: "ring radius",
                value: self.r_max.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }

    pub fn constants(&self) -> ProfileConstants<S> {
        ProfileConstants::new(self.p)
    }
}

/// `κ`, `b` and `a` of the profile; they depend on `p` only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileConstants<S> {
    pub kappa: S,
    pub b: S,
    pub a: S,
}

impl<S: Scalar> ProfileConstants<S> {
    pub fn new(p: S) -> Self {
        let one = S::one();
        let pm1 = p - one;
        let kappa = pm1.powf(-one / pm1);
        let b = pm1 * pm1 / (S::lit(4.0) * p);
        let a = kappa / (S::lit(2.0) * p);
        Self { kappa, b, a }
    }

    /// Coefficient of the `1/s` term of `P₀(R)`; vanishes for the chosen `a`, `b`.
    pub fn p0_residual_coefficient(&self, p: S) -> S {
        let pm1 = p - S::one();
        self.a - S::lit(2.0) * self.b * self.kappa / (pm1 * pm1)
    }
}

/// Model parameters together with their derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile<S> {
    pub params: ModelParams<S>,
    pub consts: ProfileConstants<S>,
    inv_pm1: S,
}

impl<S: Scalar> Profile<S> {
    pub fn new(params: ModelParams<S>) -> Self {
        Self {
            consts: params.constants(),
            inv_pm1: S::one() / (params.p - S::one()),
            params,
        }
    }

    #[inline]
    pub fn p(&self) -> S {
        self.params.p
    }

    #[inline]
    pub fn kappa(&self) -> S {
        self.consts.kappa
    }

    /// `1/(p−1)`.
    #[inline]
    pub fn inv_pm1(&self) -> S {
        self.inv_pm1
    }

    #[inline]
    fn base(&self, z: S) -> S {
        self.p() - S::one() + self.consts.b * z * z
    }

    /// `f(z) = (p−1+bz²)^{−1/(p−1)}`.
    #[inline]
    pub fn f(&self, z: S) -> S {
        self.base(z).powf(-self.inv_pm1)
    }

    pub fn f_prime(&self, z: S) -> S {
        let e = -self.inv_pm1;
        let g = self.base(z);
        S::lit(2.0) * self.consts.b * z * e * g.powf(e - S::one())
    }

    pub fn f_second(&self, z: S) -> S {
        let e = -self.inv_pm1;
        let g = self.base(z);
        let two_b = S::lit(2.0) * self.consts.b;
        let gz = two_b * z;
        two_b * e * g.powf(e - S::one()) + gz * gz * e * (e - S::one()) * g.powf(e - S::lit(2.0))
    }

    fn check_time(s: S) -> Result<(), ModelError> {
        if s > S::zero() {
            Ok(())
        } else {
            Err(ModelError::NonPositiveTime(s.to_f64().unwrap_or(f64::NAN)))
        }
    }

    /// `φ(y, s) = f(y/√s) + κ/(2ps)`.
    pub fn phi(&self, y: S, s: S) -> Result<S, ModelError> {
        Self::check_time(s)?;
        Ok(self.phi_unchecked(y, s))
    }

    #[inline]
    pub fn phi_unchecked(&self, y: S, s: S) -> S {
        self.f(y / s.sqrt()) + self.consts.a / s
    }

    pub fn dphi_dy(&self, y: S, s: S) -> S {
        let rs = s.sqrt();
        self.f_prime(y / rs) / rs
    }

    pub fn d2phi_dy2(&self, y: S, s: S) -> S {
        self.f_second(y / s.sqrt()) / s
    }

    pub fn dphi_ds(&self, y: S, s: S) -> S {
        let z = y / s.sqrt();
        -z / (S::lit(2.0) * s) * self.f_prime(z) - self.consts.a / (s * s)
    }

    /// `V = pφ^{p−1} − p/(p−1)`.
    pub fn potential_v(&self, y: S, s: S) -> Result<S, ModelError> {
        Self::check_time(s)?;
        let p = self.p();
        Ok(p * self.phi_unchecked(y, s).powf(p - S::one()) - p * self.inv_pm1)
    }

    /// Residual `R` left when `φ` is inserted in the self-similar flow.
    pub fn residual_r(&self, y: S, s: S) -> Result<S, ModelError> {
        Self::check_time(s)?;
        let phi = self.phi_unchecked(y, s);
        Ok(self.d2phi_dy2(y, s) - S::lit(0.5) * y * self.dphi_dy(y, s) - phi * self.inv_pm1
            + phi.powf(self.p())
            - self.dphi_ds(y, s))
    }

    /// Nonlinear remainder `|φ+q|^{p−1}(φ+q) − φ^p − pφ^{p−1}q`.
    pub fn nonlinear_remainder(&self, phi: S, q: S) -> S {
        let p = self.p();
        let w = phi + q;
        w.abs().powf(p - S::one()) * w - phi.powf(p) - p * phi.powf(p - S::one()) * q
    }

    /// Final-time asymptote `u*(r) = [(b/2) r²/|log r|]^{−1/(p−1)}` for `0 < r < 1`.
    pub fn ustar(&self, r: S) -> Result<S, ModelError> {
        if !(r > S::zero() && r < S::one()) {
            return Err(ModelError::OutOfDomain {
                what: "distance to ring",
                value: r.to_f64().unwrap_or(f64::NAN),
            });
        }
        let base = self.consts.b / S::lit(2.0) * r * r / r.ln().abs();
        Ok(base.powf(-self.inv_pm1))
    }

    /// `U_K(τ) = κ((1−τ) + (p−1)K²/(4p))^{−1/(p−1)}`.
    pub fn uk(&self, tau: S, k: S) -> Result<S, ModelError> {
        if !(k > S::zero()) {
            return Err(ModelError::OutOfDomain {
                what: "localization constant K",
                value: k.to_f64().unwrap_or(f64::NAN),
            });
        }
        let p = self.p();
        let base = (S::one() - tau) + (p - S::one()) * k * k / (S::lit(4.0) * p);
        if !(base > S::zero()) {
            return Err(ModelError::OutOfDomain {
                what: "U_K base",
                value: base.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(self.consts.kappa * base.powf(-self.inv_pm1))
    }
}

pub fn profile_f<S: Scalar>(z: S, params: &ModelParams<S>) -> S {
    Profile::new(*params).f(z)
}

pub fn phi<S: Scalar>(y: S, s: S, params: &ModelParams<S>) -> Result<S, ModelError> {
    Profile::new(*params).phi(y, s)
}

pub fn potential_v<S: Scalar>(y: S, s: S, params: &ModelParams<S>) -> Result<S, ModelError> {
    Profile::new(*params).potential_v(y, s)
}

pub fn final_profile_ustar<S: Scalar>(r: S, params: &ModelParams<S>) -> Result<S, ModelError> {
    Profile::new(*params).ustar(r)
}

pub fn intermediate_profile_uk<S: Scalar>(
    tau: S,
    k: S,
    params: &ModelParams<S>,
) -> Result<S, ModelError> {
    Profile::new(*params).uk(tau, k)
}
