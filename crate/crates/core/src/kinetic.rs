//! Closed forms for the kinetic part of the phase volume.
//!
//! For N unit-mass particles the momentum integral over {K(p) < E} is the
//! volume of a 3N-ball of radius sqrt(2E):
//!
//!   Omega_K(E)  = (2 pi)^(3N/2) / Gamma(3N/2 + 1) * E^(3N/2),
//!
//! and differentiating in E gives the kinetic structure function and its
//! derivative:
//!
//!   Omega_K'(E)  = (2 pi)^(3N/2) / Gamma(3N/2)     * E^(3N/2 - 1),
//!   Omega_K''(E) = (2 pi)^(3N/2) / Gamma(3N/2) * (3N/2 - 1) * E^(3N/2 - 2),
//!
//! all supported on E > 0. Everything is computed through ln Gamma so
//! N up to a million stays finite.

use crate::log_value::LogValue;
use crate::math::{ln_gamma, LN_2PI};

/// Which member of the Omega_K family a convolution integrates against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KineticOrder {
    /// The primitive Omega_K (phase volume of the momentum ball).
    Primitive,
    /// The structure function Omega_K'.
    First,
    /// Its derivative Omega_K''.
    Second,
}

impl KineticOrder {
    /// Exponent of E in the power law for N particles.
    pub fn exponent(&self, n: usize) -> f64 {
        let half_dof = 1.5 * n as f64;
        match self {
            KineticOrder::Primitive => half_dof,
            KineticOrder::First => half_dof - 1.0,
            KineticOrder::Second => half_dof - 2.0,
        }
    }

    /// Log of the constant multiplying E^exponent.
    pub fn log_prefactor(&self, n: usize) -> f64 {
        let half_dof = 1.5 * n as f64;
        let base = half_dof * LN_2PI;
        match self {
            KineticOrder::Primitive => base - ln_gamma(half_dof + 1.0),
            KineticOrder::First => base - ln_gamma(half_dof),
            KineticOrder::Second => base - ln_gamma(half_dof) + (half_dof - 1.0).ln(),
        }
    }

    fn eval(&self, energy: f64, n: usize) -> LogValue {
        assert!(n >= 1, "kinetic forms need at least one particle");
        if !(energy > 0.0) {
            return LogValue::ZERO;
        }
        LogValue::from_ln(self.log_prefactor(n) + self.exponent(n) * energy.ln())
    }
}

/// ln Omega_K(E): momentum-ball volume, zero for E <= 0.
pub fn log_omega_k(energy: f64, n: usize) -> LogValue {
    KineticOrder::Primitive.eval(energy, n)
}

/// ln Omega_K'(E): the kinetic structure function, zero for E <= 0.
pub fn log_omega_k_prime(energy: f64, n: usize) -> LogValue {
    KineticOrder::First.eval(energy, n)
}

/// ln Omega_K''(E), zero for E <= 0.
///
/// For N = 1 the exponent is -1/2, so the value diverges as E -> 0+;
/// that is integrable and handled in closed form by the convolution.
pub fn log_omega_k_double_prime(energy: f64, n: usize) -> LogValue {
    KineticOrder::Second.eval(energy, n)
}

/// Kinetic entropy density in the large-system limit:
///
///   s_kin(rho, eps) = (3/2) rho ln( (4 pi e / 3) eps / rho ),
///
/// for particle density rho > 0 and kinetic energy density eps > 0.
pub fn s_kin(rho: f64, eps: f64) -> f64 {
    assert!(rho > 0.0 && eps > 0.0, "s_kin needs rho > 0 and eps > 0");
    let ratio = 4.0 * std::f64::consts::PI * std::f64::consts::E / 3.0;
    1.5 * rho * (ratio * eps / rho).ln()
}
