//! Shell measures of the full Hamiltonian.
//!
//! With the kinetic part integrated out analytically, every quantity of
//! interest reduces to one family of integrals over the configurational
//! table,
//!
//!   I_a(E) = integral over u in [support, E] of Omega_U(u) * (E - u)^a du,
//!
//! where the exponent a comes from the kinetic closed forms:
//!
//!   Omega_H(E)  = C1(N) * I_{3N/2-1}(E)   (cumulative volume, H < E)
//!   Omega_H'(E) = C2(N) * I_{3N/2-2}(E)   (shell density)
//!
//! The quadrature walks the panels between table nodes, where the table
//! is exponential-linear. Panels whose endpoint values coincide carry a
//! constant Omega_U, so the power weight integrates in closed form; this
//! makes single-plateau tables (free gas, hard spheres) exact to machine
//! precision for every N instead of limited by panel counts.

use serde::{Deserialize, Serialize};

use crate::dos::ConfigDoS;
use crate::error::{Error, Result};
use crate::kinetic::KineticOrder;
use crate::log_value::LogValue;
use crate::math::{ln_sphere_area, log_diff_exp, log_sum_exp, log_sum_exp_slice};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    Trapezoid,
    Simpson,
}

/// Panel-refinement policy for the convolution integrals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rule: QuadratureRule,
    /// Sub-panels per table panel.
    pub refine_factor: usize,
    /// Floor on the total sub-panel count; coarse tables are refined
    /// further until they reach it. Plateau panels are exact and exempt.
    pub min_panels: usize,
    /// Allowed discrepancy between redundant assemblies of the same
    /// quantity (the two entropy paths).
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rule: QuadratureRule::Simpson,
            refine_factor: 8,
            min_panels: 1024,
            tolerance: 1.0e-8,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.refine_factor == 0 || self.min_panels == 0 {
            return Err(Error::InvalidParameter(
                "refine_factor and min_panels must be >= 1".into(),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(
                "quadrature tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// ln of x^a with the limiting conventions at x = 0: one for a = 0,
/// vanishing for positive a.
#[inline]
fn power_log(a: f64, x: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    if x <= 0.0 {
        return if a > 0.0 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
    }
    a * x.ln()
}

/// ln of the exact primitive integral of x^a over [x0, x1], a > -1.
fn ln_power_primitive(x0: f64, x1: f64, a: f64) -> f64 {
    debug_assert!(x0 >= 0.0 && x1 > x0 && a > -1.0);
    let ap1 = a + 1.0;
    if x0 == 0.0 {
        ap1 * x1.ln() - ap1.ln()
    } else {
        log_diff_exp(ap1 * x1.ln(), ap1 * x0.ln()).expect("strictly ordered panel") - ap1.ln()
    }
}

/// Core engine: ln I_a(E) for the table-weighted power integral.
fn log_power_integral(
    dos: &ConfigDoS,
    energy: f64,
    a: f64,
    quad: &QuadratureSpec,
) -> Result<LogValue> {
    quad.validate()?;
    if !energy.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "energy must be finite, got {energy}"
        )));
    }
    if !(a > -1.0) {
        return Err(Error::InvalidParameter(format!(
            "power exponent must exceed -1 for integrability, got {a}"
        )));
    }
    let e_min = dos.support_min();
    if !(energy > e_min) {
        return Ok(LogValue::ZERO);
    }

    let mut breaks = Vec::with_capacity(dos.grid().len() + 2);
    breaks.push(e_min);
    for &g in dos.grid() {
        if g > e_min && g < energy {
            breaks.push(g);
        }
    }
    breaks.push(energy);

    let base = (breaks.len() - 1) * quad.refine_factor;
    let mult = if base >= quad.min_panels {
        1
    } else {
        (quad.min_panels + base - 1) / base
    };
    let sub = quad.refine_factor * mult;
    let ln4 = 4.0f64.ln();
    let ln6 = 6.0f64.ln();

    let mut terms: Vec<f64> = Vec::new();
    for w in breaks.windows(2) {
        let (b0, b1) = (w[0], w[1]);
        let v0 = dos.log_omega_upper(b0);
        let v1 = dos.log_omega_upper(b1);
        debug_assert!(
            !v0.is_zero() && !v1.is_zero(),
            "nonzero support guaranteed above e_min"
        );
        let (l0, l1) = (v0.ln(), v1.ln());
        if l0 == l1 {
            // Constant table value: the power weight has an elementary
            // primitive, use it instead of panels.
            terms.push(l0 + ln_power_primitive(energy - b1, energy - b0, a));
            continue;
        }
        let slope = (l1 - l0) / (b1 - b0);
        let ln_om = |u: f64| l0 + slope * (u - b0);
        // Negative exponents make the weight blow up at u = E; those
        // sub-panels use the primitive with the midpoint table value,
        // which keeps the integrable singularity exact.
        let singular_top = b1 == energy && a < 0.0;
        for k in 0..sub {
            let u0 = b0 + (b1 - b0) * k as f64 / sub as f64;
            let u1 = if k + 1 == sub {
                b1
            } else {
                b0 + (b1 - b0) * (k + 1) as f64 / sub as f64
            };
            let um = 0.5 * (u0 + u1);
            if singular_top {
                terms.push(ln_om(um) + ln_power_primitive(energy - u1, energy - u0, a));
                continue;
            }
            let h0 = ln_om(u0) + power_log(a, energy - u0);
            let hm = ln_om(um) + power_log(a, energy - um);
            let h1 = ln_om(u1) + power_log(a, energy - u1);
            let w_ln = (u1 - u0).ln();
            terms.push(match quad.rule {
                QuadratureRule::Trapezoid => {
                    w_ln - std::f64::consts::LN_2 + log_sum_exp(h0, h1)
                }
                QuadratureRule::Simpson => {
                    w_ln - ln6 + log_sum_exp_slice(&[h0, ln4 + hm, h1])
                }
            });
        }
    }
    Ok(LogValue::from_ln(log_sum_exp_slice(&terms)))
}

/// Cumulative phase volume of the full Hamiltonian, vol{H < E} / (N! h-free).
pub fn log_omega_h(dos: &ConfigDoS, energy: f64, quad: &QuadratureSpec) -> Result<LogValue> {
    let n = dos.spec().n_particles;
    let i = log_power_integral(dos, energy, KineticOrder::First.exponent(n), quad)?;
    Ok(i.scale_ln(KineticOrder::First.log_prefactor(n)))
}

/// Shell density of the full Hamiltonian, d/dE vol{H < E}.
pub fn log_omega_h_prime(dos: &ConfigDoS, energy: f64, quad: &QuadratureSpec) -> Result<LogValue> {
    let n = dos.spec().n_particles;
    let i = log_power_integral(dos, energy, KineticOrder::Second.exponent(n), quad)?;
    Ok(i.scale_ln(KineticOrder::Second.log_prefactor(n)))
}

/// Microcanonical entropy S(E) = ln Omega_H'(E).
///
/// Assembled twice: once from the differentiated kinetic prefactor and
/// once through the surface-area form that routes the same integral
/// through the unit-sphere area and the explicit exponent factors. The
/// two must agree within the configured tolerance; a mismatch signals a
/// broken prefactor and is reported as an error, never averaged away.
pub fn boltzmann_entropy(dos: &ConfigDoS, energy: f64, quad: &QuadratureSpec) -> Result<f64> {
    Ok(boltzmann_entropy_paths(dos, energy, quad)?.0)
}

/// Both representations of S(E): the differentiated-prefactor form and
/// the surface-area form. They share the configurational integral and
/// must agree within the quadrature tolerance.
pub fn boltzmann_entropy_paths(
    dos: &ConfigDoS,
    energy: f64,
    quad: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let n = dos.spec().n_particles;
    let d = dos.spec().dof() as f64;
    let i = log_power_integral(dos, energy, KineticOrder::Second.exponent(n), quad)?;
    if i.is_zero() {
        return Err(Error::UndefinedEntropy { energy });
    }
    let path_a = KineticOrder::Second.log_prefactor(n) + i.ln();
    let half_d = 0.5 * d;
    let path_b = half_d * std::f64::consts::LN_2 - d.ln()
        + ln_sphere_area(dos.spec().dof() as u64)
        + half_d.ln()
        + (half_d - 1.0).ln()
        + i.ln();
    check_paths(path_a, path_b, quad.tolerance)?;
    Ok((path_a, path_b))
}

/// Quasi entropy S-(E) = ln Omega_H(E), the cumulative-volume variant.
pub fn quasi_entropy(dos: &ConfigDoS, energy: f64, quad: &QuadratureSpec) -> Result<f64> {
    Ok(quasi_entropy_paths(dos, energy, quad)?.0)
}

/// Both representations of S-(E): the kinetic-volume prefactor form and
/// the surface-area form, sharing one configurational integral.
pub fn quasi_entropy_paths(
    dos: &ConfigDoS,
    energy: f64,
    quad: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let n = dos.spec().n_particles;
    let d = dos.spec().dof() as f64;
    let i = log_power_integral(dos, energy, KineticOrder::First.exponent(n), quad)?;
    if i.is_zero() {
        return Err(Error::UndefinedEntropy { energy });
    }
    let path_a = KineticOrder::First.log_prefactor(n) + i.ln();
    let half_d = 0.5 * d;
    let path_b = half_d * std::f64::consts::LN_2 - d.ln()
        + ln_sphere_area(dos.spec().dof() as u64)
        + half_d.ln()
        + i.ln();
    check_paths(path_a, path_b, quad.tolerance)?;
    Ok((path_a, path_b))
}

fn check_paths(path_a: f64, path_b: f64, tolerance: f64) -> Result<()> {
    let diff = (path_a - path_b).abs();
    if diff > tolerance {
        return Err(Error::PathMismatch {
            path_a,
            path_b,
            diff,
            allowed: tolerance,
        });
    }
    Ok(())
}

/// Entropy of the finite shell [E - delta_e, E), ln of the volume
/// difference. The difference of two nearly equal volumes can vanish in
/// floating point; that is a degenerate shell, reported as an error.
pub fn shell_entropy(
    dos: &ConfigDoS,
    energy: f64,
    delta_e: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if !(delta_e > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "shell width must be positive, got {delta_e}"
        )));
    }
    let hi = log_omega_h(dos, energy, quad)?;
    if hi.is_zero() {
        return Err(Error::UndefinedEntropy { energy });
    }
    let lo = log_omega_h(dos, energy - delta_e, quad)?;
    match hi.sub(&lo) {
        Some(shell) if !shell.is_zero() => Ok(shell.ln()),
        _ => Err(Error::DegenerateShell(format!(
            "volumes at E = {energy} and E - {delta_e} are numerically indistinguishable"
        ))),
    }
}

/// Difference between the two entropy definitions at one energy,
/// S(E) - S-(E). Equals ln(3N / 2E) exactly for the free gas.
pub fn entropy_gap(dos: &ConfigDoS, energy: f64, quad: &QuadratureSpec) -> Result<f64> {
    Ok(boltzmann_entropy(dos, energy, quad)? - quasi_entropy(dos, energy, quad)?)
}

/// Two views of the same power moment, used as a self-consistency check
/// of the table conventions and the quadrature.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct IdentityReport {
    /// ln of the Stieltjes sum over the table's jump measure.
    pub lhs_log: f64,
    /// ln of the integrated form P * I_{P-1}(E).
    pub rhs_log: f64,
    /// |lhs_log - rhs_log|, a relative discrepancy for values this large.
    pub residual: f64,
}

/// Checks integral over u of (E - u)^P dOmega_U(u) against
/// P * I_{P-1}(E). The left side sums the table's mass increments at
/// jump locations (node for explicit jumps, panel midpoint between
/// nodes); the right side runs the quadrature engine. Both converge to
/// the same moment as the table refines, so the residual measures
/// discretization consistency.
pub fn power_convolution_identity_check(
    dos: &ConfigDoS,
    energy: f64,
    p: f64,
    quad: &QuadratureSpec,
) -> Result<IdentityReport> {
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "moment power must be positive, got {p}"
        )));
    }
    let lhs = log_power_stieltjes(dos, energy, p)?;
    let i = log_power_integral(dos, energy, p - 1.0, quad)?;
    if lhs.is_zero() || i.is_zero() {
        return Err(Error::UndefinedEntropy { energy });
    }
    let rhs_log = p.ln() + i.ln();
    Ok(IdentityReport {
        lhs_log: lhs.ln(),
        rhs_log,
        residual: (lhs.ln() - rhs_log).abs(),
    })
}

/// Stieltjes sum of (E - u)^P against the table's mass increments.
fn log_power_stieltjes(dos: &ConfigDoS, energy: f64, p: f64) -> Result<LogValue> {
    if !energy.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "energy must be finite, got {energy}"
        )));
    }
    let grid = dos.grid();
    let vals = dos.values();
    let first = match vals.iter().position(|v| !v.is_zero()) {
        None => return Ok(LogValue::ZERO),
        Some(f) => f,
    };
    let mut terms: Vec<f64> = Vec::new();
    if first == 0 {
        // Pure step: the whole initial plateau jumps at the ground energy.
        if energy > dos.e_ground() {
            terms.push(vals[0].ln() + p * (energy - dos.e_ground()).ln());
        }
    } else if grid[first] < energy {
        // Zero prefix localizes the first jump at its node.
        terms.push(vals[first].ln() + p * (energy - grid[first]).ln());
    }
    for j in (first + 1)..grid.len() {
        let u_lo = grid[j - 1];
        if u_lo >= energy {
            break;
        }
        let (mass, u_hi) = if grid[j] <= energy {
            (vals[j].sub(&vals[j - 1]), grid[j])
        } else {
            // The moment boundary splits this panel; count only the mass
            // accumulated up to E under the table's interpolation.
            (dos.log_omega_at(energy).sub(&vals[j - 1]), energy)
        };
        if let Some(m) = mass {
            if !m.is_zero() {
                let mid = 0.5 * (u_lo + u_hi);
                terms.push(m.ln() + p * (energy - mid).ln());
            }
        }
    }
    if terms.is_empty() {
        return Ok(LogValue::ZERO);
    }
    Ok(LogValue::from_ln(log_sum_exp_slice(&terms)))
}
