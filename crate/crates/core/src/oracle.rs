//! Slow reference estimators used to validate the fast pipeline.
//!
//! Everything numerical in here is implemented from scratch on purpose:
//! the gamma function is a Stirling series instead of the Lanczos fit
//! the pipeline uses, integration is Gauss-Legendre instead of panel
//! rules, and sampling is a digitally shifted Sobol sequence instead of
//! pseudorandom draws. A bug in the main numerics cannot cancel against
//! the same bug here. Only the model definition (pair energies, box) and
//! the seed-derivation scheme are shared, since those define the problem
//! rather than solve it.

use rand::Rng;
use rayon::prelude::*;

use crate::dos::SamplerParams;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, StreamPurpose};
use crate::system::{config_energy_unchecked, SystemSpec};

/// Estimate with its log-scale uncertainty. `log_value` is the natural
/// log of the estimated quantity; a zero estimate (no sample contributed)
/// is flagged rather than encoded as a fake magnitude.
#[derive(Clone, Copy, Debug)]
pub struct OracleEstimate {
    pub log_value: f64,
    pub std_err_log: f64,
    pub is_zero: bool,
}

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

/// Stirling-series log gamma for x > 0. Arguments below 8 are pushed up
/// by the recurrence first; seven Bernoulli terms then leave an error
/// under 1e-16 at the shifted argument.
pub fn oracle_ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0 && x.is_finite(), "oracle_ln_gamma domain: {x}");
    let mut shift = 0.0;
    let mut z = x;
    while z < 8.0 {
        shift -= z.ln();
        z += 1.0;
    }
    // B_2n / (2n (2n-1)) coefficients of the asymptotic series in 1/z^2.
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let inv2 = 1.0 / (z * z);
    let mut series = 0.0;
    let mut pow = 1.0 / z;
    for c in C {
        series += c * pow;
        pow *= inv2;
    }
    shift + (z - 0.5) * z.ln() - z + HALF_LN_2PI + series
}

/// ln of the volume of the momentum ball {p in R^d : |p|^2 / 2 < t}.
fn oracle_ln_momentum_ball(d: u32, t: f64) -> f64 {
    if t <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let hd = 0.5 * d as f64;
    hd * (2.0 * std::f64::consts::PI * t).ln() - oracle_ln_gamma(hd + 1.0)
}

/// log-sum-exp over a slice, local to the oracle on purpose.
fn oracle_lse(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

// ---------------------------------------------------------------------
// Sobol sequence with digital shifts.
// ---------------------------------------------------------------------

/// Primitive-polynomial parameters (s, a, m) for dimensions 2..=13; the
/// first dimension is the plain van der Corput radix-2 sequence.
const SOBOL_PARAMS: [(u32, u32, &[u32]); 12] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
    (5, 11, &[1, 1, 5, 1, 1]),
    (5, 13, &[1, 1, 1, 3, 11]),
    (5, 14, &[1, 3, 5, 5, 31]),
];

pub const SOBOL_MAX_DIM: usize = 13;

const SOBOL_BITS: usize = 32;

/// Gray-code Sobol generator over up to [`SOBOL_MAX_DIM`] dimensions.
pub struct SobolSequence {
    directions: Vec<[u32; SOBOL_BITS]>,
    state: Vec<u32>,
    index: u32,
}

impl SobolSequence {
    pub fn new(dims: usize) -> Result<Self> {
        if dims == 0 || dims > SOBOL_MAX_DIM {
            return Err(Error::InvalidParameter(format!(
                "sobol dimension must be 1..={SOBOL_MAX_DIM}, got {dims}"
            )));
        }
        let mut directions = Vec::with_capacity(dims);
        // Dimension 1: v_k = 2^(32-k).
        let mut v1 = [0u32; SOBOL_BITS];
        for (k, v) in v1.iter_mut().enumerate() {
            *v = 1 << (31 - k);
        }
        directions.push(v1);
        for &(s, a, m) in SOBOL_PARAMS.iter().take(dims.saturating_sub(1)) {
            let s = s as usize;
            let mut v = [0u32; SOBOL_BITS];
            for k in 0..s {
                v[k] = m[k] << (31 - k);
            }
            for k in s..SOBOL_BITS {
                v[k] = v[k - s] ^ (v[k - s] >> s);
                for i in 1..s {
                    if (a >> (s - 1 - i)) & 1 == 1 {
                        v[k] ^= v[k - i];
                    }
                }
            }
            directions.push(v);
        }
        Ok(SobolSequence {
            directions,
            state: vec![0; dims],
            index: 0,
        })
    }

    /// Next point, digitally shifted, mapped to [0, 1)^dims.
    pub fn next_point(&mut self, shift: &[u32], out: &mut [f64]) {
        debug_assert_eq!(shift.len(), self.state.len());
        debug_assert_eq!(out.len(), self.state.len());
        if self.index > 0 {
            let c = (self.index - 1).trailing_ones() as usize;
            for (d, s) in self.state.iter_mut().enumerate() {
                *s ^= self.directions[d][c];
            }
        }
        self.index += 1;
        for d in 0..out.len() {
            out[d] = (self.state[d] ^ shift[d]) as f64 / (u32::MAX as f64 + 1.0);
        }
    }
}

const N_SHIFTS: u64 = 8;

/// Direct quasi-Monte-Carlo estimate of the cumulative phase volume
/// vol{H < E}/N! for one- and two-particle systems.
///
/// Positions come from a shifted Sobol sequence over the configuration
/// cube; the momentum ball for the kinetic remainder E - U is attached
/// in closed form through the oracle's own gamma function. Eight digital
/// shifts give an unbiased mean with an empirical standard error.
pub fn direct_phase_volume(
    spec: &SystemSpec,
    energy: f64,
    params: &SamplerParams,
) -> Result<OracleEstimate> {
    if spec.n_particles > 2 {
        return Err(Error::OracleUnsupportedSize(spec.n_particles));
    }
    if !energy.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "energy must be finite, got {energy}"
        )));
    }
    params.validate()?;
    let dims = spec.dof();
    let d = dims as u32;
    let n = spec.n_particles;
    let ln_box = dims as f64 * spec.box_side.ln()
        - (1..=n as u64).map(|k| (k as f64).ln()).sum::<f64>();
    // Reference magnitude so per-sample terms stay in f64 range.
    let ln_ref = oracle_ln_momentum_ball(d, energy.max(1e-300));

    let shift_means: Vec<f64> = (0..N_SHIFTS)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream_rng(params.master_seed, StreamPurpose::OracleShift, j);
            let shift: Vec<u32> = (0..dims).map(|_| rng.gen::<u32>()).collect();
            let mut sobol = SobolSequence::new(dims).expect("dims validated");
            let mut point = vec![0.0f64; dims];
            let quota = params.n_samples / N_SHIFTS
                + u64::from(j < params.n_samples % N_SHIFTS);
            let mut q = vec![[0.0f64; 3]; n];
            let mut acc = 0.0f64;
            for _ in 0..quota {
                sobol.next_point(&shift, &mut point);
                for (i, p) in q.iter_mut().enumerate() {
                    for c in 0..3 {
                        p[c] = point[3 * i + c] * spec.box_side;
                    }
                }
                let u = config_energy_unchecked(spec, &q);
                let t = energy - u;
                if t > 0.0 {
                    acc += (oracle_ln_momentum_ball(d, t) - ln_ref).exp();
                }
            }
            acc / quota.max(1) as f64
        })
        .collect();

    combine_shift_means(&shift_means, ln_box + ln_ref)
}

/// Mollified estimate of the shell density Omega_H'(E).
///
/// Each uniform configuration contributes the Gaussian-smoothed kinetic
/// structure function evaluated at its kinetic remainder,
/// S_w(E - U_i) with S_w = (Omega_K' * gaussian_w), so the average
/// estimates the density smoothed at scale `width`. The smoothing bias
/// is O(width^2) and vanishes with the window; it is the price for a
/// finite-variance estimator of a density.
pub fn mollified_delta_estimate(
    spec: &SystemSpec,
    energy: f64,
    width: f64,
    params: &SamplerParams,
) -> Result<OracleEstimate> {
    if !energy.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "energy must be finite, got {energy}"
        )));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "mollifier width must be positive, got {width}"
        )));
    }
    params.validate()?;
    let n = spec.n_particles;
    let d = spec.dof() as u32;
    let ln_box = spec.dof() as f64 * spec.box_side.ln()
        - (1..=n as u64).map(|k| (k as f64).ln()).sum::<f64>();
    let gl = GaussLegendre::new(64);
    let ln_ref = ln_smoothed_kinetic_density(d, energy.max(width), width, &gl);

    let streams = params.n_streams as u64;
    let stream_stats: Vec<(f64, u64)> = (0..streams)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream_rng(params.master_seed, StreamPurpose::MollifiedDelta, s);
            let quota = params.n_samples / streams + u64::from(s < params.n_samples % streams);
            let mut q = vec![[0.0f64; 3]; n];
            let mut acc = 0.0f64;
            for _ in 0..quota {
                for p in q.iter_mut() {
                    for c in p.iter_mut() {
                        *c = rng.gen::<f64>() * spec.box_side;
                    }
                }
                let u = config_energy_unchecked(spec, &q);
                if u.is_finite() {
                    let ln_s = ln_smoothed_kinetic_density(d, energy - u, width, &gl);
                    if ln_s > f64::NEG_INFINITY {
                        acc += (ln_s - ln_ref).exp();
                    }
                }
            }
            (acc, quota)
        })
        .collect();

    let total: u64 = stream_stats.iter().map(|&(_, c)| c).sum();
    let shift_means: Vec<f64> = stream_stats
        .iter()
        .map(|&(acc, c)| acc / c.max(1) as f64)
        .collect();
    debug_assert_eq!(total, params.n_samples);
    combine_shift_means(&shift_means, ln_box + ln_ref)
}

/// Smoothed kinetic structure function at kinetic remainder t:
/// integral of Omega_K'(t') * gaussian_w(t - t') over t' >= 0, with the
/// window clipped at ten widths.
fn ln_smoothed_kinetic_density(d: u32, t: f64, w: f64, gl: &GaussLegendre) -> f64 {
    let lo = (t - 10.0 * w).max(0.0);
    let hi = t + 10.0 * w;
    if hi <= 0.0 || hi <= lo {
        return f64::NEG_INFINITY;
    }
    let hd = 0.5 * d as f64;
    let ln_c = hd * (2.0 * std::f64::consts::PI).ln() - oracle_ln_gamma(hd);
    let ln_phi_norm = -(w * (2.0 * std::f64::consts::PI).sqrt()).ln();
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut terms = [f64::NEG_INFINITY; 64];
    for (k, (&x, &wt)) in gl.nodes.iter().zip(&gl.weights).enumerate() {
        let tp = mid + half * x;
        if tp <= 0.0 {
            continue;
        }
        let z = (t - tp) / w;
        terms[k] = (wt * half).ln() + ln_c + (hd - 1.0) * tp.ln() + ln_phi_norm - 0.5 * z * z;
    }
    oracle_lse(&terms)
}

fn combine_shift_means(means: &[f64], ln_scale: f64) -> Result<OracleEstimate> {
    let k = means.len() as f64;
    let mean = means.iter().sum::<f64>() / k;
    if mean <= 0.0 {
        return Ok(OracleEstimate {
            log_value: f64::NEG_INFINITY,
            std_err_log: f64::INFINITY,
            is_zero: true,
        });
    }
    let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (k - 1.0);
    let sem = (var / k).sqrt();
    Ok(OracleEstimate {
        log_value: ln_scale + mean.ln(),
        std_err_log: sem / mean,
        is_zero: false,
    })
}

// ---------------------------------------------------------------------
// Gauss-Legendre quadrature.
// ---------------------------------------------------------------------

/// Nodes and weights on [-1, 1], found by Newton iteration on the
/// Legendre recurrence.
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integral of f over [a, b].
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (p0 - x * p1) / (1.0 - x * x);
    (p1, d)
}

// ---------------------------------------------------------------------
// Finite differences.
// ---------------------------------------------------------------------

/// Comparison of a central finite difference of F against a claimed
/// derivative F', both supplied as natural logs.
#[derive(Clone, Copy, Debug)]
pub struct FdReport {
    pub log_fd: f64,
    pub log_analytic: f64,
    /// |FD / F' - 1|.
    pub rel_residual: f64,
}

/// Differentiates ln F numerically in value space and compares with the
/// claimed ln F'. Works entirely on logs so the check survives volumes
/// far outside f64 range; requires F strictly increasing across the
/// stencil, which holds for all cumulative volumes.
pub fn finite_difference_check(
    log_f: impl Fn(f64) -> Result<f64>,
    log_df: impl Fn(f64) -> Result<f64>,
    energy: f64,
    step: f64,
) -> Result<FdReport> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    let a_plus = log_f(energy + step)?;
    let a_minus = log_f(energy - step)?;
    if !(a_plus > a_minus) {
        return Err(Error::DegenerateEstimate(format!(
            "function is not increasing across the stencil at E = {energy}"
        )));
    }
    // ln[(F(E+h) - F(E-h)) / 2h], with the difference done stably.
    let log_fd = a_plus + (-((a_minus - a_plus).exp())).ln_1p() - (2.0 * step).ln();
    let log_analytic = log_df(energy)?;
    let rel_residual = ((log_fd - log_analytic).exp() - 1.0).abs();
    Ok(FdReport {
        log_fd,
        log_analytic,
        rel_residual,
    })
}
