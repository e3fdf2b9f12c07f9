//! Infinite-volume entropy from the variational split.
//!
//! In the large-system limit the entropy density factorizes over the
//! energy split between kinetic and interaction parts: at fixed particle
//! density rho and total energy density eps,
//!
//!   s_tot(rho, eps) = sup over k in (0, eps - eps_lower) of
//!                     [ s_kin(rho, k) + s_int(rho, eps - k) ],
//!
//! the log-domain analogue of evaluating a convolution by its peak. The
//! objective is concave (s_kin strictly, s_int by subadditivity), so a
//! golden-section search finds the supremum; when the maximizer presses
//! against an interval edge the result is flagged, because the true
//! supremum is then a boundary limit rather than a stationary point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetic::s_kin;

/// Interaction entropy density s_int(rho, x) as a function of the
/// interaction energy density x, at fixed particle density.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SIntModel {
    density: f64,
    eps_lower: f64,
    kind: SIntKind,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SIntKind {
    FreeGas,
    Tabulated { eps: Vec<f64>, s: Vec<f64> },
}

impl SIntModel {
    /// Free gas: all configurational measure sits at zero interaction
    /// energy, so the density is the flat rho (1 - ln rho) for x > 0.
    pub fn free_gas(density: f64) -> Result<Self> {
        if !(density > 0.0) || !density.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "density must be positive and finite, got {density}"
            )));
        }
        Ok(SIntModel {
            density,
            eps_lower: 0.0,
            kind: SIntKind::FreeGas,
        })
    }

    /// Piecewise-linear table of s_int over interaction energy density.
    /// Knots must start above the ground density and increase strictly;
    /// evaluation clamps outside the covered range, so the table should
    /// span the whole search interval of any later supremum call.
    pub fn tabulated(density: f64, eps_lower: f64, knots: &[(f64, f64)]) -> Result<Self> {
        if !(density > 0.0) || !density.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "density must be positive and finite, got {density}"
            )));
        }
        if knots.len() < 2 {
            return Err(Error::InvalidParameter(
                "an s_int table needs at least two knots".into(),
            ));
        }
        if knots.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::InvalidParameter(
                "s_int knots must have strictly increasing energies".into(),
            ));
        }
        if knots[0].0 <= eps_lower {
            return Err(Error::InvalidParameter(format!(
                "first knot {} must lie above the ground density {eps_lower}",
                knots[0].0
            )));
        }
        Ok(SIntModel {
            density,
            eps_lower,
            kind: SIntKind::Tabulated {
                eps: knots.iter().map(|k| k.0).collect(),
                s: knots.iter().map(|k| k.1).collect(),
            },
        })
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    /// Ground energy density: the lower edge of the interaction support,
    /// standing in for the exact infinite-volume threshold.
    pub fn eps_lower(&self) -> f64 {
        self.eps_lower
    }

    /// s_int at interaction energy density x; minus infinity at and
    /// below the ground density, where no configurations exist.
    pub fn s_int(&self, x: f64) -> f64 {
        if x <= self.eps_lower {
            return f64::NEG_INFINITY;
        }
        match &self.kind {
            SIntKind::FreeGas => self.density * (1.0 - self.density.ln()),
            SIntKind::Tabulated { eps, s } => {
                if x <= eps[0] {
                    return s[0];
                }
                let m = eps.len() - 1;
                if x >= eps[m] {
                    return s[m];
                }
                let hi = eps.partition_point(|&e| e <= x);
                let lo = hi - 1;
                let t = (x - eps[lo]) / (eps[hi] - eps[lo]);
                s[lo] + t * (s[hi] - s[lo])
            }
        }
    }
}

/// Outcome of the variational supremum.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SupremumResult {
    /// The entropy density bound s_tot(rho, eps).
    pub value: f64,
    /// Maximizing kinetic energy density (the interaction part takes
    /// the remainder eps - kinetic_share).
    pub kinetic_share: f64,
    /// The maximizer pressed against an interval edge; the supremum is a
    /// boundary limit (free gas always lands here, with the kinetic part
    /// taking all the energy).
    pub boundary_supremum: bool,
}

/// Offset keeping the search clear of the open-interval ends, as a
/// fraction of the total energy density. The kinetic slope near the
/// edge is about 1.5 rho / eps, so this offset biases boundary suprema
/// by roughly 1.5e-10 in entropy density, below reported precision.
const EDGE_MARGIN_FRACTION: f64 = 1.0e-10;

/// Bracket width at which the golden-section search stops, as a
/// fraction of the total energy density.
const BRACKET_FRACTION: f64 = 1.0e-10;

/// Variational entropy density: maximize s_kin(rho, k) + s_int(eps - k)
/// over the feasible kinetic share k in (0, eps - eps_lower).
pub fn s_tot_sup(model: &SIntModel, eps_total: f64) -> Result<SupremumResult> {
    if !eps_total.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "total energy density must be finite, got {eps_total}"
        )));
    }
    let rho = model.density;
    let scale = eps_total.abs().max(1.0);
    let delta = EDGE_MARGIN_FRACTION * scale;
    let width = eps_total - model.eps_lower;
    let (a, b) = (delta, width - delta);
    if !(a < b) {
        return Err(Error::EmptyInterval(format!(
            "no feasible energy split: ground density {}, total {eps_total}",
            model.eps_lower
        )));
    }
    let objective = |k: f64| s_kin(rho, k) + model.s_int(eps_total - k);
    let tol = BRACKET_FRACTION * scale;
    let (k_in, f_in) = golden_section_max(&objective, a, b, tol);
    // The ends are candidates in their own right; a concave objective
    // maximized at an edge converges there only asymptotically.
    let mut best = (k_in, f_in);
    for k in [a, b] {
        let f = objective(k);
        if f > best.1 {
            best = (k, f);
        }
    }
    let (kinetic_share, value) = best;
    if !value.is_finite() {
        return Err(Error::DegenerateEstimate(format!(
            "variational objective is not finite anywhere on [{a}, {b}]"
        )));
    }
    let boundary = kinetic_share - a <= 2.0 * tol || b - kinetic_share <= 2.0 * tol;
    Ok(SupremumResult {
        value,
        kinetic_share,
        boundary_supremum: boundary,
    })
}

/// Golden-section maximization of a unimodal function on [a, b].
/// Returns the best abscissa and value once the bracket shrinks to
/// `tol`; one function evaluation per iteration after the setup.
pub fn golden_section_max(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    debug_assert!(a < b && tol > 0.0);
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (a, b);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// One measured point of a growing-system series at fixed density:
/// particle count, box volume, and the log configurational phase
/// measure below the target interaction energy.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub n: u64,
    pub volume: f64,
    pub log_omega_u: f64,
}

/// Coefficients of the finite-size scaling law
/// a_N = a_inf + b / N + c ln N / N, with fit diagnostics.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScalingFit {
    /// Extrapolated infinite-system value.
    pub a_inf: f64,
    pub b: f64,
    pub c: f64,
    /// Largest absolute residual of the fit at the input points.
    pub max_residual: f64,
}

/// Extrapolates the interaction entropy density from a finite-size
/// series: per-volume values a_N = log_omega_u / volume are fitted
/// against a_inf + b/N + c ln N / N. All points must share one particle
/// density, the per-volume series must be monotone to within
/// `residual_tol`, and the fit must reproduce the data to the same
/// tolerance; violations are fit-quality errors carrying diagnostics.
pub fn s_int_extrapolate(series: &[SeriesPoint], residual_tol: f64) -> Result<ScalingFit> {
    if series.len() < 3 {
        return Err(Error::FitFailure(format!(
            "need at least three series points, got {}",
            series.len()
        )));
    }
    if !(residual_tol > 0.0) {
        return Err(Error::FitFailure(format!(
            "residual tolerance must be positive, got {residual_tol}"
        )));
    }
    for p in series {
        if p.n < 2 || !(p.volume > 0.0) || !p.log_omega_u.is_finite() {
            return Err(Error::FitFailure(format!(
                "unusable series point: n = {}, volume = {}, log value = {}",
                p.n, p.volume, p.log_omega_u
            )));
        }
    }
    let rho0 = series[0].n as f64 / series[0].volume;
    for p in series {
        let rho = p.n as f64 / p.volume;
        if (rho - rho0).abs() > 1e-9 * rho0.abs() {
            return Err(Error::FitFailure(format!(
                "density drifts across the series: {rho0} vs {rho} at n = {}",
                p.n
            )));
        }
    }
    let values: Vec<f64> = series.iter().map(|p| p.log_omega_u / p.volume).collect();
    let mono = monotone_violation(&values);
    if mono > residual_tol {
        return Err(Error::FitFailure(format!(
            "per-volume series is non-monotone by {mono:.3e} (tolerance {residual_tol:.3e})"
        )));
    }
    // Normal equations for the design [1, 1/N, ln N / N].
    let mut ata = [[0.0f64; 3]; 3];
    let mut aty = [0.0f64; 3];
    for (p, &y) in series.iter().zip(&values) {
        let nf = p.n as f64;
        let row = [1.0, 1.0 / nf, nf.ln() / nf];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            aty[i] += row[i] * y;
        }
    }
    let coeffs = solve_3x3(ata, aty).ok_or_else(|| {
        Error::FitFailure("degenerate scaling fit: sizes do not separate the basis".into())
    })?;
    let mut max_residual = 0.0f64;
    for (p, &y) in series.iter().zip(&values) {
        let nf = p.n as f64;
        let fitted = coeffs[0] + coeffs[1] / nf + coeffs[2] * nf.ln() / nf;
        max_residual = max_residual.max((y - fitted).abs());
    }
    if max_residual > residual_tol {
        return Err(Error::FitFailure(format!(
            "scaling law misses the data: max residual {max_residual:.3e} \
             exceeds tolerance {residual_tol:.3e} \
             (a_inf = {}, b = {}, c = {})",
            coeffs[0], coeffs[1], coeffs[2]
        )));
    }
    Ok(ScalingFit {
        a_inf: coeffs[0],
        b: coeffs[1],
        c: coeffs[2],
        max_residual,
    })
}

/// Distance from monotonicity in the friendlier direction: zero for any
/// nondecreasing or nonincreasing sequence.
fn monotone_violation(values: &[f64]) -> f64 {
    let mut up = 0.0f64;
    let mut down = 0.0f64;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d < 0.0 {
            up = up.max(-d);
        }
        if d > 0.0 {
            down = down.max(d);
        }
    }
    up.min(down)
}

fn solve_3x3(mut a: [[f64; 3]; 3], mut y: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        y.swap(col, pivot);
        for row in (col + 1)..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            y[row] -= f * y[col];
        }
    }
    let mut x = [0.0f64; 3];
    for row in (0..3).rev() {
        let mut s = y[row];
        for k in (row + 1)..3 {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

/// Shape diagnostic over sampled points of a putative entropy curve:
/// concave means slopes never increase, nondecreasing means slopes
/// never drop below zero. Both are reported; `passes` requires both
/// within the tolerance.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConcavityReport {
    /// Largest upward slope change found (0 or less for concave data).
    pub max_second_difference: f64,
    /// Smallest slope found (negative for locally decreasing data).
    pub min_first_difference: f64,
    pub is_concave: bool,
    pub is_nondecreasing: bool,
    pub passes: bool,
}

pub fn concavity_check(xs: &[f64], ys: &[f64], tol: f64) -> Result<ConcavityReport> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::InvalidParameter(
            "concavity check needs at least three matched points".into(),
        ));
    }
    if xs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter(
            "concavity check abscissae must increase strictly".into(),
        ));
    }
    let slopes: Vec<f64> = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(xw, yw)| (yw[1] - yw[0]) / (xw[1] - xw[0]))
        .collect();
    let mut max_second = f64::NEG_INFINITY;
    for w in slopes.windows(2) {
        max_second = max_second.max(w[1] - w[0]);
    }
    let min_first = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let is_concave = max_second <= tol;
    let is_nondecreasing = min_first >= -tol;
    Ok(ConcavityReport {
        max_second_difference: max_second,
        min_first_difference: min_first,
        is_concave,
        is_nondecreasing,
        passes: is_concave && is_nondecreasing,
    })
}
