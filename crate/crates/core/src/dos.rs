//! Configurational density of states.
//!
//! The central object is the cumulative configurational volume
//!
//!   Omega_U(E) = (1/N!) * vol{ q in box^N : U(q) < E },
//!
//! tabulated in the log domain on an energy grid. Three estimators fill
//! the table:
//!
//! * the exact free-gas closed form (and the two-level step it induces
//!   for hard spheres),
//! * hit-or-miss uniform sampling, which measures the accessible
//!   fraction vol{U < E} / vol{box^N} directly, and
//! * a flat-histogram random walk in the style of Wang and Landau
//!   (PRL 86, 2050 (2001)): the modification factor halves on every flat
//!   histogram until ln f drops below a threshold.
//!
//! The walk only ever yields relative bin measures. Absolute
//! normalization is anchored to the known full-box measure
//! ln(L^{3N}/N!) scaled by the measured probability that a uniform
//! configuration lands inside the sampled energy window, which reduces
//! to the free-volume plateau whenever the window captures all mass.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::log_value::LogValue;
use crate::math::{ln_factorial, log_sum_exp_slice};
use crate::rng::{stream_rng, StreamPurpose};
use crate::system::{config_energy_unchecked, dist2, PairPotential, SystemSpec};

/// Monte Carlo knobs shared by every estimator in this module.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerParams {
    /// Root of all stream seeds; fixing it fixes every draw.
    pub master_seed: u64,
    /// Total uniform-sampling budget, split evenly across streams.
    pub n_samples: u64,
    /// Independent streams; results are merged in stream order, so the
    /// outcome does not depend on the worker count.
    pub n_streams: u32,
    /// Flat-histogram criterion: every visited bin must reach this
    /// fraction of the mean count before the modification factor halves.
    pub wl_flatness: f64,
    /// Stop once ln f falls below this value.
    pub wl_log_f_final: f64,
    /// Hard sweep budget per walker; exceeding it is a convergence error.
    pub wl_max_sweeps: u64,
}

impl SamplerParams {
    pub fn with_seed(master_seed: u64) -> Self {
        SamplerParams {
            master_seed,
            n_samples: 1_000_000,
            n_streams: 8,
            wl_flatness: 0.8,
            wl_log_f_final: 1.0e-4,
            wl_max_sweeps: 5_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_streams == 0 {
            return Err(Error::InvalidParameter("n_streams must be >= 1".into()));
        }
        if self.n_samples < self.n_streams as u64 {
            return Err(Error::InvalidParameter(
                "n_samples must be at least n_streams".into(),
            ));
        }
        if !(self.wl_flatness > 0.0 && self.wl_flatness < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "wl_flatness must lie in (0, 1), got {}",
                self.wl_flatness
            )));
        }
        if !(self.wl_log_f_final > 0.0) {
            return Err(Error::InvalidParameter(
                "wl_log_f_final must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// How a ConfigDoS table was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DosEstimator {
    ExactIdeal,
    TwoLevel,
    Uniform,
    WangLandau,
}

/// Tabulated cumulative configurational volume for one system.
///
/// Entries hold ln Omega_U at strictly increasing grid energies; zero
/// entries mark energies at or below the reachable support. Between
/// nodes the table interpolates log-linearly; below the first nonzero
/// node the value is clamped to that node when the grid carries no
/// explicit zero prefix (a pure step at the ground energy), and is zero
/// otherwise.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConfigDoS {
    spec: SystemSpec,
    e_ground: f64,
    grid: Vec<f64>,
    log_omega_u: Vec<LogValue>,
    std_err: Vec<f64>,
    estimator: DosEstimator,
    /// Indices whose values were moved by the monotonicity repair.
    isotonic_corrected: Vec<usize>,
    /// ln of the total measure the normalization was anchored to.
    anchor_log: Option<f64>,
}

impl ConfigDoS {
    fn new_checked(
        spec: SystemSpec,
        e_ground: f64,
        grid: Vec<f64>,
        log_omega_u: Vec<LogValue>,
        std_err: Vec<f64>,
        estimator: DosEstimator,
        isotonic_corrected: Vec<usize>,
        anchor_log: Option<f64>,
    ) -> Result<Self> {
        if grid.is_empty() || grid.len() != log_omega_u.len() || grid.len() != std_err.len() {
            return Err(Error::InvalidParameter(
                "dos grid and value lengths must match and be nonempty".into(),
            ));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter(
                "dos grid must be strictly increasing".into(),
            ));
        }
        for (i, (e, v)) in grid.iter().zip(&log_omega_u).enumerate() {
            if *e <= e_ground && !v.is_zero() {
                return Err(Error::InvalidParameter(format!(
                    "entry {i} at E = {e} sits at or below the ground bound {e_ground} but is nonzero"
                )));
            }
        }
        if log_omega_u.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter(
                "dos values must be nondecreasing".into(),
            ));
        }
        Ok(ConfigDoS {
            spec,
            e_ground,
            grid,
            log_omega_u,
            std_err,
            estimator,
            isotonic_corrected,
            anchor_log,
        })
    }

    /// Exact table for the free gas: a single plateau node, since
    /// Omega_U jumps from 0 to L^{3N}/N! at E = 0.
    pub fn exact_ideal(spec: &SystemSpec) -> Result<Self> {
        if !matches!(spec.potential, PairPotential::Ideal) {
            return Err(Error::WrongPotential {
                expected: "ideal",
                got: spec.potential.name(),
            });
        }
        let v = LogValue::from_ln(ln_box_measure(spec));
        Self::new_checked(
            spec.clone(),
            0.0,
            vec![1.0],
            vec![v],
            vec![0.0],
            DosEstimator::ExactIdeal,
            Vec::new(),
            Some(v.ln()),
        )
    }

    /// Assemble a table from externally produced entries (a reloaded CSV,
    /// a synthetic test fixture). The grid and monotonicity invariants are
    /// enforced, nothing is repaired.
    pub fn from_table(
        spec: &SystemSpec,
        e_ground: f64,
        grid: Vec<f64>,
        log_omega_u: Vec<LogValue>,
        std_err: Vec<f64>,
        estimator: DosEstimator,
    ) -> Result<Self> {
        Self::new_checked(
            spec.clone(),
            e_ground,
            grid,
            log_omega_u,
            std_err,
            estimator,
            Vec::new(),
            None,
        )
    }

    /// Two-level step: zero below the ground energy, a constant above.
    /// Used for hard spheres, whose accessible volume is E-independent.
    pub fn two_level(spec: &SystemSpec, log_constant: LogValue, std_err: f64) -> Result<Self> {
        let anchor = log_constant.ln();
        Self::new_checked(
            spec.clone(),
            0.0,
            vec![1.0],
            vec![log_constant],
            vec![std_err],
            DosEstimator::TwoLevel,
            Vec::new(),
            Some(anchor),
        )
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn e_ground(&self) -> f64 {
        self.e_ground
    }

    /// Lower bound for the interaction energy density, e_ground / |box|.
    /// Feeds the feasibility window of the variational entropy.
    pub fn eps_lower(&self) -> f64 {
        self.e_ground / self.spec.volume()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[LogValue] {
        &self.log_omega_u
    }

    pub fn std_errs(&self) -> &[f64] {
        &self.std_err
    }

    pub fn estimator(&self) -> DosEstimator {
        self.estimator
    }

    pub fn isotonic_corrected(&self) -> &[usize] {
        &self.isotonic_corrected
    }

    pub fn anchor_log(&self) -> Option<f64> {
        self.anchor_log
    }

    /// Index of the first nonzero entry, if any.
    fn first_nonzero(&self) -> Option<usize> {
        self.log_omega_u.iter().position(|v| !v.is_zero())
    }

    /// Energy below which the table is structurally zero. Equals the
    /// ground bound for pure-step tables and the first nonzero node when
    /// an explicit zero prefix localizes the support more tightly.
    pub(crate) fn support_min(&self) -> f64 {
        match self.first_nonzero() {
            None => f64::INFINITY,
            Some(0) => self.e_ground,
            Some(f) => self.grid[f],
        }
    }

    /// Cumulative volume at energy `e` (strict: zero at the ground bound
    /// itself, since {U < e_ground} is empty).
    pub fn log_omega_at(&self, e: f64) -> LogValue {
        if e <= self.e_ground {
            return LogValue::ZERO;
        }
        self.eval_clamped(e)
    }

    /// Right-limit evaluation used by quadrature: at the support edge the
    /// integrand takes its limit from inside the domain, so a pure step
    /// evaluates to its plateau there instead of zero.
    pub(crate) fn log_omega_upper(&self, e: f64) -> LogValue {
        if e < self.support_min() {
            return LogValue::ZERO;
        }
        self.eval_clamped(e)
    }

    fn eval_clamped(&self, e: f64) -> LogValue {
        let f = match self.first_nonzero() {
            None => return LogValue::ZERO,
            Some(f) => f,
        };
        if e < self.grid[f] {
            // No zero prefix: the whole jump sits at the ground energy,
            // so the plateau extends left. With a zero prefix the mass
            // is only known to lie above the last zero node.
            return if f == 0 {
                self.log_omega_u[0]
            } else {
                LogValue::ZERO
            };
        }
        let m = self.grid.len() - 1;
        if e >= self.grid[m] {
            return self.log_omega_u[m];
        }
        // e in [grid[f], grid[m]): log-linear between the bracketing nodes.
        let hi = self.grid.partition_point(|&g| g <= e);
        let lo = hi - 1;
        let (e0, e1) = (self.grid[lo], self.grid[hi]);
        let (v0, v1) = (self.log_omega_u[lo], self.log_omega_u[hi]);
        if v0.is_zero() {
            // Mass inside this panel is attributed to its upper node.
            return LogValue::ZERO;
        }
        let t = (e - e0) / (e1 - e0);
        LogValue::from_ln(v0.ln() + t * (v1.ln() - v0.ln()))
    }

    /// Reinterpolate onto a grid refined by an integer factor. Used by
    /// self-consistency checks that compare discretizations.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        if factor < 1 {
            return Err(Error::InvalidParameter("refine factor must be >= 1".into()));
        }
        let mut grid = Vec::new();
        for w in self.grid.windows(2) {
            for k in 0..factor {
                grid.push(w[0] + (w[1] - w[0]) * k as f64 / factor as f64);
            }
        }
        grid.push(*self.grid.last().unwrap());
        let values: Vec<LogValue> = grid.iter().map(|&e| self.log_omega_at(e)).collect();
        let errs = vec![0.0; grid.len()];
        Self::new_checked(
            self.spec.clone(),
            self.e_ground,
            grid,
            values,
            errs,
            self.estimator,
            Vec::new(),
            self.anchor_log,
        )
    }

    /// CSV table: one row per grid node, full float precision so ASCII
    /// round-trips are exact.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("E,log_omega_u,is_zero,std_err\n");
        for i in 0..self.grid.len() {
            let v = &self.log_omega_u[i];
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_full(self.grid[i]),
                fmt_full(if v.is_zero() { f64::NEG_INFINITY } else { v.ln() }),
                v.is_zero(),
                fmt_full(self.std_err[i]),
            ));
        }
        out
    }
}

/// 17-significant-digit scientific formatting; round-trips f64 exactly.
pub(crate) fn fmt_full(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        return "-inf".into();
    }
    if x == f64::INFINITY {
        return "inf".into();
    }
    format!("{x:.16e}")
}

/// ln of the full-box configurational measure L^{3N}/N!.
pub(crate) fn ln_box_measure(spec: &SystemSpec) -> f64 {
    3.0 * spec.n_particles as f64 * spec.box_side.ln() - ln_factorial(spec.n_particles as u64)
}

/// Free-gas configurational volume: ln(L^{3N}/N!) for E > 0, zero below.
pub fn log_omega_u_ideal(spec: &SystemSpec, energy: f64) -> Result<LogValue> {
    if !matches!(spec.potential, PairPotential::Ideal) {
        return Err(Error::WrongPotential {
            expected: "ideal",
            got: spec.potential.name(),
        });
    }
    Ok(if energy > 0.0 {
        LogValue::from_ln(ln_box_measure(spec))
    } else {
        LogValue::ZERO
    })
}

/// Certified lower bound for the interaction energy: 0 for Ideal and
/// HardSphere (no negative pair terms exist), and -N * B for the 12-6
/// model with the per-particle constant B = (N-1)/2 * |min pair energy|.
/// Every pair contributes at least the shifted well minimum, so the
/// all-pairs count certifies the bound; it is tight for N = 4, where a
/// regular tetrahedron puts all six pairs at the minimum simultaneously.
pub fn ground_energy_bound(spec: &SystemSpec) -> f64 {
    match spec.potential {
        PairPotential::Ideal | PairPotential::HardSphere { .. } => 0.0,
        PairPotential::LennardJones { .. } => {
            let n = spec.n_particles as f64;
            let pair_min = spec.potential.pair_lower_bound();
            n * (n - 1.0) / 2.0 * pair_min
        }
    }
}

/// Hit-or-miss estimate of the accessible fraction
/// vol{U < E} / vol{box^N} under uniform positions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionEstimate {
    pub fraction: f64,
    /// Binomial standard error of `fraction`.
    pub std_err: f64,
    /// Set when no sample hit; the log of the fraction is then undefined
    /// and the energy needs the flat-histogram estimator instead.
    pub zero_hits: bool,
}

impl FractionEstimate {
    /// Standard error of ln(fraction) by the delta method.
    pub fn log_std_err(&self) -> f64 {
        if self.zero_hits {
            f64::INFINITY
        } else {
            self.std_err / self.fraction
        }
    }
}

/// Uniform sampling of the accessible fraction at one energy.
///
/// Deterministic for a fixed (master_seed, n_streams): each stream owns a
/// seeded generator and the integer hit counts merge in stream order.
pub fn estimate_accessible_fraction(
    spec: &SystemSpec,
    energy: f64,
    params: &SamplerParams,
) -> Result<FractionEstimate> {
    estimate_fraction_with(spec, params, StreamPurpose::UniformHits, 0, |u| u < energy, energy)
}

fn estimate_fraction_with(
    spec: &SystemSpec,
    params: &SamplerParams,
    purpose: StreamPurpose,
    stream_offset: u64,
    hit: impl Fn(f64) -> bool + Sync,
    energy: f64,
) -> Result<FractionEstimate> {
    if !energy.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "threshold energy must be finite, got {energy}"
        )));
    }
    params.validate()?;
    let streams = params.n_streams as u64;
    let counts: Vec<u64> = (0..streams)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream_rng(params.master_seed, purpose, stream_offset + s);
            let quota = stream_quota(params.n_samples, streams, s);
            let mut hits = 0u64;
            let mut q = vec![[0.0; 3]; spec.n_particles];
            for _ in 0..quota {
                for p in q.iter_mut() {
                    for c in p.iter_mut() {
                        *c = rng.gen::<f64>() * spec.box_side;
                    }
                }
                if hit(config_energy_unchecked(spec, &q)) {
                    hits += 1;
                }
            }
            hits
        })
        .collect();
    let hits: u64 = counts.iter().sum();
    let n = params.n_samples as f64;
    let fraction = hits as f64 / n;
    Ok(FractionEstimate {
        fraction,
        std_err: (fraction * (1.0 - fraction) / n).sqrt(),
        zero_hits: hits == 0,
    })
}

fn stream_quota(total: u64, streams: u64, index: u64) -> u64 {
    total / streams + u64::from(index < total % streams)
}

/// Build a ConfigDoS from uniform-sampling fractions at the given
/// energies. Noisy cumulative estimates can violate monotonicity, so a
/// pool-adjacent-violators pass repairs the sequence; repaired indices
/// are recorded on the result and logged.
pub fn dos_from_uniform_fractions(
    spec: &SystemSpec,
    energies: &[f64],
    params: &SamplerParams,
) -> Result<ConfigDoS> {
    if energies.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one grid energy is required".into(),
        ));
    }
    if energies.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter(
            "grid energies must be strictly increasing".into(),
        ));
    }
    let e_ground = ground_energy_bound(spec);
    let ln_box = ln_box_measure(spec);
    let streams = params.n_streams as u64;
    let mut values = Vec::with_capacity(energies.len());
    let mut errs = Vec::with_capacity(energies.len());
    for (k, &e) in energies.iter().enumerate() {
        if e <= e_ground {
            values.push(LogValue::ZERO);
            errs.push(0.0);
            continue;
        }
        let est = estimate_fraction_with(
            spec,
            params,
            StreamPurpose::UniformHits,
            k as u64 * streams,
            |u| u < e,
            e,
        )?;
        if est.zero_hits {
            values.push(LogValue::ZERO);
            errs.push(0.0);
        } else {
            values.push(LogValue::from_ln(ln_box + est.fraction.ln()));
            errs.push(est.log_std_err());
        }
    }
    let corrected = isotonic_repair(&mut values, &errs);
    if !corrected.is_empty() {
        log::warn!(
            "monotonicity repair moved {} of {} dos entries: {:?}",
            corrected.len(),
            values.len(),
            corrected
        );
    }
    ConfigDoS::new_checked(
        spec.clone(),
        e_ground,
        energies.to_vec(),
        values,
        errs,
        DosEstimator::Uniform,
        corrected,
        Some(ln_box),
    )
}

/// Weighted pool-adjacent-violators on the nonzero suffix of a log-value
/// sequence. Returns the indices whose values moved.
fn isotonic_repair(values: &mut [LogValue], errs: &[f64]) -> Vec<usize> {
    let start = match values.iter().position(|v| !v.is_zero()) {
        Some(s) => s,
        None => return Vec::new(),
    };
    let logs: Vec<f64> = values[start..].iter().map(|v| v.ln()).collect();
    if logs.iter().any(|v| !v.is_finite()) {
        // Zero entries above the support edge: leave the table alone and
        // let the validity check reject it if order is actually broken.
        return Vec::new();
    }
    let weights: Vec<f64> = errs[start..]
        .iter()
        .map(|&s| if s > 0.0 { 1.0 / (s * s) } else { 1.0 })
        .collect();
    let fitted = pool_adjacent_violators(&logs, &weights);
    let mut moved = Vec::new();
    for (i, &f) in fitted.iter().enumerate() {
        if (f - logs[i]).abs() > 1e-15 * logs[i].abs().max(1.0) {
            values[start + i] = LogValue::from_ln(f);
            moved.push(start + i);
        }
    }
    moved
}

fn pool_adjacent_violators(y: &[f64], w: &[f64]) -> Vec<f64> {
    // Blocks of (weighted mean, weight, count), merged while decreasing.
    let mut mean = Vec::with_capacity(y.len());
    let mut weight = Vec::with_capacity(y.len());
    let mut count = Vec::with_capacity(y.len());
    for i in 0..y.len() {
        mean.push(y[i]);
        weight.push(w[i]);
        count.push(1usize);
        while mean.len() > 1 && mean[mean.len() - 2] > mean[mean.len() - 1] {
            let (m2, w2, c2) = (mean.pop().unwrap(), weight.pop().unwrap(), count.pop().unwrap());
            let last = mean.len() - 1;
            let merged_w = weight[last] + w2;
            mean[last] = (mean[last] * weight[last] + m2 * w2) / merged_w;
            weight[last] = merged_w;
            count[last] += c2;
        }
    }
    let mut out = Vec::with_capacity(y.len());
    for (m, c) in mean.iter().zip(&count) {
        out.extend(std::iter::repeat(*m).take(*c));
    }
    out
}

/// Flat-histogram estimate of the configurational density of states on
/// the given bin edges, returned as the cumulative table at the edges.
///
/// Runs `n_streams` independent walkers and averages their anchored
/// cumulative curves; the scatter across walkers provides the per-entry
/// standard error. The shared normalization anchor comes from a uniform
/// sampling pass measuring the in-window probability mass.
pub fn wang_landau_dos(
    spec: &SystemSpec,
    u_edges: &[f64],
    params: &SamplerParams,
) -> Result<ConfigDoS> {
    params.validate()?;
    if u_edges.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two bin edges".into(),
        ));
    }
    if u_edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter(
            "bin edges must be strictly increasing".into(),
        ));
    }
    let e_ground = ground_energy_bound(spec);
    if u_edges[0] > e_ground {
        return Err(Error::InvalidParameter(format!(
            "bottom edge {} must not exceed the certified ground bound {}",
            u_edges[0], e_ground
        )));
    }

    // Normalization anchor: fraction of uniform configurations whose
    // interaction energy falls inside the sampled window. Independent
    // substreams keep this estimate uncorrelated with any uniform-grid
    // cross-checks run under the same master seed.
    let (lo, hi) = (u_edges[0], *u_edges.last().unwrap());
    let anchor = estimate_fraction_with(
        spec,
        params,
        StreamPurpose::NormalizationAnchor,
        0,
        |u| (lo..hi).contains(&u),
        hi,
    )?;
    if anchor.zero_hits {
        return Err(Error::DegenerateEstimate(
            "no uniform sample landed in the energy window; the anchor is undefined".into(),
        ));
    }
    let ln_total = ln_box_measure(spec) + anchor.fraction.ln();
    let anchor_sigma = anchor.log_std_err();

    let walker_results: Vec<Result<Vec<f64>>> = (0..params.n_streams as u64)
        .into_par_iter()
        .map(|s| run_walker(spec, u_edges, params, s).map(|masses| cumulative_curve(&masses)))
        .collect();
    let mut curves = Vec::with_capacity(walker_results.len());
    for r in walker_results {
        curves.push(r?);
    }

    // Edge-wise merge in the log domain: geometric-mean estimate with
    // across-stream scatter, plus the shared anchor uncertainty.
    let n_edges = u_edges.len();
    let mut values = vec![LogValue::ZERO; n_edges];
    let mut errs = vec![0.0; n_edges];
    for j in 0..n_edges {
        let finite: Vec<f64> = curves
            .iter()
            .map(|c| c[j])
            .filter(|v| v.is_finite())
            .collect();
        if finite.is_empty() {
            continue;
        }
        let k = finite.len() as f64;
        let mean = finite.iter().sum::<f64>() / k + ln_total;
        let scatter = if finite.len() > 1 {
            let var = finite.iter().map(|v| {
                let d = v - (mean - ln_total);
                d * d
            }).sum::<f64>() / (k - 1.0);
            (var / k).sqrt()
        } else {
            0.0
        };
        values[j] = LogValue::from_ln(mean);
        errs[j] = (scatter * scatter + anchor_sigma * anchor_sigma).sqrt();
    }

    let corrected = isotonic_repair(&mut values, &errs);
    if !corrected.is_empty() {
        log::warn!(
            "monotonicity repair moved {} merged dos entries: {:?}",
            corrected.len(),
            corrected
        );
    }
    ConfigDoS::new_checked(
        spec.clone(),
        e_ground,
        u_edges.to_vec(),
        values,
        errs,
        DosEstimator::WangLandau,
        corrected,
        Some(ln_total),
    )
}

/// ln of the cumulative measure at every edge given per-bin log masses
/// normalized to total 1; index 0 is the (empty) measure below the
/// bottom edge.
fn cumulative_curve(log_masses: &[f64]) -> Vec<f64> {
    let total = log_sum_exp_slice(log_masses);
    let mut out = Vec::with_capacity(log_masses.len() + 1);
    out.push(f64::NEG_INFINITY);
    let mut acc = f64::NEG_INFINITY;
    for &m in log_masses {
        acc = crate::math::log_sum_exp(acc, m);
        out.push(acc - total);
    }
    out
}

/// One flat-histogram walker; returns relative log bin masses
/// (NEG_INFINITY for bins never visited).
fn run_walker(
    spec: &SystemSpec,
    edges: &[f64],
    params: &SamplerParams,
    stream: u64,
) -> Result<Vec<f64>> {
    let n_bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[n_bins]);
    let bin_of = |u: f64| -> Option<usize> {
        if !(lo..hi).contains(&u) {
            return None;
        }
        Some(edges.partition_point(|&e| e <= u) - 1)
    };

    let mut rng = stream_rng(params.master_seed, StreamPurpose::FlatHistogram, stream);
    let mut q = spec.lattice_configuration();
    let mut u = config_energy_unchecked(spec, &q);
    let mut bin = bin_of(u).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "lattice start energy {u} lies outside the window [{lo}, {hi})"
        ))
    })?;

    let n = spec.n_particles;
    let local_step = {
        let r = spec.potential.range();
        if r > 0.0 {
            (0.5 * r).min(spec.box_side / 4.0)
        } else {
            spec.box_side / 8.0
        }
    };

    let mut ln_g = vec![0.0f64; n_bins];
    let mut hist = vec![0u64; n_bins];
    let mut ln_f = 1.0f64;
    let mut sweeps: u64 = 0;
    const CHECK_INTERVAL: u64 = 500;
    const RECOMPUTE_INTERVAL: u64 = 4096;

    while ln_f >= params.wl_log_f_final {
        for _ in 0..CHECK_INTERVAL {
            if sweeps >= params.wl_max_sweeps {
                let (min, mean) = hist_stats(&hist);
                return Err(Error::SamplerNotConverged {
                    log_f: ln_f,
                    sweeps,
                    flatness: if mean > 0.0 { min / mean } else { 0.0 },
                    target: params.wl_flatness,
                });
            }
            for _ in 0..n {
                let i = rng.gen_range(0..n);
                let old = q[i];
                let new = if rng.gen::<f64>() < 0.5 {
                    [
                        rng.gen::<f64>() * spec.box_side,
                        rng.gen::<f64>() * spec.box_side,
                        rng.gen::<f64>() * spec.box_side,
                    ]
                } else {
                    let mut p = old;
                    for c in p.iter_mut() {
                        *c += (rng.gen::<f64>() * 2.0 - 1.0) * local_step;
                    }
                    p
                };
                // Hard walls: out-of-box proposals are rejected outright.
                let draw: f64 = rng.gen();
                if new.iter().any(|&c| !(0.0..=spec.box_side).contains(&c)) {
                    ln_g[bin] += ln_f;
                    hist[bin] += 1;
                    continue;
                }
                let du = pair_energy_delta(spec, &q, i, &old, &new);
                let u_new = u + du;
                let accept = match bin_of(u_new) {
                    None => false,
                    Some(b_new) => draw < (ln_g[bin] - ln_g[b_new]).exp(),
                };
                if accept {
                    let b_new = bin_of(u_new).unwrap();
                    q[i] = new;
                    u = u_new;
                    bin = b_new;
                }
                ln_g[bin] += ln_f;
                hist[bin] += 1;
            }
            sweeps += 1;
            if sweeps % RECOMPUTE_INTERVAL == 0 {
                // Kill float drift from incremental updates.
                u = config_energy_unchecked(spec, &q);
                bin = bin_of(u).expect("recomputed energy left the window");
            }
        }
        let (min, mean) = hist_stats(&hist);
        if mean > 0.0 && min >= params.wl_flatness * mean {
            ln_f *= 0.5;
            hist.iter_mut().for_each(|h| *h = 0);
        }
    }

    // Relative log masses. Every visited bin accumulated at least one
    // positive increment, so g > 0 marks the visited set; shifting by the
    // maximum keeps the exponentials representable.
    let visited_ref = ln_g.iter().copied().filter(|&g| g > 0.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(ln_g
        .iter()
        .map(|&g| if g > 0.0 { g - visited_ref } else { f64::NEG_INFINITY })
        .collect())
}

fn hist_stats(hist: &[u64]) -> (f64, f64) {
    let visited: Vec<u64> = hist.iter().copied().filter(|&h| h > 0).collect();
    if visited.is_empty() {
        return (0.0, 0.0);
    }
    let min = *visited.iter().min().unwrap() as f64;
    let mean = visited.iter().sum::<u64>() as f64 / visited.len() as f64;
    (min, mean)
}

/// Energy change from moving particle `i` from `old` to `new`.
fn pair_energy_delta(spec: &SystemSpec, q: &[[f64; 3]], i: usize, old: &[f64; 3], new: &[f64; 3]) -> f64 {
    let mut du = 0.0;
    for (j, qj) in q.iter().enumerate() {
        if j == i {
            continue;
        }
        let w_new = spec.potential.pair_energy_r2(dist2(new, qj));
        if w_new == f64::INFINITY {
            return f64::INFINITY;
        }
        du += w_new - spec.potential.pair_energy_r2(dist2(old, qj));
    }
    du
}

/// Sidecar metadata describing how a dos table was produced; serialized
/// next to the CSV so a run can be reproduced from its outputs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DosSidecar {
    pub spec: SystemSpec,
    pub estimator: DosEstimator,
    pub e_ground: f64,
    pub anchor_log: Option<f64>,
    pub params: Option<SamplerParams>,
    pub isotonic_corrected: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl ConfigDoS {
    pub fn sidecar(&self, params: Option<SamplerParams>, timestamp: Option<String>) -> DosSidecar {
        DosSidecar {
            spec: self.spec.clone(),
            estimator: self.estimator,
            e_ground: self.e_ground,
            anchor_log: self.anchor_log,
            params,
            isotonic_corrected: self.isotonic_corrected.clone(),
            timestamp,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::PairPotential;

    fn ideal(n: usize, l: f64) -> SystemSpec {
        SystemSpec::new(n, l, PairPotential::Ideal).unwrap()
    }

    #[test]
    fn ideal_closed_form_examples() {
        // N = 3, L = 1: ln(1/3!) = -ln 6.
        let spec = ideal(3, 1.0);
        let v = log_omega_u_ideal(&spec, 5.0).unwrap();
        assert!((v.ln() + 6.0_f64.ln()).abs() < 1e-13);
        assert!(log_omega_u_ideal(&spec, 0.0).unwrap().is_zero());
        assert!(log_omega_u_ideal(&spec, -3.0).unwrap().is_zero());
        // N = 1, L = 2: ln 8.
        let v2 = log_omega_u_ideal(&ideal(1, 2.0), 0.1).unwrap();
        assert!((v2.ln() - 8.0_f64.ln()).abs() < 1e-13);
        // Wrong variant is a usage error.
        let hs = SystemSpec::new(1, 2.0, PairPotential::HardSphere { sigma: 0.5 }).unwrap();
        assert!(matches!(
            log_omega_u_ideal(&hs, 1.0),
            Err(Error::WrongPotential { .. })
        ));
    }

    #[test]
    fn ground_bounds_per_model() {
        assert_eq!(ground_energy_bound(&ideal(5, 3.0)), 0.0);
        let hs = SystemSpec::new(4, 10.0, PairPotential::HardSphere { sigma: 1.0 }).unwrap();
        assert_eq!(ground_energy_bound(&hs), 0.0);
        let lj = SystemSpec::new(4, 10.0, PairPotential::lennard_jones(1.0, 1.0)).unwrap();
        let pair_min = lj.potential.pair_lower_bound();
        let expected = 6.0 * pair_min; // all six pairs of a tetrahedron
        assert!((ground_energy_bound(&lj) - expected).abs() < 1e-12);
        assert!(ground_energy_bound(&lj) < 0.0);
    }

    #[test]
    fn stability_bound_holds_on_random_configurations() {
        let lj = SystemSpec::new(8, 4.0, PairPotential::lennard_jones(1.0, 1.0)).unwrap();
        let bound = ground_energy_bound(&lj);
        let mut rng = stream_rng(7, StreamPurpose::UniformHits, 99);
        let mut q = vec![[0.0; 3]; 8];
        for _ in 0..10_000 {
            for p in q.iter_mut() {
                for c in p.iter_mut() {
                    *c = rng.gen::<f64>() * 4.0;
                }
            }
            let u = config_energy_unchecked(&lj, &q);
            assert!(u >= bound, "U = {u} under the certified bound {bound}");
        }
    }

    #[test]
    fn exact_ideal_table_is_a_step() {
        let dos = ConfigDoS::exact_ideal(&ideal(2, 3.0)).unwrap();
        let plateau = ln_box_measure(&ideal(2, 3.0));
        assert!(dos.log_omega_at(0.0).is_zero());
        assert!(dos.log_omega_at(-1.0).is_zero());
        for e in [1e-9, 0.5, 1.0, 7.0, 1e6] {
            assert_eq!(dos.log_omega_at(e).ln(), plateau);
        }
        // Right-limit view exposes the plateau at the support edge.
        assert_eq!(dos.log_omega_upper(0.0).ln(), plateau);
    }

    #[test]
    fn accessible_fraction_ideal_is_one() {
        let params = SamplerParams {
            n_samples: 4000,
            ..SamplerParams::with_seed(11)
        };
        let est = estimate_accessible_fraction(&ideal(3, 2.0), 0.5, &params).unwrap();
        assert_eq!(est.fraction, 1.0);
        assert_eq!(est.std_err, 0.0);
        assert!(!est.zero_hits);
    }

    #[test]
    fn accessible_fraction_unreachable_energy_is_zero_flagged() {
        // Hard spheres never realize U < 0, so the estimate must come
        // back empty and flagged rather than silently logging ln 0.
        let spec = SystemSpec::new(2, 4.0, PairPotential::HardSphere { sigma: 1.0 }).unwrap();
        let params = SamplerParams {
            n_samples: 2000,
            ..SamplerParams::with_seed(5)
        };
        let est = estimate_accessible_fraction(&spec, 0.0, &params).unwrap();
        assert_eq!(est.fraction, 0.0);
        assert!(est.zero_hits);
    }

    #[test]
    fn accessible_fraction_is_seed_deterministic() {
        let spec = SystemSpec::new(3, 5.0, PairPotential::HardSphere { sigma: 1.0 }).unwrap();
        let params = SamplerParams {
            n_samples: 20_000,
            ..SamplerParams::with_seed(123)
        };
        let a = estimate_accessible_fraction(&spec, 0.5, &params).unwrap();
        let b = estimate_accessible_fraction(&spec, 0.5, &params).unwrap();
        assert_eq!(a, b);
        let other = estimate_accessible_fraction(
            &spec,
            0.5,
            &SamplerParams {
                master_seed: 124,
                ..params
            },
        )
        .unwrap();
        assert_ne!(a.fraction, other.fraction);
    }

    #[test]
    fn error_bar_shrinks_like_root_two_when_doubling_samples() {
        // Empirical scatter across repeated seeds, n vs 2n.
        let spec = SystemSpec::new(2, 3.0, PairPotential::HardSphere { sigma: 1.0 }).unwrap();
        let scatter = |n: u64| {
            let xs: Vec<f64> = (0..40)
                .map(|seed| {
                    let params = SamplerParams {
                        n_samples: n,
                        n_streams: 4,
                        ..SamplerParams::with_seed(1000 + seed)
                    };
                    estimate_accessible_fraction(&spec, 0.5, &params)
                        .unwrap()
                        .fraction
                })
                .collect();
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
        };
        let ratio = scatter(4000) / scatter(8000);
        let root2 = std::f64::consts::SQRT_2;
        assert!(
            (ratio / root2 - 1.0).abs() < 0.35,
            "scatter ratio {ratio} too far from sqrt(2)"
        );
    }

    #[test]
    fn uniform_dos_is_monotone_and_flags_repairs() {
        let spec = SystemSpec::new(3, 4.0, PairPotential::lennard_jones(1.0, 1.0)).unwrap();
        let params = SamplerParams {
            n_samples: 40_000,
            n_streams: 4,
            ..SamplerParams::with_seed(77)
        };
        let energies = [-0.5, 0.0, 0.5, 1.0, 2.0];
        let dos = dos_from_uniform_fractions(&spec, &energies, &params).unwrap();
        let vals = dos.values();
        for w in vals.windows(2) {
            assert!(w[0] <= w[1]);
        }
        // The repaired index list is consistent with the invariant.
        for &i in dos.isotonic_corrected() {
            assert!(i < vals.len());
        }
    }

    #[test]
    fn pav_pools_violators_to_weighted_means() {
        let fitted = pool_adjacent_violators(&[1.0, 3.0, 2.0, 4.0], &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(fitted, vec![1.0, 2.5, 2.5, 4.0]);
        let all_down = pool_adjacent_violators(&[3.0, 2.0, 1.0], &[1.0, 1.0, 1.0]);
        assert_eq!(all_down, vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn wang_landau_ideal_reduces_to_full_measure() {
        let spec = ideal(2, 3.0);
        let params = SamplerParams {
            n_samples: 2000,
            n_streams: 2,
            wl_max_sweeps: 500_000,
            ..SamplerParams::with_seed(9)
        };
        let dos = wang_landau_dos(&spec, &[-0.5, 0.5], &params).unwrap();
        assert_eq!(dos.grid(), &[-0.5, 0.5]);
        assert!(dos.values()[0].is_zero());
        let plateau = ln_box_measure(&spec);
        // All mass in one bin and anchor fraction exactly 1.
        assert!((dos.values()[1].ln() - plateau).abs() < 1e-12);
    }

    #[test]
    fn wang_landau_hard_sphere_matches_uniform_estimate() {
        let spec = SystemSpec::new(3, 6.0, PairPotential::HardSphere { sigma: 1.0 }).unwrap();
        let params = SamplerParams {
            n_samples: 60_000,
            n_streams: 4,
            wl_max_sweeps: 500_000,
            ..SamplerParams::with_seed(31)
        };
        let dos = wang_landau_dos(&spec, &[-0.5, 0.5], &params).unwrap();
        let uni = estimate_accessible_fraction(&spec, 0.5, &params).unwrap();
        let expected = ln_box_measure(&spec) + uni.fraction.ln();
        let sigma = (dos.std_errs()[1].powi(2) + uni.log_std_err().powi(2)).sqrt();
        let diff = (dos.values()[1].ln() - expected).abs();
        assert!(
            diff <= 3.0 * sigma.max(1e-6),
            "two-level mismatch: {diff} vs 3 sigma = {}",
            3.0 * sigma
        );
    }

    #[test]
    fn wang_landau_is_seed_deterministic() {
        let spec = SystemSpec::new(3, 5.0, PairPotential::lennard_jones(1.0, 1.0)).unwrap();
        let edges: Vec<f64> = (0..=16)
            .map(|i| ground_energy_bound(&spec) + i as f64 * 1.0)
            .collect();
        let params = SamplerParams {
            n_samples: 20_000,
            n_streams: 2,
            wl_log_f_final: 1.0e-2,
            wl_max_sweeps: 2_000_000,
            ..SamplerParams::with_seed(42)
        };
        let a = wang_landau_dos(&spec, &edges, &params).unwrap();
        let b = wang_landau_dos(&spec, &edges, &params).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn csv_format_is_stable_and_full_precision() {
        let dos = ConfigDoS::exact_ideal(&ideal(2, 3.0)).unwrap();
        let csv = dos.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "E,log_omega_u,is_zero,std_err");
        let row = lines.next().unwrap();
        assert!(row.starts_with("1.0000000000000000e0,"));
        let reparsed: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(reparsed, dos.values()[0].ln());
    }

    #[test]
    fn refinement_preserves_the_table_values() {
        let spec = SystemSpec::new(3, 4.0, PairPotential::lennard_jones(1.0, 1.0)).unwrap();
        let params = SamplerParams {
            n_samples: 30_000,
            n_streams: 4,
            ..SamplerParams::with_seed(3)
        };
        let energies = [-0.5, 0.5, 1.5, 2.5];
        let dos = dos_from_uniform_fractions(&spec, &energies, &params).unwrap();
        let fine = dos.refined(4).unwrap();
        assert_eq!(fine.grid().len(), (energies.len() - 1) * 4 + 1);
        for (i, &e) in dos.grid().iter().enumerate() {
            let a = dos.values()[i];
            let b = fine.log_omega_at(e);
            if a.is_zero() {
                assert!(b.is_zero());
            } else {
                assert!((a.ln() - b.ln()).abs() < 1e-12);
            }
        }
    }
}
