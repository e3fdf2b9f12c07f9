//! Growing-system entropy studies.
//!
//! A sequence of cubes at fixed particle density and energy density is
//! the concrete route to the infinite-volume limit: per-volume values of
//! the two entropy definitions, plus a finite-shell variant, are tracked
//! as N grows and should approach one common value. The orchestration
//! here builds the system for each size, obtains the configurational
//! table by the cheapest sound estimator for the model, evaluates the
//! three entropies, and collects per-size failures without aborting the
//! rest of the sequence.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convolve::{boltzmann_entropy, quasi_entropy, shell_entropy, QuadratureSpec};
use crate::dos::{
    estimate_accessible_fraction, ground_energy_bound, ln_box_measure, wang_landau_dos,
    ConfigDoS, SamplerParams,
};
use crate::error::{Error, Result};
use crate::log_value::LogValue;
use crate::math::linspace;
use crate::system::{PairPotential, SystemSpec};

/// Fixed intensive state of a growing sequence: particle density rho
/// and total energy density eps.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ThermoPoint {
    pub density: f64,
    pub energy_density: f64,
}

impl ThermoPoint {
    pub fn new(density: f64, energy_density: f64) -> Result<Self> {
        if !(density > 0.0) || !density.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "density must be positive and finite, got {density}"
            )));
        }
        if !energy_density.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "energy density must be finite, got {energy_density}"
            )));
        }
        Ok(ThermoPoint {
            density,
            energy_density,
        })
    }
}

/// Width of the energy shell behind the regularized entropy.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaERule {
    /// Extensive shell: width grows with the box, keeping the shell
    /// entropy a genuinely third curve at every size.
    VolumeFraction(f64),
    /// Fixed width regardless of size.
    Absolute(f64),
}

impl Default for DeltaERule {
    fn default() -> Self {
        DeltaERule::VolumeFraction(0.1)
    }
}

impl DeltaERule {
    pub fn delta_e(&self, volume: f64) -> f64 {
        match *self {
            DeltaERule::VolumeFraction(f) => f * volume,
            DeltaERule::Absolute(d) => d,
        }
    }

    fn validate(&self) -> Result<()> {
        let w = match *self {
            DeltaERule::VolumeFraction(f) => f,
            DeltaERule::Absolute(d) => d,
        };
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "shell width parameter must be positive and finite, got {w}"
            )));
        }
        Ok(())
    }
}

/// Per-size result: the three per-volume entropies and a conservative
/// statistical error inherited from the configurational table.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CurveEntry {
    pub n: usize,
    pub volume: f64,
    pub s_boltzmann: f64,
    pub s_quasi: f64,
    /// Per-volume shell entropy; absent when the shell was numerically
    /// empty at this size.
    pub s_regularized: Option<f64>,
    pub std_err: f64,
}

/// A size that could not be evaluated, with the reason; the rest of the
/// sequence is unaffected.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntryFailure {
    pub n: usize,
    pub message: String,
}

/// Entropy-per-volume curves along a growing-cube sequence.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntropyCurve {
    pub point: ThermoPoint,
    pub potential: PairPotential,
    pub delta_e_rule: DeltaERule,
    pub n_list: Vec<usize>,
    pub entries: Vec<CurveEntry>,
    pub failures: Vec<EntryFailure>,
}

/// Number of equal-width bins used when a sampled table is needed.
/// Callers wanting custom windows can build the table directly with
/// the flat-histogram estimator and evaluate entropies per energy.
const SAMPLED_TABLE_BINS: usize = 64;

/// Default sequence of sizes: perfect cubes, so every box side is an
/// integer multiple of the unit cell at fixed density.
pub const DEFAULT_N_LIST: [usize; 5] = [8, 27, 64, 125, 216];

impl EntropyCurve {
    /// CSV table, one row per successful size. The regularized column
    /// prints nan when the shell was degenerate at that size.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,volume,s_boltzmann,s_quasi,s_regularized,err\n");
        for e in &self.entries {
            let reg = match e.s_regularized {
                Some(v) => crate::dos::fmt_full(v),
                None => "nan".to_string(),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                e.n,
                crate::dos::fmt_full(e.volume),
                crate::dos::fmt_full(e.s_boltzmann),
                crate::dos::fmt_full(e.s_quasi),
                reg,
                crate::dos::fmt_full(e.std_err),
            ));
        }
        out
    }

    /// Provenance record for the run: everything needed to reproduce
    /// the curve, plus the per-size failures.
    pub fn sidecar(
        &self,
        params: &SamplerParams,
        quad: &QuadratureSpec,
        timestamp: Option<String>,
        config_sha256: Option<String>,
    ) -> TdlSidecar {
        TdlSidecar {
            point: self.point,
            potential: self.potential.clone(),
            delta_e_rule: self.delta_e_rule,
            n_list: self.n_list.clone(),
            params: params.clone(),
            quadrature: quad.clone(),
            failures: self.failures.clone(),
            timestamp,
            config_sha256,
        }
    }
}

/// JSON sidecar accompanying the CSV: full run provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TdlSidecar {
    pub point: ThermoPoint,
    pub potential: PairPotential,
    pub delta_e_rule: DeltaERule,
    pub n_list: Vec<usize>,
    pub params: SamplerParams,
    pub quadrature: QuadratureSpec,
    pub failures: Vec<EntryFailure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_sha256: Option<String>,
}

/// Runs the growing-cube study: for each size N the box side is
/// (N / rho)^(1/3), the total energy is eps times the volume, and the
/// three per-volume entropies are evaluated from the model's
/// configurational table. Sizes run concurrently; results are ordered
/// by N and per-size errors are recorded rather than fatal.
pub fn run_tdl_sequence(
    potential: &PairPotential,
    point: &ThermoPoint,
    n_list: &[usize],
    params: &SamplerParams,
    quad: &QuadratureSpec,
    delta_e_rule: &DeltaERule,
) -> Result<EntropyCurve> {
    if n_list.is_empty() {
        return Err(Error::InvalidParameter(
            "the size list must not be empty".into(),
        ));
    }
    if n_list.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter(
            "the size list must increase strictly".into(),
        ));
    }
    params.validate()?;
    quad.validate()?;
    delta_e_rule.validate()?;
    ThermoPoint::new(point.density, point.energy_density)?;

    let outcomes: Vec<std::result::Result<CurveEntry, EntryFailure>> = n_list
        .par_iter()
        .map(|&n| {
            build_entry(potential, point, n, params, quad, delta_e_rule).map_err(|e| {
                EntryFailure {
                    n,
                    message: e.to_string(),
                }
            })
        })
        .collect();

    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(entry) => entries.push(entry),
            Err(failure) => failures.push(failure),
        }
    }
    Ok(EntropyCurve {
        point: *point,
        potential: potential.clone(),
        delta_e_rule: *delta_e_rule,
        n_list: n_list.to_vec(),
        entries,
        failures,
    })
}

fn build_entry(
    potential: &PairPotential,
    point: &ThermoPoint,
    n: usize,
    params: &SamplerParams,
    quad: &QuadratureSpec,
    delta_e_rule: &DeltaERule,
) -> Result<CurveEntry> {
    let side = (n as f64 / point.density).cbrt();
    let spec = SystemSpec::new(n, side, potential.clone())?;
    let volume = spec.volume();
    debug_assert!((n as f64 / volume - point.density).abs() <= 1e-9 * point.density);
    let e_total = point.energy_density * volume;

    let (dos, table_err) = match &spec.potential {
        PairPotential::Ideal => (ConfigDoS::exact_ideal(&spec)?, 0.0),
        PairPotential::HardSphere { .. } => {
            if !(e_total > 0.0) {
                return Err(Error::UndefinedEntropy { energy: e_total });
            }
            let est = estimate_accessible_fraction(&spec, e_total, params)?;
            if est.zero_hits {
                return Err(Error::DegenerateEstimate(format!(
                    "no admissible configuration in {} uniform samples at N = {n}",
                    params.n_samples
                )));
            }
            let err = est.log_std_err();
            let level = LogValue::from_ln(ln_box_measure(&spec) + est.fraction.ln());
            (ConfigDoS::two_level(&spec, level, err)?, err)
        }
        PairPotential::LennardJones { .. } => {
            let ground = ground_energy_bound(&spec);
            if !(e_total > ground) {
                return Err(Error::UndefinedEntropy { energy: e_total });
            }
            let edges = linspace(ground, e_total, SAMPLED_TABLE_BINS + 1);
            let dos = wang_landau_dos(&spec, &edges, params)?;
            let err = dos.std_errs().iter().copied().fold(0.0f64, f64::max);
            (dos, err)
        }
    };

    let s_boltzmann = boltzmann_entropy(&dos, e_total, quad)? / volume;
    let s_quasi = quasi_entropy(&dos, e_total, quad)? / volume;
    let delta_e = delta_e_rule.delta_e(volume);
    let s_regularized = match shell_entropy(&dos, e_total, delta_e, quad) {
        Ok(v) => Some(v / volume),
        Err(Error::DegenerateShell(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(CurveEntry {
        n,
        volume,
        s_boltzmann,
        s_quasi,
        s_regularized,
        std_err: table_err / volume,
    })
}
