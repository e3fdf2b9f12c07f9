//! Run configuration: a TOML file with flat sections whose keys mirror
//! the library parameter structs, so a config can be reconstructed from
//! any JSON sidecar and vice versa.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use microent_core::math::{linspace, logspace};
use microent_core::{DeltaERule, PairPotential, QuadratureRule, QuadratureSpec, SamplerParams};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: ModelSection,
    pub grid: Option<GridSection>,
    pub sampler: Option<SamplerSection>,
    pub quadrature: Option<QuadratureSection>,
    pub tdl: Option<TdlSection>,
    pub output: Option<OutputSection>,
}

/// Model keys sit flat in the section: `potential = "hard_sphere"`
/// selects the variant and the variant's own fields follow alongside.
#[derive(Debug, Deserialize)]
pub struct ModelSection {
    pub n_particles: Option<usize>,
    pub box_side: Option<f64>,
    #[serde(flatten)]
    pub potential: PairPotential,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub e_min: Option<f64>,
    pub e_max: Option<f64>,
    pub points: Option<usize>,
    #[serde(default)]
    pub log_spaced: bool,
    /// Explicit grid; overrides the range keys when present.
    pub energies: Option<Vec<f64>>,
    /// One of exact_ideal, uniform, two_level, wang_landau; defaults to
    /// the cheapest sound estimator for the model.
    pub estimator: Option<String>,
}

impl GridSection {
    pub fn energy_grid(&self) -> Result<Vec<f64>, CliError> {
        if let Some(list) = &self.energies {
            if list.is_empty() {
                return Err(CliError::config("grid.energies must not be empty"));
            }
            return Ok(list.clone());
        }
        match (self.e_min, self.e_max, self.points) {
            (Some(lo), Some(hi), Some(k)) if k >= 1 && lo <= hi => Ok(if self.log_spaced {
                logspace(lo, hi, k)
            } else {
                linspace(lo, hi, k)
            }),
            _ => Err(CliError::config(
                "grid needs either `energies` or the triple `e_min <= e_max`, `points >= 1`",
            )),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSection {
    pub master_seed: Option<u64>,
    pub n_samples: Option<u64>,
    pub n_streams: Option<u32>,
    pub wl_flatness: Option<f64>,
    pub wl_log_f_final: Option<f64>,
    pub wl_max_sweeps: Option<u64>,
}

impl SamplerSection {
    /// Materialize sampler parameters: file keys override the defaults,
    /// and the environment seed (when set) overrides the file.
    pub fn to_params(&self, env_seed: Option<u64>) -> SamplerParams {
        let mut p = SamplerParams::with_seed(self.master_seed.unwrap_or(0x6d69_6372));
        if let Some(v) = self.n_samples {
            p.n_samples = v;
        }
        if let Some(v) = self.n_streams {
            p.n_streams = v;
        }
        if let Some(v) = self.wl_flatness {
            p.wl_flatness = v;
        }
        if let Some(v) = self.wl_log_f_final {
            p.wl_log_f_final = v;
        }
        if let Some(v) = self.wl_max_sweeps {
            p.wl_max_sweeps = v;
        }
        if let Some(seed) = env_seed {
            p.master_seed = seed;
        }
        p
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub rule: Option<String>,
    pub refine_factor: Option<usize>,
    pub min_panels: Option<usize>,
    pub tolerance: Option<f64>,
}

impl QuadratureSection {
    pub fn to_spec(&self) -> Result<QuadratureSpec, CliError> {
        let mut q = QuadratureSpec::default();
        if let Some(rule) = &self.rule {
            q.rule = match rule.as_str() {
                "simpson" => QuadratureRule::Simpson,
                "trapezoid" => QuadratureRule::Trapezoid,
                other => {
                    return Err(CliError::config(format!(
                        "quadrature.rule must be \"simpson\" or \"trapezoid\", got \"{other}\""
                    )))
                }
            };
        }
        if let Some(v) = self.refine_factor {
            q.refine_factor = v;
        }
        if let Some(v) = self.min_panels {
            q.min_panels = v;
        }
        if let Some(v) = self.tolerance {
            q.tolerance = v;
        }
        Ok(q)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TdlSection {
    pub density: f64,
    pub energy_density: f64,
    pub n_list: Option<Vec<usize>>,
    pub delta_e_fraction: Option<f64>,
    pub delta_e_absolute: Option<f64>,
}

impl TdlSection {
    pub fn delta_e_rule(&self) -> Result<DeltaERule, CliError> {
        match (self.delta_e_fraction, self.delta_e_absolute) {
            (Some(_), Some(_)) => Err(CliError::config(
                "tdl.delta_e_fraction and tdl.delta_e_absolute are mutually exclusive",
            )),
            (Some(f), None) => Ok(DeltaERule::VolumeFraction(f)),
            (None, Some(d)) => Ok(DeltaERule::Absolute(d)),
            (None, None) => Ok(DeltaERule::default()),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: Option<PathBuf>,
    pub prefix: Option<String>,
}

/// A parsed config plus the content hash identifying the exact file.
pub struct LoadedConfig {
    pub file: FileConfig,
    pub sha256: String,
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::config(format!("cannot read config {}: {e}", path.display()))
    })?;
    let file: FileConfig = toml::from_str(&text).map_err(|e| {
        // The TOML error message carries line/column and key context.
        CliError::config(format!("{}: {e}", path.display()))
    })?;
    let sha256 = format!("{:x}", Sha256::digest(text.as_bytes()));
    Ok(LoadedConfig { file, sha256 })
}

/// Reads the master-seed override from the environment. An unset
/// variable is simply absent; a malformed one is a configuration error.
pub fn env_seed_override() -> Result<Option<u64>, CliError> {
    match std::env::var("MICROENT_SEED") {
        Ok(raw) => raw.trim().parse::<u64>().map(Some).map_err(|_| {
            CliError::config(format!(
                "MICROENT_SEED must be an unsigned 64-bit integer, got \"{raw}\""
            ))
        }),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::config(format!("MICROENT_SEED unreadable: {e}"))),
    }
}
