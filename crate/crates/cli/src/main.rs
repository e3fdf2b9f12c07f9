//! Command-line front end for the microcanonical entropy toolkit.
//! Subcommands map one-to-one onto the library pipelines: the kinetic
//! ladder, configurational density of states, entropies at one energy,
//! finite-size curves toward the large-system limit, and a self-check
//! suite. Exit codes: 0 success, 1 numerical or check failure, 2
//! malformed configuration.

mod checks;
mod config;

use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use microent_core::math::linspace;
use microent_core::{
    boltzmann_entropy_paths, entropy_gap, estimate_accessible_fraction, ground_energy_bound,
    log_omega_k, log_omega_k_double_prime, log_omega_k_prime, quasi_entropy_paths,
    run_tdl_sequence, s_kin, shell_entropy, wang_landau_dos, ConfigDoS, LogValue, PairPotential,
    QuadratureSpec, SamplerParams, SystemSpec, ThermoPoint, DEFAULT_N_LIST,
};

use config::{env_seed_override, load_config, FileConfig, LoadedConfig};

#[derive(Debug)]
pub enum CliError {
    /// Bad config file or bad flag combination; exits with code 2.
    Config(String),
    /// A pipeline failed; named so the message points at the operation.
    Numerical {
        op: &'static str,
        source: microent_core::Error,
    },
    Io(std::io::Error),
    ChecksFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration: {msg}"),
            CliError::Numerical { op, source } => write!(f, "{op} failed: {source}"),
            CliError::Io(e) => write!(f, "io: {e}"),
            CliError::ChecksFailed { failed, total } => {
                write!(f, "{failed} of {total} checks failed")
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Tags a library error with the operation that raised it.
fn num(op: &'static str) -> impl Fn(microent_core::Error) -> CliError {
    move |source| CliError::Numerical { op, source }
}

#[derive(Parser)]
#[command(
    name = "microent",
    version,
    about = "Microcanonical entropies for ideal, hard-sphere, and Lennard-Jones boxes"
)]
struct Cli {
    /// Worker threads for sampling (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the closed-form kinetic ladder on an energy grid as CSV.
    Kinetic {
        /// Particle count.
        #[arg(long)]
        n: usize,
        /// Lowest grid energy, must be positive.
        #[arg(long)]
        emin: f64,
        /// Highest grid energy.
        #[arg(long)]
        emax: f64,
        /// Number of evenly spaced grid energies.
        #[arg(long)]
        points: usize,
        /// Box volume used for the per-volume entropy column.
        #[arg(long, default_value_t = 1.0)]
        volume: f64,
    },
    /// Estimate the configurational density of states for a model.
    Dos {
        #[arg(long)]
        config: PathBuf,
    },
    /// Report entropies at one total energy, both evaluation paths.
    Entropy {
        #[arg(long)]
        config: PathBuf,
        /// Total energy E.
        #[arg(long)]
        energy: f64,
        /// Shell width for the regularized entropy row.
        #[arg(long = "delta-e")]
        delta_e: Option<f64>,
    },
    /// Compute an entropy curve over a list of system sizes.
    Tdl {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the built-in cross-check suite; nonzero exit on any failure.
    Verify {
        /// Skip the sampled cross-checks and run only the fast tier.
        #[arg(long)]
        quick: bool,
    },
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Kinetic {
            n,
            emin,
            emax,
            points,
            volume,
        } => cmd_kinetic(n, emin, emax, points, volume),
        Command::Dos { config } => cmd_dos(&config),
        Command::Entropy {
            config,
            energy,
            delta_e,
        } => cmd_entropy(&config, energy, delta_e),
        Command::Tdl { config } => cmd_tdl(&config),
        Command::Verify { quick } => cmd_verify(quick),
    }
}

/// Full-precision float formatting shared by every CSV the tool emits.
fn fmt_full(x: f64) -> String {
    format!("{x:.16e}")
}

fn cmd_kinetic(n: usize, emin: f64, emax: f64, points: usize, volume: f64) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::config("--n must be at least 1"));
    }
    if !(emin > 0.0) || !(emax >= emin) || !emin.is_finite() || !emax.is_finite() {
        return Err(CliError::config(
            "energy grid needs 0 < emin <= emax, both finite",
        ));
    }
    if points == 0 {
        return Err(CliError::config("--points must be at least 1"));
    }
    if !(volume > 0.0) || !volume.is_finite() {
        return Err(CliError::config("--volume must be positive and finite"));
    }
    let rho = n as f64 / volume;
    let mut out = String::from("E,log_omega_k,log_omega_k_prime,log_omega_k_double_prime,s_kin\n");
    for e in linspace(emin, emax, points) {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_full(e),
            fmt_full(log_omega_k(e, n).ln()),
            fmt_full(log_omega_k_prime(e, n).ln()),
            fmt_full(log_omega_k_double_prime(e, n).ln()),
            fmt_full(s_kin(rho, e / volume)),
        ));
    }
    print!("{out}");
    Ok(())
}

/// Builds the model spec from the `[model]` section.
fn model_spec(file: &FileConfig) -> Result<SystemSpec, CliError> {
    let n = file
        .model
        .n_particles
        .ok_or_else(|| CliError::config("model.n_particles is required for this command"))?;
    let side = file
        .model
        .box_side
        .ok_or_else(|| CliError::config("model.box_side is required for this command"))?;
    SystemSpec::new(n, side, file.model.potential.clone()).map_err(num("model validation"))
}

fn sampler_params(file: &FileConfig) -> Result<SamplerParams, CliError> {
    let seed = env_seed_override()?;
    Ok(match &file.sampler {
        Some(section) => section.to_params(seed),
        None => config::SamplerSection::default().to_params(seed),
    })
}

fn quadrature(file: &FileConfig) -> Result<QuadratureSpec, CliError> {
    match &file.quadrature {
        Some(section) => section.to_spec(),
        None => Ok(QuadratureSpec::default()),
    }
}

/// Resolves the estimator name, defaulting to the cheapest sound choice
/// for the potential, and builds the configurational table.
fn build_dos(
    file: &FileConfig,
    spec: &SystemSpec,
    params: &SamplerParams,
) -> Result<(ConfigDoS, bool), CliError> {
    let grid = file.grid.as_ref();
    let estimator = grid
        .and_then(|g| g.estimator.as_deref())
        .map(str::to_owned)
        .unwrap_or_else(|| {
            match spec.potential {
                PairPotential::Ideal => "exact_ideal",
                PairPotential::HardSphere { .. } => "two_level",
                PairPotential::LennardJones { .. } => "wang_landau",
            }
            .to_owned()
        });
    let dos = match estimator.as_str() {
        "exact_ideal" => (
            ConfigDoS::exact_ideal(spec).map_err(num("exact ideal table"))?,
            false,
        ),
        "two_level" => {
            // Any positive threshold sees the same accessible fraction
            // for a hard-core model; take the largest grid energy so a
            // soft potential still gets a sensible single-level anchor.
            let threshold = match grid {
                Some(g) => g
                    .energy_grid()?
                    .into_iter()
                    .fold(f64::NEG_INFINITY, f64::max),
                None => 1.0,
            };
            let frac = estimate_accessible_fraction(spec, threshold, params)
                .map_err(num("accessible fraction sampling"))?;
            if frac.zero_hits {
                return Err(CliError::Numerical {
                    op: "accessible fraction sampling",
                    source: microent_core::Error::DegenerateEstimate(format!(
                        "no hits below U = {threshold}; raise sampler.n_samples or the grid"
                    )),
                });
            }
            let ln_total = ln_box_measure_of(spec) + frac.fraction.ln();
            (
                ConfigDoS::two_level(spec, LogValue::from_ln(ln_total), frac.log_std_err())
                    .map_err(num("two-level table"))?,
                true,
            )
        }
        "uniform" => {
            let g = grid.ok_or_else(|| {
                CliError::config("estimator \"uniform\" needs a [grid] section")
            })?;
            (
                microent_core::dos_from_uniform_fractions(spec, &g.energy_grid()?, params)
                    .map_err(num("uniform fraction sampling"))?,
                true,
            )
        }
        "wang_landau" => {
            let edges = match grid {
                Some(g) => g.energy_grid()?,
                None => linspace(ground_energy_bound(spec), 0.0, 33),
            };
            (
                wang_landau_dos(spec, &edges, params).map_err(num("wang-landau sampling"))?,
                true,
            )
        }
        other => {
            return Err(CliError::config(format!(
                "grid.estimator must be one of exact_ideal, two_level, uniform, wang_landau; got \"{other}\""
            )))
        }
    };
    Ok(dos)
}

/// ln of the configuration-space measure for the distinguishable box,
/// V^N / N!.
fn ln_box_measure_of(spec: &SystemSpec) -> f64 {
    3.0 * spec.n_particles as f64 * spec.box_side.ln()
        - microent_core::math::ln_factorial(spec.n_particles as u64)
}

fn output_target(file: &FileConfig) -> (PathBuf, String) {
    let dir = file
        .output
        .as_ref()
        .and_then(|o| o.directory.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let prefix = file
        .output
        .as_ref()
        .and_then(|o| o.prefix.clone())
        .unwrap_or_else(|| "microent".to_owned());
    (dir, prefix)
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

fn cmd_dos(config_path: &Path) -> Result<(), CliError> {
    let LoadedConfig { file, sha256 } = load_config(config_path)?;
    let spec = model_spec(&file)?;
    let params = sampler_params(&file)?;
    let (dos, sampled) = build_dos(&file, &spec, &params)?;
    let (dir, prefix) = output_target(&file);
    let csv_path = dir.join(format!("{prefix}_dos.csv"));
    write_text(&csv_path, &dos.to_csv())?;
    let sidecar = dos.sidecar(
        sampled.then(|| params.clone()),
        Some(chrono::Utc::now().to_rfc3339()),
    );
    let mut json = serde_json::to_value(&sidecar)
        .map_err(|e| CliError::config(format!("sidecar serialization: {e}")))?;
    json["config_sha256"] = serde_json::Value::String(sha256);
    let json_path = dir.join(format!("{prefix}_dos.json"));
    write_text(&json_path, &format!("{:#}\n", json))?;
    println!("wrote {}", csv_path.display());
    println!("wrote {}", json_path.display());
    Ok(())
}

fn cmd_entropy(config_path: &Path, energy: f64, delta_e: Option<f64>) -> Result<(), CliError> {
    if !energy.is_finite() {
        return Err(CliError::config("--energy must be finite"));
    }
    let LoadedConfig { file, .. } = load_config(config_path)?;
    let spec = model_spec(&file)?;
    let params = sampler_params(&file)?;
    let quad = quadrature(&file)?;
    let (dos, _) = build_dos(&file, &spec, &params)?;
    let (b_direct, b_alt) =
        boltzmann_entropy_paths(&dos, energy, &quad).map_err(num("entropy evaluation"))?;
    let (q_direct, q_alt) =
        quasi_entropy_paths(&dos, energy, &quad).map_err(num("quasi-entropy evaluation"))?;
    let gap = entropy_gap(&dos, energy, &quad).map_err(num("entropy gap evaluation"))?;
    let mut out = String::from("quantity,value\n");
    out.push_str(&format!("s_boltzmann,{}\n", fmt_full(b_direct)));
    out.push_str(&format!("s_boltzmann_alt,{}\n", fmt_full(b_alt)));
    out.push_str(&format!("s_quasi,{}\n", fmt_full(q_direct)));
    out.push_str(&format!("s_quasi_alt,{}\n", fmt_full(q_alt)));
    out.push_str(&format!("entropy_gap,{}\n", fmt_full(gap)));
    if let Some(width) = delta_e {
        if !(width > 0.0) || !width.is_finite() {
            return Err(CliError::config("--delta-e must be positive and finite"));
        }
        let shell =
            shell_entropy(&dos, energy, width, &quad).map_err(num("shell entropy evaluation"))?;
        out.push_str(&format!("s_regularized,{}\n", fmt_full(shell)));
    }
    print!("{out}");
    Ok(())
}

fn cmd_tdl(config_path: &Path) -> Result<(), CliError> {
    let LoadedConfig { file, sha256 } = load_config(config_path)?;
    let tdl = file
        .tdl
        .as_ref()
        .ok_or_else(|| CliError::config("the tdl command needs a [tdl] section"))?;
    let point =
        ThermoPoint::new(tdl.density, tdl.energy_density).map_err(num("thermodynamic point"))?;
    let n_list: Vec<usize> = tdl.n_list.clone().unwrap_or_else(|| DEFAULT_N_LIST.to_vec());
    let rule = tdl.delta_e_rule()?;
    let params = sampler_params(&file)?;
    let quad = quadrature(&file)?;
    let curve = run_tdl_sequence(
        &file.model.potential,
        &point,
        &n_list,
        &params,
        &quad,
        &rule,
    )
    .map_err(num("entropy curve"))?;
    let (dir, prefix) = output_target(&file);
    let csv_path = dir.join(format!("{prefix}_tdl.csv"));
    write_text(&csv_path, &curve.to_csv())?;
    let sidecar = curve.sidecar(
        &params,
        &quad,
        Some(chrono::Utc::now().to_rfc3339()),
        Some(sha256),
    );
    let json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| CliError::config(format!("sidecar serialization: {e}")))?;
    let json_path = dir.join(format!("{prefix}_tdl.json"));
    write_text(&json_path, &format!("{json}\n"))?;
    println!("wrote {}", csv_path.display());
    println!("wrote {}", json_path.display());
    for failure in &curve.failures {
        eprintln!("warning: N = {}: {}", failure.n, failure.message);
    }
    Ok(())
}

fn cmd_verify(quick: bool) -> Result<(), CliError> {
    let outcomes = checks::run_suite(quick);
    let width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
    let mut failed = 0usize;
    for o in &outcomes {
        let verdict = if o.passed {
            "PASS"
        } else {
            failed += 1;
            "FAIL"
        };
        println!("{verdict}  {:width$}  {}", o.name, o.detail);
    }
    if failed == 0 {
        println!("all {} checks passed", outcomes.len());
        Ok(())
    } else {
        Err(CliError::ChecksFailed {
            failed,
            total: outcomes.len(),
        })
    }
}
