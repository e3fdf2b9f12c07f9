//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("position {index} lies outside the box [0, {box_side}]^3: {coords:?}")]
    PositionOutsideBox {
        index: usize,
        box_side: f64,
        coords: [f64; 3],
    },

    #[error("expected {expected} particle positions, got {got}")]
    ParticleCountMismatch { expected: usize, got: usize },

    #[error("{0}")]
    InvalidParameter(String),

    #[error("operation requires the {expected} potential, system uses {got}")]
    WrongPotential {
        expected: &'static str,
        got: &'static str,
    },

    #[error(
        "no admissible configuration found: {n} spheres of diameter {sigma} do not fit \
         a lattice in a box of side {box_side}"
    )]
    PackingInfeasible { n: usize, sigma: f64, box_side: f64 },

    #[error(
        "flat-histogram run did not converge: ln f = {log_f:.3e} after {sweeps} sweeps \
         (achieved flatness {flatness:.3}, target {target:.3})"
    )]
    SamplerNotConverged {
        log_f: f64,
        sweeps: u64,
        flatness: f64,
        target: f64,
    },

    #[error("estimate is degenerate: {0}")]
    DegenerateEstimate(String),

    #[error("energy shell is empty or nonpositive: {0}")]
    DegenerateShell(String),

    #[error("structure function vanishes at E = {energy}; entropy undefined")]
    UndefinedEntropy { energy: f64 },

    #[error("direct phase-volume oracle supports N <= 2, got N = {0}")]
    OracleUnsupportedSize(usize),

    #[error("optimization interval is empty: {0}")]
    EmptyInterval(String),

    #[error("representation paths disagree: {path_a} vs {path_b} (|diff| = {diff:.3e}, allowed {allowed:.3e})")]
    PathMismatch {
        path_a: f64,
        path_b: f64,
        diff: f64,
        allowed: f64,
    },

    #[error("fit failed: {0}")]
    FitFailure(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serialization(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
