//! Microcanonical entropy of small interacting systems.
//!
//! The library computes the entropy of N particles in a hard-walled box
//! directly from phase-space volume, with the momentum integrals done
//! analytically and the configurational part tabulated by exact formulas
//! or Monte Carlo. On top of the volume machinery sit the two entropy
//! definitions (shell density and cumulative volume), a variational
//! upper-bound construction for the infinite-volume limit, and the
//! scaling study that drives finite systems toward that limit.
//!
//! Pipeline order mirrors the module order: a [`system::SystemSpec`]
//! fixes the model, [`dos`] builds the configurational table,
//! [`convolve`] turns it into entropies, [`laplace`] and [`tdl`] handle
//! the large-system limit, and [`oracle`] holds slow reference
//! estimators used only to validate the fast path.

pub mod convolve;
pub mod dos;
pub mod error;
pub mod kinetic;
pub mod laplace;
pub mod log_value;
pub mod math;
pub mod oracle;
pub mod rng;
pub mod system;
pub mod tdl;

pub use convolve::{
    boltzmann_entropy, boltzmann_entropy_paths, entropy_gap, log_omega_h, log_omega_h_prime,
    power_convolution_identity_check, quasi_entropy, quasi_entropy_paths, shell_entropy,
    IdentityReport, QuadratureRule, QuadratureSpec,
};
pub use dos::{
    dos_from_uniform_fractions, estimate_accessible_fraction, ground_energy_bound,
    log_omega_u_ideal, wang_landau_dos, ConfigDoS, DosEstimator, DosSidecar, FractionEstimate,
    SamplerParams,
};
pub use error::{Error, Result};
pub use kinetic::{
    log_omega_k, log_omega_k_double_prime, log_omega_k_prime, s_kin, KineticOrder,
};
pub use laplace::{
    concavity_check, golden_section_max, s_int_extrapolate, s_tot_sup, ConcavityReport,
    ScalingFit, SeriesPoint, SIntModel, SupremumResult,
};
pub use log_value::LogValue;
pub use system::{config_energy, kinetic_energy, PairPotential, PhasePoint, SystemSpec};
pub use tdl::{
    run_tdl_sequence, CurveEntry, DeltaERule, EntropyCurve, EntryFailure, TdlSidecar,
    ThermoPoint, DEFAULT_N_LIST,
};
