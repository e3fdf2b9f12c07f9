//! Built-in self checks behind `microent verify`. Each check exercises
//! one pipeline against an independent reference (closed form, direct
//! oracle, or a second estimator) and reports a one-line verdict. The
//! quick tier is deterministic and finishes in well under a second; the
//! full tier adds the sampled cross-checks.

use microent_core::math::{linspace, ln_factorial};
use microent_core::oracle::{direct_phase_volume, finite_difference_check, mollified_delta_estimate};
use microent_core::{
    boltzmann_entropy_paths, entropy_gap, estimate_accessible_fraction, ground_energy_bound,
    log_omega_h, log_omega_h_prime, log_omega_k, log_omega_k_prime, log_omega_k_double_prime,
    power_convolution_identity_check, quasi_entropy_paths, run_tdl_sequence, s_int_extrapolate,
    s_tot_sup, wang_landau_dos, ConfigDoS, DeltaERule, LogValue, PairPotential, QuadratureSpec,
    SIntModel, SamplerParams, SeriesPoint, SystemSpec, ThermoPoint,
};

pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type CheckResult = Result<String, String>;

fn run_check(name: &'static str, body: impl FnOnce() -> CheckResult) -> CheckOutcome {
    match body() {
        Ok(detail) => CheckOutcome {
            name,
            passed: true,
            detail,
        },
        Err(detail) => CheckOutcome {
            name,
            passed: false,
            detail,
        },
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

pub fn run_suite(quick: bool) -> Vec<CheckOutcome> {
    let mut out = vec![
        run_check("kinetic-derivative-chain", kinetic_derivative_chain),
        run_check("ideal-pipeline-closed-form", ideal_pipeline_closed_form),
        run_check("representation-paths", representation_paths),
        run_check("power-identity-exact-tables", power_identity_exact_tables),
        run_check("entropy-gap-closed-form", entropy_gap_closed_form),
        run_check("variational-supremum", variational_supremum),
        run_check("scaling-extrapolation", scaling_extrapolation),
        run_check("direct-volume-oracle", direct_volume_oracle),
    ];
    if !quick {
        out.push(run_check("uniform-hs-crosscheck", uniform_hs_crosscheck));
        out.push(run_check("wang-landau-crosscheck", wang_landau_crosscheck));
        out.push(run_check("mollified-delta-crosscheck", mollified_delta_crosscheck));
        out.push(run_check("tdl-monotone-convergence", tdl_monotone_convergence));
    }
    out
}

/// FD step in relative units, balancing truncation against roundoff for
/// a power law of exponent `a`: u = (1.5e-15)^(1/3) * a^(-2/3).
fn fd_step(energy: f64, half_dof: f64) -> f64 {
    energy * 1.144_7e-5 * half_dof.powf(-2.0 / 3.0)
}

fn kinetic_derivative_chain() -> CheckResult {
    let mut worst = 0.0f64;
    for &n in &[1usize, 5, 50] {
        let half_dof = 1.5 * n as f64;
        for &e in &[0.5f64, 4.0] {
            let step = fd_step(e, half_dof);
            let first = finite_difference_check(
                |x| Ok(log_omega_k(x, n).ln()),
                |x| Ok(log_omega_k_prime(x, n).ln()),
                e,
                step,
            )
            .map_err(fail)?;
            worst = worst.max(first.rel_residual);
            if n > 1 {
                let second = finite_difference_check(
                    |x| Ok(log_omega_k_prime(x, n).ln()),
                    |x| Ok(log_omega_k_double_prime(x, n).ln()),
                    e,
                    step,
                )
                .map_err(fail)?;
                worst = worst.max(second.rel_residual);
            }
        }
    }
    if worst < 1e-6 {
        Ok(format!("max relative residual {worst:.2e}"))
    } else {
        Err(format!("relative residual {worst:.2e} exceeds 1e-6"))
    }
}

fn ideal_pipeline_closed_form() -> CheckResult {
    let spec = SystemSpec::new(5, 2.0, PairPotential::Ideal).map_err(fail)?;
    let dos = ConfigDoS::exact_ideal(&spec).map_err(fail)?;
    let quad = QuadratureSpec::default();
    let ln_box = 15.0 * 2.0f64.ln() - ln_factorial(5);
    let mut worst = 0.0f64;
    for &e in &[0.4f64, 3.0, 9.0] {
        let quasi = log_omega_h(&dos, e, &quad).map_err(fail)?.ln();
        let boltz = log_omega_h_prime(&dos, e, &quad).map_err(fail)?.ln();
        worst = worst.max((quasi - ln_box - log_omega_k(e, 5).ln()).abs());
        worst = worst.max((boltz - ln_box - log_omega_k_prime(e, 5).ln()).abs());
    }
    if worst < 1e-6 {
        Ok(format!("max log deviation {worst:.2e}"))
    } else {
        Err(format!("log deviation {worst:.2e} exceeds 1e-6"))
    }
}

fn representation_paths() -> CheckResult {
    let quad = QuadratureSpec::default();
    let ideal = SystemSpec::new(4, 1.5, PairPotential::Ideal).map_err(fail)?;
    let hs = SystemSpec::new(3, 5.0, PairPotential::HardSphere { sigma: 0.8 }).map_err(fail)?;
    let ln_free = 9.0 * 5.0f64.ln() - ln_factorial(3) + (0.9f64).ln();
    let cases = [
        (ConfigDoS::exact_ideal(&ideal).map_err(fail)?, 2.5),
        (
            ConfigDoS::two_level(&hs, LogValue::from_ln(ln_free), 0.0).map_err(fail)?,
            1.7,
        ),
    ];
    let mut worst = 0.0f64;
    for (dos, e) in &cases {
        let (ba, bb) = boltzmann_entropy_paths(dos, *e, &quad).map_err(fail)?;
        let (qa, qb) = quasi_entropy_paths(dos, *e, &quad).map_err(fail)?;
        worst = worst.max((ba - bb).abs()).max((qa - qb).abs());
    }
    if worst < 1e-10 {
        Ok(format!("max path split {worst:.2e}"))
    } else {
        Err(format!("path split {worst:.2e} exceeds 1e-10"))
    }
}

fn power_identity_exact_tables() -> CheckResult {
    let quad = QuadratureSpec::default();
    let ideal = SystemSpec::new(3, 1.0, PairPotential::Ideal).map_err(fail)?;
    let dos_i = ConfigDoS::exact_ideal(&ideal).map_err(fail)?;
    let hs = SystemSpec::new(3, 4.0, PairPotential::HardSphere { sigma: 0.8 }).map_err(fail)?;
    let ln_free = 9.0 * 4.0f64.ln() - ln_factorial(3) + (0.85f64).ln();
    let dos_h = ConfigDoS::two_level(&hs, LogValue::from_ln(ln_free), 0.0).map_err(fail)?;
    let mut worst_ideal = 0.0f64;
    let mut worst_hs = 0.0f64;
    for &p in &[2.5f64, 3.0, 4.5] {
        worst_ideal = worst_ideal.max(
            power_convolution_identity_check(&dos_i, 2.0, p, &quad)
                .map_err(fail)?
                .residual,
        );
        worst_hs = worst_hs.max(
            power_convolution_identity_check(&dos_h, 1.5, p, &quad)
                .map_err(fail)?
                .residual,
        );
    }
    if worst_ideal < 1e-10 && worst_hs < 1e-6 {
        Ok(format!(
            "residuals ideal {worst_ideal:.2e}, two-level {worst_hs:.2e}"
        ))
    } else {
        Err(format!(
            "residuals ideal {worst_ideal:.2e} (limit 1e-10), two-level {worst_hs:.2e} (limit 1e-6)"
        ))
    }
}

fn entropy_gap_closed_form() -> CheckResult {
    let quad = QuadratureSpec::default();
    let spec = SystemSpec::new(6, 1.2, PairPotential::Ideal).map_err(fail)?;
    let dos = ConfigDoS::exact_ideal(&spec).map_err(fail)?;
    let mut worst = 0.0f64;
    for &e in &[0.7f64, 2.0, 9.0] {
        let gap = entropy_gap(&dos, e, &quad).map_err(fail)?;
        worst = worst.max((gap - (9.0 / e).ln()).abs());
    }
    if worst < 1e-8 {
        Ok(format!("max deviation from ln(3N/2E) {worst:.2e}"))
    } else {
        Err(format!("gap deviation {worst:.2e} exceeds 1e-8"))
    }
}

fn variational_supremum() -> CheckResult {
    // A free gas has s_int flat above zero, so the objective climbs all
    // the way to the all-kinetic edge and every supremum is a flagged
    // boundary value.
    let free = SIntModel::free_gas(1.0).map_err(fail)?;
    let full = s_tot_sup(&free, 1.0).map_err(fail)?;
    let expected = 2.5 + 1.5 * (4.0 * std::f64::consts::PI / 3.0).ln();
    let dev = (full.value - expected).abs();
    if dev > 1e-9 {
        return Err(format!("free-gas supremum off by {dev:.2e} (limit 1e-9)"));
    }
    if !full.boundary_supremum {
        return Err("free-gas supremum not flagged as boundary".into());
    }
    let edge_energy = 3.0 / (4.0 * std::f64::consts::PI);
    let edge = s_tot_sup(&free, edge_energy).map_err(fail)?;
    let edge_dev = (edge.value - 2.5).abs();
    if edge_dev > 1e-9 {
        return Err(format!("edge supremum off by {edge_dev:.2e} (limit 1e-9)"));
    }
    if !edge.boundary_supremum {
        return Err("edge supremum not flagged as boundary".into());
    }
    // A strongly concave tabulated s_int pulls the maximizer inside.
    let knots: Vec<(f64, f64)> = (1..=40)
        .map(|i| {
            let x = 0.05 * i as f64;
            (x, 3.0 * x.sqrt())
        })
        .collect();
    let curved = SIntModel::tabulated(1.0, 0.0, &knots).map_err(fail)?;
    let interior = s_tot_sup(&curved, 1.0).map_err(fail)?;
    if interior.boundary_supremum {
        return Err("interior supremum wrongly flagged as boundary".into());
    }
    if !(interior.kinetic_share > 0.05 && interior.kinetic_share < 0.95) {
        return Err(format!(
            "interior maximizer at share {} is not interior",
            interior.kinetic_share
        ));
    }
    Ok(format!(
        "free gas off by {dev:.2e} and flagged, curved model interior at share {:.3}",
        interior.kinetic_share
    ))
}

fn scaling_extrapolation() -> CheckResult {
    let series: Vec<SeriesPoint> = [64u64, 128, 256, 512]
        .iter()
        .map(|&n| {
            let nf = n as f64;
            SeriesPoint {
                n,
                volume: nf,
                log_omega_u: nf * nf.ln() - ln_factorial(n),
            }
        })
        .collect();
    let fit = s_int_extrapolate(&series, 1e-3).map_err(fail)?;
    let dev = (fit.a_inf - 1.0).abs();
    if dev < 0.01 {
        Ok(format!("Stirling series limit off by {dev:.2e}"))
    } else {
        Err(format!("extrapolated limit off by {dev:.2e} (limit 0.01)"))
    }
}

fn direct_volume_oracle() -> CheckResult {
    let spec = SystemSpec::new(1, 2.0, PairPotential::Ideal).map_err(fail)?;
    let mut params = SamplerParams::with_seed(41);
    params.n_samples = 100_000;
    let est = direct_phase_volume(&spec, 1.5, &params).map_err(fail)?;
    let truth = 3.0 * 2.0f64.ln() + log_omega_k(1.5, 1).ln();
    let dev = (est.log_value - truth).abs();
    let limit = 3.0 * est.std_err_log + 1e-6;
    if dev <= limit {
        Ok(format!("log deviation {dev:.2e} within {limit:.2e}"))
    } else {
        Err(format!("log deviation {dev:.2e} exceeds {limit:.2e}"))
    }
}

fn uniform_hs_crosscheck() -> CheckResult {
    let spec = SystemSpec::new(2, 6.0, PairPotential::HardSphere { sigma: 1.0 }).map_err(fail)?;
    let mut params = SamplerParams::with_seed(11);
    params.n_samples = 400_000;
    let frac = estimate_accessible_fraction(&spec, 0.5, &params).map_err(fail)?;
    if frac.zero_hits {
        return Err("accessible fraction sampler saw no hits".into());
    }
    let ln_box = 6.0 * 6.0f64.ln() - ln_factorial(2);
    let dos = ConfigDoS::two_level(
        &spec,
        LogValue::from_ln(ln_box + frac.fraction.ln()),
        frac.log_std_err(),
    )
    .map_err(fail)?;
    let quad = QuadratureSpec::default();
    let energy = 1.0;
    let pipeline = log_omega_h(&dos, energy, &quad).map_err(fail)?.ln();
    let oracle = direct_phase_volume(&spec, energy, &params).map_err(fail)?;
    let dev = (pipeline - oracle.log_value).abs();
    let sigma = (frac.log_std_err().powi(2) + oracle.std_err_log.powi(2)).sqrt();
    let limit = 3.0 * sigma + 1e-6;
    if dev <= limit {
        Ok(format!("log deviation {dev:.2e} within 3 sigma {limit:.2e}"))
    } else {
        Err(format!("log deviation {dev:.2e} exceeds 3 sigma {limit:.2e}"))
    }
}

fn wang_landau_crosscheck() -> CheckResult {
    let spec = SystemSpec::new(
        3,
        4.0,
        PairPotential::LennardJones {
            well_depth: 1.0,
            sigma: 1.0,
            cutoff: 1.8,
        },
    )
    .map_err(fail)?;
    // The window must contain the zero-energy lattice start, so the top
    // edge sits above 0; the probe below still lands at negative U.
    let ground = ground_energy_bound(&spec);
    let edges = linspace(ground, 0.5, 13);
    let mut wl_params = SamplerParams::with_seed(7);
    wl_params.n_samples = 200_000;
    wl_params.wl_log_f_final = 1e-3;
    let wl = wang_landau_dos(&spec, &edges, &wl_params).map_err(fail)?;
    // Probe an upper-grid energy where plain uniform sampling still has
    // enough hits to serve as the reference.
    let idx = wl.grid().len() - 3;
    let probe = wl.grid()[idx];
    let wl_log = wl.values()[idx].ln();
    let wl_err = wl.std_errs()[idx];
    let mut uni_params = SamplerParams::with_seed(23);
    uni_params.n_samples = 400_000;
    let frac = estimate_accessible_fraction(&spec, probe, &uni_params).map_err(fail)?;
    if frac.zero_hits {
        return Err(format!("no uniform hits below U = {probe:.3}"));
    }
    let ln_box = 9.0 * 4.0f64.ln() - ln_factorial(3);
    let uni_log = ln_box + frac.fraction.ln();
    let dev = (wl_log - uni_log).abs();
    let sigma = (wl_err.powi(2) + frac.log_std_err().powi(2)).sqrt();
    let limit = 3.0 * sigma + 1e-6;
    if dev <= limit {
        Ok(format!(
            "log deviation {dev:.2e} at U = {probe:.3} within 3 sigma {limit:.2e}"
        ))
    } else {
        Err(format!(
            "log deviation {dev:.2e} at U = {probe:.3} exceeds 3 sigma {limit:.2e}"
        ))
    }
}

fn mollified_delta_crosscheck() -> CheckResult {
    let spec = SystemSpec::new(2, 1.0, PairPotential::Ideal).map_err(fail)?;
    let dos = ConfigDoS::exact_ideal(&spec).map_err(fail)?;
    let quad = QuadratureSpec::default();
    let truth = log_omega_h_prime(&dos, 1.0, &quad).map_err(fail)?.ln();
    let mut params = SamplerParams::with_seed(19);
    params.n_samples = 300_000;
    let est = mollified_delta_estimate(&spec, 1.0, 0.05, &params).map_err(fail)?;
    let dev = (est.log_value - truth).abs();
    let limit = 3.0 * est.std_err_log + 0.02;
    if dev <= limit {
        Ok(format!("log deviation {dev:.2e} within {limit:.2e}"))
    } else {
        Err(format!("log deviation {dev:.2e} exceeds {limit:.2e}"))
    }
}

fn tdl_monotone_convergence() -> CheckResult {
    let point = ThermoPoint::new(1.0, 1.0).map_err(fail)?;
    let curve = run_tdl_sequence(
        &PairPotential::Ideal,
        &point,
        &[8, 27, 64],
        &SamplerParams::with_seed(1),
        &QuadratureSpec::default(),
        &DeltaERule::default(),
    )
    .map_err(fail)?;
    if !curve.failures.is_empty() {
        return Err(format!("{} sizes failed", curve.failures.len()));
    }
    let limit = 2.5 + 1.5 * (4.0 * std::f64::consts::PI / 3.0).ln();
    let devs: Vec<f64> = curve
        .entries
        .iter()
        .map(|e| (e.s_boltzmann - limit).abs())
        .collect();
    if devs.windows(2).all(|w| w[1] < w[0]) {
        Ok(format!(
            "deviation falls {:.4} -> {:.4} -> {:.4}",
            devs[0], devs[1], devs[2]
        ))
    } else {
        Err(format!("deviations not decreasing: {devs:?}"))
    }
}
