//! Verification suites: frozen-scenario bundles of estimate checks, plus
//! the registry that names every check reachable from the verify command.
//!
//! ```no_run
//! use bqlab_cli::suites;
//! let result = suites::run_suite("harmonic", 7)?;
//! assert!(result.passed);
//! # Ok::<(), bqlab_core::Error>(())
//! ```

use std::time::Instant;

use num_complex::Complex64;

use bqlab_core::boussinesq::{
    boussinesq_solve, energy_report, friedrichs_solve, picard_solve, smallness_monitor,
    taylor_green, tilde_h2_norm, uniqueness_probe, PhysicsParams,
};
use bqlab_core::evolution::{
    heat_band_decay_check, lorentz_duhamel_sweep, losing_estimate_check, shear_velocity,
    stokes_regularity_check, stokes_regularity_sweep, stokes_solve, transport_besov_growth_check,
    transport_diffusion_solve, transport_lp_conservation_check, transport_solve, DuhamelVariant,
    TransportMethod,
};
use bqlab_core::littlewood_paley::{
    bernstein_check, bernstein_derivative_check, besov_norm, besov_sobolev_check, block_lp_norm,
    lorentz_embedding_check, minkowski_order_check, partition_unity_check, presortho_defect,
    reconstruction_residual, weak_lp_domination_check, BesovSpec, Convention, DyadicPartition,
};
use bqlab_core::ops::{friedrichs_truncate, leray_project, velocity_gradient};
use bqlab_core::paraproduct::{
    localization_check, product_law_check, reconstruction_check, PRODUCT_LAW_IDS,
};
use bqlab_core::report::{loglog_slope, stable_within, EstimateReport, SuiteResult};
use bqlab_core::trajectory::TrajectoryRecord;
use bqlab_core::{randfield, Error, Result, SpectralField, TorusGrid};

/// The suites the verify command accepts.
pub const SUITE_NAMES: [&str; 5] =
    ["harmonic", "semigroup", "transport", "boussinesq", "smalldata3d"];

const HARMONIC_IDS: [&str; 17] = [
    "dyadic_partition_unity",
    "block_reconstruction",
    "block_orthogonality",
    "block_norm_comparison",
    "block_gradient_equivalence",
    "besov_sobolev_factor",
    "weak_norm_block_embedding",
    "weak_lp_domination",
    "spacetime_norm_order",
    "interaction_summand_localization",
    "interaction_split_reconstruction",
    "law_para_linf_into_target",
    "law_para_negative_shift",
    "law_remainder_positive_shift",
    "law_remainder_zero_sum",
    "law_product_critical_pair",
    "law_product_sobolev_pair",
];

const SEMIGROUP_IDS: [&str; 4] = [
    "band_heat_decay",
    "stokes_single_mode",
    "stokes_smoothing_envelope",
    "stokes_smoothing_envelope_sweep",
];

const TRANSPORT_IDS: [&str; 5] = [
    "transport_lp_conservation",
    "transport_linf_overshoot",
    "transport_band_growth",
    "losing_weighted_bound",
    "losing_constant_dt_stability",
];

const BOUSSINESQ_IDS: [&str; 8] = [
    "taylor_green_exactness",
    "boussinesq_energy",
    "theorem_one_envelope",
    "energy_residual_order",
    "friedrichs_invariance",
    "picard_contraction",
    "uniqueness_linear_response_sweep",
    "tilde_h2_grid_stability",
];

const SMALLDATA3D_IDS: [&str; 4] = [
    "smallness_envelope",
    "smallness_scaling_stability",
    "duhamel_weak_lp_force_sweep",
    "duhamel_weak_lp_divergence_sweep",
];

/// Check ids a suite emits, in emission order.
pub fn registry(suite: &str) -> Option<&'static [&'static str]> {
    match suite {
        "harmonic" => Some(&HARMONIC_IDS),
        "semigroup" => Some(&SEMIGROUP_IDS),
        "transport" => Some(&TRANSPORT_IDS),
        "boussinesq" => Some(&BOUSSINESQ_IDS),
        "smalldata3d" => Some(&SMALLDATA3D_IDS),
        _ => None,
    }
}

/// Fault injections for plumbing tests; the default injects nothing.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TestHooks {
    /// Drop the first ring from the partition-of-unity sum so the harmonic
    /// suite must fail with a partition residual report.
    pub corrupt_partition: bool,
}

/// Runs one named suite with the given base seed.
pub fn run_suite(name: &str, seed: u64) -> Result<SuiteResult> {
    run_suite_with(name, seed, &TestHooks::default())
}

#[doc(hidden)]
pub fn run_suite_with(name: &str, seed: u64, hooks: &TestHooks) -> Result<SuiteResult> {
    match name {
        "harmonic" => run_harmonic(seed, hooks),
        "semigroup" => run_semigroup(seed),
        "transport" => run_transport(seed, 0.0),
        "boussinesq" => run_boussinesq(seed, 0.0),
        "smalldata3d" => run_smalldata3d(seed),
        _ => Err(Error::Config(format!(
            "unknown suite {name:?}; expected one of {SUITE_NAMES:?}"
        ))),
    }
}

fn finish(mut suite: SuiteResult, t0: Instant) -> SuiteResult {
    suite.runtime_seconds = t0.elapsed().as_secs_f64();
    suite
}

fn run_harmonic(seed: u64, hooks: &TestHooks) -> Result<SuiteResult> {
    let t0 = Instant::now();
    let mut suite = SuiteResult::new("harmonic");
    let grid = TorusGrid::new(2, 256)?;
    if hooks.corrupt_partition {
        suite.push(corrupted_partition_report(grid));
    } else {
        suite.push(partition_unity_check(grid));
    }
    suite.push(reconstruction_report(grid, seed)?);
    suite.push(orthogonality_report(grid, seed)?);
    suite.push(bernstein_check(2.0, f64::INFINITY, 4, seed)?);
    suite.push(bernstein_derivative_check(4, seed ^ 0x11)?);
    suite.push(besov_sobolev_check(6, seed ^ 0x12)?);
    suite.push(lorentz_embedding_check(1.5, 3.0, 4, seed ^ 0x13)?);
    suite.push(weak_lp_domination_check(3.0, 4, seed ^ 0x14)?);
    suite.push(minkowski_order_check(seed ^ 0x15)?);
    suite.push(localization_check(seed ^ 0x16)?);
    suite.push(reconstruction_check(256, 3, seed ^ 0x17)?);
    for law in PRODUCT_LAW_IDS {
        suite.push(product_law_check(law, 3, seed ^ 0x18)?);
    }
    Ok(finish(suite, t0))
}

/// Partition residual with the first ring dropped; used by the fault
/// injection hook to prove a broken partition is detected.
fn corrupted_partition_report(grid: TorusGrid) -> EstimateReport {
    let part = DyadicPartition::new(grid);
    let mut worst = 0.0f64;
    for flat in 0..grid.len() {
        let knorm = grid.freq_sq(flat).sqrt();
        let mut sum = 0.0;
        for q in part.bands() {
            if q != 0 {
                sum += part.band_weight(q, knorm, Convention::Nonhomogeneous);
            }
        }
        worst = worst.max((sum - 1.0).abs());
    }
    let mut rep = EstimateReport::new("dyadic_partition_unity");
    rep.lhs = worst;
    rep.rhs = 1e-12;
    rep.fitted_c = worst;
    rep.samples = grid.len();
    rep.pass = worst <= 1e-12;
    rep.note("fault injection: first ring dropped from the unity sum");
    rep
}

/// Relative residual of rebuilding random fields from their rings, both
/// conventions, must sit at rounding level.
fn reconstruction_report(grid: TorusGrid, seed: u64) -> Result<EstimateReport> {
    let part = DyadicPartition::new(grid);
    let kmax = (grid.n() / 3) as u32;
    let fields = [
        randfield::scalar(grid, 1, kmax, 0.8, 1.0, seed ^ 0x31),
        randfield::scalar(grid, kmax / 2, kmax, 0.2, 1.0, seed ^ 0x32),
        randfield::velocity(grid, 1, kmax / 4, 1.5, 1.0, seed ^ 0x33),
    ];
    let mut worst = 0.0f64;
    for f in &fields {
        for conv in [Convention::Nonhomogeneous, Convention::Homogeneous] {
            worst = worst.max(reconstruction_residual(&part, f, conv));
        }
    }
    let mut rep = EstimateReport::new("block_reconstruction");
    rep.lhs = worst;
    rep.rhs = 1e-12;
    rep.fitted_c = worst;
    rep.samples = fields.len() * 2;
    rep.pass = worst <= 1e-12;
    rep.note(format!("worst relative residual {worst:.3e} over both conventions"));
    Ok(rep)
}

/// Double blocks with ring separation two or more must vanish exactly.
fn orthogonality_report(grid: TorusGrid, seed: u64) -> Result<EstimateReport> {
    let part = DyadicPartition::new(grid);
    let kmax = (grid.n() / 3) as u32;
    let fields = [
        randfield::scalar(grid, 1, kmax, 0.6, 1.0, seed ^ 0x41),
        randfield::scalar(grid, 2, 16, 1.0, 1.0, seed ^ 0x42),
    ];
    let mut worst = 0.0f64;
    for f in &fields {
        for conv in [Convention::Nonhomogeneous, Convention::Homogeneous] {
            worst = worst.max(presortho_defect(&part, f, conv));
        }
    }
    let mut rep = EstimateReport::new("block_orthogonality");
    rep.lhs = worst;
    rep.rhs = 0.0;
    rep.fitted_c = worst;
    rep.samples = fields.len() * 2;
    rep.pass = worst == 0.0;
    rep.note("separated ring supports are disjoint, so the defect is exactly zero");
    Ok(rep)
}

fn run_semigroup(seed: u64) -> Result<SuiteResult> {
    let t0 = Instant::now();
    let mut suite = SuiteResult::new("semigroup");
    suite.push(heat_band_decay_check(&[0, 1, 2, 3, 4], &[0.01, 0.05, 0.2], 2.0, seed)?);
    suite.push(stokes_single_mode_report()?);
    let grid = TorusGrid::new(2, 64)?;
    let u0 = randfield::velocity(grid, 1, 16, 1.5, 1.0, seed ^ 0x21);
    let f = randfield::velocity(grid, 1, 12, 2.0, 0.5, seed ^ 0x22);
    suite.push(stokes_regularity_check(&u0, &f, 1.0, 1.0, &[1.0, 2.0, f64::INFINITY])?);
    suite.push(stokes_regularity_sweep(seed ^ 0x23)?);
    Ok(finish(suite, t0))
}

/// Forced flow from rest under a steady single-mode force against the
/// closed-form saturation curve; the step treats steady forces exactly.
fn stokes_single_mode_report() -> Result<EstimateReport> {
    let grid = TorusGrid::new(2, 64)?;
    let nu = 0.1;
    let ksq = 2.0;
    let lam = nu * ksq;
    let mut g = SpectralField::zeros(grid, 2);
    g.set_mode_pair(0, [1, 1, 0], Complex64::new(0.4, 0.0));
    let sol = stokes_solve(&SpectralField::zeros(grid, 2), |_| Ok(g.clone()), nu, 1.0, 1e-2, 10)?;
    let mut pg = g.clone();
    leray_project(&mut pg);
    let scale = pg.l2_norm() / lam;
    let mut worst = 0.0f64;
    for (t, u) in sol.velocity.iter() {
        let mut exact = pg.clone();
        exact.scale((1.0 - (-lam * t).exp()) / lam);
        exact.add_scaled(u, -1.0);
        worst = worst.max(exact.l2_norm() / scale);
    }
    let mut rep = EstimateReport::new("stokes_single_mode");
    rep.lhs = worst;
    rep.rhs = 1e-8;
    rep.fitted_c = worst;
    rep.samples = sol.velocity.len();
    rep.pass = worst <= 1e-8;
    rep.note(format!("saturation-curve error {worst:.3e} relative to the terminal norm"));
    Ok(rep)
}

/// Transport suite; `kappa > 0` swaps the conservation check for a decay
/// check, measures the bounded-ratio slope on the diffusive run, and feeds
/// the diffusive gain through the weighted-bound check.
pub fn run_transport(seed: u64, kappa: f64) -> Result<SuiteResult> {
    let t0 = Instant::now();
    let mut suite = SuiteResult::new("transport");
    let grid = TorusGrid::new(2, 128)?;
    let theta_mix = randfield::scalar(grid, 1, 6, 1.2, 1.0, seed ^ 0x51);
    let shear = shear_velocity(grid, 1.0);

    if kappa == 0.0 {
        let traj =
            transport_solve(&theta_mix, &shear, None, 1.0, 1e-3, TransportMethod::SpectralRk4, 50)?;
        suite.push(transport_lp_conservation_check(&traj, &[2.0], 1e-6)?);
    } else {
        let traj = transport_diffusion_solve(
            &theta_mix,
            &shear,
            None,
            kappa,
            1.0,
            1e-3,
            TransportMethod::SpectralRk4,
            50,
        )?;
        suite.push(l2_decay_report(&traj)?);
    }

    let sl = transport_diffusion_solve(
        &theta_mix,
        &shear,
        None,
        kappa,
        1.0,
        1e-3,
        TransportMethod::SemiLagrangian,
        50,
    )?;
    suite.push(linf_overshoot_report(&sl)?);

    if kappa == 0.0 {
        let theta_low = randfield::scalar(grid, 1, 2, 0.5, 1.0, seed ^ 0x52);
        let urec = steady_record(&shear, &[0.0, 20.0])?;
        let spec = BesovSpec::new(0.0, 2.0, 1.0, Convention::Nonhomogeneous)?;
        suite.push(transport_besov_growth_check(&theta_low, &urec, &spec)?);
    } else {
        let theta_low = randfield::scalar(grid, 1, 2, 0.5, 1.0, seed ^ 0x52);
        suite.push(diffusive_ratio_report(&theta_low, &shear, kappa)?);
    }

    let (rep_coarse, c_coarse, sup_coarse) = losing_run(seed, kappa, 4e-3)?;
    let (_, c_fine, sup_fine) = losing_run(seed, kappa, 2e-3)?;
    suite.push(rep_coarse);
    // The fitted constant can sit exactly at its floor when the weighted
    // sup is attained by the data, so the raw sup is compared as well.
    let mut stab = EstimateReport::new("losing_constant_dt_stability");
    stab.lhs = sup_coarse;
    stab.rhs = sup_fine;
    stab.fitted_c = if c_fine > 0.0 { c_coarse / c_fine } else { f64::INFINITY };
    stab.samples = 2;
    stab.pass =
        stable_within(&[c_coarse, c_fine], 0.25) && stable_within(&[sup_coarse, sup_fine], 0.25);
    stab.note(format!(
        "constants {c_coarse:.6e} at dt = 4e-3, {c_fine:.6e} at dt = 2e-3; \
         weighted sups {sup_coarse:.6e} and {sup_fine:.6e}"
    ));
    suite.push(stab);
    Ok(finish(suite, t0))
}

fn steady_record(u: &SpectralField, times: &[f64]) -> Result<TrajectoryRecord> {
    let mut rec = TrajectoryRecord::new(u.grid());
    for &t in times {
        rec.push(t, u.clone())?;
    }
    Ok(rec)
}

/// L2 of the scalar must never move up along a diffusive transport run.
fn l2_decay_report(traj: &TrajectoryRecord) -> Result<EstimateReport> {
    let base = traj.field(0).l2_norm();
    let mut worst_up = 0.0f64;
    let mut prev = base;
    for (_, f) in traj.iter().skip(1) {
        let cur = f.l2_norm();
        worst_up = worst_up.max((cur - prev) / base);
        prev = cur;
    }
    let mut rep = EstimateReport::new("transport_l2_decay");
    rep.lhs = worst_up.max(0.0);
    rep.rhs = 1e-12;
    rep.fitted_c = prev / base;
    rep.samples = traj.len();
    rep.pass = worst_up <= 1e-12;
    rep.note(format!("norm fell to {:.6} of its initial value", prev / base));
    Ok(rep)
}

/// Semi-Lagrangian interpolation may not push the sup norm above its
/// initial value beyond the stated overshoot allowance.
fn linf_overshoot_report(traj: &TrajectoryRecord) -> Result<EstimateReport> {
    let base = traj.field(0).lp_norm(f64::INFINITY);
    let mut worst = 0.0f64;
    for (_, f) in traj.iter().skip(1) {
        worst = worst.max((f.lp_norm(f64::INFINITY) - base) / base);
    }
    let mut rep = EstimateReport::new("transport_linf_overshoot");
    rep.lhs = worst.max(0.0);
    rep.rhs = 1e-3;
    rep.fitted_c = worst.max(0.0);
    rep.samples = traj.len();
    rep.pass = rep.lhs <= 1e-3;
    rep.note(format!("largest relative sup-norm excess {:.3e}", rep.lhs));
    Ok(rep)
}

/// Diffusive analogue of the band-growth contrast: the flat-norm ratio
/// stays bounded (slope gate unchanged); the first-order growth gate is
/// dropped because diffusion caps gradient growth, and the slope is only
/// reported.
fn diffusive_ratio_report(
    theta0: &SpectralField,
    u: &SpectralField,
    kappa: f64,
) -> Result<EstimateReport> {
    let grid = theta0.grid();
    let part = DyadicPartition::new(grid);
    let conv = Convention::Nonhomogeneous;
    let spec0 = BesovSpec::new(0.0, 2.0, 1.0, conv)?;
    let spec1 = BesovSpec::new(1.0, 2.0, 1.0, conv)?;
    let rate: f64 = {
        let grad = velocity_gradient(u);
        part.bands().map(|q| block_lp_norm(&part, &grad, q, f64::INFINITY, conv)).sum()
    };
    let traj = transport_diffusion_solve(
        theta0,
        u,
        None,
        kappa,
        20.0,
        2e-2,
        TransportMethod::SpectralRk4,
        50,
    )?;
    let mut ratio_pts = Vec::new();
    let mut growth_pts = Vec::new();
    for (t, f) in traj.iter() {
        if t >= 5.0 {
            ratio_pts.push((t, besov_norm(&part, f, &spec0)? / (1.0 + rate * t)));
            growth_pts.push((t, besov_norm(&part, f, &spec1)?));
        }
    }
    let slope0 = loglog_slope(&ratio_pts);
    let slope1 = loglog_slope(&growth_pts);
    let mut rep = EstimateReport::new("transport_band_growth");
    rep.lhs = slope0;
    rep.rhs = slope1;
    rep.fitted_c = ratio_pts.iter().map(|&(_, r)| r).fold(0.0, f64::max);
    rep.samples = ratio_pts.len();
    rep.pass = slope0 <= 0.05;
    rep.note(format!(
        "diffusive run at kappa = {kappa}: bounded-ratio slope {slope0:.3} (<= 0.05); \
         growth slope {slope1:.3} reported only, diffusion caps gradient growth"
    ));
    Ok(rep)
}

/// One weighted-bound measurement on the frozen slow-shear scenario;
/// returns the report, the fitted constant, and the raw weighted sup.
fn losing_run(seed: u64, kappa: f64, dt: f64) -> Result<(EstimateReport, f64, f64)> {
    let grid = TorusGrid::new(2, 64)?;
    let theta0 = randfield::scalar(grid, 1, 8, 1.0, 1.0, seed ^ 0x53);
    let u = shear_velocity(grid, 0.04);
    let rho = transport_diffusion_solve(
        &theta0,
        &u,
        None,
        kappa,
        0.5,
        dt,
        TransportMethod::SpectralRk4,
        ((0.5 / dt) as usize / 25).max(1),
    )?;
    let urec = steady_record(&u, &[0.0, 0.1, 0.2, 0.3, 0.4, 0.5])?;
    let rep = losing_estimate_check(&rho, &urec, None, -1.5, kappa)?;
    let c = rep.fitted_c;
    let sup = rep.lhs;
    Ok((rep, c, sup))
}

/// Coupled-flow suite; `kappa` feeds every run so the full-viscosity
/// variant reuses the same scenarios.
pub fn run_boussinesq(seed: u64, kappa: f64) -> Result<SuiteResult> {
    let t0 = Instant::now();
    let mut suite = SuiteResult::new("boussinesq");
    let grid = TorusGrid::new(2, 128)?;

    // Exact vortex decay at the pinned parameters.
    {
        let params = PhysicsParams::new(0.01, kappa)?;
        let u0 = taylor_green(grid, 1.0)?;
        let th0 = SpectralField::zeros(grid, 1);
        let (hist, _) = boussinesq_solve(&th0, &u0, &params, 1.0, 1e-3, 250, 2.0)?;
        let (t, u_end) = hist.velocity.last().unwrap();
        let mut diff = u0.clone();
        diff.scale((-2.0 * 0.01 * t).exp());
        diff.add_scaled(u_end, -1.0);
        let err = diff.l2_norm();
        let mut rep = EstimateReport::new("taylor_green_exactness");
        rep.lhs = err;
        rep.rhs = 1e-8;
        rep.fitted_c = err / u0.l2_norm();
        rep.samples = hist.len();
        rep.pass = err <= 1e-8;
        rep.note(format!("absolute L2 error {err:.3e} at t = 1, relative {:.3e}", rep.fitted_c));
        suite.push(rep);
    }

    // Energy identity and the linear-time growth envelope on one long run.
    {
        let params = PhysicsParams::new(0.05, kappa)?;
        let th0 = randfield::scalar(grid, 1, 4, 1.0, 0.15, seed ^ 0x61);
        let u0 = randfield::velocity(grid, 1, 4, 1.0, 0.2, seed ^ 0x62);
        let (_, ledger) = boussinesq_solve(&th0, &u0, &params, 10.0, 2e-3, 100, 2.0)?;
        let erep = energy_report(&ledger)?;
        let env_c = erep.fitted_c;
        suite.push(erep);
        let mut env = EstimateReport::new("theorem_one_envelope");
        env.lhs = env_c;
        env.rhs = 10.0;
        env.fitted_c = env_c;
        env.samples = ledger.len();
        env.pass = env_c.is_finite() && env_c <= 10.0;
        env.note(format!("envelope constant {env_c:.4} at exponent alpha = 1, horizon t = 10"));
        suite.push(env);
    }

    // Fourth-order convergence of the identity residual under dt halving.
    {
        let params = PhysicsParams::new(0.02, kappa)?;
        let th0 = randfield::scalar(grid, 1, 4, 1.0, 0.5, seed ^ 0x63);
        let u0 = randfield::velocity(grid, 1, 4, 1.0, 0.5, seed ^ 0x64);
        let mut residuals = Vec::new();
        for dt in [4e-3, 2e-3] {
            let (_, ledger) = boussinesq_solve(&th0, &u0, &params, 0.4, dt, 50, 2.0)?;
            residuals.push(energy_report(&ledger)?.lhs);
        }
        let order = (residuals[0] / residuals[1]).log2();
        let mut rep = EstimateReport::new("energy_residual_order");
        rep.lhs = order;
        rep.rhs = 3.5;
        rep.fitted_c = order;
        rep.samples = 2;
        rep.pass = order >= 3.5;
        rep.note(format!(
            "identity residuals {:.3e} at dt = 4e-3, {:.3e} at dt = 2e-3",
            residuals[0], residuals[1]
        ));
        suite.push(rep);
    }

    // Spectral projector invariance along the truncated scheme.
    {
        let g64 = TorusGrid::new(2, 64)?;
        let params = PhysicsParams::new(0.05, kappa)?;
        let th0 = randfield::scalar(g64, 1, 6, 1.0, 0.3, seed ^ 0x65);
        let u0 = randfield::velocity(g64, 1, 6, 1.0, 0.3, seed ^ 0x66);
        let (hist, _) = friedrichs_solve(&th0, &u0, 12, 0.2, &params, 0.5, 2e-3)?;
        let mut worst = 0.0f64;
        for i in 0..hist.len() {
            let th = hist.theta.field(i);
            let mut d = friedrichs_truncate(th, 12)?;
            d.add_scaled(th, -1.0);
            worst = worst.max(d.l2_norm() / th.l2_norm().max(f64::MIN_POSITIVE));
            let u = hist.velocity.field(i);
            let mut p = friedrichs_truncate(u, 12)?;
            leray_project(&mut p);
            p.add_scaled(u, -1.0);
            worst = worst.max(p.l2_norm() / u.l2_norm().max(f64::MIN_POSITIVE));
        }
        let mut rep = EstimateReport::new("friedrichs_invariance");
        rep.lhs = worst;
        rep.rhs = 1e-12;
        rep.fitted_c = worst;
        rep.samples = hist.len() * 2;
        rep.pass = worst <= 1e-12;
        rep.note("truncation and projection act as the identity along the run");
        suite.push(rep);
    }

    // Fixed-point iteration contracts geometrically on small data.
    {
        let g64 = TorusGrid::new(2, 64)?;
        let params = PhysicsParams::new(1.0, kappa)?;
        let th0 = randfield::scalar(g64, 1, 3, 1.0, 1e-2, seed ^ 0x67);
        let u0 = randfield::velocity(g64, 1, 3, 1.0, 1e-2, seed ^ 0x68);
        let (_, ledger) = picard_solve(&th0, &u0, &params, 0.2, 2e-3, 12, 1e-9)?;
        let ratios = ledger.ratios();
        let worst = ratios.iter().copied().fold(0.0f64, f64::max);
        let mut rep = EstimateReport::new("picard_contraction");
        rep.lhs = worst;
        rep.rhs = 0.6;
        rep.fitted_c = worst;
        rep.samples = ratios.len();
        rep.pass = ledger.converged() && !ratios.is_empty() && worst <= 0.6;
        rep.note(format!(
            "ratios {:?}, fixed-point residual {:.3e}",
            ratios.iter().map(|r| (r * 1e4).round() / 1e4).collect::<Vec<_>>(),
            ledger.residual()
        ));
        suite.push(rep);
    }

    // Separation scales linearly in the seeding amplitude.
    {
        let g64 = TorusGrid::new(2, 64)?;
        let params = PhysicsParams::new(0.5, kappa)?;
        let th0 = randfield::scalar(g64, 1, 3, 1.0, 5e-3, seed ^ 0x69);
        let u0 = randfield::velocity(g64, 1, 3, 1.0, 5e-3, seed ^ 0x6a);
        let mut coeffs = Vec::new();
        let mut all_pass = true;
        let mut rep = EstimateReport::new("uniqueness_linear_response_sweep");
        for eps in [1e-2, 1e-3, 1e-4] {
            let sub = uniqueness_probe(&th0, &u0, eps, &params, 0.3, 2e-3)?;
            rep.note(format!(
                "eps = {eps:.0e}: separation {:.4e}, response coefficient {:.4e}, pass {}",
                sub.lhs, sub.fitted_c, sub.pass
            ));
            all_pass &= sub.pass;
            coeffs.push(sub.fitted_c);
        }
        rep.lhs = coeffs.iter().copied().fold(0.0, f64::max);
        rep.rhs = coeffs.iter().copied().fold(f64::INFINITY, f64::min);
        rep.fitted_c = rep.lhs;
        rep.samples = coeffs.len();
        rep.pass = all_pass && stable_within(&coeffs, 0.2);
        suite.push(rep);
    }

    // Time-integrated H2 norm of the velocity is grid-stable.
    {
        let mut norms = Vec::new();
        for n in [128usize, 256] {
            let gn = TorusGrid::new(2, n)?;
            let params = PhysicsParams::new(0.05, kappa)?;
            let th0 = smooth_scalar(gn, 0.2);
            let u0 = smooth_velocity(gn, 0.3);
            let (hist, _) = boussinesq_solve(&th0, &u0, &params, 0.5, 1e-3, 25, 2.0)?;
            norms.push(tilde_h2_norm(&hist.velocity)?);
        }
        let mut rep = EstimateReport::new("tilde_h2_grid_stability");
        rep.lhs = norms[0].max(norms[1]);
        rep.rhs = norms[0].min(norms[1]);
        rep.fitted_c = rep.lhs / rep.rhs;
        rep.samples = 2;
        rep.pass = stable_within(&norms, 0.10);
        rep.note(format!(
            "integrated H2 norm {:.6e} at 128^2 vs {:.6e} at 256^2",
            norms[0], norms[1]
        ));
        suite.push(rep);
    }

    Ok(finish(suite, t0))
}

/// Fixed trig-polynomial scalar, identical on every grid that resolves it.
fn smooth_scalar(grid: TorusGrid, amp: f64) -> SpectralField {
    SpectralField::from_point_fn(grid, 1, move |_, x| {
        amp * ((x[0]).cos() + (x[0] + 2.0 * x[1]).sin())
    })
}

/// Fixed solenoidal velocity from the stream function
/// `psi = amp (sin x1 sin x2 + 0.3 sin 2x1 sin x2)`.
fn smooth_velocity(grid: TorusGrid, amp: f64) -> SpectralField {
    SpectralField::from_point_fn(grid, grid.dim(), move |c, x| {
        let (s1, c1) = x[0].sin_cos();
        let (s2, c2) = x[1].sin_cos();
        let (s21, c21) = (2.0 * x[0]).sin_cos();
        if c == 0 {
            amp * (s1 * c2 + 0.3 * s21 * c2)
        } else {
            -amp * (c1 * s2 + 0.6 * c21 * s2)
        }
    })
}

fn run_smalldata3d(seed: u64) -> Result<SuiteResult> {
    let t0 = Instant::now();
    let mut suite = SuiteResult::new("smalldata3d");
    let grid = TorusGrid::new(3, 64)?;
    let nu = 1.0;
    let base_th = randfield::scalar(grid, 1, 3, 1.0, 5e-3, seed ^ 0x71);
    let base_u = randfield::velocity(grid, 1, 3, 1.0, 5e-3, seed ^ 0x72);
    let params = PhysicsParams::new(nu, 0.0)?;
    let mut cs = Vec::new();
    let mut scaled_pass = true;
    let mut notes = Vec::new();
    for (i, scale) in [1.0f64, 0.5, 0.25].into_iter().enumerate() {
        let mut th0 = base_th.clone();
        th0.scale(scale);
        let mut u0 = base_u.clone();
        u0.scale(scale);
        let (hist, _) = boussinesq_solve(&th0, &u0, &params, 20.0, 0.2, 10, 2.0)?;
        let rep = smallness_monitor(&hist, nu)?;
        notes.push(format!(
            "scale {scale}: envelope constant {:.4}, pass {}",
            rep.fitted_c, rep.pass
        ));
        cs.push(rep.fitted_c);
        scaled_pass &= rep.pass;
        if i == 0 {
            suite.push(rep);
        }
    }
    let mut stab = EstimateReport::new("smallness_scaling_stability");
    stab.lhs = cs.iter().copied().fold(0.0, f64::max);
    stab.rhs = cs.iter().copied().fold(f64::INFINITY, f64::min);
    stab.fitted_c = stab.lhs;
    stab.samples = cs.len();
    stab.pass = scaled_pass && stable_within(&cs, 0.2);
    for n in notes {
        stab.note(n);
    }
    suite.push(stab);
    suite.push(lorentz_duhamel_sweep(DuhamelVariant::Force, seed ^ 0x73)?);
    suite.push(lorentz_duhamel_sweep(DuhamelVariant::Divergence, seed ^ 0x74)?);
    Ok(finish(suite, t0))
}
