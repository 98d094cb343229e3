//! Acceptance gate: one test per stated criterion, each printing a single
//! pass/fail line. Criteria run under a global lock so the per-suite
//! runtime budgets are measured honestly on one core.

use std::sync::{Mutex, MutexGuard, OnceLock};

use bqlab_cli::suites::{registry, run_boussinesq, run_suite, run_transport};
use bqlab_core::report::{EstimateReport, SuiteResult};

static GATE: Mutex<()> = Mutex::new(());

fn gate() -> MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

/// Baseline transport suite (kappa = 0), shared by criteria 3 and 6.
fn transport_base() -> &'static SuiteResult {
    static BASE: OnceLock<SuiteResult> = OnceLock::new();
    BASE.get_or_init(|| run_transport(7, 0.0).expect("transport suite must run"))
}

/// Baseline coupled suite (kappa = 0), shared by criteria 4 and 6.
fn boussinesq_base() -> &'static SuiteResult {
    static BASE: OnceLock<SuiteResult> = OnceLock::new();
    BASE.get_or_init(|| run_boussinesq(7, 0.0).expect("coupled suite must run"))
}

fn report<'a>(suite: &'a SuiteResult, id: &str) -> &'a EstimateReport {
    suite
        .reports
        .iter()
        .find(|r| r.inequality_id == id)
        .unwrap_or_else(|| panic!("suite {} lacks check {id}", suite.suite))
}

/// Asserts the suite passed, emitted exactly its registered checks in
/// order, and stayed within its runtime budget.
fn assert_suite(suite: &SuiteResult, budget_secs: f64) {
    let ids: Vec<&str> = suite.reports.iter().map(|r| r.inequality_id.as_str()).collect();
    assert_eq!(
        ids,
        registry(&suite.suite).expect("registered suite"),
        "emitted checks differ from the registry for {}",
        suite.suite
    );
    for rep in &suite.reports {
        assert!(rep.pass, "check {} failed: lhs {:.6e} rhs {:.6e}", rep.inequality_id, rep.lhs, rep.rhs);
    }
    assert!(suite.passed);
    assert!(
        suite.runtime_seconds <= budget_secs,
        "suite {} took {:.1}s, budget {budget_secs}s",
        suite.suite,
        suite.runtime_seconds
    );
}

fn verdict(criterion: &str, pass: bool, detail: &str) {
    println!("criterion {criterion}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_1_harmonic_suite() {
    let _g = gate();
    let suite = run_suite("harmonic", 7).expect("harmonic suite must run");
    assert_suite(&suite, 120.0);
    let part = report(&suite, "dyadic_partition_unity");
    let recon = report(&suite, "block_reconstruction");
    let ortho = report(&suite, "block_orthogonality");
    let bony = report(&suite, "interaction_split_reconstruction");
    let bern = report(&suite, "block_norm_comparison");
    let lorentz = report(&suite, "weak_norm_block_embedding");
    let ok = part.lhs <= 1e-12
        && recon.lhs <= 1e-12
        && ortho.lhs == 0.0
        && bony.lhs <= 1e-11
        && bern.pass
        && lorentz.fitted_c.is_finite();
    verdict(
        "1 (harmonic suite)",
        ok,
        &format!(
            "partition {:.1e}, reconstruction {:.1e}, double-block defect {:.1e}, \
             interaction split {:.1e}, band-ratio stability held, embedding C {:.3}, {:.1}s",
            part.lhs, recon.lhs, ortho.lhs, bony.lhs, lorentz.fitted_c, suite.runtime_seconds
        ),
    );
}

#[test]
fn criterion_2_semigroup_suite() {
    let _g = gate();
    let suite = run_suite("semigroup", 7).expect("semigroup suite must run");
    assert_suite(&suite, 180.0);
    let heat = report(&suite, "band_heat_decay");
    let single = report(&suite, "stokes_single_mode");
    let sweep = report(&suite, "stokes_smoothing_envelope_sweep");
    // The heat check encodes its rate and prefactor gates in fitted form:
    // rhs holds the fitted decay rate floor value, lhs the prefactor.
    let ok =
        heat.pass && heat.lhs >= 0.5 && heat.fitted_c <= 1.01 && single.lhs <= 1e-8 && sweep.pass;
    verdict(
        "2 (semigroup suite)",
        ok,
        &format!(
            "band decay rate {:.4} (floor 0.5625) and prefactor {:.4} (cap 1), \
             single-mode error {:.1e}, smoothing constants spread {:.3} over nu in {{0.1,1,10}}, {:.1}s",
            heat.lhs, heat.fitted_c, single.lhs, sweep.fitted_c, suite.runtime_seconds
        ),
    );
}

#[test]
fn criterion_3_transport_suite() {
    let _g = gate();
    let suite = transport_base();
    assert_suite(suite, 600.0);
    let cons = report(suite, "transport_lp_conservation");
    let over = report(suite, "transport_linf_overshoot");
    let growth = report(suite, "transport_band_growth");
    let losing = report(suite, "losing_weighted_bound");
    let stab = report(suite, "losing_constant_dt_stability");
    let ok = cons.lhs <= 1e-6
        && over.lhs <= 1e-3
        && growth.lhs <= 0.05
        && growth.rhs >= 0.5
        && losing.pass
        && stab.pass;
    verdict(
        "3 (transport suite)",
        ok,
        &format!(
            "conservation drift {:.1e}, overshoot {:.1e}, bounded-ratio slope {:.3} \
             vs growth slope {:.3}, weighted bound C {:.4} stable under dt halving, {:.1}s",
            cons.lhs, over.lhs, growth.lhs, growth.rhs, losing.fitted_c, suite.runtime_seconds
        ),
    );
}

#[test]
fn criterion_4_boussinesq_suite() {
    let _g = gate();
    let suite = boussinesq_base();
    assert_suite(suite, 900.0);
    let tg = report(suite, "taylor_green_exactness");
    let energy = report(suite, "boussinesq_energy");
    let order = report(suite, "energy_residual_order");
    let env = report(suite, "theorem_one_envelope");
    let fried = report(suite, "friedrichs_invariance");
    let picard = report(suite, "picard_contraction");
    let uniq = report(suite, "uniqueness_linear_response_sweep");
    let h2 = report(suite, "tilde_h2_grid_stability");
    let ok = tg.lhs <= 1e-8
        && energy.lhs <= 1e-6
        && order.lhs >= 3.5
        && env.fitted_c <= 10.0
        && fried.lhs <= 1e-12
        && picard.lhs <= 0.6
        && uniq.pass
        && h2.pass;
    verdict(
        "4 (coupled-flow suite)",
        ok,
        &format!(
            "vortex error {:.1e}, energy residual {:.1e} at order {:.2}, envelope C {:.2}, \
             projector defect {:.1e}, contraction ratio {:.4}, linear response within 20%, \
             H2 grid ratio {:.4}, {:.1}s",
            tg.lhs,
            energy.lhs,
            order.lhs,
            env.fitted_c,
            fried.lhs,
            picard.lhs,
            h2.fitted_c,
            suite.runtime_seconds
        ),
    );
}

#[test]
fn criterion_5_smalldata3d_suite() {
    let _g = gate();
    let suite = run_suite("smalldata3d", 7).expect("3d suite must run");
    assert_suite(&suite, 1200.0);
    let small = report(&suite, "smallness_envelope");
    let scaling = report(&suite, "smallness_scaling_stability");
    let force = report(&suite, "duhamel_weak_lp_force_sweep");
    let div = report(&suite, "duhamel_weak_lp_divergence_sweep");
    let ok = small.pass && scaling.pass && force.pass && div.pass;
    verdict(
        "5 (small-data 3d suite)",
        ok,
        &format!(
            "smallness envelope C {:.4}, stable under x1/2 and x1/4 data scalings, \
             weak-norm response flat in time for both source shapes, {:.1}s",
            small.fitted_c, suite.runtime_seconds
        ),
    );
}

/// Constants compared between the partially and fully viscous runs. Checks
/// whose measured values sit at rounding level (vortex exactness, projector
/// invariance) re-pass their absolute gates instead: a ratio of two
/// rounding residuals is noise, not a constant.
const COMPARED_CONSTANTS: [&str; 7] = [
    "losing_weighted_bound",
    "losing_constant_dt_stability",
    "boussinesq_energy",
    "theorem_one_envelope",
    "energy_residual_order",
    "picard_contraction",
    "uniqueness_linear_response_sweep",
];

#[test]
fn criterion_6_full_viscosity_robustness() {
    let _g = gate();
    let t_base = transport_base();
    let b_base = boussinesq_base();
    let mut detail = String::new();
    let mut ok = true;
    for kappa in [0.01, 0.1] {
        let t_run = run_transport(7, kappa).expect("transport suite must run");
        let b_run = run_boussinesq(7, kappa).expect("coupled suite must run");
        for rep in t_run.reports.iter().chain(b_run.reports.iter()) {
            assert!(rep.pass, "kappa {kappa}: check {} failed", rep.inequality_id);
        }
        for id in COMPARED_CONSTANTS {
            let (base, run) = if t_base.reports.iter().any(|r| r.inequality_id == id) {
                (report(t_base, id), report(&t_run, id))
            } else {
                (report(b_base, id), report(&b_run, id))
            };
            let rel = (run.fitted_c - base.fitted_c).abs() / base.fitted_c.abs();
            if rel > 0.30 {
                ok = false;
                detail.push_str(&format!(
                    "{id} at kappa {kappa}: C {:.4e} vs base {:.4e} ({:.0}% off); ",
                    run.fitted_c,
                    base.fitted_c,
                    100.0 * rel
                ));
            }
        }
        detail.push_str(&format!("kappa {kappa} re-passed; "));
    }
    detail.push_str("constants within 30% of the kappa = 0 baseline");
    verdict("6 (full-viscosity robustness)", ok, &detail);
}
