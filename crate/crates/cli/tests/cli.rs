//! End-to-end tests of the command-line crate: scenario parsing, run
//! artifacts, determinism, report merging, and the binary's exit codes.

use std::fs;
use std::path::Path;
use std::process::Command;

use bqlab_cli::config::Scenario;
use bqlab_cli::reporting::cmd_report;
use bqlab_cli::simulate::cmd_simulate;
use bqlab_cli::suites::{registry, run_suite, run_suite_with, TestHooks};
use bqlab_core::io::load_field;
use bqlab_core::Error;

fn write_scenario(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(format!("{name}.toml"));
    fs::write(&path, body).unwrap();
    path
}

/// Small vortex-decay scenario used by several tests.
fn tg_scenario(name: &str) -> String {
    format!(
        r#"
name = "{name}"
seed = 11

[grid]
dim = 2
n = 64

[time]
dt = 2e-3
t_end = 0.2

[physics]
nu = 0.05

[initial.theta]
kind = "rest"

[initial.velocity]
kind = "taylor_green"
amplitude = 1.0

[output]
diagnostics = ["energy", "fields"]
"#
    )
}

#[test]
fn unknown_keys_and_missing_sections_are_reported_with_the_file_name() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(
        dir.path(),
        "bad",
        "name = \"x\"\nnonsense = 1\n[grid]\ndim = 2\nn = 64\n",
    );
    let err = Scenario::load(&path).unwrap_err();
    let msg = err.to_string();
    assert!(matches!(err, Error::Config(_)), "got {err:?}");
    assert!(msg.contains("bad.toml"), "message should name the file: {msg}");
    assert!(msg.contains("nonsense"), "message should name the bad key: {msg}");
}

#[test]
fn recipe_misuse_is_rejected_at_load_time() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
name = "misuse"

[grid]
dim = 2
n = 64

[time]
dt = 1e-3
t_end = 0.1

[physics]
nu = 0.1

[initial.theta]
kind = "taylor_green"
amplitude = 1.0

[initial.velocity]
kind = "rest"
"#;
    let err = Scenario::load(&write_scenario(dir.path(), "misuse", body)).unwrap_err();
    assert!(err.to_string().contains("velocities"), "{err}");
}

#[test]
fn vortex_decay_run_writes_matching_ledger_and_field_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), "tg", &tg_scenario("tg"));
    let out = dir.path().join("runs");
    let run_dir = cmd_simulate(&cfg, Some(&out)).unwrap();
    assert_eq!(run_dir, out.join("tg"));

    let energy = fs::read_to_string(run_dir.join("energy.csv")).unwrap();
    let mut rows = energy.lines();
    assert_eq!(rows.next().unwrap(), "time,kinetic,dissipation_integral,buoyancy_work,theta_lp");
    let parsed: Vec<Vec<f64>> =
        rows.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    let (k0, t_last, k_last) = (
        parsed[0][1],
        parsed.last().unwrap()[0],
        parsed.last().unwrap()[1],
    );
    // The vortex decays as exp(-2 nu t) per component, so energy follows
    // exp(-4 nu t); the run must reproduce that to quadrature accuracy.
    let expect = k0 * (-4.0 * 0.05 * t_last).exp();
    assert!(
        ((k_last - expect) / expect).abs() < 1e-6,
        "kinetic {k_last} vs analytic {expect}"
    );

    for stem in ["theta_initial", "theta_final", "velocity_initial", "velocity_final"] {
        let (field, time) = load_field(run_dir.join(format!("{stem}.bqfld"))).unwrap();
        assert_eq!(field.grid().n(), 64);
        if stem.ends_with("final") {
            assert!((time - 0.2).abs() < 1e-12);
        } else {
            assert_eq!(time, 0.0);
        }
    }
    let meta = fs::read_to_string(run_dir.join("run.json")).unwrap();
    assert!(meta.contains("\"scheme\": \"imex\""));
}

#[test]
fn buoyancy_spins_up_a_flow_from_rest() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
name = "spinup"

[grid]
dim = 2
n = 64

[time]
dt = 1e-3
t_end = 0.1

[physics]
nu = 0.1

[initial.theta]
kind = "mode"
k = [1, 0]
amplitude = 0.1

[initial.velocity]
kind = "rest"
"#;
    let cfg = write_scenario(dir.path(), "spinup", body);
    let run_dir = cmd_simulate(&cfg, Some(&dir.path().join("runs"))).unwrap();
    let energy = fs::read_to_string(run_dir.join("energy.csv")).unwrap();
    let rows: Vec<Vec<f64>> = energy
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows[0][1], 0.0, "starts at rest");
    let last = rows.last().unwrap();
    assert!(last[1] > 0.0, "kinetic energy must grow under buoyancy");
    assert!(last[3] > 0.0, "buoyancy work must be positive");
    // Scalar transport: theta's norm stays put while kappa = 0.
    assert!((last[4] - rows[0][4]).abs() < 1e-9 * rows[0][4].abs().max(1.0));
}

#[test]
fn picard_scheme_writes_a_contracting_iteration_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
name = "picard-run"
seed = 3

[grid]
dim = 2
n = 64

[time]
dt = 2e-3
t_end = 0.1

[physics]
nu = 1.0

[initial.theta]
kind = "random"
k_min = 1
k_max = 3
slope = 1.0
amplitude = 1e-2

[initial.velocity]
kind = "random"
k_min = 1
k_max = 3
slope = 1.0
amplitude = 1e-2

[scheme]
kind = "picard"
max_iter = 12
tol = 1e-9
"#;
    let cfg = write_scenario(dir.path(), "picard-run", body);
    let run_dir = cmd_simulate(&cfg, Some(&dir.path().join("runs"))).unwrap();
    let iters = fs::read_to_string(run_dir.join("iterations.csv")).unwrap();
    let rows: Vec<Vec<f64>> = iters
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() >= 2, "need at least two iterates, got {}", rows.len());
    for pair in rows.windows(2) {
        assert!(pair[1][1] < pair[0][1], "deltas must decrease: {iters}");
    }
    assert!(!run_dir.join("energy.csv").exists(), "no energy ledger for picard");
    let meta = fs::read_to_string(run_dir.join("run.json")).unwrap();
    assert!(meta.contains("\"scheme\": \"picard\""));
}

#[test]
fn simulate_runs_are_bitwise_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), "det", &tg_scenario("det"));
    let a = cmd_simulate(&cfg, Some(&dir.path().join("a"))).unwrap();
    let b = cmd_simulate(&cfg, Some(&dir.path().join("b"))).unwrap();
    for name in ["energy.csv", "theta_final.bqfld", "velocity_final.bqfld"] {
        let left = fs::read(a.join(name)).unwrap();
        let right = fs::read(b.join(name)).unwrap();
        assert_eq!(left, right, "{name} differs between identical runs");
    }
}

#[test]
fn suites_are_deterministic_and_emit_their_registered_ids() {
    let mut first = run_suite("semigroup", 7).unwrap();
    let mut second = run_suite("semigroup", 7).unwrap();
    let ids: Vec<&str> = first.reports.iter().map(|r| r.inequality_id.as_str()).collect();
    assert_eq!(ids, registry("semigroup").unwrap());
    first.runtime_seconds = 0.0;
    second.runtime_seconds = 0.0;
    assert_eq!(
        serde_json::to_string(&first).unwrap(),
        serde_json::to_string(&second).unwrap(),
        "identical seeds must give identical suite results"
    );
}

#[test]
fn fault_injection_surfaces_as_a_failed_suite() {
    let hooks = TestHooks { corrupt_partition: true };
    let result = run_suite_with("harmonic", 7, &hooks).unwrap();
    assert!(!result.passed);
    let bad = &result.reports[0];
    assert_eq!(bad.inequality_id, "dyadic_partition_unity");
    assert!(!bad.pass);
    assert!(result.reports[1..].iter().all(|r| r.pass), "only the injected check fails");
}

#[test]
fn report_merges_ledgers_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for (run, k0) in [("alpha", 1.0), ("beta", 2.0)] {
        let rd = dir.path().join(run);
        fs::create_dir_all(&rd).unwrap();
        fs::write(
            rd.join("energy.csv"),
            format!("time,kinetic,dissipation_integral,buoyancy_work,theta_lp\n0,{k0},0,0,0\n"),
        )
        .unwrap();
    }
    let written = cmd_report(dir.path()).unwrap();
    assert_eq!(written.len(), 1);
    let merged = fs::read_to_string(&written[0]).unwrap();
    let lines: Vec<&str> = merged.lines().collect();
    assert_eq!(lines[0], "run,time,kinetic,dissipation_integral,buoyancy_work,theta_lp");
    assert_eq!(lines[1], "alpha,0,1,0,0,0");
    assert_eq!(lines[2], "beta,0,2,0,0,0");
}

#[test]
fn report_on_an_empty_tree_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = cmd_report(dir.path()).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
    assert!(err.to_string().contains("no ledgers found"));
}

#[test]
fn binary_rejects_a_non_power_of_two_grid_with_exit_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let body = tg_scenario("odd").replace("n = 64", "n = 100");
    let cfg = write_scenario(dir.path(), "odd", &body);
    let out = Command::new(env!("CARGO_BIN_EXE_bqlab"))
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("runs"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("power of two"), "stderr: {stderr}");
}

#[test]
fn binary_rejects_a_multithreaded_request_with_exit_code_two() {
    let out = Command::new(env!("CARGO_BIN_EXE_bqlab"))
        .args(["verify", "--suite", "harmonic"])
        .env("BQLAB_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("BQLAB_THREADS"), "stderr: {stderr}");
}

#[test]
fn binary_reports_no_ledgers_with_exit_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_bqlab"))
        .args(["report", "--dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no ledgers found"));
}

#[test]
fn mode_wavevector_must_match_the_grid_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
name = "badmode"

[grid]
dim = 2
n = 64

[time]
dt = 1e-3
t_end = 0.01

[physics]
nu = 0.1

[initial.theta]
kind = "mode"
k = [1]
amplitude = 0.1

[initial.velocity]
kind = "rest"
"#;
    let cfg = write_scenario(dir.path(), "badmode", body);
    let err = cmd_simulate(&cfg, Some(&dir.path().join("runs"))).unwrap_err();
    assert!(matches!(err, Error::Config(_)), "got {err:?}");
    assert!(err.to_string().contains("2d grid"), "{err}");
}
