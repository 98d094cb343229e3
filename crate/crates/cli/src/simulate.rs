//! Scenario runner: integrates one TOML scenario and writes the requested
//! diagnostic artifacts under `<out>/<name>/`.
//!
//! ```no_run
//! use std::path::Path;
//! let dir = bqlab_cli::simulate::cmd_simulate(Path::new("tg.toml"), None)?;
//! # Ok::<(), bqlab_core::Error>(())
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use bqlab_core::boussinesq::{
    blowup_monitor, boussinesq_solve, energy_report, friedrichs_solve, picard_solve,
    smallness_monitor, EnergyLedger, FlowHistory, IterationLedger,
};
use bqlab_core::io::save_field;
use bqlab_core::{Error, Result};

use crate::config::{Scenario, Scheme};
use crate::reporting;

/// Default parent directory for run output.
pub const DEFAULT_OUT: &str = "runs";

/// Everything needed to reproduce and interpret one run.
#[derive(Debug, Serialize)]
struct RunMeta<'a> {
    name: &'a str,
    seed: u64,
    dim: usize,
    n: usize,
    dt: f64,
    t_end: f64,
    nu: f64,
    kappa: f64,
    scheme: &'static str,
    snapshots: usize,
    diagnostics: Vec<String>,
    artifacts: Vec<String>,
}

/// Runs the scenario at `config_path`; returns the run directory.
pub fn cmd_simulate(config_path: &Path, out_override: Option<&Path>) -> Result<PathBuf> {
    let sc = Scenario::load(config_path)?;
    let grid = sc.build_grid()?;
    let params = sc.build_params()?;
    let diagnostics = sc.diagnostics();
    if diagnostics.iter().any(|d| d == "smallness") && grid.dim() != 3 {
        return Err(Error::Config(
            "the smallness diagnostic needs a 3d grid".into(),
        ));
    }
    let (theta0, u0) = sc.build_initial(grid)?;
    let ledger_p = sc.output.ledger_p.unwrap_or(2.0);

    let run_dir = out_override
        .map(Path::to_path_buf)
        .or_else(|| sc.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
        .join(&sc.name);
    fs::create_dir_all(&run_dir)?;

    let (scheme_name, hist, ledger, iterations): (
        &'static str,
        FlowHistory,
        Option<EnergyLedger>,
        Option<IterationLedger>,
    ) = match sc.scheme {
        Scheme::Imex => {
            let (h, l) = boussinesq_solve(
                &theta0,
                &u0,
                &params,
                sc.time.t_end,
                sc.time.dt,
                sc.stride(),
                ledger_p,
            )?;
            ("imex", h, Some(l), None)
        }
        Scheme::Friedrichs { truncation, mollifier } => {
            let (h, l) = friedrichs_solve(
                &theta0,
                &u0,
                truncation,
                mollifier,
                &params,
                sc.time.t_end,
                sc.time.dt,
            )?;
            ("friedrichs", h, Some(l), None)
        }
        Scheme::Picard { max_iter, tol } => {
            let (h, l) =
                picard_solve(&theta0, &u0, &params, sc.time.t_end, sc.time.dt, max_iter, tol)?;
            ("picard", h, None, Some(l))
        }
    };

    let mut artifacts = Vec::new();
    if let Some(ledger) = &ledger {
        if diagnostics.iter().any(|d| d == "energy") {
            let csv = run_dir.join("energy.csv");
            reporting::write_energy_csv(&csv, ledger)?;
            artifacts.push("energy.csv".to_string());
            let rep = energy_report(ledger)?;
            write_json(&run_dir.join("energy_report.json"), &rep)?;
            artifacts.push("energy_report.json".to_string());
        }
    }
    if diagnostics.iter().any(|d| d == "blowup") {
        let series = blowup_monitor(&hist)?;
        reporting::write_blowup_csv(&run_dir.join("blowup.csv"), &series)?;
        artifacts.push("blowup.csv".to_string());
    }
    if diagnostics.iter().any(|d| d == "smallness") {
        let rep = smallness_monitor(&hist, params.nu)?;
        write_json(&run_dir.join("smallness_report.json"), &rep)?;
        artifacts.push("smallness_report.json".to_string());
    }
    if let Some(iters) = &iterations {
        reporting::write_iterations_csv(&run_dir.join("iterations.csv"), iters)?;
        artifacts.push("iterations.csv".to_string());
    }
    if diagnostics.iter().any(|d| d == "fields") {
        let times = hist.times();
        let (t0, tn) = (times[0], times[hist.len() - 1]);
        for (stem, rec, t, i) in [
            ("theta_initial", &hist.theta, t0, 0),
            ("theta_final", &hist.theta, tn, hist.len() - 1),
            ("velocity_initial", &hist.velocity, t0, 0),
            ("velocity_final", &hist.velocity, tn, hist.len() - 1),
        ] {
            let name = format!("{stem}.bqfld");
            save_field(run_dir.join(&name), rec.field(i), t)?;
            artifacts.push(name);
        }
    }

    let meta = RunMeta {
        name: &sc.name,
        seed: sc.seed,
        dim: grid.dim(),
        n: grid.n(),
        dt: sc.time.dt,
        t_end: sc.time.t_end,
        nu: params.nu,
        kappa: params.kappa,
        scheme: scheme_name,
        snapshots: hist.len(),
        diagnostics,
        artifacts,
    };
    write_json(&run_dir.join("run.json"), &meta)?;
    Ok(run_dir)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("cannot serialize {}: {e}", path.display())))?;
    fs::write(path, text + "\n")?;
    Ok(())
}
