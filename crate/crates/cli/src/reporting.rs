//! Ledger CSV writers and the report command that merges every ledger
//! found under a directory into one table per kind.
//!
//! ```no_run
//! use std::path::Path;
//! let written = bqlab_cli::reporting::cmd_report(Path::new("runs"))?;
//! # Ok::<(), bqlab_core::Error>(())
//! ```

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use bqlab_core::boussinesq::{BlowupSeries, EnergyLedger, IterationLedger};
use bqlab_core::{Error, Result};

/// Ledger file names the report command knows how to merge.
pub const LEDGER_NAMES: [&str; 3] = ["energy.csv", "blowup.csv", "iterations.csv"];

/// Writes the per-snapshot energy ledger. Floats are printed with the
/// shortest round-trip representation, so rereads are exact.
pub fn write_energy_csv(path: &Path, ledger: &EnergyLedger) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "time,kinetic,dissipation_integral,buoyancy_work,theta_lp")?;
    for i in 0..ledger.len() {
        writeln!(
            w,
            "{},{},{},{},{}",
            ledger.times()[i],
            ledger.kinetic()[i],
            ledger.dissipation()[i],
            ledger.buoyancy_work()[i],
            ledger.theta_lp()[i]
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the breakdown-criterion series.
pub fn write_blowup_csv(path: &Path, series: &BlowupSeries) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "time,grad_sup,grad_integral,theta_band_norm")?;
    for i in 0..series.times.len() {
        writeln!(
            w,
            "{},{},{},{}",
            series.times[i], series.grad_sup[i], series.grad_integral[i], series.theta_besov[i]
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the fixed-point iteration ledger.
pub fn write_iterations_csv(path: &Path, ledger: &IterationLedger) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "iterate,delta,size")?;
    for row in ledger.rows() {
        writeln!(w, "{},{},{}", row.n, row.delta, row.size)?;
    }
    w.flush()?;
    Ok(())
}

/// Merges every known ledger under `dir` (recursively) into
/// `<dir>/merged_<kind>.csv` with a leading `run` column naming the run
/// directory. Returns the merged files written; errors when no ledger of
/// any kind is found.
pub fn cmd_report(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut found: Vec<(String, PathBuf)> = Vec::new();
    collect_ledgers(dir, dir, &mut found)?;
    if found.is_empty() {
        return Err(Error::Config(format!(
            "no ledgers found under {}; expected files named {:?}",
            dir.display(),
            LEDGER_NAMES
        )));
    }
    found.sort();
    let mut written = Vec::new();
    for name in LEDGER_NAMES {
        let members: Vec<&(String, PathBuf)> =
            found.iter().filter(|(_, p)| p.file_name().is_some_and(|f| f == name)).collect();
        if members.is_empty() {
            continue;
        }
        let kind = name.trim_end_matches(".csv");
        let out = dir.join(format!("merged_{kind}.csv"));
        let mut w = BufWriter::new(File::create(&out)?);
        let mut header_written = false;
        for (run, path) in members {
            let text = std::fs::read_to_string(path)?;
            let mut lines = text.lines();
            let header = lines.next().ok_or_else(|| {
                Error::Config(format!("{} is empty", path.display()))
            })?;
            if !header_written {
                writeln!(w, "run,{header}")?;
                header_written = true;
            }
            for line in lines {
                writeln!(w, "{run},{line}")?;
            }
        }
        w.flush()?;
        written.push(out);
    }
    Ok(written)
}

/// Depth-first scan for ledger files; `run` is the path from the scan root
/// to the file's directory.
fn collect_ledgers(root: &Path, dir: &Path, found: &mut Vec<(String, PathBuf)>) -> Result<()> {
    let mut entries: Vec<PathBuf> =
        std::fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<std::io::Result<_>>()?;
    entries.sort();
    for path in entries {
        if path.is_dir() {
            collect_ledgers(root, &path, found)?;
        } else if path.file_name().and_then(|f| f.to_str()).is_some_and(|f| {
            LEDGER_NAMES.contains(&f)
        }) {
            let run = path
                .parent()
                .and_then(|p| p.strip_prefix(root).ok())
                .map(|p| p.to_string_lossy().replace(std::path::MAIN_SEPARATOR, "/"))
                .filter(|s| !s.is_empty())
                .unwrap_or_else(|| ".".to_string());
            found.push((run, path));
        }
    }
    Ok(())
}
