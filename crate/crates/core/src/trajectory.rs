//! Time-sampled field trajectories used by the space-time norm evaluators.
//!
//! ```ignore
//! let mut traj = TrajectoryRecord::new(grid);
//! traj.push(0.0, state.clone())?;
//! let nrm = littlewood_paley::tilde_norm(&part, &traj, &spec, 1.0)?;
//! ```

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::TorusGrid;

/// Snapshots of an evolving field at increasing times.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    grid: TorusGrid,
    times: Vec<f64>,
    fields: Vec<SpectralField>,
}

impl TrajectoryRecord {
    pub fn new(grid: TorusGrid) -> Self {
        TrajectoryRecord {
            grid,
            times: Vec::new(),
            fields: Vec::new(),
        }
    }

    /// Append a snapshot; times must strictly increase.
    pub fn push(&mut self, time: f64, field: SpectralField) -> Result<()> {
        if field.grid() != self.grid {
            return Err(Error::GridMismatch(
                "snapshot grid differs from trajectory grid".into(),
            ));
        }
        if let Some(&last) = self.times.last() {
            if time <= last {
                return Err(Error::Argument(format!(
                    "snapshot times must increase: got {time} after {last}"
                )));
            }
        }
        self.times.push(time);
        self.fields.push(field);
        Ok(())
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn field(&self, i: usize) -> &SpectralField {
        &self.fields[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &SpectralField)> {
        self.times.iter().copied().zip(self.fields.iter())
    }

    pub fn last(&self) -> Option<(f64, &SpectralField)> {
        self.times.last().map(|&t| (t, self.fields.last().unwrap()))
    }
}

/// Trapezoid-rule L^rho norm in time of a sampled scalar series;
/// `rho = infinity` takes the supremum of the samples.
pub fn time_lrho_norm(times: &[f64], values: &[f64], rho: f64) -> Result<f64> {
    if times.len() != values.len() || times.is_empty() {
        return Err(Error::Argument(
            "time series and values must be nonempty and equal length".into(),
        ));
    }
    if !(rho >= 1.0) {
        return Err(Error::Argument(format!(
            "time exponent must satisfy rho >= 1, got {rho}"
        )));
    }
    if rho.is_infinite() {
        return Ok(values.iter().cloned().fold(0.0, f64::max));
    }
    if times.len() == 1 {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    for i in 1..times.len() {
        let dt = times[i] - times[i - 1];
        acc += 0.5 * dt * (values[i - 1].powf(rho) + values[i].powf(rho));
    }
    Ok(acc.powf(1.0 / rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SpectralField;

    #[test]
    fn push_enforces_order_and_grid() {
        let grid = TorusGrid::new(2, 16).unwrap();
        let other = TorusGrid::new(2, 32).unwrap();
        let mut traj = TrajectoryRecord::new(grid);
        traj.push(0.0, SpectralField::zeros(grid, 1)).unwrap();
        assert!(traj.push(0.0, SpectralField::zeros(grid, 1)).is_err());
        assert!(traj.push(1.0, SpectralField::zeros(other, 1)).is_err());
        traj.push(1.0, SpectralField::zeros(grid, 1)).unwrap();
        assert_eq!(traj.len(), 2);
        assert_eq!(traj.last().unwrap().0, 1.0);
    }

    #[test]
    fn time_norm_matches_closed_forms() {
        let times: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let vals: Vec<f64> = times.iter().map(|t| 2.0 * t).collect();
        // L^1 of 2t on [0,1] is 1; trapezoid is exact for linear integrands.
        let l1 = time_lrho_norm(&times, &vals, 1.0).unwrap();
        assert!((l1 - 1.0).abs() < 1e-14);
        let linf = time_lrho_norm(&times, &vals, f64::INFINITY).unwrap();
        assert_eq!(linf, 2.0);
        assert!(time_lrho_norm(&times, &vals, 0.5).is_err());
    }
}
