//! Heat semigroup stepping and the dyadic band decay checker.
//!
//! ```ignore
//! let decayed = heat_step(&field, nu * dt)?;
//! let report = heat_band_decay_check(&[0, 2, 4], &[0.0, 0.02, 0.1], 2.0, 7)?;
//! ```

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::TorusGrid;
use crate::littlewood_paley::{Convention, DyadicPartition};
use crate::report::EstimateReport;
use crate::{ops, randfield};

/// One exact heat step: every mode scaled by `exp(-nu_tau |k|^2)`.
pub fn heat_step(f: &SpectralField, nu_tau: f64) -> Result<SpectralField> {
    ops::heat_semigroup(f, nu_tau)
}

/// Squared lower edge of the ring support: block `q` lives on
/// `|k| > (3/4) 2^q`, so its L2 decay exponent is at least this times `4^q`.
const RING_LOWER_EDGE_SQ: f64 = 0.75 * 0.75;

/// Fits `ratio <= C exp(-c tau 4^q)` for the per-band heat decay over random
/// band fields. For `p = 2` the decay is exact per mode, so the fitted pair
/// must satisfy `c >= (3/4)^2` and `C <= 1`; other `p` just need a finite fit.
pub fn heat_band_decay_check(
    q_range: &[i32],
    tau_grid: &[f64],
    p: f64,
    seed: u64,
) -> Result<EstimateReport> {
    if q_range.is_empty() || tau_grid.is_empty() {
        return Err(Error::Argument("need at least one band and one time".into()));
    }
    if !(p >= 1.0) {
        return Err(Error::Argument("p must be >= 1".into()));
    }
    if tau_grid.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::Argument("times must be nonnegative".into()));
    }
    let grid = TorusGrid::new(2, 128)?;
    let part = DyadicPartition::new(grid);
    for &q in q_range {
        if q < 0 || q > part.q_max() {
            return Err(Error::Argument(format!(
                "band {q} outside 0..={}",
                part.q_max()
            )));
        }
    }

    let mut report = EstimateReport::new("band_heat_decay");
    // Per-sample decay exponents; the fitted c binds at their minimum.
    let mut c_min = f64::INFINITY;
    let mut curves: Vec<(f64, f64)> = Vec::new();
    for (i, &q) in q_range.iter().enumerate() {
        let raw = randfield::scalar(grid, 1, grid.n() as u32 / 2, 0.5, 1.0, seed + i as u64);
        let band = part.block(&raw, q, Convention::Homogeneous);
        let base = band.lp_norm(p);
        if base <= 0.0 {
            return Err(Error::Argument(format!("band {q} carries no modes")));
        }
        for &tau in tau_grid {
            let decayed = heat_step(&band, tau)?;
            let ratio = decayed.lp_norm(p) / base;
            let x = tau * (2.0 * q as f64).exp2();
            curves.push((x, ratio));
            if tau > 0.0 && ratio > 1e-300 {
                c_min = c_min.min(-ratio.ln() / x);
            }
        }
    }
    let c_fit = if c_min.is_finite() { c_min } else { 0.0 };
    let mut big_c: f64 = 0.0;
    for &(x, ratio) in &curves {
        if ratio > 1e-300 {
            big_c = big_c.max(ratio * (c_fit * x).exp());
        }
    }
    report.samples = curves.len();
    report.lhs = c_fit;
    report.fitted_c = big_c;
    report.pass = if p == 2.0 {
        report.rhs = RING_LOWER_EDGE_SQ;
        c_fit >= RING_LOWER_EDGE_SQ && big_c <= 1.0 + 1e-12
    } else {
        report.rhs = 0.0;
        c_fit > 0.0 && big_c.is_finite()
    };
    report.note(format!(
        "p = {p}, bands {q_range:?}, fitted exponent c = {c_fit:.4}, prefactor C = {big_c:.4}"
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn zero_time_is_identity_and_single_mode_decays_analytically() {
        let grid = TorusGrid::new(2, 32).unwrap();
        let mut f = SpectralField::zeros(grid, 1);
        f.set_mode_pair(0, [2, 0, 0], Complex64::new(0.5, 0.25));
        let same = heat_step(&f, 0.0).unwrap();
        assert_eq!(same.coeff(0, [2, 0, 0]), f.coeff(0, [2, 0, 0]));
        // |k|^2 = 4, nu*tau = 0.25: amplitude shrinks by e^{-1}.
        let dec = heat_step(&f, 0.25).unwrap();
        let expect = f.coeff(0, [2, 0, 0]) * (-1.0f64).exp();
        assert!((dec.coeff(0, [2, 0, 0]) - expect).norm() <= 1e-15);
    }

    #[test]
    fn semigroup_law_two_path() {
        let grid = TorusGrid::new(2, 32).unwrap();
        let f = randfield::scalar(grid, 1, 10, 0.7, 1.0, 3);
        let one = heat_step(&f, 0.3).unwrap();
        let two = heat_step(&heat_step(&f, 0.1).unwrap(), 0.2).unwrap();
        let mut diff = one.clone();
        diff.add_scaled(&two, -1.0);
        assert!(diff.l2_norm() <= 1e-14 * one.l2_norm());
    }

    #[test]
    fn negative_time_rejected() {
        let grid = TorusGrid::new(2, 16).unwrap();
        let f = SpectralField::zeros(grid, 1);
        assert!(heat_step(&f, -0.1).is_err());
    }

    #[test]
    fn band_decay_exact_constants_for_l2() {
        let rep = heat_band_decay_check(&[0, 2, 4], &[0.0, 0.005, 0.02], 2.0, 11).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.lhs >= 0.5625 && rep.fitted_c <= 1.0 + 1e-12);
        assert_eq!(rep.samples, 9);
    }

    #[test]
    fn band_decay_finite_fit_for_sup_norm() {
        let rep =
            heat_band_decay_check(&[1, 3], &[0.0, 0.01, 0.05], f64::INFINITY, 12).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.fitted_c.is_finite() && rep.lhs > 0.0);
    }

    #[test]
    fn band_decay_validates_arguments() {
        assert!(heat_band_decay_check(&[], &[0.1], 2.0, 1).is_err());
        assert!(heat_band_decay_check(&[0], &[], 2.0, 1).is_err());
        assert!(heat_band_decay_check(&[-1], &[0.1], 2.0, 1).is_err());
        assert!(heat_band_decay_check(&[0], &[-0.1], 2.0, 1).is_err());
        assert!(heat_band_decay_check(&[99], &[0.1], 2.0, 1).is_err());
    }
}
