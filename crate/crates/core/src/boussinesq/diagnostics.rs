//! Trajectory diagnostics for the coupled system: the per-step energy
//! ledger with its identity and envelope report, the weak-norm smallness
//! envelope in three dimensions, the two-trajectory separation probe built
//! on loss-of-regularity weights, and the breakdown-criterion monitor.
//!
//! ```ignore
//! let report = energy_report(&ledger)?;
//! let series = blowup_monitor(&hist)?;
//! ```

use crate::boussinesq::FlowHistory;
use crate::error::{Error, Result};
use crate::evolution::losing_weights;
use crate::field::SpectralField;
use crate::littlewood_paley::{
    besov_norm, tilde_norm, weak_lp_quasinorm, BandNormTable, BesovSpec, Convention,
    DyadicPartition,
};
use crate::ops;
use crate::randfield;
use crate::report::EstimateReport;
use crate::trajectory::TrajectoryRecord;

/// Largest tolerated relative defect of the kinetic energy identity at the
/// documented production step sizes; the semidiscrete identity is exact, so
/// the defect measures pure time-integration error.
pub const TOL_ENERGY_RESIDUAL: f64 = 1e-6;

/// Largest tolerated relative growth of the tracked scalar Lebesgue norm.
/// Pure transport conserves it; diffusion may only shrink it, so growth
/// beyond this tolerance flags a scheme defect.
pub const TOL_THETA_DRIFT: f64 = 1e-6;

/// Fixed seed for the solenoidal perturbation pattern used by the
/// separation probe, so probes at different amplitudes share one shape.
const PROBE_SEED: u64 = 41;

/// Real inner product of a scalar against one velocity component.
pub(crate) fn scalar_axis_inner(th: &SpectralField, u: &SpectralField, axis: usize) -> f64 {
    let sum: f64 = th
        .component(0)
        .iter()
        .zip(u.component(axis))
        .map(|(a, b)| (a * b.conj()).re)
        .sum();
    th.grid().volume() * sum
}

/// Per-step energy bookkeeping filled in by the solvers: kinetic energy,
/// accumulated viscous dissipation, accumulated buoyancy work, and the
/// scalar Lebesgue norm for a fixed exponent `p`.
#[derive(Clone, Debug)]
pub struct EnergyLedger {
    times: Vec<f64>,
    kinetic: Vec<f64>,
    dissipation: Vec<f64>,
    buoyancy_work: Vec<f64>,
    theta_lp: Vec<f64>,
    p: f64,
    alpha: f64,
    nu: f64,
    kappa: f64,
}

impl EnergyLedger {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Squared velocity L2 norm per sample.
    pub fn kinetic(&self) -> &[f64] {
        &self.kinetic
    }

    /// `2 nu int_0^t ||grad u||^2` per sample.
    pub fn dissipation(&self) -> &[f64] {
        &self.dissipation
    }

    /// `2 int_0^t <theta, u_N>` per sample.
    pub fn buoyancy_work(&self) -> &[f64] {
        &self.buoyancy_work
    }

    /// Scalar Lebesgue norm per sample for the configured exponent.
    pub fn theta_lp(&self) -> &[f64] {
        &self.theta_lp
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Scaling exponent `1 - N (1/p - 1/2)` of the buoyancy envelope.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Streaming builder for `EnergyLedger`: the solvers feed one sample per
/// step and the integrals are assembled at the end with a fourth-order
/// composite rule so the quadrature error does not mask the scheme order.
pub(crate) struct EnergyAccumulator {
    p: f64,
    nu: f64,
    kappa: f64,
    dt: f64,
    dim: usize,
    times: Vec<f64>,
    kinetic: Vec<f64>,
    grad_sq: Vec<f64>,
    work_rate: Vec<f64>,
    theta_lp: Vec<f64>,
}

impl EnergyAccumulator {
    pub(crate) fn new(p: f64, nu: f64, kappa: f64, dt: f64, dim: usize) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::Argument(format!("ledger exponent must be finite and >= 1, got {p}")));
        }
        Ok(EnergyAccumulator {
            p,
            nu,
            kappa,
            dt,
            dim,
            times: Vec::new(),
            kinetic: Vec::new(),
            grad_sq: Vec::new(),
            work_rate: Vec::new(),
            theta_lp: Vec::new(),
        })
    }

    /// Records one sample. `work_scalar` is the scalar that actually enters
    /// the momentum equation (the mollified one for truncated schemes).
    pub(crate) fn push_sample(
        &mut self,
        t: f64,
        theta: &SpectralField,
        work_scalar: &SpectralField,
        u: &SpectralField,
    ) {
        self.times.push(t);
        let l2 = u.l2_norm();
        self.kinetic.push(l2 * l2);
        let g = u.homogeneous_sobolev_norm(1.0);
        self.grad_sq.push(g * g);
        self.work_rate
            .push(2.0 * scalar_axis_inner(work_scalar, u, u.ncomp() - 1));
        let lp = if (self.p - 2.0).abs() < 1e-12 { theta.l2_norm() } else { theta.lp_norm(self.p) };
        self.theta_lp.push(lp);
    }

    pub(crate) fn finish(self) -> Result<EnergyLedger> {
        let alpha = 1.0 - (self.dim as f64) * (1.0 / self.p - 0.5);
        let mut dissipation = running_integral_order4(self.dt, &self.grad_sq);
        for v in &mut dissipation {
            *v *= 2.0 * self.nu;
        }
        let buoyancy_work = running_integral_order4(self.dt, &self.work_rate);
        Ok(EnergyLedger {
            times: self.times,
            kinetic: self.kinetic,
            dissipation,
            buoyancy_work,
            theta_lp: self.theta_lp,
            p: self.p,
            alpha,
            nu: self.nu,
            kappa: self.kappa,
        })
    }
}

/// Running integral of uniformly spaced samples, exact on cubics: Simpson
/// panels at even offsets, three-eighths panels at odd offsets, and a
/// four-point polynomial rule for the very first interval.
fn running_integral_order4(dt: f64, g: &[f64]) -> Vec<f64> {
    let n = g.len();
    let mut out = vec![0.0; n];
    for i in 1..n {
        out[i] = if i == 1 {
            if n >= 4 {
                dt * (9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3]) / 24.0
            } else {
                0.5 * dt * (g[0] + g[1])
            }
        } else if i % 2 == 0 {
            out[i - 2] + dt / 3.0 * (g[i - 2] + 4.0 * g[i - 1] + g[i])
        } else {
            out[i - 3] + 3.0 * dt / 8.0 * (g[i - 3] + 3.0 * g[i - 2] + 3.0 * g[i - 1] + g[i])
        };
    }
    out
}

/// Trapezoid rule on possibly nonuniform sample times.
pub(crate) fn trapezoid(times: &[f64], vals: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 1..times.len() {
        acc += 0.5 * (times[i] - times[i - 1]) * (vals[i] + vals[i - 1]);
    }
    acc
}

/// Evaluates the kinetic energy identity and the buoyancy-driven growth
/// envelope on a ledger. The identity compares `||u||^2 + 2 nu int ||grad
/// u||^2` against `||u0||^2 + 2 int <theta, u_N>` sample by sample; the
/// envelope fits the least constant with `||u0||^2 + nu^(alpha-1) t^(alpha+1)
/// ||theta0||_p^2` on the right.
pub fn energy_report(ledger: &EnergyLedger) -> Result<EstimateReport> {
    if ledger.len() < 2 {
        return Err(Error::Argument("energy ledger needs at least two samples".into()));
    }
    let k0 = ledger.kinetic[0];
    let th0 = ledger.theta_lp[0];
    let mut res_sup: f64 = 0.0;
    let mut env_c: f64 = 0.0;
    let mut drift_up: f64 = 0.0;
    let mut drift_abs: f64 = 0.0;
    for i in 0..ledger.len() {
        let lhs = ledger.kinetic[i] + ledger.dissipation[i];
        let rhs = k0 + ledger.buoyancy_work[i];
        let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        res_sup = res_sup.max((lhs - rhs).abs() / scale);
        let t = ledger.times[i];
        let denom = k0 + ledger.nu.powf(ledger.alpha - 1.0) * t.powf(ledger.alpha + 1.0) * th0 * th0;
        if denom > 0.0 {
            env_c = env_c.max(lhs / denom);
        }
        let dth = (ledger.theta_lp[i] - th0) / th0.max(f64::MIN_POSITIVE);
        drift_up = drift_up.max(dth);
        drift_abs = drift_abs.max(dth.abs());
    }
    // Diffusion is allowed to shrink the scalar norm, so only growth counts
    // against a diffusive run.
    let drift = if ledger.kappa > 0.0 { drift_up } else { drift_abs };
    let mut report = EstimateReport::new("boussinesq_energy");
    report.lhs = res_sup;
    report.rhs = TOL_ENERGY_RESIDUAL;
    report.fitted_c = env_c;
    report.samples = ledger.len();
    report.pass = res_sup <= TOL_ENERGY_RESIDUAL && drift <= TOL_THETA_DRIFT && env_c.is_finite();
    report.notes.push(format!(
        "energy identity relative defect {res_sup:.3e} over {} samples",
        ledger.len()
    ));
    report.notes.push(format!(
        "scalar L^{} drift {:.3e} with kappa = {:.3e}",
        ledger.p, drift, ledger.kappa
    ));
    report
        .notes
        .push(format!("growth envelope constant {env_c:.4e} with alpha = {}", ledger.alpha));
    Ok(report)
}

/// Tracks the weak L^3 norm of a three-dimensional velocity against the
/// scale-invariant size of the initial data, `||u0||_{L^{3,inf}} +
/// ||theta0||_{L^1} / nu`. The fitted ratio should be order one and stable
/// under joint rescaling of the data; a ratio beyond 100 fails the check.
pub fn smallness_monitor(hist: &FlowHistory, nu: f64) -> Result<EstimateReport> {
    if hist.is_empty() {
        return Err(Error::Argument("history has no snapshots".into()));
    }
    if hist.grid().dim() != 3 {
        return Err(Error::Argument("weak-norm smallness envelope needs a 3d grid".into()));
    }
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::Argument(format!("viscosity must be finite and positive, got {nu}")));
    }
    let rhs = weak_lp_quasinorm(hist.velocity.field(0), 3.0)?
        + hist.theta.field(0).lp_norm(1.0) / nu;
    let mut lhs: f64 = 0.0;
    let mut worst_t = 0.0;
    for (t, u) in hist.velocity.iter() {
        let w = weak_lp_quasinorm(u, 3.0)?;
        if w > lhs {
            lhs = w;
            worst_t = t;
        }
    }
    let mut report = EstimateReport::new("smallness_envelope");
    report.lhs = lhs;
    report.rhs = rhs;
    report.fitted_c = if rhs > 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    report.samples = hist.len();
    report.pass = report.fitted_c.is_finite() && report.fitted_c <= 100.0;
    report.notes.push(format!(
        "weak L3 peak {lhs:.4e} at t = {worst_t:.3}, data size {rhs:.4e}, ratio {:.4e}",
        report.fitted_c
    ));
    Ok(report)
}

/// Space-time norm `L^1_t H^2` of a velocity record, evaluated blockwise
/// with the time integral inside the band sum.
pub fn tilde_h2_norm(traj: &TrajectoryRecord) -> Result<f64> {
    let part = DyadicPartition::new(traj.grid());
    let spec = BesovSpec::new(2.0, 2.0, 2.0, Convention::Nonhomogeneous)?;
    tilde_norm(&part, traj, &spec, 1.0)
}

/// Runs the production scheme twice, once from `(theta0, u0)` and once with
/// a fixed solenoidal perturbation of size `perturbation_scale` added to
/// `u0`, and measures the separation in the weighted norms that control
/// two-dimensional uniqueness: a weighted sup at regularity `-3/2` plus a
/// viscous integral one band-weight higher, both damped by the
/// loss-of-regularity weights of the base run.
pub fn uniqueness_probe(
    theta0: &SpectralField,
    u0: &SpectralField,
    perturbation_scale: f64,
    params: &crate::boussinesq::PhysicsParams,
    t_end: f64,
    dt: f64,
) -> Result<EstimateReport> {
    let grid = theta0.grid();
    if grid.dim() != 2 {
        return Err(Error::Argument("separation probe needs a 2d grid".into()));
    }
    if !(perturbation_scale >= 0.0 && perturbation_scale.is_finite()) {
        return Err(Error::Argument(format!(
            "perturbation scale must be finite and >= 0, got {perturbation_scale}"
        )));
    }
    let nsteps = crate::evolution::steps_for(t_end, dt)?;
    let stride = (nsteps / 80).max(1);
    let (base, _) = crate::boussinesq::boussinesq_solve(theta0, u0, params, t_end, dt, stride, 2.0)?;
    let u0b = if perturbation_scale > 0.0 {
        let mut w = randfield::velocity(grid, 1, 3, 1.0, 1.0, PROBE_SEED);
        let norm = w.l2_norm();
        if norm == 0.0 {
            return Err(Error::Argument("perturbation pattern is empty".into()));
        }
        w.scale(perturbation_scale / norm);
        let mut v = u0.clone();
        v.add_scaled(&w, 1.0);
        v
    } else {
        u0.clone()
    };
    let (pert, _) =
        crate::boussinesq::boussinesq_solve(theta0, &u0b, params, t_end, dt, stride, 2.0)?;
    let s = -1.5;
    let weights = losing_weights(&base.velocity, s, None)?;
    let part = DyadicPartition::new(grid);
    let table = BandNormTable::new(&part, Convention::Nonhomogeneous, 0);
    let times = base.times().to_vec();
    let nb = part.band_count();
    let mut theta_sup: f64 = 0.0;
    let mut u_sup: f64 = 0.0;
    let mut integrand = vec![vec![0.0; times.len()]; nb];
    for i in 0..times.len() {
        let t = times[i];
        let mut dth = base.theta.field(i).clone();
        dth.add_scaled(pert.theta.field(i), -1.0);
        let mut du = base.velocity.field(i).clone();
        du.add_scaled(pert.velocity.field(i), -1.0);
        let th_norms = table.l2_norms(&dth);
        let u_norms = table.l2_norms(&du);
        for q in part.bands() {
            let slot = part.band_slot(q);
            let e = weights.eps_at(t, q);
            theta_sup = theta_sup.max((s * q as f64 - e).exp2() * th_norms[slot]);
            u_sup = u_sup.max((s * q as f64 - e).exp2() * u_norms[slot]);
            integrand[slot][i] = ((s + 2.0) * q as f64 - e).exp2() * u_norms[slot];
        }
    }
    let mut u_int: f64 = 0.0;
    for series in &integrand {
        u_int = u_int.max(params.nu * trapezoid(&times, series));
    }
    let lhs = u_sup + u_int;
    let mut report = EstimateReport::new("uniqueness_linear_response");
    report.lhs = lhs;
    report.rhs = perturbation_scale;
    report.fitted_c = if perturbation_scale > 0.0 {
        lhs / perturbation_scale
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    report.samples = times.len();
    report.pass = if perturbation_scale == 0.0 {
        lhs == 0.0 && theta_sup == 0.0
    } else {
        lhs.is_finite() && weights.monotone() && weights.slope_condition_holds()
    };
    report.notes.push(format!(
        "weighted scalar separation {theta_sup:.4e}, velocity separation {lhs:.4e}"
    ));
    report.notes.push(format!(
        "weights: smallness {:.4e} of bound {:.4e}, calibration {:.4e}",
        weights.smallness(),
        weights.slope_bound(),
        weights.c_weight()
    ));
    report
        .notes
        .push(format!("base run L1-in-time H2 norm {:.4e}", tilde_h2_norm(&base.velocity)?));
    Ok(report)
}

/// Breakdown-criterion time series: the running integral of the largest
/// velocity gradient and the flat-regularity band sum of the scalar.
#[derive(Clone, Debug)]
pub struct BlowupSeries {
    pub times: Vec<f64>,
    /// `max_x |grad u|` (Frobenius) per snapshot.
    pub grad_sup: Vec<f64>,
    /// Running trapezoid integral of `grad_sup`.
    pub grad_integral: Vec<f64>,
    /// Scalar norm `sum_q ||Delta_q theta||_{L^N}` per snapshot.
    pub theta_besov: Vec<f64>,
}

impl BlowupSeries {
    /// Largest accumulated gradient integral, the quantity whose finiteness
    /// rules out breakdown on the covered horizon.
    pub fn final_integral(&self) -> f64 {
        self.grad_integral.last().copied().unwrap_or(0.0)
    }
}

/// Computes the breakdown-criterion series for a trajectory pair.
pub fn blowup_monitor(hist: &FlowHistory) -> Result<BlowupSeries> {
    if hist.is_empty() {
        return Err(Error::Argument("history has no snapshots".into()));
    }
    let grid = hist.grid();
    let part = DyadicPartition::new(grid);
    let spec = BesovSpec::new(0.0, grid.dim() as f64, 1.0, Convention::Homogeneous)?;
    let times = hist.times().to_vec();
    let mut grad_sup = Vec::with_capacity(times.len());
    let mut theta_besov = Vec::with_capacity(times.len());
    for i in 0..times.len() {
        let grad = ops::velocity_gradient(hist.velocity.field(i));
        grad_sup.push(grad.lp_norm(f64::INFINITY));
        theta_besov.push(besov_norm(&part, hist.theta.field(i), &spec)?);
    }
    let mut grad_integral = vec![0.0; times.len()];
    for i in 1..times.len() {
        grad_integral[i] = grad_integral[i - 1]
            + 0.5 * (times[i] - times[i - 1]) * (grad_sup[i] + grad_sup[i - 1]);
    }
    Ok(BlowupSeries { times, grad_sup, grad_integral, theta_besov })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boussinesq::{boussinesq_solve, taylor_green, PhysicsParams};
    use crate::grid::TorusGrid;
    use crate::report::stable_within;

    #[test]
    fn running_integral_is_exact_on_cubics() {
        let dt = 0.1;
        let g: Vec<f64> = (0..9).map(|i| (dt * i as f64).powi(3)).collect();
        let out = running_integral_order4(dt, &g);
        for (i, v) in out.iter().enumerate() {
            let exact = (dt * i as f64).powi(4) / 4.0;
            assert!(
                (v - exact).abs() <= 1e-13 * exact.max(1.0),
                "sample {i}: got {v}, want {exact}"
            );
        }
    }

    #[test]
    fn energy_report_passes_on_a_consistent_ledger_and_flags_scalar_growth() {
        let times: Vec<f64> = (0..11).map(|i| 0.1 * i as f64).collect();
        let dissipation: Vec<f64> = times.iter().map(|t| 0.3 * t).collect();
        let buoyancy_work: Vec<f64> = times.iter().map(|t| 0.1 * t).collect();
        let kinetic: Vec<f64> =
            times.iter().zip(&dissipation).zip(&buoyancy_work).map(|((_, d), w)| 1.0 + w - d).collect();
        let ledger = EnergyLedger {
            times: times.clone(),
            kinetic,
            dissipation,
            buoyancy_work,
            theta_lp: vec![2.0; times.len()],
            p: 2.0,
            alpha: 1.0,
            nu: 0.5,
            kappa: 0.0,
        };
        let report = energy_report(&ledger).unwrap();
        assert!(report.pass, "consistent ledger must pass: {:?}", report.notes);
        assert_eq!(report.lhs, 0.0);
        assert!(report.fitted_c.is_finite() && report.fitted_c > 0.0);
        let mut grown = ledger.clone();
        grown.theta_lp[10] = 2.1;
        let report = energy_report(&grown).unwrap();
        assert!(!report.pass, "five percent scalar growth must fail");
    }

    #[test]
    fn energy_report_allows_diffusive_scalar_decay() {
        let times: Vec<f64> = (0..6).map(|i| 0.1 * i as f64).collect();
        let ledger = EnergyLedger {
            times: times.clone(),
            kinetic: vec![1.0; times.len()],
            dissipation: vec![0.0; times.len()],
            buoyancy_work: vec![0.0; times.len()],
            theta_lp: times.iter().map(|t| 2.0 * (-t).exp()).collect(),
            p: 2.0,
            alpha: 1.0,
            nu: 0.5,
            kappa: 0.1,
        };
        let report = energy_report(&ledger).unwrap();
        assert!(report.pass, "decay under diffusion must pass: {:?}", report.notes);
    }

    #[test]
    fn smallness_monitor_validates_dimension_and_passes_trivially_on_rest() {
        let grid2 = TorusGrid::new(2, 16).unwrap();
        let mut flat = FlowHistory::new(grid2);
        flat.push(0.0, SpectralField::zeros(grid2, 1), SpectralField::zeros(grid2, 2)).unwrap();
        assert!(smallness_monitor(&flat, 1.0).is_err());
        let grid3 = TorusGrid::new(3, 16).unwrap();
        let mut rest = FlowHistory::new(grid3);
        rest.push(0.0, SpectralField::zeros(grid3, 1), SpectralField::zeros(grid3, 3)).unwrap();
        let report = smallness_monitor(&rest, 1.0).unwrap();
        assert!(report.pass);
        assert_eq!(report.fitted_c, 0.0);
        assert!(smallness_monitor(&rest, 0.0).is_err());
    }

    #[test]
    fn separation_probe_is_exactly_zero_without_perturbation_and_linear_with() {
        let grid = TorusGrid::new(2, 32).unwrap();
        let theta0 = crate::randfield::scalar(grid, 1, 3, 1.0, 5e-3, 111);
        let u0 = crate::randfield::velocity(grid, 1, 3, 1.0, 5e-3, 112);
        let params = PhysicsParams::new(0.5, 0.0).unwrap();
        let (t_end, dt) = (0.1, 2e-3);
        let zero = uniqueness_probe(&theta0, &u0, 0.0, &params, t_end, dt).unwrap();
        assert!(zero.pass, "identical data must give exactly zero separation");
        assert_eq!(zero.lhs, 0.0);
        let mut fitted = Vec::new();
        for eps in [1e-2, 1e-3, 1e-4] {
            let report = uniqueness_probe(&theta0, &u0, eps, &params, t_end, dt).unwrap();
            assert!(report.pass, "probe at {eps:e} failed: {:?}", report.notes);
            fitted.push(report.fitted_c);
        }
        assert!(
            stable_within(&fitted, 0.2),
            "linear response coefficients vary too much: {fitted:?}"
        );
    }

    #[test]
    fn blowup_monitor_matches_the_vortex_decay_oracle() {
        let grid = TorusGrid::new(2, 32).unwrap();
        let nu = 0.1;
        let u0 = taylor_green(grid, 1.0).unwrap();
        let theta0 = SpectralField::zeros(grid, 1);
        let params = PhysicsParams::new(nu, 0.0).unwrap();
        let t_end = 1.0;
        let (hist, _) = boussinesq_solve(&theta0, &u0, &params, t_end, 2e-3, 6, 2.0).unwrap();
        let series = blowup_monitor(&hist).unwrap();
        let sqrt2 = 2.0f64.sqrt();
        assert!((series.grad_sup[0] - sqrt2).abs() <= 1e-12);
        let exact = sqrt2 * (1.0 - (-2.0 * nu * t_end).exp()) / (2.0 * nu);
        let got = series.final_integral();
        assert!(
            (got - exact).abs() <= 1e-5 * exact,
            "gradient integral {got} differs from {exact}"
        );
        assert!(series.theta_besov.iter().all(|v| *v == 0.0));
    }
}
