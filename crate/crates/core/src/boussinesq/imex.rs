//! Production time stepper for the coupled system: the stiff diffusion is
//! folded into an exact integrating factor while transport, buoyancy, and
//! sources advance with classical fourth-order Runge-Kutta stages. One
//! stepper also serves the spectrally truncated scheme used to exhibit
//! approximate solutions, switched by a truncation setting.
//!
//! ```ignore
//! let next = boussinesq_step(&state, 1e-3)?;
//! let (hist, ledger) = boussinesq_solve(&theta0, &u0, &params, 1.0, 1e-3, 10, 2.0)?;
//! ```

use crate::boussinesq::diagnostics::EnergyAccumulator;
use crate::boussinesq::{BoussinesqState, EnergyLedger, FlowHistory, PhysicsParams};
use crate::error::{Error, Result};
use crate::evolution::steps_for;
use crate::field::SpectralField;
use crate::grid::TorusGrid;
use crate::ops::{self, ProductSpace};

/// Advective stability bound for the explicit stages, matching the
/// transport layer: `max|u| dt n / (2 pi) <= 1/2`.
const CFL_LIMIT: f64 = 0.5;

/// Scalar and velocity advanced together through one Runge-Kutta stage.
#[derive(Clone)]
pub(crate) struct Pair {
    pub th: SpectralField,
    pub u: SpectralField,
}

impl Pair {
    fn add_scaled(&mut self, other: &Pair, a: f64) {
        self.th.add_scaled(&other.th, a);
        self.u.add_scaled(&other.u, a);
    }

    fn apply(&mut self, m: &Mult) {
        apply_multiplier(&mut self.th, &m.th);
        apply_multiplier(&mut self.u, &m.u);
    }
}

/// Precomputed diagonal diffusion factors for one field pair.
struct Mult {
    th: Vec<f64>,
    u: Vec<f64>,
}

/// Half-step and full-step integrating factors for a fixed `dt`.
pub(crate) struct Semigroup {
    half: Mult,
    full: Mult,
}

fn apply_multiplier(f: &mut SpectralField, m: &[f64]) {
    for c in 0..f.ncomp() {
        for (z, &s) in f.component_mut(c).iter_mut().zip(m) {
            *z *= s;
        }
    }
}

/// Integrating-factor Runge-Kutta stepper for the coupled system. The
/// default configuration integrates the full dealiased equations; the
/// truncated configuration mollifies the advecting velocity and projects
/// every nonlinear term onto a fixed ball of modes.
pub struct CoupledStepper {
    grid: TorusGrid,
    params: PhysicsParams,
    ps: ProductSpace,
    /// `Some((n, r))` selects the truncated scheme: nonlinearities are
    /// projected onto `|k| <= n` and the advecting fields mollified at
    /// radius `r` (`r = 0` skips mollification).
    truncation: Option<(u32, f64)>,
}

impl CoupledStepper {
    /// Stepper for the full dealiased equations.
    pub fn production(grid: TorusGrid, params: PhysicsParams) -> Self {
        CoupledStepper { grid, params, ps: ProductSpace::new(grid), truncation: None }
    }

    /// Stepper for the spectrally truncated, mollified scheme. `n` must fit
    /// inside the dealiased band of the grid so truncated products stay
    /// exact; `r` is the mollifier radius, zero meaning none.
    pub fn truncated(grid: TorusGrid, params: PhysicsParams, n: u32, r: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument("truncation index must be >= 1".into()));
        }
        if i64::from(n) > grid.dealias_limit() {
            return Err(Error::Argument(format!(
                "truncation index {n} exceeds the dealiased band |k| <= {} of the grid",
                grid.dealias_limit()
            )));
        }
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::Argument(format!("mollifier radius must be finite and >= 0, got {r}")));
        }
        Ok(CoupledStepper { grid, params, ps: ProductSpace::new(grid), truncation: Some((n, r)) })
    }

    pub(crate) fn truncation(&self) -> Option<(u32, f64)> {
        self.truncation
    }

    /// Exact diffusion factors over half and full steps of `dt`. The full
    /// factor is the square of the half factor so that composing two half
    /// steps reproduces one full step bit for bit.
    pub(crate) fn semigroup(&self, dt: f64) -> Semigroup {
        let len = self.grid.len();
        let (nu, kappa) = (self.params.nu, self.params.kappa);
        let mut half = Mult { th: vec![0.0; len], u: vec![0.0; len] };
        for flat in 0..len {
            let ksq = self.grid.freq_sq(flat);
            half.th[flat] = (-0.5 * kappa * ksq * dt).exp();
            half.u[flat] = (-0.5 * nu * ksq * dt).exp();
        }
        let full = Mult {
            th: half.th.iter().map(|&s| s * s).collect(),
            u: half.u.iter().map(|&s| s * s).collect(),
        };
        Semigroup { half, full }
    }

    /// Explicit right-hand side: scalar transport plus sources, and the
    /// solenoidal projection of convection, buoyancy, and body force.
    fn rhs(&mut self, th: &SpectralField, u: &SpectralField) -> Result<Pair> {
        match self.truncation {
            None => {
                let mut dth = self.ps.div_flux(u, th)?;
                dth.scale(-1.0);
                if let Some(src) = &self.params.theta_source {
                    dth.add_scaled(src, 1.0);
                }
                let conv = self.ps.div_tensor(u)?;
                let mut du = buoyancy_embed(th);
                du.add_scaled(&conv, -1.0);
                if let Some(src) = &self.params.momentum_source {
                    du.add_scaled(src, 1.0);
                }
                ops::leray_project(&mut du);
                Ok(Pair { th: dth, u: du })
            }
            Some((n, r)) => {
                let ur = if r > 0.0 { ops::mollify(u, r)? } else { u.clone() };
                let thr = if r > 0.0 { ops::mollify(th, r)? } else { th.clone() };
                let mut dth = ops::friedrichs_truncate(&self.ps.advect(&ur, th)?, n)?;
                dth.scale(-1.0);
                if let Some(src) = &self.params.theta_source {
                    dth.add_scaled(&ops::friedrichs_truncate(src, n)?, 1.0);
                }
                let adv = ops::friedrichs_truncate(&self.ps.advect(&ur, u)?, n)?;
                let mut du = buoyancy_embed(&thr);
                du.add_scaled(&adv, -1.0);
                if let Some(src) = &self.params.momentum_source {
                    du.add_scaled(&ops::friedrichs_truncate(src, n)?, 1.0);
                }
                ops::leray_project(&mut du);
                Ok(Pair { th: dth, u: du })
            }
        }
    }

    /// Non-solenoidal remainder of the momentum right-hand side, the
    /// gradient of the pressure that enforces incompressibility.
    pub fn pressure_gradient(&mut self, th: &SpectralField, u: &SpectralField) -> Result<SpectralField> {
        let raw = match self.truncation {
            None => {
                let conv = self.ps.div_tensor(u)?;
                let mut raw = buoyancy_embed(th);
                raw.add_scaled(&conv, -1.0);
                if let Some(src) = &self.params.momentum_source {
                    raw.add_scaled(src, 1.0);
                }
                raw
            }
            Some((n, r)) => {
                let ur = if r > 0.0 { ops::mollify(u, r)? } else { u.clone() };
                let thr = if r > 0.0 { ops::mollify(th, r)? } else { th.clone() };
                let adv = ops::friedrichs_truncate(&self.ps.advect(&ur, u)?, n)?;
                let mut raw = buoyancy_embed(&thr);
                raw.add_scaled(&adv, -1.0);
                if let Some(src) = &self.params.momentum_source {
                    raw.add_scaled(&ops::friedrichs_truncate(src, n)?, 1.0);
                }
                raw
            }
        };
        let mut projected = raw.clone();
        ops::leray_project(&mut projected);
        let mut grad = raw;
        grad.add_scaled(&projected, -1.0);
        Ok(grad)
    }

    /// One integrating-factor Runge-Kutta step of size `dt`. Diffusion is
    /// exact through the precomputed factors; the explicit stages see the
    /// transformed variable so the classical order four is retained.
    pub(crate) fn step_pair(&mut self, v: &Pair, dt: f64, sg: &Semigroup) -> Result<Pair> {
        let k1 = self.rhs(&v.th, &v.u)?;
        let mut a = v.clone();
        a.add_scaled(&k1, 0.5 * dt);
        a.apply(&sg.half);
        let k2 = self.rhs(&a.th, &a.u)?;
        let mut b = v.clone();
        b.apply(&sg.half);
        b.add_scaled(&k2, 0.5 * dt);
        let k3 = self.rhs(&b.th, &b.u)?;
        let mut e2v = v.clone();
        e2v.apply(&sg.full);
        let mut ek3 = k3;
        ek3.apply(&sg.half);
        let mut c = e2v.clone();
        c.add_scaled(&ek3, dt);
        let k4 = self.rhs(&c.th, &c.u)?;
        let mut e2k1 = k1;
        e2k1.apply(&sg.full);
        let mut ek2 = k2;
        ek2.apply(&sg.half);
        let mut out = e2v;
        out.add_scaled(&e2k1, dt / 6.0);
        out.add_scaled(&ek2, dt / 3.0);
        out.add_scaled(&ek3, dt / 3.0);
        out.add_scaled(&k4, dt / 6.0);
        Ok(out)
    }

    pub(crate) fn check_cfl(&self, max_speed: f64, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Argument("time step must be positive and finite".into()));
        }
        let n = self.grid.n() as f64;
        let cfl = max_speed * dt * n / (2.0 * std::f64::consts::PI);
        if cfl > CFL_LIMIT {
            return Err(Error::StepSize {
                suggested_dt: CFL_LIMIT * 2.0 * std::f64::consts::PI / (max_speed * n),
                context: "advective CFL for the coupled stepper".into(),
            });
        }
        Ok(())
    }
}

/// Embeds a mean-free scalar as a force along the last coordinate axis.
pub(crate) fn buoyancy_embed(th: &SpectralField) -> SpectralField {
    let grid = th.grid();
    let mut out = SpectralField::zeros(grid, grid.dim());
    out.component_mut(grid.dim() - 1).copy_from_slice(th.component(0));
    out
}

/// Advances one state by `dt`, refreshing the pressure gradient at the new
/// time. Convenience wrapper that builds a throwaway stepper; use
/// `boussinesq_solve` for whole trajectories.
pub fn boussinesq_step(state: &BoussinesqState, dt: f64) -> Result<BoussinesqState> {
    let grid = state.theta.grid();
    let mut stepper = CoupledStepper::production(grid, state.params.clone());
    stepper.check_cfl(state.u.max_speed(), dt)?;
    let sg = stepper.semigroup(dt);
    let pair = Pair { th: state.theta.clone(), u: state.u.clone() };
    let next = stepper.step_pair(&pair, dt, &sg)?;
    let pressure_grad = stepper.pressure_gradient(&next.th, &next.u)?;
    Ok(BoussinesqState {
        theta: next.th,
        u: next.u,
        pressure_grad,
        t: state.t + dt,
        params: state.params.clone(),
    })
}

/// Integrates the coupled system to `t_end` with uniform steps `dt`,
/// recording snapshots every `stride` steps plus both endpoints and an
/// energy ledger sampled at every step. `ledger_p` selects the scalar
/// Lebesgue exponent tracked by the ledger.
pub fn boussinesq_solve(
    theta0: &SpectralField,
    u0: &SpectralField,
    params: &PhysicsParams,
    t_end: f64,
    dt: f64,
    stride: usize,
    ledger_p: f64,
) -> Result<(FlowHistory, EnergyLedger)> {
    let state0 = BoussinesqState::new(theta0.clone(), u0.clone(), params.clone())?;
    let mut stepper = CoupledStepper::production(state0.theta.grid(), params.clone());
    solve_with(&mut stepper, state0.theta, state0.u, t_end, dt, stride, ledger_p)
}

/// Shared trajectory loop for the production and truncated steppers.
pub(crate) fn solve_with(
    stepper: &mut CoupledStepper,
    theta0: SpectralField,
    u0: SpectralField,
    t_end: f64,
    dt: f64,
    stride: usize,
    ledger_p: f64,
) -> Result<(FlowHistory, EnergyLedger)> {
    let grid = theta0.grid();
    let nsteps = steps_for(t_end, dt)?;
    let stride = stride.max(1);
    let work_radius = match stepper.truncation() {
        Some((_, r)) if r > 0.0 => Some(r),
        _ => None,
    };
    let work_scalar = move |th: &SpectralField| -> Result<SpectralField> {
        match work_radius {
            Some(r) => ops::mollify(th, r),
            None => Ok(th.clone()),
        }
    };
    let mut acc = EnergyAccumulator::new(
        ledger_p,
        stepper.params.nu,
        stepper.params.kappa,
        dt,
        grid.dim(),
    )?;
    let mut pair = Pair { th: theta0, u: u0 };
    let mut hist = FlowHistory::new(grid);
    acc.push_sample(0.0, &pair.th, &work_scalar(&pair.th)?, &pair.u);
    hist.push(0.0, pair.th.clone(), pair.u.clone())?;
    let sg = stepper.semigroup(dt);
    for i in 0..nsteps {
        stepper.check_cfl(pair.u.max_speed(), dt)?;
        pair = stepper.step_pair(&pair, dt, &sg)?;
        let t = (i + 1) as f64 * dt;
        acc.push_sample(t, &pair.th, &work_scalar(&pair.th)?, &pair.u);
        if (i + 1) % stride == 0 || i + 1 == nsteps {
            hist.push(t, pair.th.clone(), pair.u.clone())?;
        }
    }
    Ok((hist, acc.finish()?))
}
