//! Coupled buoyancy-driven flow: a temperature scalar transported by an
//! incompressible velocity that it forces through gravity along the last
//! coordinate axis. The velocity diffuses with viscosity `nu`; the scalar
//! is purely transported unless a nonnegative diffusivity `kappa` is set.
//!
//! ```ignore
//! let params = PhysicsParams::new(0.1, 0.0)?;
//! let (hist, ledger) = boussinesq_solve(&theta0, &u0, &params, 1.0, 1e-3, 10, 2.0)?;
//! let report = energy_report(&ledger)?;
//! ```

mod diagnostics;
mod friedrichs;
mod imex;
mod picard;

pub use diagnostics::{
    blowup_monitor, energy_report, smallness_monitor, tilde_h2_norm, uniqueness_probe,
    BlowupSeries, EnergyLedger, TOL_ENERGY_RESIDUAL, TOL_THETA_DRIFT,
};
pub use friedrichs::friedrichs_solve;
pub use imex::{boussinesq_solve, boussinesq_step, CoupledStepper};
pub use picard::{picard_solve, IterationLedger, IterationRow};

use crate::error::{Error, Result};
use crate::evolution::TOL_DIVERGENCE;
use crate::field::SpectralField;
use crate::grid::TorusGrid;
use crate::ops;
use crate::trajectory::TrajectoryRecord;

/// Physical coefficients and optional steady sources for the coupled system.
/// Gravity acts along the last coordinate axis of the grid in use.
#[derive(Clone, Debug)]
pub struct PhysicsParams {
    /// Kinematic viscosity acting on the velocity; must be nonnegative.
    pub nu: f64,
    /// Scalar diffusivity; zero gives pure transport of the scalar.
    pub kappa: f64,
    /// Optional steady source added to the scalar equation.
    pub theta_source: Option<SpectralField>,
    /// Optional steady body force added to the momentum equation before the
    /// solenoidal projection.
    pub momentum_source: Option<SpectralField>,
}

impl PhysicsParams {
    /// Validates the coefficients; sources start empty.
    pub fn new(nu: f64, kappa: f64) -> Result<Self> {
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::Argument(format!("viscosity must be finite and >= 0, got {nu}")));
        }
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::Argument(format!(
                "scalar diffusivity must be finite and >= 0, got {kappa}"
            )));
        }
        Ok(PhysicsParams { nu, kappa, theta_source: None, momentum_source: None })
    }

    /// Attaches a steady mean-zero scalar source.
    pub fn with_theta_source(mut self, src: SpectralField) -> Result<Self> {
        if src.ncomp() != 1 {
            return Err(Error::Argument("scalar source must have one component".into()));
        }
        require_mean_free(&src, "scalar source")?;
        self.theta_source = Some(src);
        Ok(self)
    }

    /// Attaches a steady mean-zero body force (projected at use).
    pub fn with_momentum_source(mut self, src: SpectralField) -> Result<Self> {
        if src.ncomp() != src.grid().dim() {
            return Err(Error::Argument("body force must have one component per axis".into()));
        }
        require_mean_free(&src, "body force")?;
        self.momentum_source = Some(src);
        Ok(self)
    }

    /// Checks that any attached source lives on `grid`.
    pub(crate) fn check_sources(&self, grid: TorusGrid) -> Result<()> {
        for (src, what) in [(&self.theta_source, "scalar source"), (&self.momentum_source, "body force")]
        {
            if let Some(f) = src {
                if f.grid() != grid {
                    return Err(Error::GridMismatch(format!("{what} grid differs from state grid")));
                }
            }
        }
        Ok(())
    }
}

/// Instantaneous solver state: scalar, velocity, the pressure gradient that
/// balances the non-solenoidal part of the momentum right-hand side, the
/// current time, and the coefficients. The scalar and velocity are mean-free
/// and the velocity is solenoidal.
#[derive(Clone, Debug)]
pub struct BoussinesqState {
    pub theta: SpectralField,
    pub u: SpectralField,
    pub pressure_grad: SpectralField,
    pub t: f64,
    pub params: PhysicsParams,
}

impl BoussinesqState {
    /// Builds a state at `t = 0`, zeroing the mean modes exactly and
    /// computing the initial pressure gradient from the momentum balance.
    pub fn new(theta: SpectralField, u: SpectralField, params: PhysicsParams) -> Result<Self> {
        let grid = theta.grid();
        if theta.ncomp() != 1 {
            return Err(Error::Argument("scalar field must have one component".into()));
        }
        if u.grid() != grid {
            return Err(Error::GridMismatch("scalar and velocity grids differ".into()));
        }
        if u.ncomp() != grid.dim() {
            return Err(Error::Argument("velocity must have one component per axis".into()));
        }
        params.check_sources(grid)?;
        crate::evolution::require_solenoidal(&u, "initial velocity")?;
        let mut theta = theta;
        let mut u = u;
        theta.zero_mean();
        u.zero_mean();
        let mut stepper = CoupledStepper::production(grid, params.clone());
        let pressure_grad = stepper.pressure_gradient(&theta, &u)?;
        Ok(BoussinesqState { theta, u, pressure_grad, t: 0.0, params })
    }

    /// Largest relative invariant violation: divergence of `u` and the mean
    /// modes of both fields, scaled by the field sizes.
    pub fn invariant_defect(&self) -> f64 {
        let div = ops::divergence(&self.u).l2_norm();
        let u_scale = self.u.l2_norm().max(f64::MIN_POSITIVE);
        let th_scale = self.theta.l2_norm().max(f64::MIN_POSITIVE);
        let mut worst = div / u_scale;
        for c in 0..self.u.ncomp() {
            worst = worst.max(self.u.mean(c).norm() / u_scale);
        }
        worst.max(self.theta.mean(0).norm() / th_scale)
    }

    /// Checks the state invariants at the shared divergence tolerance.
    pub fn check_invariants(&self) -> Result<()> {
        let defect = self.invariant_defect();
        if defect > TOL_DIVERGENCE {
            return Err(Error::Argument(format!(
                "state invariant violated: relative defect {defect:.3e}"
            )));
        }
        Ok(())
    }
}

/// Paired scalar and velocity trajectories sharing one snapshot clock.
#[derive(Clone, Debug)]
pub struct FlowHistory {
    pub theta: TrajectoryRecord,
    pub velocity: TrajectoryRecord,
}

impl FlowHistory {
    pub(crate) fn new(grid: TorusGrid) -> Self {
        FlowHistory { theta: TrajectoryRecord::new(grid), velocity: TrajectoryRecord::new(grid) }
    }

    pub(crate) fn push(&mut self, t: f64, theta: SpectralField, u: SpectralField) -> Result<()> {
        self.theta.push(t, theta)?;
        self.velocity.push(t, u)
    }

    pub fn grid(&self) -> TorusGrid {
        self.velocity.grid()
    }

    pub fn len(&self) -> usize {
        self.velocity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.velocity.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        self.velocity.times()
    }
}

/// Classical cellular vortex pattern `amp (sin x1 cos x2, -cos x1 sin x2)`,
/// a steady solution of the unforced Euler equations whose viscous evolution
/// is the exact profile decay `exp(-2 nu t)`. Two-dimensional grids only.
pub fn taylor_green(grid: TorusGrid, amp: f64) -> Result<SpectralField> {
    if grid.dim() != 2 {
        return Err(Error::Argument("cellular vortex field needs a 2d grid".into()));
    }
    let len = grid.len();
    let mut u1 = vec![0.0; len];
    let mut u2 = vec![0.0; len];
    for flat in 0..len {
        let p = grid.point(flat);
        u1[flat] = amp * p[0].sin() * p[1].cos();
        u2[flat] = -amp * p[0].cos() * p[1].sin();
    }
    SpectralField::from_physical(grid, &[&u1, &u2])
}

/// Rejects fields whose mean mode is not negligible relative to their size.
fn require_mean_free(f: &SpectralField, what: &str) -> Result<()> {
    let scale = f.l2_norm().max(f64::MIN_POSITIVE);
    for c in 0..f.ncomp() {
        if f.mean(c).norm() / scale > TOL_DIVERGENCE {
            return Err(Error::Argument(format!("{what} must be mean-free")));
        }
    }
    Ok(())
}
