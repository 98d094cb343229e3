//! Time integration on the spectral grid: exact heat stepping, the unsteady
//! Stokes solver with an exponential-trapezoid force quadrature, dealiased
//! transport schemes, loss-of-regularity weights, and the a priori estimate
//! checkers that consume the resulting trajectories.
//!
//! ```ignore
//! let sol = stokes_solve(&u0, |_| Ok(force.clone()), nu, 1.0, 1e-2, 10)?;
//! let report = heat_band_decay_check(&[0, 2, 4], &[0.0, 0.02, 0.1], 2.0, 7)?;
//! ```

mod duhamel;
mod heat;
mod losing;
mod stokes;
mod transport;

pub use duhamel::{lorentz_duhamel_check, lorentz_duhamel_sweep, DuhamelVariant};
pub use heat::{heat_band_decay_check, heat_step};
pub use losing::{
    losing_estimate_check, losing_weights, transport_diffusion_solve, LosingWeights,
};
pub use stokes::{
    stokes_regularity_check, stokes_regularity_sweep, stokes_solve, stokes_step, StokesSolution,
};
pub use transport::{
    shear_velocity, transport_besov_growth_check, transport_lp_conservation_check, transport_solve,
    transport_step, TransportMethod, TransportStepper,
};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::ops;

/// Largest tolerated relative divergence residual for fields that must be
/// solenoidal (initial data, advecting velocities, solver output).
pub const TOL_DIVERGENCE: f64 = 1e-12;

/// Checks that `u` is divergence-free to `TOL_DIVERGENCE` relative to its
/// own size.
pub(crate) fn require_solenoidal(u: &SpectralField, what: &str) -> Result<()> {
    let res = ops::divergence(u).l2_norm();
    if res > TOL_DIVERGENCE * u.l2_norm() {
        return Err(Error::Argument(format!(
            "{what} must be divergence-free (relative residual {:.3e})",
            res / u.l2_norm()
        )));
    }
    Ok(())
}

/// Number of uniform steps covering `t_end`; rejects horizons that are not a
/// whole number of steps so recorded times stay exact multiples of `dt`.
pub(crate) fn steps_for(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Argument("time step must be positive".into()));
    }
    if !t_end.is_finite() || t_end <= 0.0 {
        return Err(Error::Argument("horizon must be positive".into()));
    }
    let n = (t_end / dt).round();
    if n < 1.0 || (n * dt - t_end).abs() > 1e-9 * t_end.max(dt) {
        return Err(Error::Argument(
            "horizon must be a whole number of steps".into(),
        ));
    }
    Ok(n as usize)
}
