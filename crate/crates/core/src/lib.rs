//! Pseudo-spectral solvers for buoyancy-driven incompressible flow on the
//! periodic torus, plus the dyadic (Littlewood-Paley / Besov / Lorentz)
//! analysis toolkit used to check the solver's conservation laws and a
//! priori estimates numerically.

pub mod boussinesq;
pub mod error;
pub mod evolution;
pub mod fft;
pub mod field;
pub mod grid;
pub mod io;
pub mod littlewood_paley;
pub mod ops;
pub mod paraproduct;
pub mod randfield;
pub mod report;
pub mod trajectory;

pub use error::{Error, Result};
pub use field::SpectralField;
pub use grid::TorusGrid;
