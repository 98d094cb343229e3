//! Scenario configuration: the TOML grammar, its validation, and the
//! construction of initial fields from named recipes.
//!
//! ```toml
//! name = "cellular-decay"
//! seed = 7
//! [grid]
//! dim = 2
//! n = 128
//! [time]
//! dt = 1e-3
//! t_end = 1.0
//! [physics]
//! nu = 0.01
//! [initial]
//! velocity = { kind = "taylor_green", amplitude = 1.0 }
//! theta = { kind = "rest" }
//! [scheme]
//! kind = "imex"
//! [output]
//! diagnostics = ["energy", "blowup"]
//! ```

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;

use bqlab_core::boussinesq::{taylor_green, PhysicsParams};
use bqlab_core::evolution::shear_velocity;
use bqlab_core::{randfield, Error, Result, SpectralField, TorusGrid};

/// Parsed scenario file: everything a run needs except the output override.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Run label; names the output subdirectory.
    pub name: String,
    /// Base seed for recipes that do not carry their own.
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub grid: GridSection,
    pub time: TimeSection,
    pub physics: PhysicsSection,
    pub initial: InitialSection,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_seed() -> u64 {
    7
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    pub t_end: f64,
    /// Steps between recorded snapshots; default aims at about 100 rows.
    #[serde(default)]
    pub snapshot_stride: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    pub nu: f64,
    #[serde(default)]
    pub kappa: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub theta: FieldRecipe,
    pub velocity: FieldRecipe,
}

/// Named initial-data recipes. `mode` places a single cosine and applies to
/// the scalar only; `taylor_green` and `shear` build velocities.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldRecipe {
    Rest,
    TaylorGreen {
        amplitude: f64,
    },
    Shear {
        amplitude: f64,
    },
    Mode {
        k: Vec<i64>,
        amplitude: f64,
    },
    Random {
        k_min: u32,
        k_max: u32,
        slope: f64,
        amplitude: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
}

/// Solver selection with per-scheme knobs.
#[derive(Debug, Clone, Copy, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Scheme {
    #[default]
    Imex,
    Friedrichs {
        truncation: u32,
        mollifier: f64,
    },
    Picard {
        max_iter: usize,
        tol: f64,
    },
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Parent directory for run output; overridden by `--out`.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Lebesgue exponent tracked for the scalar in the energy ledger.
    #[serde(default)]
    pub ledger_p: Option<f64>,
    /// Requested artifacts; defaults to `["energy"]` where a ledger exists.
    #[serde(default)]
    pub diagnostics: Option<Vec<String>>,
}

/// Diagnostic names accepted in `output.diagnostics`.
pub const DIAGNOSTIC_NAMES: [&str; 4] = ["energy", "blowup", "smallness", "fields"];

impl Scenario {
    /// Parses and validates a scenario file; parse errors keep the TOML
    /// line/column and key context.
    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let sc: Scenario = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("in {}: {e}", path.display())))?;
        sc.validate()?;
        Ok(sc)
    }

    fn validate(&self) -> Result<()> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        {
            return Err(Error::Config(
                "name must be nonempty and use only letters, digits, '-', '_'".into(),
            ));
        }
        self.initial.theta.validate_for(Part::Scalar)?;
        self.initial.velocity.validate_for(Part::Velocity)?;
        if let Scheme::Picard { max_iter, tol } = self.scheme {
            if max_iter == 0 || !(tol > 0.0) {
                return Err(Error::Config(
                    "picard scheme needs max_iter >= 1 and tol > 0".into(),
                ));
            }
        }
        if let Some(p) = self.output.ledger_p {
            if !(p >= 1.0) || !p.is_finite() {
                return Err(Error::Config("ledger_p must be finite and >= 1".into()));
            }
        }
        if let Some(names) = &self.output.diagnostics {
            for d in names {
                if !DIAGNOSTIC_NAMES.contains(&d.as_str()) {
                    return Err(Error::Config(format!(
                        "unknown diagnostic {d:?}; expected one of {DIAGNOSTIC_NAMES:?}"
                    )));
                }
            }
            if names.contains(&"energy".to_string()) && matches!(self.scheme, Scheme::Picard { .. })
            {
                return Err(Error::Config(
                    "the energy diagnostic needs the imex or friedrichs scheme".into(),
                ));
            }
        }
        Ok(())
    }

    /// Builds the torus grid, with the power-of-two message surfaced as a
    /// configuration error.
    pub fn build_grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.grid.dim, self.grid.n)
    }

    pub fn build_params(&self) -> Result<PhysicsParams> {
        PhysicsParams::new(self.physics.nu, self.physics.kappa)
            .map_err(|e| Error::Config(format!("[physics]: {e}")))
    }

    /// Realizes both initial fields on the grid.
    pub fn build_initial(&self, grid: TorusGrid) -> Result<(SpectralField, SpectralField)> {
        let theta = self.initial.theta.build(grid, Part::Scalar, self.seed ^ 0x7431)?;
        let u = self.initial.velocity.build(grid, Part::Velocity, self.seed ^ 0x9d2c)?;
        Ok((theta, u))
    }

    /// Snapshot stride: explicit value, or about 100 rows over the run.
    pub fn stride(&self) -> usize {
        self.time.snapshot_stride.unwrap_or_else(|| {
            let nsteps = (self.time.t_end / self.time.dt).round().max(1.0) as usize;
            (nsteps / 100).max(1)
        })
    }

    /// Requested diagnostics with the scheme-aware default.
    pub fn diagnostics(&self) -> Vec<String> {
        match &self.output.diagnostics {
            Some(d) => d.clone(),
            None if matches!(self.scheme, Scheme::Picard { .. }) => Vec::new(),
            None => vec!["energy".to_string()],
        }
    }
}

/// Which component count a recipe must produce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Part {
    Scalar,
    Velocity,
}

impl FieldRecipe {
    fn validate_for(&self, part: Part) -> Result<()> {
        match (self, part) {
            (FieldRecipe::TaylorGreen { .. } | FieldRecipe::Shear { .. }, Part::Scalar) => Err(
                Error::Config("taylor_green and shear recipes build velocities, not theta".into()),
            ),
            (FieldRecipe::Mode { .. }, Part::Velocity) => Err(Error::Config(
                "the mode recipe builds the scalar; use shear or random for velocity".into(),
            )),
            (FieldRecipe::Mode { k, .. }, Part::Scalar) => {
                if k.iter().all(|&c| c == 0) {
                    return Err(Error::Config("mode wavevector must be nonzero".into()));
                }
                Ok(())
            }
            (FieldRecipe::Random { k_min, k_max, amplitude, .. }, _) => {
                if k_min == &0 || k_max < k_min {
                    return Err(Error::Config("random recipe needs 1 <= k_min <= k_max".into()));
                }
                if !amplitude.is_finite() {
                    return Err(Error::Config("random amplitude must be finite".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Realizes the recipe; `fallback_seed` feeds seedless random recipes.
    pub fn build(&self, grid: TorusGrid, part: Part, fallback_seed: u64) -> Result<SpectralField> {
        let ncomp = match part {
            Part::Scalar => 1,
            Part::Velocity => grid.dim(),
        };
        match self {
            FieldRecipe::Rest => Ok(SpectralField::zeros(grid, ncomp)),
            FieldRecipe::TaylorGreen { amplitude } => taylor_green(grid, *amplitude),
            FieldRecipe::Shear { amplitude } => Ok(shear_velocity(grid, *amplitude)),
            FieldRecipe::Mode { k, amplitude } => {
                if k.len() != grid.dim() {
                    return Err(Error::Config(format!(
                        "mode wavevector has {} entries for a {}d grid",
                        k.len(),
                        grid.dim()
                    )));
                }
                let mut kk = [0i64; 3];
                kk[..k.len()].copy_from_slice(k);
                let mut f = SpectralField::zeros(grid, 1);
                f.set_mode_pair(0, kk, Complex64::new(amplitude / 2.0, 0.0));
                Ok(f)
            }
            FieldRecipe::Random { k_min, k_max, slope, amplitude, seed } => {
                let s = seed.unwrap_or(fallback_seed);
                Ok(match part {
                    Part::Scalar => randfield::scalar(grid, *k_min, *k_max, *slope, *amplitude, s),
                    Part::Velocity => {
                        randfield::velocity(grid, *k_min, *k_max, *slope, *amplitude, s)
                    }
                })
            }
        }
    }
}
