//! The periodic computational domain `[0, 2π)^dim` and its frequency lattice.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Period of the torus along every axis.
pub const PERIOD: f64 = 2.0 * std::f64::consts::PI;

/// A uniform collocation grid on the torus `[0, 2π)^dim`.
///
/// The frequency lattice is `{-n/2+1, ..., n/2}^dim`; physical samples sit at
/// `x_j = 2π j / n`. Only `dim` in `{2, 3}` and power-of-two `n >= 16` are
/// accepted, so every field in a run shares one exact lattice layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::Config(format!("grid dim must be 2 or 3, got {dim}")));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid size per axis must be a power of two >= 16, got {n}"
            )));
        }
        Ok(TorusGrid { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of lattice points / collocation samples.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Shape as a slice-friendly array; unused trailing axes are 1.
    pub fn shape(&self) -> [usize; 3] {
        match self.dim {
            2 => [self.n, self.n, 1],
            _ => [self.n, self.n, self.n],
        }
    }

    /// Quadrature weight of one cell, `(2π/n)^dim`.
    pub fn cell_measure(&self) -> f64 {
        (PERIOD / self.n as f64).powi(self.dim as i32)
    }

    /// Volume of the torus, `(2π)^dim`.
    pub fn volume(&self) -> f64 {
        PERIOD.powi(self.dim as i32)
    }

    /// Signed frequency for a storage index along one axis.
    #[inline]
    pub fn freq_of_index(&self, idx: usize) -> i64 {
        if idx <= self.n / 2 {
            idx as i64
        } else {
            idx as i64 - self.n as i64
        }
    }

    /// Storage index along one axis for a signed frequency in
    /// `{-n/2+1, ..., n/2}`; `-n/2` aliases to the Nyquist index `n/2`.
    #[inline]
    pub fn index_of_freq(&self, k: i64) -> usize {
        let n = self.n as i64;
        debug_assert!(k >= -n / 2 && k <= n / 2);
        ((k % n + n) % n) as usize
    }

    /// Signed frequency vector of a flattened storage index. The third
    /// component is 0 in 2D.
    #[inline]
    pub fn freq_vector(&self, flat: usize) -> [i64; 3] {
        let n = self.n;
        match self.dim {
            2 => {
                let i1 = flat % n;
                let i0 = flat / n;
                [self.freq_of_index(i0), self.freq_of_index(i1), 0]
            }
            _ => {
                let i2 = flat % n;
                let rest = flat / n;
                let i1 = rest % n;
                let i0 = rest / n;
                [
                    self.freq_of_index(i0),
                    self.freq_of_index(i1),
                    self.freq_of_index(i2),
                ]
            }
        }
    }

    /// `|k|^2` of a flattened storage index.
    #[inline]
    pub fn freq_sq(&self, flat: usize) -> f64 {
        let k = self.freq_vector(flat);
        (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64
    }

    /// Flattened storage index of a signed frequency vector.
    pub fn flat_of_freq(&self, k: [i64; 3]) -> usize {
        let n = self.n;
        match self.dim {
            2 => self.index_of_freq(k[0]) * n + self.index_of_freq(k[1]),
            _ => {
                (self.index_of_freq(k[0]) * n + self.index_of_freq(k[1])) * n
                    + self.index_of_freq(k[2])
            }
        }
    }

    /// Largest per-axis frequency kept by the 2/3-rule mask, `floor(n/3)`.
    pub fn dealias_limit(&self) -> i64 {
        (self.n / 3) as i64
    }

    /// Radius of the frequency lattice, `sqrt(dim) * n/2`.
    pub fn lattice_radius(&self) -> f64 {
        (self.dim as f64).sqrt() * (self.n as f64) / 2.0
    }

    /// Physical coordinates of a flattened sample index.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let n = self.n;
        let h = PERIOD / n as f64;
        match self.dim {
            2 => {
                let i1 = flat % n;
                let i0 = flat / n;
                [i0 as f64 * h, i1 as f64 * h, 0.0]
            }
            _ => {
                let i2 = flat % n;
                let rest = flat / n;
                let i1 = rest % n;
                let i0 = rest / n;
                [i0 as f64 * h, i1 as f64 * h, i2 as f64 * h]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_power_of_two() {
        let err = TorusGrid::new(2, 100).unwrap_err();
        assert!(err.to_string().contains("power of two"), "{err}");
        assert!(TorusGrid::new(2, 48).is_err());
        assert!(TorusGrid::new(2, 0).is_err());
        assert!(TorusGrid::new(2, 8).is_err());
    }

    #[test]
    fn rejects_bad_dim() {
        assert!(TorusGrid::new(1, 32).is_err());
        assert!(TorusGrid::new(4, 32).is_err());
    }

    #[test]
    fn frequency_layout_round_trips() {
        let g = TorusGrid::new(2, 16).unwrap();
        for k in -7..=8_i64 {
            assert_eq!(g.freq_of_index(g.index_of_freq(k)), k);
        }
        // Storage order matches the FFT convention: index n/2+1 carries -n/2+1.
        assert_eq!(g.freq_of_index(9), -7);
        assert_eq!(g.freq_of_index(8), 8);
        for flat in 0..g.len() {
            assert_eq!(g.flat_of_freq(g.freq_vector(flat)), flat);
        }
    }

    #[test]
    fn dealias_limit_is_floor_n_over_3() {
        assert_eq!(TorusGrid::new(2, 16).unwrap().dealias_limit(), 5);
        assert_eq!(TorusGrid::new(2, 64).unwrap().dealias_limit(), 21);
        assert_eq!(TorusGrid::new(2, 128).unwrap().dealias_limit(), 42);
        assert_eq!(TorusGrid::new(2, 256).unwrap().dealias_limit(), 85);
    }

    #[test]
    fn cell_measure_times_len_is_volume() {
        for dim in [2, 3] {
            let g = TorusGrid::new(dim, 16).unwrap();
            let v = g.cell_measure() * g.len() as f64;
            assert!((v - g.volume()).abs() < 1e-12 * g.volume());
        }
    }
}
