//! Multi-component fields stored by their Fourier coefficients.
//!
//! A `SpectralField` keeps one complex coefficient per lattice frequency and
//! component, in FFT storage order. Real-valued fields correspond to
//! Hermitian-symmetric coefficients (`c(-k) = conj(c(k))`); constructors that
//! build fields from real samples or explicit mode pairs preserve that
//! symmetry exactly.
//!
//! Norms follow the continuum convention: the squared L2 norm is the integral
//! of `|f|^2` over the torus, i.e. `(2π)^dim` times the coefficient sum by
//! Parseval, and grid L^p norms are cell-weighted quadrature sums. Vector
//! fields are measured through the pointwise Euclidean magnitude across
//! components.

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::TorusGrid;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    ncomp: usize,
    data: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: TorusGrid, ncomp: usize) -> Self {
        assert!(ncomp >= 1, "fields need at least one component");
        SpectralField {
            grid,
            ncomp,
            data: vec![Complex64::default(); ncomp * grid.len()],
        }
    }

    /// Build from real collocation samples, one slice per component.
    pub fn from_physical(grid: TorusGrid, components: &[&[f64]]) -> Result<Self> {
        let mut field = SpectralField::zeros(grid, components.len().max(1));
        if components.is_empty() {
            return Err(Error::Argument("no components supplied".into()));
        }
        for (c, comp) in components.iter().enumerate() {
            if comp.len() != grid.len() {
                return Err(Error::GridMismatch(format!(
                    "component {c} has {} samples, grid needs {}",
                    comp.len(),
                    grid.len()
                )));
            }
            let dst = field.component_mut(c);
            for (d, &s) in dst.iter_mut().zip(comp.iter()) {
                *d = Complex64::new(s, 0.0);
            }
            fft::forward(dst, &grid.shape());
        }
        field.enforce_hermitian();
        Ok(field)
    }

    /// Evaluate `f(component, point)` on the grid and transform. The closure
    /// sees physical coordinates in `[0, 2π)^dim` (third coordinate 0 in 2D).
    pub fn from_point_fn(
        grid: TorusGrid,
        ncomp: usize,
        f: impl Fn(usize, [f64; 3]) -> f64,
    ) -> Self {
        let mut field = SpectralField::zeros(grid, ncomp);
        for c in 0..ncomp {
            let dst = field.component_mut(c);
            for (flat, d) in dst.iter_mut().enumerate() {
                *d = Complex64::new(f(c, grid.point(flat)), 0.0);
            }
            fft::forward(dst, &grid.shape());
        }
        field.enforce_hermitian();
        field
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let len = self.grid.len();
        &self.data[c * len..(c + 1) * len]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let len = self.grid.len();
        &mut self.data[c * len..(c + 1) * len]
    }

    pub fn coeff(&self, c: usize, k: [i64; 3]) -> Complex64 {
        self.component(c)[self.grid.flat_of_freq(k)]
    }

    pub fn set_coeff(&mut self, c: usize, k: [i64; 3], v: Complex64) {
        let flat = self.grid.flat_of_freq(k);
        self.component_mut(c)[flat] = v;
    }

    /// Set the coefficient at `k` and its Hermitian partner at `-k`, so the
    /// field stays real. Self-paired modes (all axes 0 or Nyquist) are forced
    /// to their real part.
    pub fn set_mode_pair(&mut self, c: usize, k: [i64; 3], v: Complex64) {
        let flat = self.grid.flat_of_freq(k);
        let neg = self.grid.flat_of_freq([-k[0], -k[1], -k[2]]);
        let comp = self.component_mut(c);
        if flat == neg {
            comp[flat] = Complex64::new(v.re, 0.0);
        } else {
            comp[flat] = v;
            comp[neg] = v.conj();
        }
    }

    /// Real collocation samples per component (imaginary parts, which are
    /// rounding noise for Hermitian fields, are dropped).
    pub fn to_physical(&self) -> Vec<Vec<f64>> {
        let shape = self.grid.shape();
        (0..self.ncomp)
            .map(|c| {
                let mut buf = self.component(c).to_vec();
                fft::inverse(&mut buf, &shape);
                buf.into_iter().map(|z| z.re).collect()
            })
            .collect()
    }

    /// Pointwise Euclidean magnitude across components, on the grid.
    pub fn magnitude_samples(&self) -> Vec<f64> {
        let phys = self.to_physical();
        let mut out = vec![0.0; self.grid.len()];
        for comp in &phys {
            for (o, v) in out.iter_mut().zip(comp.iter()) {
                *o += v * v;
            }
        }
        for o in out.iter_mut() {
            *o = o.sqrt();
        }
        out
    }

    pub fn scale(&mut self, a: f64) {
        for v in self.data.iter_mut() {
            *v *= a;
        }
    }

    /// `self += a * other`.
    pub fn add_scaled(&mut self, other: &SpectralField, a: f64) {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        assert_eq!(self.ncomp, other.ncomp, "component mismatch");
        for (d, s) in self.data.iter_mut().zip(other.data.iter()) {
            *d += a * s;
        }
    }

    /// Mean value of a component (its zero-frequency coefficient).
    pub fn mean(&self, c: usize) -> Complex64 {
        self.coeff(c, [0, 0, 0])
    }

    pub fn zero_mean(&mut self) {
        let flat = self.grid.flat_of_freq([0, 0, 0]);
        let len = self.grid.len();
        for c in 0..self.ncomp {
            self.data[c * len + flat] = Complex64::default();
        }
    }

    /// Apply a real Fourier multiplier `m(k, |k|^2)` to every component.
    pub fn apply_real_multiplier(&mut self, m: impl Fn([i64; 3], f64) -> f64) {
        let len = self.grid.len();
        let grid = self.grid;
        // Evaluate once per frequency, reuse across components.
        let mults: Vec<f64> = (0..len)
            .map(|flat| {
                let k = grid.freq_vector(flat);
                m(k, grid.freq_sq(flat))
            })
            .collect();
        for c in 0..self.ncomp {
            for (v, &mk) in self.component_mut(c).iter_mut().zip(mults.iter()) {
                *v *= mk;
            }
        }
    }

    /// Copy with a real multiplier applied.
    pub fn with_real_multiplier(&self, m: impl Fn([i64; 3], f64) -> f64) -> SpectralField {
        let mut out = self.clone();
        out.apply_real_multiplier(m);
        out
    }

    /// L2 norm over the torus via Parseval (components summed).
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.data.iter().map(|z| z.norm_sqr()).sum();
        (self.grid.volume() * sum).sqrt()
    }

    /// Real L2 inner product over the torus via Parseval.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        assert_eq!(self.ncomp, other.ncomp, "component mismatch");
        let sum: f64 = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        self.grid.volume() * sum
    }

    /// `|| |D|^s f ||_{L2}` computed by weighted Parseval; the mean mode is
    /// skipped (it carries weight 0 for s > 0 and is excluded for s < 0).
    pub fn homogeneous_sobolev_norm(&self, s: f64) -> f64 {
        let grid = self.grid;
        let mut sum = 0.0;
        for c in 0..self.ncomp {
            for (flat, z) in self.component(c).iter().enumerate() {
                let ksq = grid.freq_sq(flat);
                if ksq > 0.0 {
                    sum += ksq.powf(s) * z.norm_sqr();
                }
            }
        }
        (grid.volume() * sum).sqrt()
    }

    /// `|| (1+|k|^2)^{s/2} f ||_{L2}` by weighted Parseval.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let grid = self.grid;
        let mut sum = 0.0;
        for c in 0..self.ncomp {
            for (flat, z) in self.component(c).iter().enumerate() {
                sum += (1.0 + grid.freq_sq(flat)).powf(s) * z.norm_sqr();
            }
        }
        (grid.volume() * sum).sqrt()
    }

    /// Grid L^p norm of the pointwise component magnitude; `p = inf` gives
    /// the collocation maximum.
    pub fn lp_norm(&self, p: f64) -> f64 {
        assert!(p >= 1.0, "lp_norm needs p >= 1");
        let mag = self.magnitude_samples();
        if p.is_infinite() {
            return mag.into_iter().fold(0.0, f64::max);
        }
        let cell = self.grid.cell_measure();
        let sum: f64 = mag.iter().map(|v| v.powf(p)).sum();
        (cell * sum).powf(1.0 / p)
    }

    /// Largest violation of Hermitian symmetry, `max_k |c(-k) - conj(c(k))|`.
    pub fn hermitian_defect(&self) -> f64 {
        let grid = self.grid;
        let mut worst = 0.0_f64;
        for c in 0..self.ncomp {
            let comp = self.component(c);
            for flat in 0..grid.len() {
                let k = grid.freq_vector(flat);
                let neg = grid.flat_of_freq([-k[0], -k[1], -k[2]]);
                let d = (comp[neg] - comp[flat].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Symmetrize coefficients so the physical field is exactly real.
    pub fn enforce_hermitian(&mut self) {
        let grid = self.grid;
        for c in 0..self.ncomp {
            let comp = self.component_mut(c);
            for flat in 0..grid.len() {
                let k = grid.freq_vector(flat);
                let neg = grid.flat_of_freq([-k[0], -k[1], -k[2]]);
                if neg == flat {
                    comp[flat] = Complex64::new(comp[flat].re, 0.0);
                } else if neg > flat {
                    let avg = 0.5 * (comp[flat] + comp[neg].conj());
                    comp[flat] = avg;
                    comp[neg] = avg.conj();
                }
            }
        }
    }

    /// Zero every coefficient with any `|k_i|` beyond the 2/3-rule limit.
    pub fn apply_dealias_mask(&mut self) {
        let limit = self.grid.dealias_limit();
        self.apply_real_multiplier(|k, _| {
            if k[0].abs() <= limit && k[1].abs() <= limit && k[2].abs() <= limit {
                1.0
            } else {
                0.0
            }
        });
    }

    /// Largest coefficient magnitude (all components).
    pub fn max_abs_coeff(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Maximum collocation speed `max_x |f(x)|`; the advective CFL input.
    pub fn max_speed(&self) -> f64 {
        self.magnitude_samples().into_iter().fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PERIOD;

    #[test]
    fn cosine_has_half_amplitude_pair() {
        let grid = TorusGrid::new(2, 16).unwrap();
        let f = SpectralField::from_point_fn(grid, 1, |_, x| x[0].cos());
        assert!((f.coeff(0, [1, 0, 0]) - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        assert!((f.coeff(0, [-1, 0, 0]) - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        let energy: f64 = f.component(0).iter().map(|z| z.norm_sqr()).sum();
        assert!((energy - 0.5).abs() < 1e-14);
        assert!(f.hermitian_defect() < 1e-15);
    }

    #[test]
    fn parseval_matches_quadrature() {
        let grid = TorusGrid::new(2, 16).unwrap();
        let f = SpectralField::from_point_fn(grid, 2, |c, x| {
            if c == 0 {
                (x[0] + 0.3).sin() * (2.0 * x[1]).cos()
            } else {
                (3.0 * x[0]).cos() + 0.5 * x[1].sin()
            }
        });
        let phys = f.to_physical();
        let quad: f64 = phys
            .iter()
            .flat_map(|comp| comp.iter().map(|v| v * v))
            .sum::<f64>()
            * grid.cell_measure();
        let spectral = f.l2_norm();
        assert!((spectral * spectral - quad).abs() < 1e-12 * quad.max(1.0));
    }

    #[test]
    fn lp_norm_of_constant_matches_volume_scaling() {
        let grid = TorusGrid::new(2, 16).unwrap();
        let f = SpectralField::from_point_fn(grid, 1, |_, _| 2.0);
        // ||2||_p = 2 * (2π)^{2/p}
        for p in [1.0, 2.0, 4.0] {
            let expect = 2.0 * PERIOD.powf(2.0 / p);
            assert!((f.lp_norm(p) - expect).abs() < 1e-12 * expect);
        }
        assert!((f.lp_norm(f64::INFINITY) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn physical_round_trip() {
        let grid = TorusGrid::new(2, 16).unwrap();
        let samples: Vec<f64> = (0..grid.len()).map(|i| ((i * 37 % 101) as f64).sin()).collect();
        let f = SpectralField::from_physical(grid, &[&samples]).unwrap();
        let back = f.to_physical();
        let worst = samples
            .iter()
            .zip(back[0].iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-12);
    }

    #[test]
    fn mode_pair_keeps_field_real() {
        let grid = TorusGrid::new(3, 16).unwrap();
        let mut f = SpectralField::zeros(grid, 1);
        f.set_mode_pair(0, [1, 2, -3], Complex64::new(0.4, -0.7));
        f.set_mode_pair(0, [8, 0, 0], Complex64::new(0.2, 0.9)); // Nyquist self-pair
        assert!(f.hermitian_defect() == 0.0);
        assert_eq!(f.coeff(0, [8, 0, 0]), Complex64::new(0.2, 0.0));
    }

    #[test]
    fn sobolev_weight_on_single_mode() {
        let grid = TorusGrid::new(2, 16).unwrap();
        let mut f = SpectralField::zeros(grid, 1);
        f.set_mode_pair(0, [3, 4, 0], Complex64::new(0.5, 0.0));
        // |k| = 5; two modes of squared magnitude 0.25 each.
        let expect_l2 = (grid.volume() * 0.5).sqrt();
        assert!((f.l2_norm() - expect_l2).abs() < 1e-14);
        assert!((f.homogeneous_sobolev_norm(1.0) - 5.0 * expect_l2).abs() < 1e-12);
        assert!((f.sobolev_norm(1.0) - (26.0f64).sqrt() * expect_l2).abs() < 1e-12);
    }
}
