//! Seeded random fields with prescribed spectral support and slope.
//!
//! Mode amplitudes are drawn in a fixed lexicographic order over the
//! frequency cube, so a given seed produces the same field on every grid
//! that can hold the requested band. Grid-refinement comparisons rely on
//! that.

use crate::field::SpectralField;
use crate::grid::TorusGrid;
use crate::ops;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller on open uniforms; plenty for synthetic data.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Is `k` the canonical representative of the pair `{k, -k}`?
fn canonical(k: [i64; 3]) -> bool {
    for c in k {
        if c > 0 {
            return true;
        }
        if c < 0 {
            return false;
        }
    }
    true // the zero mode
}

/// Random real scalar field supported on `k_min <= |k| <= k_max`, with
/// coefficient size `amplitude * max(|k|,1)^{-slope}` times a complex
/// standard normal. The zero mode is included only when `k_min == 0`.
pub fn scalar(
    grid: TorusGrid,
    k_min: u32,
    k_max: u32,
    slope: f64,
    amplitude: f64,
    seed: u64,
) -> SpectralField {
    let mut out = SpectralField::zeros(grid, 1);
    fill_component(&mut out, 0, k_min, k_max, slope, amplitude, seed);
    out
}

/// Random real vector field (dim components, independent draws).
pub fn vector(
    grid: TorusGrid,
    k_min: u32,
    k_max: u32,
    slope: f64,
    amplitude: f64,
    seed: u64,
) -> SpectralField {
    let mut out = SpectralField::zeros(grid, grid.dim());
    for c in 0..grid.dim() {
        // Distinct per-component streams, still fully determined by `seed`.
        fill_component(&mut out, c, k_min, k_max, slope, amplitude, seed ^ ((c as u64 + 1) << 32));
    }
    out
}

/// Random divergence-free velocity: a random vector field pushed through the
/// Leray projector.
pub fn velocity(
    grid: TorusGrid,
    k_min: u32,
    k_max: u32,
    slope: f64,
    amplitude: f64,
    seed: u64,
) -> SpectralField {
    let mut u = vector(grid, k_min, k_max, slope, amplitude, seed);
    ops::leray_project(&mut u);
    u
}

fn fill_component(
    field: &mut SpectralField,
    comp: usize,
    k_min: u32,
    k_max: u32,
    slope: f64,
    amplitude: f64,
    seed: u64,
) {
    let grid = field.grid();
    let kmax = k_max as i64;
    assert!(
        kmax <= grid.n() as i64 / 2,
        "requested band exceeds the lattice"
    );
    let lo_sq = (k_min as f64) * (k_min as f64);
    let hi_sq = (k_max as f64) * (k_max as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let third: Vec<i64> = if grid.dim() == 2 { vec![0] } else { (-kmax..=kmax).collect() };
    for k0 in -kmax..=kmax {
        for k1 in -kmax..=kmax {
            for &k2 in &third {
                let k = [k0, k1, k2];
                if !canonical(k) {
                    continue;
                }
                let ksq = (k0 * k0 + k1 * k1 + k2 * k2) as f64;
                if ksq < lo_sq || ksq > hi_sq {
                    continue;
                }
                let size = amplitude * ksq.sqrt().max(1.0).powf(-slope);
                let v = Complex64::new(
                    size * standard_normal(&mut rng),
                    size * standard_normal(&mut rng),
                );
                field.set_mode_pair(comp, k, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_field_across_grids() {
        let a = scalar(TorusGrid::new(2, 32).unwrap(), 1, 6, 1.0, 1.0, 7);
        let b = scalar(TorusGrid::new(2, 64).unwrap(), 1, 6, 1.0, 1.0, 7);
        for k0 in -6i64..=6 {
            for k1 in -6i64..=6 {
                assert_eq!(a.coeff(0, [k0, k1, 0]), b.coeff(0, [k0, k1, 0]));
            }
        }
        // And the grids carry no energy outside the requested band.
        assert!((a.l2_norm() - b.l2_norm()).abs() < 1e-14 * a.l2_norm());
    }

    #[test]
    fn fields_are_real_and_band_limited() {
        let grid = TorusGrid::new(3, 16).unwrap();
        let f = scalar(grid, 2, 5, 0.5, 2.0, 9);
        assert_eq!(f.hermitian_defect(), 0.0);
        for flat in 0..grid.len() {
            let ksq = grid.freq_sq(flat);
            if !(4.0..=25.0).contains(&ksq) {
                assert_eq!(f.component(0)[flat], Complex64::default());
            }
        }
        let u = velocity(grid, 1, 5, 0.5, 1.0, 10);
        assert!(ops::divergence(&u).l2_norm() < 1e-13 * u.l2_norm());
    }
}
