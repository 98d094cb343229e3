//! Separable multi-dimensional FFTs on flattened row-major complex tensors.
//!
//! Convention: `forward` maps collocation samples to Fourier coefficients
//! (including the `1/len` normalization), so a constant field of value 1 has
//! coefficient 1 at frequency zero. `inverse` synthesizes samples from
//! coefficients with no extra scaling; the two are exact inverses up to
//! rounding.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

struct PlanCache {
    planner: FftPlanner<f64>,
    plans: HashMap<(usize, bool), Arc<dyn Fft<f64>>>,
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<Mutex<PlanCache>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        Mutex::new(PlanCache {
            planner: FftPlanner::new(),
            plans: HashMap::new(),
        })
    });
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    let PlanCache { planner, plans } = &mut *guard;
    plans
        .entry((len, forward))
        .or_insert_with(|| {
            if forward {
                planner.plan_fft_forward(len)
            } else {
                planner.plan_fft_inverse(len)
            }
        })
        .clone()
}

/// Transform every axis of `data` (row-major, shape `shape`, trailing axes of
/// length 1 allowed). Forward includes the `1/len` scaling.
fn transform(data: &mut [Complex64], shape: &[usize], forward: bool) {
    let total: usize = shape.iter().product();
    assert_eq!(data.len(), total, "shape does not match buffer length");
    let mut line: Vec<Complex64> = Vec::new();
    let mut scratch: Vec<Complex64> = Vec::new();

    for (axis, &len) in shape.iter().enumerate() {
        if len <= 1 {
            continue;
        }
        let fft = plan(len, forward);
        scratch.resize(fft.get_inplace_scratch_len().max(1), Complex64::default());
        let stride: usize = shape[axis + 1..].iter().product();
        let block = stride * len;
        if stride == 1 {
            // Contiguous lines: transform in place.
            for chunk in data.chunks_exact_mut(len) {
                fft.process_with_scratch(chunk, &mut scratch);
            }
        } else {
            line.resize(len, Complex64::default());
            for base in (0..total).step_by(block) {
                for off in 0..stride {
                    let start = base + off;
                    for j in 0..len {
                        line[j] = data[start + j * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for j in 0..len {
                        data[start + j * stride] = line[j];
                    }
                }
            }
        }
    }

    if forward {
        let scale = 1.0 / total as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Samples -> coefficients (normalized by `1/len`).
pub fn forward(data: &mut [Complex64], shape: &[usize]) {
    transform(data, shape, true);
}

/// Coefficients -> samples.
pub fn inverse(data: &mut [Complex64], shape: &[usize]) {
    transform(data, shape, false);
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct quadratic-cost DFT with the same normalization as `forward`,
    /// written against the definition so the fast path has an independent
    /// oracle.
    pub fn dft_oracle(samples: &[Complex64], shape: &[usize]) -> Vec<Complex64> {
        let dims: Vec<usize> = shape.iter().copied().filter(|&d| d > 1).collect();
        let total: usize = dims.iter().product();
        assert_eq!(samples.len(), total);
        let unflatten = |mut flat: usize| -> Vec<usize> {
            let mut idx = vec![0; dims.len()];
            for a in (0..dims.len()).rev() {
                idx[a] = flat % dims[a];
                flat /= dims[a];
            }
            idx
        };
        let mut out = vec![Complex64::default(); total];
        for (kf, o) in out.iter_mut().enumerate() {
            let kidx = unflatten(kf);
            let mut acc = Complex64::default();
            for (xf, s) in samples.iter().enumerate() {
                let xidx = unflatten(xf);
                let mut phase = 0.0;
                for a in 0..dims.len() {
                    phase += (kidx[a] * xidx[a]) as f64 / dims[a] as f64;
                }
                let angle = -2.0 * std::f64::consts::PI * phase;
                acc += s * Complex64::new(angle.cos(), angle.sin());
            }
            *o = acc / total as f64;
        }
        out
    }

    fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn matches_direct_dft_2d() {
        let shape = [8, 8];
        let mut data: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let oracle = dft_oracle(&data, &shape);
        forward(&mut data, &shape);
        assert!(max_abs_diff(&data, &oracle) < 1e-12);
    }

    #[test]
    fn matches_direct_dft_3d() {
        let shape = [4, 6, 8];
        let mut data: Vec<Complex64> = (0..4 * 6 * 8)
            .map(|i| Complex64::new((i as f64 * 0.11).cos(), (i as f64 * 0.23).sin()))
            .collect();
        let oracle = dft_oracle(&data, &shape);
        forward(&mut data, &shape);
        assert!(max_abs_diff(&data, &oracle) < 1e-12);
    }

    #[test]
    fn round_trip_is_identity() {
        let shape = [16, 16, 16];
        let orig: Vec<Complex64> = (0..shape.iter().product::<usize>())
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.5).cos()))
            .collect();
        let mut data = orig.clone();
        forward(&mut data, &shape);
        inverse(&mut data, &shape);
        assert!(max_abs_diff(&data, &orig) < 1e-12);
    }
}
