//! Manual timing probe for the transform sizes the solvers lean on.
//! Run with `cargo test --release -p bqlab-core --test perf_probe -- --ignored --nocapture`.

use bqlab_core::fft;
use num_complex::Complex64;
use std::time::Instant;

#[test]
#[ignore]
fn transform_timings() {
    for (shape, label) in [
        (vec![192usize, 192], "192^2 (padded 128^2)"),
        (vec![384, 384], "384^2 (padded 256^2)"),
        (vec![64, 64, 64], "64^3"),
        (vec![96, 96, 96], "96^3 (padded 64^3)"),
    ] {
        let total: usize = shape.iter().product();
        let mut data: Vec<Complex64> = (0..total)
            .map(|i| Complex64::new((i as f64).sin(), 0.0))
            .collect();
        // Warm the plan cache before timing.
        fft::forward(&mut data, &shape);
        let reps = 20;
        let t0 = Instant::now();
        for _ in 0..reps {
            fft::forward(&mut data, &shape);
            fft::inverse(&mut data, &shape);
        }
        let per = t0.elapsed().as_secs_f64() / (2 * reps) as f64;
        println!("{label}: {:.2} ms per transform", per * 1e3);
    }
}
