//! Dyadic frequency decomposition, Besov and weak Lebesgue norms, and the
//! harmonic-analysis inequality checkers built on them.
//!
//! ```ignore
//! let part = DyadicPartition::new(grid);
//! let spec = BesovSpec::new(0.5, 2.0, 1.0, Convention::Nonhomogeneous)?;
//! let nrm = besov_norm(&part, &field, &spec)?;
//! ```

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::TorusGrid;
use crate::report::{stable_within, EstimateReport};
use crate::trajectory::{time_lrho_norm, TrajectoryRecord};
use crate::{ops, randfield};

/// Which block carries the lowest frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Convention {
    /// Block -1 is the ring profile scaled down once; the mean is dropped.
    Homogeneous,
    /// Block -1 is the full low-frequency cutoff, mean included.
    Nonhomogeneous,
}

/// Smooth monotone transition: exactly 1 for `t <= 0`, exactly 0 for
/// `t >= 1`, a quotient of exponential bumps in between.
fn smooth_step_down(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let a = (-1.0 / (1.0 - t)).exp();
        let b = (-1.0 / t).exp();
        a / (a + b)
    }
}

/// Low-pass profile: exactly 1 on `rho <= 3/4`, exactly 0 on `rho >= 4/3`.
pub fn chi(rho: f64) -> f64 {
    smooth_step_down((rho - 0.75) / (4.0 / 3.0 - 0.75))
}

/// Ring profile `chi(rho/2) - chi(rho)`: supported on `3/4 <= rho <= 8/3`.
pub fn phi(rho: f64) -> f64 {
    chi(0.5 * rho) - chi(rho)
}

/// Dyadic partition of the frequency lattice of one grid.
#[derive(Debug, Clone, Copy)]
pub struct DyadicPartition {
    grid: TorusGrid,
    q_max: i32,
}

impl DyadicPartition {
    /// Partition sized so the blocks up to `q_max` reproduce every lattice
    /// mode: the final low-pass plateau must cover the lattice radius.
    pub fn new(grid: TorusGrid) -> Self {
        let q_max = ((grid.lattice_radius() / 0.75).log2().ceil() as i32 - 1).max(0);
        DyadicPartition { grid, q_max }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    /// Largest ring index with lattice support.
    pub fn q_max(&self) -> i32 {
        self.q_max
    }

    /// Block indices, lowest first. Both conventions use the same range.
    pub fn bands(&self) -> impl Iterator<Item = i32> {
        -1..=self.q_max
    }

    pub fn band_count(&self) -> usize {
        (self.q_max + 2) as usize
    }

    /// Vector slot used for block `q` in per-band arrays.
    pub fn band_slot(&self, q: i32) -> usize {
        (q + 1) as usize
    }

    /// Multiplier of block `q` at radius `knorm`.
    pub fn band_weight(&self, q: i32, knorm: f64, conv: Convention) -> f64 {
        if q < -1 {
            return 0.0;
        }
        if q == -1 {
            return match conv {
                Convention::Nonhomogeneous => chi(knorm),
                Convention::Homogeneous => phi(2.0 * knorm),
            };
        }
        phi(knorm * (-q as f64).exp2())
    }

    /// Multiplier of the low-pass cutoff at scale `j` (all blocks below `j`).
    pub fn low_weight(&self, j: i32, knorm: f64) -> f64 {
        chi(knorm * (-j as f64).exp2())
    }

    /// Blocks with nonzero weight at radius `knorm`: at most two.
    fn active_bands(&self, knorm: f64, conv: Convention) -> ([(i32, f64); 2], usize) {
        let mut out = [(0i32, 0.0f64); 2];
        let mut count = 0;
        if knorm == 0.0 {
            if matches!(conv, Convention::Nonhomogeneous) {
                out[0] = (-1, 1.0);
                count = 1;
            }
            return (out, count);
        }
        let qf = knorm.log2().floor() as i32;
        for q in (qf - 1).max(-1)..=qf + 1 {
            let w = self.band_weight(q, knorm, conv);
            if w != 0.0 {
                out[count] = (q, w);
                count += 1;
                if count == 2 {
                    break;
                }
            }
        }
        (out, count)
    }

    /// Frequency block `q` of a field.
    pub fn block(&self, f: &SpectralField, q: i32, conv: Convention) -> SpectralField {
        f.with_real_multiplier(|_, ksq| self.band_weight(q, ksq.sqrt(), conv))
    }

    /// Low-pass part of a field at scale `j`.
    pub fn low_pass(&self, f: &SpectralField, j: i32) -> SpectralField {
        f.with_real_multiplier(|_, ksq| self.low_weight(j, ksq.sqrt()))
    }

    /// Low-pass part assembled as the literal sum of blocks below `j`, so
    /// its coefficient support is exactly the union of the block supports
    /// (the smooth-cutoff route agrees only up to rounding).
    pub fn low_pass_sum(&self, f: &SpectralField, j: i32, conv: Convention) -> SpectralField {
        let mut out = SpectralField::zeros(f.grid(), f.ncomp());
        for q in -1..=(j - 1).min(self.q_max) {
            out.add_scaled(&self.block(f, q, conv), 1.0);
        }
        out
    }

    /// L2 norms of every block in one pass over the coefficients,
    /// indexed by `band_slot`.
    pub fn block_l2_norms(&self, f: &SpectralField, conv: Convention) -> Vec<f64> {
        let grid = self.grid;
        let mut acc = vec![0.0f64; self.band_count()];
        for flat in 0..grid.len() {
            let knorm = grid.freq_sq(flat).sqrt();
            let (bands, count) = self.active_bands(knorm, conv);
            if count == 0 {
                continue;
            }
            let mut mag2 = 0.0;
            for c in 0..f.ncomp() {
                mag2 += f.component(c)[flat].norm_sqr();
            }
            if mag2 == 0.0 {
                continue;
            }
            for &(q, w) in &bands[..count] {
                acc[self.band_slot(q)] += w * w * mag2;
            }
        }
        let vol = grid.volume();
        acc.into_iter().map(|v| (vol * v).sqrt()).collect()
    }

    /// L2 norms of widened blocks (each block summed with its neighbors up
    /// to `halfwidth` away), indexed by `band_slot`.
    pub fn stencil_l2_norms(
        &self,
        f: &SpectralField,
        conv: Convention,
        halfwidth: i32,
    ) -> Vec<f64> {
        let grid = self.grid;
        let nb = self.band_count();
        let mut acc = vec![0.0f64; nb];
        for flat in 0..grid.len() {
            let knorm = grid.freq_sq(flat).sqrt();
            let (bands, count) = self.active_bands(knorm, conv);
            if count == 0 {
                continue;
            }
            let mut mag2 = 0.0;
            for c in 0..f.ncomp() {
                mag2 += f.component(c)[flat].norm_sqr();
            }
            if mag2 == 0.0 {
                continue;
            }
            // A mode in block q0 feeds every widened block centered within
            // halfwidth of q0; the widened weight is the sum of the member
            // weights that fall inside the stencil.
            let qlo = (bands[0].0 - halfwidth).max(-1);
            let qhi = (bands[count - 1].0 + halfwidth).min(self.q_max);
            for q in qlo..=qhi {
                let mut w = 0.0;
                for &(q0, w0) in &bands[..count] {
                    if (q0 - q).abs() <= halfwidth {
                        w += w0;
                    }
                }
                if w != 0.0 {
                    acc[self.band_slot(q)] += w * w * mag2;
                }
            }
        }
        let vol = grid.volume();
        acc.into_iter().map(|v| (vol * v).sqrt()).collect()
    }
}

/// Precomputed per-mode band weights. Solver loops that need block norms at
/// every step use this instead of `block_l2_norms`, which re-evaluates the
/// smooth profile per mode per call.
#[derive(Debug, Clone)]
pub struct BandNormTable {
    grid: TorusGrid,
    nbands: usize,
    /// (flat index, band slot, squared weight) triples, flat-major, so the
    /// accumulation order matches the one-pass routines bit for bit.
    entries: Vec<(u32, u32, f64)>,
}

impl BandNormTable {
    /// Table matching `block_l2_norms` when `halfwidth == 0` and
    /// `stencil_l2_norms` otherwise.
    pub fn new(part: &DyadicPartition, conv: Convention, halfwidth: i32) -> Self {
        let grid = part.grid();
        let mut entries = Vec::new();
        for flat in 0..grid.len() {
            let knorm = grid.freq_sq(flat).sqrt();
            let (bands, count) = part.active_bands(knorm, conv);
            if count == 0 {
                continue;
            }
            if halfwidth == 0 {
                for &(q, w) in &bands[..count] {
                    entries.push((flat as u32, part.band_slot(q) as u32, w * w));
                }
            } else {
                let qlo = (bands[0].0 - halfwidth).max(-1);
                let qhi = (bands[count - 1].0 + halfwidth).min(part.q_max());
                for q in qlo..=qhi {
                    let mut w = 0.0;
                    for &(q0, w0) in &bands[..count] {
                        if (q0 - q).abs() <= halfwidth {
                            w += w0;
                        }
                    }
                    if w != 0.0 {
                        entries.push((flat as u32, part.band_slot(q) as u32, w * w));
                    }
                }
            }
        }
        BandNormTable {
            grid,
            nbands: part.band_count(),
            entries,
        }
    }

    pub fn band_count(&self) -> usize {
        self.nbands
    }

    /// L2 norms per band slot, summed over all components of `f`.
    pub fn l2_norms(&self, f: &SpectralField) -> Vec<f64> {
        assert_eq!(f.grid(), self.grid, "field grid differs from table grid");
        let mut acc = vec![0.0f64; self.nbands];
        let mut last_flat = u32::MAX;
        let mut mag2 = 0.0;
        for &(flat, slot, w2) in &self.entries {
            if flat != last_flat {
                mag2 = 0.0;
                for c in 0..f.ncomp() {
                    mag2 += f.component(c)[flat as usize].norm_sqr();
                }
                last_flat = flat;
            }
            acc[slot as usize] += w2 * mag2;
        }
        let vol = self.grid.volume();
        acc.into_iter().map(|v| (vol * v).sqrt()).collect()
    }
}

/// Besov norm parameters. `p` and `r` may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct BesovSpec {
    pub s: f64,
    pub p: f64,
    pub r: f64,
    pub convention: Convention,
}

impl BesovSpec {
    pub fn new(s: f64, p: f64, r: f64, convention: Convention) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::Argument(format!("regularity index must be finite, got {s}")));
        }
        if !(p >= 1.0) {
            return Err(Error::Argument(format!("integrability index must satisfy p >= 1, got {p}")));
        }
        if !(r >= 1.0) {
            return Err(Error::Argument(format!("summation index must satisfy r >= 1, got {r}")));
        }
        Ok(BesovSpec { s, p, r, convention })
    }

    /// The homogeneous scale stops being a Banach space of distributions
    /// at high regularity; flag the parameter ranges where norms computed
    /// here should be read as seminorm diagnostics only.
    pub fn banach_caveat(&self, dim: usize) -> bool {
        if !matches!(self.convention, Convention::Homogeneous) {
            return false;
        }
        let crit = dim as f64 / self.p;
        self.s > crit || (self.s == crit && self.r > 1.0)
    }
}

/// Lp norm of one frequency block; spectral fast path for p = 2.
pub fn block_lp_norm(
    part: &DyadicPartition,
    f: &SpectralField,
    q: i32,
    p: f64,
    conv: Convention,
) -> f64 {
    if p == 2.0 {
        let grid = part.grid();
        let mut acc = 0.0;
        for flat in 0..grid.len() {
            let w = part.band_weight(q, grid.freq_sq(flat).sqrt(), conv);
            if w == 0.0 {
                continue;
            }
            for c in 0..f.ncomp() {
                acc += w * w * f.component(c)[flat].norm_sqr();
            }
        }
        (grid.volume() * acc).sqrt()
    } else {
        part.block(f, q, conv).lp_norm(p)
    }
}

/// Aggregate per-block values `2^{qs} a_q` in `l^r`.
fn lr_aggregate(part: &DyadicPartition, values: &[f64], s: f64, r: f64) -> f64 {
    let weighted = part
        .bands()
        .map(|q| (q as f64 * s).exp2() * values[part.band_slot(q)]);
    if r.is_infinite() {
        weighted.fold(0.0, f64::max)
    } else {
        weighted.map(|v| v.powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

/// Besov norm of a field.
pub fn besov_norm(part: &DyadicPartition, f: &SpectralField, spec: &BesovSpec) -> Result<f64> {
    if f.grid() != part.grid() {
        return Err(Error::GridMismatch("field grid differs from partition grid".into()));
    }
    let vals: Vec<f64> = if spec.p == 2.0 {
        part.block_l2_norms(f, spec.convention)
    } else {
        part.bands()
            .map(|q| block_lp_norm(part, f, q, spec.p, spec.convention))
            .collect()
    };
    Ok(lr_aggregate(part, &vals, spec.s, spec.r))
}

/// Space-time Besov norm with the time integral taken inside the block sum:
/// each block's Lp-in-space series is reduced in time first, then the blocks
/// are aggregated.
pub fn tilde_norm(
    part: &DyadicPartition,
    traj: &TrajectoryRecord,
    spec: &BesovSpec,
    rho: f64,
) -> Result<f64> {
    if traj.grid() != part.grid() {
        return Err(Error::GridMismatch("trajectory grid differs from partition grid".into()));
    }
    if traj.is_empty() {
        return Err(Error::Argument("trajectory has no snapshots".into()));
    }
    let nb = part.band_count();
    // series[slot][i] = block norm at snapshot i.
    let mut series = vec![Vec::with_capacity(traj.len()); nb];
    for (_, f) in traj.iter() {
        if spec.p == 2.0 {
            for (slot, v) in part.block_l2_norms(f, spec.convention).into_iter().enumerate() {
                series[slot].push(v);
            }
        } else {
            for q in part.bands() {
                series[part.band_slot(q)].push(block_lp_norm(part, f, q, spec.p, spec.convention));
            }
        }
    }
    let mut reduced = vec![0.0; nb];
    for (slot, vals) in series.iter().enumerate() {
        reduced[slot] = time_lrho_norm(traj.times(), vals, rho)?;
    }
    Ok(lr_aggregate(part, &reduced, spec.s, spec.r))
}

/// Space-time Besov norm with the time integral outside: the full Besov
/// norm is evaluated per snapshot, then reduced in time.
pub fn timewise_besov_norm(
    part: &DyadicPartition,
    traj: &TrajectoryRecord,
    spec: &BesovSpec,
    rho: f64,
) -> Result<f64> {
    if traj.is_empty() {
        return Err(Error::Argument("trajectory has no snapshots".into()));
    }
    let vals: Vec<f64> = traj
        .iter()
        .map(|(_, f)| besov_norm(part, f, spec))
        .collect::<Result<_>>()?;
    time_lrho_norm(traj.times(), &vals, rho)
}

/// Weak Lebesgue quasinorm from the sorted physical samples:
/// `max_i v_(i) * (i * cell)^{1/p}` with descending `v` and 1-based counts.
pub fn weak_lp_quasinorm(f: &SpectralField, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Argument(format!("weak norm index must satisfy p >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.lp_norm(f64::INFINITY));
    }
    let mut v = f.magnitude_samples();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let cell = f.grid().cell_measure();
    let mut best = 0.0f64;
    for (i, &vi) in v.iter().enumerate() {
        let mass = ((i + 1) as f64) * cell;
        best = best.max(vi * mass.powf(1.0 / p));
    }
    Ok(best)
}

/// Max residual of the block sum against 1 over the whole lattice
/// (nonhomogeneous; the homogeneous sum is checked on nonzero modes and
/// against 0 at the mean).
pub fn partition_unity_check(grid: TorusGrid) -> EstimateReport {
    let part = DyadicPartition::new(grid);
    let mut worst = 0.0f64;
    for flat in 0..grid.len() {
        let knorm = grid.freq_sq(flat).sqrt();
        let mut nh = 0.0;
        let mut hg = 0.0;
        for q in part.bands() {
            nh += part.band_weight(q, knorm, Convention::Nonhomogeneous);
            hg += part.band_weight(q, knorm, Convention::Homogeneous);
        }
        let target_h = if knorm == 0.0 { 0.0 } else { 1.0 };
        worst = worst.max((nh - 1.0).abs()).max((hg - target_h).abs());
    }
    let mut rep = EstimateReport::new("dyadic_partition_unity");
    rep.lhs = worst;
    rep.rhs = 1e-12;
    rep.fitted_c = worst;
    rep.samples = grid.len();
    rep.pass = worst <= 1e-12;
    rep.note(format!("dim={} n={} q_max={}", grid.dim(), grid.n(), part.q_max()));
    rep
}

/// Relative L2 residual of reconstructing a field from its blocks.
pub fn reconstruction_residual(
    part: &DyadicPartition,
    f: &SpectralField,
    conv: Convention,
) -> f64 {
    let mut sum = SpectralField::zeros(f.grid(), f.ncomp());
    for q in part.bands() {
        sum.add_scaled(&part.block(f, q, conv), 1.0);
    }
    let mut target = f.clone();
    if matches!(conv, Convention::Homogeneous) {
        target.zero_mean();
    }
    sum.add_scaled(&target, -1.0);
    let denom = target.l2_norm();
    if denom == 0.0 {
        sum.l2_norm()
    } else {
        sum.l2_norm() / denom
    }
}

/// Largest coefficient magnitude of any double block with separated
/// indices; exact support disjointness makes this exactly zero.
pub fn presortho_defect(part: &DyadicPartition, f: &SpectralField, conv: Convention) -> f64 {
    let mut worst = 0.0f64;
    for q in part.bands() {
        let bq = part.block(f, q, conv);
        for j in part.bands() {
            if (j - q).abs() >= 2 {
                worst = worst.max(part.block(&bq, j, conv).max_abs_coeff());
            }
        }
    }
    worst
}

/// Directional block-norm comparison `||block||_{p2} <= C 2^{q d (1/p1 - 1/p2)}
/// ||block||_{p1}` fitted over random fields and all blocks, on grids of
/// increasing size; passes when the per-grid constants are stable.
pub fn bernstein_check(p1: f64, p2: f64, samples: usize, seed: u64) -> Result<EstimateReport> {
    if !(p1 >= 1.0) || !(p2 >= p1) {
        return Err(Error::Argument(format!(
            "block norm comparison needs 1 <= p1 <= p2, got p1={p1} p2={p2}"
        )));
    }
    if samples == 0 {
        return Err(Error::Argument("need at least one sample".into()));
    }
    let dim = 2usize;
    let slopes = [0.6, 1.0, 1.6, 2.2];
    let mut per_grid = Vec::new();
    let mut pairs = Vec::new();
    for (gi, n) in [64usize, 128, 256].into_iter().enumerate() {
        let grid = TorusGrid::new(dim, n)?;
        let part = DyadicPartition::new(grid);
        let mut c_grid = 0.0f64;
        for s in 0..samples {
            let slope = slopes[s % slopes.len()];
            let f = randfield::scalar(grid, 1, (n / 2) as u32, slope, 1.0, seed ^ ((gi as u64) << 40) ^ (s as u64));
            let floor = 1e-9 * f.lp_norm(p1.max(1.0));
            for q in part.bands() {
                let block = part.block(&f, q, Convention::Nonhomogeneous);
                let n1 = block.lp_norm(p1);
                if n1 <= floor {
                    continue;
                }
                let n2 = block.lp_norm(p2);
                let inv_p2 = if p2.is_infinite() { 0.0 } else { 1.0 / p2 };
                let scale = (q.max(0) as f64 * dim as f64 * (1.0 / p1 - inv_p2)).exp2();
                let rhs = scale * n1;
                pairs.push((n2, rhs));
                c_grid = c_grid.max(n2 / rhs);
            }
        }
        per_grid.push(c_grid);
    }
    let mut rep = EstimateReport::new("block_norm_comparison");
    rep.fit_least_max(&pairs);
    rep.pass = rep.fitted_c.is_finite() && rep.fitted_c > 0.0 && stable_within(&per_grid, 0.20);
    rep.note(format!(
        "p1={p1} p2={p2}; per-grid constants n=64/128/256: {:.6}, {:.6}, {:.6}",
        per_grid[0], per_grid[1], per_grid[2]
    ));
    Ok(rep)
}

/// Gradient-block equivalence `||grad block||_2 ~ 2^q ||block||_2` fitted on
/// both sides over random fields.
pub fn bernstein_derivative_check(samples: usize, seed: u64) -> Result<EstimateReport> {
    if samples == 0 {
        return Err(Error::Argument("need at least one sample".into()));
    }
    let grid = TorusGrid::new(2, 128)?;
    let part = DyadicPartition::new(grid);
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut pairs = Vec::new();
    for s in 0..samples {
        let f = randfield::scalar(grid, 1, 64, 1.0 + 0.3 * (s % 4) as f64, 1.0, seed ^ (s as u64));
        let floor = 1e-9 * f.l2_norm();
        for q in part.bands().filter(|&q| q >= 0) {
            let block = part.block(&f, q, Convention::Nonhomogeneous);
            let b = block.l2_norm();
            if b <= floor {
                continue;
            }
            let g = ops::gradient(&block).l2_norm();
            let ratio = g / ((q as f64).exp2() * b);
            lo = lo.min(ratio);
            hi = hi.max(ratio);
            pairs.push((g, (q as f64).exp2() * b));
        }
    }
    let mut rep = EstimateReport::new("block_gradient_equivalence");
    rep.fit_least_max(&pairs);
    rep.pass = lo > 0.1 && hi.is_finite() && hi < 10.0;
    rep.note(format!("two-sided ratio range [{lo:.4}, {hi:.4}]"));
    Ok(rep)
}

/// Weak-Lebesgue control of a negative-regularity block norm,
/// `||f||_{B^{d/q2 - d/q1}_{q2,inf}} <= C ||f||_{L^{q1,inf}}`, fitted over a
/// mean-zero family of mollified indicators and random fields.
pub fn lorentz_embedding_check(
    p: f64,
    q: f64,
    samples: usize,
    seed: u64,
) -> Result<EstimateReport> {
    if !(p > 1.0) || !(q > p) {
        return Err(Error::Argument(format!(
            "weak-norm embedding needs 1 < p < q, got p={p} q={q}"
        )));
    }
    if samples == 0 {
        return Err(Error::Argument("need at least one sample".into()));
    }
    let grid = TorusGrid::new(2, 128)?;
    let part = DyadicPartition::new(grid);
    let dim = grid.dim() as f64;
    let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
    let spec = BesovSpec::new(
        dim * inv_q - dim / p,
        if q.is_infinite() { f64::INFINITY } else { q },
        f64::INFINITY,
        Convention::Homogeneous,
    )?;
    let mut pairs = Vec::new();
    for i in 0..samples {
        let f = if i % 2 == 0 {
            // Mollified disk bump of varying radius, mean removed.
            let r = 0.3 * 1.35f64.powi((i / 2) as i32 % 5);
            let disk = SpectralField::from_point_fn(grid, 1, |_, x| {
                let dx = (x[0] - std::f64::consts::PI).abs();
                let dy = (x[1] - std::f64::consts::PI).abs();
                let dx = dx.min(2.0 * std::f64::consts::PI - dx);
                let dy = dy.min(2.0 * std::f64::consts::PI - dy);
                if (dx * dx + dy * dy).sqrt() <= r {
                    1.0
                } else {
                    0.0
                }
            });
            let mut g = ops::mollify(&disk, 0.08)?;
            g.zero_mean();
            g
        } else {
            randfield::scalar(grid, 1, 40, 0.9 + 0.4 * ((i / 2) % 3) as f64, 1.0, seed ^ (i as u64))
        };
        let lhs = besov_norm(&part, &f, &spec)?;
        let rhs = weak_lp_quasinorm(&f, p)?;
        pairs.push((lhs, rhs));
    }
    let mut rep = EstimateReport::new("weak_norm_block_embedding");
    rep.fit_least_max(&pairs);
    rep.pass = rep.fitted_c.is_finite() && rep.fitted_c > 0.0;
    rep.note(format!("p={p} q={q} target regularity {:.4}", spec.s));
    Ok(rep)
}

/// The (s,2,2) scale agrees with the weighted-L2 Sobolev norm up to a fixed
/// factor interval computed from the partition multipliers alone; every
/// sampled field ratio must land inside it.
pub fn besov_sobolev_check(samples: usize, seed: u64) -> Result<EstimateReport> {
    if samples == 0 {
        return Err(Error::Argument("need at least one sample".into()));
    }
    let grid = TorusGrid::new(2, 64)?;
    let part = DyadicPartition::new(grid);
    let mut rep = EstimateReport::new("besov_sobolev_factor");
    let mut pass = true;
    let mut worst_width: f64 = 0.0;
    for &s in &[0.0, 1.0, -1.5] {
        // Per-mode multiplier factor sum_q (2^{qs} w_q)^2 / (1+|k|^2)^s.
        let mut fmin = f64::INFINITY;
        let mut fmax: f64 = 0.0;
        for flat in 0..grid.len() {
            let ksq = grid.freq_sq(flat);
            let knorm = ksq.sqrt();
            let mut m = 0.0;
            for q in part.bands() {
                let w = part.band_weight(q, knorm, Convention::Nonhomogeneous);
                m += (q as f64 * s).exp2().powi(2) * w * w;
            }
            let ratio = m / (1.0 + ksq).powf(s);
            fmin = fmin.min(ratio);
            fmax = fmax.max(ratio);
        }
        let spec = BesovSpec::new(s, 2.0, 2.0, Convention::Nonhomogeneous)?;
        for i in 0..samples {
            let f = randfield::scalar(grid, 0, 32, 1.2, 1.0, seed ^ ((i as u64) << 8) ^ s.to_bits());
            let b = besov_norm(&part, &f, &spec)?;
            let h = f.sobolev_norm(s);
            let r2 = (b / h).powi(2);
            if !(r2 >= fmin - 1e-10 && r2 <= fmax + 1e-10) {
                pass = false;
            }
        }
        worst_width = worst_width.max((fmax / fmin).sqrt());
        rep.note(format!("s={s}: factor interval [{:.6}, {:.6}]", fmin.sqrt(), fmax.sqrt()));
    }
    rep.samples = samples * 3;
    rep.fitted_c = worst_width;
    rep.lhs = worst_width;
    rep.rhs = 1.0;
    rep.pass = pass && worst_width.is_finite();
    Ok(rep)
}

/// Weak quasinorm never exceeds the full Lebesgue norm.
pub fn weak_lp_domination_check(p: f64, samples: usize, seed: u64) -> Result<EstimateReport> {
    if !(p >= 1.0) || p.is_infinite() {
        return Err(Error::Argument(format!("domination check needs finite p >= 1, got {p}")));
    }
    let grid = TorusGrid::new(2, 64)?;
    let mut pairs = Vec::new();
    for i in 0..samples {
        let f = randfield::scalar(grid, 0, 30, 0.8 + 0.5 * (i % 3) as f64, 1.0, seed ^ (i as u64));
        pairs.push((weak_lp_quasinorm(&f, p)?, f.lp_norm(p)));
    }
    let mut rep = EstimateReport::new("weak_lp_domination");
    rep.fit_least_max(&pairs);
    rep.pass = rep.fitted_c > 0.0 && rep.fitted_c <= 1.0 + 1e-12;
    rep.note(format!("p={p}"));
    Ok(rep)
}

/// Order between the two space-time Besov evaluations on a synthetic
/// decaying trajectory: integral-inside dominates for rho >= r, is dominated
/// for rho <= r, and the two agree when rho = r.
pub fn minkowski_order_check(seed: u64) -> Result<EstimateReport> {
    let grid = TorusGrid::new(2, 64)?;
    let part = DyadicPartition::new(grid);
    let f0 = randfield::scalar(grid, 1, 28, 0.8, 1.0, seed);
    let mut traj = TrajectoryRecord::new(grid);
    for i in 0..=10 {
        let t = 0.1 * i as f64;
        traj.push(t, ops::heat_semigroup(&f0, 0.4 * t)?)?;
    }
    let mut rep = EstimateReport::new("spacetime_norm_order");
    let mut pass = true;
    let mut worst = 0.0f64;
    for &(rho, r, expect_tilde_larger) in
        &[(2.0, 1.0, true), (4.0, 1.0, true), (1.0, 2.0, false)]
    {
        let spec = BesovSpec::new(0.5, 2.0, r, Convention::Nonhomogeneous)?;
        let tilde = tilde_norm(&part, &traj, &spec, rho)?;
        let plain = timewise_besov_norm(&part, &traj, &spec, rho)?;
        let ratio = plain / tilde;
        worst = worst.max(if expect_tilde_larger { ratio } else { 1.0 / ratio });
        if expect_tilde_larger {
            pass &= plain <= tilde * (1.0 + 1e-12);
        } else {
            pass &= tilde <= plain * (1.0 + 1e-12);
        }
        rep.note(format!("rho={rho} r={r}: plain/tilde = {ratio:.6}"));
    }
    // Equal exponents collapse the two evaluations.
    let spec = BesovSpec::new(0.5, 2.0, 2.0, Convention::Nonhomogeneous)?;
    let a = tilde_norm(&part, &traj, &spec, 2.0)?;
    let b = timewise_besov_norm(&part, &traj, &spec, 2.0)?;
    pass &= (a - b).abs() <= 1e-10 * a.max(b);
    rep.note(format!("rho=r=2 agreement gap {:.3e}", (a - b).abs()));
    rep.fitted_c = worst;
    rep.lhs = worst;
    rep.rhs = 1.0;
    rep.samples = 4;
    rep.pass = pass;
    Ok(rep)
}
