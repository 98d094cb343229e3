//! Fourier-side operators: derivatives, the Leray projector, spectral
//! mollification and annulus truncation, and 2/3-rule dealiased products.
//!
//! Products are evaluated on a zero-padded grid of `3n/2` points per axis, so
//! every retained output mode (per-axis `|k_i| <= floor(n/3)`) equals the
//! exact convolution of the inputs; wrap-around images land outside the
//! retained band by construction.

use crate::error::{Error, Result};
use crate::fft;
use crate::field::SpectralField;
use crate::grid::TorusGrid;
use num_complex::Complex64;

/// Partial derivative along `axis` as the multiplier `i k_axis`. The unpaired
/// Nyquist mode has no faithful odd derivative on the grid and is zeroed.
pub fn partial(f: &SpectralField, axis: usize) -> SpectralField {
    let grid = f.grid();
    assert!(axis < grid.dim(), "axis out of range");
    let nyquist = (grid.n() / 2) as i64;
    let mut out = f.clone();
    for c in 0..out.ncomp() {
        let comp = out.component_mut(c);
        for (flat, v) in comp.iter_mut().enumerate() {
            let k = grid.freq_vector(flat)[axis];
            *v = if k == nyquist {
                Complex64::default()
            } else {
                Complex64::new(0.0, k as f64) * *v
            };
        }
    }
    out
}

/// Gradient of a scalar field as a `dim`-component field.
pub fn gradient(f: &SpectralField) -> SpectralField {
    let grid = f.grid();
    assert_eq!(f.ncomp(), 1, "gradient takes a scalar field");
    let mut out = SpectralField::zeros(grid, grid.dim());
    for axis in 0..grid.dim() {
        let d = partial(f, axis);
        out.component_mut(axis).copy_from_slice(d.component(0));
    }
    out
}

/// Full gradient tensor of a velocity field: component `i*dim + j` holds
/// `d_j u_i`.
pub fn velocity_gradient(u: &SpectralField) -> SpectralField {
    let grid = u.grid();
    let dim = grid.dim();
    assert_eq!(u.ncomp(), dim, "velocity gradient needs dim components");
    let mut out = SpectralField::zeros(grid, dim * dim);
    let mut scratch = SpectralField::zeros(grid, 1);
    for i in 0..dim {
        scratch.component_mut(0).copy_from_slice(u.component(i));
        for j in 0..dim {
            let d = partial(&scratch, j);
            out.component_mut(i * dim + j).copy_from_slice(d.component(0));
        }
    }
    out
}

/// Divergence of a `dim`-component field as a scalar field.
pub fn divergence(u: &SpectralField) -> SpectralField {
    let grid = u.grid();
    assert_eq!(u.ncomp(), grid.dim(), "divergence needs dim components");
    let mut out = SpectralField::zeros(grid, 1);
    for axis in 0..grid.dim() {
        let mut d = SpectralField::zeros(grid, 1);
        d.component_mut(0).copy_from_slice(u.component(axis));
        let d = partial(&d, axis);
        out.add_scaled(&d, 1.0);
    }
    out
}

/// Project a velocity field onto divergence-free fields, mode by mode:
/// `u(k) -> u(k) - k (k . u(k)) / |k|^2`. The mean mode is untouched.
pub fn leray_project(u: &mut SpectralField) {
    let grid = u.grid();
    assert_eq!(u.ncomp(), grid.dim(), "projector needs dim components");
    let dim = grid.dim();
    let len = grid.len();
    for flat in 0..len {
        let kv = grid.freq_vector(flat);
        let ksq = grid.freq_sq(flat);
        if ksq == 0.0 {
            continue;
        }
        let mut kdotu = Complex64::default();
        for c in 0..dim {
            kdotu += kv[c] as f64 * u.component(c)[flat];
        }
        let scale = kdotu / ksq;
        for c in 0..dim {
            u.component_mut(c)[flat] -= kv[c] as f64 * scale;
        }
    }
}

/// Complementary projector: the gradient part `k (k . u(k)) / |k|^2`.
pub fn gradient_part(u: &SpectralField) -> SpectralField {
    let mut div_free = u.clone();
    leray_project(&mut div_free);
    let mut out = u.clone();
    out.add_scaled(&div_free, -1.0);
    out
}

/// Symbol of the spectral mollifier: a Gaussian bump, value 1 at `k = 0`.
pub fn mollifier_symbol(r: f64, ksq: f64) -> f64 {
    (-0.5 * r * r * ksq).exp()
}

/// Spectral mollification `I_r f`: convolution with a positive smooth kernel,
/// realized as the Gaussian multiplier `exp(-(r|k|)^2 / 2)`. Tends to the
/// identity coefficientwise as `r -> 0`, never increases L^p norms for
/// `p in {2, inf}`, and commutes with every other multiplier here.
pub fn mollify(f: &SpectralField, r: f64) -> Result<SpectralField> {
    if !(r > 0.0) {
        return Err(Error::Argument(format!("mollifier radius must be positive, got {r}")));
    }
    Ok(f.with_real_multiplier(|_, ksq| mollifier_symbol(r, ksq)))
}

/// Spectral annulus truncation: keep modes with `1/n <= |k| <= n`, i.e. on
/// the integer lattice every nonzero mode with `|k|^2 <= n^2`. Idempotent
/// bitwise (the symbol is an exact 0/1 indicator) and kills the mean.
pub fn friedrichs_truncate(f: &SpectralField, n: u32) -> Result<SpectralField> {
    if n == 0 {
        return Err(Error::Argument("truncation index must be >= 1".into()));
    }
    let nsq = (n as f64) * (n as f64);
    Ok(f.with_real_multiplier(|_, ksq| if ksq > 0.0 && ksq <= nsq { 1.0 } else { 0.0 }))
}

/// Heat semigroup `e^{nu_tau Laplacian}` as the multiplier
/// `exp(-nu_tau |k|^2)`; `nu_tau` is the product of viscosity and elapsed
/// time and must be nonnegative.
pub fn heat_semigroup(f: &SpectralField, nu_tau: f64) -> Result<SpectralField> {
    if nu_tau < 0.0 {
        return Err(Error::Argument(format!(
            "heat semigroup needs nu*tau >= 0, got {nu_tau}"
        )));
    }
    Ok(f.with_real_multiplier(|_, ksq| (-nu_tau * ksq).exp()))
}

/// Quadratic-cost reference product: the lattice convolution summed pair by
/// pair, masked to the same band as `ProductSpace::product`. Output modes
/// that receive no coefficient pair stay exactly zero, which makes this the
/// oracle for support-localization claims. Cost is O(nnz(f) * nnz(g)).
pub fn reference_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch("product inputs on a different grid".into()));
    }
    if f.ncomp() != 1 || g.ncomp() != 1 {
        return Err(Error::Argument("product takes scalar fields".into()));
    }
    let grid = f.grid();
    let limit = grid.dealias_limit();
    let nz = |field: &SpectralField| -> Vec<(usize, Complex64)> {
        field.component(0)
            .iter()
            .enumerate()
            .filter(|(_, v)| v.re != 0.0 || v.im != 0.0)
            .map(|(flat, &v)| (flat, v))
            .collect()
    };
    let fs = nz(f);
    let gs = nz(g);
    let mut out = SpectralField::zeros(grid, 1);
    for &(ff, fv) in &fs {
        let kf = grid.freq_vector(ff);
        for &(gf, gv) in &gs {
            let kg = grid.freq_vector(gf);
            let k = [kf[0] + kg[0], kf[1] + kg[1], kf[2] + kg[2]];
            if k[0].abs() <= limit && k[1].abs() <= limit && k[2].abs() <= limit {
                let flat = grid.flat_of_freq(k);
                out.component_mut(0)[flat] += fv * gv;
            }
        }
    }
    Ok(out)
}

/// Scratch space for dealiased products on one grid. Holds the padded shape
/// and reusable complex buffers so solver loops stay allocation-light.
pub struct ProductSpace {
    grid: TorusGrid,
    padded_n: usize,
    padded_shape: [usize; 3],
    pool: Vec<Vec<Complex64>>,
}

impl ProductSpace {
    pub fn new(grid: TorusGrid) -> Self {
        let padded_n = 3 * grid.n() / 2;
        let padded_shape = match grid.dim() {
            2 => [padded_n, padded_n, 1],
            _ => [padded_n, padded_n, padded_n],
        };
        ProductSpace {
            grid,
            padded_n,
            padded_shape,
            pool: Vec::new(),
        }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    fn padded_len(&self) -> usize {
        self.padded_shape.iter().product()
    }

    fn take_buffer(&mut self) -> Vec<Complex64> {
        let len = self.padded_len();
        match self.pool.pop() {
            Some(mut b) => {
                b.iter_mut().for_each(|v| *v = Complex64::default());
                b
            }
            None => vec![Complex64::default(); len],
        }
    }

    fn give_back(&mut self, buf: Vec<Complex64>) {
        if self.pool.len() < 12 {
            self.pool.push(buf);
        }
    }

    fn padded_index_of_freq(&self, k: [i64; 3]) -> usize {
        let m = self.padded_n as i64;
        let wrap = |k: i64| -> usize { ((k % m + m) % m) as usize };
        match self.grid.dim() {
            2 => wrap(k[0]) * self.padded_n + wrap(k[1]),
            _ => (wrap(k[0]) * self.padded_n + wrap(k[1])) * self.padded_n + wrap(k[2]),
        }
    }

    /// Synthesize one component on the padded grid. Kept complex: pointwise
    /// complex products make the retained output modes the exact polynomial
    /// convolution even for one-sided Nyquist content.
    fn padded_physical(&mut self, f: &SpectralField, c: usize) -> Vec<Complex64> {
        let mut buf = self.take_buffer();
        let grid = self.grid;
        for (flat, &v) in f.component(c).iter().enumerate() {
            buf[self.padded_index_of_freq(grid.freq_vector(flat))] = v;
        }
        fft::inverse(&mut buf, &self.padded_shape);
        buf
    }

    /// Transform padded physical samples back and keep only modes inside the
    /// per-axis 2/3-rule band; everything else is exactly zero.
    fn padded_to_masked(&mut self, mut buf: Vec<Complex64>, out: &mut SpectralField, c: usize) {
        fft::forward(&mut buf, &self.padded_shape);
        let grid = self.grid;
        let limit = grid.dealias_limit();
        let comp = out.component_mut(c);
        for (flat, dst) in comp.iter_mut().enumerate() {
            let k = grid.freq_vector(flat);
            *dst = if k[0].abs() <= limit && k[1].abs() <= limit && k[2].abs() <= limit {
                buf[self.padded_index_of_freq(k)]
            } else {
                Complex64::default()
            };
        }
        self.give_back(buf);
    }

    /// Dealiased pointwise product of two scalar fields.
    pub fn product(&mut self, f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
        if f.grid() != self.grid || g.grid() != self.grid {
            return Err(Error::GridMismatch("product inputs on a different grid".into()));
        }
        if f.ncomp() != 1 || g.ncomp() != 1 {
            return Err(Error::Argument("product takes scalar fields".into()));
        }
        let fp = self.padded_physical(f, 0);
        let mut gp = self.padded_physical(g, 0);
        for (gv, fv) in gp.iter_mut().zip(fp.iter()) {
            *gv *= fv;
        }
        self.give_back(fp);
        let mut out = SpectralField::zeros(self.grid, 1);
        self.padded_to_masked(gp, &mut out, 0);
        Ok(out)
    }

    /// Advective term `u . grad(v)` for a velocity `u` (dim components) and
    /// any field `v`, as a dealiased product. With divergence-free `u` this
    /// is skew-symmetric against `v` up to rounding, so it conserves L2.
    pub fn advect(&mut self, u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
        let grid = self.grid;
        if u.grid() != grid || v.grid() != grid {
            return Err(Error::GridMismatch("advect inputs on a different grid".into()));
        }
        if u.ncomp() != grid.dim() {
            return Err(Error::Argument("velocity needs dim components".into()));
        }
        let u_phys: Vec<Vec<Complex64>> =
            (0..grid.dim()).map(|j| self.padded_physical(u, j)).collect();
        let mut out = SpectralField::zeros(grid, v.ncomp());
        for c in 0..v.ncomp() {
            let mut acc = self.take_buffer();
            let mut vc = SpectralField::zeros(grid, 1);
            vc.component_mut(0).copy_from_slice(v.component(c));
            for (j, uj) in u_phys.iter().enumerate() {
                let d = partial(&vc, j);
                let dp = self.padded_physical(&d, 0);
                for ((a, du), uu) in acc.iter_mut().zip(dp.iter()).zip(uj.iter()) {
                    *a += du * uu;
                }
                self.give_back(dp);
            }
            self.padded_to_masked(acc, &mut out, c);
        }
        for b in u_phys {
            self.give_back(b);
        }
        Ok(out)
    }

    /// Divergence form of scalar advection, `div(s u)`. Identical to
    /// `advect(u, s)` when `div u = 0`, and keeps the mean of `s` exactly
    /// fixed because the zero mode of a divergence vanishes structurally.
    pub fn div_flux(&mut self, u: &SpectralField, s: &SpectralField) -> Result<SpectralField> {
        let grid = self.grid;
        if u.grid() != grid || s.grid() != grid {
            return Err(Error::GridMismatch("div_flux inputs on a different grid".into()));
        }
        if u.ncomp() != grid.dim() || s.ncomp() != 1 {
            return Err(Error::Argument("div_flux takes (velocity, scalar)".into()));
        }
        let sp = self.padded_physical(s, 0);
        let mut flux = SpectralField::zeros(grid, grid.dim());
        for j in 0..grid.dim() {
            let mut up = self.padded_physical(u, j);
            for (uv, sv) in up.iter_mut().zip(sp.iter()) {
                *uv *= sv;
            }
            self.padded_to_masked(up, &mut flux, j);
        }
        self.give_back(sp);
        Ok(divergence(&flux))
    }

    /// Momentum flux divergence `div(u (x) u)`, component i equal to
    /// `sum_j d_j (u_i u_j)`, with each product dealiased.
    pub fn div_tensor(&mut self, u: &SpectralField) -> Result<SpectralField> {
        let grid = self.grid;
        if u.grid() != grid {
            return Err(Error::GridMismatch("div_tensor input on a different grid".into()));
        }
        let dim = grid.dim();
        if u.ncomp() != dim {
            return Err(Error::Argument("velocity needs dim components".into()));
        }
        let u_phys: Vec<Vec<Complex64>> = (0..dim).map(|j| self.padded_physical(u, j)).collect();
        // Distinct products u_i u_j for i <= j.
        let mut products: Vec<Vec<SpectralField>> = Vec::new();
        for i in 0..dim {
            let mut row = Vec::new();
            for j in i..dim {
                let mut buf = self.take_buffer();
                for ((b, a), c) in buf.iter_mut().zip(u_phys[i].iter()).zip(u_phys[j].iter()) {
                    *b = a * c;
                }
                let mut prod = SpectralField::zeros(grid, 1);
                self.padded_to_masked(buf, &mut prod, 0);
                row.push(prod);
            }
            products.push(row);
        }
        for b in u_phys {
            self.give_back(b);
        }
        let pick = |i: usize, j: usize| -> &SpectralField {
            if i <= j {
                &products[i][j - i]
            } else {
                &products[j][i - j]
            }
        };
        let mut out = SpectralField::zeros(grid, dim);
        for i in 0..dim {
            let mut acc = SpectralField::zeros(grid, 1);
            for j in 0..dim {
                acc.add_scaled(&partial(pick(i, j), j), 1.0);
            }
            out.component_mut(i).copy_from_slice(acc.component(0));
        }
        Ok(out)
    }
}
