//! Multivector-valued fields on the periodic grid `[0, 2pi)^d` and their
//! Fourier-multiplier calculus.
//!
//! Wavenumbers along each axis are the integers in `[-N/2, N/2)`. First
//! derivatives zero the Nyquist mode so real fields stay real; the Laplacian
//! keeps it.

use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::clifford::{sign_table, BladeIndex, Multivector, SubspaceTag, MAX_GENERATORS};
use crate::error::{Error, Result};
use crate::fft;

/// Mean magnitude allowed before an inverse Laplacian is refused.
pub const MEAN_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
}

impl GridSpec {
    pub fn new(dim: usize, n: usize) -> Result<GridSpec> {
        if !(1..=4).contains(&dim) {
            return Err(Error::Parameter(format!("grid dimension {dim} not in 1..=4")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::Parameter(format!("grid size N = {n} must be even and >= 8")));
        }
        Ok(GridSpec { dim, n })
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        (2.0 * std::f64::consts::PI).powi(self.dim as i32)
    }

    /// Integer index along each axis of flat index `idx` (axis 0 slowest).
    pub fn coords(&self, mut idx: usize) -> Vec<usize> {
        let mut c = vec![0; self.dim];
        for a in (0..self.dim).rev() {
            c[a] = idx % self.n;
            idx /= self.n;
        }
        c
    }

    pub fn flat_index(&self, coords: &[usize]) -> usize {
        coords.iter().fold(0, |acc, &c| acc * self.n + c)
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let h = self.spacing();
        self.coords(idx).into_iter().map(|c| c as f64 * h).collect()
    }

    /// Signed wavenumber stored at array position `i`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Array position of signed wavenumber `k` (taken mod N).
    pub fn wave_position(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    pub fn wavevector(&self, idx: usize) -> Vec<i64> {
        self.coords(idx).into_iter().map(|c| self.wavenumber(c)).collect()
    }

    pub fn mode_index(&self, xi: &[i64]) -> usize {
        let c: Vec<usize> = xi.iter().map(|&k| self.wave_position(k)).collect();
        self.flat_index(&c)
    }
}

struct WaveTable {
    /// Per axis: derivative wavenumber (Nyquist zeroed).
    deriv: Vec<Vec<f64>>,
    /// |xi|^2 with the full wavenumbers.
    norm2: Vec<f64>,
    /// Sum of squared derivative wavenumbers, the symbol of `d*d`.
    deriv_norm2: Vec<f64>,
    /// Flat index of the mode `-xi`.
    neg: Vec<usize>,
}

fn wave_table(grid: GridSpec) -> Arc<WaveTable> {
    static CACHE: OnceLock<Mutex<HashMap<GridSpec, Arc<WaveTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("wave table cache poisoned");
    guard
        .entry(grid)
        .or_insert_with(|| {
            let len = grid.len();
            let nyq = -(grid.n as i64) / 2;
            let mut deriv = vec![vec![0.0; len]; grid.dim];
            let mut norm2 = vec![0.0; len];
            let mut deriv_norm2 = vec![0.0; len];
            let mut neg = vec![0; len];
            for idx in 0..len {
                let xi = grid.wavevector(idx);
                neg[idx] = grid.mode_index(&xi.iter().map(|k| -k).collect::<Vec<_>>());
                for (a, &k) in xi.iter().enumerate() {
                    deriv[a][idx] = if k == nyq { 0.0 } else { k as f64 };
                    norm2[idx] += (k * k) as f64;
                    deriv_norm2[idx] += deriv[a][idx] * deriv[a][idx];
                }
            }
            Arc::new(WaveTable { deriv, norm2, deriv_norm2, neg })
        })
        .clone()
}

/// Fourier multiplier: product of first-derivative symbols `i xi_a` times
/// `(-|xi|^2)^lap_power`, with negative powers set to zero where the symbol
/// vanishes.
///
/// With `discrete` set, `|xi|^2` is replaced by the sum of squared
/// derivative wavenumbers (Nyquist entries zeroed). That is the symbol of
/// `d*d` built from the spectral first derivative, so inverses taken with
/// it turn `d (d*d)^{-1} d*` into an exact projection on every grid mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Multiplier {
    pub derivs: [Option<usize>; 2],
    pub lap_power: i8,
    pub discrete: bool,
}

impl Multiplier {
    pub const IDENTITY: Multiplier = Multiplier { derivs: [None, None], lap_power: 0, discrete: false };

    pub fn deriv(axis: usize) -> Multiplier {
        Multiplier { derivs: [Some(axis), None], lap_power: 0, discrete: false }
    }

    pub fn deriv2(a: usize, b: usize) -> Multiplier {
        Multiplier { derivs: [Some(a), Some(b)], lap_power: 0, discrete: false }
    }

    pub fn laplacian() -> Multiplier {
        Multiplier { derivs: [None, None], lap_power: 1, discrete: false }
    }

    /// `Delta^{-1}` on zero-mean data.
    pub fn inv_laplacian() -> Multiplier {
        Multiplier { derivs: [None, None], lap_power: -1, discrete: false }
    }

    /// `d_axis Delta^{-1}`.
    pub fn deriv_inv_laplacian(axis: usize) -> Multiplier {
        Multiplier { derivs: [Some(axis), None], lap_power: -1, discrete: false }
    }

    /// `d_axis` composed with the inverse of the derivative-consistent
    /// Laplacian.
    pub fn deriv_inv_discrete_laplacian(axis: usize) -> Multiplier {
        Multiplier { derivs: [Some(axis), None], lap_power: -1, discrete: true }
    }

    fn value(&self, table: &WaveTable, idx: usize) -> Complex64 {
        let mut z = Complex64::new(1.0, 0.0);
        for a in self.derivs.iter().flatten() {
            z *= Complex64::new(0.0, table.deriv[*a][idx]);
        }
        match self.lap_power {
            0 => z,
            p => {
                let l = if self.discrete { -table.deriv_norm2[idx] } else { -table.norm2[idx] };
                if l == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    z * l.powi(p as i32)
                }
            }
        }
    }
}

/// One contribution `out[dst] += coef * M(xi) * in[src]`.
#[derive(Clone, Copy, Debug)]
pub struct Term {
    pub src: usize,
    pub dst: usize,
    pub coef: f64,
    pub mult: Multiplier,
}

/// Apply a constant-coefficient linear operator given as Fourier-multiplier
/// terms between component arrays.
pub fn apply_terms(grid: GridSpec, inputs: &[&[f64]], n_out: usize, terms: &[Term]) -> Vec<Vec<f64>> {
    let len = grid.len();
    let mut used = vec![false; inputs.len()];
    for t in terms {
        used[t.src] = true;
    }
    let table = wave_table(grid);
    // Real data: two arrays share one complex transform, `a + i b`, and
    // Hermitian symmetry separates the spectra again.
    let live: Vec<usize> =
        (0..inputs.len()).filter(|&i| used[i] && inputs[i].iter().any(|&v| v != 0.0)).collect();
    let pair_spectra: Vec<(usize, Vec<Complex64>, Option<(usize, Vec<Complex64>)>)> = live
        .par_chunks(2)
        .map(|pair| {
            let a = inputs[pair[0]];
            let b = pair.get(1).map(|&j| inputs[j]);
            let mut z: Vec<Complex64> = match b {
                Some(b) => a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect(),
                None => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            };
            fft::forward(&mut z, grid.n, grid.dim);
            match pair.get(1) {
                None => (pair[0], z, None),
                Some(&j) => {
                    let mut sa = vec![Complex64::new(0.0, 0.0); len];
                    let mut sb = vec![Complex64::new(0.0, 0.0); len];
                    for k in 0..len {
                        let zk = z[k];
                        let zn = z[table.neg[k]].conj();
                        sa[k] = (zk + zn) * 0.5;
                        sb[k] = Complex64::new(0.0, -0.5) * (zk - zn);
                    }
                    (pair[0], sa, Some((j, sb)))
                }
            }
        })
        .collect();
    let mut spectra: Vec<Option<Vec<Complex64>>> = vec![None; inputs.len()];
    for (i, sa, rest) in pair_spectra {
        spectra[i] = Some(sa);
        if let Some((j, sb)) = rest {
            spectra[j] = Some(sb);
        }
    }
    // Operators reuse a handful of multipliers across many terms.
    let mut distinct: Vec<Multiplier> = Vec::new();
    for t in terms {
        if !distinct.contains(&t.mult) {
            distinct.push(t.mult);
        }
    }
    let symbols: Vec<Vec<Complex64>> =
        distinct.par_iter().map(|m| (0..len).map(|k| m.value(&table, k)).collect()).collect();
    let accs: Vec<Option<Vec<Complex64>>> = (0..n_out)
        .into_par_iter()
        .map(|dst| {
            let mut acc: Option<Vec<Complex64>> = None;
            for t in terms.iter().filter(|t| t.dst == dst) {
                let Some(spec) = &spectra[t.src] else { continue };
                let sym = &symbols[distinct.iter().position(|m| *m == t.mult).expect("listed above")];
                let out = acc.get_or_insert_with(|| vec![Complex64::new(0.0, 0.0); len]);
                for ((o, s), m) in out.iter_mut().zip(spec).zip(sym) {
                    *o += m * s * t.coef;
                }
            }
            acc
        })
        .collect();
    // Every multiplier maps Hermitian spectra to Hermitian spectra, so the
    // outputs are real and can be paired the same way on the way back.
    let filled: Vec<usize> = (0..n_out).filter(|&d| accs[d].is_some()).collect();
    let synthesized: Vec<(usize, Vec<f64>, Option<(usize, Vec<f64>)>)> = filled
        .par_chunks(2)
        .map(|pair| {
            let mut z = accs[pair[0]].clone().expect("filled");
            if let Some(&j) = pair.get(1) {
                let b = accs[j].as_ref().expect("filled");
                for (zk, bk) in z.iter_mut().zip(b) {
                    *zk += Complex64::new(0.0, 1.0) * bk;
                }
            }
            fft::inverse(&mut z, grid.n, grid.dim);
            let re = z.iter().map(|v| v.re).collect();
            (pair[0], re, pair.get(1).map(|&j| (j, z.iter().map(|v| v.im).collect())))
        })
        .collect();
    let mut out = vec![Vec::new(); n_out];
    for (i, a, rest) in synthesized {
        out[i] = a;
        if let Some((j, b)) = rest {
            out[j] = b;
        }
    }
    for o in out.iter_mut().filter(|o| o.is_empty()) {
        *o = vec![0.0; len];
    }
    out
}

/// Normalized Fourier coefficients `f(x) = sum_xi c(xi) exp(i xi.x)`.
pub fn spectrum(grid: GridSpec, data: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::forward(&mut buf, grid.n, grid.dim);
    let scale = 1.0 / grid.len() as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}

/// Real part of the synthesis from normalized coefficients.
pub fn synthesize(grid: GridSpec, coeffs: &[Complex64]) -> Vec<f64> {
    let mut buf = coeffs.to_vec();
    fft::inverse(&mut buf, grid.n, grid.dim);
    let len = grid.len() as f64;
    buf.into_iter().map(|z| z.re * len).collect()
}

/// `Cl_m`-valued field sampled on a grid, stored one array per blade.
#[derive(Clone, Debug, PartialEq)]
pub struct MultivectorField {
    grid: GridSpec,
    m: usize,
    comps: Vec<Vec<f64>>,
    /// Highest |xi|_inf known to carry energy, when the field was built that way.
    pub bandwidth: Option<usize>,
}

impl MultivectorField {
    pub fn zeros(grid: GridSpec, m: usize) -> MultivectorField {
        assert!(m <= MAX_GENERATORS);
        MultivectorField { grid, m, comps: vec![vec![0.0; grid.len()]; 1 << m], bandwidth: Some(0) }
    }

    pub fn from_components(grid: GridSpec, m: usize, comps: Vec<Vec<f64>>) -> Result<MultivectorField> {
        if m > MAX_GENERATORS || comps.len() != 1 << m {
            return Err(Error::Dimension(format!(
                "Cl_{m} field needs {} components, got {}",
                1usize << m.min(MAX_GENERATORS),
                comps.len()
            )));
        }
        if let Some(c) = comps.iter().find(|c| c.len() != grid.len()) {
            return Err(Error::Dimension(format!(
                "component has {} samples, grid has {}",
                c.len(),
                grid.len()
            )));
        }
        Ok(MultivectorField { grid, m, comps, bandwidth: None })
    }

    /// Real scalar field (`Cl_0`).
    pub fn scalar(grid: GridSpec, data: Vec<f64>) -> Result<MultivectorField> {
        MultivectorField::from_components(grid, 0, vec![data])
    }

    pub fn scalar_from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64 + Sync) -> MultivectorField {
        let data = (0..grid.len()).into_par_iter().map(|i| f(&grid.point(i))).collect();
        MultivectorField { grid, m: 0, comps: vec![data], bandwidth: None }
    }

    /// Field whose value at `x` is `f(x)`.
    pub fn from_fn(grid: GridSpec, m: usize, f: impl Fn(&[f64]) -> Multivector + Sync) -> Result<MultivectorField> {
        let values: Vec<Multivector> = (0..grid.len()).into_par_iter().map(|i| f(&grid.point(i))).collect();
        if let Some(v) = values.iter().find(|v| v.m() != m) {
            return Err(Error::Dimension(format!("value in Cl_{} for a Cl_{m} field", v.m())));
        }
        let mut comps = vec![vec![0.0; grid.len()]; 1 << m];
        for (i, v) in values.iter().enumerate() {
            for (b, c) in v.coeffs().iter().enumerate() {
                comps[b][i] = *c;
            }
        }
        Ok(MultivectorField { grid, m, comps, bandwidth: None })
    }

    /// `s(x) * blade`.
    pub fn blade_times(scalar: &MultivectorField, m: usize, blade: BladeIndex) -> Result<MultivectorField> {
        scalar.expect_scalar()?;
        let mut out = MultivectorField::zeros(scalar.grid, m);
        out.set_component(blade, scalar.comps[0].clone())?;
        out.bandwidth = scalar.bandwidth;
        Ok(out)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.comps
    }

    pub fn into_components(self) -> Vec<Vec<f64>> {
        self.comps
    }

    pub fn component(&self, blade: BladeIndex) -> &[f64] {
        &self.comps[blade.0 as usize]
    }

    pub fn component_field(&self, blade: BladeIndex) -> MultivectorField {
        MultivectorField {
            grid: self.grid,
            m: 0,
            comps: vec![self.comps[blade.0 as usize].clone()],
            bandwidth: self.bandwidth,
        }
    }

    pub fn set_component(&mut self, blade: BladeIndex, data: Vec<f64>) -> Result<()> {
        if blade.0 as usize >= self.comps.len() {
            return Err(Error::Dimension(format!("blade {blade} not in Cl_{}", self.m)));
        }
        if data.len() != self.grid.len() {
            return Err(Error::Dimension("component length differs from grid".into()));
        }
        self.comps[blade.0 as usize] = data;
        self.bandwidth = None;
        Ok(())
    }

    /// Scalar data of a `Cl_0` field.
    pub fn values(&self) -> Result<&[f64]> {
        self.expect_scalar()?;
        Ok(&self.comps[0])
    }

    fn expect_scalar(&self) -> Result<()> {
        if self.m != 0 {
            return Err(Error::Dimension(format!("expected a scalar field, got Cl_{}", self.m)));
        }
        Ok(())
    }

    pub fn at(&self, idx: usize) -> Multivector {
        Multivector::from_coeffs(self.m, self.comps.iter().map(|c| c[idx]).collect()).unwrap()
    }

    fn same_shape(&self, other: &MultivectorField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Dimension(format!("grid {:?} vs {:?}", self.grid, other.grid)));
        }
        if self.m != other.m {
            return Err(Error::Dimension(format!("Cl_{} vs Cl_{}", self.m, other.m)));
        }
        Ok(())
    }

    fn zip_with(&self, other: &MultivectorField, f: impl Fn(f64, f64) -> f64 + Sync) -> Result<MultivectorField> {
        self.same_shape(other)?;
        let comps = self
            .comps
            .par_iter()
            .zip(other.comps.par_iter())
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect())
            .collect();
        Ok(MultivectorField { grid: self.grid, m: self.m, comps, bandwidth: max_band(self.bandwidth, other.bandwidth) })
    }

    pub fn add(&self, other: &MultivectorField) -> Result<MultivectorField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &MultivectorField) -> Result<MultivectorField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> MultivectorField {
        let comps = self.comps.iter().map(|c| c.iter().map(|v| v * s).collect()).collect();
        MultivectorField { grid: self.grid, m: self.m, comps, bandwidth: self.bandwidth }
    }

    /// Pointwise geometric product.
    pub fn mul(&self, other: &MultivectorField) -> Result<MultivectorField> {
        self.same_shape(other)?;
        let live_a: Vec<usize> = (0..self.comps.len()).filter(|&a| !is_zero(&self.comps[a])).collect();
        let live_b: Vec<bool> = other.comps.iter().map(|c| !is_zero(c)).collect();
        let len = self.grid.len();
        let n = self.comps.len();
        let table = sign_table(self.m);
        let comps = (0..n)
            .into_par_iter()
            .map(|c| {
                let mut out = vec![0.0; len];
                for &a in &live_a {
                    let b = a ^ c;
                    if !live_b[b] {
                        continue;
                    }
                    let s = table[a * n + b];
                    for ((o, x), y) in out.iter_mut().zip(&self.comps[a]).zip(&other.comps[b]) {
                        *o += s * x * y;
                    }
                }
                out
            })
            .collect();
        let bandwidth = match (self.bandwidth, other.bandwidth) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        Ok(MultivectorField { grid: self.grid, m: self.m, comps, bandwidth })
    }

    /// Multiply every component of a `Cl_m` field by a scalar field.
    pub fn mul_scalar_field(&self, s: &MultivectorField) -> Result<MultivectorField> {
        s.expect_scalar()?;
        if s.grid != self.grid {
            return Err(Error::Dimension("scalar field on a different grid".into()));
        }
        let comps = self
            .comps
            .par_iter()
            .map(|c| c.iter().zip(&s.comps[0]).map(|(x, y)| x * y).collect())
            .collect();
        Ok(MultivectorField { grid: self.grid, m: self.m, comps, bandwidth: None })
    }

    /// `a * f(x)` for a constant multivector `a`.
    pub fn left_mul_const(&self, a: &Multivector) -> Result<MultivectorField> {
        self.const_product(a, true)
    }

    /// `f(x) * a` for a constant multivector `a`.
    pub fn right_mul_const(&self, a: &Multivector) -> Result<MultivectorField> {
        self.const_product(a, false)
    }

    fn const_product(&self, a: &Multivector, left: bool) -> Result<MultivectorField> {
        if a.m() != self.m {
            return Err(Error::Dimension(format!("Cl_{} constant on Cl_{} field", a.m(), self.m)));
        }
        let len = self.grid.len();
        let n = self.comps.len();
        let table = sign_table(self.m);
        let comps = (0..n)
            .into_par_iter()
            .map(|c| {
                let mut out = vec![0.0; len];
                for (ka, &ca) in a.coeffs().iter().enumerate() {
                    if ca == 0.0 {
                        continue;
                    }
                    let src = ka ^ c;
                    let s = if left { table[ka * n + src] } else { table[src * n + ka] } * ca;
                    for (o, x) in out.iter_mut().zip(&self.comps[src]) {
                        *o += s * x;
                    }
                }
                out
            })
            .collect();
        Ok(MultivectorField { grid: self.grid, m: self.m, comps, bandwidth: self.bandwidth })
    }

    pub fn project(&self, tag: &SubspaceTag) -> Result<MultivectorField> {
        let blades = tag.blades(self.m)?;
        let mut out = MultivectorField::zeros(self.grid, self.m);
        for b in blades {
            out.comps[b.0 as usize] = self.comps[b.0 as usize].clone();
        }
        out.bandwidth = self.bandwidth;
        Ok(out)
    }

    pub fn grade_involution(&self) -> MultivectorField {
        let comps = self
            .comps
            .iter()
            .enumerate()
            .map(|(mask, c)| {
                if (mask as u32).count_ones() % 2 == 0 {
                    c.clone()
                } else {
                    c.iter().map(|v| -v).collect()
                }
            })
            .collect();
        MultivectorField { grid: self.grid, m: self.m, comps, bandwidth: self.bandwidth }
    }

    /// Same field viewed in `Cl_m'`, `m' >= m`.
    pub fn embed(&self, m: usize) -> Result<MultivectorField> {
        if m < self.m || m > MAX_GENERATORS {
            return Err(Error::Dimension(format!("cannot embed Cl_{} into Cl_{m}", self.m)));
        }
        let mut comps = self.comps.clone();
        comps.resize(1 << m, vec![0.0; self.grid.len()]);
        Ok(MultivectorField { grid: self.grid, m, comps, bandwidth: self.bandwidth })
    }

    /// Restrict to the first `2^m` blades (the subalgebra `Cl_m`).
    pub fn truncate(&self, m: usize) -> Result<MultivectorField> {
        if m > self.m {
            return Err(Error::Dimension(format!("cannot truncate Cl_{} to Cl_{m}", self.m)));
        }
        Ok(MultivectorField {
            grid: self.grid,
            m,
            comps: self.comps[..1 << m].to_vec(),
            bandwidth: self.bandwidth,
        })
    }

    /// Blades whose component is not identically zero.
    pub fn support(&self) -> Vec<BladeIndex> {
        (0..self.comps.len()).filter(|&b| !is_zero(&self.comps[b])).map(|b| BladeIndex(b as u32)).collect()
    }

    pub fn mean(&self, blade: BladeIndex) -> f64 {
        let c = &self.comps[blade.0 as usize];
        c.iter().sum::<f64>() / c.len() as f64
    }

    pub fn means(&self) -> Vec<f64> {
        (0..self.comps.len()).map(|b| self.mean(BladeIndex(b as u32))).collect()
    }

    /// Largest absolute sample over all components.
    pub fn max_abs(&self) -> f64 {
        self.comps.iter().flatten().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    /// `L^2` norm of the pointwise Euclidean magnitude.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.comps.iter().flatten().map(|v| v * v).sum();
        (s * self.grid.cell_volume()).sqrt()
    }

    /// `||f - g||_2 / ||g||_2`, or the plain difference norm when `g = 0`.
    pub fn relative_error(&self, reference: &MultivectorField) -> Result<f64> {
        let diff = self.sub(reference)?.l2_norm();
        let r = reference.l2_norm();
        Ok(if r > 0.0 { diff / r } else { diff })
    }

    fn apply_diagonal(&self, mult: Multiplier) -> MultivectorField {
        let inputs: Vec<&[f64]> = self.comps.iter().map(|c| c.as_slice()).collect();
        let terms: Vec<Term> =
            (0..self.comps.len()).map(|c| Term { src: c, dst: c, coef: 1.0, mult }).collect();
        let comps = apply_terms(self.grid, &inputs, self.comps.len(), &terms);
        MultivectorField { grid: self.grid, m: self.m, comps, bandwidth: self.bandwidth }
    }

    pub fn partial_derivative(&self, axis: usize) -> Result<MultivectorField> {
        if axis >= self.grid.dim {
            return Err(Error::Dimension(format!("axis {axis} on a {}-d grid", self.grid.dim)));
        }
        Ok(self.apply_diagonal(Multiplier::deriv(axis)))
    }

    /// All first partials, sharing one forward transform.
    pub fn gradient(&self) -> Vec<MultivectorField> {
        let nc = self.comps.len();
        let inputs: Vec<&[f64]> = self.comps.iter().map(|c| c.as_slice()).collect();
        let terms: Vec<Term> = (0..self.grid.dim)
            .flat_map(|a| (0..nc).map(move |c| Term { src: c, dst: a * nc + c, coef: 1.0, mult: Multiplier::deriv(a) }))
            .collect();
        let mut out = apply_terms(self.grid, &inputs, nc * self.grid.dim, &terms);
        (0..self.grid.dim)
            .map(|_| {
                let comps: Vec<Vec<f64>> = out.drain(..nc).collect();
                MultivectorField { grid: self.grid, m: self.m, comps, bandwidth: self.bandwidth }
            })
            .collect()
    }

    pub fn laplacian(&self) -> MultivectorField {
        self.apply_diagonal(Multiplier::laplacian())
    }

    /// Solve `-Delta u = f` with zero-mean `u`; every component of `f` must
    /// have zero mean.
    pub fn inv_laplacian(&self) -> Result<MultivectorField> {
        self.check_zero_mean()?;
        Ok(self.apply_diagonal(Multiplier::inv_laplacian()).scale(-1.0))
    }

    /// Error naming the first blade whose mean exceeds [`MEAN_TOLERANCE`].
    pub fn check_zero_mean(&self) -> Result<()> {
        for (b, mean) in self.means().into_iter().enumerate() {
            if mean.abs() > MEAN_TOLERANCE {
                return Err(Error::Solvability { component: BladeIndex(b as u32).to_string(), mean });
            }
        }
        Ok(())
    }

    /// Subtract the mean of every component.
    pub fn remove_mean(&self) -> MultivectorField {
        let comps = self
            .comps
            .iter()
            .map(|c| {
                let mu = c.iter().sum::<f64>() / c.len() as f64;
                c.iter().map(|v| v - mu).collect()
            })
            .collect();
        MultivectorField { grid: self.grid, m: self.m, comps, bandwidth: self.bandwidth }
    }

    /// Largest `|xi|_inf` whose coefficient magnitude exceeds `tol` times the
    /// largest coefficient.
    pub fn measured_bandwidth(&self, tol: f64) -> usize {
        let spectra: Vec<Vec<Complex64>> = self.comps.par_iter().map(|c| spectrum(self.grid, c)).collect();
        let peak = spectra.iter().flatten().fold(0.0f64, |acc, z| acc.max(z.norm()));
        if peak == 0.0 {
            return 0;
        }
        let mut band = 0;
        for spec in &spectra {
            for (k, z) in spec.iter().enumerate() {
                if z.norm() > tol * peak {
                    let xi = self.grid.wavevector(k);
                    band = band.max(xi.iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0));
                }
            }
        }
        band
    }

    /// One row per grid point: flat index, coordinates, then one column per blade.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "index")?;
        for a in 0..self.grid.dim {
            write!(w, ",x{a}")?;
        }
        for b in 0..self.comps.len() {
            write!(w, ",{}", BladeIndex(b as u32))?;
        }
        writeln!(w)?;
        for i in 0..self.grid.len() {
            write!(w, "{i}")?;
            for x in self.grid.point(i) {
                write!(w, ",{x:.17e}")?;
            }
            for c in &self.comps {
                write!(w, ",{:.17e}", c[i])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn max_band(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        _ => None,
    }
}

pub(crate) fn is_zero(c: &[f64]) -> bool {
    c.iter().all(|&v| v == 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn g4() -> GridSpec {
        GridSpec::new(4, 8).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(4, 7).is_err());
        assert!(GridSpec::new(4, 6).is_err());
        assert!(GridSpec::new(5, 8).is_err());
        let g = GridSpec::new(3, 8).unwrap();
        assert_eq!(g.wavenumber(4), -4);
        assert_eq!(g.wave_position(-1), 7);
        assert_eq!(g.flat_index(&g.coords(123)), 123);
    }

    #[test]
    fn derivative_of_sine() {
        let g = g4();
        let f = MultivectorField::scalar_from_fn(g, |x| x[1].sin());
        let df = f.partial_derivative(1).unwrap();
        let expect = MultivectorField::scalar_from_fn(g, |x| x[1].cos());
        assert!(df.sub(&expect).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn inv_laplacian_of_cosine() {
        let g = g4();
        let f = MultivectorField::scalar_from_fn(g, |x| (x[0] + 2.0 * x[2]).cos());
        let u = f.inv_laplacian().unwrap();
        let expect = f.scale(1.0 / 5.0);
        assert!(u.sub(&expect).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn inv_laplacian_names_offending_blade() {
        let g = g4();
        let mut f = MultivectorField::zeros(g, 2);
        f.set_component(BladeIndex(3), vec![1.0; g.len()]).unwrap();
        match f.inv_laplacian() {
            Err(Error::Solvability { component, .. }) => assert_eq!(component, "e12"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pointwise_product_matches_multivector_product() {
        let g = GridSpec::new(2, 8).unwrap();
        let a = MultivectorField::from_fn(g, 3, |x| {
            Multivector::from_coeffs(3, (0..8).map(|k| (x[0] * k as f64).sin() + x[1]).collect()).unwrap()
        })
        .unwrap();
        let b = MultivectorField::from_fn(g, 3, |x| {
            Multivector::from_coeffs(3, (0..8).map(|k| (x[1] + k as f64).cos()).collect()).unwrap()
        })
        .unwrap();
        let p = a.mul(&b).unwrap();
        for i in [0, 5, 17, 63] {
            let expect = a.at(i).mul(&b.at(i)).unwrap();
            assert!((&p.at(i) - &expect).max_abs() < 1e-14);
        }
    }

    #[test]
    fn constant_products() {
        let g = GridSpec::new(2, 8).unwrap();
        let f = MultivectorField::from_fn(g, 3, |x| {
            Multivector::from_coeffs(3, (0..8).map(|k| (x[0] + k as f64).sin()).collect()).unwrap()
        })
        .unwrap();
        let c = Multivector::generator_product(3, &[1, 3]).unwrap();
        let left = f.left_mul_const(&c).unwrap();
        let right = f.right_mul_const(&c).unwrap();
        for i in [0, 9, 40] {
            assert_eq!(left.at(i), c.mul(&f.at(i)).unwrap());
            assert_eq!(right.at(i), f.at(i).mul(&c).unwrap());
        }
    }

    #[test]
    fn spectrum_round_trip() {
        let g = GridSpec::new(2, 8).unwrap();
        let f = MultivectorField::scalar_from_fn(g, |x| 3.0 * (x[0] - x[1]).sin());
        let s = spectrum(g, f.values().unwrap());
        let k = g.mode_index(&[1, -1]);
        assert!((s[k] - Complex64::new(0.0, -1.5)).norm() < 1e-14);
        let back = synthesize(g, &s);
        for (a, b) in back.iter().zip(f.values().unwrap()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn measured_bandwidth_of_trig_field() {
        let g = g4();
        let f = MultivectorField::scalar_from_fn(g, |x| (3.0 * x[2]).sin() + x[0].cos());
        assert_eq!(f.measured_bandwidth(1e-12), 3);
    }

    #[test]
    fn l2_norm_of_constant() {
        let g = GridSpec::new(2, 8).unwrap();
        let f = MultivectorField::scalar(g, vec![1.0; g.len()]).unwrap();
        assert!((f.l2_norm() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = GridSpec::new(1, 8).unwrap();
        let f = MultivectorField::zeros(g, 1);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("index,x0,e0,e1\n"));
        assert_eq!(text.lines().count(), 9);
    }
}
