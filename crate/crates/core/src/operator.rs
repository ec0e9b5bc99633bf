//! Galerkin matrix of `f -> d_L f - (beta e4) f` on low Fourier modes, in a
//! real trigonometric basis, plus its singular values.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::clifford::product_sign;
use crate::error::{Error, Result};
use crate::gauge::GaugePotential;
use crate::grid::{spectrum, MultivectorField};

/// Largest allowed matrix dimension.
pub const SIZE_CAP: usize = 10_000;

const BLADES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrigKind {
    Constant,
    Cos,
    Sin,
}

/// Basis function `c * trig(xi . x) * e_blade`, orthonormal for the mean
/// inner product on the torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisFunction {
    pub xi: [i64; 4],
    pub kind: TrigKind,
    pub blade: u32,
}

impl BasisFunction {
    /// Complex-exponential expansion: `(mode, coefficient)` pairs.
    fn expansion(&self) -> Vec<([i64; 4], Complex64)> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let neg = self.xi.map(|k| -k);
        match self.kind {
            TrigKind::Constant => vec![(self.xi, Complex64::new(1.0, 0.0))],
            TrigKind::Cos => vec![(self.xi, Complex64::new(r, 0.0)), (neg, Complex64::new(r, 0.0))],
            TrigKind::Sin => vec![(self.xi, Complex64::new(0.0, -r)), (neg, Complex64::new(0.0, r))],
        }
    }
}

#[derive(Clone, Debug)]
pub struct AssembledOperator {
    pub k: usize,
    pub basis: Vec<BasisFunction>,
    pub matrix: DMatrix<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorSpectrum {
    /// Ascending.
    pub singular_values: Vec<f64>,
    pub kernel_dim: usize,
    /// Smallest singular value above the kernel threshold.
    pub min_nonzero: Option<f64>,
    pub kernel_tolerance: f64,
    pub block_sizes: Vec<usize>,
}

/// First nonzero coordinate positive.
fn in_upper_half(xi: &[i64; 4]) -> bool {
    xi.iter().find(|&&k| k != 0).is_some_and(|&k| k > 0)
}

fn box_modes(k: i64) -> Vec<[i64; 4]> {
    let r: Vec<i64> = (-k..=k).collect();
    let mut out = Vec::new();
    for &a in &r {
        for &b in &r {
            for &c in &r {
                for &d in &r {
                    out.push([a, b, c, d]);
                }
            }
        }
    }
    out
}

/// Real basis on `|xi|_inf <= k`: the constant mode first, then cosine and
/// sine pairs in lexicographic order of the upper-half wavevectors.
pub fn trig_basis(k: usize) -> Vec<BasisFunction> {
    let mut out = Vec::new();
    for blade in 0..BLADES as u32 {
        out.push(BasisFunction { xi: [0; 4], kind: TrigKind::Constant, blade });
    }
    for xi in box_modes(k as i64).into_iter().filter(in_upper_half) {
        for kind in [TrigKind::Cos, TrigKind::Sin] {
            for blade in 0..BLADES as u32 {
                out.push(BasisFunction { xi, kind, blade });
            }
        }
    }
    out
}

/// Assemble the operator with multiplier `beta e4`.
pub fn assemble_operator(beta: &GaugePotential, k: usize) -> Result<AssembledOperator> {
    if beta.dim() != 4 {
        return Err(Error::Dimension("operator assembly is for 4-d potentials".into()));
    }
    assemble_with_multiplier(&beta.times_top_generator()?, k)
}

/// Assemble `f -> d_L f - b f` for a `Cl_4` multiplier field `b`.
pub fn assemble_with_multiplier(b: &MultivectorField, k: usize) -> Result<AssembledOperator> {
    let size = BLADES * (2 * k + 1).pow(4);
    if size > SIZE_CAP {
        return Err(Error::SizeCap { size, cap: SIZE_CAP });
    }
    let grid = b.grid();
    if grid.dim != 4 || b.m() != 4 {
        return Err(Error::Dimension("multiplier must be a Cl_4 field on T^4".into()));
    }
    if 4 * k >= grid.n {
        return Err(Error::Parameter(format!("K = {k} needs N > {} to resolve mode differences", 4 * k)));
    }
    // Multiplier coefficients on |zeta|_inf <= 2K.
    let spectra: Vec<Vec<Complex64>> = b.components().iter().map(|c| spectrum(grid, c)).collect();
    let peak = spectra.iter().flatten().fold(0.0f64, |a, z| a.max(z.norm()));
    let cut = 1e-14 * peak.max(1e-300);
    let mut mult: Vec<([i64; 4], [Complex64; BLADES])> = Vec::new();
    for zeta in box_modes(2 * k as i64) {
        let idx = grid.mode_index(&zeta);
        let mut c = [Complex64::new(0.0, 0.0); BLADES];
        let mut any = false;
        for (blade, spec) in spectra.iter().enumerate() {
            if spec[idx].norm() > cut {
                c[blade] = spec[idx];
                any = true;
            }
        }
        if any {
            mult.push((zeta, c));
        }
    }

    let basis = trig_basis(k);
    let n = basis.len();
    debug_assert_eq!(n, size);
    // Rows touching each complex mode: (row index, conj coefficient).
    let mut rows_at: HashMap<[i64; 4], Vec<(usize, u32, Complex64)>> = HashMap::new();
    for (r, bf) in basis.iter().enumerate() {
        for (mode, c) in bf.expansion() {
            rows_at.entry(mode).or_default().push((r, bf.blade, c.conj()));
        }
    }
    let kk = k as i64;
    let mut matrix = DMatrix::<f64>::zeros(n, n);
    for (col, bf) in basis.iter().enumerate() {
        let mut out: HashMap<[i64; 4], [Complex64; BLADES]> = HashMap::new();
        for (xi, alpha) in bf.expansion() {
            let src = bf.blade;
            // Derivative part: i (xi0 - sum xi_a e_a) e_src.
            let slot = out.entry(xi).or_insert([Complex64::new(0.0, 0.0); BLADES]);
            slot[src as usize] += alpha * Complex64::new(0.0, xi[0] as f64);
            for a in 1..4 {
                let g = 1u32 << (a - 1);
                slot[(g ^ src) as usize] -= alpha * Complex64::new(0.0, xi[a] as f64) * product_sign(g, src);
            }
            // Multiplier part: -(b_hat(zeta) e_src) at xi + zeta.
            for (zeta, c) in &mult {
                let eta = [xi[0] + zeta[0], xi[1] + zeta[1], xi[2] + zeta[2], xi[3] + zeta[3]];
                if eta.iter().any(|v| v.abs() > kk) {
                    continue;
                }
                let slot = out.entry(eta).or_insert([Complex64::new(0.0, 0.0); BLADES]);
                for (blade, cb) in c.iter().enumerate() {
                    if cb.norm() == 0.0 {
                        continue;
                    }
                    let s = product_sign(blade as u32, src);
                    slot[blade ^ src as usize] -= alpha * cb * s;
                }
            }
        }
        for (mode, vals) in out {
            if let Some(rows) = rows_at.get(&mode) {
                for &(r, blade, c) in rows {
                    let v = c * vals[blade as usize];
                    matrix[(r, col)] += v.re;
                }
            }
        }
    }
    Ok(AssembledOperator { k, basis, matrix })
}

impl AssembledOperator {
    /// Singular values, computed block by block over the connected components
    /// of the sparsity graph.
    pub fn spectrum(&self) -> OperatorSpectrum {
        let n = self.matrix.nrows();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for c in 0..n {
            for r in 0..n {
                if self.matrix[(r, c)] != 0.0 {
                    let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
        for i in 0..n {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(i);
        }
        let mut roots: Vec<usize> = groups.keys().copied().collect();
        roots.sort_unstable();
        let mut singular_values = Vec::with_capacity(n);
        let mut block_sizes = Vec::new();
        for root in roots {
            let idx = &groups[&root];
            block_sizes.push(idx.len());
            let block = DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.matrix[(idx[r], idx[c])]);
            singular_values.extend(block.singular_values().iter().copied());
        }
        singular_values.sort_by(|a, b| a.total_cmp(b));
        let smax = singular_values.last().copied().unwrap_or(0.0);
        let kernel_tolerance = 1e-10 * smax.max(1.0);
        let kernel_dim = singular_values.iter().filter(|&&s| s <= kernel_tolerance).count();
        let min_nonzero = singular_values.get(kernel_dim).copied();
        OperatorSpectrum { singular_values, kernel_dim, min_nonzero, kernel_tolerance, block_sizes }
    }
}
