//! Lebesgue, Lorentz and negative-Sobolev norms of grid fields.
//!
//! Every norm acts on the pointwise Euclidean magnitude over all supplied
//! component arrays, with each sample weighted by the cell volume.

use crate::error::{Error, Result};
use crate::grid::{apply_terms, GridSpec, Multiplier, MultivectorField, Term};

/// Pointwise Euclidean magnitude over a set of component arrays.
pub fn magnitudes(comps: &[&[f64]]) -> Vec<f64> {
    let len = comps.first().map_or(0, |c| c.len());
    let mut out = vec![0.0; len];
    for c in comps {
        for (o, v) in out.iter_mut().zip(c.iter()) {
            *o += v * v;
        }
    }
    out.iter_mut().for_each(|o| *o = o.sqrt());
    out
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(Error::Parameter(format!("exponent p = {p} must be >= 1")));
    }
    Ok(())
}

/// `(sum |f|^p * cellvol)^(1/p)`; `p = inf` gives the max.
pub fn lp_of_magnitudes(mag: &[f64], cell_volume: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    if p.is_infinite() {
        return Ok(mag.iter().fold(0.0, |a: f64, &v| a.max(v)));
    }
    let s: f64 = mag.iter().map(|v| v.powf(p)).sum();
    Ok((s * cell_volume).powf(1.0 / p))
}

/// Lorentz quasi-norm of the piecewise-constant function with the given cell
/// values.
///
/// With the decreasing rearrangement `f*_1 >= f*_2 >= ...` and `t_k = k *
/// cellvol`, the weak norm (`q = inf`) is `max_k t_k^(1/p) f*_k`; for finite
/// `q` the integral `(q/p) int (t^(1/p) f*(t))^q dt/t` is evaluated exactly on
/// each cell, giving `sum_k f*_k^q (t_k^(q/p) - t_(k-1)^(q/p))`.
pub fn lorentz_of_magnitudes(mag: &[f64], cell_volume: f64, p: f64, q: f64) -> Result<f64> {
    check_p(p)?;
    if p.is_infinite() {
        return Err(Error::Parameter("Lorentz norm needs finite p".into()));
    }
    if !(q > 0.0) {
        return Err(Error::Parameter(format!("Lorentz exponent q = {q} must be positive")));
    }
    let mut sorted = mag.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    if q.is_infinite() {
        return Ok(sorted
            .iter()
            .enumerate()
            .fold(0.0, |acc: f64, (k, &v)| acc.max(((k + 1) as f64 * cell_volume).powf(1.0 / p) * v)));
    }
    let s = q / p;
    let mut prev = 0.0f64;
    let mut total = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        let next = ((k + 1) as f64 * cell_volume).powf(s);
        total += v.powf(q) * (next - prev);
        prev = next;
    }
    Ok(total.powf(1.0 / q))
}

pub fn lp_norm(f: &MultivectorField, p: f64) -> Result<f64> {
    let comps: Vec<&[f64]> = f.components().iter().map(|c| c.as_slice()).collect();
    lp_of_magnitudes(&magnitudes(&comps), f.grid().cell_volume(), p)
}

pub fn lorentz_norm(f: &MultivectorField, p: f64, q: f64) -> Result<f64> {
    let comps: Vec<&[f64]> = f.components().iter().map(|c| c.as_slice()).collect();
    lorentz_of_magnitudes(&magnitudes(&comps), f.grid().cell_volume(), p, q)
}

/// `L^p` norm of a collection of fields taken as one vector-valued field.
pub fn lp_norm_many(fields: &[&MultivectorField], p: f64) -> Result<f64> {
    let grid = same_grid(fields)?;
    let comps: Vec<&[f64]> = fields.iter().flat_map(|f| f.components().iter().map(|c| c.as_slice())).collect();
    lp_of_magnitudes(&magnitudes(&comps), grid.cell_volume(), p)
}

pub fn lorentz_norm_many(fields: &[&MultivectorField], p: f64, q: f64) -> Result<f64> {
    let grid = same_grid(fields)?;
    let comps: Vec<&[f64]> = fields.iter().flat_map(|f| f.components().iter().map(|c| c.as_slice())).collect();
    lorentz_of_magnitudes(&magnitudes(&comps), grid.cell_volume(), p, q)
}

fn same_grid(fields: &[&MultivectorField]) -> Result<GridSpec> {
    let grid = fields.first().ok_or_else(|| Error::Parameter("no fields given".into()))?.grid();
    if fields.iter().any(|f| f.grid() != grid) {
        return Err(Error::Dimension("fields live on different grids".into()));
    }
    Ok(grid)
}

/// `||grad (-Delta)^{-1} f||_p`, the surrogate used for the `W^{-1,p}` norm.
/// Requires every component of `f` to have zero mean.
pub fn w_minus1_norm(f: &MultivectorField, p: f64) -> Result<f64> {
    f.check_zero_mean()?;
    let grid = f.grid();
    let nc = f.components().len();
    let inputs: Vec<&[f64]> = f.components().iter().map(|c| c.as_slice()).collect();
    let terms: Vec<Term> = (0..grid.dim)
        .flat_map(|a| {
            (0..nc).map(move |c| Term { src: c, dst: a * nc + c, coef: -1.0, mult: Multiplier::deriv_inv_laplacian(a) })
        })
        .collect();
    let out = apply_terms(grid, &inputs, nc * grid.dim, &terms);
    let comps: Vec<&[f64]> = out.iter().map(|c| c.as_slice()).collect();
    lp_of_magnitudes(&magnitudes(&comps), grid.cell_volume(), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn lp_of_constant_on_four_torus() {
        let g = GridSpec::new(4, 8).unwrap();
        let f = MultivectorField::scalar(g, vec![1.0; g.len()]).unwrap();
        assert!((lp_norm(&f, 4.0).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!((lorentz_norm(&f, 4.0, f64::INFINITY).unwrap() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn lorentz_pp_equals_lp() {
        let g = GridSpec::new(2, 16).unwrap();
        let f = MultivectorField::scalar_from_fn(g, |x| (x[0]).sin() * (2.0 * x[1]).cos() + 0.3);
        for p in [1.5, 2.0, 4.0] {
            let a = lp_norm(&f, p).unwrap();
            let b = lorentz_norm(&f, p, p).unwrap();
            assert!((a - b).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn indicator_weak_norm() {
        // Indicator of M cells: weak norm (M cellvol)^(1/p).
        let mag = [1.0, 1.0, 1.0, 0.0, 0.0];
        let w = lorentz_of_magnitudes(&mag, 0.5, 2.0, f64::INFINITY).unwrap();
        assert!((w - 1.5f64.sqrt()).abs() < 1e-15);
        let q3 = lorentz_of_magnitudes(&mag, 0.5, 2.0, 3.0).unwrap();
        assert!((q3 - 1.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(lp_of_magnitudes(&[1.0], 1.0, 0.5).is_err());
        assert!(lorentz_of_magnitudes(&[1.0], 1.0, 2.0, 0.0).is_err());
        assert!(lp_of_magnitudes(&[1.0], 1.0, f64::NAN).is_err());
    }

    #[test]
    fn w_minus1_of_single_mode() {
        // u = sin(2x)/4, |u'| = |cos(2x)|/2.
        let g = GridSpec::new(1, 16).unwrap();
        let f = MultivectorField::scalar_from_fn(g, |x| (2.0 * x[0]).sin());
        let w = w_minus1_norm(&f, 2.0).unwrap();
        let expect = (0.25 * PI).sqrt();
        assert!((w - expect).abs() < 1e-12);
    }
}
