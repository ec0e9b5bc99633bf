//! Measured constant in the wedge compensation estimate
//! `||grad u||_p <= C ||da||_{L^{m,inf}} ||db||_p` with `-Delta u = da ^ db`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, MultivectorField};
use crate::hodge::{exterior_d, DifferentialForm};
use crate::norms::{lorentz_norm_many, lp_norm_many};
use crate::random::{derive_seed, generate_field, Support};

/// `(da ^ db)_ij = da_i db_j - da_j db_i` for real 1-forms.
pub fn wedge_1forms(da: &DifferentialForm, db: &DifferentialForm) -> Result<DifferentialForm> {
    let grid = da.grid();
    if db.grid() != grid {
        return Err(Error::Dimension("wedge of 1-forms on different grids".into()));
    }
    if da.degree() != 1 || db.degree() != 1 || da.m() != 0 || db.m() != 0 {
        return Err(Error::Dimension("wedge_1forms takes real 1-forms".into()));
    }
    let mut coeffs = Vec::new();
    for i in 0..grid.dim {
        for j in i + 1..grid.dim {
            let ab = da.coeffs()[i].mul(&db.coeffs()[j])?;
            let ba = da.coeffs()[j].mul(&db.coeffs()[i])?;
            coeffs.push(ab.sub(&ba)?);
        }
    }
    DifferentialForm::new(grid, 2, coeffs)
}

/// Which branch of the estimate's proof applies for exponent `p` in
/// dimension `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CompensationCase {
    /// `p > m/(m-1)`: Hoelder into `L^{q,p}`, `1/q = 1/p + 1/m`, then elliptic
    /// regularity.
    AboveCritical,
    /// `p < m/(m-1)`: write `da ^ db = d(da (b - mean b))`.
    BelowCritical,
    /// `p = m/(m-1)`: reached only by interpolation.
    Critical,
}

impl CompensationCase {
    pub fn classify(p: f64, m: usize) -> CompensationCase {
        let crit = m as f64 / (m as f64 - 1.0);
        if (p - crit).abs() <= 1e-12 * crit {
            CompensationCase::Critical
        } else if p > crit {
            CompensationCase::AboveCritical
        } else {
            CompensationCase::BelowCritical
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompensationRecord {
    pub n: usize,
    pub seed: Option<u64>,
    pub p: f64,
    pub m: usize,
    pub grad_u: f64,
    pub da_weak: f64,
    pub db_lp: f64,
    /// `grad_u / (da_weak * db_lp)`.
    pub ratio: f64,
    pub case: CompensationCase,
    /// Intermediate quantity of the applicable proof branch over the same
    /// denominator: `||da ^ db||_{L^{q,p}}` above the critical exponent,
    /// `||da (b - mean b)||_{L^p}` below it.
    pub auxiliary: Option<f64>,
}

impl CompensationRecord {
    pub fn csv_header() -> &'static str {
        "n,seed,p,m,grad_u,da_weak,db_lp,ratio,case,auxiliary"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{:.17e},{},{:.17e},{:.17e},{:.17e},{:.17e},{:?},{}",
            self.n,
            self.seed.map_or(String::new(), |s| s.to_string()),
            self.p,
            self.m,
            self.grad_u,
            self.da_weak,
            self.db_lp,
            self.ratio,
            self.case,
            self.auxiliary.map_or(String::new(), |v| format!("{v:.17e}")),
        )
    }
}

/// Measure the ratio for scalar fields `a`, `b` on a `d`-torus (`m = d`).
pub fn compensation_ratio(a: &MultivectorField, b: &MultivectorField, p: f64) -> Result<CompensationRecord> {
    let grid = a.grid();
    if b.grid() != grid {
        return Err(Error::Dimension("compensation inputs on different grids".into()));
    }
    if a.m() != 0 || b.m() != 0 {
        return Err(Error::Dimension("compensation inputs must be real scalar fields".into()));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Parameter(format!("p must lie in (1, inf), got {p}")));
    }
    a.check_zero_mean()?;
    b.check_zero_mean()?;
    let m = grid.dim;
    let da = exterior_d(&DifferentialForm::function(a.clone()))?;
    let db = exterior_d(&DifferentialForm::function(b.clone()))?;
    let w = wedge_1forms(&da, &db)?;

    let da_weak = lorentz_norm_many(&da.coeffs().iter().collect::<Vec<_>>(), m as f64, f64::INFINITY)?;
    let db_lp = lp_norm_many(&db.coeffs().iter().collect::<Vec<_>>(), p)?;
    let denom = da_weak * db_lp;
    if denom == 0.0 {
        return Err(Error::Degenerate("da or db vanishes identically".into()));
    }

    let u = w.remove_mean().inv_laplacian()?;
    let grads: Vec<MultivectorField> = u.coeffs().iter().flat_map(|c| c.gradient()).collect();
    let grad_u = lp_norm_many(&grads.iter().collect::<Vec<_>>(), p)?;

    let case = CompensationCase::classify(p, m);
    let auxiliary = match case {
        CompensationCase::AboveCritical => {
            let q = 1.0 / (1.0 / p + 1.0 / m as f64);
            Some(lorentz_norm_many(&w.coeffs().iter().collect::<Vec<_>>(), q, p)? / denom)
        }
        CompensationCase::BelowCritical => {
            let bc = b.remove_mean();
            let prods: Vec<MultivectorField> = da.coeffs().iter().map(|c| c.mul(&bc)).collect::<Result<_>>()?;
            Some(lp_norm_many(&prods.iter().collect::<Vec<_>>(), p)? / denom)
        }
        CompensationCase::Critical => None,
    };

    Ok(CompensationRecord {
        n: grid.n,
        seed: None,
        p,
        m,
        grad_u,
        da_weak,
        db_lp,
        ratio: grad_u / denom,
        case,
        auxiliary,
    })
}

/// Seeded pair of scalar fields shared by every grid size.
pub fn seeded_pair(grid: GridSpec, seed: u64, bandwidth: usize) -> Result<(MultivectorField, MultivectorField)> {
    let a = generate_field(grid, 0, &Support::Scalar, 1.0, bandwidth, derive_seed(seed, 0))?;
    let b = generate_field(grid, 0, &Support::Scalar, 1.0, bandwidth, derive_seed(seed, 1))?;
    Ok((a, b))
}

/// Empirical constant over `count` seeded pairs on one grid.
#[derive(Clone, Debug, Serialize)]
pub struct CompensationBatch {
    pub n: usize,
    pub records: Vec<CompensationRecord>,
    pub max_ratio: f64,
}

pub fn compensation_batch(grid: GridSpec, seed: u64, count: usize, bandwidth: usize, p: f64) -> Result<CompensationBatch> {
    let records: Vec<CompensationRecord> = (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let s = derive_seed(seed, 1000 + k);
            let (a, b) = seeded_pair(grid, s, bandwidth)?;
            let mut r = compensation_ratio(&a, &b, p)?;
            r.seed = Some(s);
            Ok(r)
        })
        .collect::<Result<_>>()?;
    let max_ratio = records.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(CompensationBatch { n: grid.n, records, max_ratio })
}

/// `|C_1 - C_2| / max(C_1, C_2)`.
pub fn relative_spread(c1: f64, c2: f64) -> f64 {
    let top = c1.max(c2);
    if top == 0.0 {
        0.0
    } else {
        (c1 - c2).abs() / top
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real_form(g: GridSpec, f: impl Fn(usize, &[f64]) -> f64 + Sync + Copy) -> DifferentialForm {
        let coeffs = (0..g.dim).map(|i| MultivectorField::scalar_from_fn(g, move |x| f(i, x))).collect();
        DifferentialForm::new(g, 1, coeffs).unwrap()
    }

    #[test]
    fn wedge_examples() {
        let g = GridSpec::new(4, 8).unwrap();
        let da = real_form(g, |i, x| if i == 1 { x[1].cos() } else { 0.0 });
        let db = real_form(g, |i, x| if i == 2 { x[2].cos() } else { 0.0 });
        let w = wedge_1forms(&da, &db).unwrap();
        let expect = MultivectorField::scalar_from_fn(g, |x| x[1].cos() * x[2].cos());
        assert_eq!(w.coeff(&[1, 2]).unwrap().sub(&expect).unwrap().max_abs(), 0.0);
        assert_eq!(w.coeff(&[0, 1]).unwrap().max_abs(), 0.0);
        assert_eq!(wedge_1forms(&da, &da).unwrap().max_abs(), 0.0);
        let zero = DifferentialForm::zeros(g, 1, 0);
        assert_eq!(wedge_1forms(&zero, &db).unwrap().max_abs(), 0.0);
        let anti = wedge_1forms(&db, &da).unwrap().add(&w).unwrap();
        assert_eq!(anti.max_abs(), 0.0);
    }

    #[test]
    fn equal_inputs_give_zero_ratio() {
        let g = GridSpec::new(3, 12).unwrap();
        let (a, _) = seeded_pair(g, 4, 3).unwrap();
        let r = compensation_ratio(&a, &a, 2.0).unwrap();
        assert_eq!(r.ratio, 0.0);
    }

    #[test]
    fn ratio_is_scale_invariant() {
        let g = GridSpec::new(3, 12).unwrap();
        let (a, b) = seeded_pair(g, 8, 3).unwrap();
        let r = compensation_ratio(&a, &b, 2.5).unwrap();
        let s = compensation_ratio(&a.scale(-3.7), &b, 2.5).unwrap();
        assert!((r.ratio - s.ratio).abs() <= 1e-10 * r.ratio);
        assert!(r.ratio > 0.0 && r.ratio.is_finite());
    }

    #[test]
    fn single_mode_pair_is_grid_stable() {
        let ratio = |n: usize| {
            let g = GridSpec::new(4, n).unwrap();
            let a = MultivectorField::scalar_from_fn(g, |x| x[1].sin());
            let b = MultivectorField::scalar_from_fn(g, |x| x[2].sin());
            compensation_ratio(&a, &b, 2.0).unwrap()
        };
        let (r16, r24) = (ratio(16), ratio(24));
        assert_eq!(r16.case, CompensationCase::AboveCritical);
        assert!(relative_spread(r16.ratio, r24.ratio) <= 0.2);
    }

    #[test]
    fn cases_and_errors() {
        assert_eq!(CompensationCase::classify(4.0 / 3.0, 4), CompensationCase::Critical);
        assert_eq!(CompensationCase::classify(1.2, 4), CompensationCase::BelowCritical);
        let g = GridSpec::new(3, 8).unwrap();
        let a = MultivectorField::scalar_from_fn(g, |x| x[0].sin());
        let z = MultivectorField::zeros(g, 0);
        assert!(matches!(compensation_ratio(&a, &z, 2.0), Err(Error::Degenerate(_))));
        assert!(compensation_ratio(&a, &a, 1.0).is_err());
        let below = compensation_ratio(&a, &MultivectorField::scalar_from_fn(g, |x| x[1].cos()), 1.2).unwrap();
        assert!(below.auxiliary.unwrap() > 0.0);
    }
}
