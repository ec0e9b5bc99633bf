//! Gauged Hodge decomposition `F = dA + q (d*B + H)` of a `Cl_m`-valued
//! 1-form, built as the series `A = sum A_k`, `B = sum B_k`:
//!
//! ```text
//! -Delta A_0 = d* F                   -Delta B_0 = d(q^{-1} F)
//! -Delta A_k = -d*(q Y_{k-1})         -Delta B_k = -d(q^{-1} dA_{k-1})
//! ```
//!
//! with `Y_k = d*B_k + H_k`. On the torus a closed form need not be exact,
//! so each step also carries the harmonic 1-form `H_k` of the quantity whose
//! `d` feeds `B_k` (its mean, plus Nyquist checkerboard modes once products
//! with `q` leave the resolved band); without it the series cannot
//! reproduce `F` whenever `q^{-1} F` has a harmonic part.

use log::warn;

use crate::clifford::Multivector;
use crate::dirac::{constant_field, GaugeField};
use crate::error::{Error, Result};
use crate::grid::MultivectorField;
use crate::hodge::{
    codifferential_direct, exterior_d, harmonic_part, inv_laplacian_codifferential, inv_laplacian_exterior, DifferentialForm,
};

/// Smallness of `||dq||_{L^4}` below which the series is expected to contract.
pub const SMALLNESS: f64 = 0.1;

/// Consecutive non-contracting steps that count as divergence.
pub const DIVERGENCE_STREAK: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationOptions {
    pub max_iter: usize,
    /// Relative tolerance: stop once `residual <= tol * ||F||`.
    pub tol: f64,
}

impl Default for IterationOptions {
    fn default() -> Self {
        IterationOptions { max_iter: 50, tol: 1e-8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `||F - dA - q (d*B + H)||` after this step.
    pub residual: f64,
    /// `residual / previous residual`; absent for the first step.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct NonlinearHodge {
    pub a: MultivectorField,
    pub b: DifferentialForm,
    pub harmonic: DifferentialForm,
    pub history: Vec<IterationRecord>,
    pub converged: bool,
    pub dq_l4: f64,
}

impl NonlinearHodge {
    pub fn residual(&self) -> f64 {
        self.history.last().map_or(0.0, |r| r.residual)
    }

    /// Largest step-to-step ratio in the history.
    pub fn max_ratio(&self) -> f64 {
        self.history.iter().filter_map(|r| r.ratio).fold(0.0, f64::max)
    }

    /// `b = d*B + H` as a 1-form.
    pub fn b_form(&self) -> Result<DifferentialForm> {
        codifferential_direct(&self.b)?.add(&self.harmonic)
    }

    pub fn history_csv(&self) -> String {
        let mut s = String::from("iteration,residual,ratio\n");
        for r in &self.history {
            let ratio = r.ratio.map_or(String::new(), |v| format!("{v:.17e}"));
            s.push_str(&format!("{},{:.17e},{}\n", r.iteration, r.residual, ratio));
        }
        s
    }
}

/// Decompose `f` (a 1-form) as `dA + q (d*B + H)`.
pub fn nonlinear_hodge_decompose(
    f: &DifferentialForm,
    q: &GaugeField,
    opts: IterationOptions,
) -> Result<NonlinearHodge> {
    let grid = f.grid();
    if f.degree() != 1 {
        return Err(Error::Dimension(format!("expected a 1-form, got degree {}", f.degree())));
    }
    if grid.dim < 2 {
        return Err(Error::Dimension("needs at least two axes".into()));
    }
    if q.value.grid() != grid || q.value.m() != f.m() {
        return Err(Error::Dimension("gauge field and form differ in grid or algebra".into()));
    }
    let dq_l4 = q.dq_l4()?;
    if dq_l4 > SMALLNESS {
        warn!("||dq||_L4 = {dq_l4:.3e} exceeds the smallness threshold {SMALLNESS}");
    }
    let f_norm = f.l2_norm();
    let qinv_f = f.left_mul(&q.inverse)?;

    // Step 0.
    let mut a_k = inv_laplacian_codifferential(f)?.into_coeffs().remove(0);
    let mut b_k = inv_laplacian_exterior(&qinv_f)?;
    let mut h_k = harmonic_part(&qinv_f);

    let mut a_sum = a_k.clone();
    let mut b_sum = b_k.clone();
    let mut h_sum = h_k.clone();
    let mut da_sum = DifferentialForm::zeros(grid, 1, f.m());
    let mut y_sum = DifferentialForm::zeros(grid, 1, f.m());

    let mut history: Vec<IterationRecord> = Vec::new();
    let mut streak = 0;
    let mut k = 0;
    loop {
        let da_k = exterior_d(&DifferentialForm::function(a_k.clone()))?;
        let y_k = codifferential_direct(&b_k)?.add(&h_k)?;
        da_sum = da_sum.add(&da_k)?;
        y_sum = y_sum.add(&y_k)?;
        let residual = f.sub(&da_sum)?.sub(&y_sum.left_mul(&q.value)?)?.l2_norm();
        let ratio = history.last().map(|r| residual / r.residual);
        history.push(IterationRecord { iteration: k, residual, ratio });
        if !residual.is_finite() {
            return Err(Error::Divergence { iterations: k + 1, dq_l4, last_ratio: f64::INFINITY });
        }
        if residual <= opts.tol * f_norm {
            break;
        }
        if let Some(r) = ratio {
            streak = if r >= 1.0 { streak + 1 } else { 0 };
            if streak >= DIVERGENCE_STREAK {
                return Err(Error::Divergence { iterations: k + 1, dq_l4, last_ratio: r });
            }
        }
        if k + 1 >= opts.max_iter {
            break;
        }
        k += 1;
        // Next terms from the previous ones.
        let qy = y_k.left_mul(&q.value)?.scale(-1.0);
        let x = da_k.left_mul(&q.inverse)?.scale(-1.0);
        a_k = inv_laplacian_codifferential(&qy)?.into_coeffs().remove(0);
        b_k = inv_laplacian_exterior(&x)?;
        h_k = harmonic_part(&x);
        a_sum = a_sum.add(&a_k)?;
        b_sum = b_sum.add(&b_k)?;
        h_sum = h_sum.add(&h_k)?;
    }
    let converged = history.last().is_some_and(|r| r.residual <= opts.tol * f_norm);
    Ok(NonlinearHodge { a: a_sum, b: b_sum, harmonic: h_sum, history, converged, dq_l4 })
}

/// `F = (q f, -q e_1 f, ..., -q e_{d-1} f)`.
pub fn gauged_source(q: &GaugeField, f: &MultivectorField) -> Result<DifferentialForm> {
    let grid = f.grid();
    let qf = q.value.mul(f)?;
    let mut coeffs = vec![qf];
    for i in 1..grid.dim {
        let ei = Multivector::generator(f.m(), i)?;
        coeffs.push(q.value.mul(&f.left_mul_const(&ei)?)?.scale(-1.0));
    }
    DifferentialForm::new(grid, 1, coeffs)
}

/// Components of `b = d*B + H` and the residuals of the identities they obey.
#[derive(Clone, Debug)]
pub struct BComponents {
    pub b: Vec<MultivectorField>,
    /// `||sum_i d_i b_i||`, absolute.
    pub divergence: f64,
    /// Worst of `||f - b_0 - q^{-1} d_0 A||` and
    /// `||f - e_i (b_i + q^{-1} d_i A)||`, relative to `||f||`.
    pub consistency: f64,
    /// `d_0 b_0 - sum e_i d_i b_0 = sum d_i (e_i q^{-1} d_0 A + q^{-1} d_i A)`,
    /// relative to the larger side.
    pub dirac: f64,
}

pub fn recover_b_components(
    f: &MultivectorField,
    q: &GaugeField,
    split: &NonlinearHodge,
) -> Result<BComponents> {
    let grid = f.grid();
    if split.a.grid() != grid || split.a.m() != f.m() || q.value.grid() != grid {
        return Err(Error::Dimension("b-component inputs differ in grid or algebra".into()));
    }
    let m = f.m();
    let b = split.b_form()?.into_coeffs();
    let grad_a = split.a.gradient();

    let mut div = MultivectorField::zeros(grid, m);
    for (i, bi) in b.iter().enumerate() {
        div = div.add(&bi.partial_derivative(i)?)?;
    }

    let f_norm = f.l2_norm().max(f64::MIN_POSITIVE);
    let qinv_da: Vec<MultivectorField> = grad_a.iter().map(|g| q.inverse.mul(g)).collect::<Result<_>>()?;
    let mut consistency = f.sub(&b[0].add(&qinv_da[0])?)?.l2_norm() / f_norm;
    for i in 1..grid.dim {
        let ei = Multivector::generator(m, i)?;
        let rhs = b[i].add(&qinv_da[i])?.left_mul_const(&ei)?;
        consistency = consistency.max(f.sub(&rhs)?.l2_norm() / f_norm);
    }

    let mut lhs = b[0].partial_derivative(0)?;
    let mut rhs = MultivectorField::zeros(grid, m);
    for i in 1..grid.dim {
        let ei = Multivector::generator(m, i)?;
        lhs = lhs.sub(&b[0].partial_derivative(i)?.left_mul_const(&ei)?)?;
        let inner = qinv_da[0].left_mul_const(&ei)?.add(&qinv_da[i])?;
        rhs = rhs.add(&inner.partial_derivative(i)?)?;
    }
    let scale = lhs.l2_norm().max(rhs.l2_norm());
    let dirac = if scale > 0.0 { lhs.sub(&rhs)?.l2_norm() / scale } else { 0.0 };

    Ok(BComponents { b, divergence: div.l2_norm(), consistency, dirac })
}

/// Constant gauge field `exp(c)` for a Lie-algebra element `c`.
pub fn constant_gauge(grid: crate::grid::GridSpec, c: &Multivector) -> Result<GaugeField> {
    let e = crate::clifford::GaugeElement::from_lie(c)?;
    GaugeField::new(constant_field(grid, &e.value), constant_field(grid, &e.inverse))
}

/// Gauge field `exp(s u)` with `s > 0` chosen so that `||dq||_{L^4}`
/// equals `target` to relative accuracy `1e-6`.
pub fn gauge_with_dq(u: &MultivectorField, target: f64) -> Result<GaugeField> {
    if !(target >= 0.0 && target.is_finite()) {
        return Err(Error::Parameter(format!("target ||dq||_L4 must be finite and nonnegative, got {target}")));
    }
    if target == 0.0 {
        return Ok(GaugeField::identity(u.grid(), u.m()));
    }
    let at = |s: f64| -> Result<(GaugeField, f64)> {
        let q = GaugeField::from_lie(&u.scale(s))?;
        let v = q.dq_l4()?;
        Ok((q, v))
    };
    // ||d exp(su)|| is close to linear in s, so rescaling by target / value
    // converges in a handful of steps; fall back to secant on stagnation.
    let mut s = 1.0;
    let (_, mut v) = at(s)?;
    if v == 0.0 {
        return Err(Error::Degenerate("u has no derivative".into()));
    }
    let mut prev: Option<(f64, f64)> = None;
    for _ in 0..100 {
        let next = match prev {
            Some((sp, vp)) if (v - vp).abs() > 0.0 && (v - target).abs() > 0.1 * target => {
                s + (target - v) * (s - sp) / (v - vp)
            }
            _ => s * target / v,
        };
        prev = Some((s, v));
        s = next.max(f64::MIN_POSITIVE);
        let (q, vn) = at(s)?;
        v = vn;
        if (v - target).abs() <= 1e-6 * target {
            return Ok(q);
        }
    }
    Err(Error::Iteration(format!("could not reach ||dq||_L4 = {target}; last value {v:.6e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{lie_algebra_blades, BladeIndex, SubspaceTag};
    use crate::grid::GridSpec;
    use crate::random::{generate_field, Support};

    fn g() -> GridSpec {
        GridSpec::new(4, 8).unwrap()
    }

    fn lie(grid: GridSpec, seed: u64) -> MultivectorField {
        let tag = SubspaceTag::Span(lie_algebra_blades(4));
        generate_field(grid, 4, &Support::Tag(tag), 1.0, 2, seed).unwrap()
    }

    fn full(grid: GridSpec, seed: u64) -> MultivectorField {
        let tag = SubspaceTag::Span((0..16).map(BladeIndex).collect());
        generate_field(grid, 4, &Support::Tag(tag), 1.0, 2, seed).unwrap()
    }

    #[test]
    fn identity_gauge_reduces_to_linear_split() {
        let g = g();
        let s = MultivectorField::scalar_from_fn(g, |x| x[1].sin()).embed(4).unwrap();
        let f = exterior_d(&DifferentialForm::function(s.clone())).unwrap();
        let r = nonlinear_hodge_decompose(&f, &GaugeField::identity(g, 4), IterationOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.history.len(), 1);
        assert!(r.a.sub(&s).unwrap().max_abs() < 1e-12);
        assert!(r.b.max_abs() < 1e-12);
    }

    #[test]
    fn zero_source() {
        let g = g();
        let q = gauge_with_dq(&lie(g, 3), 0.05).unwrap();
        let r = nonlinear_hodge_decompose(&DifferentialForm::zeros(g, 1, 4), &q, IterationOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.a.max_abs(), 0.0);
        assert_eq!(r.b.max_abs(), 0.0);
    }

    #[test]
    fn small_gauge_contracts_and_b_identities_hold() {
        let g = g();
        let q = gauge_with_dq(&lie(g, 11), 0.05).unwrap();
        assert!((q.dq_l4().unwrap() - 0.05).abs() < 1e-7);
        let f = full(g, 12);
        let src = gauged_source(&q, &f).unwrap();
        let r = nonlinear_hodge_decompose(&src, &q, IterationOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.max_ratio() <= 0.5, "ratio {}", r.max_ratio());
        assert!(r.history.windows(2).all(|w| w[1].residual < w[0].residual));
        let b = recover_b_components(&f, &q, &r).unwrap();
        assert!(b.divergence <= 1e-8, "div {}", b.divergence);
        assert!(b.consistency <= 1e-6, "consistency {}", b.consistency);
        assert!(b.dirac <= 1e-6, "dirac {}", b.dirac);
    }

    #[test]
    fn identity_gauge_b_components() {
        let g = g();
        let q = GaugeField::identity(g, 4);
        let f = full(g, 5);
        let r = nonlinear_hodge_decompose(&gauged_source(&q, &f).unwrap(), &q, IterationOptions::default()).unwrap();
        let b = recover_b_components(&f, &q, &r).unwrap();
        let expect = f.sub(&r.a.partial_derivative(0).unwrap()).unwrap();
        assert!(b.b[0].sub(&expect).unwrap().max_abs() < 1e-10);
        assert!(b.divergence <= 1e-8);
        let zero = MultivectorField::zeros(g, 4);
        let r0 = nonlinear_hodge_decompose(&gauged_source(&q, &zero).unwrap(), &q, IterationOptions::default()).unwrap();
        let b0 = recover_b_components(&zero, &q, &r0).unwrap();
        assert!(b0.b.iter().all(|c| c.max_abs() == 0.0));
        assert_eq!((b0.divergence, b0.consistency, b0.dirac), (0.0, 0.0, 0.0));
    }

    #[test]
    fn rejects_wrong_degree() {
        let g = g();
        let w = DifferentialForm::zeros(g, 2, 4);
        assert!(nonlinear_hodge_decompose(&w, &GaugeField::identity(g, 4), IterationOptions::default()).is_err());
    }
}
