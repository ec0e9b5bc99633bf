//! Potentials `beta`, the linear gauge system `D v = beta e_d`, the Lorenz
//! special case and the coupled-equation residuals.
//!
//! A potential is the tuple `(beta^0, ..., beta^(d-1))` of real fields and is
//! identified with the multivector `beta^0 + sum beta^i e_i`, so that
//! `beta e_d = beta^0 e_d + sum beta^i e_i e_d` is exactly the right-hand side
//! of the gauge system.

use serde::{Deserialize, Serialize};

use crate::clifford::{BladeIndex, Multivector, SubspaceTag};
use crate::dirac::{
    dirac, gauge_derivative, inverse_riemann_fueter, invert_projected_dirac, project_e4_plus_p, riemann_fueter,
    DiracMode, GaugeField, Side,
};
use crate::error::{Error, Result};
use crate::grid::{apply_terms, GridSpec, Multiplier, MultivectorField, Term};

/// Relative curl size above which the gauge solver refuses a potential.
pub const CURL_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct GaugePotential {
    grid: GridSpec,
    comps: Vec<Vec<f64>>,
}

impl GaugePotential {
    /// One scalar field per axis, `beta^0` first.
    pub fn new(comps: Vec<MultivectorField>) -> Result<GaugePotential> {
        let grid = comps.first().ok_or_else(|| Error::Dimension("empty potential".into()))?.grid();
        if comps.len() != grid.dim {
            return Err(Error::Dimension(format!(
                "potential on a {}-d grid needs {} components, got {}",
                grid.dim,
                grid.dim,
                comps.len()
            )));
        }
        let mut data = Vec::with_capacity(comps.len());
        for c in comps {
            if c.grid() != grid {
                return Err(Error::Dimension("potential components on different grids".into()));
            }
            data.push(c.values()?.to_vec());
        }
        Ok(GaugePotential { grid, comps: data })
    }

    pub fn from_arrays(grid: GridSpec, comps: Vec<Vec<f64>>) -> Result<GaugePotential> {
        let fields = comps.into_iter().map(|c| MultivectorField::scalar(grid, c)).collect::<Result<Vec<_>>>()?;
        GaugePotential::new(fields)
    }

    pub fn zeros(grid: GridSpec) -> GaugePotential {
        GaugePotential { grid, comps: vec![vec![0.0; grid.len()]; grid.dim] }
    }

    /// Coefficients of `d_L alpha = d0 alpha - sum di alpha e_i`, i.e.
    /// `(d0 alpha, -d1 alpha, ..., -d_(d-1) alpha)`.
    pub fn lorenz_source(alpha: &MultivectorField) -> Result<GaugePotential> {
        alpha.values()?;
        let grads = alpha.gradient();
        let comps = grads
            .into_iter()
            .enumerate()
            .map(|(a, g)| if a == 0 { g } else { g.scale(-1.0) })
            .collect();
        GaugePotential::new(comps)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn component(&self, i: usize) -> MultivectorField {
        MultivectorField::scalar(self.grid, self.comps[i].clone()).unwrap()
    }

    pub fn arrays(&self) -> &[Vec<f64>] {
        &self.comps
    }

    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.comps.iter().flatten().map(|v| v * v).sum();
        (s * self.grid.cell_volume()).sqrt()
    }

    /// `beta^0 + sum beta^i e_i` in `Cl_m`, `m >= d - 1`.
    pub fn to_multivector(&self, m: usize) -> Result<MultivectorField> {
        if m + 1 < self.dim() {
            return Err(Error::Dimension(format!("Cl_{m} too small for a {}-d potential", self.dim())));
        }
        let mut out = MultivectorField::zeros(self.grid, m);
        out.set_component(BladeIndex::SCALAR, self.comps[0].clone())?;
        for i in 1..self.dim() {
            out.set_component(BladeIndex::generator(i), self.comps[i].clone())?;
        }
        Ok(out)
    }

    /// `beta e_d` in `Cl_d`.
    pub fn times_top_generator(&self) -> Result<MultivectorField> {
        let d = self.dim();
        let top = Multivector::generator(d, d)?;
        self.to_multivector(d)?.right_mul_const(&top)
    }

    /// `max_(1 <= i < j) ||d_i beta^j - d_j beta^i||_2`.
    pub fn curl_norm(&self) -> f64 {
        let d = self.dim();
        let inputs: Vec<&[f64]> = self.comps.iter().map(|c| c.as_slice()).collect();
        let mut terms = Vec::new();
        let mut pairs = Vec::new();
        for i in 1..d {
            for j in i + 1..d {
                let dst = pairs.len();
                terms.push(Term { src: j, dst, coef: 1.0, mult: Multiplier::deriv(i) });
                terms.push(Term { src: i, dst, coef: -1.0, mult: Multiplier::deriv(j) });
                pairs.push((i, j));
            }
        }
        let out = apply_terms(self.grid, &inputs, pairs.len(), &terms);
        let vol = self.grid.cell_volume();
        out.iter().map(|c| (c.iter().map(|v| v * v).sum::<f64>() * vol).sqrt()).fold(0.0, f64::max)
    }

    pub fn check_zero_mean(&self) -> Result<()> {
        for (i, c) in self.comps.iter().enumerate() {
            let mean = c.iter().sum::<f64>() / c.len() as f64;
            if mean.abs() > crate::grid::MEAN_TOLERANCE {
                return Err(Error::Solvability { component: format!("beta^{i}"), mean });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualRecord {
    /// `||D v - beta e_d||_2 / ||beta||_2`.
    pub system: f64,
    /// Largest `L^2` norm of a trivector component of `D v`.
    pub curl: f64,
    pub beta_norm: f64,
}

/// Components `v^0, ..., v^(d-1)` of `v = v^0 e_d + sum v^j e_j e_d`.
#[derive(Clone, Debug)]
pub struct GaugeFieldSolution {
    pub comps: Vec<MultivectorField>,
    pub residual: ResidualRecord,
}

impl GaugeFieldSolution {
    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    /// `v^0 e_d + sum v^j e_j e_d` as a `Cl_d` field.
    pub fn to_multivector_field(&self) -> Result<MultivectorField> {
        e_valued_field(&self.comps)
    }

    /// Largest `L^2` difference between matching components.
    pub fn max_difference(&self, other: &GaugeFieldSolution) -> Result<f64> {
        let mut worst = 0.0f64;
        for (a, b) in self.comps.iter().zip(&other.comps) {
            worst = worst.max(a.sub(b)?.l2_norm());
        }
        Ok(worst)
    }
}

fn e_valued_field(comps: &[MultivectorField]) -> Result<MultivectorField> {
    let d = comps.len();
    let grid = comps[0].grid();
    let mut out = MultivectorField::zeros(grid, d);
    out.set_component(BladeIndex::generator(d), comps[0].values()?.to_vec())?;
    for (j, c) in comps.iter().enumerate().skip(1) {
        out.set_component(BladeIndex::from_generators(&[j, d]), c.values()?.to_vec())?;
    }
    Ok(out)
}

/// Trivector blades `e_i e_j e_d` (i < j < d) of `Cl_d`.
fn trivector_blades(d: usize) -> Vec<BladeIndex> {
    let mut out = Vec::new();
    for i in 1..d {
        for j in i + 1..d {
            out.push(BladeIndex::from_generators(&[i, j, d]));
        }
    }
    out
}

fn component_l2(f: &MultivectorField, b: BladeIndex) -> f64 {
    (f.component(b).iter().map(|v| v * v).sum::<f64>() * f.grid().cell_volume()).sqrt()
}

fn residual_of(comps: &[MultivectorField], beta: &GaugePotential) -> Result<ResidualRecord> {
    let d = comps.len();
    let v = e_valued_field(comps)?;
    let dv = dirac(&v, DiracMode::new(Side::Right, false, d))?;
    let target = beta.times_top_generator()?;
    let beta_norm = beta.l2_norm();
    let diff = dv.sub(&target)?.l2_norm();
    let curl = trivector_blades(d).into_iter().map(|b| component_l2(&dv, b)).fold(0.0, f64::max);
    Ok(ResidualRecord { system: if beta_norm > 0.0 { diff / beta_norm } else { diff }, curl, beta_norm })
}

fn check_dim(d: usize) -> Result<()> {
    if d != 3 && d != 4 {
        return Err(Error::Dimension(format!("gauge system defined for d = 3 or 4, got {d}")));
    }
    Ok(())
}

/// Solve `D v = beta e_d` for a curl-free, zero-mean potential:
/// `Delta v^0 = d0 beta^0 + sum dj beta^j`, `Delta v^j = d0 beta^j - dj beta^0`.
pub fn solve_dv_beta(beta: &GaugePotential) -> Result<GaugeFieldSolution> {
    let d = beta.dim();
    check_dim(d)?;
    beta.check_zero_mean()?;
    let curl = beta.curl_norm();
    if curl > CURL_TOLERANCE * beta.l2_norm().max(1.0) {
        return Err(Error::Precondition(format!("potential is not curl-free (curl norm {curl:.3e})")));
    }
    let dl = Multiplier::deriv_inv_laplacian;
    let mut terms = vec![Term { src: 0, dst: 0, coef: 1.0, mult: dl(0) }];
    for j in 1..d {
        terms.push(Term { src: j, dst: 0, coef: 1.0, mult: dl(j) });
        terms.push(Term { src: j, dst: j, coef: 1.0, mult: dl(0) });
        terms.push(Term { src: 0, dst: j, coef: -1.0, mult: dl(j) });
    }
    let inputs: Vec<&[f64]> = beta.comps.iter().map(|c| c.as_slice()).collect();
    let comps = apply_terms(beta.grid, &inputs, d, &terms)
        .into_iter()
        .map(|c| MultivectorField::scalar(beta.grid, c))
        .collect::<Result<Vec<_>>>()?;
    let residual = residual_of(&comps, beta)?;
    Ok(GaugeFieldSolution { comps, residual })
}

/// Lorenz-gauge solution for `beta = d_L alpha`:
/// `phi = 2 (-Delta)^{-1} d0 alpha`, `v^0 = -alpha - d0 phi`, `v' = grad' phi`.
/// Returns `phi` and `v`; the residual is measured against
/// [`GaugePotential::lorenz_source`].
pub fn solve_lorenz_gauge(alpha: &MultivectorField) -> Result<(MultivectorField, GaugeFieldSolution)> {
    let d = alpha.grid().dim;
    check_dim(d)?;
    alpha.values()?;
    alpha.check_zero_mean()?;
    let phi = alpha.partial_derivative(0)?.inv_laplacian()?.scale(2.0);
    let grads = phi.gradient();
    let mut comps = vec![alpha.scale(-1.0).sub(&grads[0])?];
    comps.extend(grads.into_iter().skip(1));
    let residual = residual_of(&comps, &GaugePotential::lorenz_source(alpha)?)?;
    Ok((phi, GaugeFieldSolution { comps, residual }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxwellResidual {
    /// `||curl A - B||_2`
    pub magnetic: f64,
    /// `||-d_t A - grad phi - E||_2`
    pub electric: f64,
    /// `||d_t phi + div A - beta_0||_2`
    pub gauge: f64,
}

fn vector_l2(fields: &[MultivectorField]) -> f64 {
    fields.iter().map(|f| f.l2_norm().powi(2)).sum::<f64>().sqrt()
}

/// Residuals of the potential form of Maxwell's equations on the 4-torus with
/// axis 0 as time and axes 1..3 as space. `a`, `b`, `e` hold the three spatial
/// components.
pub fn maxwell_residual(
    a: &[MultivectorField; 3],
    phi: &MultivectorField,
    b: &[MultivectorField; 3],
    e: &[MultivectorField; 3],
    beta0: &MultivectorField,
) -> Result<MaxwellResidual> {
    if phi.grid().dim != 4 {
        return Err(Error::Dimension("Maxwell residuals need a 4-d grid".into()));
    }
    let grad_a: Vec<Vec<MultivectorField>> = a.iter().map(|c| c.gradient()).collect();
    let grad_phi = phi.gradient();
    let mut curl_res = Vec::new();
    let mut elec_res = Vec::new();
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let curl = grad_a[k][j + 1].sub(&grad_a[j][k + 1])?;
        curl_res.push(curl.sub(&b[i])?);
        let field = grad_a[i][0].scale(-1.0).sub(&grad_phi[i + 1])?;
        elec_res.push(field.sub(&e[i])?);
    }
    let mut gauge = grad_phi[0].sub(beta0)?;
    for i in 0..3 {
        gauge = gauge.add(&grad_a[i][i + 1])?;
    }
    Ok(MaxwellResidual { magnetic: vector_l2(&curl_res), electric: vector_l2(&elec_res), gauge: gauge.l2_norm() })
}

/// `d_L f - (beta e_d) f` for a `Cl_d`-valued field.
pub fn equation_residual(beta: &GaugePotential, f: &MultivectorField) -> Result<MultivectorField> {
    let d = beta.dim();
    check_dim(d)?;
    if f.m() != d || f.grid() != beta.grid() {
        return Err(Error::Dimension(format!("expected a Cl_{d} field on the potential's grid")));
    }
    let lhs = dirac(f, DiracMode::new(Side::Left, false, d))?;
    lhs.sub(&beta.times_top_generator()?.mul(f)?)
}

fn relative(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// Relative discrepancy between the single-field residual of
/// `d_L g = -(beta e4) g`, `g = f1 + f2 e4`, and the residuals of the coupled
/// pair `d_L f1 = beta f2^`, `d_L f2 = -beta f1^` (hat: grade involution).
pub fn coupled_reduction_check(f1: &MultivectorField, f2: &MultivectorField, beta: &GaugePotential) -> Result<f64> {
    if beta.dim() != 4 || f1.m() != 3 || f2.m() != 3 {
        return Err(Error::Dimension("coupled reduction needs Cl_3 fields and a 4-d potential".into()));
    }
    let mode = DiracMode::new(Side::Left, false, 4);
    let b3 = beta.to_multivector(3)?;
    let r1 = dirac(f1, mode)?.sub(&b3.mul(&f2.grade_involution())?)?;
    let r2 = dirac(f2, mode)?.add(&b3.mul(&f1.grade_involution())?)?;
    let g = pair_fields(f1, f2)?;
    let dg = dirac(&g, mode)?;
    let bg = beta.times_top_generator()?.mul(&g)?;
    let rg = dg.add(&bg)?;
    let diff = rg.sub(&pair_fields(&r1, &r2)?)?.l2_norm();
    Ok(relative(diff, dg.l2_norm() + bg.l2_norm()))
}

/// Field version of `f1 + f2 e_m`.
pub fn pair_fields(f1: &MultivectorField, f2: &MultivectorField) -> Result<MultivectorField> {
    if f1.m() != f2.m() || f1.grid() != f2.grid() {
        return Err(Error::Dimension("pair components differ in shape".into()));
    }
    let mut comps = f1.components().to_vec();
    comps.extend(f2.components().iter().cloned());
    MultivectorField::from_components(f1.grid(), f1.m() + 1, comps)
}

/// Relative size of
/// `[d0(q f) - sum di(q e_i f)] - q d_L f - q Dq f`, with `Dq = q^{-1} d_R q`.
pub fn gauged_identity_residual(q: &GaugeField, f: &MultivectorField) -> Result<f64> {
    let grid = f.grid();
    if grid.dim != 4 || f.m() != 4 || q.value.m() != 4 {
        return Err(Error::Dimension("gauged identity is checked for Cl_4 fields on T^4".into()));
    }
    let mut lhs = q.value.mul(f)?.partial_derivative(0)?;
    for i in 1..4 {
        let ei = Multivector::generator(4, i)?;
        let term = q.value.mul(&f.left_mul_const(&ei)?)?.partial_derivative(i)?;
        lhs = lhs.sub(&term)?;
    }
    let a = q.value.mul(&dirac(f, DiracMode::new(Side::Left, false, 4))?)?;
    let b = q.value.mul(&gauge_derivative(q)?.mul(f)?)?;
    let diff = lhs.sub(&a)?.sub(&b)?.l2_norm();
    Ok(relative(diff, a.l2_norm() + b.l2_norm()))
}

fn support_error(f: &MultivectorField, allowed: &[BladeIndex], what: &str) -> Result<()> {
    let bad: Vec<String> = f.support().into_iter().filter(|b| !allowed.contains(b)).map(|b| b.to_string()).collect();
    if !bad.is_empty() {
        return Err(Error::Domain(format!("{what} has components outside its subspace: {bad:?}")));
    }
    Ok(())
}

fn blades_of(tags: &[SubspaceTag], m: usize) -> Result<Vec<BladeIndex>> {
    let mut out = Vec::new();
    for t in tags {
        out.extend(t.blades(m)?);
    }
    Ok(out)
}

/// Three-dimensional quaternion layout: `(e3, e1e3, e2e3, e1e2)` for the
/// unknown and `(e0, e1, e2, e1e2)` for the data.
fn input3() -> [BladeIndex; 4] {
    let g = BladeIndex::from_generators;
    [g(&[3]), g(&[1, 3]), g(&[2, 3]), g(&[1, 2])]
}

fn output3() -> [BladeIndex; 4] {
    let g = BladeIndex::from_generators;
    [g(&[]), g(&[1]), g(&[2]), g(&[1, 2])]
}

fn gather(f: &MultivectorField, blades: &[BladeIndex; 4]) -> Result<MultivectorField> {
    let comps = blades.iter().map(|&b| f.component(b).to_vec()).collect();
    MultivectorField::from_components(f.grid(), 2, comps)
}

fn scatter(q: &MultivectorField, m: usize, blades: &[BladeIndex; 4]) -> Result<MultivectorField> {
    let mut out = MultivectorField::zeros(q.grid(), m);
    for (b, c) in blades.iter().zip(q.components()) {
        out.set_component(*b, c.clone())?;
    }
    Ok(out)
}

/// Linearized gauge operator `u -> (omega, g)`.
///
/// `d = 4`: `u` in `E4 + E6`, `omega = Pi_6 Delta u`, `g = (Pi_4 + P) d_R u`.
/// `d = 3`: `u` in `V1 + V2 + V3`, `omega = Pi_V2 Delta u`, and `g` is the
/// three-dimensional Riemann-Fueter operator applied to
/// `(u_e3, u_e13, u_e23, u_e12)`, written in `(e0, e1, e2, e1e2)`.
pub fn linearized_gauge(u: &MultivectorField, d: usize) -> Result<(MultivectorField, MultivectorField)> {
    check_dim(d)?;
    if u.m() != d || u.grid().dim != d {
        return Err(Error::Dimension(format!("expected a Cl_{d} field on a {d}-d grid")));
    }
    if d == 4 {
        support_error(u, &blades_of(&[SubspaceTag::E4, SubspaceTag::E6], 4)?, "u")?;
        let omega = u.laplacian().project(&SubspaceTag::E6)?;
        let g = project_e4_plus_p(&dirac(u, DiracMode::new(Side::Right, false, 4))?)?;
        Ok((omega, g))
    } else {
        support_error(u, &blades_of(&[SubspaceTag::V1, SubspaceTag::V2, SubspaceTag::V3], 3)?, "u")?;
        let omega = u.laplacian().project(&SubspaceTag::V2)?;
        let q = riemann_fueter(&gather(u, &input3())?, false, 3)?;
        Ok((omega, scatter(&q, 3, &output3())?))
    }
}

/// Zero-mean inverse of [`linearized_gauge`].
pub fn invert_linearized(omega: &MultivectorField, g: &MultivectorField, d: usize) -> Result<MultivectorField> {
    check_dim(d)?;
    if omega.m() != d || g.m() != d || omega.grid() != g.grid() || g.grid().dim != d {
        return Err(Error::Dimension(format!("expected Cl_{d} data on a {d}-d grid")));
    }
    if d == 4 {
        support_error(omega, &SubspaceTag::E6.blades(4)?, "omega")?;
        let w = omega.inv_laplacian()?.scale(-1.0);
        w.add(&invert_projected_dirac(g)?)
    } else {
        support_error(omega, &SubspaceTag::V2.blades(3)?, "omega")?;
        support_error(g, &output3(), "g")?;
        let w = omega.inv_laplacian()?.scale(-1.0);
        let v = inverse_riemann_fueter(&gather(g, &output3())?, 3)?;
        w.add(&scatter(&v, 3, &input3())?)
    }
}

/// Largest `L^2` norm of the trivector components `e_i e_j e_d` of `d_R v`.
pub fn trivector_vanishing_check(v: &GaugeFieldSolution) -> Result<f64> {
    let d = v.dim();
    let field = v.to_multivector_field()?;
    let dv = dirac(&field, DiracMode::new(Side::Right, false, d))?;
    Ok(trivector_blades(d).into_iter().map(|b| component_l2(&dv, b)).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(g: GridSpec, f: impl Fn(&[f64]) -> f64 + Sync) -> MultivectorField {
        MultivectorField::scalar_from_fn(g, f)
    }

    #[test]
    fn example_time_cosine() {
        let g = GridSpec::new(4, 8).unwrap();
        let mut comps = vec![scalar(g, |x| x[0].cos())];
        comps.extend((1..4).map(|_| scalar(g, |_| 0.0)));
        let sol = solve_dv_beta(&GaugePotential::new(comps).unwrap()).unwrap();
        assert!(sol.comps[0].sub(&scalar(g, |x| x[0].sin())).unwrap().max_abs() < 1e-12);
        for j in 1..4 {
            assert!(sol.comps[j].max_abs() < 1e-12);
        }
        assert!(sol.residual.system < 1e-12);
    }

    #[test]
    fn example_space_cosine() {
        let g = GridSpec::new(4, 8).unwrap();
        let mut comps = vec![scalar(g, |x| x[1].cos())];
        comps.extend((1..4).map(|_| scalar(g, |_| 0.0)));
        let sol = solve_dv_beta(&GaugePotential::new(comps).unwrap()).unwrap();
        assert!(sol.comps[1].sub(&scalar(g, |x| -x[1].sin())).unwrap().max_abs() < 1e-12);
        assert!(sol.comps[0].max_abs() < 1e-12);
    }

    #[test]
    fn rejects_curl_and_mean() {
        let g = GridSpec::new(4, 8).unwrap();
        let z = || scalar(g, |_| 0.0);
        let curly = vec![z(), scalar(g, |x| x[2].sin()), z(), z()];
        assert!(matches!(solve_dv_beta(&GaugePotential::new(curly).unwrap()), Err(Error::Precondition(_))));
        let meany = vec![scalar(g, |_| 1.0), z(), z(), z()];
        assert!(matches!(solve_dv_beta(&GaugePotential::new(meany).unwrap()), Err(Error::Solvability { .. })));
    }

    #[test]
    fn lorenz_examples() {
        let g = GridSpec::new(4, 8).unwrap();
        let (phi, v) = solve_lorenz_gauge(&scalar(g, |x| x[0].sin())).unwrap();
        assert!(phi.sub(&scalar(g, |x| 2.0 * x[0].cos())).unwrap().max_abs() < 1e-12);
        assert!(v.comps[0].sub(&scalar(g, |x| x[0].sin())).unwrap().max_abs() < 1e-12);
        let alpha = scalar(g, |x| x[1].sin());
        let (_, v) = solve_lorenz_gauge(&alpha).unwrap();
        let beta = GaugePotential::lorenz_source(&alpha).unwrap();
        assert!(beta.component(1).sub(&scalar(g, |x| -x[1].cos())).unwrap().max_abs() < 1e-12);
        let general = solve_dv_beta(&beta).unwrap();
        assert!(v.max_difference(&general).unwrap() < 1e-12);
    }

    #[test]
    fn linearized_example_d4() {
        let g = GridSpec::new(4, 8).unwrap();
        let e12 = BladeIndex::from_generators(&[1, 2]);
        let u = MultivectorField::blade_times(&scalar(g, |x| x[1].sin()), 4, e12).unwrap();
        let (omega, gg) = linearized_gauge(&u, 4).unwrap();
        assert!(omega.add(&u).unwrap().max_abs() < 1e-12);
        assert!(gg.max_abs() < 1e-12);
        let back = invert_linearized(&omega, &gg, 4).unwrap();
        assert!(back.sub(&u).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn maxwell_of_manufactured_fields() {
        let g = GridSpec::new(4, 8).unwrap();
        let a = [scalar(g, |x| x[2].sin()), scalar(g, |x| x[0].cos()), scalar(g, |_| 0.0)];
        let phi = scalar(g, |x| x[1].sin() * x[0].cos());
        // curl A = (d2 A3 - d3 A2, d3 A1 - d1 A3, d1 A2 - d2 A1)
        let b = [scalar(g, |_| 0.0), scalar(g, |_| 0.0), scalar(g, |x| -x[2].cos())];
        let e = [
            scalar(g, |x| -x[1].cos() * x[0].cos()),
            scalar(g, |x| x[0].sin()),
            scalar(g, |_| 0.0),
        ];
        let beta0 = scalar(g, |x| -x[1].sin() * x[0].sin());
        let r = maxwell_residual(&a, &phi, &b, &e, &beta0).unwrap();
        assert!(r.magnetic < 1e-12 && r.electric < 1e-12 && r.gauge < 1e-12, "{r:?}");
    }
}
