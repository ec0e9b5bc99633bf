//! First-order Dirac-type operators on grid fields.
//!
//! With spatial axes `1..d` paired to generators `e_1..e_(d-1)`:
//! left `f -> d0 f - sum e_i di f`, right `f -> d0 f - sum di f e_i`, and the
//! conjugated variants flip the spatial sign. Axis 0 plays the role of the
//! scalar direction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{
    e4_image_basis, oriented_e3_basis, product_sign, BladeIndex, GaugeElement, Multivector, SubspaceTag,
};
use crate::error::{Error, Result};
use crate::grid::{apply_terms, Multiplier, MultivectorField, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiracMode {
    pub side: Side,
    pub conjugated: bool,
    pub dim: usize,
}

impl DiracMode {
    pub fn new(side: Side, conjugated: bool, dim: usize) -> DiracMode {
        DiracMode { side, conjugated, dim }
    }

    pub fn conjugate(self) -> DiracMode {
        DiracMode { conjugated: !self.conjugated, ..self }
    }
}

/// Fourier terms of `sum_a c_a d_a (u_a *)` acting on `2^m` components, where
/// `u_0 = 1` and `u_a` is the multiplier attached to axis `a`.
fn first_order_terms(
    m: usize,
    units: &[(usize, u32, f64)],
    side: Side,
    lap_power: i8,
) -> Vec<Term> {
    let mut terms = Vec::new();
    for &(axis, mask, coef) in units {
        for c in 0..1usize << m {
            let dst = c ^ mask as usize;
            let sign = match side {
                Side::Left => product_sign(mask, c as u32),
                Side::Right => product_sign(c as u32, mask),
            };
            terms.push(Term {
                src: c,
                dst,
                coef: coef * sign,
                mult: Multiplier { derivs: [Some(axis), None], lap_power, discrete: false },
            });
        }
    }
    terms
}

fn apply_field(f: &MultivectorField, terms: &[Term]) -> MultivectorField {
    let inputs: Vec<&[f64]> = f.components().iter().map(|c| c.as_slice()).collect();
    let comps = apply_terms(f.grid(), &inputs, inputs.len(), terms);
    let mut out = MultivectorField::from_components(f.grid(), f.m(), comps).expect("shape preserved");
    out.bandwidth = f.bandwidth;
    out
}

fn dirac_units(mode: DiracMode) -> Vec<(usize, u32, f64)> {
    let s = if mode.conjugated { 1.0 } else { -1.0 };
    let mut units = vec![(0, 0u32, 1.0)];
    units.extend((1..mode.dim).map(|a| (a, BladeIndex::generator(a).mask(), s)));
    units
}

fn check_mode(f: &MultivectorField, mode: DiracMode) -> Result<()> {
    if !(2..=4).contains(&mode.dim) {
        return Err(Error::Dimension(format!("Dirac operator needs d in 2..=4, got {}", mode.dim)));
    }
    if f.grid().dim != mode.dim {
        return Err(Error::Dimension(format!(
            "{}-d operator applied to a field on a {}-d grid",
            mode.dim,
            f.grid().dim
        )));
    }
    if f.m() + 1 < mode.dim {
        return Err(Error::Dimension(format!(
            "{}-d operator needs at least {} generators, field is Cl_{}",
            mode.dim,
            mode.dim - 1,
            f.m()
        )));
    }
    Ok(())
}

pub fn dirac(f: &MultivectorField, mode: DiracMode) -> Result<MultivectorField> {
    check_mode(f, mode)?;
    Ok(apply_field(f, &first_order_terms(f.m(), &dirac_units(mode), mode.side, 0)))
}

/// Quaternion units as `Cl_2` masks: `i = e1`, `j = e2`, `k = e1e2`.
const QUATERNION_UNITS: [u32; 3] = [0b01, 0b10, 0b11];

fn check_quaternion(f: &MultivectorField, active_axes: usize) -> Result<()> {
    if f.m() != 2 {
        return Err(Error::Dimension(format!("quaternion field must be Cl_2-valued, got Cl_{}", f.m())));
    }
    if !(1..=4).contains(&active_axes) || active_axes > f.grid().dim {
        return Err(Error::Dimension(format!(
            "{active_axes} active axes on a {}-d grid",
            f.grid().dim
        )));
    }
    Ok(())
}

fn rf_units(conjugated: bool, active_axes: usize) -> Vec<(usize, u32, f64)> {
    let s = if conjugated { -1.0 } else { 1.0 };
    let mut units = vec![(0, 0u32, 1.0)];
    units.extend((1..active_axes).map(|a| (a, QUATERNION_UNITS[a - 1], s)));
    units
}

/// Right Riemann-Fueter operator `d0 f + d1 f i + d2 f j + d3 f k` on a
/// quaternion field stored as `Cl_2` (`1, i, j, k` at masks 0..4). The
/// conjugate flips the imaginary terms; `active_axes = 3` drops `d3`.
pub fn riemann_fueter(f: &MultivectorField, conjugated: bool, active_axes: usize) -> Result<MultivectorField> {
    check_quaternion(f, active_axes)?;
    Ok(apply_field(f, &first_order_terms(2, &rf_units(conjugated, active_axes), Side::Right, 0)))
}

/// `Delta^{-1}` of the conjugate Riemann-Fueter operator, fused in Fourier space.
pub(crate) fn inverse_riemann_fueter(g: &MultivectorField, active_axes: usize) -> Result<MultivectorField> {
    check_quaternion(g, active_axes)?;
    g.check_zero_mean()?;
    Ok(apply_field(g, &first_order_terms(2, &rf_units(true, active_axes), Side::Right, -1)))
}

/// E4 part of a `Cl_4` field as a quaternion field.
pub fn e4_to_quaternion(v: &MultivectorField) -> Result<MultivectorField> {
    if v.m() != 4 {
        return Err(Error::Dimension(format!("expected a Cl_4 field, got Cl_{}", v.m())));
    }
    let comps = SubspaceTag::E4.blades(4)?.into_iter().map(|b| v.component(b).to_vec()).collect();
    MultivectorField::from_components(v.grid(), 2, comps)
}

/// Quaternion field placed in E4.
pub fn quaternion_to_e4(q: &MultivectorField) -> Result<MultivectorField> {
    if q.m() != 2 {
        return Err(Error::Dimension(format!("expected a Cl_2 field, got Cl_{}", q.m())));
    }
    let mut out = MultivectorField::zeros(q.grid(), 4);
    for (b, c) in SubspaceTag::E4.blades(4)?.into_iter().zip(q.components()) {
        out.set_component(b, c.clone())?;
    }
    out.bandwidth = q.bandwidth;
    Ok(out)
}

fn outside(f: &MultivectorField, allowed: &[BladeIndex]) -> Vec<String> {
    f.support().into_iter().filter(|b| !allowed.contains(b)).map(|b| b.to_string()).collect()
}

/// `(projection onto E4 + p_map on E3)` of the E3/E4 part of a `Cl_4` field.
pub(crate) fn project_e4_plus_p(r: &MultivectorField) -> Result<MultivectorField> {
    let mut out = r.project(&SubspaceTag::E4)?;
    for (t, target) in oriented_e3_basis().iter().zip(e4_image_basis().iter()) {
        let mask = t.support()[0];
        let s = t.coeff(mask);
        let tb = target.support()[0];
        let summed: Vec<f64> = out.component(tb).iter().zip(r.component(mask)).map(|(a, b)| a + s * b).collect();
        out.set_component(tb, summed)?;
    }
    Ok(out)
}

/// `(Pi_4 + P) d_R v` for an E4-valued field on the 4-torus.
pub fn projected_dirac(v: &MultivectorField) -> Result<MultivectorField> {
    if v.m() != 4 || v.grid().dim != 4 {
        return Err(Error::Dimension("projected Dirac operator acts on Cl_4 fields over T^4".into()));
    }
    let bad = outside(v, &SubspaceTag::E4.blades(4)?);
    if !bad.is_empty() {
        return Err(Error::Domain(format!("input has components outside E4: {bad:?}")));
    }
    let r = dirac(v, DiracMode::new(Side::Right, false, 4))?;
    project_e4_plus_p(&r)
}

/// Zero-mean E4 solution `v` of `projected_dirac(v) = g`, computed as
/// `Delta^{-1}` of the conjugate Riemann-Fueter operator applied to `g`.
pub fn invert_projected_dirac(g: &MultivectorField) -> Result<MultivectorField> {
    if g.m() != 4 || g.grid().dim != 4 {
        return Err(Error::Dimension("inverse acts on Cl_4 fields over T^4".into()));
    }
    let bad = outside(g, &SubspaceTag::E4.blades(4)?);
    if !bad.is_empty() {
        return Err(Error::Domain(format!("data has components outside E4: {bad:?}")));
    }
    let q = e4_to_quaternion(g)?;
    quaternion_to_e4(&inverse_riemann_fueter(&q, 4)?)
}

/// Which principal symbol [`symbol`] returns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymbolVariant {
    /// Four-dimensional operator, `xi = (xi0, xi1, xi2, xi3)`.
    Dirac4,
    /// Three-dimensional operator, `xi = (xi0, xi1, xi2)`.
    Rf3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolMatrix {
    pub entries: [[f64; 4]; 4],
    pub det: f64,
}

impl SymbolMatrix {
    fn new(entries: [[f64; 4]; 4]) -> SymbolMatrix {
        let det = nalgebra::Matrix4::from_fn(|r, c| entries[r][c]).determinant();
        SymbolMatrix { entries, det }
    }

    /// Largest `|<c_i, c_j>| / |xi|^2` over distinct columns.
    pub fn column_orthogonality_defect(&self) -> f64 {
        let col = |j: usize| [0, 1, 2, 3].map(|r| self.entries[r][j]);
        let n2: f64 = col(0).iter().map(|x| x * x).sum();
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in i + 1..4 {
                let dot: f64 = col(i).iter().zip(col(j)).map(|(a, b)| a * b).sum();
                worst = worst.max(dot.abs() / n2.max(f64::MIN_POSITIVE));
            }
        }
        worst
    }

    pub fn to_csv_row(&self) -> String {
        self.entries.iter().flatten().map(|v| format!("{v:.17e}")).collect::<Vec<_>>().join(",")
    }
}

/// Principal symbol of the quaternionic operator in the `(1, i, j, k)` basis.
/// Every column has length `|xi|` and the determinant is `|xi|^4`.
pub fn symbol(xi: &[f64], variant: SymbolVariant) -> Result<SymbolMatrix> {
    let x = match variant {
        SymbolVariant::Dirac4 => {
            if xi.len() != 4 {
                return Err(Error::Dimension(format!("4-d symbol needs 4 frequencies, got {}", xi.len())));
            }
            [xi[0], xi[1], xi[2], xi[3]]
        }
        SymbolVariant::Rf3 => {
            if xi.len() != 3 {
                return Err(Error::Dimension(format!("3-d symbol needs 3 frequencies, got {}", xi.len())));
            }
            [xi[0], xi[1], xi[2], 0.0]
        }
    };
    let [a, b, c, d] = x;
    Ok(SymbolMatrix::new([
        [a, -b, -c, -d],
        [b, a, d, -c],
        [c, -d, a, b],
        [d, c, -b, a],
    ]))
}

/// Pointwise group-valued field with its pointwise inverse.
#[derive(Clone, Debug)]
pub struct GaugeField {
    pub value: MultivectorField,
    pub inverse: MultivectorField,
}

impl GaugeField {
    /// `exp(u(x))` at every grid point.
    pub fn from_lie(u: &MultivectorField) -> Result<GaugeField> {
        let grid = u.grid();
        let m = u.m();
        let elems: Vec<Result<GaugeElement>> =
            (0..grid.len()).into_par_iter().map(|i| GaugeElement::from_lie(&u.at(i))).collect();
        let mut value = vec![vec![0.0; grid.len()]; 1 << m];
        let mut inverse = vec![vec![0.0; grid.len()]; 1 << m];
        for (i, e) in elems.into_iter().enumerate() {
            let e = e?;
            for b in 0..1 << m {
                value[b][i] = e.value.coeffs()[b];
                inverse[b][i] = e.inverse.coeffs()[b];
            }
        }
        Ok(GaugeField {
            value: MultivectorField::from_components(grid, m, value)?,
            inverse: MultivectorField::from_components(grid, m, inverse)?,
        })
    }

    /// Pair a field with a claimed inverse, checking `value * inverse = 1`.
    pub fn new(value: MultivectorField, inverse: MultivectorField) -> Result<GaugeField> {
        let g = GaugeField { value, inverse };
        let defect = g.inverse_defect()?;
        if defect > 1e-10 {
            return Err(Error::Domain(format!("value * inverse differs from 1 by {defect:.3e}")));
        }
        Ok(g)
    }

    pub fn identity(grid: crate::grid::GridSpec, m: usize) -> GaugeField {
        let mut one = MultivectorField::zeros(grid, m);
        one.set_component(BladeIndex::SCALAR, vec![1.0; grid.len()]).unwrap();
        GaugeField { value: one.clone(), inverse: one }
    }

    /// `max |q q^{-1} - 1|` over grid points and blades.
    pub fn inverse_defect(&self) -> Result<f64> {
        let prod = self.value.mul(&self.inverse)?;
        let mut one = MultivectorField::zeros(prod.grid(), prod.m());
        one.set_component(BladeIndex::SCALAR, vec![1.0; prod.grid().len()])?;
        Ok(prod.sub(&one)?.max_abs())
    }

    /// `L^4` norm of `|dq|`, the Euclidean magnitude of all first partials.
    pub fn dq_l4(&self) -> Result<f64> {
        let grads = self.value.gradient();
        let refs: Vec<&MultivectorField> = grads.iter().collect();
        crate::norms::lp_norm_many(&refs, 4.0)
    }
}

/// `q^{-1} d_R q`, with `d_R` the non-conjugated right operator.
pub fn gauge_derivative(q: &GaugeField) -> Result<MultivectorField> {
    let dim = q.value.grid().dim;
    let dq = dirac(&q.value, DiracMode::new(Side::Right, false, dim))?;
    q.inverse.mul(&dq)
}

/// Blades `E3 + E4 + E6 + R e1e2e3`. An even gauge field has its gauge
/// derivative here; a general one also picks up a scalar part, the sum of
/// the `e_i` components of `q^{-1} d_i q`.
pub fn gauge_derivative_blades() -> Vec<BladeIndex> {
    let mut allowed = SubspaceTag::E3.blades(4).unwrap();
    allowed.extend(SubspaceTag::E4.blades(4).unwrap());
    allowed.extend(SubspaceTag::E6.blades(4).unwrap());
    allowed.push(BladeIndex::from_generators(&[1, 2, 3]));
    allowed
}

/// Scalar-and-E blade pattern check helper: magnitude of components of `f`
/// outside `allowed`.
pub fn l2_outside(f: &MultivectorField, allowed: &[BladeIndex]) -> f64 {
    let vol = f.grid().cell_volume();
    let s: f64 = (0..f.components().len())
        .filter(|&b| !allowed.contains(&BladeIndex(b as u32)))
        .flat_map(|b| f.components()[b].iter())
        .map(|v| v * v)
        .sum();
    (s * vol).sqrt()
}

/// Constant multivector embedded as a field.
pub fn constant_field(grid: crate::grid::GridSpec, a: &Multivector) -> MultivectorField {
    let comps = a.coeffs().iter().map(|&c| vec![c; grid.len()]).collect();
    MultivectorField::from_components(grid, a.m(), comps).expect("shape matches")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn g4() -> GridSpec {
        GridSpec::new(4, 8).unwrap()
    }

    fn blade(gens: &[usize]) -> BladeIndex {
        BladeIndex::from_generators(gens)
    }

    #[test]
    fn left_dirac_of_sine_scalar() {
        let g = g4();
        let s = MultivectorField::scalar_from_fn(g, |x| x[1].sin());
        let f = MultivectorField::blade_times(&s, 4, BladeIndex::SCALAR).unwrap();
        let out = dirac(&f, DiracMode::new(Side::Left, false, 4)).unwrap();
        let c = MultivectorField::scalar_from_fn(g, |x| -x[1].cos());
        let expect = MultivectorField::blade_times(&c, 4, blade(&[1])).unwrap();
        assert!(out.sub(&expect).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn dirac_rejects_small_algebra() {
        let f = MultivectorField::zeros(g4(), 2);
        assert!(dirac(&f, DiracMode::new(Side::Left, false, 4)).is_err());
    }

    #[test]
    fn conjugate_rf_of_cosine_i() {
        let g = g4();
        let c = MultivectorField::scalar_from_fn(g, |x| x[1].cos());
        let mut f = MultivectorField::zeros(g, 2);
        f.set_component(BladeIndex(1), c.values().unwrap().to_vec()).unwrap();
        let out = riemann_fueter(&f, true, 4).unwrap();
        let expect = MultivectorField::scalar_from_fn(g, |x| -x[1].sin());
        assert!(out.component_field(BladeIndex(0)).sub(&expect).unwrap().max_abs() < 1e-12);
        assert!(out.component_field(BladeIndex(1)).max_abs() < 1e-12);
    }

    #[test]
    fn projected_dirac_of_sine_scalar_part() {
        let g = g4();
        let s = MultivectorField::scalar_from_fn(g, |x| x[1].sin());
        let v = MultivectorField::blade_times(&s, 4, blade(&[4])).unwrap();
        let out = projected_dirac(&v).unwrap();
        let c = MultivectorField::scalar_from_fn(g, |x| x[1].cos());
        let expect = MultivectorField::blade_times(&c, 4, blade(&[1, 4])).unwrap();
        assert!(out.sub(&expect).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn invert_projected_dirac_example() {
        let g = g4();
        let c = MultivectorField::scalar_from_fn(g, |x| x[1].cos());
        let data = MultivectorField::blade_times(&c, 4, blade(&[1, 4])).unwrap();
        let v = invert_projected_dirac(&data).unwrap();
        let s = MultivectorField::scalar_from_fn(g, |x| x[1].sin());
        let expect = MultivectorField::blade_times(&s, 4, blade(&[4])).unwrap();
        assert!(v.sub(&expect).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn projected_dirac_rejects_non_e4() {
        let f = MultivectorField::blade_times(&MultivectorField::scalar_from_fn(g4(), |x| x[0].sin()), 4, blade(&[1]))
            .unwrap();
        assert!(matches!(projected_dirac(&f), Err(Error::Domain(_))));
    }

    #[test]
    fn symbol_at_unit_time_frequency() {
        let s = symbol(&[1.0, 0.0, 0.0, 0.0], SymbolVariant::Dirac4).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(s.entries[r][c], if r == c { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(s.det, 1.0);
        assert!(symbol(&[1.0, 0.0], SymbolVariant::Rf3).is_err());
    }

    #[test]
    fn gauge_derivative_of_time_rotation() {
        let g = g4();
        let (c, s) = (
            MultivectorField::scalar_from_fn(g, |x| x[0].cos()),
            MultivectorField::scalar_from_fn(g, |x| x[0].sin()),
        );
        let e12 = blade(&[1, 2]);
        let mut value = MultivectorField::blade_times(&c, 4, BladeIndex::SCALAR).unwrap();
        value.set_component(e12, s.values().unwrap().to_vec()).unwrap();
        let mut inverse = MultivectorField::blade_times(&c, 4, BladeIndex::SCALAR).unwrap();
        inverse.set_component(e12, s.scale(-1.0).values().unwrap().to_vec()).unwrap();
        let q = GaugeField::new(value, inverse).unwrap();
        let d = gauge_derivative(&q).unwrap();
        let one = MultivectorField::scalar(g, vec![1.0; g.len()]).unwrap();
        let expect = MultivectorField::blade_times(&one, 4, e12).unwrap();
        assert!(d.sub(&expect).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn gauge_derivative_of_space_rotation() {
        let g = g4();
        let u = MultivectorField::blade_times(&MultivectorField::scalar_from_fn(g, |x| x[1]), 4, blade(&[1, 2]))
            .unwrap();
        // x1 is not periodic, but exp(x1 e12) is.
        let q = GaugeField::from_lie(&u).unwrap();
        let d = gauge_derivative(&q).unwrap();
        let one = MultivectorField::scalar(g, vec![-1.0; g.len()]).unwrap();
        let expect = MultivectorField::blade_times(&one, 4, blade(&[2])).unwrap();
        assert!(d.sub(&expect).unwrap().max_abs() < 1e-12);
    }
}
