//! Real Clifford algebras `Cl_m` (m <= 8) with every generator squaring to -1.
//!
//! Blades are stored as bitmasks: bit `i - 1` set means generator `e_i` is a
//! factor, and the empty mask is the scalar unit `e_0`. Coefficients of a
//! multivector are indexed by mask.

use std::fmt;
use std::sync::OnceLock;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_GENERATORS: usize = 8;

/// Maximum number of terms summed by [`mv_exp`].
pub const EXP_MAX_TERMS: usize = 200;

/// Canonical (increasing-index) basis blade, stored as a generator bitmask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BladeIndex(pub u32);

impl BladeIndex {
    pub const SCALAR: BladeIndex = BladeIndex(0);

    /// Blade of a single generator `e_i`, `i >= 1`.
    pub fn generator(i: usize) -> BladeIndex {
        assert!((1..=MAX_GENERATORS).contains(&i), "generator index out of range");
        BladeIndex(1 << (i - 1))
    }

    /// Canonical blade containing the given generators (order and sign ignored).
    pub fn from_generators(gens: &[usize]) -> BladeIndex {
        BladeIndex(gens.iter().fold(0, |acc, &g| acc | BladeIndex::generator(g).0))
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn grade(self) -> u32 {
        self.0.count_ones()
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << (i - 1)) != 0
    }

    /// Generator indices in increasing order.
    pub fn generators(self) -> Vec<usize> {
        (1..=MAX_GENERATORS).filter(|&i| self.contains(i)).collect()
    }
}

impl fmt::Display for BladeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return write!(f, "e0");
        }
        write!(f, "e")?;
        for g in self.generators() {
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

/// Sign of `e_a * e_b = sign * e_(a xor b)` for canonical blades `a`, `b`.
///
/// Counts the transpositions needed to sort the concatenated word and applies
/// `e_i^2 = -1` once per shared generator.
pub fn product_sign(a: u32, b: u32) -> f64 {
    let mut swaps = 0u32;
    let mut rest = a >> 1;
    while rest != 0 {
        swaps += (rest & b).count_ones();
        rest >>= 1;
    }
    swaps += (a & b).count_ones();
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `product_sign` for every blade pair of `Cl_m`, row-major in the left factor.
pub fn sign_table(m: usize) -> &'static [f64] {
    static TABLES: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| {
        (0..=MAX_GENERATORS)
            .map(|m| {
                let n = 1usize << m;
                (0..n * n).map(|i| product_sign((i / n) as u32, (i % n) as u32)).collect()
            })
            .collect()
    });
    &tables[m]
}

/// `out = a * b` on raw coefficient slices of length `2^m`.
fn mul_into(a: &[f64], b: &[f64], out: &mut [f64], table: &[f64]) {
    let n = a.len();
    out.fill(0.0);
    for (i, &ca) in a.iter().enumerate() {
        if ca == 0.0 {
            continue;
        }
        let row = &table[i * n..(i + 1) * n];
        for (j, &cb) in b.iter().enumerate() {
            out[i ^ j] += row[j] * ca * cb;
        }
    }
}

/// Element of `Cl_m`, dense in the `2^m` blade basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multivector {
    m: usize,
    coeffs: Vec<f64>,
}

fn check_m(m: usize) -> Result<()> {
    if m > MAX_GENERATORS {
        return Err(Error::Dimension(format!(
            "Cl_{m} exceeds the supported maximum of {MAX_GENERATORS} generators"
        )));
    }
    Ok(())
}

impl Multivector {
    pub fn zero(m: usize) -> Multivector {
        check_m(m).expect("algebra too large");
        Multivector { m, coeffs: vec![0.0; 1 << m] }
    }

    pub fn scalar(m: usize, s: f64) -> Multivector {
        let mut out = Multivector::zero(m);
        out.coeffs[0] = s;
        out
    }

    pub fn basis(m: usize, blade: BladeIndex) -> Result<Multivector> {
        if blade.0 >= (1 << m) {
            return Err(Error::Dimension(format!("blade {blade} not in Cl_{m}")));
        }
        let mut out = Multivector::zero(m);
        out.coeffs[blade.0 as usize] = 1.0;
        Ok(out)
    }

    pub fn generator(m: usize, i: usize) -> Result<Multivector> {
        if i == 0 || i > m {
            return Err(Error::Dimension(format!("generator e{i} not in Cl_{m}")));
        }
        Multivector::basis(m, BladeIndex::generator(i))
    }

    /// Ordered product of generators, e.g. `[3, 1, 4]` gives `e3 e1 e4 = -e134`.
    pub fn generator_product(m: usize, gens: &[usize]) -> Result<Multivector> {
        let mut out = Multivector::scalar(m, 1.0);
        for &g in gens {
            out = out.mul(&Multivector::generator(m, g)?)?;
        }
        Ok(out)
    }

    pub fn from_coeffs(m: usize, coeffs: Vec<f64>) -> Result<Multivector> {
        check_m(m)?;
        if coeffs.len() != 1 << m {
            return Err(Error::Dimension(format!(
                "Cl_{m} needs {} coefficients, got {}",
                1 << m,
                coeffs.len()
            )));
        }
        Ok(Multivector { m, coeffs })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, blade: BladeIndex) -> f64 {
        self.coeffs.get(blade.0 as usize).copied().unwrap_or(0.0)
    }

    pub fn set_coeff(&mut self, blade: BladeIndex, value: f64) {
        self.coeffs[blade.0 as usize] = value;
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |acc: f64, c| acc.max(c.abs()))
    }

    /// Geometric product.
    pub fn mul(&self, other: &Multivector) -> Result<Multivector> {
        if self.m != other.m {
            return Err(Error::Dimension(format!(
                "cannot multiply Cl_{} by Cl_{}",
                self.m, other.m
            )));
        }
        let mut out = vec![0.0; self.coeffs.len()];
        mul_into(&self.coeffs, &other.coeffs, &mut out, sign_table(self.m));
        Ok(Multivector { m: self.m, coeffs: out })
    }

    /// Grade involution: each blade picks up `(-1)^grade`.
    pub fn grade_involution(&self) -> Multivector {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(mask, &c)| if (mask as u32).count_ones() % 2 == 0 { c } else { -c })
            .collect();
        Multivector { m: self.m, coeffs }
    }

    /// Clifford conjugation, the anti-automorphism with `e_i -> -e_i`. A
    /// grade-`k` blade picks up `(-1)^(k (k + 1) / 2)`.
    pub fn conjugate(&self) -> Multivector {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(mask, &c)| {
                let k = (mask as u32).count_ones();
                if (k * (k + 1) / 2) % 2 == 0 {
                    c
                } else {
                    -c
                }
            })
            .collect();
        Multivector { m: self.m, coeffs }
    }

    /// Blades carrying a nonzero coefficient.
    pub fn support(&self) -> Vec<BladeIndex> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(mask, _)| BladeIndex(mask as u32))
            .collect()
    }

    pub fn is_supported_in(&self, blades: &[BladeIndex]) -> bool {
        self.support().iter().all(|b| blades.contains(b))
    }

    /// Orthogonal projection onto a span of basis blades.
    pub fn project(&self, tag: &SubspaceTag) -> Result<Multivector> {
        let blades = tag.blades(self.m)?;
        let mut out = Multivector::zero(self.m);
        for b in blades {
            out.coeffs[b.0 as usize] = self.coeffs[b.0 as usize];
        }
        Ok(out)
    }

    /// Embed into a larger algebra `Cl_m'` with `m' >= m`.
    pub fn embed(&self, m: usize) -> Result<Multivector> {
        if m < self.m {
            return Err(Error::Dimension(format!("cannot embed Cl_{} into Cl_{m}", self.m)));
        }
        let mut coeffs = vec![0.0; 1 << m];
        coeffs[..self.coeffs.len()].copy_from_slice(&self.coeffs);
        Multivector::from_coeffs(m, coeffs)
    }
}

impl Add for &Multivector {
    type Output = Multivector;
    fn add(self, rhs: &Multivector) -> Multivector {
        assert_eq!(self.m, rhs.m, "algebra mismatch in addition");
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect();
        Multivector { m: self.m, coeffs }
    }
}

impl Sub for &Multivector {
    type Output = Multivector;
    fn sub(self, rhs: &Multivector) -> Multivector {
        assert_eq!(self.m, rhs.m, "algebra mismatch in subtraction");
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect();
        Multivector { m: self.m, coeffs }
    }
}

impl Neg for &Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        Multivector { m: self.m, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Mul<f64> for &Multivector {
    type Output = Multivector;
    fn mul(self, s: f64) -> Multivector {
        Multivector { m: self.m, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }
}

/// Geometric product, free-function form.
pub fn mv_mul(a: &Multivector, b: &Multivector) -> Result<Multivector> {
    a.mul(b)
}

pub fn grade_involution(a: &Multivector) -> Multivector {
    a.grade_involution()
}

/// Named coordinate subspaces.
///
/// `E4`, `E6`, `E3` live in `Cl_4`; `V1`, `V2`, `V3` live in `Cl_3`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubspaceTag {
    /// span{e4, e1e4, e2e4, e3e4}
    E4,
    /// span{e1, e2, e3, e1e2, e1e3, e2e3}
    E6,
    /// span{e2e3e4, e3e1e4, e1e2e4}
    E3,
    /// span{e1e2}
    V1,
    /// span{e1, e2}
    V2,
    /// span{e3, e1e3, e2e3}
    V3,
    Span(Vec<BladeIndex>),
}

impl SubspaceTag {
    pub fn blades(&self, m: usize) -> Result<Vec<BladeIndex>> {
        let need = |want: usize| -> Result<()> {
            if m != want {
                return Err(Error::Dimension(format!("{self:?} is defined in Cl_{want}, not Cl_{m}")));
            }
            Ok(())
        };
        let g = BladeIndex::from_generators;
        Ok(match self {
            SubspaceTag::E4 => {
                need(4)?;
                vec![g(&[4]), g(&[1, 4]), g(&[2, 4]), g(&[3, 4])]
            }
            SubspaceTag::E6 => {
                need(4)?;
                vec![g(&[1]), g(&[2]), g(&[3]), g(&[1, 2]), g(&[1, 3]), g(&[2, 3])]
            }
            SubspaceTag::E3 => {
                need(4)?;
                vec![g(&[2, 3, 4]), g(&[1, 3, 4]), g(&[1, 2, 4])]
            }
            SubspaceTag::V1 => {
                need(3)?;
                vec![g(&[1, 2])]
            }
            SubspaceTag::V2 => {
                need(3)?;
                vec![g(&[1]), g(&[2])]
            }
            SubspaceTag::V3 => {
                need(3)?;
                vec![g(&[3]), g(&[1, 3]), g(&[2, 3])]
            }
            SubspaceTag::Span(blades) => {
                if let Some(b) = blades.iter().find(|b| b.0 >= (1 << m)) {
                    return Err(Error::Dimension(format!("blade {b} not in Cl_{m}")));
                }
                blades.clone()
            }
        })
    }
}

/// Vectors and bivectors of `Cl_m`: the Lie algebra whose exponential is the
/// gauge group. For `m = 4` this is `E4 + E6`.
pub fn lie_algebra_blades(m: usize) -> Vec<BladeIndex> {
    (0..1u32 << m)
        .filter(|mask| matches!(mask.count_ones(), 1 | 2))
        .map(BladeIndex)
        .collect()
}

/// Exponential by power series, summed until the terms stop contributing.
pub fn mv_exp(a: &Multivector) -> Result<Multivector> {
    if a.coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Iteration("exp of a non-finite multivector".into()));
    }
    let allowed = lie_algebra_blades(a.m);
    if !a.is_supported_in(&allowed) {
        return Err(Error::Domain(format!(
            "exp argument has support {:?} outside the vector+bivector Lie algebra",
            a.support().iter().map(|b| b.to_string()).collect::<Vec<_>>()
        )));
    }
    // Scaling and squaring keeps the series argument below 1 so the terms
    // never grow and nothing cancels.
    let norm = a.norm();
    let halvings = if norm > 1.0 { norm.log2().ceil() as i32 } else { 0 };
    let scaled: Vec<f64> = a.coeffs.iter().map(|c| c * 0.5f64.powi(halvings)).collect();
    let table = sign_table(a.m);
    let n = scaled.len();
    let mut sum = vec![0.0; n];
    sum[0] = 1.0;
    let mut term = sum.clone();
    let mut next = vec![0.0; n];
    for k in 1..EXP_MAX_TERMS {
        mul_into(&term, &scaled, &mut next, table);
        let inv = 1.0 / k as f64;
        let mut tn = 0.0;
        for ((t, x), s) in term.iter_mut().zip(&next).zip(sum.iter_mut()) {
            *t = x * inv;
            *s += *t;
            tn += *t * *t;
        }
        if !tn.is_finite() {
            break;
        }
        let sn: f64 = sum.iter().map(|v| v * v).sum();
        if tn.sqrt() <= f64::EPSILON * 1e-2 * sn.sqrt().max(1.0) {
            for _ in 0..halvings {
                mul_into(&sum, &sum, &mut next, table);
                std::mem::swap(&mut sum, &mut next);
            }
            return Ok(Multivector { m: a.m, coeffs: sum });
        }
    }
    Err(Error::Iteration(format!(
        "exp series did not converge within {EXP_MAX_TERMS} terms (|a| = {:.3e})",
        a.norm()
    )))
}

/// Group element `exp(a)` together with its inverse `exp(-a)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeElement {
    pub value: Multivector,
    pub inverse: Multivector,
}

impl GaugeElement {
    pub fn from_lie(a: &Multivector) -> Result<GaugeElement> {
        // Conjugation negates the Lie algebra, so conj(exp a) = exp(-a).
        let value = mv_exp(a)?;
        let inverse = value.conjugate();
        Ok(GaugeElement { value, inverse })
    }

    pub fn identity(m: usize) -> GaugeElement {
        GaugeElement { value: Multivector::scalar(m, 1.0), inverse: Multivector::scalar(m, 1.0) }
    }

    /// `max |value * inverse - 1|` over coefficients.
    pub fn inverse_defect(&self) -> Result<f64> {
        let prod = self.value.mul(&self.inverse)?;
        Ok((&prod - &Multivector::scalar(self.value.m, 1.0)).max_abs())
    }
}

/// Oriented trivectors `e_(k+1) e_(k-1) e4` for k = 1, 2, 3 (indices mod 3).
pub fn oriented_e3_basis() -> [Multivector; 3] {
    let cyc = |k: usize| (k + 2) % 3 + 1;
    let t = |k: usize| Multivector::generator_product(4, &[cyc(k + 1), cyc(k - 1), 4]).unwrap();
    [t(1), t(2), t(3)]
}

/// `e_k e4` for k = 1, 2, 3.
pub fn e4_image_basis() -> [Multivector; 3] {
    let b = |k: usize| Multivector::basis(4, BladeIndex::from_generators(&[k, 4])).unwrap();
    [b(1), b(2), b(3)]
}

/// Linear map `E3 -> E4` sending `e_(k+1) e_(k-1) e4` to `e_k e4`.
pub fn p_map(a: &Multivector) -> Result<Multivector> {
    if a.m != 4 {
        return Err(Error::Dimension(format!("p_map acts on Cl_4, got Cl_{}", a.m)));
    }
    if !a.is_supported_in(&SubspaceTag::E3.blades(4)?) {
        return Err(Error::Domain("p_map input must lie in E3".into()));
    }
    Ok(p_map_unchecked(a))
}

/// [`p_map`] applied to the E3 part of `a`, ignoring everything else.
pub(crate) fn p_map_unchecked(a: &Multivector) -> Multivector {
    let mut out = Multivector::zero(4);
    for (t, target) in oriented_e3_basis().iter().zip(e4_image_basis().iter()) {
        let mask = t.support()[0];
        let c = a.coeff(mask) * t.coeff(mask);
        out = &out + &(target * c);
    }
    out
}

/// Coefficients of an E4 element in the quaternion basis
/// `e4 -> 1, e1e4 -> i, e2e4 -> j, e3e4 -> k`.
pub fn quaternion_iso(a: &Multivector) -> Result<[f64; 4]> {
    if a.m != 4 {
        return Err(Error::Dimension(format!("quaternion_iso acts on Cl_4, got Cl_{}", a.m)));
    }
    let blades = SubspaceTag::E4.blades(4)?;
    if !a.is_supported_in(&blades) {
        return Err(Error::Domain("quaternion_iso input must lie in E4".into()));
    }
    Ok([a.coeff(blades[0]), a.coeff(blades[1]), a.coeff(blades[2]), a.coeff(blades[3])])
}

/// Inverse of [`quaternion_iso`].
pub fn quaternion_to_e4(q: [f64; 4]) -> Multivector {
    let mut out = Multivector::zero(4);
    for (b, c) in SubspaceTag::E4.blades(4).unwrap().into_iter().zip(q) {
        out.set_coeff(b, c);
    }
    out
}

/// Largest coefficient of `e4 f - f^ e4` over the basis blades `f` of
/// `Cl_3` embedded in `Cl_4` (hat: grade involution). Zero exactly.
pub fn e4_conjugation_defect() -> f64 {
    let e4 = Multivector::generator(4, 4).unwrap();
    (0..8u32)
        .map(|b| {
            let f = Multivector::basis(3, BladeIndex(b)).unwrap();
            let lhs = e4.mul(&f.embed(4).unwrap()).unwrap();
            let rhs = f.grade_involution().embed(4).unwrap().mul(&e4).unwrap();
            (&lhs - &rhs).max_abs()
        })
        .fold(0.0, f64::max)
}

/// `f1 + f2 e_m` for `f1, f2` in `Cl_(m-1)`.
pub fn pair_to_single(f1: &Multivector, f2: &Multivector) -> Result<Multivector> {
    if f1.m != f2.m {
        return Err(Error::Dimension("pair components live in different algebras".into()));
    }
    let m = f1.m + 1;
    check_m(m)?;
    let half = 1 << f1.m;
    let mut coeffs = vec![0.0; 1 << m];
    coeffs[..half].copy_from_slice(&f1.coeffs);
    // e_m is the highest generator, so e_B e_m is already canonical.
    coeffs[half..].copy_from_slice(&f2.coeffs);
    Multivector::from_coeffs(m, coeffs)
}

/// Inverse of [`pair_to_single`].
pub fn single_to_pair(g: &Multivector) -> Result<(Multivector, Multivector)> {
    if g.m == 0 {
        return Err(Error::Dimension("cannot split Cl_0".into()));
    }
    let half = 1 << (g.m - 1);
    Ok((
        Multivector::from_coeffs(g.m - 1, g.coeffs[..half].to_vec())?,
        Multivector::from_coeffs(g.m - 1, g.coeffs[half..].to_vec())?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Multiply blades by writing out the generator word and bubble-sorting it,
    /// cancelling adjacent equal generators with e_i^2 = -1.
    fn word_product(a: u32, b: u32) -> (f64, u32) {
        let mut word: Vec<u32> = (0..8).filter(|i| a & (1 << i) != 0).collect();
        word.extend((0..8).filter(|i| b & (1 << i) != 0));
        let mut sign = 1.0;
        loop {
            let mut changed = false;
            let mut i = 0;
            while i + 1 < word.len() {
                if word[i] > word[i + 1] {
                    word.swap(i, i + 1);
                    sign = -sign;
                    changed = true;
                } else if word[i] == word[i + 1] {
                    word.drain(i..i + 2);
                    sign = -sign;
                    changed = true;
                    continue;
                }
                i += 1;
            }
            if !changed {
                break;
            }
        }
        (sign, word.iter().fold(0, |acc, g| acc | (1 << g)))
    }

    #[test]
    fn sign_matches_word_sorting_oracle() {
        for a in 0..1u32 << 6 {
            for b in 0..1u32 << 6 {
                let (s, mask) = word_product(a, b);
                assert_eq!(mask, a ^ b);
                assert_eq!(s, product_sign(a, b), "a={a:b} b={b:b}");
            }
        }
    }

    #[test]
    fn e12_times_e23() {
        let x = Multivector::generator_product(4, &[1, 2]).unwrap();
        let y = Multivector::generator_product(4, &[2, 3]).unwrap();
        let expect = &Multivector::generator_product(4, &[1, 3]).unwrap() * -1.0;
        assert_eq!(x.mul(&y).unwrap(), expect);
    }

    #[test]
    fn generators_square_to_minus_one() {
        for m in 1..=8 {
            for i in 1..=m {
                let e = Multivector::generator(m, i).unwrap();
                assert_eq!(e.mul(&e).unwrap(), Multivector::scalar(m, -1.0));
            }
        }
    }

    #[test]
    fn exp_of_pi_bivector_is_minus_one() {
        let a = &Multivector::generator_product(4, &[1, 2]).unwrap() * std::f64::consts::PI;
        let q = mv_exp(&a).unwrap();
        assert!((&q - &Multivector::scalar(4, -1.0)).max_abs() < 1e-12);
    }

    #[test]
    fn exp_rejects_trivector() {
        let a = Multivector::generator_product(4, &[1, 2, 3]).unwrap();
        assert!(matches!(mv_exp(&a), Err(Error::Domain(_))));
    }

    #[test]
    fn exp_of_zero_is_one() {
        let q = GaugeElement::from_lie(&Multivector::zero(4)).unwrap();
        assert_eq!(q.value, Multivector::scalar(4, 1.0));
        assert_eq!(q.inverse, Multivector::scalar(4, 1.0));
    }

    #[test]
    fn conjugate_reverses_products_and_inverts_exp() {
        let a = Multivector::from_coeffs(3, vec![0.3, -1.0, 2.0, 0.5, 1.5, -0.7, 0.2, 0.9]).unwrap();
        let b = Multivector::from_coeffs(3, vec![-0.4, 0.1, 0.6, -2.0, 0.8, 1.1, -0.3, 0.25]).unwrap();
        let lhs = a.mul(&b).unwrap().conjugate();
        let rhs = b.conjugate().mul(&a.conjugate()).unwrap();
        assert!((&lhs - &rhs).max_abs() < 1e-14);
        for i in 1..=3 {
            let e = Multivector::generator(3, i).unwrap();
            assert_eq!(e.conjugate(), -&e);
        }
        // Series inverse as the oracle for the conjugated value.
        let mut lie = Multivector::zero(4);
        for (k, blade) in lie_algebra_blades(4).into_iter().enumerate() {
            lie.set_coeff(blade, 0.4 * (k as f64 + 1.0).sin());
        }
        let g = GaugeElement::from_lie(&lie).unwrap();
        assert!((&g.inverse - &mv_exp(&-&lie).unwrap()).max_abs() < 1e-13);
        assert!(g.inverse_defect().unwrap() < 1e-13);
    }

    #[test]
    fn p_map_on_listed_basis() {
        let t = oriented_e3_basis();
        let img = e4_image_basis();
        for k in 0..3 {
            assert_eq!(p_map(&t[k]).unwrap(), img[k]);
        }
        let e314 = Multivector::generator_product(4, &[3, 1, 4]).unwrap();
        assert_eq!(e314.coeff(BladeIndex::from_generators(&[1, 3, 4])), -1.0);
        assert_eq!(p_map(&e314).unwrap(), img[1]);
    }

    #[test]
    fn p_map_rejects_outside_e3() {
        assert!(p_map(&Multivector::generator(4, 1).unwrap()).is_err());
    }

    #[test]
    fn quaternion_iso_matches_hamilton_rules() {
        // Under e4 -> 1, e1e4 -> i, ... the product on E4 is not closed, but the
        // map e_k e4 -> unit quaternion is linear and bijective.
        let q = [0.5, -1.0, 2.0, 3.0];
        assert_eq!(quaternion_iso(&quaternion_to_e4(q)).unwrap(), q);
        let e24 = Multivector::generator_product(4, &[2, 4]).unwrap();
        assert_eq!(quaternion_iso(&e24).unwrap(), [0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn e4_conjugation_on_cl3_basis() {
        let e4 = Multivector::generator(4, 4).unwrap();
        for mask in 0..8u32 {
            let f = Multivector::basis(3, BladeIndex(mask)).unwrap();
            let lhs = e4.mul(&f.embed(4).unwrap()).unwrap();
            let rhs = f.grade_involution().embed(4).unwrap().mul(&e4).unwrap();
            assert_eq!(lhs, rhs);
        }
        assert_eq!(e4_conjugation_defect(), 0.0);
    }

    #[test]
    fn pair_round_trip() {
        let f1 = Multivector::from_coeffs(3, (0..8).map(|i| i as f64).collect()).unwrap();
        let f2 = Multivector::from_coeffs(3, (0..8).map(|i| -(i as f64)).collect()).unwrap();
        let g = pair_to_single(&f1, &f2).unwrap();
        let e4 = Multivector::generator(4, 4).unwrap();
        let expect = &f1.embed(4).unwrap() + &f2.embed(4).unwrap().mul(&e4).unwrap();
        assert_eq!(g, expect);
        assert_eq!(single_to_pair(&g).unwrap(), (f1, f2));
    }

    #[test]
    fn subspace_tags_check_algebra() {
        assert!(SubspaceTag::E4.blades(3).is_err());
        assert!(SubspaceTag::V3.blades(4).is_err());
        assert_eq!(lie_algebra_blades(4).len(), 10);
        let mut e = SubspaceTag::E4.blades(4).unwrap();
        e.extend(SubspaceTag::E6.blades(4).unwrap());
        e.sort();
        assert_eq!(e, lie_algebra_blades(4));
    }

    #[test]
    fn blade_labels() {
        assert_eq!(BladeIndex(0).to_string(), "e0");
        assert_eq!(BladeIndex::from_generators(&[1, 2, 4]).to_string(), "e124");
    }
}
