//! Differential forms on the flat torus with multivector coefficients:
//! exterior derivative, Hodge star, codifferential and the linear Hodge split.

use crate::clifford::Multivector;
use crate::error::{Error, Result};
use crate::grid::{apply_terms, GridSpec, Multiplier, MultivectorField, Term};

/// Increasing index sets of size `k` from `0..dim`, as bitmasks, in
/// lexicographic order.
pub fn index_sets(dim: usize, k: usize) -> Vec<u32> {
    fn rec(start: usize, dim: usize, k: usize, acc: u32, out: &mut Vec<u32>) {
        if k == 0 {
            out.push(acc);
            return;
        }
        for a in start..dim {
            rec(a + 1, dim, k - 1, acc | (1 << a), out);
        }
    }
    let mut out = Vec::new();
    if k <= dim {
        rec(0, dim, k, 0, &mut out);
    }
    out
}

/// Sign of the permutation listing `set` then its complement.
fn shuffle_sign(set: u32, dim: usize) -> f64 {
    let comp = !set & ((1 << dim) - 1);
    let mut inversions = 0;
    for i in 0..dim {
        if set & (1 << i) != 0 {
            inversions += (comp & ((1 << i) - 1)).count_ones();
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `(-1)^(number of elements of set below a)`.
fn position_sign(set: u32, a: usize) -> f64 {
    if (set & ((1 << a) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `k`-form `sum_I w_I dx_I` with `Cl_m`-valued coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferentialForm {
    grid: GridSpec,
    degree: usize,
    m: usize,
    coeffs: Vec<MultivectorField>,
}

impl DifferentialForm {
    pub fn zeros(grid: GridSpec, degree: usize, m: usize) -> DifferentialForm {
        let n = index_sets(grid.dim, degree).len();
        DifferentialForm { grid, degree, m, coeffs: vec![MultivectorField::zeros(grid, m); n] }
    }

    /// Coefficients in the order of [`index_sets`].
    pub fn new(grid: GridSpec, degree: usize, coeffs: Vec<MultivectorField>) -> Result<DifferentialForm> {
        if degree > grid.dim {
            return Err(Error::Dimension(format!("{degree}-form on a {}-d torus", grid.dim)));
        }
        let n = index_sets(grid.dim, degree).len();
        if coeffs.len() != n {
            return Err(Error::Dimension(format!("{degree}-form needs {n} coefficients, got {}", coeffs.len())));
        }
        let m = coeffs[0].m();
        if coeffs.iter().any(|c| c.grid() != grid || c.m() != m) {
            return Err(Error::Dimension("form coefficients differ in grid or algebra".into()));
        }
        Ok(DifferentialForm { grid, degree, m, coeffs })
    }

    /// 0-form from a single field.
    pub fn function(f: MultivectorField) -> DifferentialForm {
        DifferentialForm { grid: f.grid(), degree: 0, m: f.m(), coeffs: vec![f] }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn coeffs(&self) -> &[MultivectorField] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<MultivectorField> {
        self.coeffs
    }

    /// Coefficient of `dx_(axes)`, axes in increasing order.
    pub fn coeff(&self, axes: &[usize]) -> Option<&MultivectorField> {
        let mask = axes.iter().fold(0u32, |acc, a| acc | (1 << a));
        index_sets(self.grid.dim, self.degree).iter().position(|&s| s == mask).map(|i| &self.coeffs[i])
    }

    fn same_shape(&self, other: &DifferentialForm) -> Result<()> {
        if self.grid != other.grid || self.degree != other.degree || self.m != other.m {
            return Err(Error::Dimension("forms differ in grid, degree or algebra".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &DifferentialForm) -> Result<DifferentialForm> {
        self.same_shape(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        Ok(self.with_coeffs(coeffs))
    }

    pub fn sub(&self, other: &DifferentialForm) -> Result<DifferentialForm> {
        self.same_shape(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.sub(b)).collect::<Result<_>>()?;
        Ok(self.with_coeffs(coeffs))
    }

    pub fn scale(&self, s: f64) -> DifferentialForm {
        self.with_coeffs(self.coeffs.iter().map(|c| c.scale(s)).collect())
    }

    fn with_coeffs(&self, coeffs: Vec<MultivectorField>) -> DifferentialForm {
        DifferentialForm { grid: self.grid, degree: self.degree, m: self.m, coeffs }
    }

    /// Pointwise `q * w_I` for every coefficient.
    pub fn left_mul(&self, q: &MultivectorField) -> Result<DifferentialForm> {
        let coeffs = self.coeffs.iter().map(|c| q.mul(c)).collect::<Result<_>>()?;
        Ok(self.with_coeffs(coeffs))
    }

    /// `L^2` norm of the pointwise magnitude over all coefficients and blades.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.l2_norm().powi(2)).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    /// Mean of each coefficient.
    pub fn means(&self) -> Vec<Multivector> {
        self.coeffs.iter().map(|c| Multivector::from_coeffs(self.m, c.means()).unwrap()).collect()
    }

    pub fn remove_mean(&self) -> DifferentialForm {
        self.with_coeffs(self.coeffs.iter().map(|c| c.remove_mean()).collect())
    }

    /// Form with constant coefficients.
    pub fn constant(grid: GridSpec, degree: usize, values: &[Multivector]) -> Result<DifferentialForm> {
        let coeffs = values.iter().map(|v| crate::dirac::constant_field(grid, v)).collect();
        DifferentialForm::new(grid, degree, coeffs)
    }

    fn flat_inputs(&self) -> Vec<&[f64]> {
        self.coeffs.iter().flat_map(|c| c.components().iter().map(|v| v.as_slice())).collect()
    }

    fn from_flat(&self, degree: usize, flat: Vec<Vec<f64>>) -> DifferentialForm {
        let nb = 1 << self.m;
        let n = index_sets(self.grid.dim, degree).len();
        let mut it = flat.into_iter();
        let coeffs = (0..n)
            .map(|_| {
                let comps: Vec<Vec<f64>> = it.by_ref().take(nb).collect();
                MultivectorField::from_components(self.grid, self.m, comps).unwrap()
            })
            .collect();
        DifferentialForm { grid: self.grid, degree, m: self.m, coeffs }
    }

    fn apply(&self, degree: usize, terms: &[Term]) -> DifferentialForm {
        let n_out = index_sets(self.grid.dim, degree).len() << self.m;
        let out = apply_terms(self.grid, &self.flat_inputs(), n_out, terms);
        self.from_flat(degree, out)
    }

    /// Componentwise Laplacian.
    pub fn laplacian(&self) -> DifferentialForm {
        self.with_coeffs(self.coeffs.iter().map(|c| c.laplacian()).collect())
    }

    /// Componentwise `(-Delta)^{-1}`; every coefficient must have zero mean.
    pub fn inv_laplacian(&self) -> Result<DifferentialForm> {
        let coeffs = self.coeffs.iter().map(|c| c.inv_laplacian()).collect::<Result<_>>()?;
        Ok(self.with_coeffs(coeffs))
    }
}

/// Terms of `d` on `k`-forms with `nb` blades per coefficient.
fn d_terms(dim: usize, k: usize, nb: usize, mult: impl Fn(usize) -> Multiplier, scale: f64) -> Vec<Term> {
    let ins = index_sets(dim, k);
    let outs = index_sets(dim, k + 1);
    let mut terms = Vec::new();
    for (jo, &out) in outs.iter().enumerate() {
        for a in (0..dim).filter(|a| out & (1 << a) != 0) {
            let src_set = out & !(1 << a);
            let ji = ins.iter().position(|&s| s == src_set).unwrap();
            let coef = scale * position_sign(src_set, a);
            for c in 0..nb {
                terms.push(Term { src: ji * nb + c, dst: jo * nb + c, coef, mult: mult(a) });
            }
        }
    }
    terms
}

/// Terms of the codifferential on `k`-forms via the interior-product formula
/// `d*(f dx_I) = -sum_(a in I) (-1)^(pos a) d_a f dx_(I \ a)`.
fn codiff_terms(dim: usize, k: usize, nb: usize, mult: impl Fn(usize) -> Multiplier, scale: f64) -> Vec<Term> {
    let ins = index_sets(dim, k);
    let outs = index_sets(dim, k - 1);
    let mut terms = Vec::new();
    for (ji, &set) in ins.iter().enumerate() {
        for a in (0..dim).filter(|a| set & (1 << a) != 0) {
            let out = set & !(1 << a);
            let jo = outs.iter().position(|&s| s == out).unwrap();
            let coef = -scale * position_sign(set, a);
            for c in 0..nb {
                terms.push(Term { src: ji * nb + c, dst: jo * nb + c, coef, mult: mult(a) });
            }
        }
    }
    terms
}

pub fn exterior_d(w: &DifferentialForm) -> Result<DifferentialForm> {
    let dim = w.grid.dim;
    if w.degree >= dim {
        return Err(Error::Dimension("exterior derivative of a top form".into()));
    }
    let terms = d_terms(dim, w.degree, 1 << w.m, Multiplier::deriv, 1.0);
    Ok(w.apply(w.degree + 1, &terms))
}

/// `*dx_I = sign(I, I^c) dx_(I^c)`, so that `eta ^ *w = <eta, w> vol`.
pub fn hodge_star(w: &DifferentialForm) -> DifferentialForm {
    let dim = w.grid.dim;
    let ins = index_sets(dim, w.degree);
    let outs = index_sets(dim, dim - w.degree);
    let full = (1u32 << dim) - 1;
    let mut coeffs = vec![MultivectorField::zeros(w.grid, w.m); outs.len()];
    for (ji, &set) in ins.iter().enumerate() {
        let jo = outs.iter().position(|&s| s == full & !set).unwrap();
        coeffs[jo] = w.coeffs[ji].scale(shuffle_sign(set, dim));
    }
    DifferentialForm { grid: w.grid, degree: dim - w.degree, m: w.m, coeffs }
}

/// `d* = (-1)^(d(k-1)+1) * d *` on `k`-forms, `k >= 1`.
pub fn codifferential(w: &DifferentialForm) -> Result<DifferentialForm> {
    if w.degree == 0 {
        return Err(Error::Dimension("codifferential of a 0-form".into()));
    }
    let dim = w.grid.dim;
    let sign = if (dim * (w.degree - 1) + 1) % 2 == 0 { 1.0 } else { -1.0 };
    let inner = exterior_d(&hodge_star(w))?;
    Ok(hodge_star(&inner).scale(sign))
}

/// `(-Delta)^{-1} d* w`, fused in Fourier space.
pub fn inv_laplacian_codifferential(w: &DifferentialForm) -> Result<DifferentialForm> {
    if w.degree == 0 {
        return Err(Error::Dimension("codifferential of a 0-form".into()));
    }
    let terms = codiff_terms(w.grid.dim, w.degree, 1 << w.m, Multiplier::deriv_inv_discrete_laplacian, -1.0);
    Ok(w.apply(w.degree - 1, &terms))
}

/// `(-Delta)^{-1} d w`, fused in Fourier space.
pub fn inv_laplacian_exterior(w: &DifferentialForm) -> Result<DifferentialForm> {
    if w.degree >= w.grid.dim {
        return Err(Error::Dimension("exterior derivative of a top form".into()));
    }
    let terms = d_terms(w.grid.dim, w.degree, 1 << w.m, Multiplier::deriv_inv_discrete_laplacian, -1.0);
    Ok(w.apply(w.degree + 1, &terms))
}

/// Codifferential through the interior-product formula (used as a second
/// route in tests and in the iteration).
pub fn codifferential_direct(w: &DifferentialForm) -> Result<DifferentialForm> {
    if w.degree == 0 {
        return Err(Error::Dimension("codifferential of a 0-form".into()));
    }
    let terms = codiff_terms(w.grid.dim, w.degree, 1 << w.m, Multiplier::deriv, 1.0);
    Ok(w.apply(w.degree - 1, &terms))
}

/// `d d* w + d* d w`, which equals `-Delta w` on smooth forms.
pub fn hodge_laplacian(w: &DifferentialForm) -> Result<DifferentialForm> {
    let dim = w.grid.dim;
    let mut out = DifferentialForm::zeros(w.grid, w.degree, w.m);
    if w.degree > 0 {
        out = out.add(&exterior_d(&codifferential(w)?)?)?;
    }
    if w.degree < dim {
        out = out.add(&codifferential(&exterior_d(w)?)?)?;
    }
    Ok(out)
}

/// Part of a grid function in the kernel of every spectral first
/// derivative: the modes with each wavenumber `0` or `-N/2`. These are the
/// mean plus the checkerboard patterns `prod_(a in S) (-1)^(j_a)`.
pub fn harmonic_values(grid: GridSpec, data: &[f64]) -> Vec<f64> {
    let len = grid.len();
    // Bit a of parity[i] is set when coordinate a of point i is odd.
    let parity: Vec<u32> = (0..len)
        .map(|i| {
            let mut rest = i;
            let mut bits = 0u32;
            for a in (0..grid.dim).rev() {
                bits |= ((rest % grid.n) as u32 & 1) << a;
                rest /= grid.n;
            }
            bits
        })
        .collect();
    let classes = 1usize << grid.dim;
    let sign = |p: usize, set: usize| if (p & set).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    // The projection only depends on the sums over each parity class.
    let mut bucket = vec![0.0; classes];
    for (v, &p) in data.iter().zip(&parity) {
        bucket[p as usize] += v;
    }
    let coef: Vec<f64> =
        (0..classes).map(|set| (0..classes).map(|p| bucket[p] * sign(p, set)).sum::<f64>() / len as f64).collect();
    let value: Vec<f64> = (0..classes).map(|p| (0..classes).map(|set| coef[set] * sign(p, set)).sum()).collect();
    parity.iter().map(|&p| value[p as usize]).collect()
}

/// Componentwise [`harmonic_values`]: the part of `w` annihilated by both
/// the spectral `d` and `d*`.
pub fn harmonic_part(w: &DifferentialForm) -> DifferentialForm {
    let grid = w.grid;
    let coeffs = w
        .coeffs
        .iter()
        .map(|c| {
            let comps = c
                .components()
                .iter()
                .map(|v| if crate::grid::is_zero(v) { vec![0.0; v.len()] } else { harmonic_values(grid, v) })
                .collect();
            MultivectorField::from_components(grid, c.m(), comps).unwrap()
        })
        .collect();
    w.with_coeffs(coeffs)
}

/// `w = d gamma + d* y + harmonic`.
///
/// `harmonic` is the kernel part of the spectral operators; for input
/// resolved below the Nyquist frequency it is the constant form of
/// coefficient means.
#[derive(Clone, Debug)]
pub struct HodgeSplit {
    pub gamma: DifferentialForm,
    pub y: DifferentialForm,
    pub harmonic: DifferentialForm,
}

impl HodgeSplit {
    pub fn reconstruct(&self) -> Result<DifferentialForm> {
        exterior_d(&self.gamma)?.add(&codifferential(&self.y)?)?.add(&self.harmonic)
    }
}

/// Linear Hodge decomposition of a `k`-form, `1 <= k < d`:
/// `gamma = (-Delta)^{-1} d* w`, `y = (-Delta)^{-1} d w`. With `-Delta =
/// dd* + d*d` these signs make `dgamma + d*y` the non-harmonic part of `w`.
pub fn linear_hodge_decompose(w: &DifferentialForm) -> Result<HodgeSplit> {
    if w.degree == 0 || w.degree >= w.grid.dim {
        return Err(Error::Dimension(format!(
            "linear split implemented for 1 <= k < d, got k = {}",
            w.degree
        )));
    }
    Ok(HodgeSplit {
        gamma: inv_laplacian_codifferential(w)?,
        y: inv_laplacian_exterior(w)?,
        harmonic: harmonic_part(w),
    })
}
