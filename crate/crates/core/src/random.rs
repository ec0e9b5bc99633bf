//! Seeded band-limited random fields.
//!
//! Coefficients are drawn in a fixed order over the modes `0 < |xi|_inf <= bw`
//! that does not depend on the grid size, so the same seed gives the same
//! trigonometric polynomial on every grid that resolves it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;

use crate::clifford::{BladeIndex, SubspaceTag};
use crate::error::{Error, Result};
use crate::grid::{synthesize, GridSpec, MultivectorField};

/// Largest admissible bandwidth: `N/3` when at most quadratic products of
/// the field are formed, `N/4` when cubic products appear.
pub fn bandwidth_cap(n: usize, cubic: bool) -> usize {
    if cubic {
        n / 4
    } else {
        n / 3
    }
}

pub fn check_bandwidth(bandwidth: usize, n: usize, cubic: bool) -> Result<()> {
    let cap = bandwidth_cap(n, cubic);
    if bandwidth == 0 || bandwidth > cap {
        return Err(Error::Bandwidth { bandwidth, cap, n });
    }
    Ok(())
}

/// Modes with `0 < |xi|_inf <= bw` whose first nonzero entry is positive,
/// in lexicographic order.
pub fn upper_half_modes(dim: usize, bw: usize) -> Vec<Vec<i64>> {
    let b = bw as i64;
    let mut out = Vec::new();
    let mut xi = vec![-b; dim];
    loop {
        if let Some(first) = xi.iter().find(|&&v| v != 0) {
            if *first > 0 {
                out.push(xi.clone());
            }
        }
        let mut a = dim;
        loop {
            if a == 0 {
                return out;
            }
            a -= 1;
            if xi[a] < b {
                xi[a] += 1;
                break;
            }
            xi[a] = -b;
        }
    }
}

/// Which blades a generated field occupies.
#[derive(Clone, Debug, PartialEq)]
pub enum Support {
    Scalar,
    Tag(SubspaceTag),
}

impl Support {
    fn blades(&self, m: usize) -> Result<Vec<BladeIndex>> {
        match self {
            Support::Scalar => Ok(vec![BladeIndex::SCALAR]),
            Support::Tag(t) => t.blades(m),
        }
    }
}

/// Zero-mean real field in `Cl_m` with independent Gaussian Fourier
/// coefficients on every mode up to `bandwidth`, on the blades of `support`,
/// scaled so its root-mean-square magnitude equals `amplitude`.
pub fn generate_field(
    grid: GridSpec,
    m: usize,
    support: &Support,
    amplitude: f64,
    bandwidth: usize,
    seed: u64,
) -> Result<MultivectorField> {
    check_bandwidth(bandwidth, grid.n, false)?;
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::Parameter(format!("amplitude must be finite and nonnegative, got {amplitude}")));
    }
    let blades = support.blades(m)?;
    let modes = upper_half_modes(grid.dim, bandwidth);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws: Vec<Vec<Complex64>> = Vec::with_capacity(blades.len());
    let mut power = 0.0;
    for _ in &blades {
        let c: Vec<Complex64> = modes
            .iter()
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        // Each upper mode and its mirror contribute 2|c|^2 to the mean square.
        power += c.iter().map(|z| 2.0 * z.norm_sqr()).sum::<f64>();
        draws.push(c);
    }
    let scale = if power > 0.0 { amplitude / power.sqrt() } else { 0.0 };
    let mut field = MultivectorField::zeros(grid, m);
    for (blade, c) in blades.iter().zip(&draws) {
        let mut spec = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (xi, z) in modes.iter().zip(c) {
            let neg: Vec<i64> = xi.iter().map(|v| -v).collect();
            spec[grid.mode_index(xi)] = z * scale;
            spec[grid.mode_index(&neg)] = z.conj() * scale;
        }
        field.set_component(*blade, synthesize(grid, &spec))?;
    }
    field.bandwidth = Some(bandwidth);
    Ok(field)
}

/// Seed for sub-stream `stream` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    // SplitMix64 finalizer: well spread, cheap and stable across versions.
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
