//! Multi-dimensional complex FFTs on `N^d` row-major buffers, one axis at a time.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> PlanPair {
    static CACHE: OnceLock<Mutex<HashMap<usize, PlanPair>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// Unnormalized forward transform in place.
pub(crate) fn forward(data: &mut [Complex64], n: usize, dim: usize) {
    let (fwd, _) = plans(n);
    transform(data, n, dim, fwd.as_ref());
}

/// Inverse transform in place, normalized by `1 / N^d`.
pub(crate) fn inverse(data: &mut [Complex64], n: usize, dim: usize) {
    let (_, inv) = plans(n);
    transform(data, n, dim, inv.as_ref());
    let scale = 1.0 / data.len() as f64;
    for z in data.iter_mut() {
        *z *= scale;
    }
}

fn transform(data: &mut [Complex64], n: usize, dim: usize, fft: &dyn Fft<f64>) {
    let total = data.len();
    debug_assert_eq!(total, n.pow(dim as u32));
    SCRATCH.with(|cell| {
        let (scratch, lines) = &mut *cell.borrow_mut();
        scratch.resize(fft.get_inplace_scratch_len(), Complex64::new(0.0, 0.0));
        lines.resize(total, Complex64::new(0.0, 0.0));
        transform_with(data, n, dim, fft, scratch, lines);
    });
}

thread_local! {
    // Reused across calls: fresh megabyte buffers cost a page fault per page.
    static SCRATCH: RefCell<(Vec<Complex64>, Vec<Complex64>)> = const { RefCell::new((Vec::new(), Vec::new())) };
}

fn transform_with(
    data: &mut [Complex64],
    n: usize,
    dim: usize,
    fft: &dyn Fft<f64>,
    scratch: &mut [Complex64],
    lines: &mut [Complex64],
) {
    let total = data.len();
    // Last axis is contiguous: every consecutive run of n is one line.
    fft.process_with_scratch(data, scratch);
    if dim == 1 {
        return;
    }
    // Tiles of TILE lines keep both the strided and the contiguous side of
    // the copy inside L1.
    const TILE: usize = 16;
    for axis in 0..dim - 1 {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = stride * n;
        for outer in (0..total).step_by(block) {
            let base = outer;
            for r0 in (0..stride).step_by(TILE) {
                let r1 = (r0 + TILE).min(stride);
                for j in 0..n {
                    let row = &data[base + j * stride + r0..base + j * stride + r1];
                    for (t, z) in row.iter().enumerate() {
                        lines[base + (r0 + t) * n + j] = *z;
                    }
                }
            }
        }
        fft.process_with_scratch(lines, scratch);
        for outer in (0..total).step_by(block) {
            let base = outer;
            for r0 in (0..stride).step_by(TILE) {
                let r1 = (r0 + TILE).min(stride);
                for j in 0..n {
                    let row = &mut data[base + j * stride + r0..base + j * stride + r1];
                    for (t, z) in row.iter_mut().enumerate() {
                        *z = lines[base + (r0 + t) * n + j];
                    }
                }
            }
        }
    }
}
