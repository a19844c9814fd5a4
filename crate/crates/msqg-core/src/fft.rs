//! Two-dimensional complex FFTs built from cached rustfft plans.
//!
//! Plans are shared behind a global cache; per-call scratch buffers keep the
//! transforms safe to run concurrently from several threads.

use crate::{Complex, Grid};
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

fn plan(n: usize, dir: FftDirection) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, matches!(dir, FftDirection::Forward));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(key)
        .or_insert_with(|| FftPlanner::new().plan_fft(n, dir))
        .clone()
}

fn transform_rows(data: &mut [Complex], n: usize, fft: &Arc<dyn Fft<f64>>) {
    data.par_chunks_mut(n).for_each(|row| {
        let mut scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(row, &mut scratch);
    });
}

fn transpose(data: &mut [Complex], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

fn fft2(data: &mut [Complex], n: usize, dir: FftDirection) {
    debug_assert_eq!(data.len(), n * n);
    let fft = plan(n, dir);
    transform_rows(data, n, &fft);
    transpose(data, n);
    transform_rows(data, n, &fft);
    transpose(data, n);
}

/// Physical samples (row-major) to Fourier coefficients; normalizes by 1/n²
/// so that `f(x) = Σ_k f̂(k) e^{i k·x}`.
pub fn forward(grid: &Grid, data: &mut [Complex]) {
    let n = grid.n();
    fft2(data, n, FftDirection::Forward);
    let scale = 1.0 / (n * n) as f64;
    data.iter_mut().for_each(|c| *c *= scale);
}

/// Fourier coefficients to physical samples.
pub fn inverse(grid: &Grid, data: &mut [Complex]) {
    fft2(data, grid.n(), FftDirection::Inverse);
}

/// Coefficients on `grid` re-embedded on an `m × m` lattice (`m ≥ n`), in
/// FFT-wrapped order. Used for dealiased quadrature of products.
pub fn zero_pad(grid: &Grid, coeffs: &[Complex], m: usize) -> Vec<Complex> {
    let n = grid.n();
    assert!(m >= n);
    let mut out = vec![Complex::default(); m * m];
    for i in 0..n {
        let k1 = grid.wavenumber(i);
        let ii = k1.rem_euclid(m as i64) as usize;
        for j in 0..n {
            let k2 = grid.wavenumber(j);
            let jj = k2.rem_euclid(m as i64) as usize;
            out[ii * m + jj] = coeffs[i * n + j];
        }
    }
    out
}

/// Inverse of [`zero_pad`]: restrict `m × m` coefficients to the lattice of
/// `grid`, discarding everything outside `[-n/2, n/2)²`.
pub fn restrict(grid: &Grid, coeffs: &[Complex], m: usize) -> Vec<Complex> {
    let n = grid.n();
    assert!(m >= n);
    let mut out = vec![Complex::default(); n * n];
    for i in 0..n {
        let k1 = grid.wavenumber(i);
        let ii = k1.rem_euclid(m as i64) as usize;
        for j in 0..n {
            let k2 = grid.wavenumber(j);
            let jj = k2.rem_euclid(m as i64) as usize;
            out[i * n + j] = coeffs[ii * m + jj];
        }
    }
    out
}

/// Raw m×m transforms used by padded-product quadrature (no Grid involved).
pub fn forward_raw(m: usize, data: &mut [Complex]) {
    fft2(data, m, FftDirection::Forward);
    let scale = 1.0 / (m * m) as f64;
    data.iter_mut().for_each(|c| *c *= scale);
}

pub fn inverse_raw(m: usize, data: &mut [Complex]) {
    fft2(data, m, FftDirection::Inverse);
}
