//! 2D FFT plumbing on top of `rustfft`.
//!
//! The forward transform is unnormalized and the inverse carries the full
//! `1/N^2` factor, so `ifft2(fft2(v)) == v` to round-off. Every operator in
//! this crate has the form `ifft2(multiply(fft2(v)))` and is therefore
//! invariant under the choice of normalization.
//!
//! A 2D transform is two 1D passes along rows with a square transpose in
//! between. Rows are independent, so the row passes run in parallel and the
//! result is bitwise independent of the thread count.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::{Arc, Mutex, OnceLock};

use crate::grid::ComplexField;

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

/// Cached forward/inverse plans for one transform size.
///
/// Cheap to clone (two `Arc`s); safe to share across threads. The plans are
/// stateless: scratch space is provided per call.
#[derive(Clone)]
pub struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = planner().lock().expect("fft planner poisoned");
        Fft2 {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn row_pass(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let scratch_len = fft.get_inplace_scratch_len();
        data.par_chunks_mut(n).for_each_init(
            || vec![Complex64::new(0.0, 0.0); scratch_len],
            |scratch, row| fft.process_with_scratch(row, scratch),
        );
    }

    fn transpose(&self, data: &mut [Complex64]) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                data.swap(i * n + j, j * n + i);
            }
        }
    }

    /// In-place unnormalized forward 2D transform of an `n x n` row-major array.
    pub fn forward(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.n * self.n);
        self.row_pass(data, &self.forward.clone());
        self.transpose(data);
        self.row_pass(data, &self.forward.clone());
        self.transpose(data);
    }

    /// In-place inverse 2D transform, scaled by `1/n^2`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.n * self.n);
        self.row_pass(data, &self.inverse.clone());
        self.transpose(data);
        self.row_pass(data, &self.inverse.clone());
        self.transpose(data);
        let scale = 1.0 / (self.n * self.n) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Forward 2D FFT of a field. Mode `(k1, k2)` of the input lands at index
/// `(k1 mod N, k2 mod N)` of the output.
pub fn fft2(field: &ComplexField) -> ComplexField {
    let grid = field.grid();
    let plan = Fft2::new(grid.n());
    let mut out = field.clone();
    plan.forward(out.values_mut());
    out
}

/// Inverse 2D FFT of a field; exact inverse of [`fft2`] up to round-off.
pub fn ifft2(field: &ComplexField) -> ComplexField {
    let grid = field.grid();
    let plan = Fft2::new(grid.n());
    let mut out = field.clone();
    plan.inverse(out.values_mut());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;
    use std::f64::consts::PI;

    fn random_field(grid: Grid2D, seed: u64) -> ComplexField {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        ComplexField::from_fn(grid, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn constant_field_is_dc_mode() {
        let grid = Grid2D::new(16, 1.0).unwrap();
        let one = ComplexField::from_fn(grid, |_, _| Complex64::new(1.0, 0.0));
        let hat = fft2(&one);
        let n2 = grid.len() as f64;
        assert!((hat.values()[0] - Complex64::new(n2, 0.0)).norm() < 1e-10 * n2);
        for &v in &hat.values()[1..] {
            assert!(v.norm() < 1e-10 * n2);
        }
    }

    #[test]
    fn pure_mode_has_single_coefficient() {
        let grid = Grid2D::new(8, 1.0).unwrap();
        let (k1, k2) = (3usize, 6usize);
        let l = grid.side();
        let mode = ComplexField::from_fn(grid, |x1, x2| {
            (Complex64::i() * 2.0 * PI * (k1 as f64 * x1 + k2 as f64 * x2) / l).exp()
        });
        let hat = fft2(&mode);
        let n = grid.n();
        let n2 = grid.len() as f64;
        for i in 0..n {
            for j in 0..n {
                let v = hat.at(i, j);
                if i == k1 % n && j == k2 % n {
                    assert!((v.norm() - n2).abs() < 1e-9 * n2);
                } else {
                    assert!(v.norm() < 1e-9 * n2, "leak at ({i},{j}): {v}");
                }
            }
        }
    }

    #[test]
    fn round_trip_identity() {
        for n in [4usize, 6, 16, 48] {
            let grid = Grid2D::new(n, 0.7).unwrap();
            let v = random_field(grid, n as u64);
            let back = ifft2(&fft2(&v));
            let scale = v.norm_max();
            let err = v
                .values()
                .iter()
                .zip(back.values())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-13 * scale, "n={n}: err {err:e}");
        }
    }

    #[test]
    fn parseval_ratio_is_constant() {
        let grid = Grid2D::new(12, 1.0).unwrap();
        let mut ratios = Vec::new();
        for seed in 0..5 {
            let v = random_field(grid, seed);
            ratios.push(fft2(&v).norm_l2() / v.norm_l2());
        }
        // Unnormalized forward transform: the ratio is exactly N.
        for r in &ratios {
            assert!((r - 12.0).abs() < 1e-10, "ratio {r}");
        }
    }
}
