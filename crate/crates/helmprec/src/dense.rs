//! Dense oracle for desk-scale spectra plus a matrix-free Arnoldi estimate
//! of the largest eigenvalue.
//!
//! Any field operator can be assembled column by column into an
//! `N^2 x N^2` matrix (guarded to `N <= 80`); its eigenvalues then come
//! from LAPACK. The spectral condition number is the ratio of the extreme
//! eigenvalue moduli, which matches the usual condition number for the
//! normal operators produced by constant-coefficient discretizations.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, EigVals, Solve};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::error::{HelmError, Result};
use crate::grid::{ComplexField, Grid2D};
use crate::krylov::FieldOperator;

/// Largest grid admitted by the dense oracle (memory/time guard).
pub const DENSE_GUARD_N: usize = 80;

fn check_guard(op: &'static str, grid: Grid2D) -> Result<()> {
    if grid.n() > DENSE_GUARD_N {
        return Err(HelmError::invalid_argument(
            op,
            format!(
                "dense-oracle guard requires N <= {DENSE_GUARD_N}, got N = {}",
                grid.n()
            ),
        ));
    }
    Ok(())
}

/// Assemble the matrix of a field operator: column `j` is the image of the
/// `j`-th unit basis field. Deterministic bit for bit.
pub fn assemble_dense(op: &dyn FieldOperator, grid: Grid2D) -> Result<Array2<Complex64>> {
    check_guard("assemble_dense", grid)?;
    let n2 = grid.len();
    let columns: Vec<Vec<Complex64>> = (0..n2)
        .into_par_iter()
        .map(|j| {
            let mut e = ComplexField::zeros(grid);
            e.values_mut()[j] = Complex64::new(1.0, 0.0);
            op.apply_to(&e).map(ComplexField::into_values)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut mat = Array2::zeros((n2, n2));
    for (j, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            mat[(i, j)] = v;
        }
    }
    Ok(mat)
}

/// All eigenvalues of a dense complex matrix (LAPACK `zgeev`).
pub fn dense_eigenvalues(mat: &Array2<Complex64>) -> Result<Vec<Complex64>> {
    let vals = mat.eigvals().map_err(|e| HelmError::DenseBackend {
        op: "dense_eigenvalues",
        msg: e.to_string(),
    })?;
    Ok(vals.to_vec())
}

/// Spectral condition number `max|lambda| / min|lambda|` of an assembled
/// operator.
pub fn spectral_cond_dense(op: &dyn FieldOperator, grid: Grid2D) -> Result<f64> {
    check_guard("spectral_cond_dense", grid)?;
    let mat = assemble_dense(op, grid)?;
    let vals = dense_eigenvalues(&mat)?;
    let mut max_abs = 0.0f64;
    let mut min_abs = f64::INFINITY;
    for v in &vals {
        let a = v.norm();
        max_abs = max_abs.max(a);
        min_abs = min_abs.min(a);
    }
    if min_abs < 1e-300 {
        return Err(HelmError::SingularOperator { op: "spectral_cond_dense", min_abs });
    }
    Ok(max_abs / min_abs)
}

/// Direct dense solve (LAPACK LU); the oracle the iterative solver is
/// checked against.
pub fn dense_solve(mat: &Array2<Complex64>, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    let b = Array1::from(rhs.to_vec());
    let x = mat.solve(&b).map_err(|e| HelmError::DenseBackend {
        op: "dense_solve",
        msg: e.to_string(),
    })?;
    Ok(x.to_vec())
}

/// Restarted Arnoldi estimate of the largest-modulus eigenvalue.
///
/// Builds an `m`-step Krylov factorization, takes the dominant Ritz value,
/// and restarts with the corresponding Ritz vector until two successive
/// estimates agree to `tol` (relative). Returns the estimate and whether it
/// converged within the restart budget.
pub fn arnoldi_largest_eigenvalue(
    op: &dyn FieldOperator,
    grid: Grid2D,
    m: usize,
    tol: f64,
    max_restarts: usize,
) -> Result<(Complex64, bool)> {
    let fn_op = "arnoldi_extremal";
    if m < 2 || m > 200 {
        return Err(HelmError::invalid_argument(
            fn_op,
            format!("Krylov dimension must be in [2, 200], got {m}"),
        ));
    }

    // Deterministic pseudo-random start vector.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x41524e4f);
    let mut v0 = ComplexField::from_fn(grid, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    v0.scale(Complex64::new(1.0 / v0.norm_l2(), 0.0));

    let mut previous: Option<Complex64> = None;
    for _ in 0..max_restarts {
        let mut basis = vec![v0.clone()];
        let mut h = Array2::<Complex64>::zeros((m, m));
        let mut steps = 0usize;
        let mut invariant = false;
        for k in 0..m {
            let mut w = op.apply_to(&basis[k])?;
            if !w.is_finite() {
                return Err(HelmError::OperatorFailure {
                    op: fn_op,
                    msg: "operator returned non-finite values".to_string(),
                });
            }
            for (j, vj) in basis.iter().enumerate().take(k + 1) {
                let hjk = vj.dot(&w);
                h[(j, k)] = hjk;
                w.axpy(-hjk, vj)?;
            }
            steps = k + 1;
            let w_norm = w.norm_l2();
            if w_norm < 1e-14 {
                invariant = true;
                break;
            }
            if k + 1 < m {
                h[(k + 1, k)] = Complex64::new(w_norm, 0.0);
            }
            w.scale(Complex64::new(1.0 / w_norm, 0.0));
            basis.push(w);
        }

        let h_block = h.slice(ndarray::s![..steps, ..steps]).to_owned();
        let (vals, vecs) = h_block.eig().map_err(|e| HelmError::DenseBackend {
            op: fn_op,
            msg: e.to_string(),
        })?;
        let dominant = (0..steps)
            .max_by(|&a, &b| vals[a].norm().partial_cmp(&vals[b].norm()).expect("finite"))
            .expect("nonempty spectrum");
        let estimate = vals[dominant];

        if invariant {
            return Ok((estimate, true));
        }
        if let Some(prev) = previous {
            if (estimate - prev).norm() <= tol * estimate.norm() {
                return Ok((estimate, true));
            }
        }
        previous = Some(estimate);

        // Restart from the dominant Ritz vector.
        let mut next = ComplexField::zeros(grid);
        for (j, vj) in basis.iter().enumerate().take(steps) {
            next.axpy(vecs[(j, dominant)], vj)?;
        }
        let norm = next.norm_l2();
        if norm < 1e-300 {
            return Ok((estimate, false));
        }
        next.scale(Complex64::new(1.0 / norm, 0.0));
        v0 = next;
    }

    Ok((previous.expect("at least one restart ran"), false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::MediaModel;
    use crate::operators::{fd_symbol, HelmholtzOperator};
    use std::f64::consts::PI;

    fn identity(v: &ComplexField) -> Result<ComplexField> {
        Ok(v.clone())
    }

    #[test]
    fn identity_assembles_to_identity() {
        let grid = Grid2D::new(4, 1.0).unwrap();
        let mat = assemble_dense(&identity, grid).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_eq!(mat[(i, j)], Complex64::new(expected, 0.0));
            }
        }
        assert_eq!(spectral_cond_dense(&identity, grid).unwrap(), 1.0);
    }

    #[test]
    fn assembly_is_deterministic() {
        let grid = Grid2D::new(8, 1.0).unwrap();
        let media = MediaModel::circular_inclusion(grid, 1.0, 4.0, 0.01, 0.05, 20.0).unwrap();
        let op = HelmholtzOperator::new(&media, 4.0 * PI, false).unwrap();
        let a = assemble_dense(&op, grid).unwrap();
        let b = assemble_dense(&op, grid).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn guard_rejects_large_grids() {
        let grid = Grid2D::new(96, 1.0).unwrap();
        let err = assemble_dense(&identity, grid).unwrap_err();
        assert!(err.to_string().contains("80"), "{err}");
    }

    #[test]
    fn constant_media_eigenvalues_match_closed_form() {
        let grid = Grid2D::new(8, 1.0).unwrap();
        let media = MediaModel::constant(grid, 1.0, 20.0).unwrap();
        let omega = 4.0 * PI;
        let op = HelmholtzOperator::new(&media, omega, false).unwrap();
        let mat = assemble_dense(&op, grid).unwrap();
        let mut vals = dense_eigenvalues(&mat).unwrap();

        let mut expected: Vec<Complex64> = (0..8i64)
            .flat_map(|k1| (0..8i64).map(move |k2| (k1, k2)))
            .map(|(k1, k2)| fd_symbol(&media, omega, k1, k2).unwrap())
            .collect();

        let key = |v: &Complex64| (v.re, v.im);
        vals.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        expected.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        for (v, e) in vals.iter().zip(&expected) {
            assert!((v - e).norm() < 1e-8 * e.norm().max(1.0), "{v} vs {e}");
        }
    }

    #[test]
    fn condition_number_matches_closed_form() {
        for n in [8usize, 16] {
            let grid = Grid2D::new(n, 1.0).unwrap();
            let media = MediaModel::constant(grid, 1.0, 20.0).unwrap();
            let omega = 4.0 * PI;
            let op = HelmholtzOperator::new(&media, omega, false).unwrap();
            let cond = spectral_cond_dense(&op, grid).unwrap();

            let mut max_abs = 0.0f64;
            let mut min_abs = f64::INFINITY;
            for k1 in 0..n as i64 {
                for k2 in 0..n as i64 {
                    let a = fd_symbol(&media, omega, k1, k2).unwrap().norm();
                    max_abs = max_abs.max(a);
                    min_abs = min_abs.min(a);
                }
            }
            let expected = max_abs / min_abs;
            assert!(
                (cond - expected).abs() < 1e-10 * expected,
                "n={n}: {cond} vs {expected}"
            );
        }
    }

    #[test]
    fn arnoldi_identity_and_diagonal() {
        let grid = Grid2D::new(16, 1.0).unwrap();
        let (lambda, converged) =
            arnoldi_largest_eigenvalue(&identity, grid, 20, 1e-10, 50).unwrap();
        assert!(converged);
        assert!((lambda - Complex64::new(1.0, 0.0)).norm() < 1e-10);

        // Spectrum {1..100} on the first 100 entries, identity elsewhere.
        let diag_op = |v: &ComplexField| -> Result<ComplexField> {
            let mut out = v.clone();
            for (i, val) in out.values_mut().iter_mut().enumerate().take(100) {
                *val *= Complex64::new((i + 1) as f64, 0.0);
            }
            Ok(out)
        };
        let (lambda, converged) =
            arnoldi_largest_eigenvalue(&diag_op, grid, 40, 1e-12, 200).unwrap();
        assert!(converged);
        assert!((lambda - Complex64::new(100.0, 0.0)).norm() < 1e-8 * 100.0, "{lambda}");
    }

    #[test]
    fn arnoldi_matches_fd_extreme() {
        let grid = Grid2D::new(16, 1.0).unwrap();
        let media = MediaModel::constant(grid, 1.0, 20.0).unwrap();
        let omega = 4.0 * PI;
        let op = HelmholtzOperator::new(&media, omega, false).unwrap();
        let (lambda, converged) = arnoldi_largest_eigenvalue(&op, grid, 60, 1e-9, 200).unwrap();
        assert!(converged);

        let mut max_abs = 0.0f64;
        for k1 in 0..16i64 {
            for k2 in 0..16i64 {
                max_abs = max_abs.max(fd_symbol(&media, omega, k1, k2).unwrap().norm());
            }
        }
        assert!(
            (lambda.norm() - max_abs).abs() < 1e-6 * max_abs,
            "estimate {} vs {max_abs}",
            lambda.norm()
        );
    }

    #[test]
    fn dense_solve_recovers_known_solution() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 12;
        let mat = Array2::from_shape_fn((n, n), |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let x_true: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(i as f64 + 0.5, -(i as f64)))
            .collect();
        let b: Vec<Complex64> = (0..n)
            .map(|i| (0..n).map(|j| mat[(i, j)] * x_true[j]).sum())
            .collect();
        let x = dense_solve(&mat, &b).unwrap();
        for (a, e) in x.iter().zip(&x_true) {
            assert!((a - e).norm() < 1e-9 * e.norm().max(1.0));
        }
    }
}
