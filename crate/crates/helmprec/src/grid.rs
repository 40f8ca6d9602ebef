//! Square periodic grid, complex field storage and the discrete
//! wavenumber map used by all symbol evaluations.
//!
//! The domain is the square `[-L/2, L/2)^2` sampled with `N` points per
//! direction, node coordinates `x(i,j) = (-L/2 + i*h, -L/2 + j*h)` and
//! spacing `h = L/N`. Fields are stored row-major with the first index
//! running along `x1`, so binary dumps are bit-reproducible.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{HelmError, Result};

/// Square periodic grid with `N` points per direction on a side of
/// (nondimensional) length `L`. The spacing `h = L/N` is always derived,
/// never stored, so `h * N == L` holds exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    n: usize,
    l: f64,
}

impl Grid2D {
    /// Build a grid with `n` points per direction (even, at least 4) on a
    /// square of side `l > 0`.
    ///
    /// Odd `n` is rejected so the Nyquist index `n/2` is well-defined.
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 4 {
            return Err(HelmError::invalid_argument(
                "make_grid",
                format!("need at least 4 points per direction, got {n}"),
            ));
        }
        if n % 2 != 0 {
            return Err(HelmError::invalid_argument(
                "make_grid",
                format!("points per direction must be even, got {n}"),
            ));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(HelmError::invalid_argument(
                "make_grid",
                format!("domain side must be positive and finite, got {l}"),
            ));
        }
        Ok(Grid2D { n, l })
    }

    /// Points per direction.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of grid points, `N^2`.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Domain side length `L`.
    pub fn side(&self) -> f64 {
        self.l
    }

    /// Grid spacing `h = L/N`.
    pub fn spacing(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Coordinates of node `(i, j)`, origin-centered.
    pub fn coord(&self, i: usize, j: usize) -> (f64, f64) {
        let h = self.spacing();
        (-0.5 * self.l + i as f64 * h, -0.5 * self.l + j as f64 * h)
    }

    /// Row-major linear index of node `(i, j)`; `i` runs along `x1`.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    /// Points per wavelength of the background medium, `2*pi*c_o*N / (L*omega)`.
    pub fn ppw(&self, omega: f64, c_o: f64) -> f64 {
        2.0 * PI * c_o * self.n as f64 / (self.l * omega)
    }
}

/// Discrete wavenumbers in standard FFT ordering: nonnegative frequencies
/// first, then negative, with the Nyquist index `N/2` assigned to `-N/2`.
/// Component `k` holds `2*pi*ktilde/L`.
#[derive(Debug, Clone)]
pub struct WavenumberGrid {
    pub xi1: Vec<f64>,
    pub xi2: Vec<f64>,
    /// `|xi|^2 = xi1^2 + xi2^2` on the full N x N index grid, row-major.
    pub xi_sq: Vec<f64>,
}

/// Signed FFT frequency index: `k` for `k < N/2`, `k - N` otherwise.
#[inline]
pub fn signed_index(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Wavenumber map of a grid (see [`WavenumberGrid`] for the ordering).
pub fn wavenumbers(grid: &Grid2D) -> WavenumberGrid {
    let n = grid.n();
    let scale = 2.0 * PI / grid.side();
    let xi: Vec<f64> = (0..n).map(|k| scale * signed_index(k, n) as f64).collect();
    let mut xi_sq = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            xi_sq[i * n + j] = xi[i] * xi[i] + xi[j] * xi[j];
        }
    }
    WavenumberGrid {
        xi1: xi.clone(),
        xi2: xi,
        xi_sq,
    }
}

/// N x N complex samples on a [`Grid2D`], row-major, first index along `x1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Grid2D,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: Grid2D) -> Self {
        ComplexField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Wrap existing samples; the length must equal `grid.len()`.
    pub fn from_values(grid: Grid2D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(HelmError::invalid_argument(
                "ComplexField::from_values",
                format!("expected {} values, got {}", grid.len(), values.len()),
            ));
        }
        Ok(ComplexField { grid, values })
    }

    /// Sample a function of the node coordinates.
    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> Complex64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..n {
            for j in 0..n {
                let (x1, x2) = grid.coord(i, j);
                values.push(f(x1, x2));
            }
        }
        ComplexField { grid, values }
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[self.grid.idx(i, j)]
    }

    /// Euclidean norm over all N^2 entries.
    pub fn norm_l2(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max modulus over all entries.
    pub fn norm_max(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// `self += alpha * other`. The grids must match.
    pub fn axpy(&mut self, alpha: Complex64, other: &ComplexField) -> Result<()> {
        self.check_same_grid(other, "ComplexField::axpy")?;
        for (s, o) in self.values.iter_mut().zip(&other.values) {
            *s += alpha * o;
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: Complex64) {
        for v in &mut self.values {
            *v *= alpha;
        }
    }

    /// Unweighted complex dot product `<self, other> = sum conj(self)*other`.
    pub fn dot(&self, other: &ComplexField) -> Complex64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub(crate) fn check_same_grid(&self, other: &ComplexField, op: &'static str) -> Result<()> {
        if self.grid != other.grid {
            return Err(HelmError::invalid_argument(
                op,
                format!(
                    "grid mismatch: {}x{} side {} vs {}x{} side {}",
                    self.grid.n(),
                    self.grid.n(),
                    self.grid.side(),
                    other.grid.n(),
                    other.grid.n(),
                    other.grid.side()
                ),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spacing_and_coords() {
        let g = Grid2D::new(4, 1.0).unwrap();
        assert_eq!(g.spacing(), 0.25);
        assert_eq!(g.coord(0, 0), (-0.5, -0.5));
        assert_eq!(g.coord(2, 2), (0.0, 0.0));

        // PPW = 12 at omega = 80*pi gives N = 480 on the unit square.
        let g = Grid2D::new(480, 1.0).unwrap();
        assert_eq!(g.spacing(), 1.0 / 480.0);
        assert!((g.ppw(80.0 * PI, 1.0) - 12.0).abs() < 1e-12);
    }

    #[test]
    fn grid_rejects_odd_and_tiny() {
        assert!(Grid2D::new(5, 1.0).is_err());
        assert!(Grid2D::new(2, 1.0).is_err());
        assert!(Grid2D::new(4, 0.0).is_err());
        assert!(Grid2D::new(4, -1.0).is_err());
    }

    #[test]
    fn wavenumber_ordering() {
        let g = Grid2D::new(4, 1.0).unwrap();
        let wn = wavenumbers(&g);
        let tp = 2.0 * PI;
        let expected = [0.0, tp, -2.0 * tp, -tp];
        for (a, b) in wn.xi1.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }

        // L = 2*pi makes the components integers.
        let g = Grid2D::new(4, 2.0 * PI).unwrap();
        let wn = wavenumbers(&g);
        let expected = [0.0, 1.0, -2.0, -1.0];
        for (a, b) in wn.xi1.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn wavenumber_nyquist_square() {
        // At (4,4) on an N=8 grid both components sit at the Nyquist
        // frequency -N/2, so |xi|^2 = 2*(2*pi*4)^2.
        let g = Grid2D::new(8, 1.0).unwrap();
        let wn = wavenumbers(&g);
        let expected = 2.0 * (2.0 * PI * 4.0).powi(2);
        assert!((wn.xi_sq[4 * 8 + 4] - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn wavenumber_negation_symmetry() {
        let g = Grid2D::new(8, 1.3).unwrap();
        let wn = wavenumbers(&g);
        let n = 8;
        for i in 0..n {
            for j in 0..n {
                let ni = (n - i) % n;
                let nj = (n - j) % n;
                assert_eq!(wn.xi_sq[i * n + j], wn.xi_sq[ni * n + nj]);
            }
        }
    }

    #[test]
    fn field_construction_checks_len() {
        let g = Grid2D::new(4, 1.0).unwrap();
        assert!(ComplexField::from_values(g, vec![Complex64::new(1.0, 0.0); 15]).is_err());
        assert!(ComplexField::from_values(g, vec![Complex64::new(1.0, 0.0); 16]).is_ok());
    }
}
