//! Matrix-free discrete Helmholtz operator and source terms.
//!
//! The operator is the second-order centered finite-difference
//! discretization of `c^2 Delta + omega^2 + i*omega*a` with periodic
//! boundary conditions:
//!
//! ```text
//! (A u)(i,j) = s(i,j)^2 * (u(i+1,j) + u(i-1,j) + u(i,j+1) + u(i,j-1) - 4 u(i,j)) / h^2
//!            + (omega^2 + i*omega*a(i,j)) * u(i,j)
//! ```
//!
//! with indices mod N and `s = gamma` (complexified speed) when the
//! absorbing layer is enabled, `s = c` otherwise. For homogeneous media the
//! module also provides the closed-form eigenvalues of this stencil and a
//! continuous-symbol oracle applied in Fourier space; both serve as
//! independent checks on the preconditioner.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{HelmError, Result};
use crate::fft::Fft2;
use crate::grid::{wavenumbers, ComplexField, Grid2D};
use crate::media::MediaModel;

/// Default focus of the incident Gaussian beam.
pub const DEFAULT_BEAM_FOCUS: (f64, f64) = (0.0, 0.3);
/// Default waist of the incident Gaussian beam.
pub const DEFAULT_BEAM_WAIST: f64 = 0.01;

/// Discrete Helmholtz operator on a fixed media model.
///
/// Construction precomputes the stencil coefficient `s^2` and the mass term
/// `omega^2 + i*omega*a`, so each application is a single stencil sweep.
/// The operator is pure and shareable across threads.
#[derive(Debug, Clone)]
pub struct HelmholtzOperator {
    grid: Grid2D,
    omega: f64,
    use_layer: bool,
    ppw: f64,
    lap_coeff: Vec<Complex64>,
    mass_coeff: Vec<Complex64>,
}

impl HelmholtzOperator {
    pub fn new(media: &MediaModel, omega: f64, use_layer: bool) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(HelmError::invalid_argument(
                "HelmholtzOperator::new",
                format!("omega must be positive, got {omega}"),
            ));
        }
        let grid = media.grid();
        let lap_coeff: Vec<Complex64> = if use_layer {
            let gamma = media.complexify_speed()?;
            gamma.values().iter().map(|g| g * g).collect()
        } else {
            media
                .speed()
                .iter()
                .map(|&c| Complex64::new(c * c, 0.0))
                .collect()
        };
        let mass_coeff = media
            .damping()
            .iter()
            .map(|&a| Complex64::new(omega * omega, omega * a))
            .collect();
        Ok(HelmholtzOperator {
            grid,
            omega,
            use_layer,
            ppw: grid.ppw(omega, media.c_o()),
            lap_coeff,
            mass_coeff,
        })
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn uses_layer(&self) -> bool {
        self.use_layer
    }

    /// Points per wavelength of the background medium at this operator's
    /// frequency (diagnostic).
    pub fn ppw(&self) -> f64 {
        self.ppw
    }

    /// Apply the operator to a field on the same grid.
    pub fn apply(&self, u: &ComplexField) -> Result<ComplexField> {
        if u.grid() != self.grid {
            return Err(HelmError::invalid_argument(
                "apply_helmholtz_fd",
                "field grid does not match the operator grid".to_string(),
            ));
        }
        let n = self.grid.n();
        let inv_h2 = 1.0 / (self.grid.spacing() * self.grid.spacing());
        let uv = u.values();
        let mut out = vec![Complex64::new(0.0, 0.0); uv.len()];
        out.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let up = ((i + 1) % n) * n;
            let dn = ((i + n - 1) % n) * n;
            let here = i * n;
            for j in 0..n {
                let jr = (j + 1) % n;
                let jl = (j + n - 1) % n;
                let lap = (uv[up + j] + uv[dn + j] + uv[here + jr] + uv[here + jl]
                    - 4.0 * uv[here + j])
                    * inv_h2;
                row[j] = self.lap_coeff[here + j] * lap + self.mass_coeff[here + j] * uv[here + j];
            }
        });
        ComplexField::from_values(self.grid, out)
    }
}

/// Closed-form eigenvalue of the constant-coefficient periodic stencil on
/// mode `(k1, k2)`:
///
/// ```text
/// lambda(k) = omega^2 + i*omega*a - c^2 * (4/h^2) * (sin^2(pi*k1/N) + sin^2(pi*k2/N))
/// ```
pub fn fd_mode_eigenvalue(grid: &Grid2D, omega: f64, c: f64, a: f64, k1: i64, k2: i64) -> Complex64 {
    let n = grid.n() as f64;
    let h = grid.spacing();
    let s1 = (PI * k1 as f64 / n).sin();
    let s2 = (PI * k2 as f64 / n).sin();
    Complex64::new(omega * omega, omega * a) - c * c * (4.0 / (h * h)) * (s1 * s1 + s2 * s2)
}

/// [`fd_mode_eigenvalue`] for a homogeneous media model; the oracle used in
/// the conditioning and clustering checks. Rejects heterogeneous media.
pub fn fd_symbol(media: &MediaModel, omega: f64, k1: i64, k2: i64) -> Result<Complex64> {
    if !media.is_constant_speed() {
        return Err(HelmError::invalid_argument(
            "fd_symbol",
            format!(
                "closed-form eigenvalues need constant media, speed range is [{}, {}]",
                media.c_min(),
                media.c_max()
            ),
        ));
    }
    Ok(fd_mode_eigenvalue(&media.grid(), omega, media.c_min(), media.a_o(), k1, k2))
}

/// Continuous-symbol oracle for homogeneous media: multiplies the spectrum
/// of `u` by `omega^2 + i*omega*a_o - c_o^2 |xi|^2`. Exactly inverted by the
/// single-node preconditioner.
pub fn apply_helmholtz_spectral(
    media: &MediaModel,
    omega: f64,
    u: &ComplexField,
) -> Result<ComplexField> {
    let op = "apply_helmholtz_spectral";
    if !media.is_constant_speed() {
        return Err(HelmError::invalid_argument(
            op,
            "spectral oracle needs constant media".to_string(),
        ));
    }
    if u.grid() != media.grid() {
        return Err(HelmError::invalid_argument(op, "field grid mismatch".to_string()));
    }
    let grid = media.grid();
    let c2 = media.c_min() * media.c_min();
    let mass = Complex64::new(omega * omega, omega * media.a_o());
    let wn = wavenumbers(&grid);
    let plan = Fft2::new(grid.n());
    let mut data = u.values().to_vec();
    plan.forward(&mut data);
    for (v, &xi_sq) in data.iter_mut().zip(&wn.xi_sq) {
        *v *= mass - c2 * xi_sq;
    }
    plan.inverse(&mut data);
    ComplexField::from_values(grid, data)
}

/// Plane-wave source `f = exp(i * (omega/c_o) * x1)`.
pub fn plane_wave_source(grid: Grid2D, omega: f64, c_o: f64) -> ComplexField {
    let k = omega / c_o;
    ComplexField::from_fn(grid, |x1, _| (Complex64::i() * k * x1).exp())
}

/// Incident Gaussian beam traveling in the negative `x2` direction.
///
/// ```text
/// u_inc = W_o/W(x2 - x2o) * exp(-[(x1 - x1o)/W(x2 - x2o)]^2)
///       * exp(-i*k*[x2 - x2o + kappa(x2)*(x1 - x1o)^2 / 2])
/// ```
///
/// with `W(y) = W_o*sqrt(1 + (y/x_R)^2)`, curvature
/// `kappa(x2) = x2/(x2^2 + x_R^2)`, Rayleigh range `x_R = omega*W_o^2/(2 c_o)`
/// and complex wavenumber `k = (omega/c_o)*sqrt(1 + i*a_o/omega)` (principal
/// branch).
pub fn gaussian_beam(
    grid: Grid2D,
    omega: f64,
    c_o: f64,
    a_o: f64,
    focus: (f64, f64),
    waist: f64,
) -> ComplexField {
    let (x1o, x2o) = focus;
    let x_r = rayleigh_range(omega, c_o, waist);
    let k = (omega / c_o) * Complex64::new(1.0, a_o / omega).sqrt();
    ComplexField::from_fn(grid, |x1, x2| {
        let dy = x2 - x2o;
        let w = waist * (1.0 + (dy / x_r).powi(2)).sqrt();
        let dx = x1 - x1o;
        let kappa = x2 / (x2 * x2 + x_r * x_r);
        let envelope = (waist / w) * (-(dx / w).powi(2)).exp();
        let phase = -Complex64::i() * k * (dy + 0.5 * kappa * dx * dx);
        envelope * phase.exp()
    })
}

/// Rayleigh range `x_R = omega * W_o^2 / (2 c_o)` of the beam.
pub fn rayleigh_range(omega: f64, c_o: f64, waist: f64) -> f64 {
    omega * waist * waist / (2.0 * c_o)
}

/// Scattering source for an incident field in heterogeneous media:
///
/// ```text
/// f = -( omega^2 (c_o^2 - c^2)/c_o^2 * (1 + i*a_o/omega) + i*omega*(a - a_o) ) * u_inc
/// ```
///
/// The real-valued speed `c` enters here, not the complexified one; the
/// source vanishes wherever the media equals the background.
pub fn scattering_source(
    media: &MediaModel,
    omega: f64,
    u_inc: &ComplexField,
) -> Result<ComplexField> {
    if u_inc.grid() != media.grid() {
        return Err(HelmError::invalid_argument(
            "scattering_source",
            "incident field grid mismatch".to_string(),
        ));
    }
    let c_o = media.c_o();
    let a_o = media.a_o();
    let damping_shift = Complex64::new(1.0, a_o / omega);
    let values = media
        .speed()
        .iter()
        .zip(media.damping())
        .zip(u_inc.values())
        .map(|((&c, &a), &u)| {
            let contrast = omega * omega * (c_o * c_o - c * c) / (c_o * c_o) * damping_shift;
            let absorption = Complex64::new(0.0, omega * (a - a_o));
            -(contrast + absorption) * u
        })
        .collect();
    ComplexField::from_values(media.grid(), values)
}
