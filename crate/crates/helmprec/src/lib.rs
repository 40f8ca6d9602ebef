//! Matrix-free 2D Helmholtz toolkit.
//!
//! The discrete Helmholtz operator `c^2 Delta_h + omega^2 + i*omega*a` on a
//! square periodic grid is ill-conditioned at useful frequencies. This crate
//! preconditions it with the pseudodifferential operator of the reciprocal
//! symbol `1/(omega^2 + i*omega*a - c^2 |xi|^2)`, interpolated univariately
//! in the wave speed so that one application costs one forward FFT plus `M`
//! inverse FFTs (`M` small, independent of the grid). Absorbing layers are
//! handled by complexifying the wave speed on a second interpolation branch.
//!
//! Modules:
//! - [`grid`] / [`fft`]: grid, complex fields, wavenumbers, 2D FFTs.
//! - [`media`]: wave-speed/damping/layer builders (inclusion, phantom).
//! - [`operators`]: finite-difference operator, spectral oracle, sources.
//! - [`symbol`]: interpolation basis, symbol tables, preconditioner apply.
//! - [`krylov`] / [`dense`]: restarted GMRES, dense eigen oracle, Arnoldi.
//! - [`experiments`]: complexity, conditioning, convergence and accuracy
//!   studies with CSV/HPF1/PGM outputs.

pub mod dense;
pub mod error;
pub mod experiments;
pub mod fft;
pub mod grid;
pub mod io;
pub mod krylov;
pub mod media;
pub mod operators;
pub mod symbol;

pub use error::{HelmError, Result};
pub use fft::{fft2, ifft2};
pub use grid::{wavenumbers, ComplexField, Grid2D, WavenumberGrid};
pub use krylov::{gmres, FieldOperator, GmresConfig, SolveReport};
pub use media::{smooth_heaviside, MediaModel};
pub use operators::HelmholtzOperator;
pub use symbol::{principal_symbol, InterpBasis, PrecondPlan};

/// Cap the global thread pool; reads well-formed values only once the pool
/// is first used, so call this before any parallel work. Returns the
/// effective thread count.
pub fn init_threads(threads: Option<usize>) -> usize {
    if let Some(t) = threads {
        let t = t.max(1);
        // Ignore the error when a pool already exists; the existing pool
        // keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    rayon::current_num_threads()
}
