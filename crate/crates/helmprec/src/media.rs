//! Wave-speed, damping and absorbing-layer fields.
//!
//! Builders for the media used by the operator and the preconditioner: a
//! smooth circular inclusion on a constant background, and a synthetic
//! concentric head phantom (skull annulus around a brain disk) carrying the
//! usual tissue constants. The absorbing layer is described by a profile
//! `zeta >= 0`; the complexified speed is `gamma = c * (1 - i*zeta)`, and
//! the wave speed must equal the background value `c_o` wherever the layer
//! is active so that speed interpolation stays univariate.

use num_complex::Complex64;

use crate::error::{HelmError, Result};
use crate::grid::{ComplexField, Grid2D};

/// Tolerance for "the wave speed equals `c_o` on the layer support".
const LAYER_SPEED_TOL: f64 = 1e-12;

/// Tolerance for matching a speed against a damping-map entry.
const DAMPING_MATCH_TOL: f64 = 1e-9;

/// Smooth version of the Heaviside function, `H_eta(s) = 1/(1 + exp(-s/eta))`.
///
/// Monotone increasing with `H_eta(0) = 1/2`; evaluated in a form that does
/// not overflow for large `|s/eta|` (it saturates at 0 or 1 in round-off).
pub fn smooth_heaviside(s: f64, eta: f64) -> f64 {
    let t = s / eta;
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Piecewise-linear absorbing-layer profile in the radius:
/// zero inside `onset`, slope `slope` outside.
pub fn layer_profile(r: f64, onset: f64, slope: f64) -> f64 {
    if r < onset {
        0.0
    } else {
        slope * (r - onset)
    }
}

/// Default onset radius of the absorbing layer.
pub const LAYER_ONSET: f64 = 0.375;
/// Default slope of the absorbing-layer profile.
pub const LAYER_SLOPE: f64 = 0.4;

/// Wave speed `c`, damping `a` and layer profile `zeta` on a grid, together
/// with the background constants and the speed-to-damping map.
#[derive(Debug, Clone)]
pub struct MediaModel {
    grid: Grid2D,
    c: Vec<f64>,
    a: Vec<f64>,
    zeta: Vec<f64>,
    c_o: f64,
    a_o: f64,
    c_min: f64,
    c_max: f64,
    /// `(speed, damping)` pairs sorted by speed; speeds between two entries
    /// get linearly interpolated damping.
    damping_map: Vec<(f64, f64)>,
    damping_default: f64,
}

/// Complexified wave speed `gamma = c * (1 - i*zeta)`.
#[derive(Debug, Clone)]
pub struct ComplexSpeedField {
    grid: Grid2D,
    gamma: Vec<Complex64>,
}

impl ComplexSpeedField {
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.gamma
    }
}

impl MediaModel {
    fn assemble(
        op: &'static str,
        grid: Grid2D,
        c: Vec<f64>,
        a: Vec<f64>,
        zeta: Vec<f64>,
        c_o: f64,
        a_o: f64,
        damping_map: Vec<(f64, f64)>,
        damping_default: f64,
    ) -> Result<Self> {
        let (mut c_min, mut c_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in &c {
            if !v.is_finite() || v <= 0.0 {
                return Err(HelmError::invalid_media(op, format!("nonpositive wave speed {v}")));
            }
            c_min = c_min.min(v);
            c_max = c_max.max(v);
        }
        for &v in &a {
            if !v.is_finite() || v <= 0.0 {
                return Err(HelmError::invalid_media(op, format!("nonpositive damping {v}")));
            }
        }
        for &z in &zeta {
            if !z.is_finite() || z < 0.0 {
                return Err(HelmError::invalid_media(op, format!("negative layer profile {z}")));
            }
        }
        Ok(MediaModel {
            grid,
            c,
            a,
            zeta,
            c_o,
            a_o,
            c_min,
            c_max,
            damping_map,
            damping_default,
        })
    }

    /// Homogeneous medium: `c = c_o`, `a = a_o`, no layer.
    pub fn constant(grid: Grid2D, c_o: f64, a_o: f64) -> Result<Self> {
        Self::assemble(
            "MediaModel::constant",
            grid,
            vec![c_o; grid.len()],
            vec![a_o; grid.len()],
            vec![0.0; grid.len()],
            c_o,
            a_o,
            Vec::new(),
            a_o,
        )
    }

    /// Circular inclusion of contrast `delta` on a constant background:
    /// `c = c_o + delta * H_eta(radius - r)`, constant damping, no layer.
    pub fn circular_inclusion(
        grid: Grid2D,
        c_o: f64,
        delta: f64,
        eta: f64,
        radius: f64,
        damping: f64,
    ) -> Result<Self> {
        let op = "make_circular_inclusion";
        if !(c_o > 0.0) || !(c_o + delta > 0.0) {
            return Err(HelmError::invalid_argument(
                op,
                format!("speeds must stay positive: c_o={c_o}, c_o+delta={}", c_o + delta),
            ));
        }
        if !(eta > 0.0) {
            return Err(HelmError::invalid_argument(op, format!("eta must be positive, got {eta}")));
        }
        let n = grid.n();
        let mut c = Vec::with_capacity(grid.len());
        for i in 0..n {
            for j in 0..n {
                let (x1, x2) = grid.coord(i, j);
                let r = (x1 * x1 + x2 * x2).sqrt();
                c.push(c_o + delta * smooth_heaviside(radius - r, eta));
            }
        }
        Self::assemble(
            op,
            grid,
            c,
            vec![damping; grid.len()],
            vec![0.0; grid.len()],
            c_o,
            damping,
            Vec::new(),
            damping,
        )
    }

    /// Synthetic head phantom: a skull annulus (inner radius 0.15, outer
    /// 0.19) with speed 6.71 / damping 258 around a brain disk with speed
    /// 4.55 / damping 10.7, in a background with speed 1 / damping 20.9.
    /// Tissue boundaries are blended with [`smooth_heaviside`] at
    /// `eta = 1/800`, the damping with the same weights as the speed. The
    /// absorbing layer uses the default profile, and the speed is pinned to
    /// the background value wherever the layer is active.
    pub fn phantom(grid: Grid2D) -> Result<Self> {
        const C_BG: f64 = 1.0;
        const A_BG: f64 = 20.9;
        const C_SKULL: f64 = 6.71;
        const A_SKULL: f64 = 258.0;
        const C_BRAIN: f64 = 4.55;
        const A_BRAIN: f64 = 10.7;
        const R_INNER: f64 = 0.15;
        const R_OUTER: f64 = 0.19;
        const ETA: f64 = 1.0 / 800.0;

        let zeta = make_zeta(&grid)?;
        let n = grid.n();
        let mut c = Vec::with_capacity(grid.len());
        let mut a = Vec::with_capacity(grid.len());
        for i in 0..n {
            for j in 0..n {
                let (x1, x2) = grid.coord(i, j);
                let r = (x1 * x1 + x2 * x2).sqrt();
                let w_outer = smooth_heaviside(R_OUTER - r, ETA);
                let w_inner = smooth_heaviside(R_INNER - r, ETA);
                let idx = i * n + j;
                let mut cv = C_BG + (C_SKULL - C_BG) * w_outer + (C_BRAIN - C_SKULL) * w_inner;
                let av = A_BG + (A_SKULL - A_BG) * w_outer + (A_BRAIN - A_SKULL) * w_inner;
                if zeta[idx] > 0.0 {
                    cv = C_BG;
                }
                c.push(cv);
                a.push(av);
            }
        }
        Self::assemble(
            "make_phantom",
            grid,
            c,
            a,
            zeta,
            C_BG,
            A_BG,
            vec![(C_BG, A_BG), (C_BRAIN, A_BRAIN), (C_SKULL, A_SKULL)],
            A_BG,
        )
    }

    /// Attach an absorbing-layer profile. The wave speed must already equal
    /// `c_o` (within round-off) wherever `zeta > 0`; it is then pinned to
    /// `c_o` exactly there.
    pub fn set_layer(&mut self, zeta: Vec<f64>) -> Result<()> {
        let op = "MediaModel::set_layer";
        if zeta.len() != self.grid.len() {
            return Err(HelmError::invalid_argument(
                op,
                format!("expected {} profile values, got {}", self.grid.len(), zeta.len()),
            ));
        }
        for (idx, &z) in zeta.iter().enumerate() {
            if !z.is_finite() || z < 0.0 {
                return Err(HelmError::invalid_media(op, format!("bad profile value {z}")));
            }
            if z > 0.0 && (self.c[idx] - self.c_o).abs() > LAYER_SPEED_TOL {
                return Err(HelmError::invalid_media(
                    op,
                    format!(
                        "wave speed {} differs from background {} at a layer point (index {idx})",
                        self.c[idx], self.c_o
                    ),
                ));
            }
        }
        for (cv, &z) in self.c.iter_mut().zip(&zeta) {
            if z > 0.0 {
                *cv = self.c_o;
            }
        }
        self.zeta = zeta;
        let (mut c_min, mut c_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in &self.c {
            c_min = c_min.min(v);
            c_max = c_max.max(v);
        }
        self.c_min = c_min;
        self.c_max = c_max;
        Ok(())
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn speed(&self) -> &[f64] {
        &self.c
    }

    pub fn damping(&self) -> &[f64] {
        &self.a
    }

    pub fn zeta(&self) -> &[f64] {
        &self.zeta
    }

    pub fn c_o(&self) -> f64 {
        self.c_o
    }

    pub fn a_o(&self) -> f64 {
        self.a_o
    }

    pub fn c_min(&self) -> f64 {
        self.c_min
    }

    pub fn c_max(&self) -> f64 {
        self.c_max
    }

    pub fn zeta_max(&self) -> f64 {
        self.zeta.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_constant_speed(&self) -> bool {
        self.c_min == self.c_max
    }

    /// Damping associated with a wave speed.
    ///
    /// Speeds matching a map entry (within round-off) return that entry's
    /// damping; speeds between two entries — produced by the smoothed tissue
    /// boundaries — get linearly interpolated damping; anything else falls
    /// back to the model's constant default.
    pub fn damping_at(&self, speed: f64) -> Result<f64> {
        let op = "damping_at";
        if speed < self.c_min - DAMPING_MATCH_TOL || speed > self.c_max + DAMPING_MATCH_TOL {
            return Err(HelmError::invalid_argument(
                op,
                format!("speed {speed} outside [{}, {}]", self.c_min, self.c_max),
            ));
        }
        for &(s, d) in &self.damping_map {
            if (speed - s).abs() <= DAMPING_MATCH_TOL {
                return Ok(d);
            }
        }
        for pair in self.damping_map.windows(2) {
            let (s0, d0) = pair[0];
            let (s1, d1) = pair[1];
            if speed > s0 && speed < s1 {
                let t = (speed - s0) / (s1 - s0);
                return Ok(d0 + t * (d1 - d0));
            }
        }
        Ok(self.damping_default)
    }

    /// Complexified wave speed `gamma = c * (1 - i*zeta)`, pointwise.
    ///
    /// Fails if the layer constraint is violated: `zeta > 0` at a point
    /// where the speed differs from `c_o` by more than round-off.
    pub fn complexify_speed(&self) -> Result<ComplexSpeedField> {
        let op = "complexify_speed";
        let mut gamma = Vec::with_capacity(self.grid.len());
        for (idx, (&cv, &z)) in self.c.iter().zip(&self.zeta).enumerate() {
            if z > 0.0 && (cv - self.c_o).abs() > LAYER_SPEED_TOL {
                return Err(HelmError::invalid_media(
                    op,
                    format!(
                        "zeta = {z} where c = {cv} != c_o = {} (index {idx})",
                        self.c_o
                    ),
                ));
            }
            gamma.push(Complex64::new(cv, -cv * z));
        }
        Ok(ComplexSpeedField { grid: self.grid, gamma })
    }

    /// Real field exported as a complex field (zero imaginary parts), for
    /// HPF1 dumps and inspection.
    pub fn export_field(&self, which: MediaField) -> ComplexField {
        let src = match which {
            MediaField::Speed => &self.c,
            MediaField::Damping => &self.a,
            MediaField::Zeta => &self.zeta,
        };
        let values = src.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        ComplexField::from_values(self.grid, values).expect("media field has grid length")
    }
}

/// Selector for [`MediaModel::export_field`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MediaField {
    Speed,
    Damping,
    Zeta,
}

/// Absorbing-layer profile sampled on a grid with the default geometry
/// (onset 0.375, slope 0.4). The profile is tied to the unit square;
/// other domain sides are rejected.
pub fn make_zeta(grid: &Grid2D) -> Result<Vec<f64>> {
    make_zeta_with(grid, LAYER_ONSET, LAYER_SLOPE)
}

/// Absorbing-layer profile with explicit onset radius and slope.
pub fn make_zeta_with(grid: &Grid2D, onset: f64, slope: f64) -> Result<Vec<f64>> {
    let op = "make_zeta";
    if (grid.side() - 1.0).abs() > 1e-12 {
        return Err(HelmError::invalid_argument(
            op,
            format!("layer profile is defined on the unit square, got L = {}", grid.side()),
        ));
    }
    if !(onset > 0.0) || !(slope >= 0.0) {
        return Err(HelmError::invalid_argument(
            op,
            format!("need onset > 0 and slope >= 0, got onset={onset}, slope={slope}"),
        ));
    }
    let n = grid.n();
    let mut zeta = Vec::with_capacity(grid.len());
    for i in 0..n {
        for j in 0..n {
            let (x1, x2) = grid.coord(i, j);
            let r = (x1 * x1 + x2 * x2).sqrt();
            zeta.push(layer_profile(r, onset, slope));
        }
    }
    Ok(zeta)
}
