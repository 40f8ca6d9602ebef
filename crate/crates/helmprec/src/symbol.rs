//! Interpolated-symbol preconditioner.
//!
//! The preconditioner approximates the inverse Helmholtz operator by the
//! reciprocal of its symbol,
//!
//! ```text
//! q(c, xi) = 1 / (omega^2 + i*omega*a - c^2 |xi|^2),
//! ```
//!
//! interpolated over the *wave speed* rather than over phase space: with
//! hat functions `phi_m` on speed nodes `c_1 < ... < c_M`,
//!
//! ```text
//! (Q_M v)(x) = sum_m phi_m(c(x)) * IFFT[ q(c_m, .) * FFT(v) ](x),
//! ```
//!
//! which costs one forward FFT plus `M` inverse FFTs. Because the speed is
//! univariate, `M` stays small and independent of the grid size.
//!
//! With an absorbing layer the speed is complexified, `gamma = c(1 - i*zeta)`,
//! and `gamma` takes values on two line segments: the real interval
//! `[c_min, c_max]` and the vertical segment from `c_o` to
//! `c_o(1 - i*zeta_max)`. Each segment gets its own univariate hat basis; the
//! layer branch adds tables `q(c_o(1 - i*zeta_m), .)` weighted by
//! `phi_{m_o}(Re gamma) * phitilde_m(Im gamma)`, and the real branch is
//! weighted by `phitilde_0(Im gamma)` so the two branches form a partition of
//! unity over the whole grid.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{HelmError, Result};
use crate::fft::Fft2;
use crate::grid::{wavenumbers, ComplexField, Grid2D};
use crate::media::MediaModel;

/// Matching tolerance for "the background speed is already a node" and for
/// clamping interpolation queries just outside the node span.
const NODE_TOL: f64 = 1e-12;

/// Principal symbol of the inverse Helmholtz operator,
/// `1 / (omega^2 + i*omega*a - c^2 * xi_sq)`, for real or complexified
/// speed. Fails only if the denominator vanishes to working precision,
/// which cannot happen for `a > 0` with real speed or for `Im(c) < 0`.
pub fn principal_symbol(c: Complex64, a: f64, omega: f64, xi_sq: f64) -> Result<Complex64> {
    let den = Complex64::new(omega * omega, omega * a) - (c * c) * xi_sq;
    let den_abs = den.norm();
    if den_abs < 1e-300 {
        return Err(HelmError::SingularSymbol { op: "principal_symbol", denom_abs: den_abs });
    }
    Ok(den.finv())
}

/// Up to two `(node index, weight)` pairs of a piecewise-linear hat basis.
#[derive(Debug, Clone, Copy)]
pub struct HatWeights {
    pairs: [(usize, f64); 2],
    count: usize,
}

impl HatWeights {
    fn single(index: usize) -> Self {
        HatWeights { pairs: [(index, 1.0), (0, 0.0)], count: 1 }
    }

    fn pair(i0: usize, w0: f64, i1: usize, w1: f64) -> Self {
        HatWeights { pairs: [(i0, w0), (i1, w1)], count: 2 }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.pairs[..self.count].iter().copied()
    }

    /// Weight attached to a specific node index (zero if inactive).
    pub fn weight_of(&self, index: usize) -> f64 {
        self.iter()
            .find_map(|(i, w)| (i == index).then_some(w))
            .unwrap_or(0.0)
    }

    pub fn sum(&self) -> f64 {
        self.iter().map(|(_, w)| w).sum()
    }
}

fn hat_weights(nodes: &[f64], x: f64, op: &'static str) -> Result<HatWeights> {
    let lo = nodes[0];
    let hi = *nodes.last().expect("nodes nonempty");
    if x < lo - NODE_TOL || x > hi + NODE_TOL {
        return Err(HelmError::invalid_argument(
            op,
            format!("value {x} outside interpolation range [{lo}, {hi}]"),
        ));
    }
    let x = x.clamp(lo, hi);
    if nodes.len() == 1 {
        return Ok(HatWeights::single(0));
    }
    let seg = match nodes.binary_search_by(|v| v.partial_cmp(&x).expect("finite node")) {
        Ok(i) => return Ok(HatWeights::single(i)),
        Err(i) => i.saturating_sub(1).min(nodes.len() - 2),
    };
    let (c0, c1) = (nodes[seg], nodes[seg + 1]);
    let t = (x - c0) / (c1 - c0);
    Ok(HatWeights::pair(seg, 1.0 - t, seg + 1, t))
}

/// Interpolation nodes for the real speed range and for the layer profile.
///
/// Real nodes are equidistant from `c_min` to `c_max`; if the background
/// speed is not already (within round-off) a node it is inserted as an extra
/// node. Layer nodes sample `[0, zeta_max]` with `zeta_0 = 0`; the entry at
/// index 0 never owns a symbol table, it marks the off-layer branch.
#[derive(Debug, Clone)]
pub struct InterpBasis {
    nodes: Vec<f64>,
    background_index: usize,
    layer_nodes: Vec<f64>,
    c_o: f64,
}

impl InterpBasis {
    /// Build from an explicit speed range. `m = 1` is allowed only for a
    /// degenerate range; `mtilde >= 1` is required as soon as `zeta_max > 0`.
    pub fn from_range(
        c_min: f64,
        c_max: f64,
        c_o: f64,
        m: usize,
        zeta_max: f64,
        mtilde: usize,
    ) -> Result<Self> {
        let op = "build_basis";
        if c_min > c_max || !(c_min > 0.0) {
            return Err(HelmError::invalid_argument(
                op,
                format!("bad speed range [{c_min}, {c_max}]"),
            ));
        }
        let degenerate = c_max - c_min <= NODE_TOL;
        let mut nodes = if degenerate {
            if m != 1 {
                return Err(HelmError::invalid_argument(
                    op,
                    format!("constant speed admits exactly M = 1 node, got M = {m}"),
                ));
            }
            vec![c_min]
        } else {
            if m < 2 {
                return Err(HelmError::invalid_argument(
                    op,
                    format!("variable speed needs M >= 2 nodes, got M = {m}"),
                ));
            }
            let h = (c_max - c_min) / (m - 1) as f64;
            let mut v: Vec<f64> = (0..m).map(|i| c_min + i as f64 * h).collect();
            v[m - 1] = c_max;
            v
        };

        // Guarantee exact membership of the background speed: snap the
        // nearest node when it is within round-off, insert otherwise.
        let background_index = match nodes.iter().position(|&v| (v - c_o).abs() <= NODE_TOL) {
            Some(i) => {
                nodes[i] = c_o;
                i
            }
            None => {
                let pos = nodes.partition_point(|&v| v < c_o);
                nodes.insert(pos, c_o);
                pos
            }
        };

        let layer_nodes = if zeta_max > 0.0 {
            if mtilde < 1 {
                return Err(HelmError::invalid_argument(
                    op,
                    format!("absorbing layer needs Mtilde >= 1, got {mtilde}"),
                ));
            }
            let h = zeta_max / mtilde as f64;
            let mut v: Vec<f64> = (0..=mtilde).map(|i| i as f64 * h).collect();
            v[mtilde] = zeta_max;
            v
        } else {
            vec![0.0]
        };

        Ok(InterpBasis { nodes, background_index, layer_nodes, c_o })
    }

    /// Speed interpolation nodes, strictly increasing.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Index of the background speed among [`Self::nodes`].
    pub fn background_index(&self) -> usize {
        self.background_index
    }

    /// Layer profile nodes including the leading zero.
    pub fn layer_nodes(&self) -> &[f64] {
        &self.layer_nodes
    }

    /// Number of speed nodes (after any background insertion).
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of layer symbol tables (`zeta` nodes excluding zero).
    pub fn layer_table_count(&self) -> usize {
        self.layer_nodes.len() - 1
    }

    pub fn background_speed(&self) -> f64 {
        self.c_o
    }

    /// Hat weights of a speed value; values within `1e-12` of the span are
    /// clamped, values further out are rejected.
    pub fn weights(&self, cval: f64) -> Result<HatWeights> {
        hat_weights(&self.nodes, cval, "basis_weights")
    }

    /// Hat weights of a layer-profile value on the `zeta` nodes.
    pub fn layer_weights(&self, zeta: f64) -> Result<HatWeights> {
        hat_weights(&self.layer_nodes, zeta, "basis_weights")
    }
}

/// Equidistant speed nodes and layer nodes for a media model.
pub fn build_basis(media: &MediaModel, m: usize, mtilde: usize) -> Result<InterpBasis> {
    let c_o = media.c_o();
    let (c_min, c_max) = (media.c_min(), media.c_max());
    if c_o < c_min - NODE_TOL || c_o > c_max + NODE_TOL {
        return Err(HelmError::invalid_argument(
            "build_basis",
            format!("background speed {c_o} outside the media range [{c_min}, {c_max}]"),
        ));
    }
    InterpBasis::from_range(c_min, c_max, c_o, m, media.zeta_max(), mtilde)
}

/// Default number of layer nodes for a given `M`: `max(1, ceil(M/2))`.
pub fn default_mtilde(m: usize) -> usize {
    usize::max(1, m.div_ceil(2))
}

/// Precomputed preconditioner: symbol tables on the wavenumber grid plus
/// per-table weight fields. Immutable after construction and shareable; the
/// application is a pure function of the input field.
pub struct PrecondPlan {
    grid: Grid2D,
    omega: f64,
    basis: InterpBasis,
    /// `node_count` real-branch tables followed by `layer_table_count`
    /// layer-branch tables, each on the full N x N wavenumber grid.
    tables: Vec<Vec<Complex64>>,
    /// Pointwise weight of each table; entry `t` multiplies the inverse
    /// transform of table `t`.
    weights: Vec<Vec<f64>>,
    active: Vec<bool>,
    fft: Fft2,
}

impl PrecondPlan {
    /// Precompute symbol tables and weights (see Eq. forms in the module
    /// docs). Damping at a speed node comes from the media's speed-damping
    /// map; layer tables use the background damping.
    pub fn build(media: &MediaModel, omega: f64, m: usize, mtilde: usize) -> Result<Self> {
        let grid = media.grid();
        let basis = build_basis(media, m, mtilde)?;
        let gamma = media.complexify_speed()?;
        let wn = wavenumbers(&grid);
        let n2 = grid.len();
        let m_eff = basis.node_count();
        let n_layer = basis.layer_table_count();
        let c_o = media.c_o();
        let a_o = media.a_o();

        // Node speeds paired with their damping; the background node may sit
        // just outside the media's speed range after insertion, so clamp the
        // damping lookup.
        let mut columns: Vec<Complex64> = Vec::with_capacity(m_eff + n_layer);
        let mut dampings: Vec<f64> = Vec::with_capacity(m_eff + n_layer);
        for &cm in basis.nodes() {
            columns.push(Complex64::new(cm, 0.0));
            dampings.push(media.damping_at(cm.clamp(media.c_min(), media.c_max()))?);
        }
        for &zm in &basis.layer_nodes()[1..] {
            columns.push(Complex64::new(c_o, -c_o * zm));
            dampings.push(a_o);
        }

        let tables = columns
            .par_iter()
            .zip(dampings.par_iter())
            .map(|(&cv, &av)| {
                wn.xi_sq
                    .iter()
                    .map(|&xs| principal_symbol(cv, av, omega, xs))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        let mut weights = vec![vec![0.0; n2]; m_eff + n_layer];
        for (idx, g) in gamma.values().iter().enumerate() {
            let real_hats = basis.weights(g.re)?;
            let layer_hats = basis.layer_weights(-g.im / c_o)?;
            let off_layer = layer_hats.weight_of(0);
            let at_background = real_hats.weight_of(basis.background_index());
            for (mi, w) in real_hats.iter() {
                weights[mi][idx] += w * off_layer;
            }
            for (li, w) in layer_hats.iter() {
                if li >= 1 {
                    weights[m_eff + li - 1][idx] += at_background * w;
                }
            }
        }
        let active = weights
            .iter()
            .map(|field| field.iter().any(|&w| w != 0.0))
            .collect();

        Ok(PrecondPlan {
            grid,
            omega,
            basis,
            tables,
            weights,
            active,
            fft: Fft2::new(grid.n()),
        })
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn basis(&self) -> &InterpBasis {
        &self.basis
    }

    /// Total number of symbol tables, real branch plus layer branch.
    pub fn table_count(&self) -> usize {
        self.tables.len()
    }

    /// Number of complex entries held by the symbol tables (diagnostic).
    pub fn complex_entries(&self) -> usize {
        self.tables.len() * self.grid.len()
    }

    pub fn table(&self, t: usize) -> &[Complex64] {
        &self.tables[t]
    }

    pub fn weight_field(&self, t: usize) -> &[f64] {
        &self.weights[t]
    }

    /// Tables whose weight field is identically zero are skipped on apply.
    pub fn active_tables(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// Apply the preconditioner: one forward FFT, then for every active
    /// table a pointwise multiply, an inverse FFT and a weighted
    /// accumulation. Accumulation runs in ascending table order, so results
    /// are reproducible bit for bit.
    pub fn apply(&self, v: &ComplexField) -> Result<ComplexField> {
        if v.grid() != self.grid {
            return Err(HelmError::invalid_argument(
                "apply_precond",
                "field grid does not match the plan grid".to_string(),
            ));
        }
        let n2 = self.grid.len();
        let mut vhat = v.values().to_vec();
        self.fft.forward(&mut vhat);

        let mut out = vec![Complex64::new(0.0, 0.0); n2];
        let mut work = vec![Complex64::new(0.0, 0.0); n2];
        for t in 0..self.tables.len() {
            if !self.active[t] {
                continue;
            }
            work.copy_from_slice(&vhat);
            for (w, &q) in work.iter_mut().zip(&self.tables[t]) {
                *w *= q;
            }
            self.fft.inverse(&mut work);
            for ((o, &wt), &f) in out.iter_mut().zip(&self.weights[t]).zip(&work) {
                *o += wt * f;
            }
        }
        ComplexField::from_values(self.grid, out)
    }
}

/// Sup-norm interpolation error of the symbol over a speed range:
/// `sup_{c, xi} | q(c, xi) - sum_m phi_m(c) q(c_m, xi) |`
/// with `m` equidistant nodes, constant damping, a dense speed sample of
/// `c_samples >= 1000` points and the supplied `|xi|^2` samples.
pub fn interp_symbol_error(
    c_min: f64,
    c_max: f64,
    a: f64,
    m: usize,
    omega: f64,
    xi_sq_samples: &[f64],
    c_samples: usize,
) -> Result<f64> {
    let op = "interp_symbol_error";
    if m < 2 || c_min >= c_max {
        return Err(HelmError::invalid_argument(
            op,
            format!("need M >= 2 and a nondegenerate range, got M={m}, [{c_min}, {c_max}]"),
        ));
    }
    let samples = c_samples.max(1000);
    let h = (c_max - c_min) / (m - 1) as f64;
    let nodes: Vec<f64> = (0..m).map(|i| c_min + i as f64 * h).collect();

    let hats: Vec<HatWeights> = (0..samples)
        .map(|k| {
            let c = c_min + (c_max - c_min) * k as f64 / (samples - 1) as f64;
            hat_weights(&nodes, c, op)
        })
        .collect::<Result<Vec<_>>>()?;

    let sup = xi_sq_samples
        .par_iter()
        .map(|&xs| -> Result<f64> {
            let node_vals: Vec<Complex64> = nodes
                .iter()
                .map(|&cm| principal_symbol(Complex64::new(cm, 0.0), a, omega, xs))
                .collect::<Result<Vec<_>>>()?;
            let mut worst: f64 = 0.0;
            for (k, hw) in hats.iter().enumerate() {
                let c = c_min + (c_max - c_min) * k as f64 / (samples - 1) as f64;
                let exact = principal_symbol(Complex64::new(c, 0.0), a, omega, xs)?;
                let interp: Complex64 = hw.iter().map(|(i, w)| w * node_vals[i]).sum();
                worst = worst.max((exact - interp).norm());
            }
            Ok(worst)
        })
        .try_reduce(|| 0.0f64, |a, b| Ok(a.max(b)))?;
    Ok(sup)
}
