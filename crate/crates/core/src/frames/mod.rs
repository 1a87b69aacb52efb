//! Band-limited frames built from Littlewood–Paley pieces sampled on nets.
//!
//! Every element is stored exactly as a block of eigen-coefficients
//! `[lo, hi)`, one row per center, so analysis and synthesis are dense
//! matrix products.

mod io;

pub use io::{load_frame, read_frame, save_frame, write_frame, FORMAT_TAG, FORMAT_VERSION};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cutoff::{make_systems, Cutoff, CutoffKind, GammaSystem, LpSystem};
use crate::error::{Error, Result};
use crate::family::random_band_limited;
use crate::grid::SpectralGrid;
use crate::model::{ModelKind, SpectralModel};
use crate::nets::{cubature_weights, maximal_net, sampling_bounds, select_gamma, NetLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameVariant {
    Frame1,
    Dual,
    Tight,
}

impl std::str::FromStr for FrameVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frame1" => Ok(Self::Frame1),
            "dual" => Ok(Self::Dual),
            "tight" => Ok(Self::Tight),
            other => Err(Error::Parameter(format!("unknown frame variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaChoice {
    Fixed(f64),
    /// Shrink `γ` from the given start until the sampling tolerance holds.
    Auto { start: f64, tolerance: f64 },
}

impl GammaChoice {
    pub const DEFAULT_AUTO: GammaChoice = GammaChoice::Auto {
        start: 1.0,
        tolerance: 0.1,
    };
}

/// Dual elements of one level, with the operator data used to build them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualLevel {
    pub lo: usize,
    pub hi: usize,
    #[serde(with = "io::matrix")]
    pub coeffs: DMatrix<f64>,
    /// `‖R‖₂→₂`.
    pub r_norm: f64,
    /// Sampling tolerance measured on the Γ band.
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameLevel {
    pub j: usize,
    pub net: NetLevel,
    pub lo: usize,
    pub hi: usize,
    /// Row `k` holds the coefficients of `ψ_ξ` for the `k`-th center on `[lo, hi)`.
    #[serde(with = "io::matrix")]
    pub primal: DMatrix<f64>,
    pub dual: Option<DualLevel>,
}

impl FrameLevel {
    pub fn len(&self) -> usize {
        self.net.len()
    }

    pub fn is_empty(&self) -> bool {
        self.net.is_empty()
    }

    fn analysis_block(&self, dual: bool) -> (usize, &DMatrix<f64>) {
        match (&self.dual, dual) {
            (Some(d), true) => (d.lo, &d.coeffs),
            _ => (self.lo, &self.primal),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSystem {
    pub variant: FrameVariant,
    pub model: ModelKind,
    pub truncation: usize,
    pub resolution: usize,
    pub b: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub levels: Vec<FrameLevel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    AnalysisPrimal,
    AnalysisDual,
    Synthetic,
}

/// Frame coefficients grouped by level, in center order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub provenance: Provenance,
    pub levels: Vec<Vec<f64>>,
}

impl CoefficientSet {
    pub fn len(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.levels.iter().flatten().copied()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            provenance: self.provenance,
            levels: self.levels.iter().map(|l| l.iter().map(|v| v * s).collect()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower_hat: f64,
    pub upper_hat: f64,
    pub dual_lower_hat: f64,
    pub dual_upper_hat: f64,
    pub trials: usize,
}

fn check_truncation(grid: &SpectralGrid, needed: f64) -> Result<()> {
    let top = *grid.frequencies().last().unwrap();
    if needed > top * (1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "truncation holds frequencies up to {top:.3}, the frame needs {needed:.3}; raise N"
        )));
    }
    Ok(())
}

fn seed_point(model: &SpectralModel) -> f64 {
    model.point_at(0.0)
}

/// Trimmed mode range where `m` is nonzero inside `[lo_band, hi_band]`.
fn active_range<F: Fn(f64) -> f64>(grid: &SpectralGrid, band: (f64, f64), m: F) -> (usize, usize) {
    let (lo, hi) = grid.band_range(band.0, band.1);
    let f = grid.frequencies();
    let mut a = lo;
    while a < hi && m(f[a]) == 0.0 {
        a += 1;
    }
    let mut z = hi;
    while z > a && m(f[z - 1]) == 0.0 {
        z -= 1;
    }
    (a, z)
}

/// `scale_ξ · m(√λ_n) e_n(ξ)` for `n ∈ [lo, hi)`.
fn kernel_columns<F: Fn(f64) -> f64>(
    grid: &SpectralGrid,
    net: &NetLevel,
    scales: &[f64],
    range: (usize, usize),
    m: F,
) -> DMatrix<f64> {
    let (lo, hi) = range;
    let basis = grid.basis();
    let f = grid.frequencies();
    let mult: Vec<f64> = (lo..hi).map(|n| m(f[n])).collect();
    DMatrix::from_fn(net.len(), hi - lo, |k, i| {
        scales[k] * mult[i] * basis[(net.centers[k], lo + i)]
    })
}

impl FrameSystem {
    /// Rebuilds the grid the frame was constructed on.
    pub fn grid(&self) -> Result<SpectralGrid> {
        SpectralGrid::new(SpectralModel::new(self.model, self.truncation)?, self.resolution)
    }

    pub fn profile(&self) -> Cutoff {
        Cutoff {
            kind: CutoffKind::TypeA,
            b: self.b,
            epsilon: self.epsilon,
        }
    }

    /// Highest level index `J`.
    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    /// Frequency `b^J` below which the frame reproduces functions.
    pub fn band(&self) -> f64 {
        self.b.powi(self.max_level() as i32)
    }

    pub fn len(&self) -> usize {
        self.levels.iter().map(FrameLevel::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn has_dual(&self) -> bool {
        self.variant == FrameVariant::Tight || self.levels.iter().all(|l| l.dual.is_some())
    }

    fn analyze_with(&self, coeffs: &DVector<f64>, dual: bool, provenance: Provenance) -> CoefficientSet {
        let levels = self
            .levels
            .iter()
            .map(|l| {
                let (lo, m) = l.analysis_block(dual);
                let width = m.ncols();
                let v = m * coeffs.rows(lo, width);
                v.as_slice().to_vec()
            })
            .collect();
        CoefficientSet { provenance, levels }
    }

    /// `{⟨f, ψ_ξ⟩}` from eigen-coefficients of `f`.
    pub fn analyze_primal(&self, coeffs: &DVector<f64>) -> CoefficientSet {
        self.analyze_with(coeffs, false, Provenance::AnalysisPrimal)
    }

    /// `{⟨f, ψ̃_ξ⟩}`; equal to the primal analysis for tight frames.
    pub fn analyze_dual(&self, coeffs: &DVector<f64>) -> Result<CoefficientSet> {
        if !self.has_dual() {
            return Err(Error::Config("frame has no dual; build it first".into()));
        }
        Ok(self.analyze_with(coeffs, true, Provenance::AnalysisDual))
    }

    /// Analysis of grid values, with inner products taken by quadrature.
    pub fn analyze_values(&self, grid: &SpectralGrid, values: &DVector<f64>, dual: bool) -> Result<CoefficientSet> {
        let c = grid.analyze(values);
        if dual {
            self.analyze_dual(&c)
        } else {
            Ok(self.analyze_primal(&c))
        }
    }

    fn check_shape(&self, a: &CoefficientSet) -> Result<()> {
        if a.levels.len() != self.levels.len()
            || a.levels.iter().zip(&self.levels).any(|(c, l)| c.len() != l.len())
        {
            return Err(Error::IndexMismatch);
        }
        Ok(())
    }

    /// `Σ a_ξ ψ_ξ` as eigen-coefficients.
    pub fn synthesize(&self, a: &CoefficientSet) -> Result<DVector<f64>> {
        self.check_shape(a)?;
        let mut out = DVector::zeros(self.truncation + 1);
        for (l, c) in self.levels.iter().zip(&a.levels) {
            let v = l.primal.tr_mul(&DVector::from_column_slice(c));
            let mut dst = out.rows_mut(l.lo, l.hi - l.lo);
            dst += v;
        }
        Ok(out)
    }

    /// Eigen-coefficients of a single primal element.
    pub fn element_coeffs(&self, level: usize, k: usize) -> DVector<f64> {
        let l = &self.levels[level];
        let mut out = DVector::zeros(self.truncation + 1);
        out.rows_mut(l.lo, l.hi - l.lo).copy_from(&l.primal.row(k).transpose());
        out
    }

    /// Eigen-coefficients of a single dual element.
    pub fn dual_coeffs(&self, level: usize, k: usize) -> Result<DVector<f64>> {
        let l = &self.levels[level];
        let (lo, m) = match (&l.dual, self.variant) {
            (Some(d), _) => (d.lo, &d.coeffs),
            (None, FrameVariant::Tight) => (l.lo, &l.primal),
            _ => return Err(Error::Config("frame has no dual".into())),
        };
        let mut out = DVector::zeros(self.truncation + 1);
        out.rows_mut(lo, m.ncols()).copy_from(&m.row(k).transpose());
        Ok(out)
    }

    /// Grid values of every primal element of a level, one column per center.
    pub fn level_values(&self, grid: &SpectralGrid, level: usize) -> DMatrix<f64> {
        let l = &self.levels[level];
        grid.basis().columns(l.lo, l.hi - l.lo) * l.primal.transpose()
    }

    /// `‖ψ_ξ‖_p` for every element, level by level.
    pub fn element_norms(&self, grid: &SpectralGrid, p: f64) -> Vec<Vec<f64>> {
        (0..self.levels.len())
            .map(|j| {
                let v = self.level_values(grid, j);
                v.column_iter()
                    .map(|c| crate::grid::lp_norm(grid.weights(), c.as_slice(), p))
                    .collect()
            })
            .collect()
    }

    /// Center points and cell measures flattened in coefficient order.
    pub fn index(&self) -> Vec<(usize, f64, f64)> {
        self.levels
            .iter()
            .flat_map(|l| {
                l.net
                    .points
                    .iter()
                    .zip(&l.net.cell_measures)
                    .map(move |(&p, &m)| (l.j, p, m))
            })
            .collect()
    }
}

/// Frame #1: nets at `δ_j = γ b^{-j-2}` and `ψ_ξ = |A_ξ|^{1/2} Ψ_j(√L)(·, ξ)`
/// with the additive Littlewood–Paley system.
pub fn build_frame1(
    grid: &SpectralGrid,
    phi: &Cutoff,
    b: f64,
    levels: usize,
    gamma: GammaChoice,
) -> Result<FrameSystem> {
    let systems = make_systems(phi, b, levels)?;
    check_truncation(grid, b.powi(levels as i32 + 1))?;
    let seed = seed_point(grid.model());
    let delta_of = |g: f64, j: usize| g * b.powi(-(j as i32) - 2);
    let bands: Vec<f64> = (0..=levels).map(|j| b.powi(j as i32 + 2)).collect();
    let (gamma, nets) = match gamma {
        GammaChoice::Fixed(g) => {
            let nets = (0..=levels)
                .map(|j| maximal_net(grid, delta_of(g, j), seed))
                .collect::<Result<Vec<_>>>()?;
            (g, nets)
        }
        GammaChoice::Auto { start, tolerance } => {
            let sel = select_gamma(grid, &bands, delta_of, start, tolerance, seed)?;
            (sel.gamma, sel.nets)
        }
    };
    let lp = systems.additive;
    let levels = nets
        .into_iter()
        .enumerate()
        .map(|(j, net)| level_from_net(grid, &lp, j, net, |n| n.cell_measures.iter().map(|m| m.sqrt()).collect()))
        .collect();
    Ok(FrameSystem {
        variant: FrameVariant::Frame1,
        model: grid.model().kind(),
        truncation: grid.model().truncation(),
        resolution: grid.len(),
        b,
        epsilon: phi.epsilon,
        gamma,
        levels,
    })
}

fn level_from_net<S: Fn(&NetLevel) -> Vec<f64>>(
    grid: &SpectralGrid,
    lp: &LpSystem,
    j: usize,
    net: NetLevel,
    scales: S,
) -> FrameLevel {
    let m = |u: f64| lp.eval(j, u);
    let range = active_range(grid, lp.band(j), m);
    let primal = kernel_columns(grid, &net, &scales(&net), range, m);
    FrameLevel {
        j,
        net,
        lo: range.0,
        hi: range.1,
        primal,
        dual: None,
    }
}

/// Adds the dual elements `ψ̃_ξ = c_ε |A_ξ|^{1/2} T[Γ(·, ξ)]` with
/// `T = (Id - R)^{-1}` computed directly on the Γ band.
pub fn build_dual(grid: &SpectralGrid, frame: &FrameSystem) -> Result<FrameSystem> {
    if frame.variant == FrameVariant::Tight {
        return Ok(frame.clone());
    }
    let gamma_sys = GammaSystem::new(frame.profile());
    let mut out = frame.clone();
    out.variant = FrameVariant::Dual;
    for level in &mut out.levels {
        level.dual = Some(dual_level(grid, &gamma_sys, frame.b, level)?);
    }
    Ok(out)
}

/// Operator data for one level, exposed for verification.
#[derive(Debug, Clone)]
pub struct DualOperator {
    pub lo: usize,
    pub hi: usize,
    /// `Γ(√λ_n)` on `[lo, hi)`.
    pub gamma: Vec<f64>,
    pub r: DMatrix<f64>,
    pub t: DMatrix<f64>,
    pub epsilon: f64,
    pub r_norm: f64,
}

pub fn dual_operator(grid: &SpectralGrid, gamma_sys: &GammaSystem, b: f64, level: &FrameLevel) -> Result<DualOperator> {
    let j = level.j;
    let gm = |u: f64| gamma_sys.for_level(j, u);
    let (lo, hi) = active_range(grid, gamma_sys.band(j), gm);
    let width = hi - lo;
    let f = grid.frequencies();
    let g: Vec<f64> = (lo..hi).map(|n| gm(f[n])).collect();
    let (smin, smax) = sampling_bounds(grid, &level.net, b.powi(j as i32 + 2));
    let epsilon = (1.0 - smin).max(smax - 1.0).max(0.0);
    let scale = 1.0 / (1.0 + epsilon);
    let basis = grid.basis();
    let e = DMatrix::from_fn(level.len(), width, |k, i| basis[(level.net.centers[k], lo + i)]);
    let mut we = e.clone();
    for (mut row, m) in we.row_iter_mut().zip(&level.net.cell_measures) {
        row *= *m * scale;
    }
    let v = e.tr_mul(&we);
    let r = DMatrix::from_fn(width, width, |a, c| {
        let id = if a == c { 1.0 } else { 0.0 };
        g[a] * (id - v[(a, c)]) * g[c]
    });
    let r_norm = SymmetricEigen::new(r.clone())
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    if r_norm >= 0.5 {
        return Err(Error::DualConstruction { level: j, r_norm });
    }
    let t = (DMatrix::identity(width, width) - &r)
        .try_inverse()
        .ok_or(Error::DualConstruction { level: j, r_norm })?;
    Ok(DualOperator {
        lo,
        hi,
        gamma: g,
        r,
        t,
        epsilon,
        r_norm,
    })
}

fn dual_level(grid: &SpectralGrid, gamma_sys: &GammaSystem, b: f64, level: &FrameLevel) -> Result<DualLevel> {
    let op = dual_operator(grid, gamma_sys, b, level)?;
    let scale = 1.0 / (1.0 + op.epsilon);
    let basis = grid.basis();
    let width = op.hi - op.lo;
    // Row k: c_ε |A_ξ|^{1/2} (g ∘ e(ξ)), then apply the symmetric T on the right.
    let cols = DMatrix::from_fn(level.len(), width, |k, i| {
        scale * level.net.cell_measures[k].sqrt() * op.gamma[i] * basis[(level.net.centers[k], op.lo + i)]
    });
    let coeffs = cols * &op.t;
    Ok(DualLevel {
        lo: op.lo,
        hi: op.hi,
        coeffs,
        r_norm: op.r_norm,
        epsilon: op.epsilon,
    })
}

/// Tight frame: nets at `δ_j = γ a^{-1} b^{-j-1}`, cubature exact on
/// `Σ_{a b^{j+1}}`, and `ψ_ξ = √w_ξ Ψ_j(√L)(·, ξ)` from the squared system.
pub fn build_tight(
    grid: &SpectralGrid,
    phi: &Cutoff,
    b: f64,
    levels: usize,
    gamma: GammaChoice,
) -> Result<FrameSystem> {
    let systems = make_systems(phi, b, levels)?;
    let a = grid.model().polynomial_factor();
    check_truncation(grid, a * b.powi(levels as i32 + 1))?;
    let seed = seed_point(grid.model());
    let delta_of = |g: f64, j: usize| g / (a * b.powi(j as i32 + 1));
    let bands: Vec<f64> = (0..=levels).map(|j| a * b.powi(j as i32 + 1)).collect();
    let build_at = |g: f64| -> Result<Vec<NetLevel>> {
        (0..=levels)
            .map(|j| {
                let mut net = maximal_net(grid, delta_of(g, j), seed)?;
                cubature_weights(grid, &mut net, bands[j])?;
                Ok(net)
            })
            .collect()
    };
    let (gamma, nets) = match gamma {
        GammaChoice::Fixed(g) => (g, build_at(g)?),
        GammaChoice::Auto { start, tolerance } => {
            let mut g = select_gamma(grid, &bands, delta_of, start, tolerance, seed)?.gamma;
            loop {
                match build_at(g) {
                    Ok(nets) => break (g, nets),
                    Err(Error::Cubature { .. }) | Err(Error::Construction(_)) if g > 1e-3 => g *= 0.85,
                    Err(e) => return Err(e),
                }
            }
        }
    };
    let lp = systems.squared;
    let levels = nets
        .into_iter()
        .enumerate()
        .map(|(j, net)| {
            level_from_net(grid, &lp, j, net, |n| {
                n.weights.as_ref().expect("cubature weights").iter().map(|w| w.sqrt()).collect()
            })
        })
        .collect();
    Ok(FrameSystem {
        variant: FrameVariant::Tight,
        model: grid.model().kind(),
        truncation: grid.model().truncation(),
        resolution: grid.len(),
        b,
        epsilon: phi.epsilon,
        gamma,
        levels,
    })
}

/// Ranges of `Σ|⟨f, ψ_ξ⟩|² / ‖f‖₂²` (and its dual analogue) over random
/// `f ∈ Σ_{b^J}`.
pub fn frame_bounds(frame: &FrameSystem, trials: usize, seed: u64) -> Result<FrameBounds> {
    let grid_dim = frame.truncation + 1;
    let freqs = SpectralModel::new(frame.model, frame.truncation)?.frequencies();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lo, mut hi) = (f64::MAX, f64::MIN);
    let (mut dlo, mut dhi) = (f64::MAX, f64::MIN);
    for _ in 0..trials.max(1) {
        let f = random_band_limited(&freqs, frame.band(), &mut rng);
        debug_assert_eq!(f.len(), grid_dim);
        let n2 = f.norm_squared();
        let e: f64 = frame.analyze_primal(&f).iter().map(|a| a * a).sum::<f64>() / n2;
        lo = lo.min(e);
        hi = hi.max(e);
        if frame.has_dual() {
            let d: f64 = frame.analyze_dual(&f)?.iter().map(|a| a * a).sum::<f64>() / n2;
            dlo = dlo.min(d);
            dhi = dhi.max(d);
        }
    }
    if !frame.has_dual() {
        dlo = f64::NAN;
        dhi = f64::NAN;
    }
    Ok(FrameBounds {
        lower_hat: lo,
        upper_hat: hi,
        dual_lower_hat: dlo,
        dual_upper_hat: dhi,
        trials: trials.max(1),
    })
}
