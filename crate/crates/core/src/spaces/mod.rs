//! Besov, Triebel–Lizorkin and Sobolev norms of band-limited functions.
//!
//! Each norm has several routes: Littlewood–Paley blocks at base 2, blocks
//! from the frame's own profile at base `b`, the heat semigroup, and frame
//! coefficient sequences. Functions are eigen-coefficient vectors; all
//! `L^p` norms are taken by quadrature on the grid.

mod maximal;

pub use maximal::{maximal_function, multiplier_ratio, peetre_constant};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::cutoff::{Cutoff, CutoffKind, LpSystem};
use crate::error::{Error, Result};
use crate::frames::{CoefficientSet, FrameSystem};
use crate::grid::{last_nonzero, SpectralGrid};
use crate::quadrature::gauss_legendre_interval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// `B^s_{pq}`, `F^s_{pq}`: dyadic weights `2^{sj}`.
    Classical,
    /// `B̃^s_{pq}`, `F̃^s_{pq}`: local ball weights `|B(·, 2^{-j})|^{-s/d}`.
    Tilde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    LpDecomp,
    PhiVariant,
    Heat,
    Sequence,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lp" | "lp_decomp" => Ok(Self::LpDecomp),
            "phi" | "phi_variant" => Ok(Self::PhiVariant),
            "heat" => Ok(Self::Heat),
            "seq" | "sequence" | "frame_coeff" => Ok(Self::Sequence),
            other => Err(Error::Parameter(format!("unknown norm method {other:?}"))),
        }
    }
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Self::LpDecomp => "lp_decomp",
            Self::PhiVariant => "phi_variant",
            Self::Heat => "heat",
            Self::Sequence => "sequence",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub flavor: Flavor,
}

impl SpaceParams {
    pub fn new(s: f64, p: f64, q: f64) -> Self {
        Self {
            s,
            p,
            q,
            flavor: Flavor::Classical,
        }
    }

    pub fn tilde(s: f64, p: f64, q: f64) -> Self {
        Self {
            s,
            p,
            q,
            flavor: Flavor::Tilde,
        }
    }

    fn check_besov(&self) -> Result<()> {
        if !(self.p > 0.0) || !(self.q > 0.0) || self.s.is_nan() {
            return Err(Error::Parameter(format!(
                "need 0 < p, q <= inf (p = {}, q = {})",
                self.p, self.q
            )));
        }
        Ok(())
    }

    fn check_tl(&self) -> Result<()> {
        self.check_besov()?;
        if self.p.is_infinite() {
            return Err(Error::Parameter("Triebel-Lizorkin norms need p < inf".into()));
        }
        Ok(())
    }

    /// Smallest nonnegative integer `m > s`.
    pub fn heat_order(&self) -> u32 {
        if self.s < 0.0 {
            0
        } else {
            (self.s.floor() + 1.0) as u32
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    pub method: Method,
    /// Number of blocks (levels, or `t` nodes for the heat route).
    pub terms: usize,
}

/// Everything a norm computation may need besides the function.
#[derive(Debug, Clone, Copy)]
pub struct NormContext<'a> {
    pub grid: &'a SpectralGrid,
    pub frame: Option<&'a FrameSystem>,
    /// Profile for the base-`b` route.
    pub phi: Cutoff,
    /// Homogeneous dimension used in the ball weights.
    pub d: f64,
}

/// The fixed base-2 profile behind the classical decomposition.
pub fn reference_profile() -> Cutoff {
    Cutoff {
        kind: CutoffKind::TypeA,
        b: 2.0,
        epsilon: 1.0,
    }
}

impl<'a> NormContext<'a> {
    pub fn new(grid: &'a SpectralGrid) -> Self {
        Self {
            grid,
            frame: None,
            phi: Cutoff {
                kind: CutoffKind::TypeA,
                b: 2.0,
                epsilon: 0.5,
            },
            d: grid.model().dim_d(),
        }
    }

    pub fn with_frame(grid: &'a SpectralGrid, frame: &'a FrameSystem) -> Self {
        Self {
            grid,
            frame: Some(frame),
            phi: frame.profile(),
            d: grid.model().dim_d(),
        }
    }

    fn frame(&self) -> Result<&'a FrameSystem> {
        self.frame
            .ok_or_else(|| Error::Config("the sequence route needs a frame".into()))
    }
}

fn lq(values: impl Iterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        values.fold(0.0, |m, v| m.max(v.abs()))
    } else {
        values.map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Littlewood–Paley blocks `Ψ_j(√L) f` as grid values with their base.
fn lp_blocks(ctx: &NormContext, f: &DVector<f64>, lp: &LpSystem) -> Vec<DVector<f64>> {
    let top = match last_nonzero(f.as_slice()) {
        0 => return Vec::new(),
        k => ctx.grid.frequencies()[k - 1],
    };
    let mut out = Vec::new();
    let mut j = 0;
    while lp.band(j).0 <= top {
        out.push(ctx.grid.synthesize(&ctx.grid.apply_multiplier(f, |u| lp.eval(j, u))));
        j += 1;
    }
    out
}

fn block_system(ctx: &NormContext, method: Method) -> LpSystem {
    match method {
        Method::PhiVariant => LpSystem::additive(ctx.phi),
        _ => LpSystem::additive(reference_profile()),
    }
}

/// Per-node weight of block `j`: `base^{sj}` or `|B(x, base^{-j})|^{-s/d}`.
fn block_weight(ctx: &NormContext, params: &SpaceParams, base: f64, j: usize) -> DVector<f64> {
    match params.flavor {
        Flavor::Classical => DVector::from_element(ctx.grid.len(), base.powf(params.s * j as f64)),
        Flavor::Tilde => ctx
            .grid
            .ball_measures(base.powi(-(j as i32)))
            .map(|m| m.powf(-params.s / ctx.d)),
    }
}

/// Nodes and weights of `∫_0^1 · dt/t` over dyadic blocks `[4^{-ν-1}, 4^{-ν}]`.
fn heat_nodes(ctx: &NormContext) -> Result<Vec<(f64, f64)>> {
    let lmax = ctx.grid.model().eigenvalues().last().copied().unwrap_or(1.0).max(1.0);
    let v = (lmax.ln() / 4f64.ln()).ceil().max(1.0) as i32;
    let mut out = Vec::new();
    for nu in 0..v {
        let hi = -(nu as f64) * 4f64.ln();
        let lo = hi - 4f64.ln();
        let rule = gauss_legendre_interval(8, lo, hi)?;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            out.push((x.exp(), *w));
        }
    }
    Ok(out)
}

/// `(tL)^{m/2} e^{-tL} f` on the grid.
fn heat_block(ctx: &NormContext, f: &DVector<f64>, t: f64, m: u32) -> DVector<f64> {
    let half = m as f64 / 2.0;
    ctx.grid.synthesize(&ctx.grid.apply_multiplier(f, |u| {
        let tl = t * u * u;
        if m == 0 {
            (-tl).exp()
        } else {
            tl.powf(half) * (-tl).exp()
        }
    }))
}

fn heat_weight(ctx: &NormContext, params: &SpaceParams, t: f64) -> DVector<f64> {
    match params.flavor {
        Flavor::Classical => DVector::from_element(ctx.grid.len(), t.powf(-params.s / 2.0)),
        Flavor::Tilde => ctx.grid.ball_measures(t.sqrt()).map(|m| m.powf(-params.s / ctx.d)),
    }
}

fn heat_base_term(ctx: &NormContext, f: &DVector<f64>, params: &SpaceParams) -> f64 {
    let mut base = heat_block(ctx, f, 1.0, 0);
    if params.flavor == Flavor::Tilde {
        base.component_mul_assign(&heat_weight(ctx, params, 1.0));
    }
    ctx.grid.lp_norm(&base, params.p)
}

pub fn besov_norm(ctx: &NormContext, f: &DVector<f64>, params: &SpaceParams, method: Method) -> Result<NormReport> {
    params.check_besov()?;
    let (value, terms) = match method {
        Method::LpDecomp | Method::PhiVariant => {
            let lp = block_system(ctx, method);
            let blocks = lp_blocks(ctx, f, &lp);
            let norms: Vec<f64> = blocks
                .iter()
                .enumerate()
                .map(|(j, v)| ctx.grid.lp_norm(&v.component_mul(&block_weight(ctx, params, lp.b(), j)), params.p))
                .collect();
            (lq(norms.into_iter(), params.q), blocks.len())
        }
        Method::Heat => {
            let nodes = heat_nodes(ctx)?;
            let m = params.heat_order();
            let terms: Vec<(f64, f64)> = nodes
                .iter()
                .map(|&(t, w)| {
                    let v = heat_block(ctx, f, t, m).component_mul(&heat_weight(ctx, params, t));
                    (ctx.grid.lp_norm(&v, params.p), w)
                })
                .collect();
            let integral = if params.q.is_infinite() {
                terms.iter().fold(0.0f64, |a, (v, _)| a.max(*v))
            } else {
                terms.iter().map(|(v, w)| w * v.powf(params.q)).sum::<f64>().powf(1.0 / params.q)
            };
            (heat_base_term(ctx, f, params) + integral, nodes.len())
        }
        Method::Sequence => {
            let frame = ctx.frame()?;
            let a = frame.analyze_dual(f)?;
            (besov_sequence_norm(ctx, frame, &a, params)?, frame.levels.len())
        }
    };
    Ok(NormReport { value, method, terms })
}

/// Sequence norm of frame coefficients: the `b^s_{pq}` form with weights
/// `b^{js} |B(ξ, b^{-j})|^{1/p - 1/2}`, or the `b̃^s_{pq}` form with
/// `|B(ξ, b^{-j})|^{-s/d + 1/p - 1/2}`.
pub fn besov_sequence_norm(
    ctx: &NormContext,
    frame: &FrameSystem,
    a: &CoefficientSet,
    params: &SpaceParams,
) -> Result<f64> {
    params.check_besov()?;
    if a.levels.len() != frame.levels.len() {
        return Err(Error::IndexMismatch);
    }
    let model = ctx.grid.model();
    let inv_p = if params.p.is_infinite() { 0.0 } else { 1.0 / params.p };
    let per_level: Vec<f64> = frame
        .levels
        .iter()
        .zip(&a.levels)
        .map(|(l, c)| {
            let r = frame.b.powi(-(l.j as i32));
            let terms = l.net.points.iter().zip(c).map(|(&x, v)| {
                let ball = model.ball_measure(x, r);
                let w = match params.flavor {
                    Flavor::Classical => ball.powf(inv_p - 0.5),
                    Flavor::Tilde => ball.powf(-params.s / ctx.d + inv_p - 0.5),
                };
                w * v.abs()
            });
            let inner = lq(terms, params.p);
            match params.flavor {
                Flavor::Classical => frame.b.powf(params.s * l.j as f64) * inner,
                Flavor::Tilde => inner,
            }
        })
        .collect();
    Ok(lq(per_level.into_iter(), params.q))
}

/// `‖(Σ_j |w_j g_j|^q)^{1/q}‖_p` for grid blocks.
fn pointwise_lq(ctx: &NormContext, blocks: &[DVector<f64>], p: f64, q: f64) -> f64 {
    let n = ctx.grid.len();
    let mut acc = DVector::zeros(n);
    for b in blocks {
        for i in 0..n {
            let v = b[i].abs();
            if q.is_infinite() {
                acc[i] = f64::max(acc[i], v);
            } else {
                acc[i] += v.powf(q);
            }
        }
    }
    if !q.is_infinite() {
        acc.apply(|v| *v = v.powf(1.0 / q));
    }
    ctx.grid.lp_norm(&acc, p)
}

pub fn tl_norm(ctx: &NormContext, f: &DVector<f64>, params: &SpaceParams, method: Method) -> Result<NormReport> {
    params.check_tl()?;
    let (value, terms) = match method {
        Method::LpDecomp | Method::PhiVariant => {
            let lp = block_system(ctx, method);
            let blocks: Vec<DVector<f64>> = lp_blocks(ctx, f, &lp)
                .into_iter()
                .enumerate()
                .map(|(j, v)| v.component_mul(&block_weight(ctx, params, lp.b(), j)))
                .collect();
            (pointwise_lq(ctx, &blocks, params.p, params.q), blocks.len())
        }
        Method::Heat => {
            let nodes = heat_nodes(ctx)?;
            let m = params.heat_order();
            // Quadrature weights of dt/t fold into the q-th powers.
            let blocks: Vec<DVector<f64>> = nodes
                .iter()
                .map(|&(t, w)| {
                    let scale = if params.q.is_infinite() { 1.0 } else { w.powf(1.0 / params.q) };
                    heat_block(ctx, f, t, m).component_mul(&heat_weight(ctx, params, t)) * scale
                })
                .collect();
            (
                heat_base_term(ctx, f, params) + pointwise_lq(ctx, &blocks, params.p, params.q),
                nodes.len(),
            )
        }
        Method::Sequence => {
            let frame = ctx.frame()?;
            let a = frame.analyze_dual(f)?;
            (tl_sequence_norm(ctx, frame, &a, params)?, frame.levels.len())
        }
    };
    Ok(NormReport { value, method, terms })
}

/// Sequence norm with normalized cell indicators `|A_ξ|^{-1/2} 1_{A_ξ}`,
/// weighted by `b^{js}` (classical) or `|A_ξ|^{-s/d}` (tilde).
pub fn tl_sequence_norm(
    ctx: &NormContext,
    frame: &FrameSystem,
    a: &CoefficientSet,
    params: &SpaceParams,
) -> Result<f64> {
    params.check_tl()?;
    if a.levels.len() != frame.levels.len() {
        return Err(Error::IndexMismatch);
    }
    let blocks: Vec<DVector<f64>> = frame
        .levels
        .iter()
        .zip(&a.levels)
        .map(|(l, c)| {
            let lw = frame.b.powf(params.s * l.j as f64);
            let per_cell: Vec<f64> = c
                .iter()
                .zip(&l.net.cell_measures)
                .map(|(v, m)| {
                    let w = match params.flavor {
                        Flavor::Classical => lw,
                        Flavor::Tilde => m.powf(-params.s / ctx.d),
                    };
                    w * v.abs() / m.sqrt()
                })
                .collect();
            DVector::from_iterator(l.net.assignment.len(), l.net.assignment.iter().map(|&k| per_cell[k]))
        })
        .collect();
    Ok(pointwise_lq(ctx, &blocks, params.p, params.q))
}

/// `‖(Id + L)^{s/2} f‖_p`.
pub fn sobolev_norm(grid: &SpectralGrid, f: &DVector<f64>, s: f64, p: f64) -> f64 {
    let g = grid.apply_multiplier(f, |u| (1.0 + u * u).powf(s / 2.0));
    grid.lp_norm(&grid.synthesize(&g), p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pair {
    LpVsHeat,
    LpVsSeq,
    LpVsPhi,
    Fp2VsHsp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Besov,
    TriebelLizorkin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub ratios: Vec<f64>,
}

impl EquivalenceReport {
    pub fn spread(&self) -> f64 {
        self.max_ratio / self.min_ratio
    }
}

/// Ratios `first(f) / second(f)` over a family of functions.
pub fn ratio_report<A, B>(family: &[DVector<f64>], first: A, second: B) -> Result<EquivalenceReport>
where
    A: Fn(&DVector<f64>) -> Result<f64>,
    B: Fn(&DVector<f64>) -> Result<f64>,
{
    if family.is_empty() {
        return Err(Error::Degenerate("empty family".into()));
    }
    let mut ratios = Vec::with_capacity(family.len());
    for f in family {
        let (x, y) = (first(f)?, second(f)?);
        if x <= 0.0 || y <= 0.0 {
            return Err(Error::Degenerate("zero norm in family".into()));
        }
        ratios.push(x / y);
    }
    Ok(EquivalenceReport {
        min_ratio: ratios.iter().cloned().fold(f64::MAX, f64::min),
        max_ratio: ratios.iter().cloned().fold(f64::MIN, f64::max),
        ratios,
    })
}

/// Empirical equivalence of two norm routes on a family.
pub fn equivalence_report(
    ctx: &NormContext,
    family: &[DVector<f64>],
    params: &SpaceParams,
    space: SpaceKind,
    pair: Pair,
) -> Result<EquivalenceReport> {
    let norm = |f: &DVector<f64>, m: Method| match space {
        SpaceKind::Besov => besov_norm(ctx, f, params, m).map(|r| r.value),
        SpaceKind::TriebelLizorkin => tl_norm(ctx, f, params, m).map(|r| r.value),
    };
    match pair {
        Pair::LpVsHeat => ratio_report(family, |f| norm(f, Method::LpDecomp), |f| norm(f, Method::Heat)),
        Pair::LpVsSeq => ratio_report(family, |f| norm(f, Method::LpDecomp), |f| norm(f, Method::Sequence)),
        Pair::LpVsPhi => ratio_report(family, |f| norm(f, Method::LpDecomp), |f| norm(f, Method::PhiVariant)),
        Pair::Fp2VsHsp => {
            let tl = SpaceParams { q: 2.0, ..*params };
            ratio_report(
                family,
                |f| tl_norm(ctx, f, &tl, Method::LpDecomp).map(|r| r.value),
                |f| Ok(sobolev_norm(ctx.grid, f, params.s, params.p)),
            )
        }
    }
}

/// Largest `‖f + g‖ / (‖f‖ + ‖g‖)` over consecutive pairs of the family.
pub fn quasi_triangle_constant<N>(family: &[DVector<f64>], norm: N) -> Result<f64>
where
    N: Fn(&DVector<f64>) -> Result<f64>,
{
    let mut worst: f64 = 0.0;
    for pair in family.windows(2) {
        let sum = &pair[0] + &pair[1];
        let denom = norm(&pair[0])? + norm(&pair[1])?;
        if denom > 0.0 {
            worst = worst.max(norm(&sum)? / denom);
        }
    }
    Ok(worst)
}
