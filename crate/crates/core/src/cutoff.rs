//! Smooth cut-off functions and the Littlewood–Paley systems built from them.
//!
//! The transition uses the bridge `g(t) = exp(-t^{-1/ε})`, which is of Gevrey
//! class `1 + ε`, normalized into the monotone step `g(t) / (g(t) + g(1 - t))`.
//! That step is evaluated as a logistic of `(1 - t)^{-1/ε} - t^{-1/ε}` so it
//! never over- or underflows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutoffKind {
    /// `1` on `[0, 1]`, vanishing beyond `b`.
    TypeA,
    /// `Φ(u) - Φ(bu)`, supported on `[1/b, b]`.
    TypeB,
    /// `√(Φ(u) - Φ(bu))`: squares of its dilates sum to one.
    TypeC,
}

/// Default number of derivatives exposed by [`Cutoff::derivatives`].
pub const DEFAULT_K_MAX: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub kind: CutoffKind,
    pub b: f64,
    pub epsilon: f64,
}

pub fn make_cutoff(kind: CutoffKind, b: f64, epsilon: f64) -> Result<Cutoff> {
    Cutoff::new(kind, b, epsilon)
}

impl Cutoff {
    pub fn new(kind: CutoffKind, b: f64, epsilon: f64) -> Result<Self> {
        if !(b > 1.0 && b.is_finite()) {
            return Err(Error::Parameter(format!("dilation base must exceed 1, got {b}")));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::Parameter(format!("epsilon must lie in (0, 1], got {epsilon}")));
        }
        Ok(Self { kind, b, epsilon })
    }

    pub fn support(&self) -> (f64, f64) {
        match self.kind {
            CutoffKind::TypeA => (0.0, self.b),
            CutoffKind::TypeB | CutoffKind::TypeC => (1.0 / self.b, self.b),
        }
    }

    /// The type (a) profile with the same base and smoothness.
    pub fn profile(&self) -> Cutoff {
        Cutoff {
            kind: CutoffKind::TypeA,
            ..*self
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self.kind {
            CutoffKind::TypeA => self.step(u),
            CutoffKind::TypeB => self.step(u) - self.step(self.b * u),
            CutoffKind::TypeC => (self.step(u) - self.step(self.b * u)).max(0.0).sqrt(),
        }
    }

    /// `Φ(u)` for the type (a) profile.
    fn step(&self, u: f64) -> f64 {
        let b = self.b;
        if u <= 1.0 {
            1.0
        } else if u >= b {
            0.0
        } else {
            let t = (b - u) / (b - 1.0);
            let a = 1.0 / self.epsilon;
            let v = (1.0 - t).powf(-a) - t.powf(-a);
            logistic(v)
        }
    }

    fn step_jet(&self, u: f64, order: usize) -> Jet {
        let b = self.b;
        if u <= 1.0 {
            return Jet::constant(1.0, order);
        }
        if u >= b {
            return Jet::constant(0.0, order);
        }
        let a = 1.0 / self.epsilon;
        let t = Jet::linear((b - u) / (b - 1.0), -1.0 / (b - 1.0), order);
        let one = Jet::constant(1.0, order);
        let v = &(&one - &t).powf(-a) - &t.powf(-a);
        v.logistic()
    }

    /// Taylor jet of the cut-off at `u`.
    pub fn jet(&self, u: f64, order: usize) -> Jet {
        match self.kind {
            CutoffKind::TypeA => self.step_jet(u, order),
            CutoffKind::TypeB => &self.step_jet(u, order) - &self.step_jet(self.b * u, order).dilate(self.b),
            CutoffKind::TypeC => {
                let r = &self.step_jet(u, order) - &self.step_jet(self.b * u, order).dilate(self.b);
                if r.value() <= 0.0 {
                    Jet::constant(0.0, order)
                } else {
                    r.powf(0.5)
                }
            }
        }
    }

    /// `φ^{(k)}(u)` for `k = 0..=order`.
    pub fn derivatives(&self, u: f64, order: usize) -> Vec<f64> {
        self.jet(u, order).derivatives()
    }
}

fn logistic(v: f64) -> f64 {
    if v <= 0.0 {
        let e = v.exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + (-v).exp())
    }
}

/// The printed growth bound `8 (16 ε^{-1} k^{1+ε})^k`; `1` at `k = 0`.
pub fn growth_bound(k: usize, epsilon: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let kf = k as f64;
    8.0 * (16.0 / epsilon * kf.powf(1.0 + epsilon)).powf(kf)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub k: usize,
    pub sup_norm: f64,
    pub bound: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub rows: Vec<GrowthRow>,
}

impl GrowthReport {
    pub fn violations(&self) -> Vec<usize> {
        self.rows.iter().filter(|r| !r.within).map(|r| r.k).collect()
    }
}

/// Measures `‖φ^{(k)}‖_∞` on a dense grid of the support for `k ≤ k_max`.
pub fn verify_growth(phi: &Cutoff, k_max: usize, epsilon: f64) -> GrowthReport {
    let (lo, hi) = phi.support();
    let lo = lo.max(match phi.kind {
        CutoffKind::TypeA => 1.0,
        _ => lo,
    });
    let samples = 4000;
    let mut sup = vec![0.0f64; k_max + 1];
    for i in 0..=samples {
        let u = lo + (hi - lo) * i as f64 / samples as f64;
        for (s, d) in sup.iter_mut().zip(phi.derivatives(u, k_max)) {
            *s = s.max(d.abs());
        }
    }
    GrowthReport {
        rows: sup
            .into_iter()
            .enumerate()
            .map(|(k, s)| {
                let bound = growth_bound(k, epsilon);
                GrowthRow {
                    k,
                    sup_norm: s,
                    bound,
                    within: s <= bound * (1.0 + 1e-12),
                }
            })
            .collect(),
    }
}

/// A Littlewood–Paley family `Ψ_0 = Φ`, `Ψ_j(u) = Ψ(b^{-j}u)`.
///
/// The additive variant uses `Ψ = Φ(·) - Φ(b·)` so that `Σ Ψ_j = 1`; the
/// squared variant takes square roots of the same differences so that
/// `Σ Ψ_j² = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpSystem {
    pub phi: Cutoff,
    pub squared: bool,
}

impl LpSystem {
    pub fn additive(phi: Cutoff) -> Self {
        Self {
            phi: phi.profile(),
            squared: false,
        }
    }

    pub fn squared(phi: Cutoff) -> Self {
        Self {
            phi: phi.profile(),
            squared: true,
        }
    }

    pub fn b(&self) -> f64 {
        self.phi.b
    }

    fn radicand(&self, j: usize, u: f64) -> f64 {
        let b = self.phi.b;
        if j == 0 {
            self.phi.step(u)
        } else {
            let v = u * b.powi(-(j as i32));
            self.phi.step(v) - self.phi.step(b * v)
        }
    }

    pub fn eval(&self, j: usize, u: f64) -> f64 {
        let r = self.radicand(j, u);
        if self.squared {
            r.max(0.0).sqrt()
        } else {
            r
        }
    }

    /// `[lo, hi]` outside of which `Ψ_j` vanishes.
    pub fn band(&self, j: usize) -> (f64, f64) {
        let b = self.phi.b;
        if j == 0 {
            (0.0, b)
        } else {
            (b.powi(j as i32 - 1), b.powi(j as i32 + 1))
        }
    }

    /// `Σ_{j≤J} Ψ_j(u)` (additive) or `Σ_{j≤J} Ψ_j(u)²` (squared).
    pub fn partition_sum(&self, levels: usize, u: f64) -> f64 {
        (0..=levels)
            .map(|j| {
                let v = self.eval(j, u);
                if self.squared {
                    v * v
                } else {
                    v
                }
            })
            .sum()
    }

    /// Number of levels `J` with `b^J ≥ u_max`.
    pub fn levels_covering(&self, u_max: f64) -> usize {
        let b = self.phi.b;
        let mut j = 0;
        while b.powi(j as i32) < u_max {
            j += 1;
        }
        j
    }
}

/// Auxiliary functions for the dual frame: `Γ_0(u) = Φ(u/b)`,
/// `Γ_1(u) = Φ(u/b²) - Φ(bu)` and `Θ(u) = Φ(u/b³)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaSystem {
    pub phi: Cutoff,
}

impl GammaSystem {
    pub fn new(phi: Cutoff) -> Self {
        Self { phi: phi.profile() }
    }

    pub fn gamma0(&self, u: f64) -> f64 {
        self.phi.step(u / self.phi.b)
    }

    pub fn gamma1(&self, u: f64) -> f64 {
        let b = self.phi.b;
        self.phi.step(u / (b * b)) - self.phi.step(b * u)
    }

    pub fn theta(&self, u: f64) -> f64 {
        self.phi.step(u / self.phi.b.powi(3))
    }

    /// The function paired with `Ψ_j`: `Γ_0` at level 0, `Γ_1(b^{1-j}·)` beyond.
    pub fn for_level(&self, j: usize, u: f64) -> f64 {
        if j == 0 {
            self.gamma0(u)
        } else {
            self.gamma1(u * self.phi.b.powi(1 - j as i32))
        }
    }

    /// Support of [`GammaSystem::for_level`].
    pub fn band(&self, j: usize) -> (f64, f64) {
        let b = self.phi.b;
        if j == 0 {
            (0.0, b * b)
        } else {
            (b.powi(j as i32 - 2), b.powi(j as i32 + 2))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Systems {
    pub additive: LpSystem,
    pub squared: LpSystem,
    pub gamma: GammaSystem,
    pub levels: usize,
    /// `min Ψ` over `[b^{-3/4}, b^{3/4}]`.
    pub psi_floor: f64,
}

/// Builds the additive and squared Littlewood–Paley systems and the Γ system
/// from a type (a) profile, checking the lower bound of `Ψ` near `u = 1`.
pub fn make_systems(phi: &Cutoff, b: f64, levels: usize) -> Result<Systems> {
    if phi.kind != CutoffKind::TypeA {
        return Err(Error::Construction("systems require a type (a) profile".into()));
    }
    if (phi.b - b).abs() > 1e-15 * b {
        return Err(Error::Construction(format!(
            "profile base {} differs from system base {b}",
            phi.b
        )));
    }
    let additive = LpSystem::additive(*phi);
    let squared = LpSystem::squared(*phi);
    let lo = b.powf(-0.75).ln();
    let hi = b.powf(0.75).ln();
    let mut floor = f64::MAX;
    let samples = 2000;
    for i in 0..=samples {
        let u = (lo + (hi - lo) * i as f64 / samples as f64).exp();
        let r = phi.step(u) - phi.step(b * u);
        if r < -1e-14 {
            return Err(Error::Construction(format!("negative radicand {r} at u = {u}")));
        }
        floor = floor.min(r);
    }
    if floor <= 0.0 {
        return Err(Error::Construction(
            "Ψ vanishes inside [b^{-3/4}, b^{3/4}]".into(),
        ));
    }
    Ok(Systems {
        additive,
        squared,
        gamma: GammaSystem::new(*phi),
        levels,
        psi_floor: floor,
    })
}
