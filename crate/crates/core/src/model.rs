//! Model Dirichlet spaces with explicit eigen-systems.
//!
//! Two spaces are provided. The unit-circumference torus `[0, 1)` carries
//! `L = -d²/dx²`. The interval `[-1, 1]` carries the Jacobi operator with
//! weight `(1 - x)^α (1 + x)^β` and the metric `|arccos x - arccos y|`.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, ln_beta};

use crate::error::{Error, Result};
use crate::quadrature::{JacobiRecurrence, Quadrature};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelKind {
    Torus,
    Jacobi { alpha: f64, beta: f64 },
}

/// A model space truncated to eigenfunctions `e_0..=e_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    kind: ModelKind,
    truncation: usize,
    eigenvalues: Vec<f64>,
    recurrence: Option<JacobiRecurrence>,
    dim_d: f64,
}

/// Empirical doubling constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublingReport {
    pub c0_hat: f64,
    pub d_hat: f64,
    pub reverse_c_hat: f64,
}

/// A single normalized eigenfunction.
#[derive(Debug, Clone, Copy)]
pub struct Eigenfunction<'a> {
    model: &'a SpectralModel,
    index: usize,
}

impl Eigenfunction<'_> {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.model.eval_single(self.index, x)
    }
}

impl SpectralModel {
    pub fn torus(truncation: usize) -> Result<Self> {
        Self::new(ModelKind::Torus, truncation)
    }

    pub fn jacobi(alpha: f64, beta: f64, truncation: usize) -> Result<Self> {
        Self::new(ModelKind::Jacobi { alpha, beta }, truncation)
    }

    pub fn new(kind: ModelKind, truncation: usize) -> Result<Self> {
        if truncation == 0 {
            return Err(Error::Config("truncation must be positive".into()));
        }
        let (eigenvalues, recurrence) = match kind {
            ModelKind::Torus => {
                let ev = (0..=truncation)
                    .map(|n| {
                        let k = torus_frequency(n) as f64;
                        (2.0 * PI * k).powi(2)
                    })
                    .collect();
                (ev, None)
            }
            ModelKind::Jacobi { alpha, beta } => {
                let rec = JacobiRecurrence::new(alpha, beta, truncation + 2)?;
                let ev = (0..=truncation)
                    .map(|n| {
                        let k = n as f64;
                        k * (k + alpha + beta + 1.0)
                    })
                    .collect();
                (ev, Some(rec))
            }
        };
        let mut model = Self {
            kind,
            truncation,
            eigenvalues,
            recurrence,
            dim_d: 1.0,
        };
        model.dim_d = match kind {
            ModelKind::Torus => 1.0,
            ModelKind::Jacobi { .. } => model.doubling_report(257).d_hat,
        };
        Ok(model)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Number of eigenfunctions, `N + 1`.
    pub fn dimension(&self) -> usize {
        self.truncation + 1
    }

    /// Homogeneous dimension measured by [`SpectralModel::doubling_report`].
    pub fn dim_d(&self) -> f64 {
        self.dim_d
    }

    pub fn diam(&self) -> f64 {
        match self.kind {
            ModelKind::Torus => 0.5,
            ModelKind::Jacobi { .. } => PI,
        }
    }

    /// `μ(M)`.
    pub fn mass(&self) -> f64 {
        match &self.recurrence {
            None => 1.0,
            Some(rec) => rec.mass,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, n: usize) -> Result<f64> {
        self.check_index(n)?;
        Ok(self.eigenvalues[n])
    }

    /// `√λ_n` for every retained mode.
    pub fn frequencies(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|l| l.sqrt()).collect()
    }

    pub fn eigenpair(&self, n: usize) -> Result<(f64, Eigenfunction<'_>)> {
        self.check_index(n)?;
        Ok((self.eigenvalues[n], Eigenfunction { model: self, index: n }))
    }

    /// `∫ e_n dμ`, which is `√μ(M)` for `n = 0` and zero otherwise.
    pub fn basis_integral(&self, n: usize) -> f64 {
        if n == 0 {
            self.mass().sqrt()
        } else {
            0.0
        }
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n > self.truncation {
            Err(Error::Index {
                index: n,
                truncation: self.truncation,
            })
        } else {
            Ok(())
        }
    }

    fn eval_single(&self, n: usize, x: f64) -> f64 {
        match &self.recurrence {
            None => torus_mode(n, x),
            Some(rec) => {
                let mut buf = vec![0.0; n + 1];
                rec.eval_all(x, &mut buf);
                buf[n]
            }
        }
    }

    /// Fills `out[n] = e_n(x)` for `n < out.len() <= N + 1`.
    pub fn eval_basis(&self, x: f64, out: &mut [f64]) {
        debug_assert!(out.len() <= self.dimension());
        match &self.recurrence {
            None => {
                for (n, o) in out.iter_mut().enumerate() {
                    *o = torus_mode(n, x);
                }
            }
            Some(rec) => rec.eval_all(x, out),
        }
    }

    /// Coordinate in which the metric is the absolute difference:
    /// `x` on the torus (modulo wrap-around), `arccos x` on the interval.
    pub fn coordinate(&self, x: f64) -> f64 {
        match self.kind {
            ModelKind::Torus => x.rem_euclid(1.0),
            ModelKind::Jacobi { .. } => x.clamp(-1.0, 1.0).acos(),
        }
    }

    /// Inverse of [`SpectralModel::coordinate`].
    pub fn point_at(&self, coordinate: f64) -> f64 {
        match self.kind {
            ModelKind::Torus => coordinate.rem_euclid(1.0),
            ModelKind::Jacobi { .. } => coordinate.cos(),
        }
    }

    pub fn distance(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            ModelKind::Torus => {
                let d = (x.rem_euclid(1.0) - y.rem_euclid(1.0)).abs();
                d.min(1.0 - d)
            }
            ModelKind::Jacobi { .. } => (self.coordinate(x) - self.coordinate(y)).abs(),
        }
    }

    /// Measure of the open ball `B(x, r)`.
    pub fn ball_measure(&self, x: f64, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        match self.kind {
            ModelKind::Torus => (2.0 * r).min(1.0),
            ModelKind::Jacobi { alpha, beta } => {
                let theta = self.coordinate(x);
                let lo = (theta - r).max(0.0);
                let hi = (theta + r).min(PI);
                jacobi_arc_measure(alpha, beta, lo, hi)
            }
        }
    }

    /// Distance `ρ(x, y)` together with `|B(x, r)|`.
    pub fn geometry(&self, x: f64, y: f64, r: f64) -> (f64, f64) {
        (self.distance(x, y), self.ball_measure(x, r))
    }

    /// Smallest admissible quadrature resolution, `2N + 2`.
    pub fn min_resolution(&self) -> usize {
        2 * self.truncation + 2
    }

    /// Resolution used when none is given, chosen fine enough that
    /// `L^p` norms of band-limited functions are well resolved.
    pub fn default_resolution(&self) -> usize {
        4 * self.truncation + 2
    }

    pub fn quadrature(&self, resolution: usize) -> Result<Quadrature> {
        if resolution < self.min_resolution() {
            return Err(Error::Config(format!(
                "quadrature resolution {resolution} is below 2N + 2 = {}",
                self.min_resolution()
            )));
        }
        match self.kind {
            ModelKind::Torus => Quadrature::trapezoid(resolution),
            ModelKind::Jacobi { alpha, beta } => Quadrature::gauss_jacobi(resolution, alpha, beta),
        }
    }

    /// Scans `|B(x, 2r)| / |B(x, r)|` over `samples` centers and a
    /// logarithmic range of radii up to `diam / 3`.
    pub fn doubling_report(&self, samples: usize) -> DoublingReport {
        let samples = samples.max(1);
        let diam = self.diam();
        let radii: Vec<f64> = (0..24)
            .map(|i| diam / 3.0 * 10f64.powf(-3.0 * i as f64 / 23.0))
            .collect();
        let span = match self.kind {
            ModelKind::Torus => 1.0,
            ModelKind::Jacobi { .. } => PI,
        };
        let mut sup = f64::MIN;
        let mut inf = f64::MAX;
        for i in 0..samples {
            let c = if samples == 1 {
                0.0
            } else {
                span * i as f64 / (samples - 1) as f64
            };
            let x = self.point_at(c);
            for &r in &radii {
                let small = self.ball_measure(x, r);
                if small <= 0.0 {
                    continue;
                }
                let ratio = self.ball_measure(x, 2.0 * r) / small;
                sup = sup.max(ratio);
                inf = inf.min(ratio);
            }
        }
        DoublingReport {
            c0_hat: sup,
            d_hat: sup.log2(),
            reverse_c_hat: inf,
        }
    }

    /// Smallest `a ≥ 2` with `√λ_{2n} ≤ a √λ_n`, so that products of
    /// functions in `Σ_λ` lie in `Σ_{aλ}`.
    pub fn polynomial_factor(&self) -> f64 {
        match self.kind {
            ModelKind::Torus => 2.0,
            ModelKind::Jacobi { alpha, beta } => {
                let c = alpha + beta + 1.0;
                let mut a: f64 = 2.0;
                for n in 1..=self.truncation.max(1) {
                    let k = n as f64;
                    let ratio = (2.0 * k * (2.0 * k + c) / (k * (k + c))).sqrt();
                    a = a.max(ratio);
                }
                a
            }
        }
    }

    /// Wave propagation speed when known exactly.
    pub fn exact_wave_speed(&self) -> Option<f64> {
        match self.kind {
            ModelKind::Torus => Some(1.0),
            ModelKind::Jacobi { .. } => None,
        }
    }
}

/// Frequency `k` of the torus mode with index `n` (`e_{2k-1}` cosine, `e_{2k}` sine).
pub fn torus_frequency(n: usize) -> usize {
    n.div_ceil(2)
}

fn torus_mode(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let k = torus_frequency(n) as f64;
    let arg = 2.0 * PI * (k * x).rem_euclid(1.0);
    if n % 2 == 1 {
        SQRT_2 * arg.cos()
    } else {
        SQRT_2 * arg.sin()
    }
}

/// Weighted measure of `{cos θ : lo < θ < hi}` for the Jacobi weight, via the
/// substitution `t = sin²(θ/2)` which turns it into an incomplete beta integral.
fn jacobi_arc_measure(alpha: f64, beta: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let (a, b) = (alpha + 1.0, beta + 1.0);
    let scale = ((alpha + beta + 1.0) * std::f64::consts::LN_2 + ln_beta(a, b)).exp();
    let t1 = (0.5 * lo).sin().powi(2);
    let t2 = (0.5 * hi).sin().powi(2);
    // Differences of the upper tail are more accurate past the median.
    let diff = if t1 > 0.5 {
        beta_reg(b, a, 1.0 - t1) - beta_reg(b, a, 1.0 - t2)
    } else {
        beta_reg(a, b, t2) - beta_reg(a, b, t1)
    };
    scale * diff.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn jacobi_eigenvalue_law() {
        let m = SpectralModel::jacobi(0.0, 0.0, 8).unwrap();
        assert_eq!(m.eigenvalue(3).unwrap(), 12.0);
        assert!(matches!(m.eigenvalue(9), Err(Error::Index { .. })));
    }

    #[test]
    fn torus_first_cosine_matches_rayleigh_quotient() {
        let m = SpectralModel::torus(4).unwrap();
        let (lambda, e) = m.eigenpair(1).unwrap();
        assert_abs_diff_eq!(lambda, 4.0 * PI * PI, epsilon = 1e-12);
        let n = 20_000;
        let h = 1.0 / n as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            let x = i as f64 * h;
            let d = (e.eval(x + h) - e.eval(x)) / h;
            num += d * d * h;
            den += e.eval(x).powi(2) * h;
        }
        assert!((num / den - lambda).abs() / lambda < 1e-3);
        let (l0, e0) = m.eigenpair(0).unwrap();
        assert_eq!((l0, e0.eval(0.37)), (0.0, 1.0));
    }

    #[test]
    fn ball_measures_known_values() {
        let t = SpectralModel::torus(4).unwrap();
        assert_abs_diff_eq!(t.ball_measure(0.5, 0.1), 0.2, epsilon = 1e-15);
        let j = SpectralModel::jacobi(0.0, 0.0, 4).unwrap();
        assert_abs_diff_eq!(j.distance(1.0, -1.0), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(j.ball_measure(0.0, PI / 2.0), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn jacobi_ball_matches_riemann_sum() {
        let (alpha, beta): (f64, f64) = (0.7, -0.4);
        let m = SpectralModel::jacobi(alpha, beta, 4).unwrap();
        let x: f64 = 0.3;
        let r: f64 = 0.8;
        let theta = x.acos();
        let (lo, hi) = ((theta - r).max(0.0), (theta + r).min(PI));
        let n = 400_000;
        let h = (hi - lo) / n as f64;
        let sum: f64 = (0..n)
            .map(|i| {
                let th = lo + (i as f64 + 0.5) * h;
                (1.0 - th.cos()).powf(alpha) * (1.0 + th.cos()).powf(beta) * th.sin() * h
            })
            .sum();
        assert!((m.ball_measure(x, r) - sum).abs() < 1e-8);
    }

    #[test]
    fn doubling_constants() {
        let t = SpectralModel::torus(4).unwrap().doubling_report(50);
        assert_abs_diff_eq!(t.c0_hat, 2.0, epsilon = 1e-12);
        assert!(t.reverse_c_hat > 1.0);
        let j = SpectralModel::jacobi(0.0, 0.0, 4).unwrap();
        let r = j.doubling_report(101);
        assert!(r.d_hat >= 1.0 && r.d_hat <= 2.0 + 1e-9);
        assert!(r.reverse_c_hat > 1.0);
        assert_abs_diff_eq!(j.dim_d(), r.d_hat, epsilon = 0.05);
    }

    #[test]
    fn quadrature_resolution_guard() {
        let m = SpectralModel::torus(10).unwrap();
        assert!(matches!(m.quadrature(21), Err(Error::Config(_))));
        assert_eq!(m.quadrature(22).unwrap().len(), 22);
    }

    #[test]
    fn polynomial_factor_covers_products() {
        let m = SpectralModel::jacobi(-0.5, -0.5, 64).unwrap();
        let a = m.polynomial_factor();
        for n in 1..=32 {
            assert!(m.eigenvalue(2 * n).unwrap().sqrt() <= a * m.eigenvalue(n).unwrap().sqrt() + 1e-12);
        }
    }
}
