//! Greedy n-term approximation from a frame and Jackson-rate checks.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{CoefficientSet, FrameSystem};
use crate::grid::SpectralGrid;

/// `τ` with `1/τ = s/d + 1/p`.
pub fn tau(s: f64, p: f64, d: f64) -> f64 {
    1.0 / (s / d + 1.0 / p)
}

fn check_p(p: f64) -> Result<()> {
    if !(1.0..f64::INFINITY).contains(&p) {
        return Err(Error::Parameter(format!("need 1 <= p < inf, got {p}")));
    }
    Ok(())
}

/// `(Σ_ξ ‖a_ξ ψ_ξ‖_p^τ)^{1/τ}` for given coefficients and element norms.
pub fn btau_from_coefficients(a: &CoefficientSet, norms: &[Vec<f64>], s: f64, p: f64, d: f64) -> Result<f64> {
    check_p(p)?;
    if a.levels.len() != norms.len() || a.levels.iter().zip(norms).any(|(c, n)| c.len() != n.len()) {
        return Err(Error::IndexMismatch);
    }
    let t = tau(s, p, d);
    let sum: f64 = a
        .levels
        .iter()
        .zip(norms)
        .flat_map(|(c, n)| c.iter().zip(n).map(|(x, y)| (x.abs() * y).powf(t)))
        .sum();
    Ok(sum.powf(1.0 / t))
}

/// `𝒩(f)` from the dual analysis of `f` (eigen-coefficients).
pub fn btau_norm(frame: &FrameSystem, grid: &SpectralGrid, f: &DVector<f64>, s: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    let a = frame.analyze_dual(f)?;
    let norms = frame.element_norms(grid, p);
    btau_from_coefficients(&a, &norms, s, p, grid.model().dim_d())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxCurve {
    /// `0, 1, …, n_max`.
    pub n: Vec<usize>,
    /// Greedy upper bounds `σ̂_n(f)_p`, nonincreasing.
    pub sigma: Vec<f64>,
    /// Flattened term indices in the order they were added.
    pub order: Vec<usize>,
    pub s: f64,
    pub p: f64,
    pub tau: f64,
    /// Requested `n_max` exceeded the number of terms.
    pub clipped: bool,
}

/// Greedy curve over an explicit dictionary: `target` and the columns of
/// `elements` are grid values, `coeffs[i]` multiplies column `i`.
///
/// Terms are taken by decreasing `|c_i| ‖e_i‖_p` (stable in `i`). Each `σ̂_n` is
/// the smallest measured residual among the first `n` partial sums, which is
/// still an upper bound for the best `n`-term error.
pub fn greedy_curve(
    grid: &SpectralGrid,
    target: &DVector<f64>,
    elements: &DMatrix<f64>,
    coeffs: &[f64],
    p: f64,
    n_max: usize,
) -> Result<(Vec<usize>, Vec<f64>, bool)> {
    if elements.ncols() != coeffs.len() || elements.nrows() != grid.len() {
        return Err(Error::IndexMismatch);
    }
    let w = grid.weights();
    let keys: Vec<f64> = elements
        .column_iter()
        .zip(coeffs)
        .map(|(c, a)| a.abs() * crate::grid::lp_norm(w, c.as_slice(), p))
        .collect();
    let mut order: Vec<usize> = (0..coeffs.len()).collect();
    order.sort_by(|&i, &j| keys[j].total_cmp(&keys[i]));
    let clipped = n_max > order.len();
    order.truncate(n_max);

    let mut residual = target.clone();
    let mut best = grid.lp_norm(&residual, p);
    let mut sigma = Vec::with_capacity(order.len() + 1);
    sigma.push(best);
    for &i in &order {
        residual.axpy(-coeffs[i], &elements.column(i), 1.0);
        best = best.min(grid.lp_norm(&residual, p));
        sigma.push(best);
    }
    Ok((order, sigma, clipped))
}

fn frame_elements(frame: &FrameSystem, grid: &SpectralGrid) -> DMatrix<f64> {
    let blocks: Vec<DMatrix<f64>> = (0..frame.levels.len()).map(|j| frame.level_values(grid, j)).collect();
    let total = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(grid.len(), total);
    let mut at = 0;
    for b in blocks {
        out.columns_mut(at, b.ncols()).copy_from(&b);
        at += b.ncols();
    }
    out
}

/// Greedy curve for `f` (eigen-coefficients) from the rearranged terms
/// `⟨f, ψ̃_ξ⟩ ψ_ξ`. With all terms taken the residual is the reconstruction
/// error of the frame.
pub fn greedy_sigma_curve(
    frame: &FrameSystem,
    grid: &SpectralGrid,
    f: &DVector<f64>,
    s: f64,
    p: f64,
    n_max: usize,
) -> Result<ApproxCurve> {
    let a = frame.analyze_dual(f)?;
    greedy_with_coefficients(frame, grid, f, &a, s, p, n_max)
}

/// Greedy curve for `f` from the terms `a_ξ ψ_ξ` with caller-chosen `a`.
pub fn greedy_with_coefficients(
    frame: &FrameSystem,
    grid: &SpectralGrid,
    f: &DVector<f64>,
    a: &CoefficientSet,
    s: f64,
    p: f64,
    n_max: usize,
) -> Result<ApproxCurve> {
    check_p(p)?;
    let flat: Vec<f64> = a.iter().collect();
    let elements = frame_elements(frame, grid);
    let (order, sigma, clipped) = greedy_curve(grid, &grid.synthesize(f), &elements, &flat, p, n_max)?;
    Ok(ApproxCurve {
        n: (0..sigma.len()).collect(),
        sigma,
        order,
        s,
        p,
        tau: tau(s, p, grid.model().dim_d()),
        clipped,
    })
}

/// `σ_n` for coefficients `m^{-θ}`, `m = 1..=count`, in an orthonormal system
/// and `p = 2`: the `ℓ²` tail `(Σ_{m>n} m^{-2θ})^{1/2}`.
pub fn orthonormal_tail(theta: f64, count: usize, n_max: usize) -> Vec<f64> {
    let mut tail = vec![0.0; count + 1];
    for m in (1..=count).rev() {
        tail[m - 1] = tail[m] + (m as f64).powf(-2.0 * theta);
    }
    tail.truncate(n_max.min(count) + 1);
    tail.into_iter().map(f64::sqrt).collect()
}

/// Greedy curve of `Σ_m m^{-θ} e_{π(m)}` in the eigenbasis, measured on the grid.
/// `π` scrambles the modes so that the greedy order must be recovered from the
/// coefficients.
pub fn orthonormal_greedy(grid: &SpectralGrid, theta: f64, count: usize, n_max: usize) -> Result<Vec<f64>> {
    if count > grid.dimension() {
        return Err(Error::Parameter(format!(
            "{count} terms exceed the {} available modes",
            grid.dimension()
        )));
    }
    // A fixed stride coprime to the dimension permutes the modes.
    let dim = grid.dimension();
    let stride = (2..dim).find(|k| gcd(*k, dim) == 1 && *k * *k > dim).unwrap_or(1);
    let mut coeffs = vec![0.0; dim];
    for m in 1..=count {
        coeffs[(m * stride) % dim] = (m as f64).powf(-theta);
    }
    let c = DVector::from_vec(coeffs.clone());
    let (_, sigma, _) = greedy_curve(grid, &grid.synthesize(&c), grid.basis(), &coeffs, 2.0, n_max)?;
    Ok(sigma)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeStatus {
    Fitted,
    /// The curve reached zero: exact recovery with finitely many terms.
    ExactRecovery,
    /// Too few decaying points above the noise floor.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacksonReport {
    pub slope_hat: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
    pub n_range: (usize, usize),
    pub status: SlopeStatus,
    pub pass: bool,
}

/// Relative level below which residuals count as quadrature noise.
pub const NOISE_FLOOR: f64 = 1e-9;

/// Least-squares slope of `log σ̂_n` against `log n` on log-spaced `n ≥ 1`
/// while `σ̂_n` stays above the noise floor. Passes iff the slope is at most
/// `-s/d + 0.15`.
pub fn jackson_slope(curve: &ApproxCurve, s: f64, d: f64) -> JacksonReport {
    let target = -s / d + 0.15;
    let floor = NOISE_FLOOR * curve.sigma.first().copied().unwrap_or(0.0);
    let last = curve.sigma.len().saturating_sub(1);
    let alive = (1..=last).take_while(|&n| curve.sigma[n] > floor).last().unwrap_or(0);
    let hit_zero = alive < last;

    // Log-spaced sample so each decade carries the same weight.
    let mut ns: Vec<usize> = (0..)
        .map(|k| (10f64.powf(k as f64 / 20.0)).round() as usize)
        .take_while(|&n| n <= alive)
        .collect();
    ns.dedup();
    let enough = ns.len() >= 5 && alive >= 10 * ns[0];
    if !enough {
        let status = if hit_zero {
            SlopeStatus::ExactRecovery
        } else {
            SlopeStatus::Inconclusive
        };
        return JacksonReport {
            slope_hat: if hit_zero { f64::NEG_INFINITY } else { f64::NAN },
            intercept: f64::NAN,
            r_squared: f64::NAN,
            points: ns.len(),
            n_range: (ns.first().copied().unwrap_or(0), alive),
            status,
            pass: hit_zero,
        };
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = ns.iter().map(|&n| curve.sigma[n].ln()).collect();
    let (slope, intercept, r2) = crate::spectral::linear_fit(&xs, &ys);
    JacksonReport {
        slope_hat: slope,
        intercept,
        r_squared: r2,
        points: ns.len(),
        n_range: (ns[0], alive),
        status: SlopeStatus::Fitted,
        pass: slope <= target,
    }
}

/// `max_{n ≥ 1} σ̂_n n^{s/d} / 𝒩`.
pub fn jackson_prefactor(curve: &ApproxCurve, s: f64, d: f64, btau: f64) -> f64 {
    curve
        .sigma
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, v)| v * (n as f64).powf(s / d))
        .fold(0.0, f64::max)
        / btau
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoff::{Cutoff, CutoffKind};
    use crate::family::{besov_coefficients, spectral_family};
    use crate::frames::{build_tight, GammaChoice, Provenance};
    use crate::model::SpectralModel;
    use approx::assert_relative_eq;

    fn tight(n: usize, levels: usize) -> (SpectralGrid, FrameSystem) {
        let grid = SpectralGrid::with_default_resolution(SpectralModel::torus(n).unwrap()).unwrap();
        let phi = Cutoff::new(CutoffKind::TypeA, 2.0, 0.5).unwrap();
        let frame = build_tight(&grid, &phi, 2.0, levels, GammaChoice::DEFAULT_AUTO).unwrap();
        (grid, frame)
    }

    #[test]
    fn tau_relation() {
        assert_relative_eq!(tau(1.0, 2.0, 1.0), 2.0 / 3.0);
        assert_relative_eq!(1.0 / tau(0.5, 4.0, 2.0), 0.5);
    }

    #[test]
    fn btau_zero_and_homogeneous() {
        let (grid, frame) = tight(128, 4);
        let zero = DVector::zeros(grid.dimension());
        assert_eq!(btau_norm(&frame, &grid, &zero, 1.0, 2.0).unwrap(), 0.0);
        let f = spectral_family(grid.frequencies(), frame.band(), 1, 4).remove(0);
        let a = btau_norm(&frame, &grid, &f, 1.0, 2.0).unwrap();
        let b = btau_norm(&frame, &grid, &(&f * -2.5), 1.0, 2.0).unwrap();
        assert_relative_eq!(b, 2.5 * a, max_relative = 1e-12);
        assert!(btau_norm(&frame, &grid, &f, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn btau_of_one_element_matches_coefficient_sum() {
        let (grid, frame) = tight(128, 4);
        let norms = frame.element_norms(&grid, 2.0);
        let (lvl, k) = (3, 7);
        let f = frame.element_coeffs(lvl, k);
        let v = btau_norm(&frame, &grid, &f, 1.0, 2.0).unwrap();
        let t = tau(1.0, 2.0, 1.0);
        let mut sum = 0.0;
        for (j, l) in frame.levels.iter().enumerate() {
            for i in 0..l.len() {
                let g = frame.element_coeffs(j, i);
                sum += (f.dot(&g).abs() * norms[j][i]).powf(t);
            }
        }
        assert_relative_eq!(v, sum.powf(1.0 / t), max_relative = 1e-10);
        let own = norms[lvl][k];
        assert!(v >= own.powi(3) * (1.0 - 1e-12));
    }

    #[test]
    fn single_coefficient_is_recovered_in_one_step() {
        let (grid, frame) = tight(128, 4);
        let mut a = besov_coefficients(&frame, 1.0, 1).scaled(0.0);
        a.levels[2][1] = 0.7;
        let f = frame.synthesize(&a).unwrap();
        let c = greedy_with_coefficients(&frame, &grid, &f, &a, 1.0, 2.0, 5).unwrap();
        assert!(c.sigma[0] > 0.0);
        assert!(c.sigma[1] < 1e-12 * c.sigma[0]);
        let r = jackson_slope(&c, 1.0, 1.0);
        assert_eq!(r.status, SlopeStatus::ExactRecovery);
        assert!(r.pass);
    }

    #[test]
    fn curve_is_monotone_and_ends_at_reconstruction_error() {
        let (grid, frame) = tight(128, 4);
        let f = spectral_family(grid.frequencies(), frame.band(), 1, 8).remove(0);
        let c = greedy_sigma_curve(&frame, &grid, &f, 1.0, 2.0, frame.len() + 10).unwrap();
        assert!(c.clipped);
        assert_eq!(c.sigma.len(), frame.len() + 1);
        assert_relative_eq!(c.sigma[0], grid.lp_norm(&grid.synthesize(&f), 2.0), max_relative = 1e-14);
        assert!(c.sigma.windows(2).all(|w| w[1] <= w[0]));
        assert!(*c.sigma.last().unwrap() <= 1e-8 * c.sigma[0]);
    }

    #[test]
    fn orthonormal_oracle_matches_closed_form() {
        let grid = SpectralGrid::with_default_resolution(SpectralModel::torus(256).unwrap()).unwrap();
        let measured = orthonormal_greedy(&grid, 1.5, 250, 200).unwrap();
        let exact = orthonormal_tail(1.5, 250, 200);
        for (m, e) in measured.iter().zip(&exact) {
            assert_relative_eq!(m, e, max_relative = 1e-8);
        }
        let curve = ApproxCurve {
            n: (0..exact.len()).collect(),
            sigma: exact,
            order: Vec::new(),
            s: 1.0,
            p: 2.0,
            tau: tau(1.0, 2.0, 1.0),
            clipped: false,
        };
        // Tail of m^{-3/2} decays like n^{-1}.
        let r = jackson_slope(&curve, 1.0, 1.0);
        assert_eq!(r.status, SlopeStatus::Fitted);
        assert!((r.slope_hat + 1.0).abs() < 0.15, "{}", r.slope_hat);
    }

    #[test]
    fn short_curves_are_inconclusive() {
        let curve = ApproxCurve {
            n: vec![0, 1, 2, 3],
            sigma: vec![1.0, 0.5, 0.4, 0.3],
            order: Vec::new(),
            s: 1.0,
            p: 2.0,
            tau: 2.0 / 3.0,
            clipped: false,
        };
        let r = jackson_slope(&curve, 1.0, 1.0);
        assert_eq!(r.status, SlopeStatus::Inconclusive);
        assert!(!r.pass);
    }

    #[test]
    fn synthetic_besov_sample_meets_jackson_rate() {
        let (grid, frame) = tight(512, 6);
        let a = besov_coefficients(&frame, 1.0, 3);
        assert_eq!(a.provenance, Provenance::Synthetic);
        let f = frame.synthesize(&a).unwrap();
        let c = greedy_sigma_curve(&frame, &grid, &f, 1.0, 2.0, 400).unwrap();
        let r = jackson_slope(&c, 1.0, 1.0);
        assert!(r.pass, "{r:?}");
    }
}
