//! Maximal δ-nets on the quadrature grid, their companion partitions,
//! sampling and Marcinkiewicz–Zygmund checks, and cubature weights.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SpectralGrid;

/// Relative slack in the separation test, absorbing rounding in `ρ`.
const SEPARATION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetLevel {
    pub delta: f64,
    /// Grid node index of each center, in insertion order.
    pub centers: Vec<usize>,
    pub points: Vec<f64>,
    /// Center position owning each grid node.
    pub assignment: Vec<usize>,
    pub cell_measures: Vec<f64>,
    pub weights: Option<Vec<f64>>,
}

impl NetLevel {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

/// Greedy maximal δ-net: starting at the node nearest `seed`, nodes are
/// scanned in order (wrapping around) and kept whenever they are at distance
/// at least `δ` from all centers kept so far. Nodes are then assigned to the
/// nearest center, ties going to the lower center index.
pub fn maximal_net(grid: &SpectralGrid, delta: f64, seed: f64) -> Result<NetLevel> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Parameter(format!("net spacing must be positive, got {delta}")));
    }
    let model = grid.model();
    let nodes = grid.nodes();
    let q = nodes.len();
    let start = grid.nearest_node(seed);
    let threshold = delta * (1.0 - SEPARATION_SLACK);
    let mut centers: Vec<usize> = Vec::new();
    for step in 0..q {
        let i = (start + step) % q;
        if centers
            .iter()
            .all(|&c| model.distance(nodes[i], nodes[c]) >= threshold)
        {
            centers.push(i);
        }
    }
    let points: Vec<f64> = centers.iter().map(|&c| nodes[c]).collect();
    let mut assignment = vec![0; q];
    let mut cell_measures = vec![0.0; centers.len()];
    for (i, &x) in nodes.iter().enumerate() {
        let mut best = 0;
        let mut best_d = f64::MAX;
        for (k, &p) in points.iter().enumerate() {
            let d = model.distance(x, p);
            // Near-ties within rounding go to the lower index.
            if d < best_d * (1.0 - SEPARATION_SLACK) {
                best = k;
                best_d = d;
            }
        }
        assignment[i] = best;
        cell_measures[best] += grid.weights()[i];
    }
    let net = NetLevel {
        delta,
        centers,
        points,
        assignment,
        cell_measures,
        weights: None,
    };
    check_net(grid, &net)?;
    Ok(net)
}

/// Brute-force check of separation, covering, nesting and total measure.
pub fn check_net(grid: &SpectralGrid, net: &NetLevel) -> Result<()> {
    let model = grid.model();
    let delta = net.delta;
    let threshold = delta * (1.0 - SEPARATION_SLACK);
    for (a, &p) in net.points.iter().enumerate() {
        for &r in &net.points[a + 1..] {
            if model.distance(p, r) < threshold {
                return Err(Error::Construction(format!("net centers {p} and {r} closer than {delta}")));
            }
        }
    }
    for (i, &x) in grid.nodes().iter().enumerate() {
        let own = net.points[net.assignment[i]];
        let d_own = model.distance(x, own);
        if d_own >= delta {
            return Err(Error::Construction(format!("node {x} not covered within {delta}")));
        }
        for (k, &p) in net.points.iter().enumerate() {
            if k != net.assignment[i] && model.distance(x, p) < 0.5 * threshold {
                return Err(Error::Construction(format!("node {x} inside B({p}, δ/2) but assigned elsewhere")));
            }
        }
    }
    let total: f64 = net.cell_measures.iter().sum();
    if (total - model.mass()).abs() > 1e-12 * model.mass().max(1.0) {
        return Err(Error::Construction(format!("cells carry mass {total}, expected {}", model.mass())));
    }
    Ok(())
}

/// `(Σ_ξ ∫_{A_ξ} |f - f(ξ)|^p)^{1/p} / ‖f‖_p`.
pub fn mz_ratio(grid: &SpectralGrid, net: &NetLevel, coeffs: &DVector<f64>, p: f64) -> Result<f64> {
    let values = grid.synthesize(coeffs);
    let norm = grid.lp_norm(&values, p);
    if norm <= 0.0 {
        return Err(Error::Degenerate("f has zero L^p norm".into()));
    }
    let mut acc = 0.0;
    for (i, (&w, v)) in grid.weights().iter().zip(values.iter()).enumerate() {
        let center = net.centers[net.assignment[i]];
        acc += w * (v - values[center]).abs().powf(p);
    }
    Ok(acc.powf(1.0 / p) / norm)
}

/// `Σ_ξ |A_ξ| |f(ξ)|² / ‖f‖₂²`.
pub fn sampling_ratio(grid: &SpectralGrid, net: &NetLevel, coeffs: &DVector<f64>) -> Result<f64> {
    let norm2 = coeffs.norm_squared();
    if norm2 <= 0.0 {
        return Err(Error::Degenerate("f has zero L^2 norm".into()));
    }
    let basis = grid.basis();
    let k = crate::grid::last_nonzero(coeffs.as_slice());
    let mut acc = 0.0;
    for (&c, &m) in net.centers.iter().zip(&net.cell_measures) {
        let v: f64 = (0..k).map(|n| basis[(c, n)] * coeffs[n]).sum();
        acc += m * v * v;
    }
    Ok(acc / norm2)
}

/// Rows `e_n(ξ)` for the first `modes` eigenfunctions, one column per center.
fn center_matrix(grid: &SpectralGrid, net: &NetLevel, modes: usize) -> DMatrix<f64> {
    let basis = grid.basis();
    DMatrix::from_fn(modes, net.len(), |n, k| basis[(net.centers[k], n)])
}

/// Exact extremes of the sampling ratio over `Σ_band`: the extreme
/// eigenvalues of `Σ_ξ |A_ξ| e_m(ξ) e_n(ξ)`.
pub fn sampling_bounds(grid: &SpectralGrid, net: &NetLevel, band: f64) -> (f64, f64) {
    let modes = grid.band_end(band);
    let e = center_matrix(grid, net, modes);
    let mut scaled = e.clone();
    for (mut col, m) in scaled.column_iter_mut().zip(&net.cell_measures) {
        col *= *m;
    }
    let gram = &scaled * e.transpose();
    let eig = SymmetricEigen::new(gram).eigenvalues;
    (eig.min(), eig.max())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubatureReport {
    pub weights: Vec<f64>,
    pub band: f64,
    pub modes: usize,
    /// `max_n |Σ w_ξ e_n(ξ) - ∫ e_n|`.
    pub moment_residual: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Cubature weights exact on `Σ_λ`: the smallest correction of `|A_ξ|` in the
/// Euclidean norm that solves the moment system, followed by a positivity and
/// bracket check `(2/3)|B(ξ,δ/2)| ≤ w_ξ ≤ 2|B(ξ,δ)|`.
pub fn cubature_weights(grid: &SpectralGrid, net: &mut NetLevel, band: f64) -> Result<CubatureReport> {
    let model = grid.model();
    let modes = grid.band_end(band);
    let e = center_matrix(grid, net, modes);
    let w0 = DVector::from_column_slice(&net.cell_measures);
    let target = DVector::from_fn(modes, |n, _| model.basis_integral(n));
    let rhs = &target - &e * &w0;
    let svd = e.clone().svd(true, true);
    let tol = 1e-13 * svd.singular_values.max().max(1.0);
    let correction = svd
        .solve(&rhs, tol)
        .map_err(|m| Error::Construction(format!("moment system solve failed: {m}")))?;
    let w = w0 + correction;
    let moment_residual = (&e * &w - &target).amax();
    if moment_residual > 1e-10 {
        return Err(Error::Construction(format!(
            "moment system not solvable on Σ_{band}: residual {moment_residual:e}"
        )));
    }
    let mut lower = Vec::with_capacity(net.len());
    let mut upper = Vec::with_capacity(net.len());
    for (k, (&p, &wk)) in net.points.iter().zip(w.iter()).enumerate() {
        let lo = 2.0 / 3.0 * model.ball_measure(p, 0.5 * net.delta);
        let hi = 2.0 * model.ball_measure(p, net.delta);
        if !(wk > 0.0 && wk >= lo && wk <= hi) {
            return Err(Error::Cubature {
                center: k,
                point: p,
                weight: wk,
                lower: lo,
                upper: hi,
            });
        }
        lower.push(lo);
        upper.push(hi);
    }
    net.weights = Some(w.as_slice().to_vec());
    Ok(CubatureReport {
        weights: w.as_slice().to_vec(),
        band,
        modes,
        moment_residual,
        lower,
        upper,
    })
}

/// `Σ_ξ (1 + ρ(x, ξ)/δ)^{-σ}`.
pub fn packing_sum(grid: &SpectralGrid, net: &NetLevel, x: f64, sigma: f64) -> f64 {
    let model = grid.model();
    net.points
        .iter()
        .map(|&p| (1.0 + model.distance(x, p) / net.delta).powf(-sigma))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSelection {
    pub gamma: f64,
    /// Sampling-ratio bounds per level at the selected `γ`.
    pub bounds: Vec<(f64, f64)>,
    pub nets: Vec<NetLevel>,
}

/// Decreases `γ` geometrically from `gamma0` until, at every level `j`, the
/// net at spacing `delta_of(γ, j)` has sampling bounds on `Σ_{bands[j]}`
/// inside `[1 - tol, 1 + tol]`.
pub fn select_gamma<F: Fn(f64, usize) -> f64>(
    grid: &SpectralGrid,
    bands: &[f64],
    delta_of: F,
    gamma0: f64,
    tol: f64,
    seed: f64,
) -> Result<GammaSelection> {
    let span = match grid.model().kind() {
        crate::model::ModelKind::Torus => 1.0,
        crate::model::ModelKind::Jacobi { .. } => std::f64::consts::PI,
    };
    let spacing = span / grid.len() as f64;
    let mut gamma = gamma0;
    for _ in 0..60 {
        let mut nets = Vec::with_capacity(bands.len());
        let mut bounds = Vec::with_capacity(bands.len());
        let mut ok = true;
        for (j, &band) in bands.iter().enumerate() {
            let delta = delta_of(gamma, j);
            if delta < 2.0 * spacing {
                return Err(Error::Config(format!(
                    "γ = {gamma} needs spacing {delta} below the grid resolution; raise N or the resolution"
                )));
            }
            let net = maximal_net(grid, delta, seed)?;
            let b = sampling_bounds(grid, &net, band);
            ok &= b.0 >= 1.0 - tol && b.1 <= 1.0 + tol;
            bounds.push(b);
            nets.push(net);
            if !ok {
                break;
            }
        }
        if ok {
            return Ok(GammaSelection { gamma, bounds, nets });
        }
        gamma *= 0.85;
    }
    Err(Error::Config("no admissible γ found".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SpectralModel;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn torus(n: usize, q: usize) -> SpectralGrid {
        SpectralGrid::new(SpectralModel::torus(n).unwrap(), q).unwrap()
    }

    #[test]
    fn torus_net_is_equispaced() {
        let g = torus(64, 2050);
        let net = maximal_net(&g, 0.1, 0.0).unwrap();
        assert_eq!(net.len(), 10);
        for m in &net.cell_measures {
            assert_abs_diff_eq!(*m, 0.1, epsilon = 1e-12);
        }
        let big = maximal_net(&g, 0.6, 0.0).unwrap();
        assert_eq!(big.len(), 1);
        assert_abs_diff_eq!(big.cell_measures[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn jacobi_net_follows_angles() {
        let g = SpectralGrid::with_default_resolution(SpectralModel::jacobi(0.0, 0.0, 128).unwrap()).unwrap();
        let net = maximal_net(&g, PI / 8.0, 1.0).unwrap();
        assert_eq!(net.len(), 8);
        for (k, &p) in net.points.iter().enumerate() {
            let theta = p.acos();
            assert!((theta - k as f64 * PI / 8.0).abs() < 0.05, "{k}: {theta}");
        }
    }

    #[test]
    fn mz_and_sampling_for_constants() {
        let g = torus(16, 64);
        let net = maximal_net(&g, 0.13, 0.0).unwrap();
        let mut c = DVector::zeros(17);
        c[0] = 2.0;
        assert_eq!(mz_ratio(&g, &net, &c, 2.0).unwrap(), 0.0);
        assert_abs_diff_eq!(sampling_ratio(&g, &net, &c).unwrap(), 1.0, epsilon = 1e-14);
        let z = DVector::zeros(17);
        assert!(matches!(mz_ratio(&g, &net, &z, 2.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn mz_ratio_shrinks_with_gamma() {
        let g = torus(64, 4002);
        let mut c = DVector::zeros(65);
        c[1] = 1.0;
        let lambda = 2.0 * PI;
        let mut prev = f64::MAX;
        for gamma in [0.4, 0.2, 0.1, 0.05] {
            let net = maximal_net(&g, gamma / lambda, 0.0).unwrap();
            let r = mz_ratio(&g, &net, &c, 2.0).unwrap();
            assert!(r <= prev + 1e-12);
            prev = r;
            if gamma == 0.1 {
                assert!(r <= 1.0 / 3.0);
            }
        }
    }

    #[test]
    fn equispaced_cubature_is_uniform() {
        let g = torus(64, 2050);
        let mut net = maximal_net(&g, 0.1, 0.0).unwrap();
        let rep = cubature_weights(&g, &mut net, 2.0 * PI * 4.0).unwrap();
        for w in &rep.weights {
            assert_abs_diff_eq!(*w, 0.1, epsilon = 1e-12);
        }
        assert!(rep.moment_residual <= 1e-10);
        let mut net0 = maximal_net(&g, 0.07, 0.0).unwrap();
        let rep0 = cubature_weights(&g, &mut net0, 0.0).unwrap();
        for (w, a) in rep0.weights.iter().zip(&net0.cell_measures) {
            assert_abs_diff_eq!(*w, *a, epsilon = 1e-14);
        }
    }

    #[test]
    fn jacobi_cubature_is_exact_and_bracketed() {
        let g = SpectralGrid::with_default_resolution(SpectralModel::jacobi(0.0, 0.0, 128).unwrap()).unwrap();
        let band = 16.0;
        let mut net = maximal_net(&g, 0.4 / band, 1.0).unwrap();
        let rep = cubature_weights(&g, &mut net, band).unwrap();
        assert!(rep.moment_residual <= 1e-10);
        assert!(rep.weights.iter().all(|w| *w > 0.0));
    }

    #[test]
    fn sampling_bounds_contain_random_ratios() {
        let g = SpectralGrid::with_default_resolution(SpectralModel::jacobi(0.0, 0.0, 64).unwrap()).unwrap();
        let net = maximal_net(&g, 0.05, 1.0).unwrap();
        let band = 12.0;
        let (lo, hi) = sampling_bounds(&g, &net, band);
        let k = g.band_end(band);
        for s in 0..20 {
            let c = DVector::from_fn(65, |n, _| if n < k { ((n * 7 + s * 13) % 11) as f64 - 5.0 } else { 0.0 });
            if c.norm() == 0.0 {
                continue;
            }
            let r = sampling_ratio(&g, &net, &c).unwrap();
            assert!(r >= lo - 1e-12 && r <= hi + 1e-12);
        }
    }

    #[test]
    fn packing_sum_is_bounded() {
        let g = torus(64, 2000);
        let mut sums = Vec::new();
        for delta in [0.1, 0.03, 0.01] {
            let net = maximal_net(&g, delta, 0.0).unwrap();
            for x in [0.0, 0.123, 0.5] {
                sums.push(packing_sum(&g, &net, x, 3.0));
            }
        }
        let max = sums.iter().cloned().fold(0.0, f64::max);
        let min = sums.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min < 2.0);
    }
}
