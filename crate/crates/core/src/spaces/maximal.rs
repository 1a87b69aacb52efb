//! Discrete maximal operator, Peetre ratios and an imaginary-power multiplier.

use nalgebra::DVector;

use crate::grid::SpectralGrid;

/// `M_r f(x) = sup_{B ∋ x} (|B|^{-1} ∫_B |f|^r)^{1/r}` with balls restricted to
/// runs of consecutive grid nodes (arcs on the torus).
pub fn maximal_function(grid: &SpectralGrid, values: &DVector<f64>, r: f64) -> DVector<f64> {
    let q = grid.len();
    let w = grid.weights();
    let g: Vec<f64> = values.iter().map(|v| v.abs().powf(r)).collect();
    let wrap = grid.model().exact_wave_speed().is_some();
    let mut best = vec![0.0f64; q];
    let mut avg = vec![0.0f64; q];
    for i in 0..q {
        let len = if wrap { q } else { q - i };
        let (mut num, mut den) = (0.0, 0.0);
        for (l, a) in avg.iter_mut().take(len).enumerate() {
            let k = (i + l) % q;
            num += w[k] * g[k];
            den += w[k];
            *a = num / den;
        }
        // Every node covered by the run [i, i+l] sees the best average of
        // runs from i that reach at least that far.
        let mut suffix = 0.0f64;
        for l in (0..len).rev() {
            suffix = suffix.max(avg[l]);
            let k = (i + l) % q;
            best[k] = best[k].max(suffix);
        }
    }
    DVector::from_iterator(q, best.into_iter().map(|v| v.powf(1.0 / r)))
}

/// Largest ratio, over the sampled nodes, of the Peetre maximal function of
/// `|B(·, 1/t)|^γ g` to `M_r` of the same function.
pub fn peetre_constant(
    grid: &SpectralGrid,
    values: &DVector<f64>,
    t: f64,
    gamma: f64,
    r: f64,
    d: f64,
    samples: &[usize],
) -> f64 {
    let model = grid.model();
    let h = grid.ball_measures(1.0 / t).map(|m| m.powf(gamma)).component_mul(values);
    let m = maximal_function(grid, &h, r);
    let nodes = grid.nodes();
    samples
        .iter()
        .map(|&i| {
            let lhs = (0..grid.len())
                .map(|k| h[k].abs() / (1.0 + t * model.distance(nodes[i], nodes[k])).powf(d / r))
                .fold(0.0f64, f64::max);
            if m[i] > 0.0 {
                lhs / m[i]
            } else {
                0.0
            }
        })
        .fold(0.0f64, f64::max)
}

/// `‖m(√L) f‖_p / ‖f‖_p` for `m(u) = (1 + u²)^{iγ}`.
pub fn multiplier_ratio(grid: &SpectralGrid, f: &DVector<f64>, gamma: f64, p: f64) -> f64 {
    let phase = |u: f64| gamma * (1.0 + u * u).ln();
    let re = grid.synthesize(&grid.apply_multiplier(f, |u| phase(u).cos()));
    let im = grid.synthesize(&grid.apply_multiplier(f, |u| phase(u).sin()));
    let modulus = re.zip_map(&im, |a, b| a.hypot(b));
    grid.lp_norm(&modulus, p) / grid.lp_norm(&grid.synthesize(f), p)
}
