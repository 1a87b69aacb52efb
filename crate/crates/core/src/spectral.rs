//! Spectral multiplier operators `f(δ√L)` and their kernels.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SpectralGrid;
use crate::model::{ModelKind, SpectralModel};

/// The operator `f(δ√L)` on the truncated space, stored as multiplier values
/// `m_n = f(δ√λ_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelOperator {
    pub multipliers: Vec<f64>,
    pub delta: f64,
    /// `f(0)`.
    pub value_at_zero: f64,
    /// Largest `√λ_n` with a nonzero multiplier, `None` if the top mode is active.
    pub band: Option<f64>,
}

pub fn kernel_operator<F: Fn(f64) -> f64>(
    model: &SpectralModel,
    f: F,
    delta: f64,
) -> Result<KernelOperator> {
    if !(delta > 0.0) {
        return Err(Error::Parameter(format!("delta must be positive, got {delta}")));
    }
    let freqs = model.frequencies();
    let mut multipliers = Vec::with_capacity(freqs.len());
    for s in &freqs {
        let at = delta * s;
        let v = f(at);
        if !v.is_finite() {
            return Err(Error::Domain { at });
        }
        multipliers.push(v);
    }
    let value_at_zero = f(0.0);
    if !value_at_zero.is_finite() {
        return Err(Error::Domain { at: 0.0 });
    }
    let band = match multipliers.iter().rposition(|m| *m != 0.0) {
        Some(i) if i + 1 == multipliers.len() => None,
        Some(i) => Some(freqs[i]),
        None => Some(0.0),
    };
    Ok(KernelOperator {
        multipliers,
        delta,
        value_at_zero,
        band,
    })
}

impl KernelOperator {
    /// The operator with multipliers `m_n`, used for products and identities.
    pub fn from_multipliers(multipliers: Vec<f64>, delta: f64, value_at_zero: f64, freqs: &[f64]) -> Self {
        let band = match multipliers.iter().rposition(|m| *m != 0.0) {
            Some(i) if i + 1 == multipliers.len() => None,
            Some(i) => Some(freqs[i]),
            None => Some(0.0),
        };
        Self {
            multipliers,
            delta,
            value_at_zero,
            band,
        }
    }

    /// Number of leading modes that carry nonzero multipliers.
    pub fn active_len(&self) -> usize {
        crate::grid::last_nonzero(&self.multipliers)
    }

    pub fn kernel(&self, model: &SpectralModel, x: f64, y: f64) -> f64 {
        let n = self.active_len();
        let mut ex = vec![0.0; n];
        let mut ey = vec![0.0; n];
        model.eval_basis(x, &mut ex);
        model.eval_basis(y, &mut ey);
        (0..n).map(|i| self.multipliers[i] * (ex[i] * ey[i])).sum()
    }

    /// `y ↦ K(x, y)` on the grid nodes.
    pub fn kernel_row(&self, grid: &SpectralGrid, x: f64) -> DVector<f64> {
        let n = self.active_len();
        if n == 0 {
            return DVector::zeros(grid.len());
        }
        let mut ex = vec![0.0; n];
        grid.model().eval_basis(x, &mut ex);
        let coeffs: Vec<f64> = (0..n).map(|i| self.multipliers[i] * ex[i]).collect();
        grid.synthesize_block(0, &coeffs)
    }

    /// Kernel row at a grid node, using the tabulated basis.
    pub fn kernel_row_at_node(&self, grid: &SpectralGrid, node: usize) -> DVector<f64> {
        let n = self.active_len();
        if n == 0 {
            return DVector::zeros(grid.len());
        }
        let b = grid.basis();
        let coeffs: Vec<f64> = (0..n).map(|i| self.multipliers[i] * b[(node, i)]).collect();
        grid.synthesize_block(0, &coeffs)
    }

    pub fn apply(&self, coeffs: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            coeffs.len(),
            coeffs.iter().zip(&self.multipliers).map(|(c, m)| c * m),
        )
    }

    /// Applies the operator to grid values: analysis, multiplication, synthesis.
    pub fn apply_values(&self, grid: &SpectralGrid, values: &DVector<f64>) -> DVector<f64> {
        grid.synthesize(&self.apply(&grid.analyze(values)))
    }

    /// The composition `f₁(δ√L) f₂(δ√L)`.
    pub fn compose(&self, other: &KernelOperator, freqs: &[f64]) -> Result<KernelOperator> {
        if self.multipliers.len() != other.multipliers.len() {
            return Err(Error::Parameter("operators live on different truncations".into()));
        }
        let m = self
            .multipliers
            .iter()
            .zip(&other.multipliers)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Self::from_multipliers(
            m,
            self.delta,
            self.value_at_zero * other.value_at_zero,
            freqs,
        ))
    }
}

/// Sample nodes spread across the grid, used as kernel centers.
pub fn sample_nodes(grid: &SpectralGrid, count: usize) -> Vec<usize> {
    let q = grid.len();
    let count = count.clamp(1, q);
    (0..count).map(|i| i * q / count).collect()
}

/// `max_x |∫ K(x, y) dμ(y) − f(0)|` over sampled nodes.
pub fn markov_residual(op: &KernelOperator, grid: &SpectralGrid) -> f64 {
    sample_nodes(grid, 17)
        .into_iter()
        .map(|i| (grid.integrate(&op.kernel_row_at_node(grid, i)) - op.value_at_zero).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvelopeForm {
    /// `c (1 + ρ/δ)^{-σ}`.
    Polynomial,
    /// `c exp(-κ (ρ/δ)^β)`.
    SubExponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub form: EnvelopeForm,
    pub c: f64,
    /// `σ` for the polynomial form, `κ` for the sub-exponential one.
    pub rate: f64,
    pub beta: f64,
    pub r_squared: f64,
    /// Orders of magnitude spanned by the fitted points.
    pub decades: f64,
    pub points: usize,
    /// Set when a polynomial fit decays too slowly to be integrable against
    /// the doubling measure (`σ ≤ d + 1`).
    pub poor_decay: bool,
}

/// A magnitude sample at scaled distance `ρ/δ`, already multiplied by the
/// volume factor `√(|B(x,δ)||B(y,δ)|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeSample {
    pub scaled_distance: f64,
    pub magnitude: f64,
}

/// Decreasing upper envelope: the samples that dominate every sample farther out.
pub fn upper_envelope(samples: &[EnvelopeSample], min_distance: f64, floor: f64) -> Vec<EnvelopeSample> {
    let mut pts: Vec<EnvelopeSample> = samples
        .iter()
        .copied()
        .filter(|s| s.scaled_distance >= min_distance && s.magnitude > floor)
        .collect();
    pts.sort_by(|a, b| {
        a.scaled_distance
            .partial_cmp(&b.scaled_distance)
            .unwrap()
            .then(b.magnitude.partial_cmp(&a.magnitude).unwrap())
    });
    let mut hull = Vec::new();
    let mut best = f64::MIN;
    for s in pts.into_iter().rev() {
        if s.magnitude > best {
            best = s.magnitude;
            hull.push(s);
        }
    }
    hull.reverse();
    hull
}

/// Least-squares fit of the envelope on log-magnitudes of the upper envelope
/// of `samples`, excluding `ρ/δ < 2` and values below `1e-12` of the peak.
pub fn fit_envelope(samples: &[EnvelopeSample], form: EnvelopeForm, beta: f64, d_hat: f64) -> Result<Envelope> {
    let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.magnitude));
    if peak <= 0.0 {
        return Err(Error::Fit("kernel vanishes identically".into()));
    }
    let hull = upper_envelope(samples, 2.0, 1e-12 * peak);
    if hull.len() < 4 {
        return Err(Error::Fit(format!(
            "only {} envelope points above the noise floor",
            hull.len()
        )));
    }
    let xs: Vec<f64> = hull
        .iter()
        .map(|s| match form {
            EnvelopeForm::Polynomial => (1.0 + s.scaled_distance).ln(),
            EnvelopeForm::SubExponential => s.scaled_distance.powf(beta),
        })
        .collect();
    let ys: Vec<f64> = hull.iter().map(|s| s.magnitude.ln()).collect();
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    let lo = hull.iter().fold(f64::MAX, |m, s| m.min(s.magnitude));
    let hi = hull.iter().fold(0.0f64, |m, s| m.max(s.magnitude));
    let rate = -slope;
    Ok(Envelope {
        form,
        c: intercept.exp(),
        rate,
        beta,
        r_squared: r2,
        decades: (hi / lo).log10(),
        points: hull.len(),
        poor_decay: form == EnvelopeForm::Polynomial && rate <= d_hat + 1.0,
    })
}

/// Ordinary least squares `y ≈ slope·x + intercept`, with `R²`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, intercept, r2)
}

/// Smallest `c` with `v ≤ c exp(-κ x^β)` over all samples.
pub fn sup_constant(samples: &[EnvelopeSample], kappa: f64, beta: f64) -> f64 {
    samples
        .iter()
        .map(|s| s.magnitude * (kappa * s.scaled_distance.powf(beta)).exp())
        .fold(0.0, f64::max)
}

/// Normalized kernel magnitudes `|K(x,y)| √(|B(x,δ)||B(y,δ)|)` against `ρ/δ`
/// for `x` at a spread of nodes and `y` over the whole grid.
pub fn kernel_samples(op: &KernelOperator, grid: &SpectralGrid, centers: usize) -> Vec<EnvelopeSample> {
    let model = grid.model();
    let delta = op.delta;
    let balls = grid.ball_measures(delta);
    let mut out = Vec::new();
    for i in sample_nodes(grid, centers) {
        let row = op.kernel_row_at_node(grid, i);
        let x = grid.nodes()[i];
        for (k, &y) in grid.nodes().iter().enumerate() {
            out.push(EnvelopeSample {
                scaled_distance: model.distance(x, y) / delta,
                magnitude: row[k].abs() * (balls[i] * balls[k]).sqrt(),
            });
        }
    }
    out
}

/// Fits the declared envelope to the kernel of `op`.
///
/// For the sub-exponential form `beta` is the exponent `1 - ε`.
pub fn localization_report(
    op: &KernelOperator,
    grid: &SpectralGrid,
    form: EnvelopeForm,
    beta: f64,
) -> Result<Envelope> {
    let centers = match grid.model().kind() {
        ModelKind::Torus => 3,
        ModelKind::Jacobi { .. } => 9,
    };
    let samples = kernel_samples(op, grid, centers);
    fit_envelope(&samples, form, beta, grid.model().dim_d())
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `sinc(Aλ/8)^8`: an even function whose Fourier transform is supported in
/// `[-A, A]` and which decays like `λ^{-8}`.
pub fn band_limited_multiplier(a: f64) -> impl Fn(f64) -> f64 {
    move |l| sinc(a * l / 8.0).powi(8)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    /// `max |K(x, y)|` over pairs with `ρ(x, y) > radius`.
    pub outside: f64,
    /// `max |K(x, x)|`.
    pub diagonal: f64,
    pub radius: f64,
}

impl ConeReport {
    pub fn relative(&self) -> f64 {
        self.outside / self.diagonal
    }
}

/// Kernel magnitude outside the ball of the given radius, relative to the diagonal.
pub fn cone_report(op: &KernelOperator, grid: &SpectralGrid, radius: f64) -> ConeReport {
    let model = grid.model();
    let mut outside: f64 = 0.0;
    let mut diagonal: f64 = 0.0;
    for i in sample_nodes(grid, 9) {
        let row = op.kernel_row_at_node(grid, i);
        let x = grid.nodes()[i];
        diagonal = diagonal.max(row[i].abs());
        for (k, &y) in grid.nodes().iter().enumerate() {
            if model.distance(x, y) > radius {
                outside = outside.max(row[k].abs());
            }
        }
    }
    ConeReport {
        outside,
        diagonal,
        radius,
    }
}

/// Residual of finite propagation speed for `f = sinc(A·/8)^8` at scale `δ`:
/// the kernel beyond `c̃ δ A (1 + margin)` relative to the diagonal, where
/// `c̃` is the exact wave speed when known and the estimated one otherwise.
pub fn finite_speed_residual(grid: &SpectralGrid, a: f64, delta: f64, margin: f64) -> Result<ConeReport> {
    let op = kernel_operator(grid.model(), band_limited_multiplier(a), delta)?;
    let speed = match grid.model().exact_wave_speed() {
        Some(c) => c,
        None => estimate_wave_speed(grid, a, delta, 1e-6)?,
    };
    Ok(cone_report(&op, grid, speed * delta * a * (1.0 + margin)))
}

/// Smallest `c` (on a 0.01 grid) for which the kernel of `sinc(A·/8)^8` at
/// scale `δ` stays below `tol` relative to the diagonal beyond `c δ A`.
pub fn estimate_wave_speed(grid: &SpectralGrid, a: f64, delta: f64, tol: f64) -> Result<f64> {
    let op = kernel_operator(grid.model(), band_limited_multiplier(a), delta)?;
    let model = grid.model();
    // Record, for each sampled pair, the distance and relative magnitude once.
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    let mut diag: f64 = 0.0;
    for i in sample_nodes(grid, 9) {
        let row = op.kernel_row_at_node(grid, i);
        diag = diag.max(row[i].abs());
        let x = grid.nodes()[i];
        for (k, &y) in grid.nodes().iter().enumerate() {
            pairs.push((model.distance(x, y), row[k].abs()));
        }
    }
    pairs.sort_by(|p, q| q.0.partial_cmp(&p.0).unwrap());
    // Running maximum from the far end gives the residual beyond any radius.
    let mut speed = model.diam() / (delta * a);
    let mut worst: f64 = 0.0;
    let mut idx = 0;
    let mut c = speed;
    while c > 0.0 {
        let radius = c * delta * a;
        while idx < pairs.len() && pairs[idx].0 > radius {
            worst = worst.max(pairs[idx].1);
            idx += 1;
        }
        if worst > tol * diag {
            break;
        }
        speed = c;
        c -= 0.01;
    }
    Ok(speed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComposeReport {
    pub kappa: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub c_product: f64,
    pub c_natural_hat: f64,
    pub product_envelope: Envelope,
    pub triangle_triples: usize,
    pub triangle_violations: usize,
}

/// Checks that the product of two operators stays in the same
/// sub-exponential class and measures the ratio of sup-bounding constants.
pub fn compose_check(
    op1: &KernelOperator,
    op2: &KernelOperator,
    grid: &SpectralGrid,
    beta: f64,
    seed: u64,
) -> Result<ComposeReport> {
    if (op1.delta - op2.delta).abs() > 1e-15 * op1.delta {
        return Err(Error::Parameter("operators must share δ".into()));
    }
    let product = op1.compose(op2, grid.frequencies())?;
    let centers = match grid.model().kind() {
        ModelKind::Torus => 3,
        ModelKind::Jacobi { .. } => 9,
    };
    let d = grid.model().dim_d();
    let s1 = kernel_samples(op1, grid, centers);
    let s2 = kernel_samples(op2, grid, centers);
    let sp = kernel_samples(&product, grid, centers);
    let e1 = fit_envelope(&s1, EnvelopeForm::SubExponential, beta, d)?;
    let e2 = fit_envelope(&s2, EnvelopeForm::SubExponential, beta, d)?;
    let ep = fit_envelope(&sp, EnvelopeForm::SubExponential, beta, d)?;
    let kappa = e1.rate.min(e2.rate).max(0.0);
    let c1 = sup_constant(&s1, kappa, beta);
    let c2 = sup_constant(&s2, kappa, beta);
    let cp = sup_constant(&sp, kappa, beta);
    let (triples, violations) = triangle_power_check(grid.model(), beta, 10_000, seed);
    Ok(ComposeReport {
        kappa,
        beta,
        c1,
        c2,
        c_product: cp,
        c_natural_hat: cp / (c1 * c2),
        product_envelope: ep,
        triangle_triples: triples,
        triangle_violations: violations,
    })
}

/// Counts violations of `ρ(x,u)^β + ρ(y,u)^β ≥ ρ(x,y)^β` on random triples.
pub fn triangle_power_check(model: &SpectralModel, beta: f64, triples: usize, seed: u64) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| match model.kind() {
        ModelKind::Torus => rng.random::<f64>(),
        ModelKind::Jacobi { .. } => rng.random_range(-1.0..=1.0),
    };
    let mut violations = 0;
    for _ in 0..triples {
        let (x, y, u) = (point(&mut rng), point(&mut rng), point(&mut rng));
        let lhs = model.distance(x, u).powf(beta) + model.distance(y, u).powf(beta);
        if lhs < model.distance(x, y).powf(beta) - 1e-12 {
            violations += 1;
        }
    }
    (triples, violations)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NikolskiiReport {
    pub bands: Vec<f64>,
    /// `max ‖g‖_∞ / ‖g‖_p` observed on `Σ_band`.
    pub ratios: Vec<f64>,
    pub exponent: f64,
    pub r_squared: f64,
}

/// Observed `‖g‖_∞ / ‖g‖_p` on `Σ_band` for each band and the log-log slope.
///
/// Candidates are the projection kernels `Σ_{√λ_n ≤ band} e_n(x₀) e_n` at a few
/// centers (extremal for `p = 2`) and random band-limited functions.
pub fn nikolskii_report(grid: &SpectralGrid, p: f64, bands: &[f64], trials: usize, seed: u64) -> NikolskiiReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = grid.basis();
    let ratios: Vec<f64> = bands
        .iter()
        .map(|&band| {
            let modes = grid.band_end(band);
            let ratio = |c: &DVector<f64>| {
                let v = grid.synthesize(c);
                grid.lp_norm(&v, f64::INFINITY) / grid.lp_norm(&v, p)
            };
            let mut best: f64 = 0.0;
            for i in sample_nodes(grid, 5) {
                let c = DVector::from_fn(grid.dimension(), |n, _| if n < modes { basis[(i, n)] } else { 0.0 });
                best = best.max(ratio(&c));
            }
            for _ in 0..trials {
                let c = crate::family::random_band_limited(grid.frequencies(), band, &mut rng);
                best = best.max(ratio(&c));
            }
            best
        })
        .collect();
    let xs: Vec<f64> = bands.iter().map(|b| b.ln()).collect();
    let ys: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
    let (exponent, _, r_squared) = linear_fit(&xs, &ys);
    NikolskiiReport {
        bands: bands.to_vec(),
        ratios,
        exponent,
        r_squared,
    }
}

/// Range over sampled centers and scales of
/// `‖θ(δ√L)(x, ·)‖_p / |B(x, δ)|^{1/p - 1}`.
pub fn kernel_norm_band<F: Fn(f64) -> f64 + Copy>(
    grid: &SpectralGrid,
    theta: F,
    deltas: &[f64],
    p: f64,
    centers: usize,
) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (f64::MAX, f64::MIN);
    for &delta in deltas {
        let op = kernel_operator(grid.model(), theta, delta)?;
        let balls = grid.ball_measures(delta);
        for i in sample_nodes(grid, centers) {
            let row = op.kernel_row_at_node(grid, i);
            let r = grid.lp_norm(&row, p) / balls[i].powf(1.0 / p - 1.0);
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoff::{make_cutoff, CutoffKind};
    use approx::assert_abs_diff_eq;

    fn torus_grid(n: usize) -> SpectralGrid {
        SpectralGrid::with_default_resolution(SpectralModel::torus(n).unwrap()).unwrap()
    }

    #[test]
    fn identity_multiplier_gives_reproducing_kernel() {
        let g = torus_grid(16);
        let op = kernel_operator(g.model(), |_| 1.0, 0.3).unwrap();
        let (x, y) = (0.13, 0.71);
        let mut ex = vec![0.0; 17];
        let mut ey = vec![0.0; 17];
        g.model().eval_basis(x, &mut ex);
        g.model().eval_basis(y, &mut ey);
        let direct: f64 = ex.iter().zip(&ey).map(|(a, b)| a * b).sum();
        assert_abs_diff_eq!(op.kernel(g.model(), x, y), direct, epsilon = 1e-13);
        assert_eq!(op.band, None);
    }

    #[test]
    fn cutoff_acts_as_identity_on_low_modes() {
        let g = torus_grid(32);
        let phi = make_cutoff(CutoffKind::TypeA, 2.0, 1.0).unwrap();
        let op = kernel_operator(g.model(), |u| phi.eval(u), 0.05).unwrap();
        // e_5 has frequency 2π·3, and 0.05·6π < 1.
        let mut c = DVector::zeros(33);
        c[5] = 1.0;
        let values = g.synthesize(&c);
        let out = op.apply_values(&g, &values);
        assert!((out - values).amax() < 1e-12);
    }

    #[test]
    fn domain_errors_are_reported() {
        let m = SpectralModel::torus(4).unwrap();
        let err = kernel_operator(&m, |u| if u > 1.0 { f64::NAN } else { 1.0 }, 0.5).unwrap_err();
        assert!(matches!(err, Error::Domain { .. }));
    }

    #[test]
    fn markov_identity_for_three_multipliers() {
        let phi = make_cutoff(CutoffKind::TypeA, 2.0, 1.0).unwrap();
        let psi = make_cutoff(CutoffKind::TypeB, 2.0, 1.0).unwrap();
        for g in [
            torus_grid(64),
            SpectralGrid::with_default_resolution(SpectralModel::jacobi(0.0, 0.0, 64).unwrap()).unwrap(),
        ] {
            let a = kernel_operator(g.model(), |u| phi.eval(u), 0.05).unwrap();
            let b = kernel_operator(g.model(), |u| psi.eval(u), 0.05).unwrap();
            let c = kernel_operator(g.model(), |u| u * u, 0.05).unwrap();
            assert!(markov_residual(&a, &g) <= 1e-10);
            assert!(markov_residual(&b, &g) <= 1e-10);
            assert!(markov_residual(&c, &g) <= 1e-10);
        }
    }

    #[test]
    fn kernel_is_symmetric() {
        let g = SpectralGrid::with_default_resolution(SpectralModel::jacobi(0.5, 1.0, 40).unwrap()).unwrap();
        let psi = make_cutoff(CutoffKind::TypeB, 2.0, 0.5).unwrap();
        let op = kernel_operator(g.model(), |u| psi.eval(u), 0.1).unwrap();
        for (x, y) in [(0.3, -0.8), (0.99, 0.1), (-0.5, -0.49)] {
            assert_eq!(op.kernel(g.model(), x, y), op.kernel(g.model(), y, x));
        }
    }

    #[test]
    fn hard_truncation_flags_poor_decay() {
        let g = torus_grid(128);
        let op = kernel_operator(g.model(), |_| 1.0, 1.0 / 500.0).unwrap();
        let env = localization_report(&op, &g, EnvelopeForm::Polynomial, 1.0).unwrap();
        assert!(env.poor_decay, "sigma = {}", env.rate);
    }

    #[test]
    fn smooth_cutoff_localizes() {
        let g = torus_grid(512);
        let phi = make_cutoff(CutoffKind::TypeA, 2.0, 0.5).unwrap();
        let op = kernel_operator(g.model(), |u| phi.eval(u), 0.02).unwrap();
        let env = localization_report(&op, &g, EnvelopeForm::SubExponential, 0.5).unwrap();
        assert!(env.rate > 0.0);
    }

    #[test]
    fn finite_speed_on_torus() {
        let g = torus_grid(512);
        let r = finite_speed_residual(&g, 1.0, 0.2, 0.25).unwrap();
        assert!(r.relative() <= 1e-6, "{r:?}");
        let op = kernel_operator(g.model(), band_limited_multiplier(1.0), 0.2).unwrap();
        let inner = cone_report(&op, &g, 0.1);
        assert!(inner.outside > 1e3 * r.outside);
        let gauss = kernel_operator(g.model(), |l| (-l * l).exp(), 0.2).unwrap();
        assert!(cone_report(&gauss, &g, 0.25).relative() > 1e-3);
    }

    #[test]
    fn jacobi_wave_speed_is_near_one() {
        let g = SpectralGrid::with_default_resolution(SpectralModel::jacobi(0.0, 0.0, 256).unwrap()).unwrap();
        let c = estimate_wave_speed(&g, 1.0, 0.3, 1e-6).unwrap();
        assert!(c > 0.8 && c < 1.3, "c = {c}");
    }

    #[test]
    fn triangle_power_inequality_holds() {
        let m = SpectralModel::torus(4).unwrap();
        assert_eq!(triangle_power_check(&m, 0.5, 10_000, 3).1, 0);
        let j = SpectralModel::jacobi(0.0, 0.0, 4).unwrap();
        assert_eq!(triangle_power_check(&j, 0.7, 10_000, 4).1, 0);
        // boundary case with ρ(x,u) = ρ(y,u) = 1
        let lhs = 2.0f64;
        assert!(lhs >= 2f64.powf(0.5));
    }

    #[test]
    fn composing_with_identity_is_exact() {
        let g = torus_grid(64);
        let psi = make_cutoff(CutoffKind::TypeB, 2.0, 1.0).unwrap();
        let op = kernel_operator(g.model(), |u| psi.eval(u), 0.05).unwrap();
        let id = kernel_operator(g.model(), |_| 1.0, 0.05).unwrap();
        let prod = op.compose(&id, g.frequencies()).unwrap();
        assert_eq!(prod.multipliers, op.multipliers);
    }
    #[test]
    fn nikolskii_exponent_tracks_one_over_p() {
        let g = torus_grid(512);
        let two_pi = 2.0 * std::f64::consts::PI;
        let bands: Vec<f64> = (1..=6).map(|k| two_pi * 2f64.powi(k)).collect();
        for p in [2.0, 4.0] {
            let r = nikolskii_report(&g, p, &bands, 10, 1);
            assert!((r.exponent - 1.0 / p).abs() < 0.1, "p {p}: {}", r.exponent);
        }
    }

    #[test]
    fn kernel_norm_stays_in_a_band() {
        let g = torus_grid(512);
        let phi = make_cutoff(CutoffKind::TypeA, 2.0, 0.5).unwrap();
        let deltas = [0.08, 0.04, 0.02, 0.01];
        for p in [1.0, 2.0, 4.0] {
            let (lo, hi) = kernel_norm_band(&g, |u| phi.eval(u), &deltas, p, 5).unwrap();
            assert!(lo > 0.0 && hi / lo < 2.0, "p {p}: [{lo}, {hi}]");
        }
    }
}

