//! A model space paired with its quadrature and the tabulated eigenbasis.
//!
//! Functions are carried as coefficient vectors in the eigenbasis; grid
//! values are obtained by synthesis and `L^p` norms by quadrature.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::model::{torus_frequency, ModelKind, SpectralModel};
use crate::quadrature::Quadrature;

#[derive(Debug, Clone)]
pub struct SpectralGrid {
    model: SpectralModel,
    quadrature: Quadrature,
    coords: Vec<f64>,
    basis: DMatrix<f64>,
    frequencies: Vec<f64>,
}

impl SpectralGrid {
    pub fn new(model: SpectralModel, resolution: usize) -> Result<Self> {
        let quadrature = model.quadrature(resolution)?;
        let q = quadrature.len();
        let dim = model.dimension();
        let basis = match model.kind() {
            ModelKind::Torus => DMatrix::from_fn(q, dim, |i, n| {
                if n == 0 {
                    return 1.0;
                }
                // Reduce k·i modulo q in integers so the phase is exact.
                let k = torus_frequency(n);
                let phase = 2.0 * PI * ((k * i) % q) as f64 / q as f64;
                if n % 2 == 1 {
                    SQRT_2 * phase.cos()
                } else {
                    SQRT_2 * phase.sin()
                }
            }),
            ModelKind::Jacobi { .. } => {
                let mut m = DMatrix::zeros(q, dim);
                let mut row = vec![0.0; dim];
                for (i, &x) in quadrature.nodes.iter().enumerate() {
                    model.eval_basis(x, &mut row);
                    for (n, v) in row.iter().enumerate() {
                        m[(i, n)] = *v;
                    }
                }
                m
            }
        };
        let coords = quadrature.nodes.iter().map(|&x| model.coordinate(x)).collect();
        let frequencies = model.frequencies();
        Ok(Self {
            model,
            quadrature,
            coords,
            basis,
            frequencies,
        })
    }

    pub fn with_default_resolution(model: SpectralModel) -> Result<Self> {
        let r = model.default_resolution();
        Self::new(model, r)
    }

    pub fn model(&self) -> &SpectralModel {
        &self.model
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quadrature
    }

    pub fn nodes(&self) -> &[f64] {
        &self.quadrature.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.quadrature.weights
    }

    /// Geometric coordinate of each node, ascending.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.quadrature.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quadrature.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.model.dimension()
    }

    /// `Q × (N+1)` matrix of `e_n(x_i)`.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// `√λ_n`.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// Number of leading modes with `√λ_n ≤ band`, i.e. `dim Σ_band`.
    pub fn band_end(&self, band: f64) -> usize {
        self.frequencies.partition_point(|&f| f <= band * (1.0 + 1e-14))
    }

    /// Index range `[lo, hi)` of the modes with `√λ_n` in `[lo_band, hi_band]`.
    pub fn band_range(&self, lo_band: f64, hi_band: f64) -> (usize, usize) {
        let lo = self.frequencies.partition_point(|&f| f < lo_band * (1.0 - 1e-14));
        (lo, self.band_end(hi_band).max(lo))
    }

    pub fn synthesize(&self, coeffs: &DVector<f64>) -> DVector<f64> {
        let hi = last_nonzero(coeffs.as_slice());
        if hi == 0 {
            return DVector::zeros(self.len());
        }
        self.basis.columns(0, hi) * coeffs.rows(0, hi)
    }

    /// Values of `Σ_{n∈[lo, lo+len)} c_n e_n` for a coefficient block.
    pub fn synthesize_block(&self, lo: usize, block: &[f64]) -> DVector<f64> {
        let v = DVector::from_column_slice(block);
        self.basis.columns(lo, block.len()) * v
    }

    /// Eigen-coefficients `c_n = Σ_i w_i f(x_i) e_n(x_i)`.
    pub fn analyze(&self, values: &DVector<f64>) -> DVector<f64> {
        let weighted = values.component_mul(&DVector::from_column_slice(self.weights()));
        self.basis.tr_mul(&weighted)
    }

    pub fn integrate(&self, values: &DVector<f64>) -> f64 {
        self.quadrature.integrate_values(values.as_slice())
    }

    /// Quadrature `L^p` (quasi-)norm; `p = ∞` takes the maximum.
    pub fn lp_norm(&self, values: &DVector<f64>, p: f64) -> f64 {
        lp_norm(self.weights(), values.as_slice(), p)
    }

    pub fn apply_multiplier<F: Fn(f64) -> f64>(&self, coeffs: &DVector<f64>, f: F) -> DVector<f64> {
        DVector::from_iterator(
            coeffs.len(),
            coeffs.iter().zip(&self.frequencies).map(|(c, &s)| if *c == 0.0 { 0.0 } else { c * f(s) }),
        )
    }

    /// Index of the node closest to the point `x`.
    pub fn nearest_node(&self, x: f64) -> usize {
        let c = self.model.coordinate(x);
        let pos = self.coords.partition_point(|&v| v < c);
        let mut best = 0;
        let mut best_d = f64::MAX;
        let q = self.len();
        let candidates = [pos.saturating_sub(1), pos.min(q - 1), 0, q - 1];
        for &i in &candidates {
            let d = self.model.distance(self.nodes()[i], x);
            if d < best_d || (d == best_d && i < best) {
                best = i;
                best_d = d;
            }
        }
        best
    }

    /// `e_n(x)` for all retained modes at an arbitrary point.
    pub fn basis_at(&self, x: f64) -> DVector<f64> {
        let mut out = vec![0.0; self.dimension()];
        self.model.eval_basis(x, &mut out);
        DVector::from_vec(out)
    }

    /// Ball measures `|B(x_i, r)|` at every node.
    pub fn ball_measures(&self, r: f64) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.nodes().iter().map(|&x| self.model.ball_measure(x, r)))
    }
}

pub(crate) fn last_nonzero(c: &[f64]) -> usize {
    c.iter().rposition(|v| *v != 0.0).map_or(0, |i| i + 1)
}

pub fn lp_norm(weights: &[f64], values: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    } else {
        let s: f64 = weights.iter().zip(values).map(|(w, v)| w * v.abs().powf(p)).sum();
        s.powf(1.0 / p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_gram_defect(grid: &SpectralGrid) -> f64 {
        let w = DVector::from_column_slice(grid.weights());
        let e = grid.basis();
        let mut scaled = e.clone();
        for (mut row, wi) in scaled.row_iter_mut().zip(w.iter()) {
            row *= *wi;
        }
        let g = e.tr_mul(&scaled);
        let mut worst: f64 = 0.0;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }

    #[test]
    fn orthonormal_on_torus_and_jacobi() {
        let t = SpectralGrid::new(SpectralModel::torus(64).unwrap(), 130).unwrap();
        assert!(max_gram_defect(&t) <= 1e-12);
        for (a, b) in [(0.0, 0.0), (0.5, -0.5), (1.5, 0.25)] {
            let m = SpectralModel::jacobi(a, b, 64).unwrap();
            let g = SpectralGrid::new(m, 130).unwrap();
            assert!(max_gram_defect(&g) <= 1e-10, "({a}, {b})");
        }
    }

    #[test]
    fn analysis_inverts_synthesis() {
        let g = SpectralGrid::with_default_resolution(SpectralModel::jacobi(0.0, 0.0, 32).unwrap()).unwrap();
        let c = DVector::from_fn(33, |n, _| 1.0 / (1.0 + n as f64));
        let back = g.analyze(&g.synthesize(&c));
        assert!((back - c).amax() < 1e-12);
    }

    #[test]
    fn band_counts_on_torus() {
        let g = SpectralGrid::new(SpectralModel::torus(32).unwrap(), 66).unwrap();
        assert_eq!(g.band_end(0.0), 1);
        assert_eq!(g.band_end(2.0 * PI), 3);
        assert_eq!(g.band_end(2.0 * PI * 3.5), 7);
        assert_eq!(g.band_range(2.0 * PI, 4.0 * PI), (1, 5));
    }

    #[test]
    fn nearest_node_wraps_on_torus() {
        let g = SpectralGrid::new(SpectralModel::torus(4).unwrap(), 10).unwrap();
        assert_eq!(g.nearest_node(0.99), 0);
        assert_eq!(g.nearest_node(0.31), 3);
    }
}
