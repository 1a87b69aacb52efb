//! Quadrature rules realizing integration against the model measures.
//!
//! The torus uses the equispaced trapezoid rule. The Jacobi interval uses
//! Gauss–Jacobi rules computed from the three-term recurrence of the
//! orthonormal Jacobi polynomials: nodes are eigenvalues of the Jacobi matrix
//! (implicit QL), polished by Newton steps, and weights come from the
//! Christoffel function `1 / sum_n p_n(x)^2`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Nodes and positive weights summing to the total measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Integrates tabulated values `values[i] = f(nodes[i])`.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.weights.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, w)| w * f(x))
            .sum()
    }

    /// Equispaced rule on the unit-circumference torus `[0, 1)`.
    pub fn trapezoid(resolution: usize) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::Config("trapezoid rule needs at least one node".into()));
        }
        let w = 1.0 / resolution as f64;
        Ok(Self {
            nodes: (0..resolution).map(|i| i as f64 / resolution as f64).collect(),
            weights: vec![w; resolution],
        })
    }

    /// Gauss–Jacobi rule for `(1 - x)^alpha (1 + x)^beta dx` on `[-1, 1]`.
    ///
    /// Nodes are returned in decreasing order of `x`, i.e. increasing
    /// `arccos x`, which is the geometric order of the interval model.
    pub fn gauss_jacobi(resolution: usize, alpha: f64, beta: f64) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::Config("Gauss-Jacobi rule needs at least one node".into()));
        }
        let rec = JacobiRecurrence::new(alpha, beta, resolution + 1)?;
        let n = resolution;
        let mut d: Vec<f64> = rec.diag[..n].to_vec();
        let mut e: Vec<f64> = (0..n)
            .map(|i| if i + 1 < n { rec.off[i + 1] } else { 0.0 })
            .collect();
        tridiagonal_eigenvalues(&mut d, &mut e)?;

        let mut buf = vec![0.0; n + 1];
        let mut dbuf = vec![0.0; n + 1];
        let mut nodes = Vec::with_capacity(n);
        for &x0 in &d {
            let mut x = x0;
            for _ in 0..3 {
                rec.eval_with_derivative(x, &mut buf, &mut dbuf);
                let (p, dp) = (buf[n], dbuf[n]);
                if dp == 0.0 || !dp.is_finite() {
                    break;
                }
                let step = p / dp;
                let next = x - step;
                if !(next > -1.0 && next < 1.0) {
                    break;
                }
                x = next;
                if step.abs() <= 1e-16 * x.abs().max(1e-300) {
                    break;
                }
            }
            nodes.push(x);
        }
        nodes.sort_by(|a, b| b.partial_cmp(a).unwrap());

        let mut pbuf = vec![0.0; n];
        let weights = nodes
            .iter()
            .map(|&x| {
                rec.eval_all(x, &mut pbuf);
                1.0 / pbuf.iter().map(|p| p * p).sum::<f64>()
            })
            .collect();
        Ok(Self { nodes, weights })
    }
}

/// Three-term recurrence of the orthonormal Jacobi polynomials
/// `x p_n = a_{n+1} p_{n+1} + b_n p_n + a_n p_{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiRecurrence {
    pub alpha: f64,
    pub beta: f64,
    /// Total mass of the weight, `2^{a+b+1} Γ(a+1)Γ(b+1)/Γ(a+b+2)`.
    pub mass: f64,
    /// `b_n`, n = 0..len.
    pub diag: Vec<f64>,
    /// `a_n`, n = 0..len; `off[0] = 0`.
    pub off: Vec<f64>,
}

impl JacobiRecurrence {
    pub fn new(alpha: f64, beta: f64, len: usize) -> Result<Self> {
        if !(alpha > -1.0 && alpha.is_finite()) || !(beta > -1.0 && beta.is_finite()) {
            return Err(Error::Config(format!(
                "Jacobi parameters must exceed -1 (alpha = {alpha}, beta = {beta})"
            )));
        }
        let ab = alpha + beta;
        let ln_mass = (ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(alpha + 1.0)
            + ln_gamma(beta + 1.0)
            - ln_gamma(ab + 2.0);
        let mut diag = Vec::with_capacity(len);
        let mut off = Vec::with_capacity(len);
        for n in 0..len {
            let nf = n as f64;
            let b = if n == 0 {
                (beta - alpha) / (ab + 2.0)
            } else {
                (beta * beta - alpha * alpha) / ((2.0 * nf + ab) * (2.0 * nf + ab + 2.0))
            };
            diag.push(b);
            let a2 = match n {
                0 => 0.0,
                1 => 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab)),
                _ => {
                    let t = 2.0 * nf + ab;
                    4.0 * nf * (nf + alpha) * (nf + beta) * (nf + ab)
                        / (t * t * (t + 1.0) * (t - 1.0))
                }
            };
            off.push(a2.sqrt());
        }
        Ok(Self {
            alpha,
            beta,
            mass: ln_mass.exp(),
            diag,
            off,
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Fills `out[n] = p_n(x)` for `n < out.len()`.
    pub fn eval_all(&self, x: f64, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        out[0] = 1.0 / self.mass.sqrt();
        if out.len() > 1 {
            out[1] = (x - self.diag[0]) * out[0] / self.off[1];
        }
        for n in 1..out.len().saturating_sub(1) {
            out[n + 1] =
                ((x - self.diag[n]) * out[n] - self.off[n] * out[n - 1]) / self.off[n + 1];
        }
    }

    /// Values and first derivatives of `p_0..p_{len-1}` at `x`.
    pub fn eval_with_derivative(&self, x: f64, p: &mut [f64], dp: &mut [f64]) {
        let len = p.len();
        if len == 0 {
            return;
        }
        p[0] = 1.0 / self.mass.sqrt();
        dp[0] = 0.0;
        if len > 1 {
            p[1] = (x - self.diag[0]) * p[0] / self.off[1];
            dp[1] = p[0] / self.off[1];
        }
        for n in 1..len.saturating_sub(1) {
            let a = self.off[n + 1];
            p[n + 1] = ((x - self.diag[n]) * p[n] - self.off[n] * p[n - 1]) / a;
            dp[n + 1] = ((x - self.diag[n]) * dp[n] + p[n] - self.off[n] * dp[n - 1]) / a;
        }
    }
}

/// Eigenvalues of a symmetric tridiagonal matrix by the implicit QL method.
///
/// `d` holds the diagonal and is overwritten with the eigenvalues; `e[i]`
/// couples rows `i` and `i + 1` (`e[n-1]` is ignored).
pub(crate) fn tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(Error::Config("tridiagonal QL iteration did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// `n`-point Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_interval(n: usize, a: f64, b: f64) -> Result<Quadrature> {
    let base = Quadrature::gauss_jacobi(n, 0.0, 0.0)?;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    Ok(Quadrature {
        nodes: base.nodes.iter().map(|x| mid + half * x).collect(),
        weights: base.weights.iter().map(|w| w * half).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn trapezoid_weights_are_uniform() {
        let q = Quadrature::trapezoid(8).unwrap();
        assert!(q.weights.iter().all(|&w| w == 0.125));
        assert_eq!(q.total_weight(), 1.0);
    }

    #[test]
    fn legendre_two_point_integrates_x_squared() {
        let q = Quadrature::gauss_jacobi(2, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(q.integrate(|x| x * x), 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(q.nodes[0], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn chebyshev_like_weight_has_mass_pi() {
        // (1-x)^{1/2}(1+x)^{-1/2}: substituting x = cos t gives integral of (1 - cos t) = pi
        for n in [1, 3, 10, 41] {
            let q = Quadrature::gauss_jacobi(n, 0.5, -0.5).unwrap();
            assert_abs_diff_eq!(q.total_weight(), std::f64::consts::PI, epsilon = 1e-13);
        }
    }

    #[test]
    fn gauss_jacobi_exact_to_degree_2n_minus_1() {
        // integral of x^k (1-x)^a (1+x)^b against an independent closed form for a = b = 1:
        // int x^2 (1 - x^2) dx = 2/3 - 2/5
        let q = Quadrature::gauss_jacobi(4, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(q.integrate(|x| x * x), 2.0 / 3.0 - 2.0 / 5.0, epsilon = 1e-14);
        assert_abs_diff_eq!(q.integrate(|x| x.powi(7)), 0.0, epsilon = 1e-14);
        let big = Quadrature::gauss_jacobi(600, -0.3, 0.7).unwrap();
        let small = Quadrature::gauss_jacobi(40, -0.3, 0.7).unwrap();
        let f = |x: f64| x.powi(20) - 3.0 * x.powi(5) + 1.0;
        assert_abs_diff_eq!(big.integrate(f), small.integrate(f), epsilon = 1e-12);
    }

    #[test]
    fn nodes_are_strictly_decreasing_inside_interval() {
        let q = Quadrature::gauss_jacobi(300, 0.0, 0.0).unwrap();
        assert!(q.nodes.windows(2).all(|w| w[0] > w[1]));
        assert!(q.nodes.iter().all(|&x| x > -1.0 && x < 1.0));
        assert!(q.weights.iter().all(|&w| w > 0.0));
    }
}
