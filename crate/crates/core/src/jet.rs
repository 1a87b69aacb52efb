//! Truncated Taylor series arithmetic for exact derivatives of the cut-offs.
//!
//! A jet of order `K` at `x0` stores `f^{(k)}(x0) / k!` for `k = 0..=K`.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet(pub Vec<f64>);

impl Jet {
    pub fn constant(value: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = value;
        Jet(c)
    }

    /// The identity map `x0 + h` scaled by `slope`.
    pub fn linear(value: f64, slope: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = value;
        if order >= 1 {
            c[1] = slope;
        }
        Jet(c)
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    /// Derivatives `f^{(k)}(x0)`.
    pub fn derivatives(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.0
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k > 0 {
                    fact *= k as f64;
                }
                c * fact
            })
            .collect()
    }

    pub fn scale(&self, s: f64) -> Self {
        Jet(self.0.iter().map(|c| c * s).collect())
    }

    /// Reparametrizes `h -> s h`, i.e. the jet of `x -> f(s x)` at `x0 / s`.
    pub fn dilate(&self, s: f64) -> Self {
        let mut p = 1.0;
        Jet(self
            .0
            .iter()
            .map(|c| {
                let v = c * p;
                p *= s;
                v
            })
            .collect())
    }

    pub fn exp(&self) -> Self {
        let n = self.0.len();
        let f = &self.0;
        let mut g = vec![0.0; n];
        g[0] = f[0].exp();
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * f[j] * g[k - j];
            }
            g[k] = s / k as f64;
        }
        Jet(g)
    }

    /// `f^a` for `f(x0) > 0`; returns the zero jet when `f(x0) == 0`.
    pub fn powf(&self, a: f64) -> Self {
        let n = self.0.len();
        let f = &self.0;
        let mut g = vec![0.0; n];
        if f[0] == 0.0 {
            return Jet(g);
        }
        g[0] = f[0].powf(a);
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..=k {
                s += (a * j as f64 - (k - j) as f64) * f[j] * g[k - j];
            }
            g[k] = s / (k as f64 * f[0]);
        }
        Jet(g)
    }

    pub fn recip(&self) -> Self {
        let n = self.0.len();
        let f = &self.0;
        let mut g = vec![0.0; n];
        g[0] = 1.0 / f[0];
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..=k {
                s += f[j] * g[k - j];
            }
            g[k] = -s / f[0];
        }
        Jet(g)
    }

    /// Logistic function `1 / (1 + e^{-f})`, evaluated without overflow.
    pub fn logistic(&self) -> Self {
        let order = self.order();
        if self.value() <= 0.0 {
            let e = self.exp();
            let denom = &Jet::constant(1.0, order) + &e;
            &e * &denom.recip()
        } else {
            let e = (-self).exp();
            (&Jet::constant(1.0, order) + &e).recip()
        }
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        Jet(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        Jet(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet(self.0.iter().map(|a| -a).collect())
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let n = self.0.len();
        let mut c = vec![0.0; n];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().take(n - i).enumerate() {
                c[i + j] += a * b;
            }
        }
        Jet(c)
    }
}
