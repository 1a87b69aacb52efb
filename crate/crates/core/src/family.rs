//! Test-function generators: random band-limited functions and synthetic
//! functions with prescribed smoothness.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::frames::{CoefficientSet, FrameSystem, Provenance};

/// Standard Gaussian coefficients on the modes with `√λ_n ≤ band`.
pub fn random_band_limited<R: Rng>(freqs: &[f64], band: f64, rng: &mut R) -> DVector<f64> {
    DVector::from_iterator(
        freqs.len(),
        freqs.iter().map(|&f| {
            if f <= band * (1.0 + 1e-14) {
                rng.sample::<f64, _>(StandardNormal)
            } else {
                0.0
            }
        }),
    )
}

/// A family of band-limited functions whose spectra decay like
/// `(1 + √λ)^{-σ}` with `σ` spread over `[0, 2]`, so that norm ratios are
/// probed across smoothness profiles and not only at one shape.
pub fn spectral_family(freqs: &[f64], band: f64, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let sigma = 2.0 * i as f64 / count.max(2).saturating_sub(1) as f64;
            let mut c = random_band_limited(freqs, band, &mut rng);
            for (v, &f) in c.iter_mut().zip(freqs) {
                *v *= (1.0 + f).powf(-sigma);
            }
            c
        })
        .collect()
}

/// Synthetic frame coefficients `a_ξ = ±b^{-j(s + 1/2)}` on the levels below
/// the top one, with signs drawn from `seed`. The synthesized function lies in
/// `Σ_{b^J}` and its `B̃^s_τ` quantity is finite.
pub fn besov_coefficients(frame: &FrameSystem, s: f64, seed: u64) -> CoefficientSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = frame.max_level();
    let levels = frame
        .levels
        .iter()
        .map(|l| {
            let mag = if l.j < top {
                frame.b.powf(-(l.j as f64) * (s + 0.5))
            } else {
                0.0
            };
            (0..l.len())
                .map(|_| {
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    let jitter: f64 = rng.random_range(0.5..1.5);
                    sign * jitter * mag
                })
                .collect()
        })
        .collect();
    CoefficientSet {
        provenance: Provenance::Synthetic,
        levels,
    }
}

/// Test-function descriptor accepted on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    /// Gaussian coefficients on `Σ_band` (band defaults to the frame band).
    Random { seed: u64, band: Option<f64> },
    /// Single eigenfunction `e_n`.
    Eigen { n: usize },
    Constant,
    /// Synthetic function with finite `B̃^s_τ` quantity.
    BesovSample { seed: u64 },
}

impl std::str::FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (head, args) = text.split_once(':').unwrap_or((text, ""));
        let mut seed = 0u64;
        let mut band = None;
        let mut n = None;
        let mut kind = None;
        for part in args.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').unwrap_or((part, ""));
            let bad = || Error::Parameter(format!("bad function argument {part:?}"));
            match k {
                "seed" => seed = v.parse().map_err(|_| bad())?,
                "band" => band = Some(v.parse().map_err(|_| bad())?),
                "n" => n = Some(v.parse().map_err(|_| bad())?),
                "besov" if v.is_empty() => kind = Some("besov"),
                _ => return Err(bad()),
            }
        }
        match (head, kind) {
            ("random", None) => Ok(Self::Random { seed, band }),
            ("eigen", None) => n
                .map(|n| Self::Eigen { n })
                .ok_or_else(|| Error::Parameter("eigen needs n=<index>".into())),
            ("constant", None) => Ok(Self::Constant),
            ("sample", Some("besov")) => Ok(Self::BesovSample { seed }),
            _ => Err(Error::Parameter(format!("unknown function spec {text:?}"))),
        }
    }
}

impl FunctionSpec {
    /// Eigen-coefficients of the described function for a frame. `s` sets the
    /// smoothness of synthetic samples.
    pub fn coefficients(&self, frame: &FrameSystem, freqs: &[f64], s: f64) -> Result<DVector<f64>> {
        let dim = freqs.len();
        match *self {
            Self::Random { seed, band } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok(random_band_limited(freqs, band.unwrap_or(frame.band()), &mut rng))
            }
            Self::Eigen { n } => {
                if n >= dim {
                    return Err(Error::Index {
                        index: n,
                        truncation: dim - 1,
                    });
                }
                let mut c = DVector::zeros(dim);
                c[n] = 1.0;
                Ok(c)
            }
            Self::Constant => {
                let mut c = DVector::zeros(dim);
                c[0] = 1.0;
                Ok(c)
            }
            Self::BesovSample { seed } => frame.synthesize(&besov_coefficients(frame, s, seed)),
        }
    }
}
