//! Verification suites over a saved frame. Every check becomes one CSV row
//! `{suite, item, value, lower, upper, pass}`.

use heatframes::cutoff::{Cutoff, CutoffKind};
use heatframes::family::random_band_limited;
use heatframes::frames::load_frame;
use heatframes::nets::{cubature_weights, sampling_ratio};
use heatframes::spectral::{kernel_operator, localization_report, markov_residual, EnvelopeForm};
use heatframes::{FrameSystem, FrameVariant, SpectralGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::output::{num, summary_path, write_csv, write_json};
use crate::{Status, Suite, VerifyArgs};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub item: String,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

impl Check {
    fn new(suite: &'static str, item: impl Into<String>, value: f64, lower: f64, upper: f64) -> Self {
        Self {
            suite,
            item: item.into(),
            value,
            lower,
            upper,
            pass: value >= lower && value <= upper,
        }
    }
}

#[derive(Serialize)]
struct Summary {
    frame: String,
    suites: Vec<&'static str>,
    checks: usize,
    skipped: Vec<String>,
    failures: Vec<Check>,
    pass: bool,
}

fn frame_bounds(frame: &FrameSystem, trials: usize, seed: u64, out: &mut Vec<Check>) {
    let freqs = frame_freqs(frame);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = match frame.variant {
        FrameVariant::Tight => (1.0 - 1e-9, 1.0 + 1e-9),
        _ => (0.25 * 0.95, 2.0 * 1.05),
    };
    for t in 0..trials {
        let f = random_band_limited(&freqs, frame.band(), &mut rng);
        let e: f64 = frame.analyze_primal(&f).iter().map(|a| a * a).sum();
        out.push(Check::new("frame-bounds", format!("trial {t}"), e / f.norm_squared(), lo, hi));
    }
}

fn frame_freqs(frame: &FrameSystem) -> Vec<f64> {
    heatframes::SpectralModel::new(frame.model, frame.truncation)
        .map(|m| m.frequencies())
        .unwrap_or_default()
}

fn reconstruction(frame: &FrameSystem, trials: usize, seed: u64, out: &mut Vec<Check>) -> heatframes::Result<()> {
    let freqs = frame_freqs(frame);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials {
        let f = random_band_limited(&freqs, frame.band(), &mut rng);
        let g = frame.synthesize(&frame.analyze_dual(&f)?)?;
        out.push(Check::new("reconstruction", format!("trial {t}"), (&f - &g).norm() / f.norm(), 0.0, 1e-8));
    }
    Ok(())
}

fn sampling(frame: &FrameSystem, grid: &SpectralGrid, trials: usize, seed: u64, out: &mut Vec<Check>) -> heatframes::Result<()> {
    let a = grid.model().polynomial_factor();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for l in &frame.levels {
        let band = match frame.variant {
            FrameVariant::Tight => a * frame.b.powi(l.j as i32 + 1),
            _ => frame.b.powi(l.j as i32 + 2),
        };
        let (mut lo, mut hi) = (f64::MAX, f64::MIN);
        for _ in 0..trials {
            let f = random_band_limited(grid.frequencies(), band, &mut rng);
            let r = sampling_ratio(grid, &l.net, &f)?;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        out.push(Check::new("sampling", format!("level {} min", l.j), lo, 0.9, 1.1));
        out.push(Check::new("sampling", format!("level {} max", l.j), hi, 0.9, 1.1));
    }
    Ok(())
}

fn cubature(frame: &FrameSystem, grid: &SpectralGrid, out: &mut Vec<Check>) {
    let a = grid.model().polynomial_factor();
    for l in &frame.levels {
        let mut net = l.net.clone();
        match cubature_weights(grid, &mut net, a * frame.b.powi(l.j as i32 + 1)) {
            Ok(rep) => {
                out.push(Check::new("cubature", format!("level {} moment residual", l.j), rep.moment_residual, 0.0, 1e-10));
                let margin = rep
                    .weights
                    .iter()
                    .zip(rep.lower.iter().zip(&rep.upper))
                    .map(|(w, (lo, hi))| (w / lo).min(hi / w))
                    .fold(f64::INFINITY, f64::min);
                out.push(Check::new("cubature", format!("level {} bracket margin", l.j), margin, 1.0, f64::INFINITY));
            }
            Err(e) => out.push(Check {
                suite: "cubature",
                item: format!("level {}: {e}", l.j),
                value: f64::NAN,
                lower: 0.0,
                upper: 1e-10,
                pass: false,
            }),
        }
    }
}

fn markov(frame: &FrameSystem, grid: &SpectralGrid, out: &mut Vec<Check>) -> heatframes::Result<()> {
    let top = *grid.frequencies().last().unwrap_or(&1.0);
    let delta = 4.0 * frame.b / top;
    let a = Cutoff::new(CutoffKind::TypeA, frame.b, frame.epsilon)?;
    let b = Cutoff::new(CutoffKind::TypeB, frame.b, frame.epsilon)?;
    let ops = [
        ("Phi", kernel_operator(grid.model(), |u| a.eval(u), delta)?),
        ("Psi", kernel_operator(grid.model(), |u| b.eval(u), delta)?),
        ("lambda^2 Phi", kernel_operator(grid.model(), |u| u * u * a.eval(u), delta)?),
    ];
    for (name, op) in ops {
        out.push(Check::new("markov", name, markov_residual(&op, grid), 0.0, 1e-10));
    }
    Ok(())
}

fn localization(frame: &FrameSystem, grid: &SpectralGrid, out: &mut Vec<Check>) -> heatframes::Result<()> {
    let top = *grid.frequencies().last().unwrap_or(&1.0);
    let phi = Cutoff::new(CutoffKind::TypeA, frame.b, frame.epsilon)?;
    let op = kernel_operator(grid.model(), |u| phi.eval(u), 2.0 / top)?;
    let env = localization_report(&op, grid, EnvelopeForm::SubExponential, 1.0 - frame.epsilon)?;
    out.push(Check::new("localization", "kappa", env.rate, f64::MIN_POSITIVE, f64::INFINITY));
    out.push(Check::new("localization", "r_squared", env.r_squared, 0.95, 1.0));
    out.push(Check::new("localization", "decades", env.decades, 4.0, f64::INFINITY));
    Ok(())
}

pub fn run(a: &VerifyArgs) -> anyhow::Result<Status> {
    let frame = load_frame(&a.frame)?;
    let grid = frame.grid()?;
    let suites: Vec<Suite> = if a.suite.contains(&Suite::All) {
        vec![
            Suite::FrameBounds,
            Suite::Reconstruction,
            Suite::Sampling,
            Suite::Cubature,
            Suite::Markov,
            Suite::Localization,
        ]
    } else {
        a.suite.clone()
    };
    let mut checks = Vec::new();
    let mut skipped = Vec::new();
    let mut names = Vec::new();
    for s in suites {
        match s {
            Suite::FrameBounds => frame_bounds(&frame, a.trials, a.seed, &mut checks),
            Suite::Reconstruction if frame.has_dual() => reconstruction(&frame, a.trials.min(20), a.seed, &mut checks)?,
            Suite::Reconstruction => skipped.push("reconstruction: frame has no dual".to_string()),
            Suite::Sampling => sampling(&frame, &grid, a.trials, a.seed, &mut checks)?,
            Suite::Cubature if frame.variant == FrameVariant::Tight => cubature(&frame, &grid, &mut checks),
            Suite::Cubature => skipped.push("cubature: only tight frames carry cubature weights".to_string()),
            Suite::Markov => markov(&frame, &grid, &mut checks)?,
            Suite::Localization => localization(&frame, &grid, &mut checks)?,
            Suite::All => unreachable!(),
        }
        names.push(match s {
            Suite::FrameBounds => "frame-bounds",
            Suite::Reconstruction => "reconstruction",
            Suite::Sampling => "sampling",
            Suite::Cubature => "cubature",
            Suite::Markov => "markov",
            Suite::Localization => "localization",
            Suite::All => "all",
        });
    }
    for s in &skipped {
        log::warn!("skipped {s}");
    }
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            vec![
                c.suite.to_string(),
                c.item.clone(),
                num(c.value),
                num(c.lower),
                num(c.upper),
                c.pass.to_string(),
            ]
        })
        .collect();
    write_csv(a.out.as_deref(), &["suite", "item", "value", "lower", "upper", "pass"], &rows)?;
    let failures: Vec<Check> = checks.iter().filter(|c| !c.pass).cloned().collect();
    let pass = failures.is_empty();
    let summary = Summary {
        frame: a.frame.display().to_string(),
        suites: names,
        checks: checks.len(),
        skipped,
        failures,
        pass,
    };
    match summary_path(a.summary.as_deref(), a.out.as_deref()) {
        Some(p) => write_json(Some(&p), &summary)?,
        None => eprintln!("{}", serde_json::to_string(&summary)?),
    }
    Ok(if pass { Status::Pass } else { Status::Fail })
}
