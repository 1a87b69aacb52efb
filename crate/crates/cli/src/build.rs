use anyhow::Context;
use heatframes::cutoff::{Cutoff, CutoffKind};
use heatframes::frames::save_frame;
use heatframes::{build_dual, build_frame1, build_tight, Error, GammaChoice, SpectralGrid, SpectralModel};
use serde::Serialize;

use crate::output::{summary_path, write_json};
use crate::{BuildArgs, SpaceArg, Status, VariantArg};

fn parse_gamma(text: &str) -> heatframes::Result<GammaChoice> {
    if text == "auto" {
        return Ok(GammaChoice::DEFAULT_AUTO);
    }
    match text.parse::<f64>() {
        Ok(g) if g > 0.0 && g.is_finite() => Ok(GammaChoice::Fixed(g)),
        _ => Err(Error::Parameter(format!("--gamma must be `auto` or a positive number, got {text:?}"))),
    }
}

#[derive(Serialize)]
struct LevelSummary {
    j: usize,
    centers: usize,
    delta: f64,
    modes: (usize, usize),
    r_norm: Option<f64>,
}

#[derive(Serialize)]
struct BuildSummary {
    frame: String,
    variant: String,
    truncation: usize,
    resolution: usize,
    b: f64,
    epsilon: f64,
    gamma: f64,
    elements: usize,
    levels: Vec<LevelSummary>,
}

pub fn run(a: &BuildArgs) -> anyhow::Result<Status> {
    let gamma = parse_gamma(&a.gamma)?;
    if a.n == 0 || a.levels == 0 {
        return Err(Error::Parameter("--N and --levels must be positive".into()).into());
    }
    let model = match a.space {
        SpaceArg::Torus => SpectralModel::torus(a.n)?,
        SpaceArg::Jacobi => SpectralModel::jacobi(a.alpha, a.beta, a.n)?,
    };
    let resolution = a.resolution.unwrap_or(match a.space {
        SpaceArg::Torus => model.default_resolution(),
        SpaceArg::Jacobi => 8 * a.n + 2,
    });
    let phi = Cutoff::new(CutoffKind::TypeA, a.b, a.epsilon)?;
    let grid = SpectralGrid::new(model, resolution)?;
    let frame = match a.variant {
        VariantArg::Tight => build_tight(&grid, &phi, a.b, a.levels, gamma)?,
        VariantArg::Frame1 => build_frame1(&grid, &phi, a.b, a.levels, gamma)?,
        VariantArg::Dual => build_dual(&grid, &build_frame1(&grid, &phi, a.b, a.levels, gamma)?)?,
    };
    save_frame(&frame, &a.out).with_context(|| format!("saving {}", a.out.display()))?;
    let summary = BuildSummary {
        frame: a.out.display().to_string(),
        variant: format!("{:?}", frame.variant).to_lowercase(),
        truncation: frame.truncation,
        resolution: frame.resolution,
        b: frame.b,
        epsilon: frame.epsilon,
        gamma: frame.gamma,
        elements: frame.len(),
        levels: frame
            .levels
            .iter()
            .map(|l| LevelSummary {
                j: l.j,
                centers: l.len(),
                delta: l.net.delta,
                modes: (l.lo, l.hi),
                r_norm: l.dual.as_ref().map(|d| d.r_norm),
            })
            .collect(),
    };
    write_json(summary_path(a.summary.as_deref(), Some(&a.out)).as_deref(), &summary)?;
    Ok(Status::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_choices() {
        assert_eq!(parse_gamma("auto").unwrap(), GammaChoice::DEFAULT_AUTO);
        assert_eq!(parse_gamma("0.7").unwrap(), GammaChoice::Fixed(0.7));
        for bad in ["0", "-1", "inf", "soon"] {
            assert!(parse_gamma(bad).is_err(), "{bad}");
        }
    }
}
