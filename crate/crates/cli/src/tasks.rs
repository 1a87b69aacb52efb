use heatframes::approx::{btau_norm, greedy_sigma_curve, jackson_prefactor, jackson_slope, JacksonReport, SlopeStatus};
use heatframes::family::FunctionSpec;
use heatframes::frames::{frame_bounds, load_frame, FrameBounds};
use heatframes::spaces::{besov_norm, tl_norm, Method, NormContext, SpaceParams};
use heatframes::Error;
use serde::Serialize;

use crate::output::{num, summary_path, write_csv, write_json};
use crate::{ApproxArgs, FlavorArg, MethodArg, NormsArgs, ReportArgs, SpaceKindArg, Status};

fn method(m: MethodArg) -> Method {
    match m {
        MethodArg::Lp => Method::LpDecomp,
        MethodArg::Phi => Method::PhiVariant,
        MethodArg::Heat => Method::Heat,
        MethodArg::Seq => Method::Sequence,
    }
}

#[derive(Serialize)]
struct Group {
    function_id: String,
    space: &'static str,
    s: f64,
    p: f64,
    q: f64,
    values: Vec<(String, f64)>,
    /// Largest over smallest value across methods.
    spread: f64,
}

#[derive(Serialize)]
struct NormsSummary {
    frame: String,
    flavor: &'static str,
    groups: Vec<Group>,
    pass: bool,
}

pub fn norms(a: &NormsArgs) -> anyhow::Result<Status> {
    let specs: Vec<FunctionSpec> = a.functions.iter().map(|f| f.parse()).collect::<Result<_, _>>()?;
    for &p in &a.p {
        if !(p > 0.0) {
            return Err(Error::Parameter(format!("p must be positive, got {p}")).into());
        }
        if p.is_infinite() && a.spaces.contains(&SpaceKindArg::Tl) {
            return Err(Error::Parameter("Triebel-Lizorkin norms need p < inf".into()).into());
        }
    }
    if a.q.iter().any(|q| !(*q > 0.0)) {
        return Err(Error::Parameter("q must be positive".into()).into());
    }
    let frame = load_frame(&a.frame)?;
    let grid = frame.grid()?;
    let ctx = NormContext::with_frame(&grid, &frame);
    let flavor = match a.flavor {
        FlavorArg::Classical => "classical",
        FlavorArg::Tilde => "tilde",
    };
    let mut rows = Vec::new();
    let mut groups = Vec::new();
    for (id, spec) in a.functions.iter().zip(&specs) {
        for &s in &a.s {
            let f = spec.coefficients(&frame, grid.frequencies(), s)?;
            for &space in &a.spaces {
                for &p in &a.p {
                    for &q in &a.q {
                        let params = match a.flavor {
                            FlavorArg::Classical => SpaceParams::new(s, p, q),
                            FlavorArg::Tilde => SpaceParams::tilde(s, p, q),
                        };
                        let space_name = match space {
                            SpaceKindArg::Besov => "besov",
                            SpaceKindArg::Tl => "tl",
                        };
                        let mut values = Vec::new();
                        for &m in &a.methods {
                            let m = method(m);
                            let r = match space {
                                SpaceKindArg::Besov => besov_norm(&ctx, &f, &params, m)?,
                                SpaceKindArg::Tl => tl_norm(&ctx, &f, &params, m)?,
                            };
                            rows.push(vec![
                                id.clone(),
                                space_name.to_string(),
                                flavor.to_string(),
                                num(s),
                                num(p),
                                num(q),
                                m.name().to_string(),
                                num(r.value),
                            ]);
                            values.push((m.name().to_string(), r.value));
                        }
                        let max = values.iter().map(|v| v.1).fold(f64::MIN, f64::max);
                        let min = values.iter().map(|v| v.1).fold(f64::MAX, f64::min);
                        let spread = max / min;
                        log::info!("{id} {space_name} (s={s}, p={p}, q={q}): spread {spread:.4}");
                        groups.push(Group {
                            function_id: id.clone(),
                            space: space_name,
                            s,
                            p,
                            q,
                            values,
                            spread,
                        });
                    }
                }
            }
        }
    }
    write_csv(
        a.out.as_deref(),
        &["function_id", "space", "flavor", "s", "p", "q", "method", "value"],
        &rows,
    )?;
    let pass = groups.iter().all(|g| g.values.iter().all(|v| v.1.is_finite()));
    let summary = NormsSummary {
        frame: a.frame.display().to_string(),
        flavor,
        groups,
        pass,
    };
    if let Some(p) = summary_path(a.summary.as_deref(), a.out.as_deref()) {
        write_json(Some(&p), &summary)?;
    }
    Ok(if pass { Status::Pass } else { Status::Fail })
}

#[derive(Serialize)]
struct ApproxSummary {
    frame: String,
    function_id: String,
    s: f64,
    p: f64,
    tau: f64,
    terms: usize,
    clipped: bool,
    btau: f64,
    prefactor: f64,
    jackson: JacksonReport,
    pass: bool,
}

pub fn approx(a: &ApproxArgs) -> anyhow::Result<Status> {
    let spec: FunctionSpec = a.function.parse()?;
    if !(1.0..f64::INFINITY).contains(&a.p) {
        return Err(Error::Parameter(format!("--p must lie in [1, inf), got {}", a.p)).into());
    }
    let frame = load_frame(&a.frame)?;
    let grid = frame.grid()?;
    let d = grid.model().dim_d();
    let f = spec.coefficients(&frame, grid.frequencies(), a.s)?;
    let curve = greedy_sigma_curve(&frame, &grid, &f, a.s, a.p, a.nmax)?;
    if curve.clipped {
        log::warn!("--nmax {} exceeds the {} frame elements; clipped", a.nmax, frame.len());
    }
    let report = jackson_slope(&curve, a.s, d);
    let btau = btau_norm(&frame, &grid, &f, a.s, a.p)?;
    let rows: Vec<Vec<String>> = curve
        .n
        .iter()
        .zip(&curve.sigma)
        .map(|(n, v)| vec![n.to_string(), num(*v), num(a.p), num(a.s)])
        .collect();
    write_csv(a.out.as_deref(), &["n", "sigma_hat", "p", "s"], &rows)?;
    if report.status == SlopeStatus::Inconclusive {
        log::warn!("curve too short or flat for a slope fit");
    }
    let pass = report.pass;
    let summary = ApproxSummary {
        frame: a.frame.display().to_string(),
        function_id: a.function.clone(),
        s: a.s,
        p: a.p,
        tau: curve.tau,
        terms: frame.len(),
        clipped: curve.clipped,
        btau,
        prefactor: if btau > 0.0 { jackson_prefactor(&curve, a.s, d, btau) } else { 0.0 },
        jackson: report,
        pass,
    };
    match summary_path(a.summary.as_deref(), a.out.as_deref()) {
        Some(p) => write_json(Some(&p), &summary)?,
        None => eprintln!("{}", serde_json::to_string(&summary)?),
    }
    Ok(if pass { Status::Pass } else { Status::Fail })
}

#[derive(Serialize)]
struct LevelReport {
    j: usize,
    centers: usize,
    delta: f64,
    modes: (usize, usize),
    min_cell: f64,
    max_cell: f64,
    r_norm: Option<f64>,
    dual_epsilon: Option<f64>,
}

#[derive(Serialize)]
struct FrameReport {
    frame: String,
    format_version: u32,
    variant: String,
    model: heatframes::ModelKind,
    truncation: usize,
    resolution: usize,
    b: f64,
    epsilon: f64,
    gamma: f64,
    band: f64,
    elements: usize,
    levels: Vec<LevelReport>,
    bounds: FrameBounds,
}

pub fn report(a: &ReportArgs) -> anyhow::Result<Status> {
    let frame = load_frame(&a.frame)?;
    let bounds = frame_bounds(&frame, a.trials, a.seed)?;
    let rep = FrameReport {
        frame: a.frame.display().to_string(),
        format_version: heatframes::frames::FORMAT_VERSION,
        variant: format!("{:?}", frame.variant).to_lowercase(),
        model: frame.model,
        truncation: frame.truncation,
        resolution: frame.resolution,
        b: frame.b,
        epsilon: frame.epsilon,
        gamma: frame.gamma,
        band: frame.band(),
        elements: frame.len(),
        levels: frame
            .levels
            .iter()
            .map(|l| LevelReport {
                j: l.j,
                centers: l.len(),
                delta: l.net.delta,
                modes: (l.lo, l.hi),
                min_cell: l.net.cell_measures.iter().cloned().fold(f64::MAX, f64::min),
                max_cell: l.net.cell_measures.iter().cloned().fold(0.0, f64::max),
                r_norm: l.dual.as_ref().map(|d| d.r_norm),
                dual_epsilon: l.dual.as_ref().map(|d| d.epsilon),
            })
            .collect(),
        bounds,
    };
    write_json(a.out.as_deref(), &rep)?;
    Ok(Status::Pass)
}
