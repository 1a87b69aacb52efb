use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use heatframes::cutoff::{Cutoff, CutoffKind};
use heatframes::family::random_band_limited;
use heatframes::{
    besov_norm, build_dual, build_frame1, build_tight, greedy_sigma_curve, tl_norm, GammaChoice, Method,
    NormContext, SpaceParams, SpectralGrid, SpectralModel,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn phi() -> Cutoff {
    Cutoff::new(CutoffKind::TypeA, 2.0, 0.5).unwrap()
}

fn torus(n: usize) -> SpectralGrid {
    SpectralGrid::with_default_resolution(SpectralModel::torus(n).unwrap()).unwrap()
}

fn jacobi(n: usize) -> SpectralGrid {
    SpectralGrid::new(SpectralModel::jacobi(0.0, 0.0, n).unwrap(), 8 * n + 2).unwrap()
}

fn construction(c: &mut Criterion) {
    let mut g = c.benchmark_group("build");
    g.sample_size(10);
    for (n, levels) in [(128, 4), (512, 6)] {
        let grid = torus(n);
        g.bench_with_input(BenchmarkId::new("tight/torus", n), &levels, |b, &l| {
            b.iter(|| build_tight(&grid, &phi(), 2.0, l, GammaChoice::DEFAULT_AUTO).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("dual/torus", n), &levels, |b, &l| {
            b.iter(|| {
                let f1 = build_frame1(&grid, &phi(), 2.0, l, GammaChoice::DEFAULT_AUTO).unwrap();
                build_dual(&grid, &f1).unwrap()
            })
        });
    }
    let grid = jacobi(128);
    g.bench_function("tight/jacobi/128", |b| {
        b.iter(|| build_tight(&grid, &phi(), 2.0, 4, GammaChoice::DEFAULT_AUTO).unwrap())
    });
    g.finish();
}

fn transforms(c: &mut Criterion) {
    let grid = torus(512);
    let frame = build_tight(&grid, &phi(), 2.0, 6, GammaChoice::DEFAULT_AUTO).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = random_band_limited(grid.frequencies(), frame.band(), &mut rng);
    let a = frame.analyze_primal(&f);
    c.bench_function("analyze/tight/torus/512", |b| b.iter(|| frame.analyze_primal(black_box(&f))));
    c.bench_function("synthesize/tight/torus/512", |b| b.iter(|| frame.synthesize(black_box(&a)).unwrap()));
}

fn norms(c: &mut Criterion) {
    let grid = torus(512);
    let f1 = build_frame1(&grid, &phi(), 2.0, 6, GammaChoice::DEFAULT_AUTO).unwrap();
    let frame = build_dual(&grid, &f1).unwrap();
    let ctx = NormContext::with_frame(&grid, &frame);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f = random_band_limited(grid.frequencies(), frame.band(), &mut rng);
    let params = SpaceParams::new(0.5, 2.0, 2.0);
    let mut g = c.benchmark_group("norms");
    for m in [Method::LpDecomp, Method::PhiVariant, Method::Heat, Method::Sequence] {
        g.bench_function(BenchmarkId::new("besov", m.name()), |b| {
            b.iter(|| besov_norm(&ctx, black_box(&f), &params, m).unwrap())
        });
        g.bench_function(BenchmarkId::new("tl", m.name()), |b| {
            b.iter(|| tl_norm(&ctx, black_box(&f), &params, m).unwrap())
        });
    }
    g.finish();
}

fn greedy(c: &mut Criterion) {
    let grid = torus(512);
    let frame = build_tight(&grid, &phi(), 2.0, 6, GammaChoice::DEFAULT_AUTO).unwrap();
    let f = heatframes::family::FunctionSpec::BesovSample { seed: 1 }
        .coefficients(&frame, grid.frequencies(), 1.0)
        .unwrap();
    let mut g = c.benchmark_group("greedy");
    g.sample_size(10);
    for n_max in [100, 400] {
        g.bench_with_input(BenchmarkId::new("torus/512", n_max), &n_max, |b, &n| {
            b.iter(|| greedy_sigma_curve(&frame, &grid, &f, 1.0, 2.0, n).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, construction, transforms, norms, greedy);
criterion_main!(benches);
