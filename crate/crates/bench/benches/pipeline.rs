use std::path::{Path, PathBuf};

use criterion::{criterion_group, criterion_main, Criterion};
use esr_core::drawing::OrthogonalDrawing;
use esr_core::io::{load_instance, read_json};
use esr_core::outcomes::{permanent_popular, verify_all_best};
use esr_core::popularity::{decide_popularity, PopularityMode, DEFAULT_CAP};
use esr_core::reduction::{reduce_with_drawing, validate_reduction, ReduceOptions};
use esr_core::x3c::{solve_exact_cover, X3CInstance};
use esr_core::{Game, Outcome, Point3, Room, Tolerance};

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn load(name: &str) -> (X3CInstance, OrthogonalDrawing) {
    let inst = load_instance(&corpus(&format!("{name}.json"))).unwrap();
    let d = read_json(&corpus(&format!("{name}_drawing.json"))).unwrap();
    (inst, d)
}

fn solver(c: &mut Criterion) {
    for name in ["example6", "nosol12", "prism24"] {
        let (inst, _) = load(name);
        c.bench_function(&format!("solve_all/{name}"), |b| b.iter(|| solve_exact_cover(&inst, usize::MAX)));
    }
}

fn pipeline(c: &mut Criterion) {
    let mut g = c.benchmark_group("pipeline");
    g.sample_size(10);
    let tol = Tolerance::default();
    for name in ["example6", "nosol12"] {
        let (inst, d) = load(name);
        g.bench_function(format!("reduce/{name}"), |b| {
            b.iter(|| reduce_with_drawing(&inst, &d, &ReduceOptions::default()).unwrap())
        });
        let (game, art) = reduce_with_drawing(&inst, &d, &ReduceOptions::default()).unwrap();
        g.bench_function(format!("validate/{name}"), |b| b.iter(|| validate_reduction(&game, &art, &tol)));
        let pp = permanent_popular(&art).unwrap();
        g.bench_function(format!("all_best/{name}"), |b| b.iter(|| verify_all_best(&game, &pp, &tol).unwrap()));
    }
    g.finish();
}

fn exhaustive(c: &mut Criterion) {
    let h = 3f64.sqrt() / 2.0;
    let pts: Vec<Point3> = (0..3)
        .flat_map(|t| {
            let x = 10.0 * t as f64;
            [Point3::new(x, 0.0, 0.0), Point3::new(x + 1.0, 0.0, 0.0), Point3::new(x + 0.5, h, 0.0)]
        })
        .collect();
    let game = Game::from_points(&pts, 3).unwrap();
    let pi = Outcome::new(vec![Room::from([0, 1, 2]), Room::from([3, 4, 5]), Room::from([6, 7, 8])]);
    let tol = Tolerance::default();
    c.bench_function("strict_popular/triangles9", |b| {
        b.iter(|| decide_popularity(&game, &pi, PopularityMode::Strict, DEFAULT_CAP, &tol).unwrap())
    });
}

criterion_group!(benches, solver, pipeline, exhaustive);
criterion_main!(benches);
