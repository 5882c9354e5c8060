use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use tempfile::TempDir;

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn esr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_esr")).args(args).output().expect("esr runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// One reduced running example shared by the tests: game, artifacts, and
/// both kinds of outcome.
struct Built {
    dir: TempDir,
}

impl Built {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn built() -> &'static Built {
    static CELL: OnceLock<Built> = OnceLock::new();
    CELL.get_or_init(|| {
        let b = Built {
            dir: tempfile::tempdir().unwrap(),
        };
        let ex = corpus("example6.json");
        let o = esr(&[
            "reduce",
            s(&ex),
            "-o",
            s(&b.path("game.json")),
            "--epsilon",
            "0.0005",
            "--artifacts",
            s(&b.path("art.json")),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        for (kind, out) in [("pp", "pp.json"), ("reduced", "red.json")] {
            let o = esr(&["outcome", kind, "--artifacts", s(&b.path("art.json")), "-o", s(&b.path(out))]);
            assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        }
        b
    })
}

#[test]
fn solve_lists_the_running_example_cover() {
    let o = esr(&["x3c", "solve", s(&corpus("example6.json")), "--all"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "{1,6}"), "{out}");
    assert!(out.contains("3 solutions"));
    let o = esr(&["x3c", "solve", s(&corpus("nosol12.json")), "--limit", "5"]);
    assert!(stdout(&o).contains("0 solutions"));
}

#[test]
fn validate_accepts_corpus_and_refutes_a_bad_instance() {
    for f in ["example6.json", "nosol12.json", "prism6.json"] {
        assert_eq!(code(&esr(&["x3c", "validate", s(&corpus(f))])), 0, "{f}");
    }
    let dir = tempfile::tempdir().unwrap();
    // every element in two sets only
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"format_version":1,"universe_size":3,"sets":[[1,2,3],[1,2,3]]}"#).unwrap();
    let o = esr(&["x3c", "validate", s(&bad)]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("witness:"));
}

#[test]
fn draw_embeds_and_imports() {
    let dir = tempfile::tempdir().unwrap();
    let (d, svg) = (dir.path().join("d.json"), dir.path().join("d.svg"));
    let o = esr(&["draw", s(&corpus("example6.json")), "-o", s(&d), "--svg", s(&svg), "--seed", "3"]);
    assert_eq!(code(&o), 0);
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    let again = dir.path().join("again.json");
    let o = esr(&["draw", s(&corpus("example6.json")), "-o", s(&again), "--import", s(&corpus("example6_drawing.json"))]);
    assert_eq!(code(&o), 0);
    // a drawing of another instance is rejected
    let o = esr(&["draw", s(&corpus("example6.json")), "-o", s(&again), "--import", s(&corpus("prism6_drawing.json"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn reduction_verifies() {
    let b = built();
    let o = esr(&["verify", "reduction", "--game", s(&b.path("game.json")), "--artifacts", s(&b.path("art.json"))]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = esr(&["verify", "reduction", "--game", s(&b.path("game.json"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn outcomes_are_all_best() {
    let b = built();
    for f in ["pp.json", "red.json"] {
        let g = b.path("game.json");
        let o = esr(&["verify", "outcome", "--game", s(&g), "--outcome", s(&b.path(f))]);
        assert_eq!(code(&o), 0);
        let o = esr(&[
            "verify",
            "all-best",
            "--game",
            s(&g),
            "--outcome",
            s(&b.path(f)),
            "--artifacts",
            s(&b.path("art.json")),
        ]);
        assert_eq!(code(&o), 0, "{}", stdout(&o));
        assert!(stdout(&o).contains("template:"));
    }
}

#[test]
fn broken_outcome_is_refuted_with_witness() {
    let b = built();
    let dir = tempfile::tempdir().unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(b.path("pp.json")).unwrap()).unwrap();
    let rooms = v["rooms"].as_array_mut().unwrap();
    let (x, y) = (rooms[0][0].clone(), rooms[1][0].clone());
    rooms[0][0] = y;
    rooms[1][0] = x;
    let bad = dir.path().join("bad.json");
    fs::write(&bad, v.to_string()).unwrap();
    let o = esr(&["verify", "all-best", "--game", s(&b.path("game.json")), "--outcome", s(&bad)]);
    assert_eq!(code(&o), 1);
    let w = dir.path().join("bad.offenders.json");
    assert!(stdout(&o).contains(s(&w)));
    assert!(w.exists());
}

#[test]
fn margins_between_all_best_outcomes_are_zero() {
    let b = built();
    let g = b.path("game.json");
    for (p, q) in [("pp.json", "pp.json"), ("pp.json", "red.json")] {
        let o = esr(&["margin", "--game", s(&g), "--pi", s(&b.path(p)), "--pi-prime", s(&b.path(q))]);
        assert_eq!(code(&o), 0);
        assert!(stdout(&o).starts_with("margin 0 (0 prefer pi, 0 prefer pi')"), "{}", stdout(&o));
    }
}

#[test]
fn fingerprint_mismatch_is_detected() {
    let b = built();
    let dir = tempfile::tempdir().unwrap();
    let other = dir.path().join("other.json");
    let o = esr(&["reduce", s(&corpus("example6.json")), "-o", s(&other), "--epsilon", "0.0004"]);
    assert_eq!(code(&o), 0);
    let o = esr(&["margin", "--game", s(&other), "--pi", s(&b.path("pp.json")), "--pi-prime", s(&b.path("pp.json"))]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("game_fingerprint"));
}

#[test]
fn popular_check_on_the_built_game() {
    let b = built();
    let o = esr(&["popular", "check", "--game", s(&b.path("game.json")), "--outcome", s(&b.path("pp.json"))]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("Popular"));
}

fn triangles_game(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let h = 3f64.sqrt() / 2.0;
    let mut agents = Vec::new();
    for t in 0..3 {
        let x0 = 10.0 * t as f64;
        for (k, (x, y)) in [(0.0, 0.0), (1.0, 0.0), (0.5, h)].into_iter().enumerate() {
            let id = 3 * t + k;
            agents.push(serde_json::json!({"id": id, "label": format!("a{id}"), "kind": "plain", "pos": [x0 + x, y, 0.0]}));
        }
    }
    let game = serde_json::json!({"format_version": 1, "room_size": 3, "epsilon": 0.0, "agents": agents});
    let g = dir.join("tri.json");
    fs::write(&g, serde_json::to_string_pretty(&game).unwrap()).unwrap();
    let fp = {
        let f: esr_core::io::GameFile = serde_json::from_value(game).unwrap();
        esr_core::io::fingerprint(&esr_core::Game::try_from(f).unwrap())
    };
    let write = |name: &str, rooms: serde_json::Value| {
        let p = dir.join(name);
        fs::write(&p, serde_json::json!({"format_version": 1, "game_fingerprint": fp, "rooms": rooms}).to_string()).unwrap();
        p
    };
    let good = write("good.json", serde_json::json!([[0, 1, 2], [3, 4, 5], [6, 7, 8]]));
    let mixed = write("mixed.json", serde_json::json!([[0, 1, 3], [2, 4, 5], [6, 7, 8]]));
    (g, good, mixed)
}

#[test]
fn popular_check_exhaustive_small_game() {
    let dir = tempfile::tempdir().unwrap();
    let (g, good, mixed) = triangles_game(dir.path());
    let o = esr(&["popular", "check", "--game", s(&g), "--outcome", s(&good), "--mode", "strict"]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("StrictlyPopular"));
    let w = dir.path().join("w.json");
    let o = esr(&["popular", "check", "--game", s(&g), "--outcome", s(&mixed), "--witness", s(&w)]);
    assert_eq!(code(&o), 1);
    assert!(w.exists());
}

#[test]
fn decide_strict_exists() {
    let b = built();
    let o = esr(&["decide", "strict-exists", "--artifacts", s(&b.path("art.json"))]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("exists: false"));

    let dir = tempfile::tempdir().unwrap();
    let (g, a) = (dir.path().join("g.json"), dir.path().join("a.json"));
    let o = esr(&[
        "reduce",
        s(&corpus("nosol12.json")),
        "-o",
        s(&g),
        "--artifacts",
        s(&a),
        "--drawing",
        s(&corpus("nosol12_drawing.json")),
    ]);
    assert_eq!(code(&o), 0);
    let o = esr(&["decide", "strict-exists", "--artifacts", s(&a)]);
    assert!(stdout(&o).starts_with("exists: true"));
}

#[test]
fn export_points_one_line_per_agent() {
    let b = built();
    let dir = tempfile::tempdir().unwrap();
    let xyz = dir.path().join("p.xyz");
    let o = esr(&["export", "points", "--game", s(&b.path("game.json")), "-o", s(&xyz)]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&xyz).unwrap();
    let game: serde_json::Value = serde_json::from_str(&fs::read_to_string(b.path("game.json")).unwrap()).unwrap();
    assert_eq!(text.lines().count(), game["agents"].as_array().unwrap().len());
    assert!(text.lines().all(|l| l.split(' ').count() == 4));
}

#[test]
fn identical_runs_write_identical_files() {
    let b = built();
    let dir = tempfile::tempdir().unwrap();
    let (g, a, p) = (dir.path().join("g.json"), dir.path().join("a.json"), dir.path().join("p.json"));
    let o = esr(&["reduce", s(&corpus("example6.json")), "-o", s(&g), "--artifacts", s(&a)]);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&esr(&["outcome", "pp", "--artifacts", s(&a), "-o", s(&p)])), 0);
    for (x, y) in [(&g, "game.json"), (&a, "art.json"), (&p, "pp.json")] {
        assert!(fs::read(x).unwrap() == fs::read(b.path(y)).unwrap(), "{y} differs");
    }
}

#[test]
fn usage_and_input_errors_exit_two() {
    assert_eq!(code(&esr(&["reduce"])), 2);
    assert_eq!(code(&esr(&["x3c", "solve", "/nonexistent.json"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("x.json");
    fs::write(&f, r#"{"format_version":1,"universe_size":6,"sets":[],"extra":true}"#).unwrap();
    let o = esr(&["x3c", "validate", s(&f)]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("x.json") && err.contains("extra"), "{err}");
}
