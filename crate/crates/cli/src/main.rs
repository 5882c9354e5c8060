//! `esr`: build, check and inspect the exact-cover gadget games.
//!
//! Exit status 0 means the command succeeded or the property holds, 1 means
//! the property was refuted (a witness file is written and its path
//! printed), 2 means bad usage or unreadable input.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use esr_core::drawing::{embed_orthogonal, render_svg, validate_drawing, EmbedOptions, OrthogonalDrawing};
use esr_core::game::validate_outcome;
use esr_core::io::{
    fingerprint, load_artifacts, load_game, load_instance, load_outcome, read_json, write_json, ArtifactsFile, GameFile,
    OutcomeFile,
};
use esr_core::outcomes::{
    classify_all_best, decide_strict_popular_exists, permanent_popular_in, reduced_outcome_in, verify_all_best, Certificate,
};
use esr_core::popularity::{
    decide_popularity, popularity_margin, search_improving_outcome, PopularityMode, PopularityStatus, DEFAULT_CAP,
};
use esr_core::reduction::{reduce_with_drawing, validate_reduction, ReduceOptions, DEFAULT_EPSILON};
use esr_core::x3c::{associated_graph, solve_exact_cover, validate_pcx3c, X3CInstance};
use esr_core::{Game, Tolerance};

#[derive(Parser)]
#[command(name = "esr", version, about = "Euclidean stable-roommates games from planar cubic exact cover")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact cover instances.
    X3c {
        #[command(subcommand)]
        action: X3cAction,
    },
    /// Orthogonal drawing of an instance's incidence graph.
    Draw {
        instance: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Use this drawing instead of searching for one.
        #[arg(long)]
        import: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build the game for an instance.
    Reduce {
        instance: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long)]
        artifacts: Option<PathBuf>,
        #[arg(long)]
        drawing: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write the permanent or a reduced outcome of a built game.
    Outcome {
        kind: OutcomeKind,
        #[arg(long)]
        artifacts: PathBuf,
        /// Which exact cover to encode, in solver order.
        #[arg(long, default_value_t = 0)]
        solution_index: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    Verify {
        what: VerifyWhat,
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        outcome: Option<PathBuf>,
        /// Needed by `verify reduction`.
        #[arg(long)]
        artifacts: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Popularity margin of one outcome over another.
    Margin {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        pi: PathBuf,
        #[arg(long)]
        pi_prime: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
    },
    Popular {
        #[command(subcommand)]
        action: PopularAction,
    },
    Decide {
        #[command(subcommand)]
        action: DecideAction,
    },
    Export {
        #[command(subcommand)]
        action: ExportAction,
    },
}

#[derive(Subcommand)]
enum X3cAction {
    /// Check the planar-cubic conditions.
    Validate { file: PathBuf },
    /// List exact covers as 1-based set indices.
    Solve {
        file: PathBuf,
        #[arg(long, conflicts_with = "limit")]
        all: bool,
        #[arg(long)]
        limit: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OutcomeKind {
    Pp,
    Reduced,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyWhat {
    Outcome,
    Reduction,
    AllBest,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Popular,
    Strict,
}

#[derive(Subcommand)]
enum PopularAction {
    /// Exhaustive check up to `--cap` agents, local search beyond.
    Check {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        outcome: PathBuf,
        #[arg(long, value_enum, default_value = "popular")]
        mode: Mode,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        witness: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DecideAction {
    /// Whether the built game has a strictly popular outcome.
    StrictExists {
        #[arg(long)]
        artifacts: PathBuf,
    },
}

#[derive(Subcommand)]
enum ExportAction {
    /// One `x y z label` line per agent.
    Points {
        #[arg(long)]
        game: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

/// Outcome of a command that checks a property.
enum Verdict {
    Holds,
    Refuted(PathBuf),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Verdict::Holds) => ExitCode::SUCCESS,
        Ok(Verdict::Refuted(w)) => {
            println!("witness: {}", w.display());
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn tolerance(tol: Option<f64>) -> Result<Tolerance> {
    Ok(match tol {
        Some(t) => Tolerance::with_dist_eq(t)?,
        None => Tolerance::default(),
    })
}

fn witness_path(given: Option<PathBuf>, beside: &Path, suffix: &str) -> PathBuf {
    given.unwrap_or_else(|| {
        let stem = beside.file_stem().map_or_else(|| "esr".into(), |s| s.to_string_lossy().into_owned());
        beside.with_file_name(format!("{stem}.{suffix}.json"))
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cmd: Command) -> Result<Verdict> {
    match cmd {
        Command::X3c { action } => x3c(action),
        Command::Draw {
            instance,
            output,
            import,
            svg,
            seed,
        } => {
            let inst = load_instance(&instance)?;
            let d = drawing_for(&inst, import.as_deref(), seed)?;
            write_json(&output, &d)?;
            if let Some(p) = svg {
                write_text(&p, &render_svg(&d))?;
            }
            let (w, h) = d.dimensions();
            println!("drawing {w}x{h}, {} bends", d.bend_count());
            Ok(Verdict::Holds)
        }
        Command::Reduce {
            instance,
            output,
            epsilon,
            artifacts,
            drawing,
            seed,
        } => {
            let inst = load_instance(&instance)?;
            let d = drawing_for(&inst, drawing.as_deref(), seed)?;
            let opts = ReduceOptions {
                epsilon,
                seed,
                ..ReduceOptions::default()
            };
            let (game, art) = reduce_with_drawing(&inst, &d, &opts)?;
            write_json(&output, &GameFile::from(&game))?;
            if let Some(p) = artifacts {
                write_json(&p, &ArtifactsFile::new(&game, &art))?;
            }
            let c = &art.counts;
            println!(
                "{} agents (bottom {}, top {}, ascending {}); fingerprint {}",
                game.len(),
                c.bottom,
                c.top,
                c.ascending,
                fingerprint(&game)
            );
            Ok(Verdict::Holds)
        }
        Command::Outcome {
            kind,
            artifacts,
            solution_index,
            output,
        } => {
            let (game, art) = load_artifacts(&artifacts)?;
            let o = match kind {
                OutcomeKind::Pp => permanent_popular_in(Some(&game), &art)?,
                OutcomeKind::Reduced => {
                    let covers = solve_exact_cover(&art.instance, solution_index.saturating_add(1));
                    let Some(s) = covers.get(solution_index) else {
                        bail!("the instance has only {} exact covers", covers.len());
                    };
                    println!("encoding cover {}", one_based(&s.selected));
                    reduced_outcome_in(Some(&game), &art, s)?
                }
            };
            write_json(&output, &OutcomeFile::new(&game, &o))?;
            println!("{} rooms", o.rooms().len());
            Ok(Verdict::Holds)
        }
        Command::Verify {
            what,
            game,
            outcome,
            artifacts,
            tol,
            witness,
        } => verify(what, &game, outcome.as_deref(), artifacts.as_deref(), tolerance(tol)?, witness),
        Command::Margin { game, pi, pi_prime, tol } => {
            let g = load_game(&game)?;
            let a = load_outcome(&pi, &g)?;
            let b = load_outcome(&pi_prime, &g)?;
            let m = popularity_margin(&g, &a, &b, &tolerance(tol)?)?;
            println!(
                "margin {} ({} prefer pi, {} prefer pi')",
                m.margin,
                m.improvers_forward.len(),
                m.improvers_backward.len()
            );
            Ok(Verdict::Holds)
        }
        Command::Popular {
            action:
                PopularAction::Check {
                    game,
                    outcome,
                    mode,
                    cap,
                    budget,
                    seed,
                    tol,
                    witness,
                },
        } => {
            let g = load_game(&game)?;
            let o = load_outcome(&outcome, &g)?;
            let tol = tolerance(tol)?;
            let mode = match mode {
                Mode::Popular => PopularityMode::Popular,
                Mode::Strict => PopularityMode::Strict,
            };
            let wpath = witness_path(witness, &outcome, "witness");
            popular_check(&g, &o, mode, cap, budget, seed, &tol, wpath)
        }
        Command::Decide {
            action: DecideAction::StrictExists { artifacts },
        } => {
            let (_, art) = load_artifacts(&artifacts)?;
            let d = decide_strict_popular_exists(&art)?;
            match &d.certificate {
                Certificate::Reduced { solution, .. } => println!(
                    "exists: false (exact cover {} gives a second all-best outcome)",
                    one_based(&solution.selected)
                ),
                Certificate::NoCover { elements, sets } => {
                    println!("exists: true (no exact cover of {elements} elements by {sets} sets)")
                }
            }
            Ok(Verdict::Holds)
        }
        Command::Export {
            action: ExportAction::Points { game, output },
        } => {
            let g = load_game(&game)?;
            let mut s = String::new();
            for a in g.agents() {
                let p = a.position;
                writeln!(s, "{:?} {:?} {:?} {}", p.x, p.y, p.z, a.label).expect("writing to a string");
            }
            write_text(&output, &s)?;
            Ok(Verdict::Holds)
        }
    }
}

fn one_based(sel: &[usize]) -> String {
    let parts: Vec<String> = sel.iter().map(|j| (j + 1).to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

fn x3c(action: X3cAction) -> Result<Verdict> {
    match action {
        X3cAction::Validate { file } => {
            let inst = load_instance(&file)?;
            let rep = validate_pcx3c(&inst);
            println!(
                "x3c {}, cubic {}, planar {}, sizes {}",
                rep.is_x3c, rep.is_cubic, rep.is_planar, rep.sizes_ok
            );
            for p in &rep.problems {
                println!("  {p}");
            }
            if rep.all_ok() {
                Ok(Verdict::Holds)
            } else {
                let w = witness_path(None, &file, "problems");
                write_json(&w, &rep.problems)?;
                Ok(Verdict::Refuted(w))
            }
        }
        X3cAction::Solve { file, all, limit } => {
            let inst = load_instance(&file)?;
            let limit = if all { usize::MAX } else { limit.unwrap_or(1) };
            let sols = solve_exact_cover(&inst, limit);
            for s in &sols {
                println!("{}", one_based(&s.selected));
            }
            println!("{} solutions", sols.len());
            Ok(Verdict::Holds)
        }
    }
}

fn drawing_for(inst: &X3CInstance, import: Option<&Path>, seed: u64) -> Result<OrthogonalDrawing> {
    let g = associated_graph(inst).graph;
    match import {
        Some(p) => {
            let d: OrthogonalDrawing = read_json(p)?;
            validate_drawing(&g, &d)
                .into_result()
                .with_context(|| format!("{} does not draw this instance", p.display()))?;
            Ok(d)
        }
        None => Ok(embed_orthogonal(
            &g,
            &EmbedOptions {
                seed,
                ..EmbedOptions::default()
            },
        )?),
    }
}

fn verify(
    what: VerifyWhat,
    game: &Path,
    outcome: Option<&Path>,
    artifacts: Option<&Path>,
    tol: Tolerance,
    witness: Option<PathBuf>,
) -> Result<Verdict> {
    let g = load_game(game)?;
    match what {
        VerifyWhat::Reduction => {
            let Some(ap) = artifacts else { bail!("verify reduction needs --artifacts") };
            let (ag, art) = load_artifacts(ap)?;
            if ag != g {
                bail!("{} was not built with {}", ap.display(), game.display());
            }
            let rep = validate_reduction(&g, &art, &tol);
            println!("{}", rep.summary());
            if rep.is_clean() {
                return Ok(Verdict::Holds);
            }
            let w = witness_path(witness, ap, "report");
            write_json(&w, &rep)?;
            Ok(Verdict::Refuted(w))
        }
        VerifyWhat::Outcome | VerifyWhat::AllBest => {
            let Some(op) = outcome else { bail!("this check needs --outcome") };
            let o = load_outcome(op, &g)?;
            let rep = validate_outcome(&g, &o);
            if !rep.is_ok() {
                println!("not a partition: {} problems", rep.violations.len());
                let w = witness_path(witness, op, "violations");
                write_json(&w, &rep.violations)?;
                return Ok(Verdict::Refuted(w));
            }
            if matches!(what, VerifyWhat::Outcome) {
                println!("valid partition into {} rooms", o.rooms().len());
                return Ok(Verdict::Holds);
            }
            let rep = verify_all_best(&g, &o, &tol)?;
            if rep.all_best() {
                println!("every agent is in a best room");
                if let Some(ap) = artifacts {
                    let (_, art) = load_artifacts(ap)?;
                    match classify_all_best(&art, &o) {
                        Ok(c) => println!("template: {c:?}"),
                        Err(e) => println!("template: none ({e})"),
                    }
                }
                return Ok(Verdict::Holds);
            }
            println!("{} agents are not in a best room", rep.offenders.len());
            let w = witness_path(witness, op, "offenders");
            write_json(&w, &rep.offenders)?;
            Ok(Verdict::Refuted(w))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn popular_check(
    g: &Game,
    o: &esr_core::Outcome,
    mode: PopularityMode,
    cap: usize,
    budget: u64,
    seed: u64,
    tol: &Tolerance,
    wpath: PathBuf,
) -> Result<Verdict> {
    let refute = |w: &esr_core::Outcome| -> Result<Verdict> {
        write_json(&wpath, &OutcomeFile::new(g, w))?;
        Ok(Verdict::Refuted(wpath.clone()))
    };
    if g.len() <= cap {
        let v = decide_popularity(g, o, mode, cap, tol)?;
        println!("{:?} after {} outcomes", v.status, v.outcomes_examined);
        return match (v.status, &v.witness) {
            (PopularityStatus::Popular | PopularityStatus::StrictlyPopular, _) => Ok(Verdict::Holds),
            (_, Some(w)) => refute(w),
            (s, None) => bail!("exhaustive check ended as {s:?} without a witness"),
        };
    }
    if matches!(mode, PopularityMode::Popular) && verify_all_best(g, o, tol)?.all_best() {
        println!("Popular: every agent is in a best room");
        return Ok(Verdict::Holds);
    }
    if let Some((w, m)) = search_improving_outcome(g, o, budget, seed, tol)? {
        println!("NotPopular: found an outcome with margin {} over it", m.margin);
        return refute(&w);
    }
    println!("Inconclusive: {} agents exceed the cap of {cap} and no improving outcome turned up", g.len());
    Ok(Verdict::Holds)
}
