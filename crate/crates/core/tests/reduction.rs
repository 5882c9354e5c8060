use std::sync::OnceLock;

use esr_core::game::{Agent, Game};
use esr_core::reduction::validate::REQUIRED_GAP;
use esr_core::reduction::{reduce, validate_reduction, ReduceOptions, ReductionArtifacts};
use esr_core::x3c::X3CInstance;
use esr_core::{Point3, Tolerance};

fn built() -> &'static (Game, ReductionArtifacts) {
    static CELL: OnceLock<(Game, ReductionArtifacts)> = OnceLock::new();
    CELL.get_or_init(|| reduce(&X3CInstance::running_example(), &ReduceOptions::default()).unwrap())
}

#[test]
fn running_example_validates_clean() {
    let (g, art) = built();
    let rep = validate_reduction(g, art, &Tolerance::default());
    assert!(rep.is_clean(), "{}", rep.summary());
    assert!(rep.min_gap > REQUIRED_GAP);
    assert!(rep.shortest_edge >= 10.0);
    assert_eq!(rep.triples_checked, art.chains.iter().map(|c| c.n_hat()).sum::<usize>());
}

#[test]
fn layer_counts_add_up() {
    let (g, art) = built();
    assert_eq!(art.counts.total(), g.len());
    assert_eq!(g.len() % 3, 0);
    let m = art.instance.m;
    assert_eq!(art.ascending.len(), m);
    assert_eq!(art.snowflake.leaves.len(), m);
    assert_eq!(art.bottom.sets.len(), art.instance.q());
}

#[test]
fn same_seed_same_game() {
    let (g, art) = built();
    let (g2, art2) = reduce(&X3CInstance::running_example(), &ReduceOptions::default()).unwrap();
    assert_eq!(*g, g2);
    assert_eq!(serde_json::to_string(art).unwrap(), serde_json::to_string(&art2).unwrap());
}

#[test]
fn displaced_gamma_is_reported() {
    let (g, art) = built();
    let ch = &art.chains[0];
    let victim = ch.gamma[1];
    let mut agents: Vec<Agent> = g.agents().to_vec();
    agents[victim].position += Point3::new(0.0, 0.0, 0.5);
    let bad = Game::new(agents, 3, g.epsilon()).unwrap();
    let rep = validate_reduction(&bad, art, &Tolerance::default());
    assert!(!rep.is_clean());
    assert!(rep.triple_failures.iter().any(|f| f.contains(&ch.key)));
    assert!(rep.cost_failures.iter().any(|i| i.agent == victim));
}
