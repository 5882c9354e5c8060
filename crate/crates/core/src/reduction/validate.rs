//! Post-hoc checks of a constructed game against its artifacts: chain
//! distances, construction edge lengths, every agent's best cost and best
//! rooms, and how far the next-best room is from the best.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{ConstructionEdge, ReductionArtifacts};
use crate::game::{min_room_cost, most_preferred_rooms, AgentId, Game};
use crate::geometry::Tolerance;

/// Smallest accepted difference between an agent's best cost and its
/// cheapest room that is not one of the prescribed best rooms.
pub const REQUIRED_GAP: f64 = 0.01;

/// Construction edges must be at least this long.
pub const MIN_EDGE: f64 = 10.0;

/// Gaps are only searched up to this far above the best cost.
const GAP_CAP: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentIssue {
    pub agent: AgentId,
    pub label: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub agents: usize,
    pub triples_checked: usize,
    pub triple_failures: Vec<String>,
    pub shortest_edge: f64,
    pub short_edges: Vec<ConstructionEdge>,
    pub cost_failures: Vec<AgentIssue>,
    pub room_mismatches: Vec<AgentIssue>,
    pub structural: Vec<String>,
    /// Smallest gap over all agents (capped at 0.5) and where it occurs.
    pub min_gap: f64,
    pub gap_agent: Option<AgentId>,
}

impl ReductionReport {
    pub fn is_clean(&self) -> bool {
        self.triple_failures.is_empty()
            && self.short_edges.is_empty()
            && self.cost_failures.is_empty()
            && self.room_mismatches.is_empty()
            && self.structural.is_empty()
            && self.min_gap > REQUIRED_GAP
    }

    pub fn summary(&self) -> String {
        format!(
            "{} agents; {}/{} triples ok; shortest edge {:.3}; {} cost failures; {} room mismatches; {} structural problems; min gap {:.4}",
            self.agents,
            self.triples_checked - self.triple_failures.len(),
            self.triples_checked,
            self.shortest_edge,
            self.cost_failures.len(),
            self.room_mismatches.len(),
            self.structural.len(),
            self.min_gap,
        )
    }
}

/// Agents each agent is meant to sit at unit distance from (or `epsilon`,
/// for the alpha/beta partner).
pub fn design_neighbors(game: &Game, art: &ReductionArtifacts) -> Vec<BTreeSet<AgentId>> {
    let mut nb: Vec<BTreeSet<AgentId>> = vec![BTreeSet::new(); game.len()];
    let mut link = |a: AgentId, b: AgentId| {
        nb[a].insert(b);
        nb[b].insert(a);
    };
    for ch in &art.chains {
        for z in 1..=ch.n_hat() {
            let (a, b) = (ch.alpha[z - 1], ch.beta[z - 1]);
            link(a, b);
            for g in [ch.gamma[z - 1], ch.gamma[z]] {
                link(a, g);
                link(b, g);
            }
        }
    }
    let mut triangle = |ids: &[AgentId]| {
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                link(a, b);
            }
        }
    };
    for s in &art.bottom.sets {
        triangle(&s.ids());
    }
    for n in &art.snowflake.nodes {
        if n.members.len() == 3 {
            triangle(&n.members);
        }
    }
    triangle(&art.snowflake.center_ids());
    nb
}

/// The rooms (as roommate pairs) each agent should rank first.
pub fn prescribed_pairs(game: &Game, art: &ReductionArtifacts, nb: &[BTreeSet<AgentId>]) -> Vec<BTreeSet<[AgentId; 2]>> {
    let mut out: Vec<BTreeSet<[AgentId; 2]>> = vec![BTreeSet::new(); game.len()];
    let mut pair_agent = vec![None; game.len()];
    for ch in &art.chains {
        for z in 1..=ch.n_hat() {
            let (a, b) = (ch.alpha[z - 1], ch.beta[z - 1]);
            pair_agent[a] = Some((b, ch.gamma[z - 1], ch.gamma[z]));
            pair_agent[b] = Some((a, ch.gamma[z - 1], ch.gamma[z]));
        }
    }
    for a in 0..game.len() {
        if let Some((partner, g0, g1)) = pair_agent[a] {
            out[a].insert(sorted([partner, g0]));
            out[a].insert(sorted([partner, g1]));
        } else {
            let v: Vec<_> = nb[a].iter().copied().collect();
            for (i, &x) in v.iter().enumerate() {
                for &y in &v[i + 1..] {
                    out[a].insert([x, y]);
                }
            }
        }
    }
    out
}

fn sorted(mut p: [AgentId; 2]) -> [AgentId; 2] {
    p.sort_unstable();
    p
}

fn issue(game: &Game, a: AgentId, detail: String) -> AgentIssue {
    AgentIssue {
        agent: a,
        label: game.agent(a).label.clone(),
        detail,
    }
}

pub fn validate_reduction(game: &Game, art: &ReductionArtifacts, tol: &Tolerance) -> ReductionReport {
    let eps = art.epsilon;
    let mut rep = ReductionReport {
        agents: game.len(),
        triples_checked: 0,
        triple_failures: Vec::new(),
        shortest_edge: f64::INFINITY,
        short_edges: Vec::new(),
        cost_failures: Vec::new(),
        room_mismatches: Vec::new(),
        structural: Vec::new(),
        min_gap: GAP_CAP,
        gap_agent: None,
    };

    // every agent in exactly one slot
    let mut seen = vec![0u32; game.len()];
    let mut mark = |a: AgentId| {
        if a < seen.len() {
            seen[a] += 1;
        }
    };
    art.bottom.elements.iter().for_each(|&a| mark(a));
    art.bottom.bends.iter().for_each(|b| mark(b.agent));
    art.bottom.sets.iter().flat_map(|s| s.ids()).for_each(&mut mark);
    art.snowflake.nodes.iter().flat_map(|n| n.members.iter()).for_each(|&a| mark(a));
    for p in &art.ascending {
        mark(p.u_prime);
        mark(p.l_prime);
    }
    for ch in &art.chains {
        ch.own_agents().for_each(&mut mark);
    }
    for (a, &c) in seen.iter().enumerate() {
        if c != 1 {
            rep.structural.push(format!("agent {} ({}) fills {c} slots", a, game.agent(a).label));
        }
    }

    for ch in &art.chains {
        for z in 1..=ch.n_hat() {
            rep.triples_checked += 1;
            let (a, b) = (ch.alpha[z - 1], ch.beta[z - 1]);
            let (g0, g1) = (ch.gamma[z - 1], ch.gamma[z]);
            let checks = [
                (game.distance(a, b), eps),
                (game.distance(a, g0), 1.0),
                (game.distance(b, g0), 1.0),
                (game.distance(a, g1), 1.0),
                (game.distance(b, g1), 1.0),
            ];
            if let Some((d, want)) = checks.iter().find(|(d, want)| (d - want).abs() > tol.dist_eq) {
                rep.triple_failures.push(format!("chain {} triple {z}: distance {d} where {want} is required", ch.key));
            }
        }
    }

    for e in &art.construction_edges {
        rep.shortest_edge = rep.shortest_edge.min(e.length);
        if e.length < MIN_EDGE - 1e-9 {
            rep.short_edges.push(e.clone());
        }
    }

    let nb = design_neighbors(game, art);
    let prescribed = prescribed_pairs(game, art, &nb);
    for a in 0..game.len() {
        let is_pair = game.agent(a).kind.is_chain_pair();
        let want = if is_pair { 1.0 + eps } else { 2.0 };
        let best = min_room_cost(game, a);
        if (best - want).abs() > tol.dist_eq {
            rep.cost_failures.push(issue(game, a, format!("best cost {best}, expected {want}")));
        }
        let found: BTreeSet<[AgentId; 2]> = most_preferred_rooms(game, a, tol).into_iter().map(|v| [v[0], v[1]]).collect();
        if found != prescribed[a] {
            let missing = prescribed[a].difference(&found).count();
            let extra: Vec<_> = found.difference(&prescribed[a]).take(3).collect();
            rep.room_mismatches.push(issue(game, a, format!("{missing} prescribed rooms missing; unexpected {extra:?}")));
        }
        let gap = gap_at(game, a, best, &prescribed[a]);
        if gap < rep.min_gap {
            rep.min_gap = gap;
            rep.gap_agent = Some(a);
        }
    }
    rep
}

/// Cost of the cheapest non-prescribed pair minus the best cost, capped.
fn gap_at(game: &Game, a: AgentId, best: f64, prescribed: &BTreeSet<[AgentId; 2]>) -> f64 {
    let limit = best + GAP_CAP;
    let near = game.neighbors_within(a, limit);
    let mut near: Vec<(AgentId, f64)> = near.into_iter().filter(|&(b, _)| b != a).collect();
    near.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
    let mut cheapest = limit;
    for (i, &(x, dx)) in near.iter().enumerate() {
        if dx + near.get(i + 1).map_or(f64::INFINITY, |p| p.1) >= cheapest {
            break;
        }
        for &(y, dy) in &near[i + 1..] {
            let c = dx + dy;
            if c >= cheapest {
                break;
            }
            if !prescribed.contains(&sorted([x, y])) {
                cheapest = c;
            }
        }
    }
    cheapest - best
}
