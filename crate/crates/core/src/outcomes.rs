//! The two families of all-best outcomes on a constructed game: the
//! permanent one, which always exists, and one per exact cover.
//!
//! Every vertex agent is roomed either by one incident chain or by its own
//! unit triangle. A chain is tiled forward (taking its `from` endpoint) or
//! backward (taking its `to` endpoint); the templates below only choose a
//! direction per chain and which triangles are rooms. Whatever they build is
//! then checked as a partition.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::game::{min_room_cost, outcome_costs, validate_outcome, AgentId, Game, Outcome, Room};
use crate::geometry::{Point3, Tolerance};
use crate::reduction::chain::{hop_count, spacing, ChainShape, ChainSkeleton};
use crate::reduction::{Chain, ChainRole, ReductionArtifacts};
use crate::x3c::{solve_exact_cover, CoverSolution};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TilingMode {
    /// Rooms `{gamma[z-1], alpha[z], beta[z]}`; takes the `from` endpoint.
    Forward,
    /// Rooms `{alpha[z], beta[z], gamma[z]}`; takes the `to` endpoint.
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainTiling {
    pub mode: TilingMode,
}

impl ChainTiling {
    pub fn forward() -> Self {
        ChainTiling { mode: TilingMode::Forward }
    }

    pub fn backward() -> Self {
        ChainTiling { mode: TilingMode::Backward }
    }

    pub fn rooms(&self, ch: &Chain) -> Vec<Room> {
        (1..=ch.n_hat())
            .map(|z| {
                let g = match self.mode {
                    TilingMode::Forward => ch.gamma[z - 1],
                    TilingMode::Backward => ch.gamma[z],
                };
                Room::from([g, ch.alpha[z - 1], ch.beta[z - 1]])
            })
            .collect()
    }

    /// The endpoint agent this tiling takes.
    pub fn consumed(&self, ch: &Chain) -> AgentId {
        match self.mode {
            TilingMode::Forward => ch.from(),
            TilingMode::Backward => ch.to(),
        }
    }
}

fn tiling(forward: bool) -> ChainTiling {
    if forward {
        ChainTiling::forward()
    } else {
        ChainTiling::backward()
    }
}

/// Whether a gadget at `depth` is roomed as its own triangle. Leaves all sit
/// at depths of the same parity as `k_floor`, so one parity rule covers every
/// tree. `leaves_by_tree` says whether leaves are taken by their tree chain
/// (permanent outcome) or by their ascending chain (reduced outcome).
fn gadget_closed(k_floor: u32, depth: usize, leaves_by_tree: bool) -> bool {
    let parity = (k_floor as usize + depth) % 2;
    if leaves_by_tree {
        parity == 1
    } else {
        parity == 0
    }
}

fn top_rooms(art: &ReductionArtifacts, leaves_by_tree: bool, rooms: &mut Vec<Room>) {
    let snow = &art.snowflake;
    let tree_chain: HashMap<(usize, usize), &Chain> = art
        .chains
        .iter()
        .filter_map(|c| match c.role {
            ChainRole::Tree { parent, child } => Some(((parent, child), c)),
            _ => None,
        })
        .collect();
    for (v, node) in snow.nodes.iter().enumerate() {
        if node.is_leaf() {
            continue;
        }
        let closed = gadget_closed(snow.k_floor, node.depth, leaves_by_tree);
        if closed {
            rooms.push(Room::new(node.members.clone()));
        }
        for &c in &node.children {
            rooms.extend(tiling(!closed).rooms(tree_chain[&(v, c)]));
        }
    }
    if !gadget_closed(snow.k_floor, 0, leaves_by_tree) {
        rooms.push(Room::from(snow.center_ids()));
    }
}

fn assemble(game: Option<&Game>, n_agents: usize, rooms: Vec<Room>) -> Result<Outcome> {
    let o = Outcome::new(rooms);
    let label = |a: AgentId| game.map_or_else(|| format!("agent {a}"), |g| g.agent(a).label.clone());
    let mut seen = vec![0u8; n_agents];
    for r in o.rooms() {
        for &a in r.members() {
            if a >= n_agents {
                return Err(Error::TemplateBroken(format!("room {r:?} names unknown agent {a}")));
            }
            seen[a] += 1;
            if seen[a] > 1 {
                return Err(Error::TemplateBroken(format!("{} is roomed twice", label(a))));
            }
        }
    }
    if let Some(a) = seen.iter().position(|&c| c == 0) {
        return Err(Error::TemplateBroken(format!("{} has no room", label(a))));
    }
    Ok(o)
}

fn agent_count(art: &ReductionArtifacts) -> usize {
    art.counts.total()
}

/// The outcome that is all-best whether or not the instance has a cover:
/// bottom chains run into their set and bend agents, ascending chains start
/// from `u_i`, `u'_i`, `l'_i`, and the leaves are taken by the tree.
pub fn permanent_popular(art: &ReductionArtifacts) -> Result<Outcome> {
    permanent_popular_in(None, art)
}

/// As [`permanent_popular`], naming agents by label in errors.
pub fn permanent_popular_in(game: Option<&Game>, art: &ReductionArtifacts) -> Result<Outcome> {
    let mut rooms = Vec::new();
    for ch in &art.chains {
        match ch.role {
            ChainRole::ElementSet { .. } | ChainRole::ElementBend { .. } | ChainRole::BendSet { .. } => {
                rooms.extend(ChainTiling::backward().rooms(ch))
            }
            ChainRole::AscendUp { .. } | ChainRole::AscendAcross { .. } | ChainRole::AscendTop { .. } => {
                rooms.extend(ChainTiling::forward().rooms(ch))
            }
            ChainRole::Tree { .. } => {}
        }
    }
    top_rooms(art, true, &mut rooms);
    assemble(game, agent_count(art), rooms)
}

/// The outcome encoding the exact cover `s`: set triangles of the chosen
/// sets are rooms, every `u_i` is taken by the chain toward its chosen set,
/// and the ascending path hands its leaf to the ascending chain.
pub fn reduced_outcome(art: &ReductionArtifacts, s: &CoverSolution) -> Result<Outcome> {
    reduced_outcome_in(None, art, s)
}

pub fn reduced_outcome_in(game: Option<&Game>, art: &ReductionArtifacts, s: &CoverSolution) -> Result<Outcome> {
    s.check(&art.instance)?;
    let mut rooms = Vec::new();
    for g in &art.bottom.sets {
        if s.contains(g.set) {
            rooms.push(Room::from(g.ids()));
        }
    }
    for ch in &art.chains {
        match ch.role {
            ChainRole::ElementSet { set, .. } | ChainRole::ElementBend { set, .. } | ChainRole::BendSet { set, .. } => {
                rooms.extend(tiling(s.contains(set)).rooms(ch))
            }
            ChainRole::AscendUp { .. } | ChainRole::AscendAcross { .. } | ChainRole::AscendTop { .. } => {
                rooms.extend(ChainTiling::backward().rooms(ch))
            }
            ChainRole::Tree { .. } => {}
        }
    }
    top_rooms(art, false, &mut rooms);
    assemble(game, agent_count(art), rooms)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Offender {
    pub agent: AgentId,
    pub label: String,
    pub cost: f64,
    pub best: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllBestReport {
    pub offenders: Vec<Offender>,
}

impl AllBestReport {
    pub fn all_best(&self) -> bool {
        self.offenders.is_empty()
    }
}

/// Checks every agent's cost against its best achievable cost. The outcome
/// must be a valid partition.
pub fn verify_all_best(game: &Game, o: &Outcome, tol: &Tolerance) -> Result<AllBestReport> {
    validate_outcome(game, o).into_result()?;
    let costs = outcome_costs(game, o)?;
    let n = game.len();
    let workers = std::thread::available_parallelism().map_or(1, |p| p.get()).min(16);
    let chunk = n.div_ceil(workers).max(256);
    // the spatial index is built once, before the workers share it
    if n > 64 {
        game.spatial_index();
    }
    let mut offenders = Vec::new();
    std::thread::scope(|sc| {
        let handles: Vec<_> = (0..n)
            .step_by(chunk)
            .map(|lo| {
                let costs = &costs;
                sc.spawn(move || {
                    (lo..(lo + chunk).min(n))
                        .filter_map(|a| {
                            let best = min_room_cost(game, a);
                            ((costs[a] - best).abs() > tol.dist_eq).then(|| Offender {
                                agent: a,
                                label: game.agent(a).label.clone(),
                                cost: costs[a],
                                best,
                            })
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            offenders.extend(h.join().expect("worker panicked"));
        }
    });
    Ok(AllBestReport { offenders })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    Pp,
    Reduced { solution: CoverSolution },
}

/// Tells which template an all-best outcome follows. Whether the three
/// center agents share a room, together with the parity of `k_floor`, picks
/// the family; the outcome must then equal that family's template exactly.
pub fn classify_all_best(art: &ReductionArtifacts, o: &Outcome) -> Result<Classification> {
    let center = Room::from(art.snowflake.center_ids());
    let has_center = o.rooms().contains(&center);
    let k_even = art.snowflake.k_floor.is_multiple_of(2);
    if has_center == k_even {
        let pp = permanent_popular(art)?;
        if pp != *o {
            return Err(Error::Unclassifiable(format!(
                "center room {} but the outcome differs from the permanent template in {} rooms",
                if has_center { "present" } else { "absent" },
                differing(&pp, o)
            )));
        }
        return Ok(Classification::Pp);
    }
    let selected: Vec<usize> = art
        .bottom
        .sets
        .iter()
        .filter(|g| o.rooms().contains(&Room::from(g.ids())))
        .map(|g| g.set)
        .collect();
    let solution = CoverSolution { selected };
    solution
        .check(&art.instance)
        .map_err(|e| Error::Unclassifiable(format!("set triangles in the outcome are not an exact cover: {e}")))?;
    let expected = reduced_outcome(art, &solution)?;
    if expected != *o {
        return Err(Error::Unclassifiable(format!(
            "outcome differs from the reduced template for {:?} in {} rooms",
            solution.selected,
            differing(&expected, o)
        )));
    }
    Ok(Classification::Reduced { solution })
}

fn differing(a: &Outcome, b: &Outcome) -> usize {
    a.rooms().iter().filter(|r| b.rooms().binary_search(r).is_err()).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// A second all-best outcome, so no outcome beats every other strictly.
    Reduced { solution: CoverSolution, outcome: Outcome },
    /// The exact cover search ran to completion without finding a cover.
    NoCover { elements: usize, sets: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrictDecision {
    pub exists: bool,
    pub certificate: Certificate,
}

/// A strictly popular outcome exists exactly when the instance has no exact
/// cover.
pub fn decide_strict_popular_exists(art: &ReductionArtifacts) -> Result<StrictDecision> {
    match solve_exact_cover(&art.instance, 1).into_iter().next() {
        Some(solution) => {
            let outcome = reduced_outcome(art, &solution)?;
            Ok(StrictDecision {
                exists: false,
                certificate: Certificate::Reduced { solution, outcome },
            })
        }
        None => Ok(StrictDecision {
            exists: true,
            certificate: Certificate::NoCover {
                elements: art.instance.m,
                sets: art.instance.q(),
            },
        }),
    }
}

/// A lone straight chain of `n_hat` triples with one endpoint kept, as a
/// game of `3 n_hat` agents, and the tiling that should be its only
/// all-best outcome.
#[derive(Debug, Clone)]
pub struct IsolatedChain {
    pub game: Game,
    pub expected: Outcome,
    pub kept: TilingMode,
}

pub fn isolated_chain(n_hat: usize, epsilon: f64, kept: TilingMode, tol: &Tolerance) -> Result<IsolatedChain> {
    if n_hat < 2 {
        return Err(Error::Construction("an isolated chain needs at least two triples".into()));
    }
    let len = (n_hat as f64 - 0.5) * spacing(epsilon);
    debug_assert_eq!(hop_count(len, epsilon), n_hat);
    let sk = ChainSkeleton::new(
        Point3::ORIGIN,
        Point3::new(len, 0.0, 0.0),
        -Point3::Z,
        epsilon,
        ChainShape::Zigzag,
        tol.solver_eps,
    )?;
    let n = sk.hops();
    let pairs = sk.place(&sk.default_azimuths());
    let mut points: Vec<Point3> = sk.gamma().to_vec();
    points.extend(pairs.iter().flat_map(|&(a, b)| [a, b]));
    let chain = Chain {
        key: "e0".into(),
        role: ChainRole::ElementSet { element: 1, set: 0 },
        length: len,
        alpha: (0..n).map(|z| n + 1 + 2 * z).collect(),
        beta: (0..n).map(|z| n + 2 + 2 * z).collect(),
        gamma: (0..=n).collect(),
    };
    let dropped = match kept {
        TilingMode::Forward => n,
        TilingMode::Backward => 0,
    };
    let remap = |a: AgentId| if a > dropped { a - 1 } else { a };
    points.remove(dropped);
    let rooms = ChainTiling { mode: kept }
        .rooms(&chain)
        .into_iter()
        .map(|r| Room::new(r.members().iter().map(|&a| remap(a)).collect()))
        .collect();
    let game = Game::new(Game::from_points(&points, 3)?.agents().to_vec(), 3, epsilon)?;
    Ok(IsolatedChain {
        game,
        expected: Outcome::new(rooms),
        kept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_gadgets_alternate_by_depth() {
        // k = 1: the roots hold the leaves directly and close in the permanent outcome
        assert!(gadget_closed(1, 0, true));
        assert!(!gadget_closed(1, 0, false));
        // k = 2: roots open, so the center triangle is a room
        assert!(!gadget_closed(2, 0, true));
        assert!(gadget_closed(2, 1, true));
        for k in 1..6 {
            for d in 0..6 {
                assert_ne!(gadget_closed(k, d, true), gadget_closed(k, d, false));
                assert_ne!(gadget_closed(k, d, true), gadget_closed(k, d + 1, true));
            }
        }
    }

    #[test]
    fn isolated_chain_expected_is_all_best() {
        let tol = Tolerance::default();
        for n in 2..=5 {
            for kept in [TilingMode::Forward, TilingMode::Backward] {
                let ic = isolated_chain(n, 0.0005, kept, &tol).unwrap();
                assert_eq!(ic.game.len(), 3 * n);
                assert!(verify_all_best(&ic.game, &ic.expected, &tol).unwrap().all_best());
            }
        }
    }
}
