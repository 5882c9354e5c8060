//! Reduction from planar cubic exact cover to a Euclidean roommates game
//! with rooms of size 3.
//!
//! The game has three layers. The bottom layer follows an orthogonal drawing
//! of the instance's incidence graph at `z = 0`; the top layer is a
//! "snowflake" of binary trees at `z = 10|X| + 10`; the ascending layer joins
//! each element to its own leaf. Every construction edge becomes a chain of
//! agent triples (see [`chain`]).

mod ascending;
mod bottom;
pub mod chain;
mod cluster;
mod top;
pub mod validate;

use serde::{Deserialize, Serialize};

use crate::drawing::{embed_orthogonal, EmbedOptions};
use crate::drawing::OrthogonalDrawing;
use crate::game::{Agent, AgentId, AgentKind, Game};
use crate::geometry::{Point3, Tolerance};
use crate::x3c::{associated_graph, validate_pcx3c, X3CInstance};
use crate::{Error, Result};

pub use chain::{ChainShape, ChainSkeleton};
pub use top::{plan_snowflake, SnowflakePlan};
pub use validate::{validate_reduction, ReductionReport};

/// Default `epsilon` of the construction; must lie in `(0, 0.001)`.
pub const DEFAULT_EPSILON: f64 = 0.0005;

/// Grid edges of the drawing become construction edges of this length.
pub const SCALE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Bottom,
    Top,
    Ascending,
}

/// What a chain connects. `element` is 1-based, `set` 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChainRole {
    /// `u_i` to the set agent `w_j^i` along a straight drawn edge.
    ElementSet { element: usize, set: usize },
    /// `u_i` to the bend agent `b_j^i`.
    ElementBend { element: usize, set: usize },
    /// `b_j^i` to `w_j^i`.
    BendSet { element: usize, set: usize },
    /// A gadget member of snowflake node `parent` to node `child`.
    Tree { parent: usize, child: usize },
    /// `u_i` up to `u'_i`.
    AscendUp { element: usize },
    /// `u'_i` across to `l'_i`.
    AscendAcross { element: usize },
    /// `l'_i` up to the leaf `l_i`.
    AscendTop { element: usize },
}

impl ChainRole {
    pub fn layer(&self) -> Layer {
        match self {
            ChainRole::ElementSet { .. } | ChainRole::ElementBend { .. } | ChainRole::BendSet { .. } => Layer::Bottom,
            ChainRole::Tree { .. } => Layer::Top,
            _ => Layer::Ascending,
        }
    }
}

/// A chain of `n` triples. `gamma` has `n + 1` entries: `gamma[0]` is the
/// `from` vertex agent and `gamma[n]` the `to` vertex agent; `alpha[z-1]`,
/// `beta[z-1]` belong to hop `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Chain {
    pub key: String,
    pub role: ChainRole,
    /// Straight-line distance between the endpoint agents.
    pub length: f64,
    pub alpha: Vec<AgentId>,
    pub beta: Vec<AgentId>,
    pub gamma: Vec<AgentId>,
}

impl Chain {
    pub fn n_hat(&self) -> usize {
        self.alpha.len()
    }

    pub fn from(&self) -> AgentId {
        self.gamma[0]
    }

    pub fn to(&self) -> AgentId {
        self.gamma[self.n_hat()]
    }

    pub fn layer(&self) -> Layer {
        self.role.layer()
    }

    /// Agents owned by the chain (endpoints excluded).
    pub fn own_agents(&self) -> impl Iterator<Item = AgentId> + '_ {
        let n = self.n_hat();
        self.alpha.iter().chain(&self.beta).chain(&self.gamma[1..n]).copied()
    }
}

/// The three set agents replacing `w_j`, each tagged with its element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetGadget {
    pub set: usize,
    pub members: [(usize, AgentId); 3],
}

impl SetGadget {
    pub fn member(&self, element: usize) -> Option<AgentId> {
        self.members.iter().find(|m| m.0 == element).map(|m| m.1)
    }

    pub fn ids(&self) -> [AgentId; 3] {
        self.members.map(|m| m.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BendAgent {
    pub element: usize,
    pub set: usize,
    pub agent: AgentId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BottomLayer {
    /// `elements[i - 1]` is `u_i`.
    pub elements: Vec<AgentId>,
    pub bends: Vec<BendAgent>,
    pub sets: Vec<SetGadget>,
}

/// A node of the snowflake trees. Internal nodes carry the gadget triangle
/// `[d1, d2, d3]` (`d1` at the node, `d2`/`d3` toward the first/second
/// child); leaves carry a single agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnowNode {
    pub label: String,
    pub tree: usize,
    pub depth: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub members: Vec<AgentId>,
}

impl SnowNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// The agent the parent's chain ends at.
    pub fn anchor(&self) -> AgentId {
        self.members[0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GadgetEdge {
    pub parent: usize,
    pub child: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snowflake {
    pub k_floor: u32,
    pub replacements: usize,
    /// Node ids of the three roots; their `d1` agents are the center agents.
    pub roots: [usize; 3],
    pub nodes: Vec<SnowNode>,
    /// `leaves[i - 1]` is the node of leaf `l_i`.
    pub leaves: Vec<usize>,
    pub edges: Vec<GadgetEdge>,
    /// Rotation (radians) applied to the trees about the vertical axis.
    pub rotation: f64,
}

impl Snowflake {
    pub fn center_ids(&self) -> [AgentId; 3] {
        self.roots.map(|r| self.nodes[r].anchor())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AscendingPath {
    pub element: usize,
    pub u_prime: AgentId,
    pub l_prime: AgentId,
    pub leaf: AgentId,
    /// Chain indices of up, across, top.
    pub chains: [usize; 3],
}

/// An edge of the construction before it is replaced by a chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionEdge {
    pub label: String,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerCounts {
    pub bottom: usize,
    pub top: usize,
    pub ascending: usize,
}

impl LayerCounts {
    pub fn total(&self) -> usize {
        self.bottom + self.top + self.ascending
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionArtifacts {
    pub instance: X3CInstance,
    pub drawing: OrthogonalDrawing,
    pub epsilon: f64,
    pub shape: ChainShape,
    pub chains: Vec<Chain>,
    pub bottom: BottomLayer,
    pub snowflake: Snowflake,
    pub ascending: Vec<AscendingPath>,
    pub construction_edges: Vec<ConstructionEdge>,
    pub counts: LayerCounts,
    /// Smallest clearance reached by the azimuth optimizer over all
    /// clusters; absent for shapes that do not optimize.
    pub cluster_clearance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReduceOptions {
    pub epsilon: f64,
    pub seed: u64,
    pub shape: ChainShape,
    pub tol: Tolerance,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions {
            epsilon: DEFAULT_EPSILON,
            seed: 0,
            shape: ChainShape::Zigzag,
            tol: Tolerance::default(),
        }
    }
}

/// Embeds the instance's incidence graph and builds the game.
pub fn reduce(inst: &X3CInstance, opts: &ReduceOptions) -> Result<(Game, ReductionArtifacts)> {
    let ag = associated_graph(inst);
    let drawing = embed_orthogonal(
        &ag.graph,
        &EmbedOptions {
            seed: opts.seed,
            ..EmbedOptions::default()
        },
    )?;
    reduce_with_drawing(inst, &drawing, opts)
}

/// Builds the game on a given drawing of the incidence graph (vertices
/// `u_1..u_m` then `w_1..w_q`).
pub fn reduce_with_drawing(inst: &X3CInstance, drawing: &OrthogonalDrawing, opts: &ReduceOptions) -> Result<(Game, ReductionArtifacts)> {
    let report = validate_pcx3c(inst);
    if !report.all_ok() {
        return Err(Error::InvalidInstance(report.problems.join("; ")));
    }
    if !(opts.epsilon > 0.0 && opts.epsilon < 1e-3) {
        return Err(Error::Construction(format!("epsilon {} outside (0, 0.001)", opts.epsilon)));
    }
    opts.tol.check()?;
    let ag = associated_graph(inst);
    crate::drawing::validate_drawing(&ag.graph, drawing).into_result()?;

    let mut b = Builder::new(opts);
    let bottom = bottom::build(&mut b, inst, drawing)?;
    let plan = plan_snowflake(inst.m, inst.q())?;
    let z_top = SCALE * (inst.m as f64 + 1.0);
    let center = bottom::center_xy(&b, &bottom);
    let elements_xy: Vec<[f64; 2]> = bottom.elements.iter().map(|&u| {
        let p = b.agents[u].position;
        [p.x, p.y]
    }).collect();
    let placement = ascending::place_snowflake(&plan, center, &elements_xy, opts.seed);
    let snowflake = top::build(&mut b, &plan, center, z_top, &placement)?;
    let ascending = ascending::build(&mut b, &bottom, &snowflake)?;

    let mut construction_edges = bottom::construction_edges(inst, drawing);
    construction_edges.extend(snowflake.edges.iter().map(|e| ConstructionEdge {
        label: format!("{}-{}", snowflake.nodes[e.parent].label, snowflake.nodes[e.child].label),
        length: e.length,
    }));
    construction_edges.extend(ascending::construction_edges(&b, &bottom, &ascending));

    let clearance = b.optimize_clusters();
    let (agents, chains) = b.finish();
    let counts = count_layers(&agents, &chains, &bottom, &snowflake, &ascending);
    let game = Game::new(agents, 3, opts.epsilon)?;
    let artifacts = ReductionArtifacts {
        instance: inst.clone(),
        drawing: drawing.clone(),
        epsilon: opts.epsilon,
        shape: opts.shape,
        chains,
        bottom,
        snowflake,
        ascending,
        construction_edges,
        counts,
        cluster_clearance: clearance,
    };
    Ok((game, artifacts))
}

fn count_layers(agents: &[Agent], chains: &[Chain], bottom: &BottomLayer, snow: &Snowflake, asc: &[AscendingPath]) -> LayerCounts {
    let mut c = LayerCounts {
        bottom: bottom.elements.len() + bottom.bends.len() + 3 * bottom.sets.len(),
        top: snow.nodes.iter().map(|n| n.members.len()).sum(),
        ascending: 2 * asc.len(),
    };
    for ch in chains {
        let own = 3 * ch.n_hat() - 1;
        match ch.layer() {
            Layer::Bottom => c.bottom += own,
            Layer::Top => c.top += own,
            Layer::Ascending => c.ascending += own,
        }
    }
    debug_assert_eq!(c.total(), agents.len());
    c
}

struct PendingChain {
    key: String,
    role: ChainRole,
    from: AgentId,
    to: AgentId,
    skeleton: ChainSkeleton,
    psi: Option<(f64, f64)>,
}

/// Collects vertex agents and chain skeletons; chain agents are created
/// last, once every cluster has chosen its azimuths.
pub(crate) struct Builder {
    agents: Vec<Agent>,
    chains: Vec<PendingChain>,
    /// Vertex agents grouped into clusters whose chain ends are optimized
    /// together.
    clusters: Vec<Vec<AgentId>>,
    cluster_of: Vec<usize>,
    epsilon: f64,
    shape: ChainShape,
    solver_eps: f64,
}

impl Builder {
    fn new(opts: &ReduceOptions) -> Self {
        Builder {
            agents: Vec::new(),
            chains: Vec::new(),
            clusters: Vec::new(),
            cluster_of: Vec::new(),
            epsilon: opts.epsilon,
            shape: opts.shape,
            solver_eps: opts.tol.solver_eps,
        }
    }

    pub(crate) fn position(&self, a: AgentId) -> Point3 {
        self.agents[a].position
    }

    pub(crate) fn label(&self, a: AgentId) -> &str {
        &self.agents[a].label
    }

    pub(crate) fn add_vertex(&mut self, label: String, kind: AgentKind, position: Point3) -> AgentId {
        let id = self.agents.len();
        self.agents.push(Agent {
            id,
            label,
            kind,
            position,
        });
        self.cluster_of.push(self.clusters.len());
        self.clusters.push(vec![id]);
        id
    }

    /// Puts the given vertex agents into one cluster.
    pub(crate) fn group(&mut self, ids: &[AgentId]) {
        let target = self.cluster_of[ids[0]];
        for &a in &ids[1..] {
            let c = self.cluster_of[a];
            if c == target {
                continue;
            }
            let moved = std::mem::take(&mut self.clusters[c]);
            for &m in &moved {
                self.cluster_of[m] = target;
            }
            self.clusters[target].extend(moved);
        }
    }

    pub(crate) fn add_chain(&mut self, role: ChainRole, from: AgentId, to: AgentId, bend_dir: Point3) -> Result<usize> {
        let (p, q) = (self.position(from), self.position(to));
        let idx = self.chains.len();
        let key = format!("e{}", idx + 1);
        let skeleton = ChainSkeleton::new(p, q, bend_dir, self.epsilon, self.shape, self.solver_eps).map_err(|e| {
            Error::Construction(format!(
                "chain {} -> {}: {e}",
                self.agents[from].label, self.agents[to].label
            ))
        })?;
        self.chains.push(PendingChain {
            key,
            role,
            from,
            to,
            skeleton,
            psi: None,
        });
        Ok(idx)
    }

    /// Unit directions in which the chains already attached to `a` leave it.
    pub(crate) fn departures(&self, a: AgentId) -> Vec<Point3> {
        self.chains
            .iter()
            .filter_map(|c| {
                let (n, g) = (c.skeleton.hops(), c.skeleton.gamma());
                if c.from == a {
                    (g[n] - g[0]).normalized()
                } else if c.to == a {
                    (g[0] - g[n]).normalized()
                } else {
                    None
                }
            })
            .collect()
    }

    /// Chooses end azimuths cluster by cluster; returns the worst clearance.
    fn optimize_clusters(&mut self) -> Option<f64> {
        if self.shape == ChainShape::Arc {
            return None;
        }
        let mut ends_at: Vec<Vec<(usize, bool)>> = vec![Vec::new(); self.agents.len()];
        for (c, ch) in self.chains.iter().enumerate() {
            ends_at[ch.from].push((c, true));
            ends_at[ch.to].push((c, false));
        }
        let sks: Vec<ChainSkeleton> = self.chains.iter().map(|c| c.skeleton.clone()).collect();
        let mut chosen: Vec<[f64; 2]> = vec![[0.0; 2]; self.chains.len()];
        let mut worst = f64::INFINITY;
        for members in self.clusters.iter().filter(|c| !c.is_empty()) {
            let mut ends = Vec::new();
            for (v, &a) in members.iter().enumerate() {
                for &(chain, at_from) in &ends_at[a] {
                    ends.push(cluster::End { chain, at_from, vertex: v });
                }
            }
            if ends.is_empty() {
                continue;
            }
            let vertices: Vec<Point3> = members.iter().map(|&a| self.agents[a].position).collect();
            let (psi, score) = cluster::optimize(&sks, &ends, &vertices);
            worst = worst.min(score);
            for (e, a) in ends.iter().zip(psi) {
                chosen[e.chain][if e.at_from { 0 } else { 1 }] = a;
            }
        }
        for (ch, psi) in self.chains.iter_mut().zip(chosen) {
            ch.psi = Some((psi[0], psi[1]));
        }
        Some(worst)
    }

    fn finish(mut self) -> (Vec<Agent>, Vec<Chain>) {
        let pending = std::mem::take(&mut self.chains);
        let mut chains = Vec::with_capacity(pending.len());
        for pc in pending {
            let sk = &pc.skeleton;
            let n = sk.hops();
            let psi = match pc.psi {
                Some((a, b)) => sk.azimuths_between(a, b),
                None => sk.default_azimuths(),
            };
            let mut gamma = Vec::with_capacity(n + 1);
            gamma.push(pc.from);
            for z in 1..n {
                gamma.push(self.push(format!("gamma[s={}][z={z}]", pc.key), AgentKind::Gamma, sk.gamma()[z]));
            }
            gamma.push(pc.to);
            let mut alpha = Vec::with_capacity(n);
            let mut beta = Vec::with_capacity(n);
            for (z, (a, b)) in sk.place(&psi).into_iter().enumerate() {
                alpha.push(self.push(format!("alpha[s={}][z={}]", pc.key, z + 1), AgentKind::Alpha, a));
                beta.push(self.push(format!("beta[s={}][z={}]", pc.key, z + 1), AgentKind::Beta, b));
            }
            chains.push(Chain {
                key: pc.key,
                role: pc.role,
                length: sk.gamma()[0].distance(sk.gamma()[n]),
                alpha,
                beta,
                gamma,
            });
        }
        (self.agents, chains)
    }

    fn push(&mut self, label: String, kind: AgentKind, position: Point3) -> AgentId {
        let id = self.agents.len();
        self.agents.push(Agent {
            id,
            label,
            kind,
            position,
        });
        id
    }
}
