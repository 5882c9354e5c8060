//! Top layer: three binary trees grown from a unit triangle of center
//! agents, with a unit-triangle gadget at every internal node.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Builder, ChainRole, GadgetEdge, SnowNode, Snowflake, SCALE};
use crate::game::AgentKind;
use crate::geometry::Point3;
use crate::{Error, Result};

/// Tree segments (other than the three pairs meeting at the center) must
/// stay this far apart.
const TREE_CLEARANCE: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanNode {
    pub tree: usize,
    pub depth: usize,
    /// 1-based position among the nodes of equal tree and depth.
    pub index: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Position relative to the centroid of the center triangle, before
    /// rotation.
    pub xy: [f64; 2],
}

/// Geometry of the snowflake in its own frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnowflakePlan {
    pub k_floor: u32,
    pub replacements: usize,
    pub roots: [usize; 3],
    pub nodes: Vec<PlanNode>,
    /// Leaf nodes in tree order.
    pub leaves: Vec<usize>,
    pub edges: Vec<GadgetEdge>,
}

/// Largest `k` with `3 * 2^k <= m`.
pub fn k_floor(m: usize) -> u32 {
    let mut k = 0;
    while 3 << (k + 1) <= m {
        k += 1;
    }
    k
}

fn dir(angle: f64) -> [f64; 2] {
    [angle.cos(), angle.sin()]
}

fn bit_reverse(x: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        x.reverse_bits() >> (usize::BITS - bits)
    }
}

struct Grower<'a> {
    nodes: &'a mut Vec<PlanNode>,
    edges: &'a mut Vec<GadgetEdge>,
}

impl Grower<'_> {
    fn node(&mut self, tree: usize, depth: usize, parent: Option<usize>, xy: [f64; 2]) -> usize {
        let id = self.nodes.len();
        self.nodes.push(PlanNode {
            tree,
            depth,
            index: 0,
            parent,
            children: Vec::new(),
            xy,
        });
        if let Some(p) = parent {
            self.nodes[p].children.push(id);
        }
        id
    }

    /// Grows `levels` levels below `at`; `len(l)` is the triangle side at
    /// level `l` below `at`.
    fn grow(&mut self, at: usize, axis: f64, levels: usize, len: &dyn Fn(usize) -> f64, level: usize) {
        if level == levels {
            return;
        }
        let l = len(level);
        for side in [-1.0, 1.0] {
            let a = axis + side * PI / 6.0;
            let p = self.nodes[at].xy;
            let d = dir(a);
            let xy = [p[0] + l * d[0], p[1] + l * d[1]];
            let (tree, depth) = (self.nodes[at].tree, self.nodes[at].depth);
            let child = self.node(tree, depth + 1, Some(at), xy);
            self.edges.push(GadgetEdge {
                parent: at,
                child,
                length: l,
            });
            self.grow(child, a, levels, len, level + 1);
        }
    }
}

/// Lays out the snowflake for `m` elements and `q` sets. Leaves beyond the
/// full trees come from replacing leaves by depth-2 gadgets, spread
/// round-robin over the trees and in bit-reversed order within a tree so
/// that no two gadgets hang from neighbouring leaves.
pub fn plan_snowflake(m: usize, q: usize) -> Result<SnowflakePlan> {
    if m < 3 || !m.is_multiple_of(3) {
        return Err(Error::Construction(format!("snowflake needs |X| divisible by 3 and at least 3, got {m}")));
    }
    let k = k_floor(m);
    let full = 3usize << k;
    let replacements = (m - full) / 3;
    let base = SCALE * (m + q) as f64;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut g = Grower {
        nodes: &mut nodes,
        edges: &mut edges,
    };
    let r = 1.0 / 3f64.sqrt();
    let mut roots = [0; 3];
    let mut axes = [0.0; 3];
    for (t, root) in roots.iter_mut().enumerate() {
        let axis = PI / 2.0 + 2.0 * PI * t as f64 / 3.0;
        let d = dir(axis);
        *root = g.node(t, 0, None, [r * d[0], r * d[1]]);
        axes[t] = axis;
    }
    let kk = k as usize;
    for t in 0..3 {
        g.grow(roots[t], axes[t], kk, &|level| base + 4f64.powi(k as i32 - level as i32 + 2), 0);
    }
    let mut base_leaves: Vec<Vec<usize>> = vec![Vec::new(); 3];
    collect_leaves(g.nodes, &roots, &mut base_leaves);
    let per_tree = 1usize << k;
    let order: Vec<(usize, usize)> = (0..per_tree)
        .flat_map(|b| (0..3).map(move |t| (t, bit_reverse(b, k))))
        .collect();
    for &(t, b) in order.iter().take(replacements) {
        let leaf = base_leaves[t][b];
        let axis = {
            let p = g.nodes[leaf].parent.expect("replaced leaves have parents");
            let (a, c) = (g.nodes[p].xy, g.nodes[leaf].xy);
            (c[1] - a[1]).atan2(c[0] - a[0])
        };
        g.grow(leaf, axis, 2, &|level| base + 4f64.powi(2 - level as i32), 0);
    }
    let mut leaves: Vec<Vec<usize>> = vec![Vec::new(); 3];
    collect_leaves(&nodes, &roots, &mut leaves);
    let leaves: Vec<usize> = leaves.into_iter().flatten().collect();
    number_nodes(&mut nodes, &roots);
    let plan = SnowflakePlan {
        k_floor: k,
        replacements,
        roots,
        nodes,
        leaves,
        edges,
    };
    debug_assert_eq!(plan.leaves.len(), m);
    plan.check_clearance()?;
    Ok(plan)
}

fn collect_leaves(nodes: &[PlanNode], roots: &[usize; 3], out: &mut [Vec<usize>]) {
    fn walk(nodes: &[PlanNode], v: usize, out: &mut Vec<usize>) {
        if nodes[v].children.is_empty() {
            out.push(v);
        }
        for &c in &nodes[v].children {
            walk(nodes, c, out);
        }
    }
    for (t, &r) in roots.iter().enumerate() {
        walk(nodes, r, &mut out[t]);
    }
}

/// Depth-first numbering per (tree, depth).
fn number_nodes(nodes: &mut [PlanNode], roots: &[usize; 3]) {
    let mut counter = std::collections::HashMap::new();
    let mut stack: Vec<usize> = roots.iter().rev().copied().collect();
    while let Some(v) = stack.pop() {
        let c = counter.entry((nodes[v].tree, nodes[v].depth)).or_insert(0);
        *c += 1;
        nodes[v].index = *c;
        stack.extend(nodes[v].children.iter().rev());
    }
}

fn seg_dist(p: [f64; 2], q: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let cross = |o: [f64; 2], x: [f64; 2], y: [f64; 2]| (x[0] - o[0]) * (y[1] - o[1]) - (x[1] - o[1]) * (y[0] - o[0]);
    let (d1, d2, d3, d4) = (cross(p, q, a), cross(p, q, b), cross(a, b, p), cross(a, b, q));
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        return 0.0;
    }
    point_seg(p, a, b).min(point_seg(q, a, b)).min(point_seg(a, p, q)).min(point_seg(b, p, q))
}

pub(crate) fn point_seg(x: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (ax, ay) = (b[0] - a[0], b[1] - a[1]);
    let len2 = ax * ax + ay * ay;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((x[0] - a[0]) * ax + (x[1] - a[1]) * ay) / len2).clamp(0.0, 1.0)
    };
    (x[0] - a[0] - t * ax).hypot(x[1] - a[1] - t * ay)
}

impl SnowflakePlan {
    /// Smallest distance between tree segments that share no node, leaving
    /// out pairs of segments both leaving the center triangle.
    pub fn clearance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, e) in self.edges.iter().enumerate() {
            for f in &self.edges[i + 1..] {
                let shared = [e.parent, e.child].iter().any(|v| *v == f.parent || *v == f.child);
                let central = self.nodes[e.parent].parent.is_none() && self.nodes[f.parent].parent.is_none();
                if shared || central {
                    continue;
                }
                let n = &self.nodes;
                best = best.min(seg_dist(n[e.parent].xy, n[e.child].xy, n[f.parent].xy, n[f.child].xy));
            }
        }
        best
    }

    fn check_clearance(&self) -> Result<()> {
        let c = self.clearance();
        if c < TREE_CLEARANCE {
            return Err(Error::Construction(format!(
                "snowflake branches come within {c:.2} of each other"
            )));
        }
        Ok(())
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }
}

/// Where the plan goes: rotation about the center and which plan leaf
/// becomes `l_i`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Placement {
    pub rotation: f64,
    /// `leaf_of[i - 1]` indexes `plan.leaves`.
    pub leaf_of: Vec<usize>,
}

pub(crate) fn world(center: [f64; 2], rotation: f64, xy: [f64; 2]) -> [f64; 2] {
    let (s, c) = rotation.sin_cos();
    [center[0] + c * xy[0] - s * xy[1], center[1] + s * xy[0] + c * xy[1]]
}

pub(crate) fn build(b: &mut Builder, plan: &SnowflakePlan, center: [f64; 2], z: f64, place: &Placement) -> Result<Snowflake> {
    let at = |xy: [f64; 2]| {
        let w = world(center, place.rotation, xy);
        Point3::new(w[0], w[1], z)
    };
    let mut leaf_label = vec![0; plan.nodes.len()];
    for (i, &l) in place.leaf_of.iter().enumerate() {
        leaf_label[plan.leaves[l]] = i + 1;
    }
    let mut nodes = Vec::with_capacity(plan.nodes.len());
    for (v, pn) in plan.nodes.iter().enumerate() {
        let (t, j, l) = (pn.tree + 1, pn.depth, pn.index);
        let p = at(pn.xy);
        let members = if pn.children.is_empty() {
            vec![b.add_vertex(format!("l_{}", leaf_label[v]), AgentKind::Leaf, p)]
        } else {
            let kind = if pn.parent.is_none() { AgentKind::Center } else { AgentKind::Tree };
            let mut ids = vec![b.add_vertex(format!("d_{{{t},{j}}}^{{{l},1}}"), kind, p)];
            for (k, &c) in pn.children.iter().enumerate() {
                let q = at(plan.nodes[c].xy);
                let unit = (q - p).normalized().expect("children are far from their parent");
                ids.push(b.add_vertex(format!("d_{{{t},{j}}}^{{{l},{}}}", k + 2), AgentKind::Tree, p + unit));
            }
            b.group(&ids);
            ids
        };
        nodes.push(SnowNode {
            label: b.label(members[0]).to_string(),
            tree: pn.tree,
            depth: pn.depth,
            parent: pn.parent,
            children: pn.children.clone(),
            members,
        });
    }
    let center_group: Vec<_> = plan.roots.iter().flat_map(|&r| nodes[r].members.clone()).collect();
    b.group(&center_group);
    for e in &plan.edges {
        let k = nodes[e.parent].children.iter().position(|&c| c == e.child).expect("edge child listed");
        let from = nodes[e.parent].members[k + 1];
        let to = nodes[e.child].anchor();
        b.add_chain(
            ChainRole::Tree {
                parent: e.parent,
                child: e.child,
            },
            from,
            to,
            Point3::Z,
        )?;
    }
    let leaves = (0..place.leaf_of.len()).map(|i| plan.leaves[place.leaf_of[i]]).collect();
    Ok(Snowflake {
        k_floor: plan.k_floor,
        replacements: plan.replacements,
        roots: plan.roots,
        nodes,
        leaves,
        edges: plan.edges.clone(),
        rotation: place.rotation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floors() {
        assert_eq!(k_floor(6), 1);
        assert_eq!(k_floor(12), 2);
        assert_eq!(k_floor(21), 2);
        assert_eq!(k_floor(24), 3);
    }

    #[test]
    fn depth_zero_side_for_twelve() {
        let plan = plan_snowflake(12, 12).unwrap();
        let first = plan.edges.iter().find(|e| plan.nodes[e.parent].depth == 0).unwrap();
        assert_eq!(first.length, 496.0);
    }

    #[test]
    fn leaf_counts() {
        for (m, reps) in [(6, 0), (9, 1), (12, 0), (15, 1), (18, 2), (21, 3), (24, 0), (30, 2), (45, 7)] {
            let plan = plan_snowflake(m, m).unwrap();
            assert_eq!(plan.leaf_count(), m, "m = {m}");
            assert_eq!(plan.replacements, reps);
        }
    }

    #[test]
    fn children_form_equilateral_triangles() {
        let plan = plan_snowflake(21, 21).unwrap();
        for (v, n) in plan.nodes.iter().enumerate() {
            if let [a, b] = n.children[..] {
                let d = |x: [f64; 2], y: [f64; 2]| (x[0] - y[0]).hypot(x[1] - y[1]);
                let (pa, pb) = (d(plan.nodes[v].xy, plan.nodes[a].xy), d(plan.nodes[v].xy, plan.nodes[b].xy));
                let ab = d(plan.nodes[a].xy, plan.nodes[b].xy);
                assert!((pa - pb).abs() < 1e-9 && (pa - ab).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn replaced_leaves_keep_parity() {
        let plan = plan_snowflake(21, 21).unwrap();
        let depths: std::collections::BTreeSet<_> = plan.leaves.iter().map(|&l| plan.nodes[l].depth).collect();
        assert_eq!(depths.into_iter().collect::<Vec<_>>(), vec![2, 4]);
    }
}
