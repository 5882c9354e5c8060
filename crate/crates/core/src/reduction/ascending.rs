//! Ascending layer: `u_i -> u'_i -> l'_i -> l_i`, with `u'_i` and `l'_i` at
//! height `10 i`.
//!
//! The vertical piece above `u_i` spans heights `0..10i` and so crosses the
//! level of every across-piece `j < i`; the vertical piece below `l_i` spans
//! `10i..top` and crosses every across-piece `j > i`. Those pieces must not
//! pass near each other in the xy-plane, which is arranged by rotating the
//! snowflake and choosing which leaf gets which label.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::top::{point_seg, world, Placement, SnowflakePlan};
use super::{AscendingPath, BottomLayer, Builder, ChainRole, ConstructionEdge, Snowflake, SCALE};
use crate::game::AgentKind;
use crate::geometry::Point3;
use crate::Result;

const ROTATIONS: usize = 36;
const STEPS: usize = 4000;
/// Clearance beyond which the search stops improving.
const ENOUGH: f64 = 10.0;
/// Number of smallest clearances compared, lexicographically.
const TAIL: usize = 5;

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// The `TAIL` smallest xy clearances between pieces that cross in height.
fn score(us: &[[f64; 2]], ls: &[[f64; 2]]) -> Vec<f64> {
    let m = us.len();
    let mut v = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            if j < i {
                v.push(point_seg(us[i], us[j], ls[j]));
                v.push(dist(us[i], ls[j]));
            } else if j > i {
                v.push(point_seg(ls[i], us[j], ls[j]));
            }
        }
    }
    v.sort_by(f64::total_cmp);
    v.truncate(TAIL);
    v.iter().map(|x| x.min(ENOUGH)).collect()
}

fn better(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).find(|(x, y)| x != y).is_some_and(|(x, y)| x > y)
}

/// Seeded search over rotation and leaf labels.
pub(crate) fn place_snowflake(plan: &SnowflakePlan, center: [f64; 2], us: &[[f64; 2]], seed: u64) -> Placement {
    let m = us.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_1eaf);
    let leaves_at = |rot: f64, leaf_of: &[usize]| -> Vec<[f64; 2]> {
        leaf_of.iter().map(|&l| world(center, rot, plan.nodes[plan.leaves[l]].xy)).collect()
    };
    let angle = |p: [f64; 2]| (p[1] - center[1]).atan2(p[0] - center[0]);
    let mut by_angle: Vec<usize> = (0..m).collect();
    by_angle.sort_by(|&a, &b| angle(us[a]).total_cmp(&angle(us[b])).then(a.cmp(&b)));

    // start: each element gets the leaf in its own direction
    let mut best: Option<(Vec<f64>, f64, Vec<usize>)> = None;
    for r in 0..ROTATIONS {
        let rot = 2.0 * std::f64::consts::PI * r as f64 / ROTATIONS as f64;
        let world_leaves: Vec<[f64; 2]> = plan.leaves.iter().map(|&l| world(center, rot, plan.nodes[l].xy)).collect();
        let mut leaf_order: Vec<usize> = (0..m).collect();
        leaf_order.sort_by(|&a, &b| angle(world_leaves[a]).total_cmp(&angle(world_leaves[b])).then(a.cmp(&b)));
        let mut leaf_of = vec![0; m];
        for (&e, &l) in by_angle.iter().zip(&leaf_order) {
            leaf_of[e] = l;
        }
        let s = score(us, &leaves_at(rot, &leaf_of));
        if best.as_ref().is_none_or(|b| better(&s, &b.0)) {
            best = Some((s, rot, leaf_of));
        }
    }
    let (mut s, mut rot, mut leaf_of) = best.expect("at least one rotation");
    for _ in 0..STEPS {
        if s.first().is_none_or(|&x| x >= ENOUGH) || m < 2 {
            break;
        }
        let mut cand_rot = rot;
        let mut cand = leaf_of.clone();
        if rng.gen_bool(0.8) {
            let a = rng.gen_range(0..m);
            let b = rng.gen_range(0..m);
            cand.swap(a, b);
        } else {
            cand_rot += rng.gen_range(-0.05..0.05);
        }
        let cs = score(us, &leaves_at(cand_rot, &cand));
        if !better(&s, &cs) {
            s = cs;
            rot = cand_rot;
            leaf_of = cand;
        }
    }
    Placement { rotation: rot, leaf_of }
}

pub(crate) fn build(b: &mut Builder, bottom: &BottomLayer, snow: &Snowflake) -> Result<Vec<AscendingPath>> {
    let mut out = Vec::with_capacity(bottom.elements.len());
    for (k, &u) in bottom.elements.iter().enumerate() {
        let i = k + 1;
        let leaf = snow.nodes[snow.leaves[k]].anchor();
        let (pu, pl) = (b.position(u), b.position(leaf));
        let h = SCALE * i as f64;
        let u_prime = b.add_vertex(format!("u'_{i}"), AgentKind::AuxU, Point3::new(pu.x, pu.y, h));
        let l_prime = b.add_vertex(format!("l'_{i}"), AgentKind::AuxL, Point3::new(pl.x, pl.y, h));
        // u'_i - l'_i, flattened; a leaf straight above u_i leaves it undefined
        let outward = Point3::new(pu.x - pl.x, pu.y - pl.y, 0.0).normalized().unwrap_or(Point3::X);
        let up = b.add_chain(ChainRole::AscendUp { element: i }, u, u_prime, free_direction(&b.departures(u)))?;
        let across = b.add_chain(ChainRole::AscendAcross { element: i }, u_prime, l_prime, -Point3::Z)?;
        let top = b.add_chain(ChainRole::AscendTop { element: i }, l_prime, leaf, -outward)?;
        out.push(AscendingPath {
            element: i,
            u_prime,
            l_prime,
            leaf,
            chains: [up, across, top],
        });
    }
    Ok(out)
}

/// The horizontal grid direction farthest from every given direction. The
/// vertical chain above `u_i` swings its first gamma that way, into the gap
/// left by the bottom-layer chains.
fn free_direction(used: &[Point3]) -> Point3 {
    let axes = [Point3::X, Point3::Y, -Point3::X, -Point3::Y];
    let mut best = (f64::INFINITY, Point3::X);
    for a in axes {
        let closest = used.iter().map(|u| u.dot(a)).fold(f64::NEG_INFINITY, f64::max);
        if closest < best.0 {
            best = (closest, a);
        }
    }
    best.1
}

pub(crate) fn construction_edges(b: &Builder, bottom: &BottomLayer, asc: &[AscendingPath]) -> Vec<ConstructionEdge> {
    let mut out = Vec::new();
    for p in asc {
        let u = bottom.elements[p.element - 1];
        for (x, y) in [(u, p.u_prime), (p.u_prime, p.l_prime), (p.l_prime, p.leaf)] {
            out.push(ConstructionEdge {
                label: format!("{}-{}", b.label(x), b.label(y)),
                length: b.position(x).distance(b.position(y)),
            });
        }
    }
    out
}
