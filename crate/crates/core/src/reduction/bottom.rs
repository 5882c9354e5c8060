//! Bottom layer: element, bend and set agents on the drawing at `z = 0`.

use super::{BendAgent, BottomLayer, Builder, ChainRole, ConstructionEdge, SetGadget, SCALE};
use crate::drawing::{Dir, GridPoint, OrthogonalDrawing};
use crate::game::AgentKind;
use crate::geometry::Point3;
use crate::x3c::X3CInstance;
use crate::{Error, Result};

const APEX: f64 = 0.866_025_403_784_438_6; // sqrt(3) / 2

fn lift(p: GridPoint) -> Point3 {
    Point3::new(SCALE * p.x as f64, SCALE * p.y as f64, 0.0)
}

fn unit(d: Dir) -> Point3 {
    let (x, y) = d.step();
    Point3::new(x as f64, y as f64, 0.0)
}

/// Drawn edge joining `u_i` and `w_j`.
fn edge_between(d: &OrthogonalDrawing, u: usize, w: usize) -> Result<usize> {
    d.edges
        .iter()
        .position(|e| e.endpoints.contains(&u) && e.endpoints.contains(&w))
        .ok_or_else(|| Error::Construction(format!("drawing has no edge between vertices {u} and {w}")))
}

/// Offset of the set agent sitting on the segment that leaves `w_j` in
/// direction `d`: the two members on opposite directions sit at `+-1/2`, the
/// remaining one at the apex `sqrt(3)/2` out.
fn member_offset(d: Dir, dirs: &[Dir; 3]) -> Point3 {
    if dirs.contains(&d.opposite()) {
        unit(d) * 0.5
    } else {
        unit(d) * APEX
    }
}

pub(crate) fn build(b: &mut Builder, inst: &X3CInstance, d: &OrthogonalDrawing) -> Result<BottomLayer> {
    let m = inst.m;
    let elements: Vec<_> = (1..=m)
        .map(|i| b.add_vertex(format!("u_{i}"), AgentKind::Element, lift(d.coords[i - 1])))
        .collect();
    let mut bends = Vec::new();
    let mut sets = Vec::with_capacity(inst.q());
    let mut pending = Vec::new();
    for (j, set) in inst.sets.iter().enumerate() {
        let w = m + j;
        let centre = lift(d.coords[w]);
        let mut dirs = [Dir::Right; 3];
        let mut edges = [0; 3];
        for (k, &i) in set.iter().enumerate() {
            edges[k] = edge_between(d, i - 1, w)?;
            dirs[k] = d
                .departure(w, edges[k])
                .ok_or_else(|| Error::Construction(format!("edge of w_{} leaves diagonally", j + 1)))?;
        }
        let mut members = [(0, 0); 3];
        for (k, &i) in set.iter().enumerate() {
            let pos = centre + member_offset(dirs[k], &dirs);
            members[k] = (i, b.add_vertex(format!("w_{}^{}", j + 1, i), AgentKind::Set, pos));
        }
        b.group(&members.map(|m| m.1));
        for (k, &i) in set.iter().enumerate() {
            pending.push((i, j, edges[k], members[k].1));
        }
        sets.push(SetGadget { set: j, members });
    }
    for (i, j, e, member) in pending {
        let u = elements[i - 1];
        match d.edges[e].bend {
            Some(bp) => {
                let bend = b.add_vertex(format!("b_{}^{}", j + 1, i), AgentKind::Bend, lift(bp));
                bends.push(BendAgent {
                    element: i,
                    set: j,
                    agent: bend,
                });
                segment(b, ChainRole::ElementBend { element: i, set: j }, u, bend)?;
                segment(b, ChainRole::BendSet { element: i, set: j }, bend, member)?;
            }
            None => {
                segment(b, ChainRole::ElementSet { element: i, set: j }, u, member)?;
            }
        }
    }
    Ok(BottomLayer { elements, bends, sets })
}

fn segment(b: &mut Builder, role: ChainRole, from: usize, to: usize) -> Result<usize> {
    let len = b.position(from).distance(b.position(to));
    if len < 2.0 {
        return Err(Error::Construction(format!(
            "segment {} - {} is only {len} long after placing the set gadget",
            b.label(from),
            b.label(to)
        )));
    }
    b.add_chain(role, from, to, -Point3::Z)
}

/// Centre of the bottom layer's bounding box in the xy-plane.
pub(crate) fn center_xy(b: &Builder, bottom: &BottomLayer) -> [f64; 2] {
    let pts = bottom
        .elements
        .iter()
        .chain(bottom.bends.iter().map(|x| &x.agent))
        .chain(bottom.sets.iter().flat_map(|s| s.members.iter().map(|m| &m.1)))
        .map(|&a| b.position(a));
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in pts {
        lo = [lo[0].min(p.x), lo[1].min(p.y)];
        hi = [hi[0].max(p.x), hi[1].max(p.y)];
    }
    [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])]
}

/// Edges of the subdivided drawing, measured before the set gadgets
/// shorten them.
pub(crate) fn construction_edges(inst: &X3CInstance, d: &OrthogonalDrawing) -> Vec<ConstructionEdge> {
    let mut out = Vec::new();
    for (j, set) in inst.sets.iter().enumerate() {
        for &i in set {
            let Ok(e) = edge_between(d, i - 1, inst.m + j) else { continue };
            let poly = d.polyline(e);
            for w in poly.windows(2) {
                out.push(ConstructionEdge {
                    label: format!("u_{i}/w_{}: ({},{})-({},{})", j + 1, w[0].x, w[0].y, w[1].x, w[1].y),
                    length: SCALE * w[0].manhattan(w[1]) as f64,
                });
            }
        }
    }
    out
}
