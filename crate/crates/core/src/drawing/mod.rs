//! Orthogonal grid drawings of planar graphs with maximum degree 3: every edge
//! is at most one horizontal plus one vertical segment, meeting at a bend.

mod embed;
mod svg;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planarity::Graph;

pub use embed::{embed_orthogonal, EmbedOptions};
pub use svg::render_svg;

pub const DEFAULT_UNIT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPoint {
    pub x: i64,
    pub y: i64,
}

impl GridPoint {
    pub const fn new(x: i64, y: i64) -> Self {
        GridPoint { x, y }
    }

    pub fn manhattan(self, o: GridPoint) -> i64 {
        (self.x - o.x).abs() + (self.y - o.y).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// Unit step leaving a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dir {
    Right,
    Up,
    Left,
    Down,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::Right, Dir::Up, Dir::Left, Dir::Down];

    pub fn step(self) -> (i64, i64) {
        match self {
            Dir::Right => (1, 0),
            Dir::Up => (0, 1),
            Dir::Left => (-1, 0),
            Dir::Down => (0, -1),
        }
    }

    pub fn opposite(self) -> Dir {
        match self {
            Dir::Right => Dir::Left,
            Dir::Up => Dir::Down,
            Dir::Left => Dir::Right,
            Dir::Down => Dir::Up,
        }
    }

    fn toward(from: GridPoint, to: GridPoint) -> Option<Dir> {
        match ((to.x - from.x).signum(), (to.y - from.y).signum()) {
            (1, 0) => Some(Dir::Right),
            (-1, 0) => Some(Dir::Left),
            (0, 1) => Some(Dir::Up),
            (0, -1) => Some(Dir::Down),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DrawnEdge {
    pub endpoints: [usize; 2],
    pub bend: Option<GridPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub axis: Axis,
    pub a: GridPoint,
    pub b: GridPoint,
    pub owner_edge: usize,
}

impl Segment {
    pub fn len(&self) -> i64 {
        self.a.manhattan(self.b)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Vertex `v` sits at `coords[v]` (grid units). `unit` scales grid units to
/// construction units on export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DrawingFile", into = "DrawingFile")]
pub struct OrthogonalDrawing {
    pub unit: f64,
    pub coords: Vec<GridPoint>,
    pub edges: Vec<DrawnEdge>,
}

impl OrthogonalDrawing {
    /// The corner points of edge `e`: its endpoints with the bend between them.
    pub fn polyline(&self, e: usize) -> Vec<GridPoint> {
        let edge = &self.edges[e];
        let [p, q] = edge.endpoints;
        let mut out = vec![self.coords[p]];
        out.extend(edge.bend);
        out.push(self.coords[q]);
        out
    }

    /// Axis-aligned pieces of edge `e` (diagonal pieces are reported by the
    /// validator, not here).
    pub fn segments(&self, e: usize) -> Vec<Segment> {
        self.polyline(e)
            .windows(2)
            .filter_map(|w| {
                let axis = if w[0].y == w[1].y {
                    Axis::Horizontal
                } else if w[0].x == w[1].x {
                    Axis::Vertical
                } else {
                    return None;
                };
                Some(Segment {
                    axis,
                    a: w[0],
                    b: w[1],
                    owner_edge: e,
                })
            })
            .collect()
    }

    /// Edge ids incident to `v`.
    pub fn incident(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].endpoints.contains(&v)).collect()
    }

    /// Direction in which edge `e` leaves vertex `v`.
    pub fn departure(&self, v: usize, e: usize) -> Option<Dir> {
        let edge = &self.edges[e];
        let other = if edge.endpoints[0] == v { edge.endpoints[1] } else { edge.endpoints[0] };
        let first = edge.bend.unwrap_or(self.coords[other]);
        Dir::toward(self.coords[v], first)
    }

    pub fn edge_length(&self, e: usize) -> i64 {
        self.polyline(e).windows(2).map(|w| w[0].manhattan(w[1])).sum()
    }

    pub fn bounds(&self) -> (GridPoint, GridPoint) {
        let pts = self.coords.iter().chain(self.edges.iter().filter_map(|e| e.bend.as_ref()));
        let mut lo = GridPoint::new(i64::MAX, i64::MAX);
        let mut hi = GridPoint::new(i64::MIN, i64::MIN);
        for p in pts {
            lo = GridPoint::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = GridPoint::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }

    /// Grid width and height.
    pub fn dimensions(&self) -> (i64, i64) {
        if self.coords.is_empty() {
            return (0, 0);
        }
        let (lo, hi) = self.bounds();
        (hi.x - lo.x, hi.y - lo.y)
    }

    pub fn bend_count(&self) -> usize {
        self.edges.iter().filter(|e| e.bend.is_some()).count()
    }

    fn sorted_edges(mut self) -> Self {
        for e in &mut self.edges {
            if e.endpoints[0] > e.endpoints[1] {
                e.endpoints.swap(0, 1);
            }
        }
        self.edges.sort_by_key(|e| e.endpoints);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DrawingViolation {
    VertexCountMismatch { graph: usize, drawing: usize },
    EdgeSetMismatch { missing: Vec<[usize; 2]>, extra: Vec<[usize; 2]> },
    SharedGridPoint { a: usize, b: usize },
    NotOrthogonal { edge: usize },
    ZeroLengthSegment { edge: usize },
    Overlap { a: usize, b: usize, at: GridPoint },
    PassesThroughVertex { edge: usize, vertex: usize },
    EmptyGridLine { axis: Axis, at: i64 },
    TooLarge { width: i64, height: i64, bound: i64 },
}

impl fmt::Display for DrawingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DrawingViolation::VertexCountMismatch { graph, drawing } => {
                write!(f, "graph has {graph} vertices, drawing has {drawing}")
            }
            DrawingViolation::EdgeSetMismatch { missing, extra } => {
                write!(f, "edges missing from drawing {missing:?}, extra edges {extra:?}")
            }
            DrawingViolation::SharedGridPoint { a, b } => write!(f, "vertices {a} and {b} share a grid point"),
            DrawingViolation::NotOrthogonal { edge } => write!(f, "edge {edge} is not one horizontal plus one vertical segment"),
            DrawingViolation::ZeroLengthSegment { edge } => write!(f, "edge {edge} has a zero-length segment"),
            DrawingViolation::Overlap { a, b, at } => write!(f, "edges {a} and {b} meet at ({}, {})", at.x, at.y),
            DrawingViolation::PassesThroughVertex { edge, vertex } => write!(f, "edge {edge} runs through vertex {vertex}"),
            DrawingViolation::EmptyGridLine { axis, at } => write!(f, "{axis:?} grid line at {at} holds no vertex"),
            DrawingViolation::TooLarge { width, height, bound } => {
                write!(f, "drawing is {width}x{height}, bound is {bound}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrawingReport {
    pub violations: Vec<DrawingViolation>,
}

impl DrawingReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        match self.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidDrawing(v.to_string())),
        }
    }
}

/// Interior lattice points of edge `e` (everything except its two endpoints).
fn interior_points(d: &OrthogonalDrawing, e: usize) -> Vec<GridPoint> {
    let poly = d.polyline(e);
    let mut out = Vec::new();
    for (k, w) in poly.windows(2).enumerate() {
        let (dx, dy) = ((w[1].x - w[0].x).signum(), (w[1].y - w[0].y).signum());
        let mut p = w[0];
        if k > 0 {
            out.push(p);
        }
        loop {
            p = GridPoint::new(p.x + dx, p.y + dy);
            if p == w[1] {
                break;
            }
            out.push(p);
        }
    }
    out
}

/// Structural checks plus the compactness and size conditions. Size is
/// measured in grid units against the vertex count of `g`.
pub fn validate_drawing(g: &Graph, d: &OrthogonalDrawing) -> DrawingReport {
    let mut violations = Vec::new();
    if g.vertex_count() != d.coords.len() {
        violations.push(DrawingViolation::VertexCountMismatch {
            graph: g.vertex_count(),
            drawing: d.coords.len(),
        });
        return DrawingReport { violations };
    }
    let want: BTreeSet<[usize; 2]> = g.edges().iter().map(|&(a, b)| [a, b]).collect();
    let have: BTreeSet<[usize; 2]> = d
        .edges
        .iter()
        .map(|e| [e.endpoints[0].min(e.endpoints[1]), e.endpoints[0].max(e.endpoints[1])])
        .collect();
    if want != have || have.len() != d.edges.len() {
        violations.push(DrawingViolation::EdgeSetMismatch {
            missing: want.difference(&have).copied().collect(),
            extra: have.difference(&want).copied().collect(),
        });
    }
    let mut at: HashMap<GridPoint, usize> = HashMap::new();
    for (v, &p) in d.coords.iter().enumerate() {
        if let Some(&u) = at.get(&p) {
            violations.push(DrawingViolation::SharedGridPoint { a: u, b: v });
        } else {
            at.insert(p, v);
        }
    }
    let mut well_formed = vec![true; d.edges.len()];
    for (e, edge) in d.edges.iter().enumerate() {
        let poly = d.polyline(e);
        if poly.windows(2).any(|w| w[0].x != w[1].x && w[0].y != w[1].y) {
            violations.push(DrawingViolation::NotOrthogonal { edge: e });
            well_formed[e] = false;
        } else if poly.windows(2).any(|w| w[0] == w[1]) {
            violations.push(DrawingViolation::ZeroLengthSegment { edge: e });
            well_formed[e] = false;
        } else if edge.bend.is_some() && poly[0].x != poly[2].x && poly[0].y != poly[2].y {
            // bend present and genuinely turning: fine
        } else if edge.bend.is_some() {
            // A "bend" on a straight line is a zero-turn corner: still one segment per axis.
            let s = d.segments(e);
            if s[0].axis == s[1].axis {
                violations.push(DrawingViolation::NotOrthogonal { edge: e });
                well_formed[e] = false;
            }
        }
    }
    let mut owner: HashMap<GridPoint, usize> = HashMap::new();
    for e in 0..d.edges.len() {
        if !well_formed[e] {
            continue;
        }
        for p in interior_points(d, e) {
            if let Some(&v) = at.get(&p) {
                violations.push(DrawingViolation::PassesThroughVertex { edge: e, vertex: v });
            }
            if let Some(&f) = owner.get(&p) {
                violations.push(DrawingViolation::Overlap { a: f, b: e, at: p });
            } else {
                owner.insert(p, e);
            }
        }
    }
    let xs: BTreeSet<i64> = d.coords.iter().map(|p| p.x).collect();
    let ys: BTreeSet<i64> = d.coords.iter().map(|p| p.y).collect();
    if !d.coords.is_empty() {
        let (lo, hi) = d.bounds();
        for x in lo.x..=hi.x {
            if !xs.contains(&x) {
                violations.push(DrawingViolation::EmptyGridLine { axis: Axis::Vertical, at: x });
            }
        }
        for y in lo.y..=hi.y {
            if !ys.contains(&y) {
                violations.push(DrawingViolation::EmptyGridLine { axis: Axis::Horizontal, at: y });
            }
        }
    }
    let (width, height) = d.dimensions();
    let bound = g.vertex_count() as i64;
    if width > bound || height > bound {
        violations.push(DrawingViolation::TooLarge { width, height, bound });
    }
    DrawingReport { violations }
}

/// Remove every grid line that holds no vertex. Bends always share a line
/// with one of their endpoints, so they survive the remapping.
pub fn compress(d: &OrthogonalDrawing) -> OrthogonalDrawing {
    let xs: BTreeSet<i64> = d.coords.iter().map(|p| p.x).collect();
    let ys: BTreeSet<i64> = d.coords.iter().map(|p| p.y).collect();
    let rank_x: BTreeMap<i64, i64> = xs.iter().enumerate().map(|(i, &x)| (x, i as i64)).collect();
    let rank_y: BTreeMap<i64, i64> = ys.iter().enumerate().map(|(i, &y)| (y, i as i64)).collect();
    let map = |p: GridPoint| GridPoint::new(rank_x[&p.x], rank_y[&p.y]);
    OrthogonalDrawing {
        unit: d.unit,
        coords: d.coords.iter().map(|&p| map(p)).collect(),
        edges: d
            .edges
            .iter()
            .map(|e| DrawnEdge {
                endpoints: e.endpoints,
                bend: e.bend.map(map),
            })
            .collect(),
    }
}

/// On-disk form of a drawing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrawingFile {
    pub format_version: u32,
    pub unit: f64,
    pub vertices: Vec<DrawingVertex>,
    pub edges: Vec<DrawnEdgeFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrawingVertex {
    pub id: usize,
    pub x: i64,
    pub y: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrawnEdgeFile {
    pub endpoints: [usize; 2],
    pub bend: Option<GridPoint>,
}

impl TryFrom<DrawingFile> for OrthogonalDrawing {
    type Error = Error;

    fn try_from(f: DrawingFile) -> Result<Self> {
        if f.format_version != crate::io::FORMAT_VERSION {
            return Err(Error::InvalidDrawing(format!("unsupported format_version {}", f.format_version)));
        }
        if !(f.unit.is_finite() && f.unit > 0.0) {
            return Err(Error::InvalidDrawing(format!("unit {} must be positive", f.unit)));
        }
        let n = f.vertices.len();
        let mut coords = vec![None; n];
        for v in &f.vertices {
            let slot = coords
                .get_mut(v.id)
                .ok_or_else(|| Error::InvalidDrawing(format!("vertex id {} out of range 0..{n}", v.id)))?;
            if slot.is_some() {
                return Err(Error::InvalidDrawing(format!("vertex id {} listed twice", v.id)));
            }
            *slot = Some(GridPoint::new(v.x, v.y));
        }
        let coords = coords.into_iter().map(|c| c.expect("ids are a permutation of 0..n")).collect();
        for e in &f.edges {
            if e.endpoints.iter().any(|&v| v >= n) {
                return Err(Error::InvalidDrawing(format!("edge {:?} names a missing vertex", e.endpoints)));
            }
        }
        Ok(OrthogonalDrawing {
            unit: f.unit,
            coords,
            edges: f
                .edges
                .into_iter()
                .map(|e| DrawnEdge {
                    endpoints: e.endpoints,
                    bend: e.bend,
                })
                .collect(),
        }
        .sorted_edges())
    }
}

impl From<OrthogonalDrawing> for DrawingFile {
    fn from(d: OrthogonalDrawing) -> Self {
        DrawingFile {
            format_version: crate::io::FORMAT_VERSION,
            unit: d.unit,
            vertices: d
                .coords
                .iter()
                .enumerate()
                .map(|(id, p)| DrawingVertex { id, x: p.x, y: p.y })
                .collect(),
            edges: d
                .edges
                .into_iter()
                .map(|e| DrawnEdgeFile {
                    endpoints: e.endpoints,
                    bend: e.bend,
                })
                .collect(),
        }
    }
}

/// Parse a drawing and check it against `g`.
pub fn import_drawing(json: &str, g: &Graph) -> Result<OrthogonalDrawing> {
    let d: OrthogonalDrawing = serde_json::from_str(json)?;
    validate_drawing(g, &d).into_result()?;
    Ok(d)
}

pub fn export_drawing(d: &OrthogonalDrawing) -> String {
    serde_json::to_string_pretty(d).expect("drawings serialize")
}

/// Circular ladder `C_{2r} x K_2` drawn as two nested rectangular frames.
/// Outer vertices are `0..2r`, inner `2r..4r`, spoke `i -- 2r + i`.
pub fn prism_drawing(r: usize) -> (Graph, OrthogonalDrawing) {
    assert!(r >= 2, "prism needs at least 4 vertices per cycle");
    let n = 2 * r;
    let b = r / 2; // vertices on each vertical side
    let a = r - b; // vertices on each horizontal side
    let (w, h) = (a as i64 + 3, b as i64 + 3);
    // Clockwise from the top-left: top, right, bottom, left.
    let mut outer = Vec::with_capacity(n);
    outer.extend((0..a as i64).map(|i| GridPoint::new(2 + i, h)));
    outer.extend((0..b as i64).map(|i| GridPoint::new(w, h - 2 - i)));
    outer.extend((0..a as i64).map(|i| GridPoint::new(w - 2 - i, 0)));
    outer.extend((0..b as i64).map(|i| GridPoint::new(0, 2 + i)));
    let inward = |p: GridPoint| {
        GridPoint::new(
            if p.x == 0 { 1 } else if p.x == w { w - 1 } else { p.x },
            if p.y == 0 { 1 } else if p.y == h { h - 1 } else { p.y },
        )
    };
    let inner: Vec<GridPoint> = outer.iter().map(|&p| inward(p)).collect();
    let mut coords = outer.clone();
    coords.extend(inner.iter().copied());
    let mut edges = Vec::new();
    for ring in [0, n] {
        for i in 0..n {
            let (p, q) = (ring + i, ring + (i + 1) % n);
            let (cp, cq) = (coords[p], coords[q]);
            let bend = (cp.x != cq.x && cp.y != cq.y).then(|| frame_corner(cp, cq, w, h, ring == n));
            edges.push(DrawnEdge { endpoints: [p, q], bend });
        }
    }
    for i in 0..n {
        edges.push(DrawnEdge { endpoints: [i, n + i], bend: None });
    }
    let g = Graph::new(2 * n, edges.iter().map(|e| (e.endpoints[0], e.endpoints[1])));
    let d = OrthogonalDrawing {
        unit: DEFAULT_UNIT,
        coords,
        edges,
    }
    .sorted_edges();
    (g, d)
}

/// The prism of [`prism_drawing`] as an exact cover instance with `2r`
/// elements: even outer and odd inner vertices are elements, the rest are
/// sets. The drawing is renumbered to match the instance's graph.
pub fn prism_instance(r: usize) -> (crate::x3c::X3CInstance, OrthogonalDrawing) {
    let (g, d) = prism_drawing(r);
    let n = 2 * r;
    let is_element = |v: usize| if v < n { v.is_multiple_of(2) } else { (v - n) % 2 == 1 };
    let (elements, sets): (Vec<usize>, Vec<usize>) = (0..2 * n).partition(|&v| is_element(v));
    let mut new_id = vec![0; 2 * n];
    for (k, &v) in elements.iter().chain(&sets).enumerate() {
        new_id[v] = k;
    }
    let inst_sets = sets
        .iter()
        .map(|&w| {
            let nb = g.neighbors(w);
            [new_id[nb[0]] + 1, new_id[nb[1]] + 1, new_id[nb[2]] + 1]
        })
        .collect();
    let inst = crate::x3c::X3CInstance::new(n, inst_sets).expect("prisms are cubic and bipartite");
    let mut coords = vec![GridPoint::new(0, 0); 2 * n];
    for (v, &p) in d.coords.iter().enumerate() {
        coords[new_id[v]] = p;
    }
    let edges = d
        .edges
        .iter()
        .map(|e| DrawnEdge {
            endpoints: e.endpoints.map(|v| new_id[v]),
            bend: e.bend,
        })
        .collect();
    let d = OrthogonalDrawing {
        unit: d.unit,
        coords,
        edges,
    }
    .sorted_edges();
    (inst, d)
}

/// The frame corner between consecutive vertices on adjacent sides.
fn frame_corner(p: GridPoint, q: GridPoint, w: i64, h: i64, inner: bool) -> GridPoint {
    let (lo, hx, hy) = if inner { (1, w - 1, h - 1) } else { (0, w, h) };
    let xs = [lo, hx];
    let ys = [lo, hy];
    for &x in &xs {
        for &y in &ys {
            let c = GridPoint::new(x, y);
            if (c.x == p.x || c.y == p.y) && (c.x == q.x || c.y == q.y) {
                return c;
            }
        }
    }
    unreachable!("consecutive frame vertices on adjacent sides share a corner")
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::planarity::is_planar;

    pub(crate) fn square() -> (Graph, OrthogonalDrawing) {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0)]);
        let d = OrthogonalDrawing {
            unit: DEFAULT_UNIT,
            coords: vec![GridPoint::new(0, 0), GridPoint::new(1, 0), GridPoint::new(1, 1), GridPoint::new(0, 1)],
            edges: [(0, 1), (1, 2), (2, 3), (0, 3)]
                .iter()
                .map(|&(a, b)| DrawnEdge { endpoints: [a, b], bend: None })
                .collect(),
        };
        (g, d)
    }

    #[test]
    fn square_is_valid() {
        let (g, d) = square();
        assert!(validate_drawing(&g, &d).is_ok());
        assert_eq!(compress(&d), d);
    }

    #[test]
    fn overlap_detected() {
        // Path 0-1-2 on a line plus an edge 0-2 drawn straight through 1.
        let g = Graph::new(3, [(0, 1), (1, 2), (0, 2)]);
        let d = OrthogonalDrawing {
            unit: DEFAULT_UNIT,
            coords: vec![GridPoint::new(0, 0), GridPoint::new(1, 0), GridPoint::new(2, 0)],
            edges: vec![
                DrawnEdge { endpoints: [0, 1], bend: None },
                DrawnEdge { endpoints: [1, 2], bend: None },
                DrawnEdge { endpoints: [0, 2], bend: None },
            ],
        };
        let r = validate_drawing(&g, &d);
        assert!(r.violations.iter().any(|v| matches!(v, DrawingViolation::PassesThroughVertex { vertex: 1, .. })));
    }

    #[test]
    fn shared_interior_detected() {
        // Two edges from vertex 0 leaving in the same direction.
        let g = Graph::new(3, [(0, 1), (0, 2)]);
        let d = OrthogonalDrawing {
            unit: DEFAULT_UNIT,
            coords: vec![GridPoint::new(0, 0), GridPoint::new(2, 1), GridPoint::new(2, -1)],
            edges: vec![
                DrawnEdge { endpoints: [0, 1], bend: Some(GridPoint::new(2, 0)) },
                DrawnEdge { endpoints: [0, 2], bend: Some(GridPoint::new(2, 0)) },
            ],
        };
        let r = validate_drawing(&g, &d);
        assert!(r.violations.iter().any(|v| matches!(v, DrawingViolation::Overlap { .. })));
    }

    #[test]
    fn diagonal_edge_detected() {
        let (g, mut d) = square();
        d.coords[2] = GridPoint::new(2, 2);
        let r = validate_drawing(&g, &d);
        assert!(r.violations.iter().any(|v| matches!(v, DrawingViolation::NotOrthogonal { .. })));
    }

    #[test]
    fn two_bends_cannot_be_encoded_and_extra_corner_is_flagged() {
        // A bend collinear with both endpoints is not a turn.
        let (g, mut d) = square();
        d.edges[0].bend = Some(GridPoint::new(0, 0));
        let r = validate_drawing(&g, &d);
        assert!(!r.is_ok());
    }

    #[test]
    fn compress_removes_empty_lines() {
        let (g, mut d) = square();
        for p in &mut d.coords {
            p.x *= 3;
            p.y *= 2;
        }
        d.coords[1].x += 4;
        d.coords[2].x += 4;
        let r = validate_drawing(&g, &d);
        assert!(r.violations.iter().any(|v| matches!(v, DrawingViolation::EmptyGridLine { .. })));
        let c = compress(&d);
        assert!(validate_drawing(&g, &c).is_ok());
        assert_eq!(c.dimensions(), (1, 1));
        assert_eq!(compress(&c), c);
    }

    #[test]
    fn json_round_trip() {
        let (g, d) = prism_drawing(3);
        let back = import_drawing(&export_drawing(&d), &g).unwrap();
        assert_eq!(back, d);
        assert!(serde_json::from_str::<OrthogonalDrawing>(r#"{"format_version":1,"unit":10,"vertices":[],"edges":[],"x":1}"#).is_err());
    }

    #[test]
    fn prism_instances_match_their_drawings() {
        for r in [3, 6, 12] {
            let (inst, d) = prism_instance(r);
            assert!(crate::x3c::validate_pcx3c(&inst).all_ok());
            let ag = crate::x3c::associated_graph(&inst);
            assert!(validate_drawing(&ag.graph, &d).is_ok());
        }
    }

    #[test]
    fn prisms_are_valid() {
        for r in [2, 3, 4, 5, 6, 12] {
            let (g, d) = prism_drawing(r);
            assert!(is_planar(&g));
            assert_eq!(g.max_degree(), 3);
            let rep = validate_drawing(&g, &d);
            assert!(rep.is_ok(), "r = {r}: {:?}", rep.violations);
            assert_eq!(compress(&d), d);
        }
    }
}
