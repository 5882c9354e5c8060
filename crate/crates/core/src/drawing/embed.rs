//! Backtracking search for an orthogonal drawing with at most one bend per
//! edge. Vertices are placed in BFS order; each placement also routes the
//! edges back to already placed neighbours, checked point by point against
//! everything drawn so far.

use std::collections::{HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{compress, validate_drawing, Dir, DrawnEdge, GridPoint, OrthogonalDrawing, DEFAULT_UNIT};
use crate::error::{Error, Result};
use crate::planarity::{is_planar, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbedOptions {
    pub seed: u64,
    /// Search nodes per attempt before restarting.
    pub node_budget: u64,
    pub attempts: u32,
    /// Coordinates stay within `[-max_grid, max_grid]`.
    pub max_grid: i64,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        EmbedOptions {
            seed: 0,
            node_budget: 200_000,
            attempts: 24,
            max_grid: 64,
        }
    }
}

pub fn embed_orthogonal(g: &Graph, opts: &EmbedOptions) -> Result<OrthogonalDrawing> {
    if g.max_degree() > 3 {
        return Err(Error::InvalidDrawing(format!("maximum degree {} exceeds 3", g.max_degree())));
    }
    if !g.is_connected() {
        return Err(Error::InvalidDrawing("graph is not connected".into()));
    }
    if !is_planar(g) {
        return Err(Error::InvalidDrawing("graph is not planar".into()));
    }
    let mut window = 2;
    for attempt in 0..opts.attempts {
        let seed = opts.seed.wrapping_mul(0x9e37_79b9).wrapping_add(attempt as u64);
        if attempt > 0 && attempt % 6 == 0 {
            window += 1;
        }
        let mut s = Search::new(g, seed, window, opts);
        if s.place(0) {
            let d = compress(&s.drawing());
            validate_drawing(g, &d).into_result()?;
            return Ok(d);
        }
    }
    Err(Error::DrawingSearchExhausted {
        width: 2 * opts.max_grid,
        height: 2 * opts.max_grid,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cell {
    Vertex(usize),
    Edge,
}

struct Search<'a> {
    g: &'a Graph,
    order: Vec<usize>,
    /// For each vertex, edge ids (into `g.edges()`) and the other endpoint.
    inc: Vec<Vec<(usize, usize)>>,
    pos: Vec<Option<GridPoint>>,
    occ: HashMap<GridPoint, Cell>,
    ports: Vec<[bool; 4]>,
    routed: Vec<Option<Option<GridPoint>>>,
    remaining: Vec<usize>,
    rng: ChaCha8Rng,
    window: i64,
    max_grid: i64,
    nodes: u64,
    budget: u64,
}

fn dir_index(d: Dir) -> usize {
    match d {
        Dir::Right => 0,
        Dir::Up => 1,
        Dir::Left => 2,
        Dir::Down => 3,
    }
}

fn toward(a: GridPoint, b: GridPoint) -> Dir {
    Dir::toward(a, b).expect("route corners are axis-aligned and distinct")
}

/// Lattice points strictly inside the polyline `a -> (bend) -> b`.
fn interior(a: GridPoint, bend: Option<GridPoint>, b: GridPoint) -> Vec<GridPoint> {
    let mut corners = vec![a];
    corners.extend(bend);
    corners.push(b);
    let mut out = Vec::new();
    for (k, w) in corners.windows(2).enumerate() {
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

#[derive(Clone)]
struct Route {
    edge: usize,
    other: usize,
    bend: Option<GridPoint>,
    points: Vec<GridPoint>,
    out_dir: Dir,
    in_dir: Dir,
}

impl<'a> Search<'a> {
    fn new(g: &'a Graph, seed: u64, window: i64, opts: &EmbedOptions) -> Self {
        let n = g.vertex_count();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut inc = vec![Vec::new(); n];
        for (e, &(a, b)) in g.edges().iter().enumerate() {
            inc[a].push((e, b));
            inc[b].push((e, a));
        }
        let min_deg = (0..n).map(|v| g.degree(v)).min().unwrap_or(0);
        let mut roots: Vec<usize> = (0..n).filter(|&v| g.degree(v) == min_deg).collect();
        roots.shuffle(&mut rng);
        let root = roots.first().copied().unwrap_or(0);
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        if n > 0 {
            queue.push_back(root);
            seen[root] = true;
        }
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        Search {
            g,
            order,
            inc,
            pos: vec![None; n],
            occ: HashMap::new(),
            ports: vec![[false; 4]; n],
            routed: vec![None; g.edges().len()],
            remaining: (0..n).map(|v| g.degree(v)).collect(),
            rng,
            window,
            max_grid: opts.max_grid,
            nodes: 0,
            budget: opts.node_budget,
        }
    }

    fn drawing(&self) -> OrthogonalDrawing {
        OrthogonalDrawing {
            unit: DEFAULT_UNIT,
            coords: self.pos.iter().map(|p| p.expect("all placed")).collect(),
            edges: self
                .g
                .edges()
                .iter()
                .zip(&self.routed)
                .map(|(&(a, b), r)| DrawnEdge {
                    endpoints: [a, b],
                    bend: r.expect("all routed"),
                })
                .collect(),
        }
        .sorted_edges()
    }

    fn free(&self, p: GridPoint) -> bool {
        p.x.abs() <= self.max_grid && p.y.abs() <= self.max_grid && !self.occ.contains_key(&p)
    }

    /// Routes from `v` at `at` to placed neighbour `w`, in preference order.
    fn routes_to(&self, at: GridPoint, e: usize, w: usize) -> Vec<Route> {
        let q = self.pos[w].expect("neighbour placed");
        let mut bends = Vec::new();
        if at.x == q.x || at.y == q.y {
            bends.push(None);
        } else {
            bends.push(Some(GridPoint::new(q.x, at.y)));
            bends.push(Some(GridPoint::new(at.x, q.y)));
        }
        let mut out = Vec::new();
        for bend in bends {
            let out_dir = toward(at, bend.unwrap_or(q));
            let in_dir = toward(q, bend.unwrap_or(at));
            if self.ports[w][dir_index(in_dir)] {
                continue;
            }
            let points = interior(at, bend, q);
            if points.iter().all(|&p| self.free(p)) {
                out.push(Route {
                    edge: e,
                    other: w,
                    bend,
                    points,
                    out_dir,
                    in_dir,
                });
            }
        }
        out
    }

    /// All ways to place `v` at `at` and route its edges to placed neighbours.
    fn options_at(&self, v: usize, at: GridPoint) -> Vec<Vec<Route>> {
        let edges: Vec<(usize, usize)> = self.inc[v].iter().copied().filter(|&(_, w)| self.pos[w].is_some()).collect();
        let mut combos: Vec<Vec<Route>> = vec![Vec::new()];
        for &(e, w) in &edges {
            let mut next = Vec::new();
            for combo in combos {
                for r in self.routes_to(at, e, w) {
                    let clash = combo.iter().any(|c: &Route| {
                        c.out_dir == r.out_dir || c.points.iter().any(|p| r.points.contains(p))
                    });
                    if !clash {
                        let mut c2: Vec<Route> = combo.clone();
                        c2.push(r);
                        next.push(c2);
                    }
                }
            }
            combos = next;
            if combos.is_empty() {
                break;
            }
        }
        combos
    }

    fn candidates(&mut self, v: usize) -> Vec<(GridPoint, Vec<Route>)> {
        let placed: Vec<GridPoint> = self.inc[v].iter().filter_map(|&(_, w)| self.pos[w]).collect();
        if placed.is_empty() {
            return vec![(GridPoint::new(0, 0), Vec::new())];
        }
        let lo_x = placed.iter().map(|p| p.x).min().unwrap() - self.window;
        let hi_x = placed.iter().map(|p| p.x).max().unwrap() + self.window;
        let lo_y = placed.iter().map(|p| p.y).min().unwrap() - self.window;
        let hi_y = placed.iter().map(|p| p.y).max().unwrap() + self.window;
        let mut out: Vec<(f64, GridPoint, Vec<Route>)> = Vec::new();
        for y in lo_y..=hi_y {
            for x in lo_x..=hi_x {
                let at = GridPoint::new(x, y);
                if !self.free(at) {
                    continue;
                }
                for combo in self.options_at(v, at) {
                    let len: i64 = combo.iter().map(|r| r.points.len() as i64 + 1).sum();
                    let bends = combo.iter().filter(|r| r.bend.is_some()).count();
                    let jitter: f64 = self.rng.gen_range(0.0..0.5);
                    out.push((len as f64 + 0.5 * bends as f64 + jitter, at, combo));
                }
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out.truncate(10);
        out.into_iter().map(|(_, p, c)| (p, c)).collect()
    }

    fn apply(&mut self, v: usize, at: GridPoint, routes: &[Route]) {
        self.pos[v] = Some(at);
        self.occ.insert(at, Cell::Vertex(v));
        for r in routes {
            for &p in &r.points {
                self.occ.insert(p, Cell::Edge);
            }
            self.ports[v][dir_index(r.out_dir)] = true;
            self.ports[r.other][dir_index(r.in_dir)] = true;
            self.routed[r.edge] = Some(r.bend);
            self.remaining[v] -= 1;
            self.remaining[r.other] -= 1;
        }
    }

    fn undo(&mut self, v: usize, at: GridPoint, routes: &[Route]) {
        self.pos[v] = None;
        self.occ.remove(&at);
        for r in routes {
            for p in &r.points {
                self.occ.remove(p);
            }
            self.ports[v][dir_index(r.out_dir)] = false;
            self.ports[r.other][dir_index(r.in_dir)] = false;
            self.routed[r.edge] = None;
            self.remaining[v] += 1;
            self.remaining[r.other] += 1;
        }
    }

    /// Every placed vertex keeps enough open directions for its unrouted edges.
    fn ports_suffice(&self) -> bool {
        for (u, p) in self.pos.iter().enumerate() {
            let Some(p) = *p else { continue };
            if self.remaining[u] == 0 {
                continue;
            }
            let open = Dir::ALL
                .iter()
                .filter(|&&d| {
                    if self.ports[u][dir_index(d)] {
                        return false;
                    }
                    let (dx, dy) = d.step();
                    let next = GridPoint::new(p.x + dx, p.y + dy);
                    match self.occ.get(&next) {
                        None => true,
                        Some(Cell::Edge) => false,
                        Some(Cell::Vertex(w)) => self.inc[u].iter().any(|&(e, x)| x == *w && self.routed[e].is_none()),
                    }
                })
                .count();
            if open < self.remaining[u] {
                return false;
            }
        }
        true
    }

    fn place(&mut self, k: usize) -> bool {
        if k == self.order.len() {
            return true;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return false;
        }
        let v = self.order[k];
        for (at, routes) in self.candidates(v) {
            self.apply(v, at, &routes);
            if self.ports_suffice() && self.place(k + 1) {
                return true;
            }
            self.undo(v, at, &routes);
            if self.nodes > self.budget {
                return false;
            }
        }
        false
    }
}
