//! Azimuth choice where several chains meet.
//!
//! Every chain end sits at a construction vertex. Around a vertex (or a
//! gadget triangle) the first few triples of each incident chain are close to
//! one another, so the alpha/beta azimuths of those ends are picked jointly to
//! keep unrelated agents apart.

use std::f64::consts::PI;

use super::chain::ChainSkeleton;
use crate::geometry::Point3;

/// Candidate azimuths per end.
const CANDIDATES: usize = 24;
/// Hops per end that take part in the objective.
const REACH: usize = 3;
const SWEEPS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct End {
    pub chain: usize,
    pub at_from: bool,
    /// Index into the cluster's vertex list of the agent this end is merged with.
    pub vertex: usize,
}

struct Tagged {
    end: usize,
    p: Point3,
    /// Hop counted from the end (0 = touching the vertex); for gammas the
    /// index along the chain from the end (the vertex itself is 0).
    hop: usize,
    gamma: bool,
}

fn end_points(sk: &ChainSkeleton, end: &End, psi: f64, idx: usize, out: &mut Vec<Tagged>) {
    let n = sk.hops();
    let reach = REACH.min(n.div_ceil(2));
    for k in 0..reach {
        let z = if end.at_from { k + 1 } else { n - k };
        let (a, b) = sk.triple(z, psi + PI * k as f64);
        // far gamma of this hop; the near one is the vertex itself or was
        // pushed by the previous hop
        let g = if end.at_from { sk.gamma()[z] } else { sk.gamma()[z - 1] };
        for p in [a, b] {
            out.push(Tagged { end: idx, p, hop: k, gamma: false });
        }
        out.push(Tagged { end: idx, p: g, hop: k + 1, gamma: true });
    }
}

/// Whether two points of the same chain end are meant to be close (or are
/// fixed relative to each other).
fn designed(p: &Tagged, q: &Tagged) -> bool {
    match (p.gamma, q.gamma) {
        (true, true) => true,
        (false, false) => p.hop == q.hop,
        (false, true) => q.hop == p.hop || q.hop == p.hop + 1,
        (true, false) => p.hop == q.hop || p.hop == q.hop + 1,
    }
}

/// Objective: the smallest distance between points that have no reason to be
/// close (coarsened so near-ties fall through), then the soft penalty of
/// every pair closer than [`COMFORT`].
#[derive(Debug, Clone, Copy, PartialEq)]
struct Score {
    min: f64,
    penalty: f64,
}

const COMFORT: f64 = 1.8;

impl Score {
    fn key(&self) -> (i64, f64) {
        ((self.min * 1000.0).floor() as i64, -self.penalty)
    }

    fn better(&self, other: &Score) -> bool {
        let (a, b) = (self.key(), other.key());
        a.0 > b.0 || (a.0 == b.0 && a.1 > b.1 + 1e-12)
    }
}

fn score(sks: &[ChainSkeleton], ends: &[End], vertices: &[Point3], psi: &[Option<f64>]) -> Score {
    let mut pts = Vec::new();
    for (i, (e, a)) in ends.iter().zip(psi).enumerate() {
        if let Some(a) = a {
            end_points(&sks[e.chain], e, *a, i, &mut pts);
        }
    }
    let mut s = Score {
        min: f64::INFINITY,
        penalty: 0.0,
    };
    let mut add = |d: f64| {
        s.min = s.min.min(d);
        if d < COMFORT {
            s.penalty += (COMFORT - d) * (COMFORT - d);
        }
    };
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            if p.end != q.end || !designed(p, q) {
                add(p.p.distance(q.p));
            }
        }
        for (v, &x) in vertices.iter().enumerate() {
            // the end's own vertex is gamma 0 of that end
            let own = ends[p.end].vertex == v;
            if !own || !(p.gamma || p.hop == 0) {
                add(p.p.distance(x));
            }
        }
    }
    s
}

fn grid(k: usize) -> Vec<f64> {
    (0..k).map(|i| 2.0 * PI * i as f64 / k as f64).collect()
}

/// One azimuth per end, maximizing the cluster clearance; returns the
/// azimuths and the achieved clearance. Small clusters are searched
/// exhaustively on a coarse grid, larger ones greedily; both finish with
/// coordinate ascent on a fine grid. Deterministic.
pub(crate) fn optimize(sks: &[ChainSkeleton], ends: &[End], vertices: &[Point3]) -> (Vec<f64>, f64) {
    let mut psi: Vec<Option<f64>> = vec![None; ends.len()];
    if ends.len() <= EXHAUSTIVE_ENDS {
        let coarse = grid(COARSE);
        let mut best: Option<(Score, Vec<Option<f64>>)> = None;
        let total = COARSE.pow(ends.len() as u32);
        for code in 0..total {
            let mut c = code;
            for slot in psi.iter_mut() {
                *slot = Some(coarse[c % COARSE]);
                c /= COARSE;
            }
            let s = score(sks, ends, vertices, &psi);
            if best.as_ref().is_none_or(|(b, _)| s.better(b)) {
                best = Some((s, psi.clone()));
            }
        }
        psi = best.map(|b| b.1).unwrap_or_default();
    } else {
        let cands = grid(CANDIDATES);
        for i in 0..ends.len() {
            psi[i] = Some(pick(sks, ends, vertices, &mut psi, i, &cands));
        }
    }
    let fine = grid(FINE);
    for _ in 0..SWEEPS {
        let mut changed = false;
        for i in 0..ends.len() {
            let before = psi[i];
            psi[i] = Some(pick(sks, ends, vertices, &mut psi, i, &fine));
            changed |= before != psi[i];
        }
        if !changed {
            break;
        }
    }
    let s = score(sks, ends, vertices, &psi);
    (psi.into_iter().map(|a| a.unwrap()).collect(), s.min)
}

const EXHAUSTIVE_ENDS: usize = 4;
const COARSE: usize = 12;
const FINE: usize = 48;

fn pick(sks: &[ChainSkeleton], ends: &[End], vertices: &[Point3], psi: &mut [Option<f64>], i: usize, cands: &[f64]) -> f64 {
    // the incumbent goes first so it survives ties
    let incumbent = psi[i];
    let mut best: Option<(Score, f64)> = None;
    for a in incumbent.into_iter().chain(cands.iter().copied()) {
        psi[i] = Some(a);
        let s = score(sks, ends, vertices, psi);
        if best.as_ref().is_none_or(|(b, _)| s.better(b)) {
            best = Some((s, a));
        }
    }
    let a = best.map(|b| b.1).unwrap_or(0.0);
    psi[i] = Some(a);
    a
}
