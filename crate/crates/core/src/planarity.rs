//! Simple undirected graphs and an exact planarity test.
//!
//! Each biconnected block is tested by path addition: embed a cycle, then
//! repeatedly pick a fragment (a chord or a component hanging off the embedded
//! part), choose a face that holds all its attachment vertices, and route one
//! path of the fragment through that face. A fragment with no admissible face
//! proves the block nonplanar.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    #[serde(skip)]
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a simple graph; loops and repeated edges are dropped.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            assert!(a < n && b < n, "edge ({a}, {b}) out of range for {n} vertices");
            if a != b {
                set.insert((a.min(b), a.max(b)));
            }
        }
        let edges: Vec<(usize, usize)> = set.into_iter().collect();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        Graph { n, edges, adj }
    }

    pub fn complete(n: usize) -> Self {
        Graph::new(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))))
    }

    pub fn complete_bipartite(p: usize, q: usize) -> Self {
        Graph::new(p + q, (0..p).flat_map(|a| (0..q).map(move |b| (a, p + b))))
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.n
    }

    fn without_edge(&self, skip: usize) -> Graph {
        Graph::new(
            self.n,
            self.edges.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &e)| e),
        )
    }

    /// Edge sets of the biconnected blocks (bridges form single-edge blocks).
    pub fn blocks(&self) -> Vec<Vec<(usize, usize)>> {
        let mut disc = vec![usize::MAX; self.n];
        let mut low = vec![0; self.n];
        let mut time = 0;
        let mut stack: Vec<(usize, usize)> = Vec::new();
        let mut out = Vec::new();
        for root in 0..self.n {
            if disc[root] != usize::MAX {
                continue;
            }
            disc[root] = time;
            low[root] = time;
            time += 1;
            // (vertex, parent, next neighbor index)
            let mut dfs: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
            while let Some(&mut (v, parent, ref mut i)) = dfs.last_mut() {
                if *i < self.adj[v].len() {
                    let w = self.adj[v][*i];
                    *i += 1;
                    if disc[w] == usize::MAX {
                        stack.push((v, w));
                        disc[w] = time;
                        low[w] = time;
                        time += 1;
                        dfs.push((w, v, 0));
                    } else if w != parent && disc[w] < disc[v] {
                        stack.push((v, w));
                        low[v] = low[v].min(disc[w]);
                    }
                } else {
                    dfs.pop();
                    if parent != usize::MAX {
                        low[parent] = low[parent].min(low[v]);
                        if low[v] >= disc[parent] {
                            let mut block = Vec::new();
                            while let Some(e) = stack.pop() {
                                block.push((e.0.min(e.1), e.0.max(e.1)));
                                if e == (parent, v) {
                                    break;
                                }
                            }
                            block.sort_unstable();
                            out.push(block);
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Obstruction {
    K5,
    K33,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Planarity {
    Planar,
    /// A minimal nonplanar subgraph: a subdivision of K5 or K3,3.
    Nonplanar {
        obstruction: Obstruction,
        edges: Vec<(usize, usize)>,
    },
}

impl Planarity {
    pub fn is_planar(&self) -> bool {
        matches!(self, Planarity::Planar)
    }
}

pub fn planarity_test(g: &Graph) -> Planarity {
    if is_planar(g) {
        return Planarity::Planar;
    }
    // Drop edges while the rest stays nonplanar; what survives is a
    // subdivided Kuratowski graph.
    let mut h = g.clone();
    let mut i = 0;
    while i < h.edges.len() {
        let candidate = h.without_edge(i);
        if is_planar(&candidate) {
            i += 1;
        } else {
            h = candidate;
        }
    }
    let branch: Vec<usize> = (0..h.n).filter(|&v| h.degree(v) >= 3).collect();
    let obstruction = if branch.len() == 5 && branch.iter().all(|&v| h.degree(v) == 4) {
        Obstruction::K5
    } else {
        Obstruction::K33
    };
    Planarity::Nonplanar {
        obstruction,
        edges: h.edges,
    }
}

pub fn is_planar(g: &Graph) -> bool {
    g.blocks().iter().all(|b| block_is_planar(g.n, b))
}

fn block_is_planar(n: usize, block: &[(usize, usize)]) -> bool {
    let mut verts: Vec<usize> = block.iter().flat_map(|&(a, b)| [a, b]).collect();
    verts.sort_unstable();
    verts.dedup();
    let v = verts.len();
    if v < 5 || block.len() < 9 {
        return true;
    }
    if block.len() > 3 * v - 6 {
        return false;
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in block {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut emb = Embedding::new(n, &adj, cycle_through(&adj, verts[0]));
    loop {
        let frags = emb.fragments(&adj);
        if frags.is_empty() {
            return true;
        }
        let mut pick: Option<(usize, usize)> = None;
        for (fi, frag) in frags.iter().enumerate() {
            let faces: Vec<usize> = (0..emb.faces.len())
                .filter(|&f| frag.attachments.iter().all(|&a| emb.on_face[f].contains(&a)))
                .collect();
            match faces.len() {
                0 => return false,
                1 => {
                    pick = Some((fi, faces[0]));
                    break;
                }
                _ => {
                    if pick.is_none() {
                        pick = Some((fi, faces[0]));
                    }
                }
            }
        }
        let (fi, face) = pick.expect("fragments is non-empty");
        let path = emb.fragment_path(&adj, &frags[fi]);
        emb.add_path(face, &path);
    }
}

/// A cycle through `start`: DFS until the first edge back to an ancestor.
fn cycle_through(adj: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut on_path = vec![false; adj.len()];
    let mut seen = vec![false; adj.len()];
    let mut path: Vec<(usize, usize)> = vec![(start, 0)];
    on_path[start] = true;
    seen[start] = true;
    while let Some(&mut (v, ref mut i)) = path.last_mut() {
        if *i == adj[v].len() {
            on_path[v] = false;
            path.pop();
            continue;
        }
        let w = adj[v][*i];
        *i += 1;
        let parent = path.len().checked_sub(2).map(|k| path[k].0);
        if on_path[w] && Some(w) != parent {
            let from = path.iter().position(|&(x, _)| x == w).expect("w is on the path");
            return path[from..].iter().map(|&(x, _)| x).collect();
        }
        if !seen[w] {
            seen[w] = true;
            on_path[w] = true;
            path.push((w, 0));
        }
    }
    unreachable!("a biconnected block with at least 3 vertices has a cycle")
}

struct Fragment {
    attachments: Vec<usize>,
    /// Chord endpoints, or the component's interior vertices.
    chord: Option<(usize, usize)>,
    interior: Vec<usize>,
}

struct Embedding {
    in_h: Vec<bool>,
    edge_in_h: BTreeSet<(usize, usize)>,
    faces: Vec<Vec<usize>>,
    on_face: Vec<BTreeSet<usize>>,
}

impl Embedding {
    fn new(n: usize, _adj: &[Vec<usize>], cycle: Vec<usize>) -> Self {
        let mut in_h = vec![false; n];
        let mut edge_in_h = BTreeSet::new();
        for (i, &v) in cycle.iter().enumerate() {
            in_h[v] = true;
            let w = cycle[(i + 1) % cycle.len()];
            edge_in_h.insert((v.min(w), v.max(w)));
        }
        let set: BTreeSet<usize> = cycle.iter().copied().collect();
        Embedding {
            in_h,
            edge_in_h,
            faces: vec![cycle.clone(), cycle],
            on_face: vec![set.clone(), set],
        }
    }

    fn fragments(&self, adj: &[Vec<usize>]) -> Vec<Fragment> {
        let n = adj.len();
        let mut out = Vec::new();
        for v in 0..n {
            if !self.in_h[v] {
                continue;
            }
            for &w in &adj[v] {
                if v < w && self.in_h[w] && !self.edge_in_h.contains(&(v, w)) {
                    out.push(Fragment {
                        attachments: vec![v, w],
                        chord: Some((v, w)),
                        interior: Vec::new(),
                    });
                }
            }
        }
        let mut seen = vec![false; n];
        for s in 0..n {
            if self.in_h[s] || seen[s] || adj[s].is_empty() {
                continue;
            }
            let mut interior = vec![s];
            let mut att = BTreeSet::new();
            seen[s] = true;
            let mut i = 0;
            while i < interior.len() {
                let v = interior[i];
                i += 1;
                for &w in &adj[v] {
                    if self.in_h[w] {
                        att.insert(w);
                    } else if !seen[w] {
                        seen[w] = true;
                        interior.push(w);
                    }
                }
            }
            out.push(Fragment {
                attachments: att.into_iter().collect(),
                chord: None,
                interior,
            });
        }
        out
    }

    /// A path between two distinct attachments running through the fragment.
    fn fragment_path(&self, adj: &[Vec<usize>], frag: &Fragment) -> Vec<usize> {
        if let Some((a, b)) = frag.chord {
            return vec![a, b];
        }
        let inside: BTreeSet<usize> = frag.interior.iter().copied().collect();
        let start = frag.attachments[0];
        let mut prev = vec![usize::MAX; adj.len()];
        let mut queue = VecDeque::new();
        for &w in &adj[start] {
            if inside.contains(&w) && prev[w] == usize::MAX {
                prev[w] = start;
                queue.push_back(w);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if w != start && self.in_h[w] {
                    let mut path = vec![w, v];
                    let mut x = v;
                    while prev[x] != start {
                        x = prev[x];
                        path.push(x);
                    }
                    path.push(start);
                    path.reverse();
                    return path;
                }
                if inside.contains(&w) && prev[w] == usize::MAX {
                    prev[w] = v;
                    queue.push_back(w);
                }
            }
        }
        unreachable!("fragments of a biconnected block have two attachments")
    }

    fn add_path(&mut self, face: usize, path: &[usize]) {
        let f = &self.faces[face];
        let len = f.len();
        let first = path[0];
        let last = *path.last().expect("path has two ends");
        let i = f.iter().position(|&x| x == first).expect("attachment on face");
        let j = f.iter().position(|&x| x == last).expect("attachment on face");
        let interior = &path[1..path.len() - 1];
        // One side walks the face from `first` to `last` and returns along the path.
        let mut one: Vec<usize> = (0..=(j + len - i) % len).map(|k| f[(i + k) % len]).collect();
        one.extend(interior.iter().rev());
        let mut two: Vec<usize> = (0..=(i + len - j) % len).map(|k| f[(j + k) % len]).collect();
        two.extend(interior.iter());
        for w in path.windows(2) {
            self.edge_in_h.insert((w[0].min(w[1]), w[0].max(w[1])));
        }
        for &v in interior {
            self.in_h[v] = true;
        }
        self.on_face[face] = one.iter().copied().collect();
        self.faces[face] = one;
        self.on_face.push(two.iter().copied().collect());
        self.faces.push(two);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn petersen() -> Graph {
        let outer = (0..5).map(|i| (i, (i + 1) % 5));
        let spokes = (0..5).map(|i| (i, i + 5));
        let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
        Graph::new(10, outer.chain(spokes).chain(inner))
    }

    fn grid(w: usize, h: usize) -> Graph {
        let id = |x: usize, y: usize| y * w + x;
        let mut e = Vec::new();
        for y in 0..h {
            for x in 0..w {
                if x + 1 < w {
                    e.push((id(x, y), id(x + 1, y)));
                }
                if y + 1 < h {
                    e.push((id(x, y), id(x, y + 1)));
                }
            }
        }
        Graph::new(w * h, e)
    }

    #[test]
    fn textbook_obstructions() {
        match planarity_test(&Graph::complete(5)) {
            Planarity::Nonplanar { obstruction, edges } => {
                assert_eq!(obstruction, Obstruction::K5);
                assert_eq!(edges.len(), 10);
            }
            Planarity::Planar => panic!("K5 is nonplanar"),
        }
        match planarity_test(&Graph::complete_bipartite(3, 3)) {
            Planarity::Nonplanar { obstruction, edges } => {
                assert_eq!(obstruction, Obstruction::K33);
                assert_eq!(edges.len(), 9);
            }
            Planarity::Planar => panic!("K3,3 is nonplanar"),
        }
        match planarity_test(&petersen()) {
            Planarity::Nonplanar { obstruction, edges } => {
                assert_eq!(obstruction, Obstruction::K33);
                assert!(edges.len() < 15);
            }
            Planarity::Planar => panic!("Petersen is nonplanar"),
        }
    }

    #[test]
    fn planar_families() {
        assert!(is_planar(&Graph::complete(4)));
        assert!(is_planar(&grid(6, 5)));
        assert!(is_planar(&Graph::complete_bipartite(2, 7)));
        // Cube, octahedron-free prism, wheel.
        let cube = Graph::new(8, [(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4), (0, 4), (1, 5), (2, 6), (3, 7)]);
        assert!(is_planar(&cube));
        let wheel = Graph::new(9, (0..8).map(|i| (i, (i + 1) % 8)).chain((0..8).map(|i| (i, 8))));
        assert!(is_planar(&wheel));
    }

    #[test]
    fn blocks_of_two_triangles_and_bridge() {
        let g = Graph::new(7, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3), (5, 6)]);
        let mut sizes: Vec<usize> = g.blocks().iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 1, 3, 3]);
    }

    /// Planar by construction: random edge subsets of a triangulated grid.
    fn triangulated_grid(w: usize, h: usize, keep: &[bool]) -> Graph {
        let id = |x: usize, y: usize| y * w + x;
        let mut e = Vec::new();
        for y in 0..h {
            for x in 0..w {
                if x + 1 < w {
                    e.push((id(x, y), id(x + 1, y)));
                }
                if y + 1 < h {
                    e.push((id(x, y), id(x, y + 1)));
                }
                if x + 1 < w && y + 1 < h {
                    e.push((id(x, y), id(x + 1, y + 1)));
                }
            }
        }
        Graph::new(w * h, e.into_iter().zip(keep.iter().cycle()).filter(|(_, &k)| k).map(|(e, _)| e))
    }

    /// Smooth away degree-2 vertices and check the result is K5 or K3,3.
    fn is_kuratowski(n: usize, edges: &[(usize, usize)], kind: Obstruction) -> bool {
        let g = Graph::new(n, edges.iter().copied());
        let branch: Vec<usize> = (0..n).filter(|&v| g.degree(v) >= 3).collect();
        if (0..n).any(|v| g.degree(v) == 1) {
            return false;
        }
        let mut links = BTreeSet::new();
        for &b in &branch {
            for &first in g.neighbors(b) {
                let (mut prev, mut cur) = (b, first);
                while g.degree(cur) == 2 {
                    let next = g.neighbors(cur).iter().copied().find(|&x| x != prev).unwrap();
                    prev = cur;
                    cur = next;
                }
                if cur == b {
                    return false;
                }
                links.insert((b.min(cur), b.max(cur)));
            }
        }
        let deg_sum: usize = branch.iter().map(|&b| g.degree(b)).sum();
        if deg_sum != 2 * links.len() {
            return false;
        }
        match kind {
            Obstruction::K5 => branch.len() == 5 && links.len() == 10,
            Obstruction::K33 => {
                if branch.len() != 6 || links.len() != 9 {
                    return false;
                }
                let side: Vec<usize> = branch.iter().copied().filter(|&b| b == branch[0] || !links.contains(&(branch[0].min(b), branch[0].max(b)))).collect();
                side.len() == 3
                    && side.iter().all(|&a| side.iter().all(|&b| a == b || !links.contains(&(a.min(b), a.max(b)))))
            }
        }
    }

    #[test]
    fn random_graph_evidence_is_kuratowski() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut nonplanar = 0;
        for _ in 0..60 {
            let n = rng.gen_range(6..12);
            let e: Vec<(usize, usize)> = (0..rng.gen_range(2 * n..4 * n)).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
            let g = Graph::new(n, e);
            if let Planarity::Nonplanar { obstruction, edges } = planarity_test(&g) {
                nonplanar += 1;
                assert!(is_kuratowski(n, &edges, obstruction), "{edges:?}");
                assert!(edges.iter().all(|&(a, b)| g.has_edge(a, b)));
            }
        }
        assert!(nonplanar > 10);
    }

    proptest! {
        #[test]
        fn subgraphs_of_planar_are_planar(keep in prop::collection::vec(prop::bool::weighted(0.8), 1..80)) {
            prop_assert!(is_planar(&triangulated_grid(5, 5, &keep)));
        }

        #[test]
        fn adding_k5_breaks_planarity(keep in prop::collection::vec(prop::bool::weighted(0.8), 1..80)) {
            let g = triangulated_grid(5, 5, &keep);
            let mut e = g.edges().to_vec();
            // Subdivided K5 hanging off vertex 0.
            let base = 25;
            for a in 0..5 { for b in (a + 1)..5 {
                let mid = base + 5 + a * 5 + b;
                e.push((base + a, mid));
                e.push((mid, base + b));
            }}
            e.push((0, base));
            let h = Graph::new(base + 5 + 25, e);
            match planarity_test(&h) {
                Planarity::Nonplanar { obstruction, .. } => prop_assert_eq!(obstruction, Obstruction::K5),
                Planarity::Planar => prop_assert!(false, "K5 subdivision missed"),
            }
        }
    }
}
