//! Exact cover by 3-sets: instances, the associated bipartite graph, the
//! planar-cubic checks, and a backtracking solver.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planarity::{planarity_test, Graph, Planarity};

/// Universe `1..=m` and an ordered family of 3-sets. Set `j` (0-based) is
/// named `C_{j+1}` and its graph vertex `w_{j+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct X3CInstance {
    pub m: usize,
    pub sets: Vec<[usize; 3]>,
}

impl X3CInstance {
    /// Checked constructor; each set is stored sorted.
    pub fn new(m: usize, sets: Vec<[usize; 3]>) -> Result<Self> {
        let inst = X3CInstance {
            m,
            sets: sets
                .into_iter()
                .map(|mut s| {
                    s.sort_unstable();
                    s
                })
                .collect(),
        };
        if let Some(problem) = inst.shape_problems().into_iter().next() {
            return Err(Error::InvalidInstance(problem));
        }
        Ok(inst)
    }

    /// The six-element running example: every element in three sets, three
    /// exact covers.
    pub fn running_example() -> Self {
        X3CInstance::new(6, vec![[1, 2, 3], [1, 2, 4], [1, 3, 5], [2, 4, 6], [3, 5, 6], [4, 5, 6]])
            .expect("well-formed")
    }

    pub fn q(&self) -> usize {
        self.sets.len()
    }

    fn shape_problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.m == 0 || !self.m.is_multiple_of(3) {
            out.push(format!("universe size {} is not a positive multiple of 3", self.m));
        }
        for (j, s) in self.sets.iter().enumerate() {
            if s.iter().any(|&x| x == 0 || x > self.m) {
                out.push(format!("C{} = {s:?} has an element outside 1..={}", j + 1, self.m));
            }
            let distinct: BTreeSet<usize> = s.iter().copied().collect();
            if distinct.len() != 3 {
                out.push(format!("C{} = {s:?} repeats an element", j + 1));
            }
        }
        out
    }

    /// `occurrences[i]` = indices of sets containing element `i` (index 0 unused).
    pub fn occurrences(&self) -> Vec<Vec<usize>> {
        let mut occ = vec![Vec::new(); self.m + 1];
        for (j, s) in self.sets.iter().enumerate() {
            for &x in s {
                if x >= 1 && x <= self.m {
                    occ[x].push(j);
                }
            }
        }
        occ
    }

    /// Relabel elements and reorder sets by a seeded permutation.
    pub fn perturb(&self, seed: u64) -> X3CInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut relabel: Vec<usize> = (1..=self.m).collect();
        relabel.shuffle(&mut rng);
        let mut sets: Vec<[usize; 3]> = self
            .sets
            .iter()
            .map(|s| {
                let mut t = s.map(|x| relabel[x - 1]);
                t.sort_unstable();
                t
            })
            .collect();
        sets.shuffle(&mut rng);
        X3CInstance { m: self.m, sets }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pcx3cReport {
    pub is_x3c: bool,
    pub is_cubic: bool,
    pub is_planar: bool,
    pub sizes_ok: bool,
    pub problems: Vec<String>,
}

impl Pcx3cReport {
    pub fn all_ok(&self) -> bool {
        self.is_x3c && self.is_cubic && self.is_planar && self.sizes_ok
    }
}

pub fn validate_pcx3c(inst: &X3CInstance) -> Pcx3cReport {
    let mut problems = inst.shape_problems();
    let is_x3c = problems.is_empty();
    let occ = inst.occurrences();
    let mut is_cubic = true;
    for (i, sets) in occ.iter().enumerate().skip(1) {
        if sets.len() != 3 {
            is_cubic = false;
            problems.push(format!("element {i} occurs in {} sets", sets.len()));
        }
    }
    let sizes_ok = inst.m >= 6 && inst.q() == inst.m;
    if !sizes_ok {
        problems.push(format!("need |X| >= 6 and |C| = |X|, got |X| = {}, |C| = {}", inst.m, inst.q()));
    }
    let is_planar = if is_x3c {
        match planarity_test(&associated_graph(inst).graph) {
            Planarity::Planar => true,
            Planarity::Nonplanar { obstruction, .. } => {
                problems.push(format!("associated graph contains a {obstruction:?} subdivision"));
                false
            }
        }
    } else {
        false
    };
    Pcx3cReport {
        is_x3c,
        is_cubic,
        is_planar,
        sizes_ok,
        problems,
    }
}

/// Bipartite graph on `u_1..u_m` (vertices `0..m`) and `w_1..w_q`
/// (vertices `m..m+q`), with `{u_i, w_j}` iff `i` is in `C_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociatedGraph {
    pub m: usize,
    pub q: usize,
    pub graph: Graph,
}

impl AssociatedGraph {
    pub fn element_vertex(&self, i: usize) -> usize {
        i - 1
    }

    pub fn set_vertex(&self, j: usize) -> usize {
        self.m + j
    }

    pub fn is_element(&self, v: usize) -> bool {
        v < self.m
    }

    pub fn label(&self, v: usize) -> String {
        if v < self.m {
            format!("u{}", v + 1)
        } else {
            format!("w{}", v - self.m + 1)
        }
    }
}

pub fn associated_graph(inst: &X3CInstance) -> AssociatedGraph {
    let edges = inst
        .sets
        .iter()
        .enumerate()
        .flat_map(|(j, s)| s.iter().map(move |&i| (i - 1, inst.m + j)));
    AssociatedGraph {
        m: inst.m,
        q: inst.q(),
        graph: Graph::new(inst.m + inst.q(), edges),
    }
}

/// Selected set indices (0-based), sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CoverSolution {
    pub selected: Vec<usize>,
}

impl CoverSolution {
    pub fn check(&self, inst: &X3CInstance) -> Result<()> {
        let mut covered = vec![false; inst.m + 1];
        for &j in &self.selected {
            let s = inst
                .sets
                .get(j)
                .ok_or_else(|| Error::InvalidSolution(format!("no set with index {j}")))?;
            for &x in s {
                if covered[x] {
                    return Err(Error::InvalidSolution(format!("element {x} covered twice")));
                }
                covered[x] = true;
            }
        }
        match (1..=inst.m).find(|&x| !covered[x]) {
            Some(x) => Err(Error::InvalidSolution(format!("element {x} uncovered"))),
            None => Ok(()),
        }
    }

    pub fn contains(&self, j: usize) -> bool {
        self.selected.binary_search(&j).is_ok()
    }
}

/// Up to `limit` exact covers. Branches on the uncovered element with the
/// fewest usable sets (ties to the smallest element), sets in index order.
pub fn solve_exact_cover(inst: &X3CInstance, limit: usize) -> Vec<CoverSolution> {
    let mut search = CoverSearch {
        inst,
        occ: inst.occurrences(),
        covered: vec![false; inst.m + 1],
        chosen: Vec::new(),
        out: Vec::new(),
        limit,
    };
    if limit > 0 {
        search.run();
    }
    search.out
}

struct CoverSearch<'a> {
    inst: &'a X3CInstance,
    occ: Vec<Vec<usize>>,
    covered: Vec<bool>,
    chosen: Vec<usize>,
    out: Vec<CoverSolution>,
    limit: usize,
}

impl CoverSearch<'_> {
    fn usable(&self, j: usize) -> bool {
        self.inst.sets[j].iter().all(|&x| !self.covered[x])
    }

    fn run(&mut self) {
        let mut best: Option<(usize, usize)> = None;
        for x in 1..=self.inst.m {
            if self.covered[x] {
                continue;
            }
            let c = self.occ[x].iter().filter(|&&j| self.usable(j)).count();
            if best.is_none_or(|(_, bc)| c < bc) {
                best = Some((x, c));
            }
        }
        let Some((x, count)) = best else {
            let mut selected = self.chosen.clone();
            selected.sort_unstable();
            self.out.push(CoverSolution { selected });
            return;
        };
        if count == 0 {
            return;
        }
        for j in self.occ[x].clone() {
            if !self.usable(j) {
                continue;
            }
            for &y in &self.inst.sets[j] {
                self.covered[y] = true;
            }
            self.chosen.push(j);
            self.run();
            self.chosen.pop();
            for &y in &self.inst.sets[j] {
                self.covered[y] = false;
            }
            if self.out.len() >= self.limit {
                return;
            }
        }
    }
}
