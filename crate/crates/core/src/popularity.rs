//! Popularity margins between outcomes, exhaustive popular / strictly popular
//! decisions for small games, and a seeded local search for larger ones.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{room_cost_unchecked, validate_outcome, AgentId, Game, Outcome, Preference, Room};
use crate::geometry::Tolerance;

pub const DEFAULT_CAP: usize = 15;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginReport {
    /// Agents strictly preferring their room in the first outcome.
    pub improvers_forward: Vec<AgentId>,
    /// Agents strictly preferring their room in the second outcome.
    pub improvers_backward: Vec<AgentId>,
    pub margin: i64,
}

/// `phi(pi, pi_prime) = |N(pi, pi_prime)| - |N(pi_prime, pi)|`.
pub fn popularity_margin(game: &Game, pi: &Outcome, pi_prime: &Outcome, tol: &Tolerance) -> Result<MarginReport> {
    validate_outcome(game, pi).into_result()?;
    validate_outcome(game, pi_prime).into_result()?;
    let first = pi.assignment(game.len())?;
    let second = pi_prime.assignment(game.len())?;
    let mut fwd = Vec::new();
    let mut back = Vec::new();
    for a in 0..game.len() {
        let r = pi.room(&first, a);
        let t = pi_prime.room(&second, a);
        if r == t {
            continue;
        }
        let c1 = room_cost_unchecked(game, a, r.members());
        let c2 = room_cost_unchecked(game, a, t.members());
        match Preference::from_costs(c1, c2, tol) {
            Preference::PrefersFirst => fwd.push(a),
            Preference::PrefersSecond => back.push(a),
            Preference::Indifferent => {}
        }
    }
    Ok(MarginReport {
        margin: fwd.len() as i64 - back.len() as i64,
        improvers_forward: fwd,
        improvers_backward: back,
    })
}

/// Number of partitions of `n` agents into rooms of size `s`.
pub fn outcome_count(n: usize, s: usize) -> u128 {
    if s == 0 || !n.is_multiple_of(s) {
        return 0;
    }
    let mut total: u128 = 1;
    let mut left = n;
    while left > 0 {
        total = total.saturating_mul(binomial(left as u128 - 1, s as u128 - 1));
        left -= s;
    }
    total
}

fn binomial(n: u128, k: u128) -> u128 {
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Every partition of the agents into rooms, once each. The smallest unplaced
/// agent anchors the next room; its roommates run through combinations of the
/// remaining agents in lexicographic order.
pub struct OutcomeIter {
    n: usize,
    k: usize,
    placed: Vec<bool>,
    stack: Vec<Frame>,
    started: bool,
    done: bool,
}

struct Frame {
    anchor: AgentId,
    cands: Vec<AgentId>,
    idx: Vec<usize>,
}

impl Frame {
    fn members(&self) -> impl Iterator<Item = AgentId> + '_ {
        std::iter::once(self.anchor).chain(self.idx.iter().map(|&i| self.cands[i]))
    }

    fn advance(&mut self) -> bool {
        let k = self.idx.len();
        let m = self.cands.len();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.idx[i] < m - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                return true;
            }
        }
        false
    }
}

impl OutcomeIter {
    fn new(n: usize, s: usize) -> Self {
        OutcomeIter {
            n,
            k: s - 1,
            placed: vec![false; n],
            stack: Vec::new(),
            started: false,
            done: false,
        }
    }

    fn set(&mut self, top: usize, value: bool) {
        let members: Vec<AgentId> = self.stack[top].members().collect();
        for a in members {
            self.placed[a] = value;
        }
    }

    fn descend(&mut self) {
        while let Some(anchor) = (0..self.n).find(|&a| !self.placed[a]) {
            let cands: Vec<AgentId> = (anchor + 1..self.n).filter(|&b| !self.placed[b]).collect();
            let frame = Frame {
                anchor,
                cands,
                idx: (0..self.k).collect(),
            };
            self.stack.push(frame);
            let top = self.stack.len() - 1;
            self.set(top, true);
        }
    }

    fn current(&self) -> Outcome {
        Outcome::new(self.stack.iter().map(|f| Room::new(f.members().collect())).collect())
    }
}

impl Iterator for OutcomeIter {
    type Item = Outcome;

    fn next(&mut self) -> Option<Outcome> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            self.descend();
            return Some(self.current());
        }
        while let Some(top) = self.stack.len().checked_sub(1) {
            self.set(top, false);
            if self.stack[top].advance() {
                self.set(top, true);
                self.descend();
                return Some(self.current());
            }
            self.stack.pop();
        }
        self.done = true;
        None
    }
}

pub fn enumerate_outcomes(game: &Game, cap_agents: usize) -> Result<OutcomeIter> {
    if game.len() > cap_agents {
        return Err(Error::CapExceeded {
            needed: game.len(),
            cap: cap_agents,
        });
    }
    Ok(OutcomeIter::new(game.len(), game.room_size()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopularityMode {
    Popular,
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopularityStatus {
    Popular,
    StrictlyPopular,
    NotPopular,
    NotStrictlyPopular,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopularityVerdict {
    pub status: PopularityStatus,
    pub witness: Option<Outcome>,
    pub outcomes_examined: u64,
}

/// Exhaustive check of `pi` against every outcome. The first violating
/// outcome in enumeration order is returned as the witness.
pub fn decide_popularity(
    game: &Game,
    pi: &Outcome,
    mode: PopularityMode,
    cap_agents: usize,
    tol: &Tolerance,
) -> Result<PopularityVerdict> {
    validate_outcome(game, pi).into_result()?;
    if game.len() > cap_agents {
        return Ok(PopularityVerdict {
            status: PopularityStatus::Inconclusive,
            witness: None,
            outcomes_examined: 0,
        });
    }
    let n = game.len();
    let assignment = pi.assignment(n)?;
    let base: Vec<f64> = (0..n)
        .map(|a| room_cost_unchecked(game, a, pi.room(&assignment, a).members()))
        .collect();
    let mut dfs = Dfs {
        game,
        tol,
        base: &base,
        pi_rooms: pi.rooms(),
        mode,
        placed: vec![false; n],
        rooms: Vec::with_capacity(n / game.room_size()),
        examined: 0,
        witness: None,
    };
    dfs.run(0, 0, true);
    let status = match (mode, dfs.witness.is_some()) {
        (PopularityMode::Popular, false) => PopularityStatus::Popular,
        (PopularityMode::Popular, true) => PopularityStatus::NotPopular,
        (PopularityMode::Strict, false) => PopularityStatus::StrictlyPopular,
        (PopularityMode::Strict, true) => PopularityStatus::NotStrictlyPopular,
    };
    Ok(PopularityVerdict {
        status,
        witness: dfs.witness,
        outcomes_examined: dfs.examined,
    })
}

struct Dfs<'a> {
    game: &'a Game,
    tol: &'a Tolerance,
    base: &'a [f64],
    pi_rooms: &'a [Room],
    mode: PopularityMode,
    placed: Vec<bool>,
    rooms: Vec<Room>,
    examined: u64,
    witness: Option<Outcome>,
}

impl Dfs<'_> {
    /// `margin` accumulates `phi(pi, candidate)` over the rooms placed so far;
    /// `same` tracks whether every placed room also occurs in `pi`.
    fn run(&mut self, from: usize, margin: i64, same: bool) -> bool {
        let n = self.placed.len();
        let Some(anchor) = (from..n).find(|&a| !self.placed[a]) else {
            self.examined += 1;
            let violates = match self.mode {
                PopularityMode::Popular => margin < 0,
                PopularityMode::Strict => !same && margin <= 0,
            };
            if violates {
                self.witness = Some(Outcome::new(self.rooms.clone()));
            }
            return violates;
        };
        let k = self.game.room_size() - 1;
        let cands: Vec<AgentId> = (anchor + 1..n).filter(|&b| !self.placed[b]).collect();
        let mut chosen = Vec::with_capacity(k);
        self.choose(anchor, &cands, 0, k, &mut chosen, margin, same)
    }

    #[allow(clippy::too_many_arguments)]
    fn choose(
        &mut self,
        anchor: AgentId,
        cands: &[AgentId],
        start: usize,
        k: usize,
        chosen: &mut Vec<AgentId>,
        margin: i64,
        same: bool,
    ) -> bool {
        if chosen.len() == k {
            let mut members = Vec::with_capacity(k + 1);
            members.push(anchor);
            members.extend_from_slice(chosen);
            let room = Room::new(members);
            let mut delta = 0;
            for &a in room.members() {
                let c = room_cost_unchecked(self.game, a, room.members());
                delta += match Preference::from_costs(self.base[a], c, self.tol) {
                    Preference::PrefersFirst => 1,
                    Preference::PrefersSecond => -1,
                    Preference::Indifferent => 0,
                };
            }
            let in_pi = self.pi_rooms.binary_search(&room).is_ok();
            for &a in room.members() {
                self.placed[a] = true;
            }
            self.rooms.push(room);
            let found = self.run(anchor + 1, margin + delta, same && in_pi);
            let room = self.rooms.pop().expect("pushed above");
            for &a in room.members() {
                self.placed[a] = false;
            }
            return found;
        }
        for i in start..cands.len() {
            if cands.len() - i < k - chosen.len() {
                break;
            }
            chosen.push(cands[i]);
            let found = self.choose(anchor, cands, i + 1, k, chosen, margin, same);
            chosen.pop();
            if found {
                return true;
            }
        }
        false
    }
}

/// Seeded hill-climb for an outcome `pi'` with `phi(pi', pi) > 0`. Moves are
/// swaps of two agents and rotations of three, drawn between rooms that are
/// close together. Returns the first positive-margin candidate found within
/// `budget` moves.
pub fn search_improving_outcome(
    game: &Game,
    pi: &Outcome,
    budget: u64,
    seed: u64,
    tol: &Tolerance,
) -> Result<Option<(Outcome, MarginReport)>> {
    validate_outcome(game, pi).into_result()?;
    if budget == 0 {
        return Ok(None);
    }
    let n = game.len();
    let s = game.room_size();
    let mut rooms: Vec<Vec<AgentId>> = pi.rooms().iter().map(|r| r.members().to_vec()).collect();
    let mut room_of = pi.assignment(n)?;
    let base: Vec<f64> = (0..n).map(|a| room_cost_unchecked(game, a, &rooms[room_of[a]])).collect();
    let score = |a: AgentId, members: &[AgentId]| -> i64 {
        match Preference::from_costs(room_cost_unchecked(game, a, members), base[a], tol) {
            Preference::PrefersFirst => 1,
            Preference::PrefersSecond => -1,
            Preference::Indifferent => 0,
        }
    };
    let mut contrib = vec![0i64; n];
    let mut margin = 0i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let neighborhood = (3 * s).min(n - 1);
    for _ in 0..budget {
        let a = rng.gen_range(0..n);
        let near: Vec<AgentId> = if n <= 64 {
            let mut all: Vec<AgentId> = (0..n).filter(|&b| b != a).collect();
            all.sort_by(|&x, &y| game.distance(a, x).total_cmp(&game.distance(a, y)));
            all.truncate(neighborhood);
            all
        } else {
            game.spatial_index().nearest(a, neighborhood).into_iter().map(|(b, _)| b).collect()
        };
        let others: Vec<AgentId> = near.into_iter().filter(|&b| room_of[b] != room_of[a]).collect();
        let Some(&b) = others.choose(&mut rng) else { continue };
        let mut movers = vec![a, b];
        if rng.gen_bool(0.5) {
            let thirds: Vec<AgentId> = others
                .iter()
                .copied()
                .filter(|&c| room_of[c] != room_of[a] && room_of[c] != room_of[b])
                .collect();
            if let Some(&c) = thirds.choose(&mut rng) {
                movers.push(c);
            }
        }
        // Rotate: movers[i] takes the seat of movers[i + 1].
        let targets: Vec<usize> = movers.iter().map(|&m| room_of[m]).collect();
        let mut touched: Vec<usize> = targets.clone();
        touched.sort_unstable();
        touched.dedup();
        let before: i64 = touched.iter().flat_map(|&r| rooms[r].iter()).map(|&x| contrib[x]).sum();
        let saved: Vec<Vec<AgentId>> = touched.iter().map(|&r| rooms[r].clone()).collect();
        apply_rotation(&mut rooms, &mut room_of, &movers, &targets);
        let mut after = 0;
        let mut fresh = Vec::new();
        for &r in &touched {
            for &x in &rooms[r] {
                let c = score(x, &rooms[r]);
                after += c;
                fresh.push((x, c));
            }
        }
        let accept = after > before || (after == before && rng.gen_bool(0.3));
        if accept {
            for (x, c) in fresh {
                contrib[x] = c;
            }
            margin += after - before;
            if margin > 0 {
                let cand = Outcome::new(rooms.iter().map(|r| Room::new(r.clone())).collect());
                let report = popularity_margin(game, &cand, pi, tol)?;
                debug_assert_eq!(report.margin, margin);
                return Ok(Some((cand, report)));
            }
        } else {
            for (&r, members) in touched.iter().zip(saved) {
                for &x in &members {
                    room_of[x] = r;
                }
                rooms[r] = members;
            }
        }
    }
    Ok(None)
}

fn apply_rotation(rooms: &mut [Vec<AgentId>], room_of: &mut [usize], movers: &[AgentId], targets: &[usize]) {
    let k = movers.len();
    for i in 0..k {
        let m = movers[i];
        let from = targets[i];
        let to = targets[(i + 1) % k];
        let pos = rooms[from].iter().position(|&x| x == m).expect("mover sits in its room");
        rooms[from].swap_remove(pos);
        rooms[to].push(m);
        room_of[m] = to;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::most_preferred_rooms;
    use crate::geometry::Point3;
    use proptest::prelude::*;
    use rand::Rng;
    use std::collections::HashSet;

    fn triangles(offsets: &[(f64, f64)]) -> Game {
        let h = 3f64.sqrt() / 2.0;
        let mut pts = Vec::new();
        for &(x, y) in offsets {
            pts.push(Point3::new(x, y, 0.0));
            pts.push(Point3::new(x + 1.0, y, 0.0));
            pts.push(Point3::new(x + 0.5, y + h, 0.0));
        }
        Game::from_points(&pts, 3).unwrap()
    }

    fn natural(n: usize) -> Outcome {
        Outcome::new((0..n / 3).map(|i| Room::from([3 * i, 3 * i + 1, 3 * i + 2])).collect())
    }

    #[test]
    fn counts_match_formula() {
        for (n, want) in [(3, 1u128), (6, 10), (9, 280), (12, 15_400)] {
            let g = Game::from_points(&vec![Point3::ORIGIN; n], 3).unwrap();
            let all: Vec<Outcome> = enumerate_outcomes(&g, 15).unwrap().collect();
            assert_eq!(all.len() as u128, want);
            assert_eq!(outcome_count(n, 3), want);
            let distinct: HashSet<&Outcome> = all.iter().collect();
            assert_eq!(distinct.len(), all.len());
            assert!(all.iter().all(|o| validate_outcome(&g, o).is_ok()));
        }
        assert_eq!(outcome_count(15, 3), 1_401_400);
    }

    #[test]
    fn cap_refuses() {
        let g = Game::from_points(&vec![Point3::ORIGIN; 18], 3).unwrap();
        assert!(matches!(enumerate_outcomes(&g, 15), Err(Error::CapExceeded { needed: 18, cap: 15 })));
        let v = decide_popularity(&g, &natural(18), PopularityMode::Popular, 15, &Tolerance::default()).unwrap();
        assert_eq!(v.status, PopularityStatus::Inconclusive);
        assert_eq!(v.outcomes_examined, 0);
    }

    #[test]
    fn self_margin_is_zero() {
        let g = triangles(&[(0.0, 0.0), (10.0, 0.0)]);
        let o = natural(6);
        let m = popularity_margin(&g, &o, &o, &Tolerance::default()).unwrap();
        assert_eq!(m.margin, 0);
        assert!(m.improvers_forward.is_empty() && m.improvers_backward.is_empty());
    }

    #[test]
    fn single_room_is_strictly_popular() {
        let g = triangles(&[(0.0, 0.0)]);
        let v = decide_popularity(&g, &natural(3), PopularityMode::Strict, 15, &Tolerance::default()).unwrap();
        assert_eq!(v.status, PopularityStatus::StrictlyPopular);
        assert_eq!(v.outcomes_examined, 1);
    }

    #[test]
    fn separated_triangles() {
        let g = triangles(&[(0.0, 0.0), (10.0, 0.0), (0.0, 10.0)]);
        let tol = Tolerance::default();
        let v = decide_popularity(&g, &natural(9), PopularityMode::Strict, 15, &tol).unwrap();
        assert_eq!(v.status, PopularityStatus::StrictlyPopular);
        assert_eq!(v.outcomes_examined, 280);

        let mixed = Outcome::new(vec![Room::from([0, 1, 3]), Room::from([2, 4, 5]), Room::from([6, 7, 8])]);
        let v = decide_popularity(&g, &mixed, PopularityMode::Popular, 15, &tol).unwrap();
        assert_eq!(v.status, PopularityStatus::NotPopular);
        let w = v.witness.unwrap();
        assert!(popularity_margin(&g, &mixed, &w, &tol).unwrap().margin < 0);
        assert!(popularity_margin(&g, &natural(9), &mixed, &tol).unwrap().margin > 0);
    }

    #[test]
    fn duplicated_geometry_is_popular_not_strict() {
        // Unit hexagon split into two paths, next to a far triangle. Rotating
        // the hexagon split gives a distinct outcome with the same cost profile.
        let mut pts: Vec<Point3> = (0..6)
            .map(|i| {
                let t = std::f64::consts::FRAC_PI_3 * i as f64;
                Point3::new(t.cos(), t.sin(), 0.0)
            })
            .collect();
        pts.extend(triangles(&[(10.0, 0.0)]).agents().iter().map(|a| a.position));
        let g = Game::from_points(&pts, 3).unwrap();
        let tol = Tolerance::default();
        let pop = decide_popularity(&g, &natural(9), PopularityMode::Popular, 15, &tol).unwrap();
        assert_eq!(pop.status, PopularityStatus::Popular);
        let strict = decide_popularity(&g, &natural(9), PopularityMode::Strict, 15, &tol).unwrap();
        assert_eq!(strict.status, PopularityStatus::NotStrictlyPopular);
        let w = strict.witness.unwrap();
        assert_ne!(w, natural(9));
        assert!(popularity_margin(&g, &natural(9), &w, &tol).unwrap().margin <= 0);
    }

    #[test]
    fn search_budget_zero() {
        let g = triangles(&[(0.0, 0.0), (10.0, 0.0)]);
        assert!(search_improving_outcome(&g, &natural(6), 0, 1, &Tolerance::default()).unwrap().is_none());
    }

    #[test]
    fn search_repairs_scramble() {
        let offs: Vec<(f64, f64)> = (0..8).map(|i| (10.0 * i as f64, 0.0)).collect();
        let g = triangles(&offs);
        let tol = Tolerance::default();
        assert!(search_improving_outcome(&g, &natural(24), 5_000, 3, &tol).unwrap().is_none());
        let mut rooms: Vec<Room> = natural(24).rooms().to_vec();
        rooms[0] = Room::from([0, 1, 5]);
        rooms[1] = Room::from([2, 3, 4]);
        let scrambled = Outcome::new(rooms);
        let (w, rep) = search_improving_outcome(&g, &scrambled, 5_000, 3, &tol).unwrap().unwrap();
        assert!(rep.margin > 0);
        assert_eq!(popularity_margin(&g, &w, &scrambled, &tol).unwrap(), rep);
        let again = search_improving_outcome(&g, &scrambled, 5_000, 3, &tol).unwrap().unwrap();
        assert_eq!(again.0, w);
    }

    fn game9() -> impl Strategy<Value = Game> {
        prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64, -1.0..1.0f64), 9).prop_map(|v| {
            let pts: Vec<Point3> = v.into_iter().map(|(x, y, z)| Point3::new(x, y, z)).collect();
            Game::from_points(&pts, 3).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn margin_antisymmetric(g in game9(), i in 0usize..280, j in 0usize..280) {
            let all: Vec<Outcome> = enumerate_outcomes(&g, 15).unwrap().collect();
            let tol = Tolerance::default();
            let f = popularity_margin(&g, &all[i], &all[j], &tol).unwrap();
            let b = popularity_margin(&g, &all[j], &all[i], &tol).unwrap();
            prop_assert_eq!(f.margin + b.margin, 0);
            prop_assert_eq!(f.margin, f.improvers_forward.len() as i64 - f.improvers_backward.len() as i64);
            let fw: HashSet<_> = f.improvers_forward.iter().collect();
            prop_assert!(f.improvers_backward.iter().all(|x| !fw.contains(x)));
        }

        #[test]
        fn exhaustive_agrees_with_brute_force(g in game9(), i in 0usize..280) {
            let all: Vec<Outcome> = enumerate_outcomes(&g, 15).unwrap().collect();
            let tol = Tolerance::default();
            let pi = &all[i];
            let margins: Vec<i64> = all.iter().map(|o| popularity_margin(&g, pi, o, &tol).unwrap().margin).collect();
            let v = decide_popularity(&g, pi, PopularityMode::Popular, 15, &tol).unwrap();
            prop_assert_eq!(v.status == PopularityStatus::Popular, margins.iter().all(|&m| m >= 0));
            let strict = all.iter().zip(&margins).all(|(o, &m)| o == pi || m > 0);
            let v = decide_popularity(&g, pi, PopularityMode::Strict, 15, &tol).unwrap();
            prop_assert_eq!(v.status == PopularityStatus::StrictlyPopular, strict);
        }
    }

    #[test]
    fn all_best_outcome_is_popular() {
        // Every agent in a most preferred room forces phi >= 0 against everyone.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let tol = Tolerance::default();
        let mut checked = 0;
        for _ in 0..200 {
            let offs: Vec<(f64, f64)> = (0..3).map(|_| (rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0))).collect();
            let g = triangles(&offs);
            let pi = natural(9);
            let all_best = (0..9).all(|a| {
                let mates: Vec<AgentId> = pi.rooms()[a / 3].members().iter().copied().filter(|&b| b != a).collect();
                most_preferred_rooms(&g, a, &tol).contains(&mates)
            });
            if !all_best {
                continue;
            }
            checked += 1;
            let v = decide_popularity(&g, &pi, PopularityMode::Popular, 15, &tol).unwrap();
            assert_eq!(v.status, PopularityStatus::Popular);
        }
        assert!(checked > 10);
    }
}
