//! Games `(V, E, s)`: agents embedded in 3-space, rooms of size `s`, and the
//! preference relation induced by summed distances to roommates.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{euclidean_distance, Point3, Tolerance};
use crate::spatial::{SpatialIndex, DEFAULT_CELL};

pub type AgentId = usize;

/// Structural role of an agent. Games not produced by the reduction use `Plain`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Element,
    Set,
    Bend,
    Alpha,
    Beta,
    Gamma,
    AuxU,
    AuxL,
    Leaf,
    Tree,
    Center,
    Plain,
}

impl AgentKind {
    /// The two near-coincident members of a chain triple.
    pub fn is_chain_pair(self) -> bool {
        matches!(self, AgentKind::Alpha | AgentKind::Beta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: AgentId,
    pub label: String,
    pub kind: AgentKind,
    pub position: Point3,
}

/// An immutable game. Ids are dense `0..n` and equal to the agent's index.
#[derive(Debug)]
pub struct Game {
    agents: Vec<Agent>,
    room_size: usize,
    epsilon: f64,
    index: OnceLock<SpatialIndex>,
}

impl Clone for Game {
    fn clone(&self) -> Self {
        Game {
            agents: self.agents.clone(),
            room_size: self.room_size,
            epsilon: self.epsilon,
            index: OnceLock::new(),
        }
    }
}

impl PartialEq for Game {
    fn eq(&self, other: &Self) -> bool {
        self.room_size == other.room_size
            && self.epsilon.to_bits() == other.epsilon.to_bits()
            && self.agents == other.agents
    }
}

impl Game {
    pub fn new(agents: Vec<Agent>, room_size: usize, epsilon: f64) -> Result<Self> {
        if room_size == 0 {
            return Err(Error::InvalidGame("room size must be positive".into()));
        }
        if agents.is_empty() || !agents.len().is_multiple_of(room_size) {
            return Err(Error::InvalidGame(format!(
                "{} agents is not a positive multiple of room size {room_size}",
                agents.len()
            )));
        }
        if epsilon != 0.0 && !(epsilon > 0.0 && epsilon < 0.001) {
            return Err(Error::InvalidGame(format!("epsilon {epsilon} outside (0, 0.001)")));
        }
        let mut labels = HashSet::with_capacity(agents.len());
        for (i, a) in agents.iter().enumerate() {
            if a.id != i {
                return Err(Error::InvalidGame(format!("agent at index {i} has id {}", a.id)));
            }
            if !labels.insert(a.label.as_str()) {
                return Err(Error::InvalidGame(format!("duplicate label {:?}", a.label)));
            }
            if !a.position.is_finite() {
                return Err(Error::InvalidGame(format!("agent {} has a non-finite position", a.label)));
            }
        }
        Ok(Game {
            agents,
            room_size,
            epsilon,
            index: OnceLock::new(),
        })
    }

    /// Unlabeled game from bare positions, labels `a0, a1, ...`.
    pub fn from_points(points: &[Point3], room_size: usize) -> Result<Self> {
        let agents = points
            .iter()
            .enumerate()
            .map(|(id, &position)| Agent {
                id,
                label: format!("a{id}"),
                kind: AgentKind::Plain,
                position,
            })
            .collect();
        Game::new(agents, room_size, 0.0)
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn agent(&self, id: AgentId) -> &Agent {
        &self.agents[id]
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn room_size(&self) -> usize {
        self.room_size
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn position(&self, id: AgentId) -> Point3 {
        self.agents[id].position
    }

    pub fn distance(&self, a: AgentId, b: AgentId) -> f64 {
        euclidean_distance(self.agents[a].position, self.agents[b].position)
    }

    pub fn find_label(&self, label: &str) -> Option<AgentId> {
        self.agents.iter().position(|a| a.label == label)
    }

    pub fn spatial_index(&self) -> &SpatialIndex {
        self.index.get_or_init(|| {
            let pts: Vec<Point3> = self.agents.iter().map(|a| a.position).collect();
            SpatialIndex::new(&pts, DEFAULT_CELL)
        })
    }

    /// Agents within `radius` of `a` (excluding `a`), nearest first.
    pub fn neighbors_within(&self, a: AgentId, radius: f64) -> Vec<(AgentId, f64)> {
        self.spatial_index().within(self.position(a), radius, Some(a))
    }
}

/// A set of agents of the game's room size, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Room(Vec<AgentId>);

impl Room {
    pub fn new(mut members: Vec<AgentId>) -> Self {
        members.sort_unstable();
        Room(members)
    }

    pub fn members(&self) -> &[AgentId] {
        &self.0
    }

    pub fn contains(&self, a: AgentId) -> bool {
        self.0.binary_search(&a).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<const N: usize> From<[AgentId; N]> for Room {
    fn from(v: [AgentId; N]) -> Self {
        Room::new(v.to_vec())
    }
}

/// A collection of rooms, stored in canonical order (rooms sorted by their
/// smallest member). Partition validity is checked by [`validate_outcome`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Outcome {
    rooms: Vec<Room>,
}

impl Outcome {
    pub fn new(mut rooms: Vec<Room>) -> Self {
        rooms.sort();
        Outcome { rooms }
    }

    pub fn rooms(&self) -> &[Room] {
        &self.rooms
    }

    /// `room_of[a]` = index of the room holding `a`. Requires a valid partition.
    pub fn assignment(&self, n_agents: usize) -> Result<Vec<usize>> {
        let mut room_of = vec![usize::MAX; n_agents];
        for (r, room) in self.rooms.iter().enumerate() {
            for &a in room.members() {
                if a >= n_agents || room_of[a] != usize::MAX {
                    return Err(Error::InvalidOutcome(format!("agent {a} is unknown or roomed twice")));
                }
                room_of[a] = r;
            }
        }
        if let Some(a) = room_of.iter().position(|&r| r == usize::MAX) {
            return Err(Error::InvalidOutcome(format!("agent {a} has no room")));
        }
        Ok(room_of)
    }

    /// The room of `a` under `assignment`.
    pub fn room<'a>(&'a self, assignment: &[usize], a: AgentId) -> &'a Room {
        &self.rooms[assignment[a]]
    }
}

/// `delta(a, R)`: summed distance from `a` to the other members of `r`.
pub fn room_cost(game: &Game, a: AgentId, r: &Room) -> Result<f64> {
    if !r.contains(a) {
        return Err(Error::NotInRoom {
            agent: a,
            room: r.members().to_vec(),
        });
    }
    Ok(room_cost_unchecked(game, a, r.members()))
}

pub(crate) fn room_cost_unchecked(game: &Game, a: AgentId, members: &[AgentId]) -> f64 {
    let p = game.position(a);
    members
        .iter()
        .filter(|&&b| b != a)
        .map(|&b| euclidean_distance(p, game.position(b)))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preference {
    PrefersFirst,
    Indifferent,
    PrefersSecond,
}

impl Preference {
    pub fn from_costs(first: f64, second: f64, tol: &Tolerance) -> Self {
        if first < second - tol.dist_eq {
            Preference::PrefersFirst
        } else if (first - second).abs() <= tol.dist_eq {
            Preference::Indifferent
        } else {
            Preference::PrefersSecond
        }
    }
}

/// How agent `a` ranks room `r` against room `t` (lower cost is better).
pub fn compare_rooms(game: &Game, a: AgentId, r: &Room, t: &Room, tol: &Tolerance) -> Result<Preference> {
    Ok(Preference::from_costs(room_cost(game, a, r)?, room_cost(game, a, t)?, tol))
}

/// Infimum of `room_cost(a, R)` over rooms containing `a`: the sum of the
/// `s - 1` smallest distances from `a`.
pub fn min_room_cost(game: &Game, a: AgentId) -> f64 {
    let k = game.room_size() - 1;
    if game.len() <= 64 {
        let mut d: Vec<f64> = (0..game.len()).filter(|&b| b != a).map(|b| game.distance(a, b)).collect();
        d.sort_by(f64::total_cmp);
        return d.iter().take(k).sum();
    }
    game.spatial_index().nearest(a, k).iter().map(|&(_, d)| d).sum()
}

/// Every roommate set (size `s - 1`, sorted) whose cost for `a` is within
/// `dist_eq` of the minimum.
pub fn most_preferred_rooms(game: &Game, a: AgentId, tol: &Tolerance) -> Vec<Vec<AgentId>> {
    let k = game.room_size() - 1;
    if k == 0 {
        return vec![Vec::new()];
    }
    let best = min_room_cost(game, a);
    let bound = best + tol.dist_eq;
    let nearest = if game.len() <= 64 {
        let mut d: Vec<(AgentId, f64)> = (0..game.len()).filter(|&b| b != a).map(|b| (b, game.distance(a, b))).collect();
        d.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
        d
    } else {
        Vec::new()
    };
    let d_min = if game.len() <= 64 {
        nearest[0].1
    } else {
        game.spatial_index().nearest(a, 1)[0].1
    };
    // Any member of an optimal set lies within bound - (k-1)*d_min.
    let radius = bound - (k as f64 - 1.0) * d_min;
    let candidates: Vec<(AgentId, f64)> = if game.len() <= 64 {
        nearest.into_iter().filter(|&(_, d)| d <= radius).collect()
    } else {
        game.neighbors_within(a, radius)
    };
    let mut out = BTreeSet::new();
    let mut chosen = Vec::with_capacity(k);
    collect_sets(&candidates, 0, k, 0.0, bound, &mut chosen, &mut out);
    out.into_iter().collect()
}

fn collect_sets(
    cands: &[(AgentId, f64)],
    start: usize,
    k: usize,
    acc: f64,
    bound: f64,
    chosen: &mut Vec<AgentId>,
    out: &mut BTreeSet<Vec<AgentId>>,
) {
    if chosen.len() == k {
        if acc <= bound {
            let mut s = chosen.clone();
            s.sort_unstable();
            out.insert(s);
        }
        return;
    }
    for i in start..cands.len() {
        let (b, d) = cands[i];
        if acc + d > bound {
            break;
        }
        chosen.push(b);
        collect_sets(cands, i + 1, k, acc + d, bound, chosen, out);
        chosen.pop();
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutcomeViolation {
    Duplicated { agent: AgentId },
    Missing { agent: AgentId },
    UnknownAgent { agent: AgentId },
    WrongSize { room: usize, size: usize },
}

impl fmt::Display for OutcomeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeViolation::Duplicated { agent } => write!(f, "agent {agent} appears in more than one room"),
            OutcomeViolation::Missing { agent } => write!(f, "agent {agent} is in no room"),
            OutcomeViolation::UnknownAgent { agent } => write!(f, "agent {agent} does not exist"),
            OutcomeViolation::WrongSize { room, size } => write!(f, "room {room} has {size} members"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeReport {
    pub violations: Vec<OutcomeViolation>,
}

impl OutcomeReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        match self.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidOutcome(v.to_string())),
        }
    }
}

/// Partition and room-size check. Violations are reported, not raised.
pub fn validate_outcome(game: &Game, o: &Outcome) -> OutcomeReport {
    let n = game.len();
    let mut seen = vec![0u32; n];
    let mut violations = Vec::new();
    for (r, room) in o.rooms().iter().enumerate() {
        if room.len() != game.room_size() {
            violations.push(OutcomeViolation::WrongSize { room: r, size: room.len() });
        }
        for w in room.members().windows(2) {
            if w[0] == w[1] && w[0] < n {
                seen[w[0]] += 1;
            }
        }
        for &a in room.members() {
            if a >= n {
                violations.push(OutcomeViolation::UnknownAgent { agent: a });
            } else {
                seen[a] += 1;
            }
        }
    }
    for (a, &count) in seen.iter().enumerate() {
        match count {
            0 => violations.push(OutcomeViolation::Missing { agent: a }),
            1 => {}
            _ => violations.push(OutcomeViolation::Duplicated { agent: a }),
        }
    }
    OutcomeReport { violations }
}

/// Every agent's cost in its room under `o`. Requires a valid partition.
pub fn outcome_costs(game: &Game, o: &Outcome) -> Result<Vec<f64>> {
    let assignment = o.assignment(game.len())?;
    Ok((0..game.len())
        .map(|a| room_cost_unchecked(game, a, o.room(&assignment, a).members()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(xs: &[f64]) -> Game {
        let pts: Vec<Point3> = xs.iter().map(|&x| Point3::new(x, 0.0, 0.0)).collect();
        Game::from_points(&pts, 3).unwrap()
    }

    #[test]
    fn unit_neighbors_cost_two() {
        let h = 3f64.sqrt() / 2.0;
        let g = Game::from_points(
            &[Point3::ORIGIN, Point3::new(1.0, 0.0, 0.0), Point3::new(0.5, h, 0.0)],
            3,
        )
        .unwrap();
        assert!((room_cost(&g, 0, &Room::from([0, 1, 2])).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cost_requires_membership() {
        let g = line(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(matches!(room_cost(&g, 0, &Room::from([1, 2, 3])), Err(Error::NotInRoom { .. })));
    }

    #[test]
    fn compare_rooms_cases() {
        let g = line(&[0.0, 1.0, -1.0, 2.0, 10.0, 11.0]);
        let tol = Tolerance::default();
        let r = Room::from([0, 1, 2]);
        assert_eq!(compare_rooms(&g, 0, &r, &r, &tol).unwrap(), Preference::Indifferent);
        let t = Room::from([0, 1, 3]);
        assert_eq!(compare_rooms(&g, 0, &r, &t, &tol).unwrap(), Preference::PrefersFirst);
        assert_eq!(compare_rooms(&g, 0, &t, &r, &tol).unwrap(), Preference::PrefersSecond);
    }

    #[test]
    fn min_cost_middle_of_three() {
        let g = line(&[0.0, 1.0, 3.0]);
        assert_eq!(min_room_cost(&g, 1), 3.0);
        assert_eq!(most_preferred_rooms(&g, 1, &Tolerance::default()), vec![vec![0, 2]]);
    }

    #[test]
    fn game_invariants() {
        assert!(Game::from_points(&[Point3::ORIGIN; 4], 3).is_err());
        let mut agents = line(&[0.0, 1.0, 2.0]).agents().to_vec();
        agents[2].label = "a0".into();
        assert!(Game::new(agents.clone(), 3, 0.0).is_err());
        agents[2].label = "a2".into();
        assert!(Game::new(agents.clone(), 3, 0.01).is_err());
        assert!(Game::new(agents, 3, 0.0005).is_ok());
    }

    #[test]
    fn validate_outcome_reports() {
        let g = line(&[0.0, 1.0, 2.0]);
        assert!(validate_outcome(&g, &Outcome::new(vec![Room::from([0, 1, 2])])).is_ok());
        let g6 = line(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let bad = Outcome::new(vec![Room::from([0, 1, 2]), Room::from([2, 3, 4])]);
        let rep = validate_outcome(&g6, &bad);
        assert!(rep.violations.contains(&OutcomeViolation::Duplicated { agent: 2 }));
        assert!(rep.violations.contains(&OutcomeViolation::Missing { agent: 5 }));
        let sized = Outcome::new(vec![Room::new(vec![0, 1]), Room::new(vec![2, 3, 4, 5])]);
        assert_eq!(validate_outcome(&g6, &sized).violations.len(), 2);
    }

    fn small_game() -> impl Strategy<Value = Game> {
        prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64), 9).prop_map(|v| {
            let pts: Vec<Point3> = v.into_iter().map(|(x, y, z)| Point3::new(x, y, z)).collect();
            Game::from_points(&pts, 3).unwrap()
        })
    }

    proptest! {
        #[test]
        fn cost_is_pairwise_sum(g in small_game(), a in 0usize..9, b in 0usize..9, c in 0usize..9) {
            prop_assume!(a != b && b != c && a != c);
            let r = Room::from([a, b, c]);
            let expect = euclidean_distance(g.position(a), g.position(b)) + euclidean_distance(g.position(a), g.position(c));
            prop_assert!((room_cost(&g, a, &r).unwrap() - expect).abs() < 1e-12);
        }

        #[test]
        fn min_cost_is_lower_bound(g in small_game(), a in 0usize..9) {
            let m = min_room_cost(&g, a);
            for b in 0..9 { for c in (b + 1)..9 {
                if b == a || c == a { continue; }
                prop_assert!(room_cost(&g, a, &Room::from([a, b, c])).unwrap() >= m - 1e-6);
            }}
        }

        #[test]
        fn preferred_rooms_tie(g in small_game(), a in 0usize..9) {
            let tol = Tolerance::default();
            let sets = most_preferred_rooms(&g, a, &tol);
            prop_assert!(!sets.is_empty());
            let costs: Vec<f64> = sets.iter().map(|s| {
                room_cost(&g, a, &Room::new(vec![a, s[0], s[1]])).unwrap()
            }).collect();
            for c in &costs { prop_assert!((c - costs[0]).abs() <= 2.0 * tol.dist_eq); }
        }

        #[test]
        fn preference_is_total_preorder(g in small_game(), a in 0usize..9, picks in prop::collection::vec((0usize..9, 0usize..9), 3)) {
            let tol = Tolerance::default();
            let rooms: Vec<Room> = picks.iter().filter(|&&(b, c)| (b != a && c != a && b != c)).map(|&(b, c)| Room::from([a, b, c])).collect();
            prop_assume!(rooms.len() == 3);
            let cmp = |x: &Room, y: &Room| compare_rooms(&g, a, x, y, &tol).unwrap();
            for x in &rooms { for y in &rooms {
                let fwd = cmp(x, y);
                let back = cmp(y, x);
                let mirrored = match fwd {
                    Preference::PrefersFirst => Preference::PrefersSecond,
                    Preference::PrefersSecond => Preference::PrefersFirst,
                    Preference::Indifferent => Preference::Indifferent,
                };
                prop_assert_eq!(back, mirrored);
            }}
            let (x, y, z) = (&rooms[0], &rooms[1], &rooms[2]);
            if cmp(x, y) == Preference::PrefersFirst && cmp(y, z) == Preference::PrefersFirst {
                prop_assert_ne!(cmp(x, z), Preference::PrefersSecond);
            }
        }
    }
}
