//! Uniform-grid neighbor index over agent positions. Purely an accelerator:
//! every query returns exactly what a full scan would.

use std::collections::HashMap;

use crate::geometry::Point3;

pub const DEFAULT_CELL: f64 = 2.0;

#[derive(Debug, Clone)]
pub struct SpatialIndex {
    cell: f64,
    points: Vec<Point3>,
    cells: HashMap<(i64, i64, i64), Vec<usize>>,
    lo: (i64, i64, i64),
    hi: (i64, i64, i64),
}

impl SpatialIndex {
    pub fn new(points: &[Point3], cell: f64) -> Self {
        let mut cells: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
        let mut lo = (i64::MAX, i64::MAX, i64::MAX);
        let mut hi = (i64::MIN, i64::MIN, i64::MIN);
        for (i, p) in points.iter().enumerate() {
            let k = key(*p, cell);
            lo = (lo.0.min(k.0), lo.1.min(k.1), lo.2.min(k.2));
            hi = (hi.0.max(k.0), hi.1.max(k.1), hi.2.max(k.2));
            cells.entry(k).or_default().push(i);
        }
        SpatialIndex {
            cell,
            points: points.to_vec(),
            cells,
            lo,
            hi,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// All `(index, distance)` pairs with distance `<= radius`, excluding
    /// `exclude`, sorted by distance then index.
    pub fn within(&self, center: Point3, radius: f64, exclude: Option<usize>) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        let span = (radius / self.cell).ceil() as i64;
        let c = key(center, self.cell);
        for ix in (c.0 - span).max(self.lo.0)..=(c.0 + span).min(self.hi.0) {
            for iy in (c.1 - span).max(self.lo.1)..=(c.1 + span).min(self.hi.1) {
                for iz in (c.2 - span).max(self.lo.2)..=(c.2 + span).min(self.hi.2) {
                    if let Some(bucket) = self.cells.get(&(ix, iy, iz)) {
                        for &i in bucket {
                            if Some(i) == exclude {
                                continue;
                            }
                            let d = center.distance(self.points[i]);
                            if d <= radius {
                                out.push((i, d));
                            }
                        }
                    }
                }
            }
        }
        out.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        out
    }

    /// The `k` nearest points to `points[of]` (excluding itself).
    pub fn nearest(&self, of: usize, k: usize) -> Vec<(usize, f64)> {
        let k = k.min(self.points.len().saturating_sub(1));
        if k == 0 {
            return Vec::new();
        }
        let center = self.points[of];
        let mut radius = self.cell;
        loop {
            let found = self.within(center, radius, Some(of));
            if found.len() >= k {
                return found.into_iter().take(k).collect();
            }
            radius *= 2.0;
        }
    }
}

fn key(p: Point3, cell: f64) -> (i64, i64, i64) {
    (
        (p.x / cell).floor() as i64,
        (p.y / cell).floor() as i64,
        (p.z / cell).floor() as i64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_full_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Point3> = (0..400)
            .map(|_| Point3::new(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0), rng.gen_range(-3.0..3.0)))
            .collect();
        let index = SpatialIndex::new(&pts, DEFAULT_CELL);
        for of in [0, 17, 255, 399] {
            let mut scan: Vec<(usize, f64)> = pts
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != of)
                .map(|(i, p)| (i, p.distance(pts[of])))
                .collect();
            scan.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            assert_eq!(index.nearest(of, 5), scan[..5].to_vec());
            let r = 3.3;
            let expect: Vec<_> = scan.iter().copied().filter(|&(_, d)| d <= r).collect();
            assert_eq!(index.within(pts[of], r, Some(of)), expect);
        }
    }
}
