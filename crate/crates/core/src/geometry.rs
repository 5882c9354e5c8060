//! Points in 3-space, distances, and the shared tolerance policy.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A position in construction units (one unit = the unit gadget edge).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3::new(0.0, 0.0, 0.0);
    pub const X: Point3 = Point3::new(1.0, 0.0, 0.0);
    pub const Y: Point3 = Point3::new(0.0, 1.0, 0.0);
    pub const Z: Point3 = Point3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(self, other: Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Point3) -> Point3 {
        Point3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Unit vector in the same direction, or `None` for (near) zero vectors.
    pub fn normalized(self) -> Option<Point3> {
        let n = self.norm();
        (n > 1e-12).then(|| self / n)
    }

    /// Component of `self` orthogonal to the unit vector `axis`.
    pub fn reject(self, axis: Point3) -> Point3 {
        self - axis * self.dot(axis)
    }

    pub fn distance(self, other: Point3) -> f64 {
        euclidean_distance(self, other)
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(v: [f64; 3]) -> Self {
        Point3::new(v[0], v[1], v[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.z]
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Point3 {
    fn add_assign(&mut self, o: Point3) {
        *self = *self + o;
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Point3 {
    type Output = Point3;
    fn div(self, s: f64) -> Point3 {
        Point3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Comparison tolerances. `dist_eq` bands distance equality; `solver_eps`
/// bounds the root finders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub dist_eq: f64,
    pub solver_eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            dist_eq: 1e-6,
            solver_eps: 1e-12,
        }
    }
}

impl Tolerance {
    pub fn new(dist_eq: f64, solver_eps: f64) -> Result<Self> {
        let t = Tolerance {
            dist_eq,
            solver_eps,
        };
        t.check()?;
        Ok(t)
    }

    /// Same solver tolerance, different distance band.
    pub fn with_dist_eq(dist_eq: f64) -> Result<Self> {
        Tolerance::new(dist_eq, Tolerance::default().solver_eps.min(dist_eq / 10.0))
    }

    pub fn check(&self) -> Result<()> {
        if self.solver_eps > 0.0 && self.solver_eps < self.dist_eq && self.dist_eq < 1e-3 {
            Ok(())
        } else {
            Err(Error::InvalidTolerance {
                dist_eq: self.dist_eq,
                solver_eps: self.solver_eps,
            })
        }
    }
}

pub fn euclidean_distance(p: Point3, q: Point3) -> f64 {
    let (dx, dy, dz) = (p.x - q.x, p.y - q.y, p.z - q.z);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Half-angle `phi` subtended by each of `n_hops` equal chords of length
/// `hop_len` laid on a circle whose end-to-end chord is `chord_len`, i.e. the
/// root of `sin(n phi) / sin(phi) = chord_len / hop_len` in `[0, pi/n)`.
///
/// Solved by bisection; the ratio is strictly decreasing on the bracket.
pub fn arc_chord_angle(n_hops: usize, hop_len: f64, chord_len: f64, solver_eps: f64) -> Result<f64> {
    if n_hops == 0 || !(hop_len > 0.0) || !(chord_len > 0.0) {
        return Err(Error::Geometry(format!(
            "arc_chord_angle needs positive inputs (n={n_hops}, hop={hop_len}, chord={chord_len})"
        )));
    }
    let n = n_hops as f64;
    let reach = n * hop_len;
    if chord_len > reach * (1.0 + 1e-15) {
        return Err(Error::ChainCannotReach { chord: chord_len, reach });
    }
    if chord_len >= reach || n_hops == 1 {
        return Ok(0.0);
    }
    let target = chord_len / hop_len;
    let ratio = |phi: f64| {
        if phi == 0.0 {
            n
        } else {
            (n * phi).sin() / phi.sin()
        }
    };
    let (mut lo, mut hi) = (0.0_f64, std::f64::consts::PI / n);
    while hi - lo > solver_eps {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if mid == lo && mid == hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn distance_identity_and_345() {
        assert_eq!(euclidean_distance(Point3::ORIGIN, Point3::ORIGIN), 0.0);
        assert_eq!(euclidean_distance(Point3::ORIGIN, Point3::new(3.0, 4.0, 0.0)), 5.0);
    }

    #[test]
    fn set_gadget_apex_height() {
        // |(+-0.5, 0) - (0, h)| = 1  =>  h = sqrt(3)/2
        let h = (1.0_f64 - 0.25).sqrt();
        let apex = Point3::new(7.5, h, 0.0);
        for dx in [-0.5, 0.5] {
            let base = Point3::new(7.5 + dx, 0.0, 0.0);
            assert!((apex.distance(base) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn tolerance_bounds() {
        assert!(Tolerance::default().check().is_ok());
        assert!(Tolerance::new(1e-2, 1e-12).is_err());
        assert!(Tolerance::new(1e-6, 1e-5).is_err());
        assert!(Tolerance::new(1e-6, 0.0).is_err());
    }

    #[test]
    fn straight_chain_has_zero_angle() {
        assert_eq!(arc_chord_angle(5, 1.0, 5.0, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn two_hop_closed_form() {
        // sin(2 phi)/sin(phi) = 2 cos(phi) = sqrt(2)  =>  phi = pi/4
        let phi = arc_chord_angle(2, 1.0, 2f64.sqrt(), 1e-12).unwrap();
        assert!((phi - std::f64::consts::FRAC_PI_4).abs() < 1e-11);
    }

    #[test]
    fn rejects_unreachable_chord() {
        assert!(matches!(
            arc_chord_angle(3, 1.0, 3.5, 1e-12),
            Err(Error::ChainCannotReach { .. })
        ));
    }

    /// Lay the chords on the circle and measure the end-to-end distance.
    fn forward_chord(n: usize, hop: f64, phi: f64) -> f64 {
        if phi == 0.0 {
            return n as f64 * hop;
        }
        let r = hop / (2.0 * phi.sin());
        let mut pts = Vec::new();
        for i in 0..=n {
            let t = 2.0 * phi * i as f64;
            pts.push(Point3::new(r * t.cos(), r * t.sin(), 0.0));
        }
        for w in pts.windows(2) {
            assert!((w[0].distance(w[1]) - hop).abs() < 1e-9);
        }
        pts[0].distance(pts[n])
    }

    #[test]
    fn eleven_hops_of_d_span_ten() {
        let eps: f64 = 0.0005;
        let d = (1.0 - (eps / 2.0).powi(2)).sqrt();
        let phi = arc_chord_angle(11, d, 10.0, 1e-12).unwrap();
        assert!(phi > 0.0);
        assert!((forward_chord(11, d, phi) - 10.0).abs() < 1e-9);
    }

    fn coord() -> impl Strategy<Value = f64> {
        -1e3..1e3f64
    }

    fn point() -> impl Strategy<Value = Point3> {
        (coord(), coord(), coord()).prop_map(|(x, y, z)| Point3::new(x, y, z))
    }

    proptest! {
        #[test]
        fn distance_symmetric(p in point(), q in point()) {
            prop_assert_eq!(euclidean_distance(p, q), euclidean_distance(q, p));
        }

        #[test]
        fn triangle_inequality(p in point(), q in point(), r in point()) {
            prop_assert!(p.distance(r) <= p.distance(q) + q.distance(r) + 1e-6);
        }

        #[test]
        fn arc_reproduces_chord(n in 2usize..40, hop in 0.5f64..2.0, frac in 0.3f64..1.0) {
            let chord = frac * n as f64 * hop;
            let phi = arc_chord_angle(n, hop, chord, 1e-12).unwrap();
            prop_assert!(phi >= 0.0 && phi < std::f64::consts::PI / n as f64);
            prop_assert!((forward_chord(n, hop, phi) - chord).abs() < 10.0 * 1e-12 * n as f64 * 100.0);
        }

        #[test]
        fn point_json_roundtrip(p in point()) {
            let s = serde_json::to_string(&p).unwrap();
            let back: Point3 = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(p.x.to_bits(), back.x.to_bits());
            prop_assert_eq!(p.y.to_bits(), back.y.to_bits());
            prop_assert_eq!(p.z.to_bits(), back.z.to_bits());
        }
    }
}
