//! Geometry of a single chain: `n` triples {alpha, beta, gamma} strung between
//! two construction vertices.
//!
//! The gamma agents form a polyline from `from` (gamma[0]) to `to`
//! (gamma[n]). Each hop carries an alpha/beta pair at unit distance from both
//! hop ends and `epsilon` from each other. Where the pair sits around the hop
//! is an azimuth `psi` measured in the hop frame (`b`, `e3`).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{arc_chord_angle, Point3};
use crate::{Error, Result};

/// gamma-gamma hop length of the zigzag shape. Longer than 1 so that two
/// consecutive gamma agents never prefer each other over their own triple.
pub const ZIGZAG_HOP: f64 = 1.05;

const SETTLE_SPAN: usize = 3;
const SETTLE_CANDIDATES: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChainShape {
    /// Hops of length [`ZIGZAG_HOP`] alternating sideways along the bend
    /// direction.
    #[default]
    Zigzag,
    /// Hops of length `d` on a circular arc bulging toward the bend
    /// direction. Kept for comparison; consecutive gammas then sit at
    /// distance `d < 1` and the best-pair gaps collapse.
    Arc,
}

/// `d = sqrt(1 - (eps/2)^2)`, the length of the edge gamma[z-1]..gamma[z] when
/// the triple is laid flat.
pub fn spacing(epsilon: f64) -> f64 {
    (1.0 - 0.25 * epsilon * epsilon).sqrt()
}

/// Number of triples replacing an edge of length `len`.
pub fn hop_count(len: f64, epsilon: f64) -> usize {
    let d = spacing(epsilon);
    ((len / d).ceil() as usize).max(1)
}

#[derive(Debug, Clone, Copy)]
struct HopFrame {
    mid: Point3,
    dir: Point3,
    e3: Point3,
}

/// Gamma polyline plus per-hop frames; alpha/beta positions follow from an
/// azimuth per hop.
#[derive(Debug, Clone)]
pub struct ChainSkeleton {
    gamma: Vec<Point3>,
    frames: Vec<HopFrame>,
    b: Point3,
    radius: f64,
    half_eps: f64,
    shape: ChainShape,
}

impl ChainSkeleton {
    pub fn new(from: Point3, to: Point3, bend_dir: Point3, epsilon: f64, shape: ChainShape, solver_eps: f64) -> Result<Self> {
        let chord = to - from;
        let len = chord.norm();
        let u = chord
            .normalized()
            .ok_or_else(|| Error::Geometry("chain endpoints coincide".into()))?;
        let n = bend_dir
            .reject(u)
            .normalized()
            .ok_or_else(|| Error::Geometry("bend direction parallel to chain".into()))?;
        let hops = hop_count(len, epsilon);
        let (gamma, hop) = match shape {
            ChainShape::Zigzag => (zigzag(from, u, n, len, hops, solver_eps)?, ZIGZAG_HOP),
            ChainShape::Arc => (arc(from, u, n, len, hops, spacing(epsilon), solver_eps)?, spacing(epsilon)),
        };
        let b = u.cross(n);
        let frames = gamma
            .windows(2)
            .map(|w| {
                let dir = (w[1] - w[0]) / hop;
                HopFrame {
                    mid: (w[0] + w[1]) * 0.5,
                    dir,
                    e3: dir.cross(b),
                }
            })
            .collect();
        let radius = (1.0 - 0.25 * hop * hop - 0.25 * epsilon * epsilon).sqrt();
        Ok(ChainSkeleton {
            gamma,
            frames,
            b,
            radius,
            half_eps: 0.5 * epsilon,
            shape,
        })
    }

    pub fn hops(&self) -> usize {
        self.frames.len()
    }

    pub fn shape(&self) -> ChainShape {
        self.shape
    }

    /// gamma[0..=n]; the two ends coincide with the chain's endpoints.
    pub fn gamma(&self) -> &[Point3] {
        &self.gamma
    }

    /// Unit direction of hop `z` (1-based).
    pub fn hop_dir(&self, z: usize) -> Point3 {
        self.frames[z - 1].dir
    }

    /// alpha[z], beta[z] for azimuth `psi`. At `psi = 0` the pair sits off the
    /// bend plane; at `psi = pi/2` it sits in the plane, on the side opposite
    /// the bend direction.
    pub fn triple(&self, z: usize, psi: f64) -> (Point3, Point3) {
        let f = &self.frames[z - 1];
        let w = self.b * psi.cos() + f.e3 * psi.sin();
        let centre = f.mid + w * self.radius;
        let off = f.dir.cross(w) * self.half_eps;
        (centre + off, centre - off)
    }

    /// Azimuth that the shape uses when nothing else is known about its
    /// surroundings.
    pub fn default_azimuths(&self) -> Vec<f64> {
        match self.shape {
            ChainShape::Zigzag => alternating(self.hops(), 0.0, None),
            ChainShape::Arc => vec![0.5 * PI; self.hops()],
        }
    }

    /// Re-chooses the azimuth of hop `j` (1-based) so that its pair keeps
    /// away from the nearby hops of the same chain. Used where the two halves
    /// of an [`alternating`] sequence meet.
    pub fn settle_hop(&self, psi: &mut [f64], j: usize) {
        let n = self.hops();
        let lo = j.saturating_sub(SETTLE_SPAN).max(1);
        let hi = (j + SETTLE_SPAN).min(n);
        let mut others = Vec::new();
        for z in lo..=hi {
            if z != j {
                let (a, b) = self.triple(z, psi[z - 1]);
                others.extend([a, b]);
            }
        }
        for g in lo - 1..=hi {
            if g != j - 1 && g != j {
                others.push(self.gamma[g]);
            }
        }
        let mut best = (f64::NEG_INFINITY, psi[j - 1]);
        for c in std::iter::once(psi[j - 1]).chain((0..SETTLE_CANDIDATES).map(|i| 2.0 * PI * i as f64 / SETTLE_CANDIDATES as f64)) {
            let (a, _) = self.triple(j, c);
            let d = others.iter().map(|o| o.distance(a)).fold(f64::INFINITY, f64::min);
            if d > best.0 + 1e-12 {
                best = (d, c);
            }
        }
        psi[j - 1] = best.1;
    }

    /// Per-hop azimuths starting at `from` and ending at `to`, with the hop
    /// where the two halves meet settled by [`Self::settle_hop`].
    pub fn azimuths_between(&self, from: f64, to: f64) -> Vec<f64> {
        let n = self.hops();
        let mut psi = alternating(n, from, Some(to));
        if n > 2 {
            self.settle_hop(&mut psi, n.div_ceil(2));
        }
        psi
    }

    /// All alpha/beta positions for the given per-hop azimuths.
    pub fn place(&self, psi: &[f64]) -> Vec<(Point3, Point3)> {
        assert_eq!(psi.len(), self.hops());
        (1..=self.hops()).map(|z| self.triple(z, psi[z - 1])).collect()
    }
}

/// Azimuth sequence flipping by half a turn every hop. With only `from`
/// given the whole chain follows it; with both ends given, each half follows
/// its own end and the middle hop is set opposite the mean of its
/// neighbours.
pub fn alternating(hops: usize, from: f64, to: Option<f64>) -> Vec<f64> {
    let mut psi: Vec<f64> = (0..hops).map(|i| from + PI * i as f64).collect();
    let Some(to) = to else { return psi.into_iter().map(wrap).collect() };
    if hops <= 2 {
        return psi.into_iter().map(wrap).collect();
    }
    let junction = hops.div_ceil(2) - 1;
    for i in junction + 1..hops {
        psi[i] = to + PI * (hops - 1 - i) as f64;
    }
    let (p, q) = (wrap(psi[junction - 1]), wrap(psi[junction + 1]));
    let mut delta = wrap(q - p);
    if delta > PI {
        delta -= 2.0 * PI;
    }
    psi[junction] = p + 0.5 * delta + PI;
    psi.into_iter().map(wrap).collect()
}

fn wrap(a: f64) -> f64 {
    a.rem_euclid(2.0 * PI)
}

/// Lateral offset `a` of the zigzag so that the forward progress of all
/// hops adds up to `len`. End hops climb from or to the axis (progress
/// `sqrt(h^2 - a^2)`); inner hops swing from `+a` to `-a` (`sqrt(h^2 - 4a^2)`).
pub fn zigzag_offset(len: f64, hops: usize, solver_eps: f64) -> Result<f64> {
    let h = ZIGZAG_HOP;
    let reach = h * hops as f64;
    if len > reach * (1.0 + 1e-15) {
        return Err(Error::ChainCannotReach { chord: len, reach });
    }
    match hops {
        0 => Err(Error::Geometry("chain without hops".into())),
        1 => Err(Error::Geometry(format!(
            "a single hop of length {h} cannot span {len}"
        ))),
        2 => Ok((h * h - 0.25 * len * len).max(0.0).sqrt()),
        _ => {
            let progress = |a: f64| {
                2.0 * (h * h - a * a).sqrt() + (hops - 2) as f64 * (h * h - 4.0 * a * a).max(0.0).sqrt()
            };
            let (mut lo, mut hi) = (0.0_f64, 0.5 * h);
            if progress(hi) > len {
                return Err(Error::Geometry(format!(
                    "{hops} hops of length {h} cannot fold into {len}"
                )));
            }
            while hi - lo > solver_eps {
                let mid = 0.5 * (lo + hi);
                if progress(mid) > len {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        }
    }
}

fn zigzag(from: Point3, u: Point3, n: Point3, len: f64, hops: usize, solver_eps: f64) -> Result<Vec<Point3>> {
    let a = zigzag_offset(len, hops, solver_eps)?;
    let h = ZIGZAG_HOP;
    let end = (h * h - a * a).sqrt();
    let inner = (h * h - 4.0 * a * a).max(0.0).sqrt();
    let mut pts = Vec::with_capacity(hops + 1);
    pts.push(from);
    let mut x = 0.0;
    for z in 1..hops {
        x += if z == 1 { end } else { inner };
        let y = if z % 2 == 1 { a } else { -a };
        pts.push(from + u * x + n * y);
    }
    pts.push(from + u * len);
    Ok(pts)
}

fn arc(from: Point3, u: Point3, n: Point3, len: f64, hops: usize, d: f64, solver_eps: f64) -> Result<Vec<Point3>> {
    let phi = arc_chord_angle(hops, d, len, solver_eps)?;
    let mut pts = Vec::with_capacity(hops + 1);
    let mut p = from;
    pts.push(p);
    for k in 0..hops {
        let theta = (hops as f64 - 1.0 - 2.0 * k as f64) * phi;
        p += (u * theta.cos() + n * theta.sin()) * d;
        pts.push(p);
    }
    // Land exactly on `to`; the bisection residual is far below dist_eq.
    *pts.last_mut().unwrap() = from + u * len;
    Ok(pts)
}
