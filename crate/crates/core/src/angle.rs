//! Angles on the circle `S¹`, stored in radians and normalised to `[0, 2π)`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::{Error, Result, Vec2};

/// Reduces an angle to `[0, 2π)`.
pub fn normalize(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can return TAU itself for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Signed difference `a - b` reduced to `(-π, π]`.
pub fn signed_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// Length of the shorter way around the circle between `a` and `b`.
pub fn circ_dist(a: f64, b: f64) -> f64 {
    signed_diff(a, b).abs()
}

/// Polar angle of `p` in `[0, 2π)`; the origin maps to 0.
pub fn polar_angle(p: &Vec2) -> f64 {
    normalize(p.y.atan2(p.x))
}

pub fn rotate(p: &Vec2, theta: f64) -> Vec2 {
    let (s, c) = theta.sin_cos();
    Vec2::new(c * p.x - s * p.y, s * p.x + c * p.y)
}

pub fn unit(theta: f64) -> Vec2 {
    let (s, c) = theta.sin_cos();
    Vec2::new(c, s)
}

/// A closed arc `[start, start + length]` of the circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleArc {
    pub start: f64,
    pub length: f64,
}

impl CircleArc {
    pub fn new(start: f64, length: f64) -> Result<Self> {
        if !(start.is_finite() && length.is_finite()) || length <= 0.0 || length > TAU + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "arc length must lie in (0, 2π], got {length}"
            )));
        }
        Ok(Self {
            start: normalize(start),
            length: length.min(TAU),
        })
    }

    /// The full circle, `Arc(0, 2π)`.
    pub fn full() -> Self {
        Self {
            start: 0.0,
            length: TAU,
        }
    }

    /// Arc centred at `center` with the given half-width.
    pub fn centered(center: f64, half_width: f64) -> Result<Self> {
        Self::new(center - half_width, 2.0 * half_width)
    }

    pub fn end(&self) -> f64 {
        self.start + self.length
    }

    pub fn center(&self) -> f64 {
        normalize(self.start + 0.5 * self.length)
    }

    pub fn is_full(&self) -> bool {
        self.length >= TAU
    }

    /// Offset of `theta` from the start, measured counter-clockwise in `[0, 2π)`.
    pub fn offset(&self, theta: f64) -> f64 {
        normalize(theta - self.start)
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.is_full() || self.offset(theta) <= self.length
    }

    /// Distance along the circle from `theta` to the nearest point of the arc.
    pub fn dist_to(&self, theta: f64) -> f64 {
        if self.contains(theta) {
            0.0
        } else {
            circ_dist(theta, self.start).min(circ_dist(theta, self.end()))
        }
    }

    /// The point of the arc closest to `theta`.
    pub fn nearest(&self, theta: f64) -> f64 {
        if self.contains(theta) {
            normalize(theta)
        } else if circ_dist(theta, self.start) <= circ_dist(theta, self.end()) {
            self.start
        } else {
            normalize(self.end())
        }
    }

    /// Whether `other` lies inside `self` (both closed).
    pub fn contains_arc(&self, other: &CircleArc) -> bool {
        if self.is_full() {
            return true;
        }
        let off = self.offset(other.start);
        off + other.length <= self.length + 1e-12
    }

    pub fn disjoint(&self, other: &CircleArc) -> bool {
        let a = self.offset(other.start);
        let b = other.offset(self.start);
        a > self.length && b > other.length
    }

    pub fn rotated(&self, phi: f64) -> Self {
        Self {
            start: normalize(self.start + phi),
            length: self.length,
        }
    }
}

/// Smallest arc containing all of the given arcs (points are arcs of length 0).
/// Returned as `(start, length)` with `length ∈ [0, 2π]`.
pub fn hull_of(pieces: &[(f64, f64)]) -> (f64, f64) {
    if pieces.is_empty() {
        return (0.0, 0.0);
    }
    let mut items: Vec<(f64, f64)> = pieces
        .iter()
        .map(|&(s, l)| (normalize(s), l.clamp(0.0, TAU)))
        .collect();
    if items.iter().any(|&(_, l)| l >= TAU) {
        return (0.0, TAU);
    }
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Sweep covered stretches starting from the first start; the hull is the complement
    // of the largest gap.
    let mut best_gap = -1.0;
    let mut best_after = 0.0;
    let n = items.len();
    // end of the coverage reached so far, unwrapped relative to items[0].0
    let base = items[0].0;
    let wrapped = items
        .iter()
        .map(|&(s, l)| s + l - TAU)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut reach = (base + items[0].1).max(wrapped);
    for i in 1..=n {
        let (s, l) = if i < n {
            items[i]
        } else {
            (items[0].0 + TAU, items[0].1)
        };
        if s > reach {
            let gap = s - reach;
            if gap > best_gap {
                best_gap = gap;
                best_after = s;
            }
        }
        reach = reach.max(s + l);
    }
    if best_gap <= 0.0 {
        return (0.0, TAU);
    }
    (normalize(best_after), TAU - best_gap)
}
