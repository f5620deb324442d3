//! Membership in `R_Θ E` for `E = Λ + B_ε(0)`, certified region verification, holes and
//! empirical covering radii.
//!
//! A point `x` is covered when some `θ ∈ Θ` and `λ ∈ Λ` satisfy `|R_{-θ}x - λ| < ε`. For a
//! fixed `λ` the distance `|R_{-θ}x - λ|` depends only on how far `θ` is (around the
//! circle) from the aligning angle `arg x - arg λ`, so the minimum over an arc or a sorted
//! finite set is available in closed form.

mod holes;
mod t0;
mod verify;

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::angle::{self, circ_dist, hull_of, normalize, polar_angle, CircleArc};
use crate::{Error, Lattice, PolarBox, Result, Vec2, ETA};

pub use holes::{find_hole_beyond, recheck_hole, Hole, HoleSearch};
pub use t0::empirical_t0;
pub use verify::{verify_region, verify_summary, Cell, CoverageReport, RegionSummary};

/// Three-valued outcome of a membership predicate evaluated with margin [`ETA`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Covered,
    Uncovered,
    Ambiguous,
}

impl Verdict {
    pub fn from_distance(d: f64, epsilon: f64) -> Self {
        if d < epsilon - ETA {
            Verdict::Covered
        } else if d >= epsilon + ETA {
            Verdict::Uncovered
        } else {
            Verdict::Ambiguous
        }
    }
}

/// A closed set of rotation angles `Θ ⊆ S¹`.
///
/// Infinite sets are represented by finite data: a `Sequence` is its stored prefix plus
/// the limit point, and a `PerfectTree` is the nested family of arc levels whose
/// intersection is the set. Coverage questions about them are answered on that data
/// (the deepest arc level for trees) and are labelled as truncated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AngleSet {
    Finite { angles: Vec<f64> },
    Arc { arc: CircleArc },
    ArcUnion { arcs: Vec<CircleArc> },
    Sequence { angles: Vec<f64>, limit: f64 },
    PerfectTree { levels: Vec<Vec<CircleArc>> },
}

impl AngleSet {
    pub fn finite(angles: &[f64]) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::InvalidArgument("finite angle set must be nonempty".into()));
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("angles must be finite".into()));
        }
        let mut v: Vec<f64> = angles.iter().map(|&a| normalize(a)).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        Ok(AngleSet::Finite { angles: v })
    }

    pub fn arc(start: f64, length: f64) -> Result<Self> {
        Ok(AngleSet::Arc {
            arc: CircleArc::new(start, length)?,
        })
    }

    pub fn arc_union(arcs: Vec<CircleArc>) -> Result<Self> {
        if arcs.is_empty() {
            return Err(Error::InvalidArgument("arc union must be nonempty".into()));
        }
        Ok(AngleSet::ArcUnion { arcs })
    }

    /// A convergent sequence given by a prefix whose distance to `limit` is nonincreasing.
    pub fn sequence(angles: Vec<f64>, limit: f64) -> Result<Self> {
        let angles: Vec<f64> = angles.into_iter().map(normalize).collect();
        let limit = normalize(limit);
        for w in angles.windows(2) {
            if circ_dist(w[1], limit) > circ_dist(w[0], limit) + 1e-15 {
                return Err(Error::InvalidArgument(
                    "sequence prefix must approach its limit monotonically".into(),
                ));
            }
        }
        Ok(AngleSet::Sequence { angles, limit })
    }

    /// Nested arc families: each level has two disjoint arcs inside every arc of the
    /// previous level.
    pub fn perfect_tree(levels: Vec<Vec<CircleArc>>) -> Result<Self> {
        validate_tree(&levels)?;
        Ok(AngleSet::PerfectTree { levels })
    }

    pub fn is_arc_type(&self) -> bool {
        matches!(self, AngleSet::Arc { .. } | AngleSet::ArcUnion { .. })
    }

    /// Whether verdicts about this set are made on stored finite data of an infinite set.
    pub fn is_truncated(&self) -> bool {
        matches!(self, AngleSet::Sequence { .. } | AngleSet::PerfectTree { .. })
    }

    /// `Θ + φ`.
    pub fn rotated(&self, phi: f64) -> Self {
        let r = |a: &f64| normalize(a + phi);
        match self {
            AngleSet::Finite { angles } => {
                let mut v: Vec<f64> = angles.iter().map(r).collect();
                v.sort_by(f64::total_cmp);
                AngleSet::Finite { angles: v }
            }
            AngleSet::Arc { arc } => AngleSet::Arc {
                arc: arc.rotated(phi),
            },
            AngleSet::ArcUnion { arcs } => AngleSet::ArcUnion {
                arcs: arcs.iter().map(|a| a.rotated(phi)).collect(),
            },
            AngleSet::Sequence { angles, limit } => AngleSet::Sequence {
                angles: angles.iter().map(r).collect(),
                limit: r(limit),
            },
            AngleSet::PerfectTree { levels } => AngleSet::PerfectTree {
                levels: levels
                    .iter()
                    .map(|l| l.iter().map(|a| a.rotated(phi)).collect())
                    .collect(),
            },
        }
    }

    /// Flattened view used by every geometric query.
    pub fn pieces(&self) -> Pieces {
        match self {
            AngleSet::Finite { angles } => Pieces::new(angles.clone(), vec![]),
            AngleSet::Arc { arc } => Pieces::new(vec![], vec![*arc]),
            AngleSet::ArcUnion { arcs } => Pieces::new(vec![], arcs.clone()),
            AngleSet::Sequence { angles, limit } => {
                let mut v = angles.clone();
                v.push(*limit);
                Pieces::new(v, vec![])
            }
            AngleSet::PerfectTree { levels } => {
                Pieces::new(vec![], levels.last().cloned().unwrap_or_default())
            }
        }
    }
}

pub(crate) fn validate_tree(levels: &[Vec<CircleArc>]) -> Result<()> {
    if levels.first().map_or(true, |l| l.len() != 1) {
        return Err(Error::InvalidArgument("perfect tree needs a single root arc".into()));
    }
    for (n, pair) in levels.windows(2).enumerate() {
        let (parent, child) = (&pair[0], &pair[1]);
        if child.len() != 2 * parent.len() {
            return Err(Error::InvalidArgument(format!(
                "level {} must have two arcs per parent",
                n + 1
            )));
        }
        for (k, p) in parent.iter().enumerate() {
            let (a, b) = (&child[2 * k], &child[2 * k + 1]);
            if !p.contains_arc(a) || !p.contains_arc(b) {
                return Err(Error::InvalidArgument(format!("level {} arc escapes its parent", n + 1)));
            }
        }
        for i in 0..child.len() {
            for j in i + 1..child.len() {
                if !child[i].disjoint(&child[j]) {
                    return Err(Error::InvalidArgument(format!(
                        "level {} arcs are not disjoint",
                        n + 1
                    )));
                }
            }
        }
    }
    Ok(())
}

/// An angle set flattened to sorted points plus arcs.
#[derive(Debug, Clone, Default)]
pub struct Pieces {
    points: Vec<f64>,
    arcs: Vec<CircleArc>,
}

impl Pieces {
    pub fn new(mut points: Vec<f64>, arcs: Vec<CircleArc>) -> Self {
        for p in points.iter_mut() {
            *p = normalize(*p);
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        Self { points, arcs }
    }

    pub fn finite(points: &[f64]) -> Self {
        Self::new(points.to_vec(), vec![])
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.arcs.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn arcs(&self) -> &[CircleArc] {
        &self.arcs
    }

    /// Nearest element of the set to `tau` and the circular distance to it.
    pub fn nearest(&self, tau: f64) -> (f64, f64) {
        let tau = normalize(tau);
        let mut best = (f64::NAN, f64::INFINITY);
        if !self.points.is_empty() {
            let k = self.points.partition_point(|&p| p < tau);
            let n = self.points.len();
            for idx in [k % n, (k + n - 1) % n] {
                let p = self.points[idx];
                let d = circ_dist(p, tau);
                if d < best.1 {
                    best = (p, d);
                }
            }
        }
        for a in &self.arcs {
            let d = a.dist_to(tau);
            if d < best.1 {
                best = (a.nearest(tau), d);
            }
        }
        best
    }

    pub fn min_dev(&self, tau: f64) -> f64 {
        self.nearest(tau).1
    }

    /// Smallest arc `(start, length)` containing the set.
    pub fn hull(&self) -> (f64, f64) {
        let items: Vec<(f64, f64)> = self
            .points
            .iter()
            .map(|&p| (p, 0.0))
            .chain(self.arcs.iter().map(|a| (a.start, a.length)))
            .collect();
        hull_of(&items)
    }
}

/// A lattice point in polar form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cand {
    pub r: f64,
    pub phi: f64,
}

impl Cand {
    pub fn from_point(p: &Vec2) -> Self {
        Self {
            r: p.norm(),
            phi: polar_angle(p),
        }
    }
}

/// Distance between the points at polar coordinates `(r1, ·)` and `(r2, ·)` whose angles
/// differ by `dev`.
#[inline]
pub fn polar_dist(r1: f64, r2: f64, dev: f64) -> f64 {
    let s = (0.5 * dev).sin();
    ((r1 - r2) * (r1 - r2) + 4.0 * r1 * r2 * s * s).sqrt()
}

/// `min_{θ∈Θ} |R_{-θ}x - λ|` with `x` given in polar form.
#[inline]
pub fn lambda_dist(rho: f64, alpha: f64, c: &Cand, pieces: &Pieces) -> f64 {
    if c.r == 0.0 || rho == 0.0 {
        return (rho - c.r).abs();
    }
    polar_dist(rho, c.r, pieces.min_dev(alpha - c.phi))
}

/// Lattice points with `r_lo - reach < |λ| < r_hi + reach` whose angle is compatible with
/// a point of polar angle in `[a_lo, a_hi]` rotated by `-θ`, `θ ∈ Θ`, landing within
/// `reach` of `λ`.
pub(crate) fn gather(
    lattice: &Lattice,
    pieces: &Pieces,
    r_lo: f64,
    r_hi: f64,
    a_lo: f64,
    a_hi: f64,
    reach: f64,
) -> Result<Vec<Cand>> {
    let (h_start, h_len) = pieces.hull();
    let w = if r_lo > reach {
        (reach / r_lo).min(1.0).asin() + 1e-12
    } else {
        TAU
    };
    let span = (a_hi - a_lo) + h_len + 2.0 * w;
    let lo = (r_lo - reach).max(0.0);
    let hi = r_hi + reach;
    let pbox = if span >= TAU {
        PolarBox::annulus(lo, hi)?
    } else {
        PolarBox::new(lo, hi, a_lo - h_start - h_len - w, a_lo - h_start - h_len - w + span)?
    };
    let mut out = Vec::new();
    if lo == 0.0 {
        out.push(Cand { r: 0.0, phi: 0.0 });
    }
    lattice.visit_polar_box(&pbox, |p| out.push(Cand::from_point(&p)))?;
    Ok(out)
}

/// `min_{θ∈Θ} dist(R_{-θ}x, Λ)`, exact whenever it is below `reach`; otherwise some value
/// `≥ reach` is returned.
pub fn min_dist(x: &Vec2, pieces: &Pieces, lattice: &Lattice, reach: f64) -> Result<f64> {
    if pieces.is_empty() {
        return Ok(f64::INFINITY);
    }
    let rho = x.norm();
    let alpha = polar_angle(x);
    let cands = gather(lattice, pieces, rho, rho, alpha, alpha, reach)?;
    Ok(cands
        .iter()
        .map(|c| lambda_dist(rho, alpha, c, pieces))
        .fold(reach, f64::min))
}

/// The best rotation angle in `Θ` for `x`, with the distance it achieves, if any lattice
/// point lies within `reach`.
pub fn best_witness(
    x: &Vec2,
    pieces: &Pieces,
    lattice: &Lattice,
    reach: f64,
) -> Result<Option<(f64, f64)>> {
    let rho = x.norm();
    let alpha = polar_angle(x);
    let cands = gather(lattice, pieces, rho, rho, alpha, alpha, reach)?;
    let mut best: Option<(f64, f64)> = None;
    for c in &cands {
        let (theta, dev) = pieces.nearest(alpha - c.phi);
        let d = if c.r == 0.0 { rho } else { polar_dist(rho, c.r, dev) };
        if d < reach && best.map_or(true, |(_, b)| d < b) {
            best = Some((theta, d));
        }
    }
    Ok(best)
}

/// Distance from `x` to the lattice.
pub fn dist_to_lattice(lattice: &Lattice, x: &Vec2) -> f64 {
    lattice.dist_to_lattice(x)
}

/// Whether `x ∈ R_Θ E` with `E = Λ + B_ε(0)`.
pub fn covers_point(x: &Vec2, theta: &AngleSet, lattice: &Lattice, epsilon: f64) -> Result<Verdict> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let d = match theta {
        // Finite sets are checked angle by angle.
        AngleSet::Finite { angles } => angles
            .iter()
            .map(|&t| lattice.dist_to_lattice(&angle::rotate(x, -t)))
            .fold(f64::INFINITY, f64::min),
        _ => min_dist(x, &theta.pieces(), lattice, epsilon + 2.0 * ETA)?,
    };
    Ok(Verdict::from_distance(d, epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn covers_examples() {
        let z = Lattice::integer();
        let f0 = AngleSet::finite(&[0.0]).unwrap();
        assert_eq!(covers_point(&Vec2::new(1.0, 0.0), &f0, &z, 0.1).unwrap(), Verdict::Covered);
        assert_eq!(covers_point(&Vec2::new(0.5, 0.5), &f0, &z, 0.5).unwrap(), Verdict::Uncovered);
        let f45 = AngleSet::finite(&[PI / 4.0]).unwrap();
        assert_eq!(covers_point(&Vec2::new(0.5, 0.5), &f45, &z, 0.3).unwrap(), Verdict::Covered);
        let full = AngleSet::arc(0.0, TAU).unwrap();
        assert_eq!(covers_point(&Vec2::new(10.0, 0.0), &full, &z, 0.1).unwrap(), Verdict::Covered);
        assert!(covers_point(&Vec2::new(1.0, 0.0), &f0, &z, 0.0).is_err());
    }

    #[test]
    fn pieces_nearest_wraps() {
        let p = Pieces::finite(&[0.1, 3.0, 6.2]);
        let (t, d) = p.nearest(0.0);
        assert_eq!(t, 6.2);
        assert!((d - (TAU - 6.2)).abs() < 1e-12);
    }

    #[test]
    fn sequence_must_converge() {
        assert!(AngleSet::sequence(vec![0.5, 0.25, 0.125], 0.0).is_ok());
        assert!(AngleSet::sequence(vec![0.25, 0.5], 0.0).is_err());
    }

    #[test]
    fn tree_validation() {
        let root = CircleArc::new(0.0, 1.0).unwrap();
        let kids = vec![CircleArc::new(0.1, 0.2).unwrap(), CircleArc::new(0.6, 0.2).unwrap()];
        assert!(AngleSet::perfect_tree(vec![vec![root], kids]).is_ok());
        let bad = vec![CircleArc::new(0.1, 0.5).unwrap(), CircleArc::new(0.5, 0.2).unwrap()];
        assert!(AngleSet::perfect_tree(vec![vec![root], bad]).is_err());
    }
}
