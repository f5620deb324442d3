use serde::{Deserialize, Serialize};

use crate::angle::{normalize, CircleArc};
use crate::coverage::{find_hole_beyond, recheck_hole, validate_tree, AngleSet, Hole, HoleSearch};
use crate::{Error, Lattice, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BadOpts {
    /// Target radius of every hole.
    pub rho: f64,
    pub search: HoleSearch,
    /// Root arc of the perfect-set construction.
    pub root: CircleArc,
}

impl Default for BadOpts {
    fn default() -> Self {
        Self {
            rho: 0.05,
            search: HoleSearch {
                min_clearance: 0.02,
                ..HoleSearch::default()
            },
            root: CircleArc { start: 0.0, length: 1.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadSequenceResult {
    pub angles: Vec<f64>,
    pub holes: Vec<Hole>,
    /// `clearances[n][j]`: recomputed clearance of hole `j` against the first `n + 1` angles.
    pub clearances: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfectSetResult {
    pub levels: Vec<Vec<CircleArc>>,
    pub holes: Vec<Hole>,
    /// `clearances[n][j]`: clearance of hole `j` against the whole arcs of level `n + 1`.
    pub clearances: Vec<Vec<f64>>,
}

impl PerfectSetResult {
    pub fn angle_set(&self) -> Result<AngleSet> {
        AngleSet::perfect_tree(self.levels.clone())
    }
}

/// Largest step an angle set may rotate without any hole losing more than half its
/// clearance: a point at radius `r` moves by at most `r·δ`.
fn safe_step(holes: &[Hole], clearances: &[f64], epsilon: f64) -> f64 {
    holes
        .iter()
        .zip(clearances)
        .map(|(h, d)| d / (2.0 * (h.center.norm() + h.radius + epsilon)))
        .fold(f64::INFINITY, f64::min)
}

/// Inner search radius that puts the next hole beyond all existing ones.
fn next_radius(holes: &[Hole], index: usize, rho: f64, s: f64) -> f64 {
    let beyond = holes
        .iter()
        .map(|h| h.center.norm() + h.radius + rho + s)
        .fold(0.0, f64::max);
    (index as f64).max(beyond)
}

/// Caps a new hole's radius at half its gap to every earlier hole.
fn fit_hole(mut h: Hole, holes: &[Hole], rho: f64) -> Hole {
    let gap = holes
        .iter()
        .map(|g| (g.center - h.center).norm() - g.radius)
        .fold(f64::INFINITY, f64::min);
    let r = rho.min(0.5 * gap);
    h.clearance += h.radius - r;
    h.radius = r;
    h
}

fn recheck_all(holes: &[Hole], theta: &AngleSet, lattice: &Lattice, epsilon: f64) -> Result<Vec<f64>> {
    holes
        .iter()
        .map(|h| recheck_hole(h, theta, lattice, epsilon))
        .collect()
}

/// Angles `θ₁ = 0, θ₂, …` accumulating geometrically together with disks `G_j`,
/// `|center(G_j)| ≥ j`, that every `R_{θ_i}(Λ + B̄_ε)` misses.
pub fn build_bad_sequence(lattice: &Lattice, epsilon: f64, n: usize, opts: &BadOpts) -> Result<BadSequenceResult> {
    let s = lattice.shortest_len();
    if !(epsilon < 0.5 * s) {
        return Err(Error::Precondition {
            epsilon,
            half_shortest: 0.5 * s,
        });
    }
    let mut out = BadSequenceResult {
        angles: vec![],
        holes: vec![],
        clearances: vec![],
    };
    let mut current: Vec<f64> = vec![];
    for step in 1..=n {
        let theta_next = match out.angles.last() {
            None => 0.0,
            Some(&last) => last + safe_step(&out.holes, &current, epsilon),
        };
        if out.angles.contains(&theta_next) {
            return Err(Error::InvalidArgument("clearance too small to separate angles".into()));
        }
        out.angles.push(theta_next);
        let set = AngleSet::finite(&out.angles)?;
        let after = recheck_all(&out.holes, &set, lattice, epsilon)?;
        for (a, b) in after.iter().zip(&current) {
            debug_assert!(*a >= 0.5 * b - 1e-12, "clearance dropped from {b} to {a}");
        }
        let r = next_radius(&out.holes, step, opts.rho, s);
        let hole = find_hole_beyond(&set, lattice, epsilon, r, opts.rho, &opts.search)?;
        let hole = fit_hole(hole, &out.holes, opts.rho);
        out.holes.push(hole);
        current = recheck_all(&out.holes, &set, lattice, epsilon)?;
        out.clearances.push(current.clone());
    }
    Ok(out)
}

/// Nested arc families with two arcs inside each parent and disks `G_n` missed by the
/// rotations over every arc of level `n`.
pub fn build_bad_perfect_set(
    lattice: &Lattice,
    epsilon: f64,
    depth: usize,
    opts: &BadOpts,
) -> Result<PerfectSetResult> {
    let s = lattice.shortest_len();
    if !(epsilon < 0.5 * s) {
        return Err(Error::Precondition {
            epsilon,
            half_shortest: 0.5 * s,
        });
    }
    let mut out = PerfectSetResult {
        levels: vec![vec![opts.root]],
        holes: vec![],
        clearances: vec![],
    };
    for n in 1..=depth {
        let parents = out.levels.last().unwrap().clone();
        let len = parents[0].length;
        let centers: Vec<f64> = parents
            .iter()
            .flat_map(|a| [normalize(a.start + 0.25 * a.length), normalize(a.start + 0.75 * a.length)])
            .collect();
        let f = AngleSet::finite(&centers)?;
        let r = next_radius(&out.holes, n, opts.rho, s);
        let hole = find_hole_beyond(&f, lattice, epsilon, r, opts.rho, &opts.search)?;
        let hole = fit_hole(hole, &out.holes, opts.rho);
        out.holes.push(hole);
        let d = recheck_all(&out.holes, &f, lattice, epsilon)?;
        let w = safe_step(&out.holes, &d, epsilon).min(len / 8.0);
        let level: Vec<CircleArc> = centers
            .iter()
            .map(|&c| CircleArc::new(c - w, 2.0 * w))
            .collect::<Result<_>>()?;
        out.levels.push(level);
        let tree = AngleSet::ArcUnion {
            arcs: out.levels.last().unwrap().clone(),
        };
        out.clearances.push(recheck_all(&out.holes, &tree, lattice, epsilon)?);
    }
    validate_tree(&out.levels)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_step() {
        let z = Lattice::integer();
        let r = build_bad_sequence(&z, 0.3, 1, &BadOpts::default()).unwrap();
        assert_eq!(r.angles, vec![0.0]);
        assert!(r.holes[0].center.norm() >= 1.0);
        assert!(r.clearances[0][0] > 0.0);
    }

    #[test]
    fn depth_zero_is_root() {
        let z = Lattice::integer();
        let r = build_bad_perfect_set(&z, 0.3, 0, &BadOpts::default()).unwrap();
        assert_eq!(r.levels.len(), 1);
        assert!(r.holes.is_empty());
    }

    #[test]
    fn precondition() {
        let z = Lattice::integer();
        assert!(matches!(
            build_bad_sequence(&z, 0.6, 2, &BadOpts::default()),
            Err(Error::Precondition { .. })
        ));
    }
}
