use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AngleSet;
use crate::angle::{rotate, unit};
use crate::{Error, Lattice, PolarBox, Result, Vec2, ETA};

/// A closed disk that stays a positive distance away from `R_Θ Ē`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hole {
    pub center: Vec2,
    pub radius: f64,
    /// Certified margin: `dist(R_{-θ}center, Λ) ≥ ε + radius + clearance` for all `θ ∈ Θ`.
    pub clearance: f64,
}

/// Budgets for [`find_hole_beyond`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoleSearch {
    /// Ratio between the outer and inner radius of each scanned annulus.
    pub growth: f64,
    /// Number of best-scoring translates refined by local ascent.
    pub keep: usize,
    pub max_rounds: u32,
    /// Smallest clearance accepted.
    pub min_clearance: f64,
}

impl Default for HoleSearch {
    fn default() -> Self {
        Self {
            growth: 2.0,
            keep: 32,
            max_rounds: 8,
            min_clearance: 1e-6,
        }
    }
}

fn g_value(x: &Vec2, angles: &[f64], lattice: &Lattice) -> f64 {
    angles
        .iter()
        .map(|&t| lattice.dist_to_lattice(&rotate(x, -t)))
        .fold(f64::INFINITY, f64::min)
}

fn score(t: &Vec2, angles: &[f64], lattice: &Lattice) -> f64 {
    angles
        .iter()
        .map(|&th| lattice.dist_to_lattice(&rotate(t, -th)))
        .fold(0.0, f64::max)
}

fn cmp_scored(a: &(f64, Vec2), b: &(f64, Vec2)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0)
        .then(a.1.x.total_cmp(&b.1.x))
        .then(a.1.y.total_cmp(&b.1.y))
}

/// Coordinate ascent of `g` on a shrinking step.
fn ascend(start: Vec2, angles: &[f64], lattice: &Lattice, step0: f64) -> (Vec2, f64) {
    let dirs = [
        Vec2::new(1.0, 0.0),
        Vec2::new(-1.0, 0.0),
        Vec2::new(0.0, 1.0),
        Vec2::new(0.0, -1.0),
        Vec2::new(0.7071067811865476, 0.7071067811865476),
        Vec2::new(-0.7071067811865476, 0.7071067811865476),
        Vec2::new(0.7071067811865476, -0.7071067811865476),
        Vec2::new(-0.7071067811865476, -0.7071067811865476),
    ];
    let mut x = start;
    let mut gx = g_value(&x, angles, lattice);
    let mut step = step0;
    let mut iters = 0;
    while step > step0 * 1e-7 && iters < 4000 {
        iters += 1;
        let mut moved = false;
        for d in &dirs {
            let y = x + d * step;
            let gy = g_value(&y, angles, lattice);
            if gy > gx {
                x = y;
                gx = gy;
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (x, gx)
}

/// Finds a disk of radius `rho_target` centred at distance at least `r_min` from the origin
/// that misses `R_Θ(Λ + B̄_ε)` for a finite `Θ`.
///
/// Translates `T = R_{θ₁}λ` whose rotations `R_{-θ_j}T` all lie close to `Λ` act as
/// approximate common periods, so the coverage pattern near `T` resembles the one near the
/// origin. The best such translates seed a local maximisation of
/// `g(x) = min_j dist(R_{-θ_j}x, Λ)`.
pub fn find_hole_beyond(
    theta: &AngleSet,
    lattice: &Lattice,
    epsilon: f64,
    r_min: f64,
    rho_target: f64,
    opts: &HoleSearch,
) -> Result<Hole> {
    let AngleSet::Finite { angles } = theta else {
        return Err(Error::InvalidArgument("hole search needs a finite angle set".into()));
    };
    let s = lattice.shortest_len();
    if !(epsilon < 0.5 * s) {
        return Err(Error::Precondition {
            epsilon,
            half_shortest: 0.5 * s,
        });
    }
    if !(epsilon > 0.0 && rho_target > 0.0 && r_min >= 0.0 && opts.growth > 1.0) {
        return Err(Error::InvalidArgument("hole search parameters out of range".into()));
    }
    let needed = epsilon + rho_target + opts.min_clearance.max(ETA);
    let th1 = angles[0];
    let h = lattice.deep_hole();
    let mut offsets = vec![rotate(&h, th1)];
    for k in 0..8 {
        offsets.push(unit(k as f64 * std::f64::consts::FRAC_PI_4) * (0.5 * s));
    }

    let mut best_g = 0.0f64;
    let mut lo = r_min.max(1.0) + s;
    for _ in 0..opts.max_rounds {
        let hi = lo * opts.growth;
        let top = top_translates(angles, lattice, th1, lo, hi, opts.keep)?;
        let found: Vec<Option<(Vec2, f64)>> = top
            .par_iter()
            .map(|(_, t)| {
                let mut local: Option<(Vec2, f64)> = None;
                for off in &offsets {
                    let (x, g) = ascend(t + off, angles, lattice, 0.25 * s);
                    if x.norm() >= r_min && local.map_or(true, |(_, b)| g > b) {
                        local = Some((x, g));
                    }
                }
                local
            })
            .collect();
        // Candidates are in score order, so the first acceptable one is deterministic.
        for (x, g) in found.into_iter().flatten() {
            best_g = best_g.max(g);
            if g >= needed {
                return Ok(Hole {
                    center: x,
                    radius: rho_target,
                    clearance: g - epsilon - rho_target,
                });
            }
        }
        lo = hi;
    }
    Err(Error::NoHoleFound { best_g, needed })
}

fn top_translates(
    angles: &[f64],
    lattice: &Lattice,
    th1: f64,
    lo: f64,
    hi: f64,
    keep: usize,
) -> Result<Vec<(f64, Vec2)>> {
    const CHUNK: usize = 1 << 16;
    let mut top: Vec<(f64, Vec2)> = Vec::new();
    let mut buf: Vec<Vec2> = Vec::with_capacity(CHUNK);
    let flush = |buf: &mut Vec<Vec2>, top: &mut Vec<(f64, Vec2)>| {
        let mut scored: Vec<(f64, Vec2)> = buf
            .par_iter()
            .map(|l| {
                let t = rotate(l, th1);
                (score(&t, angles, lattice), t)
            })
            .collect();
        scored.append(top);
        scored.sort_by(cmp_scored);
        scored.truncate(keep);
        *top = scored;
        buf.clear();
    };
    let pbox = PolarBox::annulus(lo, hi)?;
    lattice.visit_polar_box(&pbox, |p| {
        buf.push(p);
        if buf.len() == CHUNK {
            flush(&mut buf, &mut top);
        }
    })?;
    flush(&mut buf, &mut top);
    Ok(top)
}

/// Recomputes the clearance of `hole` against `Θ` without the closed-form machinery:
/// finite angles by brute-force enumeration near each rotated center, arcs by dense
/// sampling with the Lipschitz bound `|c|·Δθ/2` in the angle.
pub fn recheck_hole(hole: &Hole, theta: &AngleSet, lattice: &Lattice, epsilon: f64) -> Result<f64> {
    let pieces = theta.pieces();
    let reach = epsilon + hole.radius + 1.0;
    let brute = |t: f64| -> Result<f64> {
        let y = rotate(&hole.center, -t);
        Ok(lattice
            .points_in_disk(&y, reach)?
            .iter()
            .map(|p| (p - y).norm())
            .fold(reach, f64::min))
    };
    let mut m = f64::INFINITY;
    for &t in pieces.points() {
        m = m.min(brute(t)?);
    }
    let c = hole.center.norm();
    for arc in pieces.arcs() {
        let n = ((arc.length * c / 2e-5).ceil() as usize).clamp(1, 2_000_000);
        let dt = arc.length / n as f64;
        let sampled = (0..n)
            .into_par_iter()
            .map(|k| {
                let y = rotate(&hole.center, -(arc.start + (k as f64 + 0.5) * dt));
                lattice.dist_to_lattice(&y)
            })
            .reduce(|| f64::INFINITY, f64::min);
        m = m.min(sampled - 0.5 * c * dt);
    }
    Ok(m - epsilon - hole.radius)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_zero_hole() {
        let z = Lattice::integer();
        let th = AngleSet::finite(&[0.0]).unwrap();
        let h = find_hole_beyond(&th, &z, 0.3, 100.0, 0.35, &HoleSearch::default()).unwrap();
        assert!(h.center.norm() >= 100.0);
        assert!(recheck_hole(&h, &th, &z, 0.3).unwrap() > 0.0);
        let rot = AngleSet::finite(&[0.0, std::f64::consts::FRAC_PI_2]).unwrap();
        let h = find_hole_beyond(&rot, &z, 0.3, 100.0, 0.35, &HoleSearch::default()).unwrap();
        assert!(recheck_hole(&h, &rot, &z, 0.3).unwrap() > 0.0);
    }

    #[test]
    fn precondition_enforced() {
        let z = Lattice::integer();
        let th = AngleSet::finite(&[0.0]).unwrap();
        let e = find_hole_beyond(&th, &z, 0.5, 10.0, 0.1, &HoleSearch::default()).unwrap_err();
        assert!(matches!(e, Error::Precondition { .. }));
    }
}
