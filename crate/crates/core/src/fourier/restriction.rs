use serde::{Deserialize, Serialize};

use super::measure::{Bump, CircleMeasure, Profile};
use super::quad::{gl16, smooth_step};
use crate::angle::CircleArc;
use crate::{Error, Result};

/// Normalised arc length on `Θ ∩ J` together with a smooth surrogate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictionMeasure {
    pub window: CircleArc,
    /// `|Θ ∩ J| / |J|`.
    pub density: f64,
    pub measure: CircleMeasure,
    pub surrogate: CircleMeasure,
    /// `‖μ - ν‖₁` between the two densities.
    pub l1_distance: f64,
    /// `∫ |χ_{Θ∩J} - (unnormalised surrogate)|`, the cut-off loss before normalising.
    pub cutoff_loss: f64,
}

/// Merge an arc family into disjoint components, sorted by start in `[0, 2π)`.
pub fn merge_arcs(arcs: &[CircleArc]) -> Vec<CircleArc> {
    if arcs.iter().any(|a| a.is_full()) {
        return vec![CircleArc::full()];
    }
    let mut v: Vec<(f64, f64)> = arcs.iter().map(|a| (a.start, a.start + a.length)).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (s, e) in v {
        match out.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => out.push((s, e)),
        }
    }
    // an arc running past 2π may swallow the first ones
    if out.len() > 1 {
        let wrap_end = out.last().unwrap().1 - std::f64::consts::TAU;
        while out.len() > 1 && out[0].0 <= wrap_end {
            let first = out.remove(0);
            let last = out.last_mut().unwrap();
            last.1 = last.1.max(first.1 + std::f64::consts::TAU);
        }
    }
    out.into_iter()
        .map(|(s, e)| {
            CircleArc::new(s, (e - s).min(std::f64::consts::TAU)).expect("merged arcs have positive length")
        })
        .collect()
}

fn overlap(a: &CircleArc, b: &CircleArc) -> f64 {
    let mut total = 0.0;
    for shift in [-std::f64::consts::TAU, 0.0, std::f64::consts::TAU] {
        let bs = b.start + shift;
        let lo = a.start.max(bs);
        let hi = (a.start + a.length).min(bs + b.length);
        total += (hi - lo).max(0.0);
    }
    total.min(a.length).min(b.length)
}

/// Normalised restriction of arc length to `Θ ∩ J` where `J` is the longest component of
/// `Θ`, so `Θ` has density 1 in `J`, and a plateau surrogate `ν` whose ramps have width
/// `δ|J|/40`.
pub fn build_restriction_measure(theta: &[CircleArc], delta_target: f64) -> Result<RestrictionMeasure> {
    if !(delta_target > 0.0 && delta_target <= 1.0) {
        return Err(Error::InvalidArgument(format!("delta_target must lie in (0, 1], got {delta_target}")));
    }
    let comps = merge_arcs(theta);
    let window = *comps
        .iter()
        .max_by(|a, b| a.length.total_cmp(&b.length))
        .ok_or_else(|| Error::InvalidArgument("empty arc family".into()))?;
    let inside: Vec<CircleArc> = comps
        .iter()
        .filter_map(|c| {
            let o = overlap(&window, c);
            (o > 0.0).then(|| {
                let start = if window.contains(c.start) { c.start } else { window.start };
                CircleArc::new(start, o).unwrap()
            })
        })
        .collect();
    let covered: f64 = inside.iter().map(|a| a.length).sum();
    let density = covered / window.length;
    let target = 1.0 - delta_target / 10.0;
    if !(density > target) {
        return Err(Error::NoDensityWindow { target });
    }

    let ramp_total = delta_target * window.length / 40.0;
    let bumps: Vec<Bump> = inside
        .iter()
        .map(|a| Bump {
            arc: *a,
            profile: Profile::Plateau {
                ramp: (ramp_total / inside.len() as f64).min(a.length / 4.0),
            },
            mass: a.length / covered,
        })
        .collect();
    let (l1_distance, cutoff_loss) = restriction_distances(&bumps, covered);
    Ok(RestrictionMeasure {
        window,
        density,
        measure: CircleMeasure::Restriction { arcs: inside },
        surrogate: CircleMeasure::BumpDensity { bumps },
        l1_distance,
        cutoff_loss,
    })
}

/// Direct integration of `|1/|Θ∩J| - ν|` and of the unnormalised cut-off loss over each
/// arc. Outside the arcs both densities vanish.
fn restriction_distances(bumps: &[Bump], covered: f64) -> (f64, f64) {
    let (x, w) = gl16();
    let (mut l1, mut loss) = (0.0, 0.0);
    for b in bumps {
        let Profile::Plateau { ramp } = b.profile else { unreachable!() };
        let len = b.arc.length;
        let norm = b.mass / (len - ramp);
        let panels = ((len / ramp).ceil() as usize * 8).max(16);
        let h = len / panels as f64;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (xi, wi) in x.iter().zip(w) {
                let s = mid + 0.5 * h * xi;
                let cut = smooth_step(s / ramp) * smooth_step((len - s) / ramp);
                l1 += wi * 0.5 * h * (1.0 / covered - cut * norm).abs();
                loss += wi * 0.5 * h * (1.0 - cut);
            }
        }
    }
    (l1, loss)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_arc() {
        let a = CircleArc::new(0.4, 0.7).unwrap();
        let r = build_restriction_measure(&[a], 0.3).unwrap();
        assert!((r.window.start - a.start).abs() < 1e-15 && (r.window.length - a.length).abs() < 1e-15);
        assert!((r.density - 1.0).abs() < 1e-15);
        let CircleMeasure::Restriction { arcs } = &r.measure else { panic!() };
        assert_eq!(arcs.len(), 1);
        r.surrogate.validate().unwrap();
        assert!(r.l1_distance <= 0.15);
        assert!(r.cutoff_loss <= 0.3 * a.length / 10.0);
    }

    #[test]
    fn two_arcs_with_small_gap() {
        let a = CircleArc::new(0.0, 0.2).unwrap();
        let b = CircleArc::new(0.21, 0.2).unwrap();
        let r = build_restriction_measure(&[a, b], 0.5).unwrap();
        assert!(a.contains_arc(&r.window) || b.contains_arc(&r.window));
        assert!(r.l1_distance <= 0.25);
    }

    #[test]
    fn merging_wraps_around() {
        let a = CircleArc::new(6.0, 1.0).unwrap();
        let b = CircleArc::new(0.5, 0.5).unwrap();
        let m = merge_arcs(&[a, b]);
        assert_eq!(m.len(), 1);
        assert!((m[0].start - 6.0).abs() < 1e-12);
        assert!((m[0].length - (1.0 + std::f64::consts::TAU - 6.0)).abs() < 1e-12);
    }
}
