use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, TAU};

use crate::angle::normalize;
use crate::{Error, Result};

/// Cap on the number of unit strands examined.
pub const STRAND_CAP: usize = 1 << 22;

/// Largest circular gap between the points `frac(s·m)`, `m = 0..k`.
pub fn max_strand_gap(s: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut v: Vec<f64> = (0..k).map(|m| (s * m as f64).rem_euclid(1.0)).collect();
    v.sort_by(f64::total_cmp);
    let mut gap = v[0] + 1.0 - v[k - 1];
    for w in v.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    gap
}

/// Density certificate for a segment of slope `s` on the torus `R²/Z²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentDensity {
    /// Extent of the segment along its parameter axis.
    pub h: f64,
    /// Full unit strands used by the certificate.
    pub strands: usize,
    /// Largest gap between consecutive strands, measured along the crossing axis.
    pub max_gap: f64,
    /// Euclidean length of the segment.
    pub length: f64,
    /// Whether the parameter axis is `y` (for `|s| > 1`) rather than `x`.
    pub swapped: bool,
}

/// Shortest `h` such that the open `δ`-neighbourhood of `{(x, s·x) mod 1 : x ∈ [0, h]}`
/// covers the torus, certified by strand geometry.
///
/// Cut the segment into unit windows `x ∈ [δ + m, δ + m + 1)`: each window is a full strand
/// of slope `s` through the torus, and the strands are parallel lines whose vertical offsets
/// are `frac(s·m)` up to a common shift. A point of the torus between two neighbouring
/// strands with vertical gap `g` is within `g / (2√(1+s²))` of one of them, and the foot of
/// the perpendicular moves at most `δ` along the axis, which the extra `δ` at both ends
/// absorbs. So `K` strands with `max gap < 2δ√(1+s²)` certify `h = K + 2δ`. For `|s| > 1`
/// the roles of the axes are swapped and `h` is reported in units of `x`.
pub fn torus_segment_density(slope: f64, delta: f64) -> Result<SegmentDensity> {
    if !(delta > 0.0) || !slope.is_finite() {
        return Err(Error::InvalidArgument("need delta > 0 and a finite slope".into()));
    }
    let swapped = slope.abs() > 1.0;
    let s = if swapped { 1.0 / slope } else { slope };
    let scale = (1.0 + s * s).sqrt();
    if delta > std::f64::consts::FRAC_1_SQRT_2 {
        return Ok(SegmentDensity {
            h: 0.0,
            strands: 0,
            max_gap: 1.0,
            length: 0.0,
            swapped,
        });
    }
    let bound = 2.0 * delta * scale;
    let ok = |k: usize| max_strand_gap(s, k) < bound;
    let mut hi = 1usize;
    while !ok(hi) {
        if hi >= STRAND_CAP {
            return Err(Error::SlopeBudget { cap: STRAND_CAP });
        }
        hi = (hi * 2).min(STRAND_CAP);
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let along = hi as f64 + 2.0 * delta;
    let length = along * scale;
    let h = if swapped { along * s.abs() } else { along };
    Ok(SegmentDensity {
        h,
        strands: hi,
        max_gap: max_strand_gap(s, hi),
        length,
        swapped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementaryT0 {
    pub t0: f64,
    /// Longest strip length over all directions.
    pub strip_length: f64,
    pub directions: Vec<f64>,
}

/// Largest circular gap between the given angles.
pub fn max_circular_gap(angles: &[f64]) -> f64 {
    let mut v: Vec<f64> = angles.iter().map(|&a| normalize(a)).collect();
    v.sort_by(f64::total_cmp);
    match v.len() {
        0 => TAU,
        n => {
            let mut g = v[0] + TAU - v[n - 1];
            for w in v.windows(2) {
                g = g.max(w[1] - w[0]);
            }
            g
        }
    }
}

/// Directions spaced by at most `θ0/2` whose strip slopes `-1/tan α` are badly
/// approximable: `(⌊Mσ⌋ + g)/M` with `g` the golden-ratio conjugate has continued fraction
/// tail `[1; 1, 1, …]`.
pub fn default_directions(theta0: f64) -> Vec<f64> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let m = (8.0 / theta0).ceil().max(1.0);
    let n = (TAU / (0.5 * theta0)).ceil() as usize;
    (0..n)
        .map(|j| {
            let alpha = j as f64 * TAU / n as f64;
            let sigma = -1.0 / alpha.tan();
            // perturb within the slope space so that the direction moves only slightly
            let slope = if sigma.is_finite() && sigma.abs() <= 1.0 {
                ((m * sigma).floor() + g) / m
            } else {
                let inv = if sigma.is_finite() { 1.0 / sigma } else { 0.0 };
                1.0 / (((m * inv).floor() + g) / m)
            };
            // direction α with -1/tan α = slope, in the same half-plane pair as the original
            let a = (-1.0 / slope).atan();
            let cands = [a, a + std::f64::consts::PI];
            let best = cands
                .iter()
                .copied()
                .min_by(|x, y| {
                    crate::angle::circ_dist(*x, alpha).total_cmp(&crate::angle::circ_dist(*y, alpha))
                })
                .unwrap();
            normalize(best)
        })
        .collect()
}

/// Radius beyond which every annulus-arc `t < r < t + ε`, `γ ≤ φ ≤ γ + 2θ0` contains a point
/// of `Z²`.
///
/// Every open arc of length `θ0` holds a direction `α_j`, so inside `(γ, γ + 2θ0)` some
/// `α_j` leaves room of at least `θ0` on one side. Put a strip of half-width `ε/4` and length
/// `H` tangentially at `p = (t + ε/2, α_j)` towards that side. Its outer corners are at
/// distance `√((t + 3ε/4)² + H²)` from the origin, which stays below `t + ε` once
/// `t > 2H²/ε - 7ε/8`; its inner edge sits at radius `t + ε/4`; and its far end subtends
/// the angle `atan(H/(t + ε/4)) ≤ θ0` once `t ≥ H/tan θ0 - ε/4`. Such a strip contains an
/// `ε/4`-neighbourhood of a segment that is `ε/4`-dense in the torus, hence a lattice point.
pub fn elementary_t0(epsilon: f64, theta0: f64, directions: Option<&[f64]>) -> Result<ElementaryT0> {
    if !(epsilon > 0.0 && theta0 > 0.0 && theta0 <= std::f64::consts::PI) {
        return Err(Error::InvalidArgument("need epsilon > 0 and 0 < θ0 ≤ π".into()));
    }
    let owned;
    let dirs: &[f64] = match directions {
        Some(d) => d,
        None => {
            owned = default_directions(theta0);
            &owned
        }
    };
    if !(max_circular_gap(dirs) < theta0) {
        return Err(Error::InvalidArgument(format!(
            "directions leave an arc of length {} ≥ θ0 empty",
            max_circular_gap(dirs)
        )));
    }
    let mut h = 0.0f64;
    for &alpha in dirs {
        let (sn, cs) = alpha.sin_cos();
        // the strip runs along (sin α, -cos α)
        let d = torus_segment_density(-cs / sn, epsilon / 4.0)?;
        h = h.max(d.length);
    }
    let radial = 2.0 * h * h / epsilon - 7.0 * epsilon / 8.0;
    let angular = if theta0 < FRAC_PI_2 {
        h / theta0.tan() - epsilon / 4.0
    } else {
        0.0
    };
    Ok(ElementaryT0 {
        t0: radial.max(angular).max(0.0),
        strip_length: h,
        directions: dirs.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn huge_delta_needs_nothing() {
        assert_eq!(torus_segment_density(0.618, 0.71).unwrap().h, 0.0);
    }

    #[test]
    fn golden_slope_density_monotone() {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let hs: Vec<f64> = [0.02, 0.05, 0.1]
            .iter()
            .map(|&d| torus_segment_density(g, d).unwrap().h)
            .collect();
        assert!(hs[0] >= hs[1] && hs[1] >= hs[2]);
    }

    #[test]
    fn rational_slope_hits_budget() {
        assert!(matches!(torus_segment_density(0.5, 0.01), Err(Error::SlopeBudget { .. })));
    }

    #[test]
    fn default_directions_cover() {
        for th in [0.1, 0.5, 1.0, std::f64::consts::PI] {
            assert!(max_circular_gap(&default_directions(th)) < th);
        }
    }
}
