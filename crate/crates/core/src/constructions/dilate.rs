use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Finite dilation set `{1, …, K}` with `min_k dist(kx, Z) < ε` for every real `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilateCover {
    pub epsilon: f64,
    pub factors: Vec<u64>,
    /// Maximum over `x` of `min_{k ≤ K} dist(kx, Z)`, as `numerator / denominator`.
    pub worst: (u64, u64),
    /// Smallest `m` such that `{1, …, m}` already works.
    pub minimal_prefix: u64,
}

/// Exact `max_x min_{k ≤ m} dist(kx, Z)` as a fraction, with its argmax denominator.
///
/// `x ↦ min_k dist(kx, Z)` is continuous, 1-periodic and piecewise linear with slopes
/// `±k`. Its local maxima sit where two pieces `±(kx - a)` and `±(lx - b)` meet, or at a
/// peak `x = (2a+1)/(2k)` of a single piece, so every candidate is a rational `p/q` with
/// `q ≤ 2m`. Evaluating there with integer arithmetic is exact.
pub fn max_min_dist(m: u64) -> (u64, u64) {
    let mut best = (0u64, 1u64);
    for q in 1..=2 * m {
        for p in 0..q {
            // min_k dist(k p / q, Z) = min_k min(kp mod q, q - kp mod q) / q
            let mut num = q;
            for k in 1..=m {
                let r = (k * p) % q;
                num = num.min(r.min(q - r));
                if num * best.1 <= best.0 * q {
                    break;
                }
            }
            if num * best.1 > best.0 * q {
                best = (num, q);
            }
        }
    }
    best
}

pub fn dilate_cover(epsilon: f64) -> Result<DilateCover> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
    }
    let k = (1.0 / epsilon).ceil() as u64;
    let below = |(n, d): (u64, u64)| (n as f64) < epsilon * d as f64;
    let worst = max_min_dist(k);
    if !below(worst) {
        return Err(Error::InvalidArgument(format!(
            "dilates up to {k} leave x = {}/{} uncovered",
            worst.0, worst.1
        )));
    }
    // the worst gap never grows with more dilates, so the working prefixes form a suffix
    let (mut lo, mut hi) = (1u64, k);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if below(max_min_dist(mid)) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let minimal_prefix = lo;
    Ok(DilateCover {
        epsilon,
        factors: (1..=k).collect(),
        worst,
        minimal_prefix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_values() {
        for m in 1..12u64 {
            let (n, d) = max_min_dist(m);
            assert_eq!(n * (m + 1), d, "m = {m}");
        }
    }

    #[test]
    fn examples() {
        let c = dilate_cover(0.3).unwrap();
        assert_eq!(c.factors, vec![1, 2, 3, 4]);
        assert_eq!(c.minimal_prefix, 3);
        let c = dilate_cover(0.4).unwrap();
        assert_eq!(c.factors, vec![1, 2, 3]);
        assert_eq!(c.minimal_prefix, 2);
        assert_eq!(dilate_cover(0.49).unwrap().minimal_prefix, 2);
        assert!(dilate_cover(0.5).is_err());
        assert!(dilate_cover(0.0).is_err());
    }
}
