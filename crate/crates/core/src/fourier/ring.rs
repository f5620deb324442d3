//! Transforms on whole circles `|ξ| = ρ` through the Jacobi–Anger expansion
//! `exp(-iz cos ψ) = Σ_k (-i)^k J_k(z) e^{ikψ}`, which turns
//! `σ̂(ρ, φ) = Σ_k (-i)^k J_k(2πρ) σ̌_k e^{-ikφ}` with `σ̌_k = ∫ e^{ikθ} dσ` into one FFT
//! over all directions at once.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::f64::consts::TAU;

use super::measure::{CircleMeasure, Profile};
use super::quad::{BumpTables, OMEGA_MAX};

/// `J_k(z)` for `k = 0..=kmax`, by Miller's backward recurrence normalised with
/// `J_0 + 2 Σ_{k≥1} J_{2k} = 1`.
pub fn bessel_j_all(z: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if z < 1e-300 {
        out[0] = 1.0;
        return out;
    }
    let top = (kmax as f64).max(z);
    let start = (top + 30.0 + 12.0 * top.cbrt() + (40.0 * top).sqrt()) as usize;
    let (mut above, mut cur) = (0.0f64, 1e-30f64);
    let mut sum = 0.0;
    for k in (1..=start).rev() {
        if k <= kmax {
            out[k] = cur;
        }
        if k % 2 == 0 {
            sum += 2.0 * cur;
        }
        let below = 2.0 * k as f64 / z * cur - above;
        above = cur;
        cur = below;
        if cur.abs() > 1e250 {
            let s = 1e-250;
            cur *= s;
            above *= s;
            sum *= s;
            for v in &mut out[k.min(kmax + 1)..] {
                *v *= s;
            }
        }
    }
    out[0] = cur;
    sum += cur;
    for v in &mut out {
        *v /= sum;
    }
    out
}

/// Number of Jacobi–Anger terms needed at radius `rho`: `J_k(2πρ)` is below `1e-15`
/// once `k ≥ z + 12 z^{1/3} + 30`.
pub fn ring_order(rho: f64) -> usize {
    let z = TAU * rho;
    (z + 12.0 * z.cbrt() + 30.0).ceil() as usize
}

#[inline]
fn add_rotating(acc: &mut [Complex64], angle: f64, kmax: usize, amp: impl FnMut(usize) -> f64) {
    add_rotating_from(acc, angle, 0, kmax, amp)
}

/// `acc[i] += amp(k) e^{ikθ}` for `k = k0 + i ≤ kmax`, by rotation re-anchored every 256
/// steps.
#[inline]
fn add_rotating_from(acc: &mut [Complex64], angle: f64, k0: usize, kmax: usize, mut amp: impl FnMut(usize) -> f64) {
    let step = Complex64::from_polar(1.0, angle);
    let mut cur = Complex64::new(1.0, 0.0);
    for (i, a) in acc.iter_mut().enumerate().take((kmax + 1).saturating_sub(k0)) {
        let k = k0 + i;
        if i % 256 == 0 {
            cur = Complex64::from_polar(1.0, angle * k as f64);
        }
        *a += cur * amp(k);
        cur *= step;
    }
}

/// Coefficients `Σ m e^{ikc} B0(kh)` for `k ∈ k0..k1` of standard bumps given as
/// `(center, half_width, mass)`. Bumps sharing a half-width share one pass over `B0`.
pub fn bump_coefficients(bumps: &[(f64, f64, f64)], k0: usize, k1: usize) -> Vec<Complex64> {
    let mut acc = vec![Complex64::new(0.0, 0.0); k1.saturating_sub(k0)];
    if acc.is_empty() {
        return acc;
    }
    let mut sorted: Vec<(f64, f64, f64)> = bumps.to_vec();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1));
    let t = BumpTables::get();
    let mut sum = vec![Complex64::new(0.0, 0.0); acc.len()];
    for group in sorted.chunk_by(|a, b| a.1 == b.1) {
        let h = group[0].1;
        let kmax = (k1 - 1).min((OMEGA_MAX / h) as usize);
        if kmax < k0 {
            continue;
        }
        let len = kmax + 1 - k0;
        sum[..len].iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for &(c, _, m) in group {
            add_rotating_from(&mut sum[..len], c, k0, kmax, |_| m);
        }
        for (i, (a, s)) in acc.iter_mut().zip(&sum).take(len).enumerate() {
            *a += s * t.b0((k0 + i) as f64 * h);
        }
    }
    acc
}

/// Coefficients `σ̌_k = ∫ e^{ikθ} dσ(θ)`, `k = 0..=kmax`, or `None` for profiles without a
/// tabulated transform.
pub fn circle_coefficients(sigma: &CircleMeasure, kmax: usize) -> Option<Vec<Complex64>> {
    let mut acc = vec![Complex64::new(0.0, 0.0); kmax + 1];
    match sigma {
        CircleMeasure::Atomic { atoms } => {
            for a in atoms {
                add_rotating(&mut acc, a.angle, kmax, |_| a.weight);
            }
        }
        CircleMeasure::BumpDensity { bumps } => {
            if bumps.iter().any(|b| b.profile != Profile::Standard) {
                return None;
            }
            let spec: Vec<(f64, f64, f64)> = bumps
                .iter()
                .map(|b| (b.arc.center(), 0.5 * b.arc.length, b.mass))
                .collect();
            acc = bump_coefficients(&spec, 0, kmax + 1);
        }
        CircleMeasure::Restriction { arcs } => {
            let total: f64 = arcs.iter().map(|a| a.length).sum();
            for a in arcs {
                let half = 0.5 * a.length;
                add_rotating(&mut acc, a.start + half, kmax, |k| {
                    let x = k as f64 * half;
                    let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
                    a.length * sinc / total
                });
            }
        }
    }
    Some(acc)
}

/// `|σ̂|` at `P` equally spaced directions on the circle of radius `rho`, `P` a power of two
/// with `P ≥ 2(2K+1)` for the ring order `K`. Coefficients beyond `coeffs.len()` are
/// treated as zero.
pub fn ring_moduli(coeffs: &[Complex64], rho: f64, shift: f64) -> Vec<f64> {
    let k = ring_order(rho).min(coeffs.len() - 1);
    let j = bessel_j_all(TAU * rho, k);
    let p = (2 * (2 * k + 1)).next_power_of_two().max(64);
    let mut buf = vec![Complex64::new(0.0, 0.0); p];
    // (-i)^k
    let rot = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
    ];
    // a direction offset φ₀ = shift·2π/P multiplies the k-th term by e^{-ikφ₀}
    let phi0 = shift * TAU / p as f64;
    for kk in 0..=k {
        let base = rot[kk % 4] * j[kk];
        let tw = Complex64::from_polar(1.0, -(kk as f64) * phi0);
        buf[kk] += base * coeffs[kk] * tw;
        if kk > 0 {
            // σ̌_{-k} = conj(σ̌_k) and J_{-k} = (-1)^k J_k, so the -k term is (-i)^k J_k conj(σ̌_k)
            buf[p - kk] += base * coeffs[kk].conj() * tw.conj();
        }
    }
    FftPlanner::new().plan_fft_forward(p).process(&mut buf);
    buf.iter().map(|v| v.norm()).collect()
}

/// Largest `|σ̂|` over `n_radii` circles in `[r_lo, r_hi]`, all ring directions on each.
pub fn ring_sup(coeffs: &[Complex64], r_lo: f64, r_hi: f64, n_radii: usize, shift: f64) -> f64 {
    let n = n_radii.max(2);
    (0..n)
        .into_par_iter()
        .map(|i| {
            let t = if shift > 0.0 {
                (i as f64 + shift) / n as f64
            } else {
                i as f64 / (n - 1) as f64
            };
            let r = r_lo + (r_hi - r_lo) * t;
            ring_moduli(coeffs, r, shift).into_iter().fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}
