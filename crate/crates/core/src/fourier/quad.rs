//! Quadrature rules and tabulated transforms of the standard bump.

use rayon::prelude::*;
use std::sync::OnceLock;

/// `∫_{-1}^{1} exp(-1/(1-t²)) dt`.
pub fn bump_mass() -> f64 {
    static Z: OnceLock<f64> = OnceLock::new();
    *Z.get_or_init(|| {
        let m = 1 << 14;
        (1..m).map(|k| raw_bump(-1.0 + 2.0 * k as f64 / m as f64)).sum::<f64>() * 2.0 / m as f64
    })
}

#[inline]
pub fn raw_bump(t: f64) -> f64 {
    let s = 1.0 - t * t;
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// The standard bump normalised to a probability density on `(-1, 1)`.
#[inline]
pub fn std_bump(t: f64) -> f64 {
    raw_bump(t) / bump_mass()
}

/// Smooth step: 0 for `x ≤ 0`, 1 for `x ≥ 1`.
pub fn smooth_step(x: f64) -> f64 {
    let e = |y: f64| if y <= 0.0 { 0.0 } else { (-1.0 / y).exp() };
    let (a, b) = (e(x), e(1.0 - x));
    if a + b == 0.0 {
        if x >= 1.0 {
            1.0
        } else {
            0.0
        }
    } else {
        a / (a + b)
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

pub(crate) fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static T: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    T.get_or_init(|| gauss_legendre(16))
}

/// Frequency beyond which the bump transforms are below 1e-15.
pub const OMEGA_MAX: f64 = 600.0;
const D_OMEGA: f64 = 0.05;

/// Quintic Hermite interpolation on `[0, 1]` from values, first and second derivatives
/// (already scaled by the step `h` and `h²`).
#[inline]
pub(crate) fn hermite5(p0: f64, m0: f64, s0: f64, p1: f64, m1: f64, s1: f64, u: f64) -> f64 {
    let u2 = u * u;
    let u3 = u2 * u;
    let u4 = u3 * u;
    let u5 = u4 * u;
    (1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5) * p0
        + (u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5) * m0
        + 0.5 * (u2 - 3.0 * u3 + 3.0 * u4 - u5) * s0
        + 0.5 * (u3 - 2.0 * u4 + u5) * s1
        + (-4.0 * u3 + 7.0 * u4 - 3.0 * u5) * m1
        + (10.0 * u3 - 15.0 * u4 + 6.0 * u5) * p1
}

/// `B0(ω) = ∫β(t)cos(ωt)dt` and `B2(ω) = ∫β(t)t²cos(ωt)dt` for the normalised bump `β`,
/// with two derivatives each (`B0'' = -B2`), for quintic Hermite interpolation.
pub struct BumpTables {
    b0: Vec<[f64; 3]>,
    b2: Vec<[f64; 3]>,
}

impl BumpTables {
    pub fn get() -> &'static BumpTables {
        static T: OnceLock<BumpTables> = OnceLock::new();
        T.get_or_init(BumpTables::build)
    }

    fn build() -> Self {
        let n = (OMEGA_MAX / D_OMEGA).round() as usize + 1;
        let m = 2048;
        let dt = 2.0 / m as f64;
        let nodes: Vec<(f64, f64)> = (1..m)
            .map(|k| {
                let t = -1.0 + k as f64 * dt;
                (t, std_bump(t) * dt)
            })
            .collect();
        let rows: Vec<([f64; 3], [f64; 3])> = (0..n)
            .into_par_iter()
            .map(|i| {
                let om = i as f64 * D_OMEGA;
                // rotate e^{iωt} along the uniform nodes
                let (mut s, mut c) = (om * nodes[0].0).sin_cos();
                let (sd, cd) = (om * dt).sin_cos();
                let mut a = [0.0; 5];
                for &(tk, wk) in &nodes {
                    let t2 = tk * tk;
                    a[0] += wk * c;
                    a[1] -= wk * tk * s;
                    a[2] += wk * t2 * c;
                    a[3] -= wk * t2 * tk * s;
                    a[4] -= wk * t2 * t2 * c;
                    let nc = c * cd - s * sd;
                    s = s * cd + c * sd;
                    c = nc;
                }
                ([a[0], a[1], -a[2]], [a[2], a[3], a[4]])
            })
            .collect();
        let (b0, b2) = rows.into_iter().unzip();
        BumpTables { b0, b2 }
    }

    #[inline]
    fn interp(v: &[[f64; 3]], omega: f64) -> f64 {
        let w = omega.abs();
        if w >= OMEGA_MAX {
            return 0.0;
        }
        let x = w / D_OMEGA;
        let i = x as usize;
        let (a, b) = (v[i], v[i + 1]);
        let h = D_OMEGA;
        hermite5(a[0], a[1] * h, a[2] * h * h, b[0], b[1] * h, b[2] * h * h, x - i as f64)
    }

    #[inline]
    pub fn b0(&self, omega: f64) -> f64 {
        Self::interp(&self.b0, omega)
    }

    #[inline]
    pub fn b2(&self, omega: f64) -> f64 {
        Self::interp(&self.b2, omega)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_normalisation() {
        assert!((bump_mass() - 0.443_993_816_168).abs() < 1e-9);
    }

    #[test]
    fn gl_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((i - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn tables_match_direct_quadrature() {
        let t = BumpTables::get();
        for &om in &[0.0, 0.37, 5.123, 40.01, 133.7] {
            let m = 20000;
            let (mut b0, mut b2) = (0.0, 0.0);
            for k in 1..m {
                let x = -1.0 + 2.0 * k as f64 / m as f64;
                let w = std_bump(x) * 2.0 / m as f64;
                b0 += w * (om * x).cos();
                b2 += w * x * x * (om * x).cos();
            }
            assert!((t.b0(om) - b0).abs() < 1e-12, "{om}");
            assert!((t.b2(om) - b2).abs() < 1e-12, "{om}");
        }
    }
}
