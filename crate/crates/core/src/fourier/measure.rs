use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use super::quad::{gl16, smooth_step, std_bump, BumpTables};
use super::ring::{circle_coefficients, ring_order, ring_sup};
use crate::angle::{normalize, CircleArc};
use crate::{Error, Result, Vec2};

/// Absolute tolerance of checked transform evaluations.
pub const FT_TOL: f64 = 1e-9;
/// Error budget below which a bump is evaluated by its second-order expansion.
const FAST_TOL: f64 = 1e-11;

/// Shape of a smooth bump on its arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `exp(-1/(1-t²))` stretched over the arc.
    Standard,
    /// Flat top with smooth ramps of the given angular width at both ends.
    Plateau { ramp: f64 },
}

/// Mass `mass` spread over `arc` with the given profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub arc: CircleArc,
    pub profile: Profile,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub angle: f64,
    pub weight: f64,
}

/// A probability measure on the circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CircleMeasure {
    Atomic { atoms: Vec<Atom> },
    BumpDensity { bumps: Vec<Bump> },
    /// Normalised arc length on a union of disjoint arcs.
    Restriction { arcs: Vec<CircleArc> },
}

impl CircleMeasure {
    pub fn atomic(atoms: &[(f64, f64)]) -> Result<Self> {
        let m = CircleMeasure::Atomic {
            atoms: atoms
                .iter()
                .map(|&(angle, weight)| Atom {
                    angle: normalize(angle),
                    weight,
                })
                .collect(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn uniform_arc(arc: CircleArc) -> Self {
        CircleMeasure::Restriction { arcs: vec![arc] }
    }

    pub fn bump(arc: CircleArc) -> Self {
        CircleMeasure::BumpDensity {
            bumps: vec![Bump {
                arc,
                profile: Profile::Standard,
                mass: 1.0,
            }],
        }
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            CircleMeasure::Atomic { atoms } => atoms.iter().map(|a| a.weight).sum(),
            CircleMeasure::BumpDensity { bumps } => bumps.iter().map(|b| b.mass).sum(),
            CircleMeasure::Restriction { arcs } => {
                if arcs.is_empty() {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: &str| Err(Error::InvalidArgument(s.to_string()));
        match self {
            CircleMeasure::Atomic { atoms } => {
                if atoms.is_empty() || atoms.iter().any(|a| !(a.weight >= 0.0)) {
                    return bad("atomic measure needs nonnegative weights");
                }
            }
            CircleMeasure::BumpDensity { bumps } => {
                if bumps.is_empty() || bumps.iter().any(|b| !(b.mass >= 0.0)) {
                    return bad("bump measure needs nonnegative masses");
                }
                for b in bumps {
                    if let Profile::Plateau { ramp } = b.profile {
                        if !(ramp > 0.0 && 2.0 * ramp <= b.arc.length) {
                            return bad("plateau ramps must fit inside the arc");
                        }
                    }
                }
            }
            CircleMeasure::Restriction { arcs } => {
                if arcs.is_empty() {
                    return bad("restriction needs at least one arc");
                }
                for i in 0..arcs.len() {
                    for j in i + 1..arcs.len() {
                        if !arcs[i].disjoint(&arcs[j]) {
                            return bad("restriction arcs must be disjoint");
                        }
                    }
                }
            }
        }
        if (self.total_mass() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "total mass {} is not 1",
                self.total_mass()
            )));
        }
        Ok(())
    }

    /// Directions `φ` of `ξ` along which `|σ̂|` tends to be largest: stationary-phase
    /// directions (support and antipodes) and, for atoms, the bisectors of atom pairs.
    pub fn hot_directions(&self) -> Vec<f64> {
        let mut v = Vec::new();
        let mut arc_dirs = |a: &CircleArc| {
            for f in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let t = a.start + f * a.length;
                v.push(normalize(t));
                v.push(normalize(t + PI));
            }
        };
        match self {
            CircleMeasure::Atomic { atoms } => {
                let k = atoms.len().min(64);
                for i in 0..k {
                    v.push(atoms[i].angle);
                    v.push(normalize(atoms[i].angle + PI));
                    for j in i + 1..k {
                        let m = 0.5 * (atoms[i].angle + atoms[j].angle);
                        v.push(normalize(m));
                        v.push(normalize(m + 0.5 * PI));
                        v.push(normalize(m + PI));
                        v.push(normalize(m + 1.5 * PI));
                    }
                }
            }
            CircleMeasure::BumpDensity { bumps } => {
                for b in bumps.iter().take(64) {
                    arc_dirs(&b.arc);
                }
            }
            CircleMeasure::Restriction { arcs } => {
                for a in arcs.iter().take(64) {
                    arc_dirs(a);
                }
            }
        }
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// `σ̂(ξ) = ∫ exp(-2πi ξ·u(θ)) dσ(θ)` with `u(θ) = (cos θ, sin θ)`, to absolute
    /// tolerance [`FT_TOL`] confirmed by refinement.
    pub fn ft(&self, xi: &Vec2) -> Result<Complex64> {
        let (rho, phi) = polar(xi);
        let v = match self {
            CircleMeasure::Atomic { atoms } => atomic_ft(atoms, rho, phi),
            CircleMeasure::BumpDensity { bumps } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for b in bumps {
                    acc += bump_ft_checked(b, rho, phi, FT_TOL * b.mass.max(1e-300))?;
                }
                acc
            }
            CircleMeasure::Restriction { arcs } => {
                let total: f64 = arcs.iter().map(|a| a.length).sum();
                let mut acc = Complex64::new(0.0, 0.0);
                for a in arcs {
                    acc += checked(|p| panels_ft(a, rho, phi, p, |_| 1.0 / total), initial_panels(a.length, rho, None), FT_TOL)?;
                }
                acc
            }
        };
        debug_assert!(v.norm() <= 1.0 + 1e-7, "|σ̂| = {} exceeds 1", v.norm());
        Ok(v)
    }

    /// Same transform with a-priori quadrature sizes, no refinement check.
    pub fn ft_fast(&self, xi: &Vec2) -> Complex64 {
        let (rho, phi) = polar(xi);
        match self {
            CircleMeasure::Atomic { atoms } => atomic_ft(atoms, rho, phi),
            CircleMeasure::BumpDensity { bumps } => bumps.iter().map(|b| bump_ft(b, rho, phi)).sum(),
            CircleMeasure::Restriction { arcs } => {
                let total: f64 = arcs.iter().map(|a| a.length).sum();
                arcs.iter()
                    .map(|a| panels_ft(a, rho, phi, 2 * initial_panels(a.length, rho, None), |_| 1.0 / total))
                    .sum()
            }
        }
    }
}

#[inline]
fn polar(xi: &Vec2) -> (f64, f64) {
    (xi.norm(), xi.y.atan2(xi.x))
}

#[inline]
fn cis(x: f64) -> Complex64 {
    let (s, c) = x.sin_cos();
    Complex64::new(c, s)
}

fn atomic_ft(atoms: &[Atom], rho: f64, phi: f64) -> Complex64 {
    atoms
        .iter()
        .map(|a| cis(-TAU * rho * (a.angle - phi).cos()) * a.weight)
        .sum()
}

fn initial_panels(len: f64, rho: f64, ramp: Option<f64>) -> usize {
    let osc = (len * (rho + 1.0)).ceil() as usize;
    let feat = ramp.map_or(0, |r| (4.0 * len / r).ceil() as usize);
    osc.max(feat).max(1)
}

/// `∫_arc w(θ) exp(-2πiρ cos(θ-φ)) dθ` on `panels` equal Gauss–Legendre panels.
fn panels_ft<F: Fn(f64) -> f64>(arc: &CircleArc, rho: f64, phi: f64, panels: usize, w: F) -> Complex64 {
    let (x, wt) = gl16();
    let h = arc.length / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = arc.start + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(wt) {
            let th = mid + 0.5 * h * xi;
            acc += cis(-TAU * rho * (th - phi).cos()) * (wi * 0.5 * h * w(th));
        }
    }
    acc
}

fn checked<F: Fn(usize) -> Complex64>(f: F, p0: usize, tol: f64) -> Result<Complex64> {
    let mut p = p0;
    let mut prev = f(p);
    loop {
        let next = f(2 * p);
        let diff = (next - prev).norm();
        if diff <= tol {
            return Ok(next);
        }
        p *= 2;
        if p > 1 << 22 {
            return Err(Error::Quadrature { achieved: diff });
        }
        prev = next;
    }
}

/// Trapezoid rule for a standard bump; since the bump vanishes to all orders at the ends,
/// the error is the bump transform at the first alias frequency `πM - ω`, negligible once
/// `M ≥ 2ρh + 160`.
fn std_bump_trapezoid(b: &Bump, rho: f64, phi: f64, m: usize) -> Complex64 {
    let h = 0.5 * b.arc.length;
    let alpha = b.arc.start + h - phi;
    let dt = 2.0 / m as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 1..m {
        let t = -1.0 + k as f64 * dt;
        acc += cis(-TAU * rho * (alpha + h * t).cos()) * std_bump(t);
    }
    acc * (dt * b.mass)
}

fn trapezoid_nodes(rho: f64, h: f64) -> usize {
    (2.0 * rho * h + 160.0).ceil() as usize
}

/// Second-order expansion of the phase around the bump center:
/// `cos(α + ht) ≈ cos α - ht sin α - (ht)²/2 cos α`, leaving `B0(ω) + iκB2(ω)` with
/// `ω = 2πρh sin α`, `κ = πρh² cos α`. Returns `None` when the neglected terms
/// (`κ²/2` and the cubic phase `πρh³/3`) could exceed the budget.
#[inline]
pub(crate) fn std_bump_taylor(center: f64, h: f64, mass: f64, rho: f64, phi: f64) -> Option<Complex64> {
    let kappa_max = PI * rho * h * h;
    if 0.5 * kappa_max * kappa_max + kappa_max * h / 3.0 > FAST_TOL {
        return None;
    }
    let alpha = center - phi;
    let (sa, ca) = alpha.sin_cos();
    let t = BumpTables::get();
    let omega = TAU * rho * h * sa;
    let kappa = kappa_max * ca;
    let inner = Complex64::new(t.b0(omega), kappa * t.b2(omega));
    Some(cis(-TAU * rho * ca) * inner * mass)
}

fn plateau_density(b: &Bump, ramp: f64) -> impl Fn(f64) -> f64 {
    let start = b.arc.start;
    let len = b.arc.length;
    // ramps are mirror images, so the mass is len - ramp
    let norm = b.mass / (len - ramp);
    move |th: f64| {
        let x = normalize(th - start);
        smooth_step(x / ramp) * smooth_step((len - x) / ramp) * norm
    }
}

/// Transform of one bump with a-priori sizing.
pub(crate) fn bump_ft(b: &Bump, rho: f64, phi: f64) -> Complex64 {
    match b.profile {
        Profile::Standard => {
            let h = 0.5 * b.arc.length;
            std_bump_taylor(b.arc.start + h, h, b.mass, rho, phi)
                .unwrap_or_else(|| std_bump_trapezoid(b, rho, phi, trapezoid_nodes(rho, h)))
        }
        Profile::Plateau { ramp } => {
            let p = 2 * initial_panels(b.arc.length, rho, Some(ramp));
            panels_ft(&b.arc, rho, phi, p, plateau_density(b, ramp))
        }
    }
}

fn bump_ft_checked(b: &Bump, rho: f64, phi: f64, tol: f64) -> Result<Complex64> {
    match b.profile {
        Profile::Standard => {
            let h = 0.5 * b.arc.length;
            if let Some(v) = std_bump_taylor(b.arc.start + h, h, b.mass, rho, phi) {
                return Ok(v);
            }
            checked(|m| std_bump_trapezoid(b, rho, phi, m), trapezoid_nodes(rho, h), tol)
        }
        Profile::Plateau { ramp } => checked(
            |p| panels_ft(&b.arc, rho, phi, p, plateau_density(b, ramp)),
            initial_panels(b.arc.length, rho, Some(ramp)),
            tol,
        ),
    }
}

/// `σ̂(ξ)` to tolerance [`FT_TOL`].
pub fn measure_ft(sigma: &CircleMeasure, xi: &Vec2) -> Result<Complex64> {
    sigma.ft(xi)
}

/// Largest `|σ̂|` over `grid` radii in `[r_lo, r_hi]`. On each circle every direction of
/// the Jacobi–Anger ring is sampled (plus the pair bisectors for atomic measures); plateau
/// profiles fall back to `grid` uniform directions plus the hot ones. A sampled value: it
/// can only under-estimate the supremum.
pub fn ft_sup_on_annulus(sigma: &CircleMeasure, r_lo: f64, r_hi: f64, grid: usize) -> Result<f64> {
    if !(r_lo > 0.0 && r_lo < r_hi) {
        return Err(Error::InvalidArgument("need 0 < r_lo < r_hi".into()));
    }
    let hot = sigma.hot_directions();
    match circle_coefficients(sigma, ring_order(r_hi)) {
        Some(c) => {
            let ring = ring_sup(&c, r_lo, r_hi, grid, 0.0);
            let extra = match sigma {
                CircleMeasure::Atomic { .. } => sample_sup(r_lo, r_hi, grid, &hot, 0.0, |xi| sigma.ft_fast(xi).norm()),
                _ => 0.0,
            };
            Ok(ring.max(extra))
        }
        None => Ok(sample_sup(r_lo, r_hi, grid, &hot, 0.0, |xi| sigma.ft_fast(xi).norm())),
    }
}

/// Largest `f` over `grid` radii in `[r_lo, r_hi]` times `grid` uniform directions plus
/// `hot`. `shift ∈ [0, 1)` offsets the uniform directions by a fraction of their spacing
/// (and the radii likewise, when positive) to obtain a grid disjoint from the default.
pub(crate) fn sample_sup<F: Fn(&Vec2) -> f64 + Sync>(
    r_lo: f64,
    r_hi: f64,
    grid: usize,
    hot: &[f64],
    shift: f64,
    f: F,
) -> f64 {
    let grid = grid.max(2);
    let mut dirs: Vec<f64> = (0..grid).map(|k| (k as f64 + shift) * TAU / grid as f64).collect();
    dirs.extend_from_slice(hot);
    (0..grid)
        .into_par_iter()
        .map(|i| {
            let t = if shift > 0.0 {
                (i as f64 + shift) / grid as f64
            } else {
                i as f64 / (grid - 1) as f64
            };
            let r = r_lo + (r_hi - r_lo) * t;
            dirs.iter()
                .map(|&p| f(&(crate::angle::unit(p) * r)))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}
