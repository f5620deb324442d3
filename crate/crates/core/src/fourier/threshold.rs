use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use super::measure::{ft_sup_on_annulus, CircleMeasure};
use super::quad::hermite5;
use crate::{Error, Lattice, Result, Vec2};

/// Support radius of `ψ`.
pub const PSI_RADIUS: f64 = 5.0;
/// Relative size below which `φ̂` is treated as zero.
pub const TAIL_REL: f64 = 1e-12;

const RHO_STEP: f64 = 0.004;
const RHO_MAX: f64 = 8.0;
const PHI_NODES: usize = 200;

/// Radial profile `ψ(r) = exp(-1/(1-(r/5)²))`.
pub fn psi(r: f64) -> f64 {
    let s = 1.0 - (r / PSI_RADIUS).powi(2);
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

#[derive(Debug)]
struct Tables {
    /// `ψ̂` with two derivatives on the grid `k·RHO_STEP`.
    psi_hat: Vec<[f64; 3]>,
    /// `φ(k·h)` for `h = PSI_RADIUS / PHI_NODES`, `k = 0..=2·PHI_NODES`.
    phi: Vec<f64>,
}

impl Tables {
    fn build() -> Self {
        // Fourier slice: ψ̂(ρ) is the cosine transform of the projection P(x) = ∫ψ(x, y) dy.
        // Both integrands are smooth with compact support, so trapezoid sums converge
        // faster than any power of the step.
        let nx = 1000;
        let hx = PSI_RADIUS / nx as f64;
        let proj: Vec<f64> = (0..=nx)
            .map(|i| {
                let x = i as f64 * hx;
                let ymax = (PSI_RADIUS * PSI_RADIUS - x * x).max(0.0).sqrt();
                if ymax == 0.0 {
                    return 0.0;
                }
                let ny = 1000;
                let hy = ymax / ny as f64;
                let s: f64 = (1..ny).map(|j| psi((x * x + (j as f64 * hy).powi(2)).sqrt())).sum();
                2.0 * hy * (s + 0.5 * psi(x))
            })
            .collect();
        let n_rho = (RHO_MAX / RHO_STEP).round() as usize + 1;
        let psi_hat = (0..n_rho)
            .into_par_iter()
            .map(|k| {
                let rho = k as f64 * RHO_STEP;
                let (mut v, mut d, mut d2) = (0.5 * proj[0], 0.0, 0.0);
                for (i, p) in proj.iter().enumerate().skip(1) {
                    let x = i as f64 * hx;
                    let (s, c) = (TAU * rho * x).sin_cos();
                    let w = TAU * x;
                    v += p * c;
                    d -= p * w * s;
                    d2 -= p * w * w * c;
                }
                [2.0 * hx * v, 2.0 * hx * d, 2.0 * hx * d2]
            })
            .collect();

        // φ(kh) = h² Σ Ψ[i][j] Ψ[i+k][j]: the grid autocorrelation is the trapezoid rule
        // for ψ ⋆ ψ(-·) at shifts that are multiples of the grid step.
        let n = PHI_NODES;
        let h = PSI_RADIUS / n as f64;
        let m = 2 * n + 1;
        let grid: Vec<f64> = (0..m * m)
            .map(|idx| {
                let (i, j) = (idx / m, idx % m);
                let x = (i as f64 - n as f64) * h;
                let y = (j as f64 - n as f64) * h;
                psi((x * x + y * y).sqrt())
            })
            .collect();
        let phi = (0..=2 * n)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..m - k.min(m) {
                    let a = &grid[i * m..(i + 1) * m];
                    let b = &grid[(i + k) * m..(i + k + 1) * m];
                    s += a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
                }
                s * h * h
            })
            .collect();
        Tables { psi_hat, phi }
    }
}

fn tables() -> Arc<Tables> {
    static T: OnceLock<Arc<Tables>> = OnceLock::new();
    T.get_or_init(|| Arc::new(Tables::build())).clone()
}

/// `ψ` (times an optional amplitude), its autocorrelation `φ = ψ ⋆ ψ(-·)` supported in
/// `B₁₀`, and `φ̂ = |ψ̂|² ≥ 0`, all radial and tabulated once.
///
/// The threshold uses the rescaled pair `φ_a(x) = φ(x/a)/φ(0)` with `a² = φ(0)/φ̂(0)`,
/// which satisfies `φ_a(0) = φ̂_a(0) = 1`.
#[derive(Debug, Clone)]
pub struct MollifierPair {
    amplitude: f64,
    tables: Arc<Tables>,
    phi0: f64,
    phi_hat0: f64,
    cutoff: f64,
}

impl MollifierPair {
    pub fn standard() -> Self {
        Self::with_amplitude(1.0)
    }

    /// The pair built from `c·ψ`.
    pub fn with_amplitude(c: f64) -> Self {
        let tables = tables();
        let a2 = c * c;
        let phi0 = a2 * tables.phi[0];
        let phi_hat0 = a2 * tables.psi_hat[0][0].powi(2);
        let floor = TAIL_REL * phi_hat0;
        let last = tables
            .psi_hat
            .iter()
            .rposition(|v| a2 * v[0] * v[0] >= floor)
            .unwrap_or(0);
        MollifierPair {
            amplitude: c,
            phi0,
            phi_hat0,
            cutoff: (last + 1) as f64 * RHO_STEP,
            tables,
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// `φ(0) = ∫ψ²`.
    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    /// `φ̂(0) = (∫ψ)²`.
    pub fn phi_hat0(&self) -> f64 {
        self.phi_hat0
    }

    /// Radius beyond which `φ̂ < TAIL_REL · φ̂(0)` on the whole table.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn table_limit(&self) -> f64 {
        RHO_MAX
    }

    pub fn dilation(&self) -> f64 {
        (self.phi0 / self.phi_hat0).sqrt()
    }

    pub fn support_radius(&self) -> f64 {
        2.0 * PSI_RADIUS
    }

    /// `ψ̂(ρ)` at `|ξ| = ρ`, quintic Hermite from the table, zero beyond it.
    pub fn psi_hat(&self, rho: f64) -> f64 {
        let x = rho.abs() / RHO_STEP;
        let i = x as usize;
        let t = &self.tables;
        if i + 1 >= t.psi_hat.len() {
            return 0.0;
        }
        let (a, b) = (t.psi_hat[i], t.psi_hat[i + 1]);
        let h = RHO_STEP;
        self.amplitude * hermite5(a[0], a[1] * h, a[2] * h * h, b[0], b[1] * h, b[2] * h * h, x - i as f64)
    }

    pub fn phi_hat(&self, rho: f64) -> f64 {
        self.psi_hat(rho).powi(2)
    }

    /// `φ(r)`, four-point Lagrange interpolation on the autocorrelation table.
    pub fn phi(&self, r: f64) -> f64 {
        let h = PSI_RADIUS / PHI_NODES as f64;
        let t = &self.tables.phi;
        let x = r.abs() / h;
        let i = x as usize;
        if i >= t.len() - 1 {
            return 0.0;
        }
        let at = |k: isize| -> f64 {
            // φ is even, and zero past the table
            let k = k.unsigned_abs();
            t.get(k).copied().unwrap_or(0.0)
        };
        let u = x - i as f64;
        let i = i as isize;
        let (f0, f1, f2, f3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        let v = -u * (u - 1.0) * (u - 2.0) / 6.0 * f0 + (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0 * f1
            - (u + 1.0) * u * (u - 2.0) / 2.0 * f2
            + (u + 1.0) * u * (u - 1.0) / 6.0 * f3;
        self.amplitude * self.amplitude * v
    }

    /// `φ̂_a(ρ)`, normalised so that its value at 0 is 1.
    pub fn normalized_phi_hat(&self, rho: f64) -> f64 {
        let a = self.dilation();
        a * a * self.phi_hat(a * rho) / self.phi0
    }

    /// `φ_a(r)`, normalised so that its value at 0 is 1; supported in `B_{10a}`.
    pub fn normalized_phi(&self, r: f64) -> f64 {
        self.phi(r / self.dilation()) / self.phi0
    }
}

/// Which side of the Poisson identity the sum was evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumSide {
    /// `Σ_{λ*∈Λ*} φ̂_a(ελ*)` truncated at the tabulation cutoff.
    Dual,
    /// `(vol Λ / ε²) Σ_{λ∈Λ} φ_a(λ/ε)`, a finite sum since `φ_a` has compact support.
    Primal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaThreshold {
    pub epsilon: f64,
    pub c_eps: f64,
    pub delta: f64,
    pub side: SumSide,
    pub terms: usize,
}

/// `C(ε) = Σ_{λ*∈Λ*} φ̂_a(ελ*)` evaluated directly on the dual lattice.
pub fn dual_sum(lattice: &Lattice, eps: f64, m: &MollifierPair) -> Result<(f64, usize)> {
    let r = m.cutoff() / (m.dilation() * eps);
    let pts = lattice.dual().points_in_disk(&Vec2::zeros(), r)?;
    let mut norms: Vec<f64> = pts.iter().map(|p| p.norm()).collect();
    // small terms first
    norms.sort_by(|a, b| b.total_cmp(a));
    let s = norms.iter().map(|&n| m.normalized_phi_hat(eps * n)).sum();
    Ok((s, norms.len()))
}

/// The same `C(ε)` through Poisson summation on the primal side.
pub fn primal_sum(lattice: &Lattice, eps: f64, m: &MollifierPair) -> Result<(f64, usize)> {
    let r = m.support_radius() * m.dilation() * eps;
    let pts = lattice.points_in_disk(&Vec2::zeros(), r)?;
    let mut norms: Vec<f64> = pts.iter().map(|p| p.norm()).collect();
    norms.sort_by(|a, b| b.total_cmp(a));
    let s: f64 = norms.iter().map(|&n| m.normalized_phi(n / eps)).sum();
    Ok((s * lattice.det_abs() / (eps * eps), norms.len()))
}

/// `δ(ε) = 1 / C(ε)`, summing on whichever side of the Poisson identity has fewer terms.
pub fn delta_report(lattice: &Lattice, eps: f64, m: &MollifierPair) -> Result<DeltaThreshold> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {eps}")));
    }
    if m.cutoff() >= 0.9 * m.table_limit() {
        return Err(Error::Truncation);
    }
    let a = m.dilation();
    let vol = lattice.det_abs();
    let primal_terms = PI * (m.support_radius() * a * eps).powi(2) / vol;
    let dual_terms = PI * (m.cutoff() / (a * eps)).powi(2) * vol;
    let (side, (c_eps, terms)) = if primal_terms <= dual_terms {
        (SumSide::Primal, primal_sum(lattice, eps, m)?)
    } else {
        (SumSide::Dual, dual_sum(lattice, eps, m)?)
    };
    Ok(DeltaThreshold {
        epsilon: eps,
        c_eps,
        delta: 1.0 / c_eps,
        side,
        terms,
    })
}

pub fn delta_threshold(lattice: &Lattice, eps: f64, m: &MollifierPair) -> Result<f64> {
    delta_report(lattice, eps, m).map(|d| d.delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoodnessVerdict {
    Passes,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodnessOpts {
    /// Radii and uniform directions sampled per annulus.
    pub grid: usize,
    /// Evaluate δ at ε/10 to account for the support radius of the mollifier.
    pub strict_epsilon: bool,
    /// A sequence of sups "shows no decay" if the last is within this of the first.
    pub decay_tolerance: f64,
}

impl Default for GoodnessOpts {
    fn default() -> Self {
        GoodnessOpts {
            grid: 64,
            strict_epsilon: false,
            decay_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusProbe {
    pub r_lo: f64,
    pub r_hi: f64,
    pub sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodnessReport {
    pub verdict: GoodnessVerdict,
    pub delta: DeltaThreshold,
    pub probes: Vec<AnnulusProbe>,
    pub note: String,
}

impl GoodnessReport {
    /// CSV rows `r_lo,r_hi,sup,delta`.
    pub fn profile_csv(&self) -> String {
        let mut s = String::from("r_lo,r_hi,sup,delta\n");
        for p in &self.probes {
            s.push_str(&format!("{},{},{:.12e},{:.12e}\n", p.r_lo, p.r_hi, p.sup, self.delta.delta));
        }
        s
    }
}

/// Annuli `[2^k, 2^{k+1}]` for `k = 0..10`.
pub fn default_probe_annuli() -> Vec<(f64, f64)> {
    (0..10).map(|k| (2f64.powi(k), 2f64.powi(k + 1))).collect()
}

/// Compare sampled annulus sups of `σ̂` with `δ(ε)`. The limsup in the criterion is not
/// finitely computable, so the verdict is numerical evidence only.
pub fn check_goodness_criterion(
    sigma: &CircleMeasure,
    lattice: &Lattice,
    eps: f64,
    annuli: &[(f64, f64)],
    opts: &GoodnessOpts,
) -> Result<GoodnessReport> {
    sigma.validate()?;
    if annuli.is_empty() {
        return Err(Error::InvalidArgument("no probe annuli".into()));
    }
    let eps_used = if opts.strict_epsilon { eps / 10.0 } else { eps };
    let delta = delta_report(lattice, eps_used, &MollifierPair::standard())?;
    let probes = annuli
        .iter()
        .map(|&(lo, hi)| {
            ft_sup_on_annulus(sigma, lo, hi, opts.grid).map(|sup| AnnulusProbe { r_lo: lo, r_hi: hi, sup })
        })
        .collect::<Result<Vec<_>>>()?;
    let sups: Vec<f64> = probes.iter().map(|p| p.sup).collect();
    let d = delta.delta;
    let decreasing = sups.windows(2).all(|w| w[1] < w[0]);
    let last = *sups.last().unwrap();
    let verdict = if last < d && decreasing {
        GoodnessVerdict::Passes
    } else if sups.iter().all(|&s| s >= d) && last >= sups[0] - opts.decay_tolerance {
        GoodnessVerdict::Fails
    } else {
        GoodnessVerdict::Inconclusive
    };
    Ok(GoodnessReport {
        verdict,
        delta,
        probes,
        note: "numerical evidence on sampled annuli, not a proof".into(),
    })
}
