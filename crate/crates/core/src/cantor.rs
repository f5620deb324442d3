//! Staged construction of a probability measure on a null set whose transform decays.
//!
//! Stage `n` is a finite sum of standard bumps on disjoint arcs `I₁ ≥ I₂ ≥ …` (by length).
//! A step subdivides the longest arc `I₁` into `N` equal cells `[a, b]` and moves the mass of
//! each cell into a bump on `[a, c]` with `c - a = min((b-a)/2, |I_last|/2)`. The new arcs are
//! shorter than every old one, so they go to the end of the list, and after every arc of a
//! stage has been processed the support has at least halved.
//!
//! `R_n` and the bound on `|μ̂_{n+1} - μ̂_n|` are checked on finite grids. The weak limit is
//! never formed; the stages and their sampled envelopes are the output.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::angle::CircleArc;
use crate::fourier::{
    bump_coefficients, bump_ft, bump_mass, gauss_legendre, raw_bump, ring_order, ring_sup, Bump, CircleMeasure, Profile,
};
use crate::{Error, Result, Vec2};

/// Largest subdivision count tried by [`refine_step`].
pub const N_CAP: usize = 1 << 16;
/// Largest frequency radius [`choose_rn`] will probe.
pub const FREQUENCY_LIMIT: f64 = 1e6;
/// Sampling slack allowed by [`envelope_check`].
pub const GRID_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageArc {
    pub arc: CircleArc,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub n: usize,
    pub support_length: f64,
    pub mass_i1: f64,
    /// Subdivision count used to leave this stage.
    pub n_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageMeasure {
    pub original: CircleArc,
    pub n: usize,
    /// Sorted by nonincreasing length; ties by nonincreasing mass.
    pub arcs: Vec<StageArc>,
    /// `R_n`, once chosen.
    pub r_n: Option<f64>,
    /// `R_{n-1}` (0 at the first stage).
    pub r_prev: f64,
    pub history: Vec<HistoryEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CantorOpts {
    /// Radii sampled per annulus or disk; every ring direction is sampled on each.
    pub grid: usize,
}

impl Default for CantorOpts {
    fn default() -> Self {
        CantorOpts { grid: 48 }
    }
}

/// A single standard bump of mass 1 on `arc`.
pub fn init_measure(arc: CircleArc) -> Result<StageMeasure> {
    if arc.is_full() {
        return Err(Error::InvalidArgument("the initial arc must be a proper arc".into()));
    }
    Ok(StageMeasure {
        original: arc,
        n: 1,
        arcs: vec![StageArc { arc, mass: 1.0 }],
        r_n: None,
        r_prev: 0.0,
        history: Vec::new(),
    })
}

impl StageMeasure {
    pub fn support_length(&self) -> f64 {
        self.arcs.iter().map(|a| a.arc.length).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.arcs.iter().map(|a| a.mass).sum()
    }

    /// `μ_n(I₁)`.
    pub fn mass_i1(&self) -> f64 {
        self.arcs[0].mass
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidArgument(s));
        if (self.total_mass() - 1.0).abs() > 1e-12 {
            return bad(format!("stage mass {} is not 1", self.total_mass()));
        }
        if self.arcs.windows(2).any(|w| w[1].arc.length > w[0].arc.length) {
            return bad("arcs are not sorted by length".into());
        }
        if self.arcs.iter().any(|a| !(a.mass >= 0.0) || !self.original.contains_arc(&a.arc)) {
            return bad("arc outside the original arc or with negative mass".into());
        }
        let mut offs: Vec<(f64, f64)> = self
            .arcs
            .iter()
            .map(|a| {
                let o = self.original.offset(a.arc.start);
                (o, o + a.arc.length)
            })
            .collect();
        offs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if offs.windows(2).any(|w| w[1].0 < w[0].1) {
            return bad("arcs overlap".into());
        }
        Ok(())
    }

    pub fn to_measure(&self) -> CircleMeasure {
        CircleMeasure::BumpDensity {
            bumps: self.arcs.iter().map(|a| bump_of(a)).collect(),
        }
    }

    /// `μ̂_n(ξ)` with a-priori quadrature sizes.
    pub fn ft(&self, xi: &Vec2) -> Complex64 {
        let (rho, phi) = (xi.norm(), xi.y.atan2(xi.x));
        self.arcs.iter().map(|a| bump_ft(&bump_of(a), rho, phi)).sum()
    }

    /// Circle coefficients `μ̌_k`, `k = 0..=kmax`.
    pub fn coefficients(&self, kmax: usize) -> Vec<Complex64> {
        let mut c = Vec::new();
        self.extend_coefficients(&mut c, kmax);
        c
    }

    /// Extend `μ̌_k` already known for `k < c.len()` up to `kmax`.
    pub fn extend_coefficients(&self, c: &mut Vec<Complex64>, kmax: usize) {
        if kmax + 1 > c.len() {
            let more = bump_coefficients(&self.bump_spec(), c.len(), kmax + 1);
            c.extend(more);
        }
    }

    fn bump_spec(&self) -> Vec<(f64, f64, f64)> {
        self.arcs
            .iter()
            .map(|a| (a.arc.center(), 0.5 * a.arc.length, a.mass))
            .collect()
    }

    /// Frequency beyond which a van der Corput estimate proves `|μ̂_n| ≤ 1/n`.
    ///
    /// On each arc the phase `g(θ) = -2πρ cos(θ - φ)` has `|g'|` or `|g''|` at least
    /// `√2πρ`, and `g'` changes monotonicity only where `cos(θ - φ)` vanishes, so an arc of
    /// length `L` splits into at most `⌈2L/π⌉ + 1` pieces with a second-derivative bound
    /// (constant 8) or a monotone first-derivative bound (constant 3, smaller here). On each
    /// piece the bump contributes at most `8 (√2πρ)^{-1/2} · 3 f_max`.
    pub fn rigorous_tail_radius(&self) -> f64 {
        let beta0 = (-1.0f64).exp() / bump_mass();
        let k: f64 = self
            .arcs
            .iter()
            .map(|a| {
                let pieces = (2.0 * a.arc.length / PI).ceil() + 1.0;
                let fmax = a.mass * beta0 / (0.5 * a.arc.length);
                pieces * 24.0 * fmax
            })
            .sum();
        // k (√2πρ)^{-1/2} ≤ 1/n
        let n = self.n as f64;
        (n * k).powi(2) / (2f64.sqrt() * PI)
    }
}

fn bump_of(a: &StageArc) -> Bump {
    Bump {
        arc: a.arc,
        profile: Profile::Standard,
        mass: a.mass,
    }
}

/// Evidence behind a chosen `R_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RnEvidence {
    pub r_n: f64,
    /// Sampled sups of `|μ̂_n|` on `[R, 2R]`, `[2R, 4R]`, `[4R, 8R]`.
    pub sampled: [f64; 3],
    /// Least-squares slope of `log sup` against `log r` over the three sub-annuli.
    pub fit_exponent: f64,
    /// The fitted power law evaluated at `64R`.
    pub fit_at_64r: f64,
    /// Radius past which a van der Corput estimate proves the bound; usually far larger.
    pub rigorous_tail_radius: f64,
}

/// Smallest `R = max(n, R_{n-1})·2^k` such that sampled `|μ̂_n| ≤ 1/n` on `[R, 8R]` and a
/// power-law fit through the three dyadic sub-annuli stays below `1/n` out to `64R`.
/// The sampled sup is an under-estimate and the fit is not a proof; both are recorded.
pub fn choose_rn(mu: &mut StageMeasure, opts: &CantorOpts) -> Result<RnEvidence> {
    let target = 1.0 / mu.n as f64;
    let mut r = (mu.n as f64).max(mu.r_prev);
    let mut coeffs = Vec::new();
    while r <= FREQUENCY_LIMIT {
        mu.extend_coefficients(&mut coeffs, ring_order(8.0 * r));
        let sampled = [0, 1, 2].map(|k| {
            let lo = r * 2f64.powi(k);
            ring_sup(&coeffs, lo, 2.0 * lo, opts.grid, 0.0)
        });
        let xs = [1.5f64, 3.0, 6.0].map(|x| (x * r).ln());
        let ys = sampled.map(|s| s.max(1e-300).ln());
        let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
        let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        let fit_at_64r = (my + slope * ((64.0 * r).ln() - mx)).exp();
        if sampled.iter().all(|&s| s <= target) && fit_at_64r <= target {
            mu.r_n = Some(r);
            return Ok(RnEvidence {
                r_n: r,
                sampled,
                fit_exponent: slope,
                fit_at_64r,
                rigorous_tail_radius: mu.rigorous_tail_radius(),
            });
        }
        r *= 2.0;
    }
    Err(Error::FrequencyBudget { limit: FREQUENCY_LIMIT })
}

/// Evidence behind the subdivision count of one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineEvidence {
    pub n_used: usize,
    /// `2^{-n}/n`.
    pub target: f64,
    /// Sampled `sup_{|ξ| ≤ R_n} |μ̂_{n+1} - μ̂_n|`; accepted when at most `target/2`.
    pub sampled_diff: f64,
    /// `2π R_n · μ_n(I₁) · |I₁| / N`: each cell's mass moves by at most the cell length and
    /// `θ ↦ exp(-2πi ξ·u(θ))` is `2π|ξ|`-Lipschitz.
    pub transport_bound: f64,
}

/// Cell masses of a standard bump of mass `m` split into `n` equal cells.
pub fn cell_masses(m: f64, n: usize) -> Vec<f64> {
    let (x, w) = gauss_legendre(16);
    let z = bump_mass();
    let h = 2.0 / n as f64;
    let mut v: Vec<f64> = (0..n)
        .map(|j| {
            let a = -1.0 + j as f64 * h;
            let mut s = 0.0;
            for p in 0..4 {
                let mid = a + (p as f64 + 0.5) * h / 4.0;
                for (xi, wi) in x.iter().zip(&w) {
                    s += wi * raw_bump(mid + 0.125 * h * xi);
                }
            }
            s * 0.125 * h / z
        })
        .collect();
    let total: f64 = v.iter().sum();
    for c in &mut v {
        *c *= m / total;
    }
    v
}

/// `μ_n` with `I₁` split into `n_sub` cells, each cell's mass moved into a bump at the
/// cell's left end.
pub fn subdivide(mu: &StageMeasure, n_sub: usize) -> StageMeasure {
    let first = mu.arcs[0];
    let shortest = mu.arcs.last().unwrap().arc.length;
    let cell = first.arc.length / n_sub as f64;
    let c = (0.5 * cell).min(0.5 * shortest);
    let mut batch: Vec<StageArc> = cell_masses(first.mass, n_sub)
        .into_iter()
        .enumerate()
        .map(|(j, m)| StageArc {
            arc: CircleArc::new(first.arc.start + j as f64 * cell, c).expect("positive sub-arc"),
            mass: m,
        })
        .collect();
    batch.sort_by(|a, b| b.mass.total_cmp(&a.mass));
    let mut arcs = mu.arcs[1..].to_vec();
    arcs.extend(batch);
    let mut history = mu.history.clone();
    history.push(HistoryEntry {
        n: mu.n,
        support_length: mu.support_length(),
        mass_i1: mu.mass_i1(),
        n_used: n_sub,
    });
    StageMeasure {
        original: mu.original,
        n: mu.n + 1,
        arcs,
        r_n: None,
        r_prev: mu.r_n.unwrap_or(mu.r_prev),
        history,
    }
}

/// One step: `N = 2, 4, 8, …` until the sampled change of the transform on `|ξ| ≤ R_n` is
/// at most half of `2^{-n}/n`.
pub fn refine_step(mu: &StageMeasure, opts: &CantorOpts) -> Result<(StageMeasure, RefineEvidence)> {
    let r = mu
        .r_n
        .ok_or_else(|| Error::InvalidArgument("choose R_n before refining".into()))?;
    let target = 0.5f64.powi(mu.n as i32) / mu.n as f64;
    let first = mu.arcs[0];
    let kmax = ring_order(r);
    let mut n_sub = 2;
    while n_sub <= N_CAP {
        let next = subdivide(mu, n_sub);
        let mut spec: Vec<(f64, f64, f64)> = next.arcs[mu.arcs.len() - 1..]
            .iter()
            .map(|a| (a.arc.center(), 0.5 * a.arc.length, a.mass))
            .collect();
        spec.push((first.arc.center(), 0.5 * first.arc.length, -first.mass));
        let diff = bump_coefficients(&spec, 0, kmax + 1);
        let sampled = ring_sup(&diff, r / opts.grid as f64, r, opts.grid, 0.0);
        if sampled <= 0.5 * target {
            let ev = RefineEvidence {
                n_used: n_sub,
                target,
                sampled_diff: sampled,
                transport_bound: TAU * r * first.mass * first.arc.length / n_sub as f64,
            };
            return Ok((next, ev));
        }
        n_sub *= 2;
    }
    Err(Error::RefinementCap { cap: N_CAP })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub n: usize,
    pub arcs: Vec<StageArc>,
    pub support_length: f64,
    pub mass_i1: f64,
    pub r_n: f64,
    /// `ε_n = 2/n + μ_n(I₁)`.
    pub epsilon_n: f64,
    pub rn_evidence: RnEvidence,
    /// The step that produced the next stage, if any.
    pub refine: Option<RefineEvidence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CantorReport {
    pub original: CircleArc,
    pub stages: Vec<StageReport>,
    pub grid: usize,
    pub grid_tolerance: f64,
    /// Envelope check on the construction grid.
    pub envelope: EnvelopeCheck,
}

impl CantorReport {
    pub fn stage_measure(&self, i: usize) -> StageMeasure {
        let s = &self.stages[i];
        StageMeasure {
            original: self.original,
            n: s.n,
            arcs: s.arcs.clone(),
            r_n: Some(s.r_n),
            r_prev: if i == 0 { 0.0 } else { self.stages[i - 1].r_n },
            history: Vec::new(),
        }
    }
}

/// Run `stages` stages starting from a single bump on `arc`.
pub fn run_construction(arc: CircleArc, stages: usize, opts: &CantorOpts) -> Result<CantorReport> {
    if stages == 0 {
        return Err(Error::InvalidArgument("need at least one stage".into()));
    }
    let mut mu = init_measure(arc)?;
    let mut out = Vec::with_capacity(stages);
    for k in 0..stages {
        let ev = choose_rn(&mut mu, opts)?;
        mu.validate()?;
        let mut report = StageReport {
            n: mu.n,
            arcs: mu.arcs.clone(),
            support_length: mu.support_length(),
            mass_i1: mu.mass_i1(),
            r_n: ev.r_n,
            epsilon_n: 2.0 / mu.n as f64 + mu.mass_i1(),
            rn_evidence: ev,
            refine: None,
        };
        if k + 1 < stages {
            let (next, rev) = refine_step(&mu, opts)?;
            report.refine = Some(rev);
            mu = next;
        }
        out.push(report);
    }
    let mut rep = CantorReport {
        original: arc,
        stages: out,
        grid: opts.grid,
        grid_tolerance: GRID_TOL,
        envelope: EnvelopeCheck::default(),
    };
    rep.envelope = envelope_check_shifted(&rep, opts.grid, 0.0);
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    /// Envelope stage `n`.
    pub n: usize,
    /// Stage whose transform was sampled.
    pub k: usize,
    pub r_lo: f64,
    pub r_hi: f64,
    pub epsilon_n: f64,
    pub sup: f64,
}

impl EnvelopeRow {
    pub fn excess(&self) -> f64 {
        self.sup - self.epsilon_n
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    pub passed: bool,
    pub rows: Vec<EnvelopeRow>,
    pub max_excess: f64,
}

impl EnvelopeCheck {
    /// CSV rows `n,k,r_lo,r_hi,epsilon_n,sup,excess`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,k,r_lo,r_hi,epsilon_n,sup,excess\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{:.12e},{:.12e},{:.12e}\n",
                r.n,
                r.k,
                r.r_lo,
                r.r_hi,
                r.epsilon_n,
                r.sup,
                r.excess()
            ));
        }
        s
    }
}

/// Re-sample `|μ̂_k|` for every `k ≥ n` on `R_n ≤ |ξ| ≤ R_{n+1}` (on `[R_n, 8R_n]` for the
/// last stage) using a grid offset from the construction grid, and compare with `ε_n`.
pub fn envelope_check(report: &CantorReport, grid: usize) -> EnvelopeCheck {
    envelope_check_shifted(report, grid, 0.5)
}

fn envelope_check_shifted(report: &CantorReport, grid: usize, shift: f64) -> EnvelopeCheck {
    let ranges: Vec<(f64, f64)> = report
        .stages
        .iter()
        .enumerate()
        .map(|(i, s)| (s.r_n, report.stages.get(i + 1).map_or(8.0 * s.r_n, |t| t.r_n)))
        .collect();
    let mut rows = Vec::new();
    for (k, sk) in report.stages.iter().enumerate() {
        let reach = ranges[..=k].iter().map(|r| r.1).fold(0.0, f64::max);
        let coeffs = report.stage_measure(k).coefficients(ring_order(reach));
        for (i, s) in report.stages[..=k].iter().enumerate() {
            let (r_lo, r_hi) = ranges[i];
            if !(r_hi > r_lo) {
                continue;
            }
            rows.push(EnvelopeRow {
                n: s.n,
                k: sk.n,
                r_lo,
                r_hi,
                epsilon_n: s.epsilon_n,
                sup: ring_sup(&coeffs, r_lo, r_hi, grid, shift),
            });
        }
    }
    rows.sort_by_key(|r| (r.n, r.k));
    let max_excess = rows.iter().map(|r| r.excess()).fold(f64::NEG_INFINITY, f64::max);
    EnvelopeCheck {
        passed: rows.iter().all(|r| r.excess() <= GRID_TOL),
        rows,
        max_excess,
    }
}

/// Negative control: stage `i` replaced by a single narrow bump of mass 1, as if the mass
/// had been moved without searching for `N`.
pub fn corrupt_stage(report: &CantorReport, i: usize) -> CantorReport {
    let mut r = report.clone();
    let s = &mut r.stages[i];
    let arc = CircleArc::new(r.original.center(), 1e-9).expect("positive length");
    s.arcs = vec![StageArc { arc, mass: 1.0 }];
    r
}
