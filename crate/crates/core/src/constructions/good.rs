use serde::{Deserialize, Serialize};

use crate::angle::{circ_dist, CircleArc};
use crate::coverage::{
    best_witness, empirical_t0, min_dist, verify_region, verify_summary, AngleSet, Pieces, RegionSummary, Verdict,
};
use crate::{Error, Lattice, PolarBox, Result, ETA};

/// Budgets shared by the shell-covering procedures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellOpts {
    /// Subdivision depth for every verification call.
    pub max_depth: u32,
    /// Subdivision depth while the greedy cover is still growing.
    pub greedy_depth: u32,
    /// Greedy rounds before giving up.
    pub max_rounds: usize,
    /// How far beyond the requested start the shells may be moved outward.
    pub probe_limit: usize,
    /// Length ratio between consecutive nested arcs.
    pub shrink: f64,
}

impl Default for ShellOpts {
    fn default() -> Self {
        Self {
            max_depth: 30,
            greedy_depth: 18,
            max_rounds: 40,
            probe_limit: 400,
            shrink: 0.9,
        }
    }
}

fn arc_covers(
    arc: &CircleArc,
    lattice: &Lattice,
    epsilon: f64,
    r_lo: f64,
    r_hi: f64,
    opts: &ShellOpts,
) -> Result<RegionSummary> {
    let pieces = Pieces::new(vec![], vec![*arc]);
    verify_summary(&pieces, lattice, epsilon, &PolarBox::annulus(r_lo, r_hi)?, opts.max_depth)
}

/// A finite `F ⊆ I` whose rotations of `Λ + B_ε` certifiably cover the shell
/// `r_lo < r < r_hi`.
///
/// Greedy batches: every cell left open by the current `F` contributes the angle of `I`
/// that is exactly optimal for its center, unless an angle picked earlier in the same
/// batch already covers that center.
pub fn finite_cover_of_shell(
    arc: &CircleArc,
    lattice: &Lattice,
    epsilon: f64,
    r_lo: f64,
    r_hi: f64,
    opts: &ShellOpts,
) -> Result<Vec<f64>> {
    let region = PolarBox::annulus(r_lo, r_hi)?;
    let whole = arc_covers(arc, lattice, epsilon, r_lo, r_hi, opts)?;
    if !whole.all_covered() {
        return Err(Error::ArcInsufficient {
            r_lo,
            r_hi,
            residual_area: whole.residual_area(),
        });
    }
    let arc_pieces = Pieces::new(vec![], vec![*arc]);
    let mut angles: Vec<f64> = Vec::new();
    let mut residual = region.area();
    // Coarse rounds leave the cells straddling disk boundaries undecided instead of
    // resolving them to full depth; only the final certification runs at max_depth.
    let mut depth = opts.greedy_depth.min(opts.max_depth);
    for _ in 0..opts.max_rounds {
        let mut open: Vec<PolarBox> = if angles.is_empty() {
            vec![region]
        } else {
            let set = AngleSet::finite(&angles)?;
            let rep = verify_region(&set, lattice, epsilon, &region, depth)?;
            residual = rep.area_with(Verdict::Uncovered) + rep.area_with(Verdict::Ambiguous);
            rep.cells
                .into_iter()
                .filter(|c| c.verdict != Verdict::Covered)
                .map(|c| c.cell)
                .collect()
        };
        if open.is_empty() {
            if depth < opts.max_depth {
                depth = opts.max_depth;
                continue;
            }
            angles.sort_by(f64::total_cmp);
            return Ok(angles);
        }
        open.sort_by(|a, b| {
            b.area()
                .total_cmp(&a.area())
                .then(a.r_lo.total_cmp(&b.r_lo))
                .then(a.phi_lo.total_cmp(&b.phi_lo))
        });
        let mut batch: Vec<f64> = Vec::new();
        let mut known = Pieces::finite(&angles);
        for cell in &open {
            // At full depth a probe must be covered with enough room for its whole cell,
            // otherwise cells hugging a disk boundary would never get a new witness.
            let slack = if depth >= opts.max_depth {
                cell.center_radius()
            } else {
                0.0
            };
            for x in probe_points(cell) {
                if !known.is_empty()
                    && min_dist(&x, &known, lattice, epsilon)? + slack < epsilon - ETA
                {
                    continue;
                }
                if let Some((theta, _)) = best_witness(&x, &arc_pieces, lattice, epsilon)? {
                    if !angles.contains(&theta) && !batch.contains(&theta) {
                        batch.push(theta);
                        known = Pieces::finite(&[&angles[..], &batch[..]].concat());
                    }
                }
            }
        }
        if batch.is_empty() {
            // Every probe is covered but cells remain undecided: resolve them more finely.
            if depth < opts.max_depth {
                depth = (depth + 4).min(opts.max_depth);
                continue;
            }
            return Err(Error::GreedyStall {
                residual_area: residual,
            });
        }
        angles.extend(batch);
    }
    Err(Error::GreedyStall {
        residual_area: residual,
    })
}

/// Center of a cell followed by four interior points halfway to its corners.
fn probe_points(cell: &PolarBox) -> [crate::Vec2; 5] {
    let at = |fr: f64, fa: f64| {
        let r = cell.r_lo + fr * (cell.r_hi - cell.r_lo);
        crate::angle::unit(cell.phi_lo + fa * cell.span()) * r
    };
    [at(0.5, 0.5), at(0.25, 0.25), at(0.25, 0.75), at(0.75, 0.25), at(0.75, 0.75)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellRecord {
    pub r_lo: f64,
    pub r_hi: f64,
    pub arc: CircleArc,
    pub epsilon: f64,
    pub angles: Vec<f64>,
    pub summary: RegionSummary,
}

/// A shell boundary that had to move away from its nominal unit spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleAdjustment {
    pub shell: usize,
    pub nominal: f64,
    pub used: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodSequenceResult {
    /// All angles, ordered by nonincreasing distance to `limit`.
    pub angles: Vec<f64>,
    pub limit: f64,
    pub shells: Vec<ShellRecord>,
    pub adjustments: Vec<ScheduleAdjustment>,
}

impl GoodSequenceResult {
    pub fn angle_set(&self) -> Result<AngleSet> {
        AngleSet::sequence(self.angles.clone(), self.limit)
    }

    /// Re-verifies every shell with its own finite angle set on a fresh subdivision.
    pub fn reverify(&self, lattice: &Lattice, max_depth: u32) -> Result<bool> {
        for s in &self.shells {
            let set = AngleSet::finite(&s.angles)?;
            let pieces = set.pieces();
            let region = PolarBox::annulus(s.r_lo, s.r_hi)?;
            if !verify_summary(&pieces, lattice, s.epsilon, &region, max_depth)?.all_covered() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn sort_angles(&mut self) {
        let l = self.limit;
        self.angles.sort_by(|a, b| {
            circ_dist(*b, l)
                .total_cmp(&circ_dist(*a, l))
                .then(a.total_cmp(b))
        });
        self.angles.dedup();
    }
}

/// Nested arcs `I_k ⊆ I` shrinking geometrically onto `limit`.
pub fn nested_arc(arc: &CircleArc, limit: f64, shrink: f64, k: usize) -> Result<CircleArc> {
    let left = arc.offset(limit);
    let right = arc.length - left;
    let f = shrink.powi(k as i32);
    CircleArc::new(limit - left * f, (left + right) * f)
}

fn good_sequence_in(
    lattice: &Lattice,
    epsilon: f64,
    arc: &CircleArc,
    limit: f64,
    r_start: f64,
    n_shells: usize,
    opts: &ShellOpts,
    out: &mut GoodSequenceResult,
) -> Result<()> {
    if n_shells == 0 {
        return Ok(());
    }
    let first_shell = out.shells.len();
    let arcs: Vec<CircleArc> = (0..n_shells)
        .map(|k| nested_arc(arc, limit, opts.shrink, k))
        .collect::<Result<_>>()?;

    // Every I_k contains the smallest arc, so beyond that arc's empirical threshold all of
    // them cover; the shells are then consecutive unit shells starting there.
    let smallest = AngleSet::Arc {
        arc: arcs[n_shells - 1],
    };
    let need = n_shells as f64;
    let ceiling = r_start + need + opts.probe_limit as f64;
    let mut t_max = (r_start + need + 8.0).min(ceiling);
    let r1 = loop {
        let next = match empirical_t0(&smallest, lattice, epsilon, 1.0, t_max, opts.max_depth)? {
            Some(t0) if r_start.max(t0) + need <= t_max + 1.0 => break r_start.max(t0),
            Some(t0) => t0 + need + 8.0,
            None => 2.0 * t_max,
        };
        if t_max >= ceiling {
            return Err(Error::ArcInsufficient {
                r_lo: r_start,
                r_hi: t_max,
                residual_area: f64::NAN,
            });
        }
        t_max = next.min(ceiling);
    };
    if r1 != r_start {
        out.adjustments.push(ScheduleAdjustment {
            shell: first_shell,
            nominal: r_start,
            used: r1,
        });
    }

    for k in 0..n_shells {
        let r = r1 + k as f64;
        let hi = r + 1.0;
        let angles = finite_cover_of_shell(&arcs[k], lattice, epsilon, r, hi, opts)?;
        let set = AngleSet::finite(&angles)?;
        let summary = verify_summary(
            &set.pieces(),
            lattice,
            epsilon,
            &PolarBox::annulus(r, hi)?,
            opts.max_depth,
        )?;
        out.angles.extend(angles.iter().copied());
        out.shells.push(ShellRecord {
            r_lo: r,
            r_hi: hi,
            arc: arcs[k],
            epsilon,
            angles,
            summary,
        });
    }
    Ok(())
}

/// Finite sets `F_n` inside nested arcs `I_n → θ'` such that `R_{F_n}(Λ + B_ε)` covers the
/// shell `[r_n, r_{n+1}]`, with `θ' = end(I) - |I|/10`.
pub fn build_good_sequence(
    lattice: &Lattice,
    epsilon: f64,
    arc: &CircleArc,
    r_start: f64,
    n_shells: usize,
    opts: &ShellOpts,
) -> Result<GoodSequenceResult> {
    if !(epsilon > 0.0 && r_start >= 0.0) {
        return Err(Error::InvalidArgument("need epsilon > 0 and r_start ≥ 0".into()));
    }
    if !(opts.shrink > 0.0 && opts.shrink < 1.0) {
        return Err(Error::InvalidArgument("shrink ratio must lie in (0, 1)".into()));
    }
    let limit = crate::angle::normalize(arc.end() - arc.length / 10.0);
    let mut out = GoodSequenceResult {
        angles: vec![],
        limit,
        shells: vec![],
        adjustments: vec![],
    };
    good_sequence_in(lattice, epsilon, arc, limit, r_start, n_shells, opts, &mut out)?;
    out.sort_angles();
    Ok(out)
}

/// One term of a very-good schedule: angles inside `(0, a)` good for fattening `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleTerm {
    pub a: f64,
    pub epsilon: f64,
}

impl ScheduleTerm {
    /// `a_n = 2^{-n}`, `ε_n = 1/n` for `n = 1..=len`.
    pub fn default_schedule(len: usize) -> Vec<ScheduleTerm> {
        (1..=len)
            .map(|n| ScheduleTerm {
                a: 0.5f64.powi(n as i32),
                epsilon: 1.0 / n as f64,
            })
            .collect()
    }
}

/// Concatenates good sequences built in `[a_n/4, 0.95 a_n] ⊂ (0, a_n)` for `ε_n`, one
/// block of shells per schedule term; the result accumulates at 0.
pub fn build_very_good_sequence(
    lattice: &Lattice,
    schedule: &[ScheduleTerm],
    r_start: f64,
    shells_per_term: usize,
    opts: &ShellOpts,
) -> Result<GoodSequenceResult> {
    for w in schedule.windows(2) {
        if !(w[1].a < w[0].a) {
            return Err(Error::InvalidArgument("schedule a_n must decrease".into()));
        }
    }
    let mut out = GoodSequenceResult {
        angles: vec![],
        limit: 0.0,
        shells: vec![],
        adjustments: vec![],
    };
    for term in schedule {
        if !(term.a > 0.0 && term.a < std::f64::consts::PI && term.epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!("bad schedule term {term:?}")));
        }
        let arc = CircleArc::new(0.25 * term.a, 0.7 * term.a)?;
        let limit = arc.end() - arc.length / 10.0;
        good_sequence_in(lattice, term.epsilon, &arc, limit, r_start, shells_per_term, opts, &mut out)?;
    }
    out.sort_angles();
    Ok(out)
}
