use serde::{Deserialize, Serialize};

use super::{gather, lambda_dist, AngleSet, Cand, Pieces, Verdict};
use crate::{Error, Lattice, PolarBox, Result, ETA};

/// A cell of a subdivided region with its certified verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub cell: PolarBox,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub region: PolarBox,
    pub cells: Vec<Cell>,
    pub basis: [[f64; 2]; 2],
    pub epsilon: f64,
    pub angle_set: AngleSet,
    pub max_depth: u32,
    /// Set when the angle set is infinite and was evaluated on its stored data.
    pub truncated: bool,
}

impl CoverageReport {
    pub fn area_with(&self, v: Verdict) -> f64 {
        self.cells
            .iter()
            .filter(|c| c.verdict == v)
            .map(|c| c.cell.area())
            .fold(0.0, |a, b| a + b)
    }

    pub fn ambiguous_fraction(&self) -> f64 {
        self.area_with(Verdict::Ambiguous) / self.region.area()
    }

    pub fn all_covered(&self) -> bool {
        self.cells.iter().all(|c| c.verdict == Verdict::Covered)
    }

    pub fn any_uncovered(&self) -> bool {
        self.cells.iter().any(|c| c.verdict == Verdict::Uncovered)
    }

    pub fn summary(&self) -> RegionSummary {
        let mut s = RegionSummary::default();
        for c in &self.cells {
            s.push(c.cell, c.verdict);
        }
        s
    }
}

/// Aggregate of a verification run without the cell list.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RegionSummary {
    pub covered_area: f64,
    pub uncovered_area: f64,
    pub ambiguous_area: f64,
    pub covered_cells: usize,
    pub uncovered_cells: usize,
    pub ambiguous_cells: usize,
    /// Largest outer radius among cells not certified covered.
    pub max_open_radius: Option<f64>,
}

impl RegionSummary {
    pub fn all_covered(&self) -> bool {
        self.uncovered_cells == 0 && self.ambiguous_cells == 0
    }

    pub fn residual_area(&self) -> f64 {
        self.uncovered_area + self.ambiguous_area
    }
}

trait Sink: Default + Send {
    fn push(&mut self, cell: PolarBox, v: Verdict);
    fn merge(&mut self, other: Self);
}

impl Sink for RegionSummary {
    fn push(&mut self, cell: PolarBox, v: Verdict) {
        let a = cell.area();
        match v {
            Verdict::Covered => {
                self.covered_area += a;
                self.covered_cells += 1;
                return;
            }
            Verdict::Uncovered => {
                self.uncovered_area += a;
                self.uncovered_cells += 1;
            }
            Verdict::Ambiguous => {
                self.ambiguous_area += a;
                self.ambiguous_cells += 1;
            }
        }
        self.max_open_radius = Some(self.max_open_radius.map_or(cell.r_hi, |m| m.max(cell.r_hi)));
    }

    fn merge(&mut self, o: Self) {
        self.covered_area += o.covered_area;
        self.uncovered_area += o.uncovered_area;
        self.ambiguous_area += o.ambiguous_area;
        self.covered_cells += o.covered_cells;
        self.uncovered_cells += o.uncovered_cells;
        self.ambiguous_cells += o.ambiguous_cells;
        self.max_open_radius = match (self.max_open_radius, o.max_open_radius) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
    }
}

impl Sink for Vec<Cell> {
    fn push(&mut self, cell: PolarBox, verdict: Verdict) {
        self.push(Cell { cell, verdict });
    }

    fn merge(&mut self, other: Self) {
        self.extend(other);
    }
}

struct Ctx<'a> {
    pieces: &'a Pieces,
    epsilon: f64,
    max_depth: u32,
}

// Below this depth the two halves of a cell are handed to rayon.
const PAR_DEPTH: u32 = 10;

fn recurse<S: Sink>(ctx: &Ctx, cell: PolarBox, cands: &[Cand], depth: u32) -> S {
    let mut out = S::default();
    let reach = ctx.epsilon + ETA;
    let d_cell = cell.center_radius();
    let rc = 0.5 * (cell.r_lo + cell.r_hi);
    let ac = cell.phi_lo + 0.5 * cell.span();

    // Candidate lists arrive with the parent's best witness first; in most covered cells it
    // already certifies the whole cell.
    if let Some(c) = cands.first() {
        if lambda_dist(rc, ac, c, ctx.pieces) + d_cell < ctx.epsilon - ETA {
            out.push(cell, Verdict::Covered);
            return out;
        }
    }

    // Every point of the cell is within d_cell of its center and the coverage distance
    // is 1-Lipschitz, so a lattice point farther than reach + d_cell from the center's
    // orbit is irrelevant here and in all sub-cells.
    let mut best = f64::INFINITY;
    let mut kept: Vec<Cand> = Vec::new();
    for c in cands {
        let d = lambda_dist(rc, ac, c, ctx.pieces);
        if d - d_cell < reach {
            if d < best {
                best = d;
                kept.push(*c);
                let last = kept.len() - 1;
                kept.swap(0, last);
            } else {
                kept.push(*c);
            }
        }
    }

    if kept.is_empty() {
        out.push(cell, Verdict::Uncovered);
        return out;
    }
    if best + d_cell < ctx.epsilon - ETA {
        out.push(cell, Verdict::Covered);
        return out;
    }
    if depth >= ctx.max_depth {
        out.push(cell, Verdict::Ambiguous);
        return out;
    }

    let (a, b) = split(&cell);
    if depth < PAR_DEPTH {
        let (ra, rb) = rayon::join(
            || recurse::<S>(ctx, a, &kept, depth + 1),
            || recurse::<S>(ctx, b, &kept, depth + 1),
        );
        out.merge(ra);
        out.merge(rb);
    } else {
        out.merge(recurse::<S>(ctx, a, &kept, depth + 1));
        out.merge(recurse::<S>(ctx, b, &kept, depth + 1));
    }
    out
}

/// Halves the cell across its longer side, measured in arc length.
fn split(cell: &PolarBox) -> (PolarBox, PolarBox) {
    let radial = cell.r_hi - cell.r_lo;
    let angular = 0.5 * (cell.r_lo + cell.r_hi) * cell.span();
    if radial >= angular {
        let m = 0.5 * (cell.r_lo + cell.r_hi);
        (PolarBox { r_hi: m, ..*cell }, PolarBox { r_lo: m, ..*cell })
    } else {
        let m = cell.phi_lo + 0.5 * cell.span();
        (PolarBox { phi_hi: m, ..*cell }, PolarBox { phi_lo: m, ..*cell })
    }
}

fn run<S: Sink>(
    pieces: &Pieces,
    lattice: &Lattice,
    epsilon: f64,
    region: &PolarBox,
    max_depth: u32,
) -> Result<S> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    if max_depth < 1 {
        return Err(Error::InvalidArgument("max_depth must be at least 1".into()));
    }
    if pieces.is_empty() {
        let mut s = S::default();
        s.push(*region, Verdict::Uncovered);
        return Ok(s);
    }
    let cands = gather(
        lattice,
        pieces,
        region.r_lo,
        region.r_hi,
        region.phi_lo,
        region.phi_hi,
        epsilon + 2.0 * ETA,
    )?;
    let ctx = Ctx {
        pieces,
        epsilon,
        max_depth,
    };
    Ok(recurse::<S>(&ctx, *region, &cands, 0))
}

/// Certifies each cell of an adaptive polar subdivision of `region` as covered by
/// `R_Θ(Λ + B_ε)`, disjoint from it, or undecided at `max_depth`.
pub fn verify_region(
    theta: &AngleSet,
    lattice: &Lattice,
    epsilon: f64,
    region: &PolarBox,
    max_depth: u32,
) -> Result<CoverageReport> {
    let mut cells: Vec<Cell> = run(&theta.pieces(), lattice, epsilon, region, max_depth)?;
    cells.sort_by(|a, b| {
        (a.cell.r_lo, a.cell.phi_lo)
            .partial_cmp(&(b.cell.r_lo, b.cell.phi_lo))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let m = lattice.basis();
    Ok(CoverageReport {
        region: *region,
        cells,
        basis: [[m[(0, 0)], m[(1, 0)]], [m[(0, 1)], m[(1, 1)]]],
        epsilon,
        angle_set: theta.clone(),
        max_depth,
        truncated: theta.is_truncated(),
    })
}

/// Same subdivision as [`verify_region`] keeping only totals, for large regions.
pub fn verify_summary(
    pieces: &Pieces,
    lattice: &Lattice,
    epsilon: f64,
    region: &PolarBox,
    max_depth: u32,
) -> Result<RegionSummary> {
    run(pieces, lattice, epsilon, region, max_depth)
}
