//! Constructive procedures: good and very-good convergent sequences, bad sequences and
//! bad perfect sets, torus segment density with the elementary covering radius for `Z²`,
//! and dilate covers of the line.

mod bad;
mod dilate;
mod good;
mod torus;

pub use bad::{build_bad_perfect_set, build_bad_sequence, BadOpts, BadSequenceResult, PerfectSetResult};
pub use dilate::{dilate_cover, max_min_dist, DilateCover};
pub use good::{
    build_good_sequence, build_very_good_sequence, finite_cover_of_shell, nested_arc,
    GoodSequenceResult, ScheduleAdjustment, ScheduleTerm, ShellOpts, ShellRecord,
};
pub use torus::{
    default_directions, elementary_t0, max_circular_gap, max_strand_gap, torus_segment_density,
    ElementaryT0, SegmentDensity, STRAND_CAP,
};
