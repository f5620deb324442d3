//! Rotations of a fattened planar lattice: when do they cover the plane outside a disk?
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`]: reduced bases, invariants and exact point enumeration in disks and
//!   polar boxes.
//! * [`coverage`]: membership in `R_Θ E`, certified polar-region verification, hole
//!   search and empirical covering radii.
//! * [`constructions`]: good and bad angle sequences, bad perfect sets, torus segment
//!   density, the explicit elementary radius and dilate covers of the line.
//! * [`fourier`]: transforms of probability measures on the circle, the δ threshold
//!   built from a compactly supported mollifier, and the goodness criterion.
//! * [`cantor`]: the staged construction of a measure with decaying transform that lives
//!   on a null set.
//!
//! All geometry is double precision. Predicates that could be flipped by rounding are
//! evaluated with the margin [`ETA`] on both sides and report `Ambiguous` instead of
//! guessing.

pub mod angle;
pub mod cantor;
pub mod constructions;
pub mod coverage;
pub mod error;
pub mod fourier;
pub mod lattice;

pub use angle::CircleArc;
pub use coverage::{AngleSet, CoverageReport, Hole, Verdict};
pub use error::{Error, Result};
pub use lattice::{Lattice, PolarBox};

/// Points of the plane.
pub type Vec2 = nalgebra::Vector2<f64>;
/// 2×2 real matrices; lattice bases are stored column-wise.
pub type Mat2 = nalgebra::Matrix2<f64>;

/// Global certification margin for membership predicates.
pub const ETA: f64 = 1e-9;

/// Default cap on points produced by a single enumeration call.
pub const DEFAULT_ENUMERATION_CAP: usize = 100_000_000;
