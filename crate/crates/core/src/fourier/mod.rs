//! Transforms of probability measures on the circle, the δ threshold built from a
//! compactly supported mollifier, the goodness criterion and restriction measures.

mod measure;
mod quad;
mod restriction;
mod ring;
mod threshold;

pub use measure::{ft_sup_on_annulus, measure_ft, Atom, Bump, CircleMeasure, Profile, FT_TOL};
pub(crate) use measure::bump_ft;
pub(crate) use quad::raw_bump;
pub use quad::{bump_mass, gauss_legendre, smooth_step, std_bump, BumpTables};
pub use ring::{bessel_j_all, bump_coefficients, circle_coefficients, ring_moduli, ring_order, ring_sup};
pub use restriction::{build_restriction_measure, merge_arcs, RestrictionMeasure};
pub use threshold::{
    check_goodness_criterion, default_probe_annuli, delta_report, delta_threshold, dual_sum,
    primal_sum, psi, AnnulusProbe, DeltaThreshold, GoodnessOpts, GoodnessReport, GoodnessVerdict,
    MollifierPair, SumSide,
};
