use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate lattice: basis is singular or not finite")]
    DegenerateLattice,

    #[error("enumeration budget exceeded: more than {cap} points requested")]
    EnumerationBudget { cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("theorem precondition violated: epsilon {epsilon} must be below s(Λ)/2 = {half_shortest}")]
    Precondition { epsilon: f64, half_shortest: f64 },

    #[error("no hole found within budget (best clearance function value {best_g:.6}, needed {needed:.6})")]
    NoHoleFound { best_g: f64, needed: f64 },

    #[error("requires arc-type angle set")]
    RequiresArc,

    #[error("arc insufficient for shell [{r_lo}, {r_hi}]: uncovered area {residual_area:.3e}")]
    ArcInsufficient { r_lo: f64, r_hi: f64, residual_area: f64 },

    #[error("greedy cover stalled with residual uncovered area {residual_area:.3e}")]
    GreedyStall { residual_area: f64 },

    #[error("slope too well-approximable for budget (cap {cap} strands)")]
    SlopeBudget { cap: usize },

    #[error("quadrature did not converge: achieved tolerance {achieved:.3e}")]
    Quadrature { achieved: f64 },

    #[error("truncation bound not achieved within tabulation range")]
    Truncation,

    #[error("frequency budget exceeded while choosing R_n (limit {limit})")]
    FrequencyBudget { limit: f64 },

    #[error("refinement cap reached: N = {cap} does not meet the dyadic bound")]
    RefinementCap { cap: usize },

    #[error("no window J reaches the density bound {target}")]
    NoDensityWindow { target: f64 },
}

impl Error {
    /// Errors caused by running out of a configured budget rather than invalid input.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::EnumerationBudget { .. }
                | Error::NoHoleFound { .. }
                | Error::SlopeBudget { .. }
                | Error::FrequencyBudget { .. }
                | Error::RefinementCap { .. }
                | Error::GreedyStall { .. }
        )
    }
}
