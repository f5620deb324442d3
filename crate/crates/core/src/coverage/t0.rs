use super::{verify_summary, AngleSet};
use crate::{Error, Lattice, PolarBox, Result};

/// Smallest `t` such that the verified shells tile `[t, t_max + shell_width]` with covered
/// cells, scanning unit shells downward from `t_max`.
///
/// At the first shell that is not fully certified, `t` is the outer radius of its highest
/// uncertified cell. `None` means even the top shell failed. This is evidence on a bounded
/// range only.
pub fn empirical_t0(
    theta: &AngleSet,
    lattice: &Lattice,
    epsilon: f64,
    shell_width: f64,
    t_max: f64,
    max_depth: u32,
) -> Result<Option<f64>> {
    if !theta.is_arc_type() {
        return Err(Error::RequiresArc);
    }
    if !(shell_width > 0.0 && t_max.is_finite() && t_max >= 0.0) {
        return Err(Error::InvalidArgument("need shell_width > 0 and finite t_max ≥ 0".into()));
    }
    let pieces = theta.pieces();
    let mut lo = t_max;
    loop {
        let shell = PolarBox::annulus(lo, lo + shell_width)?;
        let s = verify_summary(&pieces, lattice, epsilon, &shell, max_depth)?;
        if let Some(r) = s.max_open_radius {
            if lo == t_max {
                return Ok(None);
            }
            return Ok(Some(r));
        }
        if lo == 0.0 {
            return Ok(Some(0.0));
        }
        lo = (lo - shell_width).max(0.0);
    }
}
