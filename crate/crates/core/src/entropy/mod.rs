//! Entropic quantities in bits: von Neumann family, (smooth) min- and
//! max-entropies, collision entropy, and continuity / equipartition bounds.

mod bounds;
mod collision;
mod minmax;
mod vn;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::qcore::DensityOperator;

pub use bounds::{aep_delta, fannes_cond, fannes_mi, AepDelta};
pub use collision::{collision_entropy, collision_entropy_given};
pub use minmax::{
    h_max, h_min, h_min_tol, smooth_h_max, smooth_h_min, smooth_h_min_tol, SmoothingBall, SMOOTH_VAR_LIMIT,
};
pub use vn::{cond_entropy, mutual_info, von_neumann, von_neumann_spectrum};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Conditioning operator σ_B with ρ_AB ≼ I_A ⊗ σ_B; value −log tr σ_B.
    Sigma {
        #[serde(with = "crate::io::cmat")]
        sigma: CMat,
    },
    /// Smoothed state and its conditioning operator.
    Smoothed {
        #[serde(with = "crate::io::cmat")]
        rho_tilde: CMat,
        #[serde(with = "crate::io::cmat")]
        sigma: CMat,
    },
    /// Certificate of the dual min-entropy on the purifying system.
    Dual { inner: Box<Certificate> },
    /// Normalized conditioning state σ_B for a collision entropy evaluation.
    Conditioning {
        #[serde(with = "crate::io::cmat")]
        sigma: CMat,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyValue {
    pub bits: f64,
    pub certificate: Option<Certificate>,
    /// False when the value is a bound standing in for the requested quantity
    /// (e.g. an unsmoothed value used because the smoothing program is too large).
    pub exact: bool,
}

/// Split a state into (d_A, d_B): A is the first subsystem, B the rest.
pub(crate) fn bipartite_dims(rho: &DensityOperator) -> (usize, usize) {
    let d_a = rho.dims()[0];
    (d_a, rho.dim() / d_a)
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::param(format!("smoothing parameter {eps} outside [0, 1)")));
    }
    Ok(())
}
