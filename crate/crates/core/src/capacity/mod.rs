//! Entanglement-assisted capacities: single channels, compound channels with
//! uninformed or informed parties, converse and continuity evaluators.
//!
//! Values are in bits per channel use. Classical values are twice the quantum ones.

mod solver;

use serde::{Deserialize, Serialize};

use crate::compound::CompoundChannel;
use crate::entropy::mutual_info;
use crate::error::{Error, Result};
use crate::linalg::{h2, CMat};
use crate::qcore::{apply_channel, Channel, DensityOperator, DimLayout, PureState};
use solver::{maximize, Member};

pub const DEFAULT_CAPACITY_TOL: f64 = 1e-6;
const MAX_ITER: usize = 3000;

#[derive(Debug, Clone)]
pub struct CapacityResult {
    pub bits_per_use: f64,
    pub optimizer: DensityOperator,
    /// Members attaining the inner minimum (within the tolerance).
    pub active_indices: Vec<usize>,
    /// Certified: the true value lies in [bits_per_use, bits_per_use + gap].
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Hypothesis under which the value is a capacity, when it has one.
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Uninformed,
    InformedReceiver,
    InformedSender,
    Feedback,
}

/// I(A′:B) for the canonical purification of ρ_A sent through N.
pub fn channel_mutual_info(rho: &DensityOperator, n: &Channel) -> Result<f64> {
    rho.require_normalized()?;
    if rho.dim() != n.d_in() {
        return Err(Error::dims(format!("state dim {} vs channel input {}", rho.dim(), n.d_in())));
    }
    let psi = rho.relayout(vec![rho.dim()])?.purify();
    channel_mutual_info_purified(&psi, n)
}

/// I(A′:B) for a given purification |ψ⟩ on (A, A′); the channel acts on A.
pub fn channel_mutual_info_purified(psi: &PureState, n: &Channel) -> Result<f64> {
    if psi.dims().len() != 2 || psi.dims()[0] != n.d_in() {
        return Err(Error::dims("purification must have layout [d_in, d_ref]"));
    }
    let out = apply_channel(n, &psi.density(), 0)?;
    mutual_info(&out, &[1], &[0])
}

/// Exact derivative of ρ ↦ I(ρ, N) at a full-rank ρ, as a Hermitian matrix.
pub fn mutual_info_gradient(rho: &DensityOperator, n: &Channel) -> Result<CMat> {
    if rho.dim() != n.d_in() {
        return Err(Error::dims("state and channel input differ"));
    }
    Ok(solver::gradient(n, rho.matrix()))
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::param(format!("tolerance {tol} must be positive")));
    }
    Ok(())
}

fn run(channels: &[Channel], tol: f64) -> Result<CapacityResult> {
    check_tol(tol)?;
    let d = channels[0].d_in();
    let members: Vec<Member> = channels.iter().map(Member::new).collect();
    let out = maximize(&members, d, 2.0 * tol, MAX_ITER);
    let lower = out.values.iter().copied().fold(f64::INFINITY, f64::min);
    let active = out
        .values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= lower + 2.0 * tol.max(1e-9))
        .map(|(i, _)| i)
        .collect();
    let gap = 0.5 * (out.upper - lower).max(0.0);
    let optimizer = DensityOperator::clip_and_renormalize(&out.rho, DimLayout::single(d)?)?;
    Ok(CapacityResult {
        bits_per_use: 0.5 * lower.max(0.0),
        optimizer,
        active_indices: active,
        gap,
        iterations: out.iterations,
        converged: gap <= tol,
        note: None,
    })
}

/// Q_E(N) = ½ max_ρ I(ρ, N).
pub fn qe_single(n: &Channel, tol: f64) -> Result<CapacityResult> {
    run(std::slice::from_ref(n), tol)
}

/// Q_E(Π) = ½ max_ρ minᵢ I(ρ, Nⁱ).
pub fn qe_compound(pi: &CompoundChannel, tol: f64) -> Result<CapacityResult> {
    run(pi.channels(), tol)
}

/// Informed receiver: equal to the uninformed value.
pub fn qe_informed_receiver(pi: &CompoundChannel, tol: f64) -> Result<CapacityResult> {
    let mut r = qe_compound(pi, tol)?;
    r.note = Some("informed receiver value equals the uninformed compound value".into());
    Ok(r)
}

/// Informed sender: minᵢ Q_E(Nⁱ).
pub fn qe_informed_sender(pi: &CompoundChannel, tol: f64) -> Result<CapacityResult> {
    use rayon::prelude::*;
    let each: Vec<CapacityResult> =
        pi.channels().par_iter().map(|n| qe_single(n, tol)).collect::<Result<Vec<_>>>()?;
    let lower = each.iter().map(|r| r.bits_per_use).fold(f64::INFINITY, f64::min);
    let upper = each.iter().map(|r| r.bits_per_use + r.gap).fold(f64::INFINITY, f64::min);
    let active: Vec<usize> =
        each.iter().enumerate().filter(|(_, r)| r.bits_per_use <= lower + 2.0 * tol).map(|(i, _)| i).collect();
    let first = &each[active[0]];
    Ok(CapacityResult {
        bits_per_use: lower,
        optimizer: first.optimizer.clone(),
        active_indices: active,
        gap: (upper - lower).max(0.0),
        iterations: each.iter().map(|r| r.iterations).sum(),
        converged: each.iter().all(|r| r.converged),
        note: None,
    })
}

/// Feedback-assisted value; equals the informed-sender value for finite index sets.
pub fn qe_feedback(pi: &CompoundChannel, tol: f64) -> Result<CapacityResult> {
    let mut r = qe_informed_sender(pi, tol)?;
    r.note = Some(format!("valid for a finite index set (|I| = {})", pi.len()));
    Ok(r)
}

pub fn quantum_capacity(variant: Variant, pi: &CompoundChannel, tol: f64) -> Result<CapacityResult> {
    match variant {
        Variant::Uninformed => qe_compound(pi, tol),
        Variant::InformedReceiver => qe_informed_receiver(pi, tol),
        Variant::InformedSender => qe_informed_sender(pi, tol),
        Variant::Feedback => qe_feedback(pi, tol),
    }
}

/// Entanglement-assisted classical capacity, 2× the quantum value.
pub fn classical_capacity(variant: Variant, pi: &CompoundChannel, tol: f64) -> Result<f64> {
    Ok(2.0 * quantum_capacity(variant, pi, tol)?.bits_per_use)
}

/// Upper bound on (1/n) log M₀ for n uses at error δ:
/// (max_ρ I(ρ,N) + h(δ)/n) / (1 − δ). Uses the certified upper end of max I.
pub fn converse_bound(n: &Channel, uses: usize, delta: f64, tol: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param(format!("delta {delta} outside (0, 1)")));
    }
    if uses == 0 {
        return Err(Error::param("number of uses must be positive"));
    }
    let q = qe_single(n, tol)?;
    let max_i = 2.0 * (q.bits_per_use + q.gap);
    Ok((max_i + h2(delta) / uses as f64) / (1.0 - delta))
}

/// Q − ε log d_A + (1 + ε/2) h(ε/(2+ε)) for a known capacity value Q.
pub fn continuity_rate_from(q: f64, eps: f64, d_a: usize) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(Error::param(format!("epsilon {eps} must be nonnegative")));
    }
    Ok(q - eps * (d_a as f64).log2() + (1.0 + eps / 2.0) * h2(eps / (2.0 + eps)))
}

pub fn continuity_rate(n: &Channel, eps: f64, tol: f64) -> Result<f64> {
    let q = qe_single(n, tol)?.bits_per_use;
    continuity_rate_from(q, eps, n.d_in())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::max_mixed;

    #[test]
    fn identity_and_fully_depolarizing() {
        let id = Channel::identity(2).unwrap();
        let q = qe_single(&id, 1e-6).unwrap();
        assert!((q.bits_per_use - 1.0).abs() < 1e-6, "{q:?}");
        let dep = Channel::fully_depolarizing(2).unwrap();
        assert!(qe_single(&dep, 1e-6).unwrap().bits_per_use.abs() < 1e-6);
        let tau = max_mixed(3).unwrap();
        assert!((channel_mutual_info(&tau, &Channel::identity(3).unwrap()).unwrap() - 2.0 * 3f64.log2()).abs() < 1e-10);
    }

    #[test]
    fn converse_and_continuity_closed_forms() {
        let id = Channel::identity(2).unwrap();
        let c = converse_bound(&id, 10, 0.1, 1e-7).unwrap();
        assert!((c - (2.0 + h2(0.1) / 10.0) / 0.9).abs() < 1e-5);
        assert!((continuity_rate_from(0.7, 2.0, 2).unwrap() - 0.7).abs() < 1e-12);
        assert_eq!(continuity_rate_from(0.7, 0.0, 2).unwrap(), 0.7);
    }
}
