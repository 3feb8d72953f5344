use serde::{Deserialize, Serialize};

use crate::entropy::{collision_entropy, smooth_h_max, smooth_h_min};
use crate::error::Result;
use crate::qcore::{apply_channel, Channel, PureState};

fn lg(x: usize) -> f64 {
    (x as f64).log2()
}

fn pow2_half(exponent: f64) -> f64 {
    2f64.powf(-0.5 * exponent)
}

/// 2^{−½(minᵢ[H₂ⁱ − log M₀ + log M₁ⁱ] − 2 log N − 2)}.
pub fn decoupling_bound_l5(h2: &[f64], m0: usize, m1i: &[usize], n: usize) -> f64 {
    let inner = h2.iter().zip(m1i).map(|(h, &m)| h - lg(m0) + lg(m)).fold(f64::INFINITY, f64::min);
    pow2_half(inner - 2.0 * lg(n) - 2.0)
}

/// Expected marginal deviation of one encoder:
/// 2^{−½(H_min^ε(A) − log M₀ − log M₁ⁱ)} + 12ε.
pub fn marginal_bound_l7(h_min: f64, m0: usize, m1i: usize, eps: f64) -> f64 {
    pow2_half(h_min - lg(m0) - lg(m1i)) + 12.0 * eps
}

/// maxᵢ 2^{−½(−H_max^ε(A′|B)ⁱ − log M₀ + log M₁ⁱ − 2 log N − 2)}.
pub fn decoder_delta_l6(h_max: &[f64], m0: usize, m1i: &[usize], n: usize) -> f64 {
    h_max
        .iter()
        .zip(m1i)
        .map(|(h, &m)| pow2_half(-h - lg(m0) + lg(m) - 2.0 * lg(n) - 2.0))
        .fold(0.0, f64::max)
}

/// Expected decoding error δ + 2√(2δ) + 2ε.
pub fn decoder_bound_l6(delta: f64, eps: f64) -> f64 {
    delta + 2.0 * (2.0 * delta).sqrt() + 2.0 * eps
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityBound {
    pub delta1: f64,
    pub delta2: f64,
    /// Lower bound on the minimum entanglement fidelity; nontrivial when positive.
    pub fidelity: f64,
}

/// Uninformed one-shot bound 1 − 4N√(2√δ₁ + δ₂).
pub fn uninformed_bound(n: usize, m0: usize, m1: usize, h_min: f64, h_max_worst: f64, eps: f64) -> FidelityBound {
    let delta1 = 3.0 * pow2_half(h_min - lg(m0) - lg(m1)) + 24.0 * eps;
    let delta2 = 3.0 * pow2_half(-h_max_worst - 2.0 * lg(n) - lg(m0) + lg(m1)) + 24.0 * eps;
    let fidelity = 1.0 - 4.0 * n as f64 * (2.0 * delta1.sqrt() + delta2).sqrt();
    FidelityBound { delta1, delta2, fidelity }
}

/// Informed-sender bound 1 − 8N(N+2)(√δ₁ + √δ₂ + 6√ε).
pub fn informed_sender_bound(m0: usize, m1i: &[usize], h_min: &[f64], h_max: &[f64], eps: f64) -> FidelityBound {
    let n = m1i.len();
    let delta1 = h_min.iter().zip(m1i).map(|(h, &m)| pow2_half(h - lg(m0) - lg(m))).fold(0.0, f64::max);
    let delta2 = decoder_delta_l6(h_max, m0, m1i, n);
    let nf = n as f64;
    let fidelity = 1.0 - 8.0 * nf * (nf + 2.0) * (delta1.sqrt() + delta2.sqrt() + 6.0 * eps.sqrt());
    FidelityBound { delta1, delta2, fidelity }
}

/// Unassisted informed-sender bound 1 − 16N(N+2)(√δ + 6√ε) with
/// δ = maxᵢ 2^{−½(−H_max^ε(A′|B)ⁱ − log M₀ − 2 log N)}.
pub fn plain_bound(m0: usize, h_max: &[f64], eps: f64) -> FidelityBound {
    let n = h_max.len();
    let delta = h_max.iter().map(|h| pow2_half(-h - lg(m0) - 2.0 * lg(n))).fold(0.0, f64::max);
    let nf = n as f64;
    let fidelity = 1.0 - 16.0 * nf * (nf + 2.0) * (delta.sqrt() + 6.0 * eps.sqrt());
    FidelityBound { delta1: delta, delta2: 0.0, fidelity }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchEntropies {
    /// H_min^ε(A) of ρ_A.
    pub h_min: f64,
    /// H_max^ε(A′|B) of 𝒩(ρ_{AA′}).
    pub h_max: f64,
    /// False when a smoothing program was replaced by its unsmoothed bound.
    pub exact: bool,
}

pub(crate) fn branch_entropies(ch: &Channel, rho: &PureState, eps: f64) -> Result<BranchEntropies> {
    let d = rho.dims()[0];
    let a = rho.reduced(&[0])?.relayout(vec![d, 1])?;
    let hmin = smooth_h_min(&a, eps)?;
    let out = apply_channel(ch, &rho.density(), 0)?.permute(&[1, 0])?;
    let hmax = smooth_h_max(&out, eps)?;
    Ok(BranchEntropies { h_min: hmin.bits, h_max: hmax.bits, exact: hmin.exact && hmax.exact })
}

/// H₂(A′|E) of 𝒩ᶜ(ρ_{AA′}); never above the true value.
pub(crate) fn branch_collision(ch: &Channel, rho: &PureState) -> Result<f64> {
    let out = apply_channel(&ch.complementary(), &rho.density(), 0)?.permute(&[1, 0])?;
    Ok(collision_entropy(&out, None)?.bits)
}
