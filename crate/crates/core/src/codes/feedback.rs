use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use super::oneshot::build_is_code;
use crate::compound::{CodeParams, CompoundChannel, M1Spec};
use crate::error::{Error, Result};
use crate::linalg::{pinv_power, trace_norm, CMat};
use crate::qcore::{apply_channel, max_entangled, Channel, PureState};
use crate::rng::SeedStream;

/// Largest side of the m′-copy output states handed to the measurement.
pub const MAX_PGM_DIM: usize = 1024;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PgmEstimate {
    /// m′ = m·L copies measured.
    pub copies: usize,
    /// P(guess = j | member i) of the pretty good measurement.
    pub confusion: Vec<Vec<f64>>,
    /// P(guess = i | member i).
    pub success: Vec<f64>,
    /// Observed identification frequencies over the trials.
    pub empirical: Vec<f64>,
    pub trials: usize,
    /// Member pairs whose per-use outputs coincide.
    pub indistinguishable: Vec<(usize, usize)>,
    pub seed: u64,
}

fn pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

fn tensor_power(m: &CMat, k: usize) -> CMat {
    (1..k).fold(m.clone(), |acc, _| acc.kronecker(m))
}

/// Pretty good measurement discriminating the outputs (𝒩ⁱ(ω))^{⊗m′} with
/// m′ = m·N(N−1)/2 under equal priors. The per-use input ω defaults to Φ⁺ on
/// (A, A′); a given state must have the channel input as its first system.
pub fn estimate_channel_pgm(
    pi: &CompoundChannel,
    m: usize,
    input: Option<&PureState>,
    trials: usize,
    seed: u64,
) -> Result<PgmEstimate> {
    let n = pi.len();
    let copies = m * pairs(n);
    let omega = match input {
        Some(s) => s.clone(),
        None => max_entangled(pi.d_in())?,
    };
    if omega.dims()[0] != pi.d_in() {
        return Err(Error::dims("per-use input must start with the channel input system"));
    }
    let outs = pi
        .channels()
        .iter()
        .map(|c| apply_channel(c, &omega.density(), 0).map(|d| d.into_matrix()))
        .collect::<Result<Vec<_>>>()?;
    let mut indistinguishable = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if trace_norm(&(&outs[i] - &outs[j])) <= 1e-10 {
                indistinguishable.push((i, j));
            }
        }
    }
    let side = outs[0].nrows().checked_pow(copies as u32).unwrap_or(usize::MAX);
    if side > MAX_PGM_DIM {
        return Err(Error::param(format!("{copies} copies give dimension {side} beyond {MAX_PGM_DIM}")));
    }
    let confusion = if copies == 0 {
        vec![vec![1.0 / n as f64; n]; n]
    } else {
        let states: Vec<CMat> = outs.iter().map(|o| tensor_power(o, copies).scale(1.0 / n as f64)).collect();
        let total = states.iter().fold(CMat::zeros(side, side), |acc, s| acc + s);
        let w = pinv_power(&total, -0.5, 1e-12);
        let povm: Vec<CMat> = states.iter().map(|s| &w * s * &w).collect();
        states
            .iter()
            .map(|s| povm.iter().map(|e| (e * s).trace().re.max(0.0) * n as f64).collect())
            .collect::<Vec<Vec<f64>>>()
    };
    let success: Vec<f64> = (0..n).map(|i| confusion[i][i]).collect();
    let stream = SeedStream::new(seed);
    let empirical = (0..n)
        .map(|i| {
            if trials == 0 {
                return Ok(f64::NAN);
            }
            let dist = WeightedIndex::new(&confusion[i]).map_err(|e| Error::param(e.to_string()))?;
            let mut rng = stream.child(i as u64).rng();
            let hits = (0..trials).filter(|_| dist.sample(&mut rng) == i).count();
            Ok(hits as f64 / trials as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PgmEstimate { copies, confusion, success, empirical, trials, indistinguishable, seed })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolTranscript {
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub t: usize,
    /// Channel uses per block of the phase-two code.
    pub block: usize,
    /// Blocks of the phase-two code sent in the t uses.
    pub repetitions: usize,
    pub estimation: PgmEstimate,
    /// F(encoder j, member i) of one block, indexed [i][j].
    pub block_fidelity: Vec<Vec<f64>>,
    /// Phase-two fidelity with the correct encoder, F_ii^repetitions.
    pub code_fidelity: Vec<f64>,
    /// Σ_j P(j|i) F_ij^repetitions.
    pub total_fidelity: Vec<f64>,
    /// P(i|i) · F_ii^repetitions.
    pub product_fidelity: Vec<f64>,
    pub min_total_fidelity: f64,
    /// repetitions · log M₀ / n.
    pub rate: f64,
    pub seed: u64,
}

fn channel_power(c: &Channel, k: usize) -> Channel {
    (1..k).fold(c.clone(), |acc, _| acc.tensor(c))
}

/// Two-phase protocol over n uses: m·L uses estimate the member, the estimate
/// is fed back, and t = n − mL uses carry repetitions of the code for the
/// estimated member on `block` uses at a time with Φ⁺ inputs.
pub fn feedback_protocol_sim(
    pi: &CompoundChannel,
    n: usize,
    params: &CodeParams,
    block: usize,
    trials: usize,
    seed: u64,
) -> Result<ProtocolTranscript> {
    params.validate(Some(pi.len()))?;
    if block == 0 {
        return Err(Error::param("block length must be positive"));
    }
    let members = pi.len();
    let l = pairs(members);
    let m = n.isqrt();
    let t = n - m * l;
    let repetitions = t / block;
    if repetitions == 0 {
        return Err(Error::param(format!("no room for a block of {block} uses in t = {t}")));
    }
    let stream = SeedStream::new(seed);
    let estimation = estimate_channel_pgm(pi, m, None, trials, stream.child(0).stream)?;

    let powered: Vec<Channel> = pi.channels().iter().map(|c| channel_power(c, block)).collect();
    let d = powered[0].d_in();
    let phi = max_entangled(d)?;
    let m1i: Vec<usize> = match &params.m1 {
        M1Spec::Single(v) => vec![*v as usize; members],
        M1Spec::PerIndex(v) => v.iter().map(|&x| x as usize).collect(),
    };
    // Both parties hold the fed-back estimate j, so code j has its own decoder.
    let codes = (0..members)
        .map(|j| {
            let single = CompoundChannel::new(vec![powered[j].clone()])?;
            build_is_code(&single, std::slice::from_ref(&phi), params.m0 as usize, &m1i[j..=j], params.epsilon, stream.child(1).child(j as u64).stream)
        })
        .collect::<Result<Vec<_>>>()?;
    let block_fidelity = (0..members)
        .map(|i| {
            (0..members)
                .map(|j| codes[j].decoder.fidelity(&codes[j].encoders[0], &powered[i]))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let reps = repetitions as i32;
    let code_fidelity: Vec<f64> = (0..members).map(|i| block_fidelity[i][i].powi(reps)).collect();
    let total_fidelity: Vec<f64> = (0..members)
        .map(|i| {
            let s: f64 = (0..members).map(|j| estimation.confusion[i][j] * block_fidelity[i][j].powi(reps)).sum();
            s.clamp(0.0, 1.0)
        })
        .collect();
    let product_fidelity = (0..members).map(|i| estimation.success[i] * code_fidelity[i]).collect();
    Ok(ProtocolTranscript {
        n,
        m,
        l,
        t,
        block,
        repetitions,
        min_total_fidelity: total_fidelity.iter().copied().fold(f64::INFINITY, f64::min),
        estimation,
        block_fidelity,
        code_fidelity,
        total_fidelity,
        product_fidelity,
        rate: repetitions as f64 * (params.m0 as f64).log2() / n as f64,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{basis_state, pauli_x};

    #[test]
    fn orthogonal_outputs_are_identified() {
        let pi = CompoundChannel::new(vec![Channel::identity(2).unwrap(), Channel::unitary(pauli_x()).unwrap()]).unwrap();
        let zero = basis_state(2, 0).unwrap();
        let est = estimate_channel_pgm(&pi, 1, Some(&zero), 100, 1).unwrap();
        assert!(est.success.iter().all(|&p| (p - 1.0).abs() < 1e-10), "{est:?}");
        assert_eq!(est.empirical, vec![1.0, 1.0]);
    }

    #[test]
    fn single_member_is_certain() {
        let pi = CompoundChannel::new(vec![Channel::depolarizing(2, 0.3).unwrap()]).unwrap();
        let est = estimate_channel_pgm(&pi, 3, None, 10, 1).unwrap();
        assert_eq!(est.copies, 0);
        assert_eq!(est.success, vec![1.0]);
    }

    #[test]
    fn identical_members_are_flagged() {
        let c = Channel::dephasing(2, 0.2).unwrap();
        let pi = CompoundChannel::new(vec![c.clone(), c]).unwrap();
        let est = estimate_channel_pgm(&pi, 1, None, 10, 1).unwrap();
        assert_eq!(est.indistinguishable, vec![(0, 1)]);
    }

    #[test]
    fn distinguishable_pair_with_perfect_codes() {
        let pi = CompoundChannel::new(vec![Channel::identity(2).unwrap(), Channel::unitary(pauli_x()).unwrap()]).unwrap();
        let params = CodeParams::new(2, M1Spec::Single(1), 12, 0.0, 0.1).unwrap();
        let tr = feedback_protocol_sim(&pi, 12, &params, 1, 100, 2).unwrap();
        assert!(tr.min_total_fidelity > 1.0 - 1e-9, "{tr:?}");
    }

    #[test]
    fn single_member_skips_estimation() {
        let pi = CompoundChannel::new(vec![Channel::identity(2).unwrap()]).unwrap();
        let params = CodeParams::new(2, M1Spec::Single(1), 5, 0.0, 0.1).unwrap();
        let tr = feedback_protocol_sim(&pi, 5, &params, 1, 10, 2).unwrap();
        assert_eq!((tr.l, tr.t), (0, 5));
        assert!(tr.min_total_fidelity > 1.0 - 1e-9);
    }

    #[test]
    fn transcript_accounting() {
        let pi =
            CompoundChannel::new(vec![Channel::dephasing(2, 0.5).unwrap(), Channel::depolarizing(2, 0.5).unwrap()])
                .unwrap();
        let params = CodeParams::new(2, M1Spec::Single(1), 12, 0.0, 0.1).unwrap();
        let tr = feedback_protocol_sim(&pi, 12, &params, 1, 200, 7).unwrap();
        assert_eq!((tr.m, tr.l, tr.t, tr.repetitions), (3, 1, 9, 9));
        for i in 0..2 {
            assert!(tr.total_fidelity[i] >= tr.product_fidelity[i] - 1e-9);
            assert!((0.0..=1.0).contains(&tr.total_fidelity[i]));
        }
        assert!((tr.rate - 9.0 / 12.0).abs() < 1e-12);
    }
}
