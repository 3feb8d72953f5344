use super::bounds::{branch_entropies, decoder_bound_l6, plain_bound};
use super::encoder::{build_oa, normalize_encoder, Encoder};
use super::joint::{padded_dilations, Joint};
use super::oneshot::{distinct, OneShotReport, MAX_ATTEMPTS};
use crate::compound::CompoundChannel;
use crate::error::{Error, Result};
use crate::linalg::{r, CMat};
use crate::qcore::{haar_unitary, Channel, PureState};
use crate::rng::SeedStream;

/// Encoders √d_A O(ρⁱ) √N ⟨i|U|0⟩ J for a unitary U on A⊗I, J: A₀ → A.
fn flagged_encoders(states: &[PureState], m0: usize, u: &CMat) -> Result<Vec<(CMat, CMat)>> {
    let n = states.len();
    let d = states[0].dims()[0];
    let sn = (n as f64).sqrt();
    states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let block = CMat::from_fn(d, m0, |a, k| u[(a * n + i, k * n)] * r(sn));
            let o = build_oa(s)?.scale((d as f64).sqrt());
            Ok((block.clone(), o * block))
        })
        .collect()
}

/// Unassisted informed-sender experiment through the flag-extended channel
/// 𝒯(·) = Σᵢ 𝒩ⁱ(⟨i|·|i⟩) with input (1/N) Σ ρⁱ⊗|i⟩⟨i|. Encoders are the
/// blocks of one Haar unitary on A⊗I, normalized per branch; the decoder is
/// the Uhlmann decoder of the flagged map.
pub fn plain_is_experiment(
    pi: &CompoundChannel,
    states: &[PureState],
    m0: usize,
    eps: f64,
    seed: u64,
) -> Result<OneShotReport> {
    if states.len() != pi.len() {
        return Err(Error::param(format!("{} states for {} members", states.len(), pi.len())));
    }
    let d = pi.d_in();
    if m0 == 0 || m0 > d {
        return Err(Error::param(format!("M0 = {m0} must lie in [1, d_A = {d}]")));
    }
    if let Some(s) = states.iter().find(|s| s.dims() != [d, d]) {
        return Err(Error::dims(format!("states must live on ({d}, {d}), got {:?}", s.dims())));
    }
    let (reps, class_of) = distinct(pi.channels(), Some(states));
    let n = reps.len();
    let chans: Vec<&Channel> = reps.iter().map(|&i| &pi.channels()[i]).collect();
    let st: Vec<PureState> = reps.iter().map(|&i| states[i].clone()).collect();
    let entropies =
        chans.iter().zip(&st).map(|(c, s)| branch_entropies(c, s, eps)).collect::<Result<Vec<_>>>()?;
    let hmax: Vec<f64> = entropies.iter().map(|e| e.h_max).collect();
    let bound = plain_bound(m0, &hmax, eps);
    let threshold = (n + 2) as f64 * decoder_bound_l6(bound.delta1, eps);

    let (vs, _) = padded_dilations(&chans);
    let stream = SeedStream::new(seed);
    let mut best: Option<(f64, OneShotReport)> = None;
    let mut attempts = 0;
    for attempt in 0..MAX_ATTEMPTS {
        attempts = attempt + 1;
        let u = haar_unitary(d * n, &stream.child(attempt as u64));
        let parts = flagged_encoders(&st, m0, &u)?;
        let dil: Vec<CMat> = vs
            .iter()
            .zip(&st)
            .map(|(v, s)| Ok(v * build_oa(s)?.scale((d as f64).sqrt())))
            .collect::<Result<_>>()?;
        let embed = parts.iter().map(|(b, _)| b.clone()).collect();
        let joint = Joint::new(dil, embed, vec![1; n], false, m0, pi.d_out(), 1)?;
        let ud = joint.decoder()?;
        let decoder_deviation = joint.decoded_deviation(&ud.decoder)?;
        let ratio = decoder_deviation / threshold;
        let accepted = ratio <= 1.0;
        if !accepted && best.as_ref().is_some_and(|(r, _)| *r <= ratio) {
            continue;
        }
        let raw = parts.into_iter().map(|(_, x)| Encoder::new(x, d, 1)).collect::<Result<Vec<_>>>()?;
        let normalized = raw
            .iter()
            .map(|e| normalize_encoder(e).map_err(|_| Error::param("degenerate zero-trace branch")))
            .collect::<Result<Vec<_>>>()?;
        let fidelities = (0..pi.len())
            .map(|i| ud.decoder.fidelity(&normalized[class_of[i]].encoder, &pi.channels()[i]))
            .collect::<Result<Vec<_>>>()?;
        let report = OneShotReport {
            min_fidelity: fidelities.iter().copied().fold(f64::INFINITY, f64::min),
            fidelities,
            bound,
            entropies: entropies.clone(),
            decoupling_deviation: ud.deviation,
            decoder_deviation,
            decoder_threshold: Some(threshold),
            marginal_deviations: raw.iter().map(|e| e.marginal_deviation()).collect(),
            marginal_thresholds: Vec::new(),
            normalization_distances: normalized.iter().map(|x| x.distance).collect(),
            attempts,
            accepted,
            distinct_members: n,
            seed,
        };
        best = Some((ratio, report));
        if accepted {
            break;
        }
    }
    let (_, mut report) = best.expect("at least one attempt");
    report.attempts = attempts;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::max_entangled;

    #[test]
    fn identity_is_recovered() {
        let pi = CompoundChannel::new(vec![Channel::identity(2).unwrap()]).unwrap();
        let r = plain_is_experiment(&pi, &[max_entangled(2).unwrap()], 2, 0.0, 3).unwrap();
        assert!(r.min_fidelity > 0.99, "{r:?}");
    }

    #[test]
    fn fully_depolarizing_is_no_better_than_guessing() {
        let pi = CompoundChannel::new(vec![Channel::fully_depolarizing(2).unwrap()]).unwrap();
        let r = plain_is_experiment(&pi, &[max_entangled(2).unwrap()], 2, 0.0, 3).unwrap();
        assert!(r.min_fidelity <= 0.25 + 1e-9, "{}", r.min_fidelity);
        assert!(r.bound.fidelity < 0.0);
    }

    #[test]
    fn duplicate_branches_match_single_branch() {
        let ch = Channel::depolarizing(2, 0.1).unwrap();
        let phi = max_entangled(2).unwrap();
        let one = CompoundChannel::new(vec![ch.clone()]).unwrap();
        let two = CompoundChannel::new(vec![ch.clone(), ch]).unwrap();
        let a = plain_is_experiment(&one, std::slice::from_ref(&phi), 2, 0.0, 5).unwrap();
        let b = plain_is_experiment(&two, &[phi.clone(), phi], 2, 0.0, 5).unwrap();
        assert!((a.min_fidelity - b.fidelities[0]).abs() < 1e-9);
        assert!((b.fidelities[0] - b.fidelities[1]).abs() < 1e-9);
    }
}
