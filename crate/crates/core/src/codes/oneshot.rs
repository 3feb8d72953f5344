use serde::{Deserialize, Serialize};

use super::bounds::{
    branch_entropies, decoder_bound_l6, decoder_delta_l6, informed_sender_bound, marginal_bound_l7,
    uninformed_bound, BranchEntropies, FidelityBound,
};
use super::encoder::{build_is_encoder, normalize_encoder, Encoder, IsEncoderSpec};
use super::joint::{Decoder, Joint};
use crate::compound::CompoundChannel;
use crate::error::{Error, Result};
use crate::linalg::max_abs;
use crate::qcore::{Channel, PureState};
use crate::rng::SeedStream;

pub const MAX_ATTEMPTS: usize = 50;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OneShotReport {
    /// Entanglement fidelity for each member, in input order.
    pub fidelities: Vec<f64>,
    pub min_fidelity: f64,
    pub bound: FidelityBound,
    /// Entropies of each distinct member.
    pub entropies: Vec<BranchEntropies>,
    /// ‖T̄ᶜ(Φ⁺⊗τ) − ω⊗τ_R‖₁ at the chosen unitaries.
    pub decoupling_deviation: f64,
    /// ‖D∘T̄(Φ⁺⊗Φ⁺) − Φ⁺‖₁ before the encoders are normalized.
    pub decoder_deviation: f64,
    pub decoder_threshold: Option<f64>,
    /// ‖tr_A ℰⁱ(Φ⁺⊗Φ⁺) − τ_{RB₁}‖₁ per distinct member.
    pub marginal_deviations: Vec<f64>,
    pub marginal_thresholds: Vec<f64>,
    /// ‖(Ẽⁱ − ℰⁱ)(Φ⁺⊗Φ⁺)‖₁ per distinct member.
    pub normalization_distances: Vec<f64>,
    pub attempts: usize,
    /// False when no draw met the thresholds within the attempt cap; the best
    /// draw is reported instead.
    pub accepted: bool,
    pub distinct_members: usize,
    pub seed: u64,
}

/// Representatives of members that differ as channels (or in their input
/// state), and the class of every member.
pub(crate) fn distinct(channels: &[Channel], states: Option<&[PureState]>) -> (Vec<usize>, Vec<usize>) {
    let chois: Vec<_> = channels.iter().map(|c| c.choi_matrix()).collect();
    let mut reps: Vec<usize> = Vec::new();
    let mut class = Vec::with_capacity(channels.len());
    for i in 0..channels.len() {
        let same = reps.iter().position(|&j| {
            max_abs(&(&chois[i] - &chois[j])) <= 1e-12
                && states.is_none_or(|s| (s[i].vector() - s[j].vector()).norm() <= 1e-12)
        });
        match same {
            Some(k) => class.push(k),
            None => {
                class.push(reps.len());
                reps.push(i);
            }
        }
    }
    (reps, class)
}

/// A built code: one trace non-increasing encoder per distinct member and a
/// universal decoder.
#[derive(Debug, Clone)]
pub struct IsCode {
    pub encoders: Vec<Encoder>,
    pub decoder: Decoder,
    /// Distinct-member index of every member.
    pub class_of: Vec<usize>,
    pub report: OneShotReport,
}

impl IsCode {
    /// Fidelity when the sender uses the encoder for member `j` and member `i` acts.
    pub fn cross_fidelity(&self, pi: &CompoundChannel, j: usize, i: usize) -> Result<f64> {
        self.decoder.fidelity(&self.encoders[self.class_of[j]], pi.get(i)?)
    }
}

fn check_sizes(pi: &CompoundChannel, per_member: usize, what: &str) -> Result<()> {
    if per_member != pi.len() {
        return Err(Error::param(format!("{} {what} for {} members", per_member, pi.len())));
    }
    Ok(())
}

/// Informed-sender code with per-member input states ρⁱ and splits M₁ⁱ.
pub fn build_is_code(
    pi: &CompoundChannel,
    states: &[PureState],
    m0: usize,
    m1i: &[usize],
    eps: f64,
    seed: u64,
) -> Result<IsCode> {
    check_sizes(pi, states.len(), "states")?;
    check_sizes(pi, m1i.len(), "M1 values")?;
    let (reps, class_of) = distinct(pi.channels(), Some(states));
    let n = reps.len();
    let chans: Vec<&Channel> = reps.iter().map(|&i| &pi.channels()[i]).collect();
    let st: Vec<PureState> = reps.iter().map(|&i| states[i].clone()).collect();
    let mi: Vec<usize> = reps.iter().map(|&i| m1i[i]).collect();
    if let Some((i, m)) = mi.iter().enumerate().find(|(_, &m)| m0 * m > pi.d_in()) {
        return Err(Error::param(format!("M0·M1 = {} exceeds d_A = {} at member {i}", m0 * m, pi.d_in())));
    }
    let entropies =
        chans.iter().zip(&st).map(|(c, s)| branch_entropies(c, s, eps)).collect::<Result<Vec<_>>>()?;
    let hmin: Vec<f64> = entropies.iter().map(|e| e.h_min).collect();
    let hmax: Vec<f64> = entropies.iter().map(|e| e.h_max).collect();
    let bound = informed_sender_bound(m0, &mi, &hmin, &hmax, eps);
    let k = (n + 2) as f64;
    let marginal_thresholds: Vec<f64> =
        hmin.iter().zip(&mi).map(|(&h, &m)| k * marginal_bound_l7(h, m0, m, eps)).collect();
    let decoder_threshold = k * decoder_bound_l6(decoder_delta_l6(&hmax, m0, &mi, n), eps);

    let stream = SeedStream::new(seed);
    let idx: Vec<usize> = (0..n).collect();
    let mut best: Option<(f64, IsCode)> = None;
    let mut attempts = 0;
    for attempt in 0..MAX_ATTEMPTS {
        attempts = attempt + 1;
        let spec = IsEncoderSpec::sample(st.clone(), m0, mi.clone(), &stream.child(attempt as u64))?;
        let raw = (0..n).map(|i| build_is_encoder(&spec, i)).collect::<Result<Vec<_>>>()?;
        let joint = Joint::ansatz(&chans, &spec, &idx, false)?;
        let ud = joint.decoder()?;
        let decoder_deviation = joint.decoded_deviation(&ud.decoder)?;
        let marginal: Vec<f64> = raw.iter().map(|e| e.marginal_deviation()).collect();
        let ratio = marginal
            .iter()
            .zip(&marginal_thresholds)
            .map(|(d, t)| d / t)
            .fold(decoder_deviation / decoder_threshold, f64::max);
        let accepted = ratio <= 1.0;
        if !accepted && best.as_ref().is_some_and(|(r, _)| *r <= ratio) {
            continue;
        }
        let normalized = raw
            .iter()
            .map(|e| normalize_encoder(e).map_err(|_| Error::param("degenerate zero-trace branch")))
            .collect::<Result<Vec<_>>>()?;
        let encoders: Vec<Encoder> = normalized.iter().map(|x| x.encoder.clone()).collect();
        let fidelities = (0..pi.len())
            .map(|i| ud.decoder.fidelity(&encoders[class_of[i]], &pi.channels()[i]))
            .collect::<Result<Vec<_>>>()?;
        let report = OneShotReport {
            min_fidelity: fidelities.iter().copied().fold(f64::INFINITY, f64::min),
            fidelities,
            bound,
            entropies: entropies.clone(),
            decoupling_deviation: ud.deviation,
            decoder_deviation,
            decoder_threshold: Some(decoder_threshold),
            marginal_deviations: marginal,
            marginal_thresholds: marginal_thresholds.clone(),
            normalization_distances: normalized.iter().map(|x| x.distance).collect(),
            attempts,
            accepted,
            distinct_members: n,
            seed,
        };
        let code = IsCode { encoders, decoder: ud.decoder, class_of: class_of.clone(), report };
        best = Some((ratio, code));
        if accepted {
            break;
        }
    }
    let (_, mut code) = best.expect("at least one attempt");
    code.report.attempts = attempts;
    Ok(code)
}

/// Informed-sender one-shot code: resamples the unitaries until the marginal
/// and decoding deviations are within N+2 times their expectations (at most
/// [`MAX_ATTEMPTS`] draws), normalizes the encoders and decodes universally.
pub fn run_one_shot_is(
    pi: &CompoundChannel,
    states: &[PureState],
    m0: usize,
    m1i: &[usize],
    eps: f64,
    seed: u64,
) -> Result<OneShotReport> {
    Ok(build_is_code(pi, states, m0, m1i, eps, seed)?.report)
}

/// Code for the average channel: one encoder from ρ shared by every member
/// and the decoder of the average map. Fidelities are measured per member.
pub fn run_one_shot_uninformed(
    pi: &CompoundChannel,
    rho: &PureState,
    m0: usize,
    m1: usize,
    eps: f64,
    seed: u64,
) -> Result<OneShotReport> {
    if m0 == 0 || m1 == 0 {
        return Err(Error::param("M0 and M1 must be at least 1"));
    }
    let (reps, _) = distinct(pi.channels(), None);
    let n = reps.len();
    let chans: Vec<&Channel> = reps.iter().map(|&i| &pi.channels()[i]).collect();
    let entropies =
        chans.iter().map(|c| branch_entropies(c, rho, eps)).collect::<Result<Vec<_>>>()?;
    let worst = entropies.iter().map(|e| e.h_max).fold(f64::NEG_INFINITY, f64::max);
    let bound = uninformed_bound(n, m0, m1, entropies[0].h_min, worst, eps);

    let spec = IsEncoderSpec::truncating(rho.clone(), m0, m1, &SeedStream::new(seed))?;
    let joint = Joint::ansatz(&chans, &spec, &vec![0; n], true)?;
    let ud = joint.decoder()?;
    let decoder_deviation = joint.decoded_deviation(&ud.decoder)?;
    let raw = build_is_encoder(&spec, 0)?;
    let normalized = normalize_encoder(&raw).map_err(|_| Error::param("degenerate zero-trace branch"))?;
    let fidelities = pi
        .channels()
        .iter()
        .map(|c| ud.decoder.fidelity(&normalized.encoder, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(OneShotReport {
        min_fidelity: fidelities.iter().copied().fold(f64::INFINITY, f64::min),
        fidelities,
        bound,
        entropies,
        decoupling_deviation: ud.deviation,
        decoder_deviation,
        decoder_threshold: None,
        marginal_deviations: vec![raw.marginal_deviation()],
        marginal_thresholds: Vec::new(),
        normalization_distances: vec![normalized.distance],
        attempts: 1,
        accepted: true,
        distinct_members: n,
        seed,
    })
}
