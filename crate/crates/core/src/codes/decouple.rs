use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::{branch_collision, decoupling_bound_l5};
use super::encoder::IsEncoderSpec;
use super::joint::Joint;
use crate::compound::CompoundChannel;
use crate::error::{Error, Result};
use crate::qcore::Channel;
use crate::rng::SeedStream;

pub const DEFAULT_SAMPLES: usize = 200;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecouplingReport {
    pub empirical_mean_deviation: f64,
    pub stderr: f64,
    pub sample_count: usize,
    pub bound_value: f64,
    /// Collision entropies H₂(A′|E) of each branch feeding the bound.
    pub collision_entropies: Vec<f64>,
    pub deviations: Vec<f64>,
    pub seed: u64,
    /// mean ≤ bound + 3·stderr.
    pub pass: bool,
}

/// Mean and standard error of the mean.
pub(crate) fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Samples independent Haar tuples {Uⁱ} and measures ‖T̄ᶜ(Φ⁺⊗τ) − ω⊗τ_R‖₁
/// for each, against the collision-entropy decoupling bound.
pub fn mc_decoupling_l5(pi: &CompoundChannel, spec: &IsEncoderSpec, samples: usize, seed: u64) -> Result<DecouplingReport> {
    if samples == 0 {
        return Err(Error::Budget("at least one sample required".into()));
    }
    if pi.len() != spec.len() {
        return Err(Error::param(format!("{} members but {} encoder indices", pi.len(), spec.len())));
    }
    if spec.d_a() > 8 || pi.len() > 4 {
        return Err(Error::param("decoupling experiment limited to d_A ≤ 8 and N ≤ 4"));
    }
    let h2 = pi
        .channels()
        .iter()
        .zip(spec.states())
        .map(|(ch, rho)| branch_collision(ch, rho))
        .collect::<Result<Vec<_>>>()?;
    let bound = decoupling_bound_l5(&h2, spec.m0(), spec.m1i(), pi.len());
    let chans: Vec<&Channel> = pi.channels().iter().collect();
    let idx: Vec<usize> = (0..spec.len()).collect();
    let stream = SeedStream::new(seed);
    let deviations = (0..samples)
        .into_par_iter()
        .map(|k| {
            let s = spec.resampled(&stream.child(k as u64));
            Joint::ansatz(&chans, &s, &idx, false)?.decoupling_deviation()
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean, stderr) = mean_stderr(&deviations);
    Ok(DecouplingReport {
        empirical_mean_deviation: mean,
        stderr,
        sample_count: samples,
        bound_value: bound,
        collision_entropies: h2,
        deviations,
        seed,
        pass: mean <= bound + 3.0 * stderr,
    })
}
