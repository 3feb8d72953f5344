//! Finite compound channels: the average channel, union-bound transfer,
//! discretization counting and code-parameter conversions.

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{diamond_norm, Channel};
use crate::sdp::DEFAULT_TOL;

#[derive(Debug, Clone)]
pub struct CompoundChannel {
    channels: Vec<Channel>,
    labels: Vec<String>,
}

impl CompoundChannel {
    pub fn new(channels: Vec<Channel>) -> Result<Self> {
        let labels = (0..channels.len()).map(|i| i.to_string()).collect();
        Self::with_labels(channels, labels)
    }

    pub fn with_labels(channels: Vec<Channel>, labels: Vec<String>) -> Result<Self> {
        let first = channels.first().ok_or_else(|| Error::param("compound channel needs at least one member"))?;
        let (di, dout) = (first.d_in(), first.d_out());
        if let Some((i, _)) = channels.iter().enumerate().find(|(_, c)| c.d_in() != di || c.d_out() != dout) {
            return Err(Error::dims(format!("member {i} differs in dimensions from member 0")));
        }
        if labels.len() != channels.len() {
            return Err(Error::param("one label per member required"));
        }
        Ok(CompoundChannel { channels, labels })
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn d_in(&self) -> usize {
        self.channels[0].d_in()
    }

    pub fn d_out(&self) -> usize {
        self.channels[0].d_out()
    }

    pub fn get(&self, i: usize) -> Result<&Channel> {
        self.channels.get(i).ok_or_else(|| Error::param(format!("no member {i} in a compound of {}", self.len())))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum M1Spec {
    Single(u64),
    PerIndex(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeParams {
    pub m0: u64,
    pub m1: M1Spec,
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
}

impl CodeParams {
    pub fn new(m0: u64, m1: M1Spec, n: usize, epsilon: f64, delta: f64) -> Result<Self> {
        let p = CodeParams { m0, m1, n, epsilon, delta };
        p.validate(None)?;
        Ok(p)
    }

    /// Checks M0, M1 ≥ 1 and, when `members` is given, the per-index length.
    pub fn validate(&self, members: Option<usize>) -> Result<()> {
        if self.m0 == 0 {
            return Err(Error::param("M0 must be at least 1"));
        }
        match &self.m1 {
            M1Spec::Single(0) => return Err(Error::param("M1 must be at least 1")),
            M1Spec::PerIndex(v) => {
                if v.is_empty() || v.contains(&0) {
                    return Err(Error::param("per-index M1 entries must be at least 1"));
                }
                if let Some(n) = members {
                    if v.len() != n {
                        return Err(Error::param(format!("{} M1 entries for {n} members", v.len())));
                    }
                }
            }
            M1Spec::Single(_) => {}
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::param("epsilon outside [0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::param("delta outside [0, 1]"));
        }
        Ok(())
    }

    /// M1, or the least common multiple of the per-index values.
    pub fn m1_common(&self) -> Result<u64> {
        match &self.m1 {
            M1Spec::Single(m) => Ok(*m),
            M1Spec::PerIndex(v) => lcm_all(v),
        }
    }
}

pub fn lcm_all(values: &[u64]) -> Result<u64> {
    values.iter().try_fold(1u64, |acc, &v| {
        if v == 0 {
            return Err(Error::param("lcm of zero"));
        }
        (acc / acc.gcd(&v)).checked_mul(v).ok_or_else(|| Error::param("lcm overflows u64"))
    })
}

/// (1/N) Σ Nⁱ as a Kraus union with weights 1/√N.
pub fn average_channel(pi: &CompoundChannel) -> Result<Channel> {
    let n = pi.len();
    let members: Vec<&Channel> = pi.channels.iter().collect();
    Channel::mixture(&members, &vec![1.0 / n as f64; n])
}

/// Fidelity for each member from an average fidelity: 1 − N(1 − F), floored at 0.
pub fn union_bound_transfer(avg_fidelity: f64, n: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&avg_fidelity) {
        return Err(Error::param(format!("fidelity {avg_fidelity} outside [0, 1]")));
    }
    Ok((1.0 - n as f64 * (1.0 - avg_fidelity)).max(0.0))
}

/// log₂ of the net cardinality bound (6/ν)^{2 d_AB²}.
pub fn net_cardinality_bound(nu: f64, d_ab: usize) -> Result<f64> {
    if !(nu > 0.0 && nu <= 6.0) {
        return Err(Error::param(format!("net radius {nu} outside (0, 6]")));
    }
    Ok(2.0 * (d_ab * d_ab) as f64 * (6.0 / nu).log2())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetBound {
    /// log₂ (6n²)^{2 d_AB²}, the general bound at ν = 1/n².
    pub log2_at_nu: f64,
    /// log₂ (3n)^{4 d_AB²}, the looser closed form.
    pub log2_closed_form: f64,
}

/// Both cardinality bounds at ν = 1/n².
pub fn net_cardinality_bound_n(n: u64, d_ab: usize) -> Result<NetBound> {
    if n == 0 {
        return Err(Error::param("n must be positive"));
    }
    let nf = n as f64;
    let d2 = (d_ab * d_ab) as f64;
    Ok(NetBound { log2_at_nu: 2.0 * d2 * (6.0 * nf * nf).log2(), log2_closed_form: 4.0 * d2 * (3.0 * nf).log2() })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistanceMatrix {
    /// Symmetric; NaN where the solver failed.
    pub values: Vec<Vec<f64>>,
    pub failures: Vec<(usize, usize, String)>,
}

/// Pairwise diamond distances ‖Nⁱ − Nʲ‖⋄, computed in parallel.
pub fn diamond_distance_matrix(pi: &CompoundChannel) -> DistanceMatrix {
    let n = pi.len();
    let (di, dout) = (pi.d_in(), pi.d_out());
    let chois: Vec<_> = pi.channels.iter().map(|c| c.choi_matrix()).collect();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let results: Vec<_> = pairs
        .par_iter()
        .map(|&(i, j)| (i, j, diamond_norm(&(&chois[i] - &chois[j]), di, dout, DEFAULT_TOL)))
        .collect();
    let mut values = vec![vec![0.0; n]; n];
    let mut failures = Vec::new();
    for (i, j, r) in results {
        let v = match r {
            Ok(v) => v,
            Err(e) => {
                failures.push((i, j, e.to_string()));
                f64::NAN
            }
        };
        values[i][j] = v;
        values[j][i] = v;
    }
    DistanceMatrix { values, failures }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalParams {
    /// Number of messages.
    pub messages: u64,
    /// Entanglement dimension consumed.
    pub m1: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Converted<T> {
    pub params: T,
    /// Success probability (classical) or fidelity (quantum) carried over.
    pub fidelity: f64,
    /// Set when the conversion was not exact (non-square message count).
    pub flagged: bool,
}

/// Superdense coding: (M0, M1) → (M0², M1·M0) messages and entanglement.
pub fn superdense_convert(m0: u64, m1: u64, fidelity: f64) -> Result<Converted<ClassicalParams>> {
    if m0 == 0 || m1 == 0 {
        return Err(Error::param("M0 and M1 must be at least 1"));
    }
    let messages = m0.checked_mul(m0).ok_or_else(|| Error::param("M0² overflows u64"))?;
    let m1 = m1.checked_mul(m0).ok_or_else(|| Error::param("M1·M0 overflows u64"))?;
    Ok(Converted { params: ClassicalParams { messages, m1 }, fidelity, flagged: false })
}

/// Teleportation: (M messages, M1) → (⌊√M⌋, M1·M). Non-square M is flagged.
pub fn teleport_convert(c: ClassicalParams, success: f64) -> Result<Converted<(u64, u64)>> {
    if c.messages == 0 || c.m1 == 0 {
        return Err(Error::param("message count and M1 must be at least 1"));
    }
    let root = c.messages.isqrt();
    let m1 = c.m1.checked_mul(c.messages).ok_or_else(|| Error::param("M1·M0 overflows u64"))?;
    Ok(Converted { params: (root, m1), fidelity: success, flagged: root * root != c.messages })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_match_worked_values() {
        let s = superdense_convert(4, 2, 0.9).unwrap();
        assert_eq!(s.params, ClassicalParams { messages: 16, m1: 8 });
        let t = teleport_convert(ClassicalParams { messages: 16, m1: 8 }, 0.9).unwrap();
        assert_eq!(t.params, (4, 128));
        assert!(!t.flagged);
        let f = teleport_convert(ClassicalParams { messages: 10, m1: 1 }, 1.0).unwrap();
        assert_eq!(f.params.0, 3);
        assert!(f.flagged);
        assert_eq!(superdense_convert(1, 5, 1.0).unwrap().params, ClassicalParams { messages: 1, m1: 5 });
    }

    #[test]
    fn lcm_of_per_index_dimensions() {
        assert_eq!(lcm_all(&[2, 3, 4]).unwrap(), 12);
        let p = CodeParams::new(2, M1Spec::PerIndex(vec![2, 3]), 1, 0.0, 0.1).unwrap();
        assert_eq!(p.m1_common().unwrap(), 6);
        assert!(p.validate(Some(3)).is_err());
    }

    #[test]
    fn union_bound_values() {
        assert_eq!(union_bound_transfer(1.0, 7).unwrap(), 1.0);
        assert!((union_bound_transfer(0.99, 5).unwrap() - 0.95).abs() < 1e-12);
        assert_eq!(union_bound_transfer(0.5, 3).unwrap(), 0.0);
    }

    #[test]
    fn net_bounds() {
        assert_eq!(net_cardinality_bound(6.0, 4).unwrap(), 0.0);
        assert!((net_cardinality_bound(1.0, 4).unwrap() - 32.0 * 6f64.log2()).abs() < 1e-12);
        let b = net_cardinality_bound_n(10, 4).unwrap();
        assert!((b.log2_at_nu - net_cardinality_bound(0.01, 4).unwrap()).abs() < 1e-9);
        assert!(b.log2_at_nu <= b.log2_closed_form);
        assert!(net_cardinality_bound(0.0, 2).is_err());
    }
}
