use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::h2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AepDelta {
    pub value: f64,
    /// Whether n ≥ (8/5)·log(2/ε²), the range in which the bound is valid.
    pub precondition_met: bool,
}

/// δ(ε, d_A) = 4·log(2√d_A + 1)·√(log(2/ε²)); callers divide by √n.
pub fn aep_delta(eps: f64, d_a: usize, n: usize) -> Result<AepDelta> {
    if !(eps > 0.0) || d_a == 0 {
        return Err(Error::param("aep_delta needs ε > 0 and d_A ≥ 1"));
    }
    let l = (2.0 / (eps * eps)).log2();
    let value = 4.0 * (2.0 * (d_a as f64).sqrt() + 1.0).log2() * l.max(0.0).sqrt();
    Ok(AepDelta { value, precondition_met: (n as f64) >= 1.6 * l })
}

fn check_t(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::param(format!("trace distance {t} outside [0, 1]")));
    }
    Ok(())
}

/// Continuity bound for H(A|B): 2T·log d_A + (1+T)·h(T/(1+T)).
pub fn fannes_cond(t: f64, d_a: usize) -> Result<f64> {
    check_t(t)?;
    Ok(2.0 * t * (d_a as f64).log2() + (1.0 + t) * h2(t / (1.0 + t)))
}

/// Continuity bound for I(A:B): 2T·log min(d_A, d_B) + 2(1+T)·h(T/(1+T)).
pub fn fannes_mi(t: f64, d_a: usize, d_b: usize) -> Result<f64> {
    check_t(t)?;
    Ok(2.0 * t * (d_a.min(d_b) as f64).log2() + 2.0 * (1.0 + t) * h2(t / (1.0 + t)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(aep_delta(2f64.sqrt(), 2, 1).unwrap().value, 0.0);
        let d = aep_delta(0.1, 2, 100).unwrap();
        let want = 4.0 * (2.0 * 2f64.sqrt() + 1.0).log2() * 200f64.log2().sqrt();
        assert!((d.value - want).abs() < 1e-12);
        assert_eq!(d.value, aep_delta(0.1, 2, 200).unwrap().value);
        assert!(!aep_delta(0.1, 2, 5).unwrap().precondition_met);
        assert_eq!(fannes_cond(0.0, 4).unwrap(), 0.0);
        assert!((fannes_cond(1.0, 2).unwrap() - 4.0).abs() < 1e-12);
        assert!(fannes_cond(1.5, 2).is_err());
    }
}
