use crate::error::Result;
use crate::linalg::{eigvalsh, shannon_bits};
use crate::qcore::DensityOperator;

pub fn von_neumann_spectrum(values: &[f64]) -> f64 {
    let clipped: Vec<f64> = values.iter().map(|&x| x.max(0.0)).collect();
    shannon_bits(&clipped)
}

/// H of the marginal on `subsystems` (all of them when empty).
pub fn von_neumann(rho: &DensityOperator, subsystems: &[usize]) -> Result<f64> {
    rho.require_normalized()?;
    if subsystems.is_empty() {
        return Ok(von_neumann_spectrum(&eigvalsh(rho.matrix())));
    }
    let m = rho.partial_trace(subsystems)?;
    Ok(von_neumann_spectrum(&eigvalsh(m.matrix())))
}

/// H(A|B) = H(AB) − H(B).
pub fn cond_entropy(rho: &DensityOperator, a: &[usize], b: &[usize]) -> Result<f64> {
    let ab: Vec<usize> = a.iter().chain(b).copied().collect();
    Ok(von_neumann(rho, &ab)? - von_neumann(rho, b)?)
}

/// I(A:B) = H(A) + H(B) − H(AB).
pub fn mutual_info(rho: &DensityOperator, a: &[usize], b: &[usize]) -> Result<f64> {
    let ab: Vec<usize> = a.iter().chain(b).copied().collect();
    Ok(von_neumann(rho, a)? + von_neumann(rho, b)? - von_neumann(rho, &ab)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{max_entangled, max_mixed};

    #[test]
    fn maximally_mixed_and_entangled() {
        for d in 2..5 {
            let t = max_mixed(d).unwrap();
            assert!((von_neumann(&t, &[]).unwrap() - (d as f64).log2()).abs() < 1e-12);
            let phi = max_entangled(d).unwrap().density();
            let l = (d as f64).log2();
            assert!((mutual_info(&phi, &[0], &[1]).unwrap() - 2.0 * l).abs() < 1e-10);
            assert!((cond_entropy(&phi, &[0], &[1]).unwrap() + l).abs() < 1e-10);
        }
    }
}
