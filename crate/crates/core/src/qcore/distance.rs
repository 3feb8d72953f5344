use super::state::{psd_tol, DensityOperator};
use crate::error::{Error, Result};
use crate::linalg::{check_square, eigh, singular_values, sqrt_psd, CMat};

pub use crate::linalg::trace_norm;

fn check_psd(m: &CMat) -> Result<()> {
    let n = check_square(m, "state")?;
    let lo = eigh(m).min();
    if lo < -psd_tol(n) {
        return Err(Error::NegativeEigenvalue(lo));
    }
    Ok(())
}

/// F(ρ,σ) = ‖√ρ√σ‖₁² for PSD operators (squared convention).
pub fn fidelity_mat(rho: &CMat, sigma: &CMat) -> Result<f64> {
    if rho.shape() != sigma.shape() {
        return Err(Error::dims("fidelity arguments differ in shape"));
    }
    check_psd(rho)?;
    check_psd(sigma)?;
    let s: f64 = singular_values(&(sqrt_psd(rho) * sqrt_psd(sigma))).iter().sum();
    Ok(s * s)
}

pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    fidelity_mat(rho.matrix(), sigma.matrix())
}

/// F_* = (√F + √((1−tr ρ)(1−tr σ)))².
pub fn generalized_fidelity_mat(rho: &CMat, sigma: &CMat) -> Result<f64> {
    let f = fidelity_mat(rho, sigma)?;
    let a = (1.0 - rho.trace().re).max(0.0);
    let b = (1.0 - sigma.trace().re).max(0.0);
    let g = f.sqrt() + (a * b).sqrt();
    Ok(g * g)
}

pub fn generalized_fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    generalized_fidelity_mat(rho.matrix(), sigma.matrix())
}

pub fn purified_distance_mat(rho: &CMat, sigma: &CMat) -> Result<f64> {
    Ok((1.0 - generalized_fidelity_mat(rho, sigma)?.min(1.0)).max(0.0).sqrt())
}

pub fn purified_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    purified_distance_mat(rho.matrix(), sigma.matrix())
}

pub fn trace_distance(rho: &CMat, sigma: &CMat) -> f64 {
    0.5 * trace_norm(&(rho - sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::state::{basis_state, max_mixed, random_density};
    use crate::rng::SeedStream;

    #[test]
    fn self_fidelity_and_orthogonal_states() {
        let rho = random_density(&[3], None, &mut SeedStream::new(1).rng()).unwrap();
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-10);
        assert!(purified_distance(&rho, &rho).unwrap() < 1e-5);
        let z0 = basis_state(2, 0).unwrap().density();
        let z1 = basis_state(2, 1).unwrap().density();
        assert!(fidelity(&z0, &z1).unwrap().abs() < 1e-14);
        assert!((trace_norm(&(z0.matrix() - z1.matrix())) - 2.0).abs() < 1e-12);
        let f = fidelity(&z0, &max_mixed(2).unwrap()).unwrap();
        assert!((f - 0.5).abs() < 1e-12);
    }
}
