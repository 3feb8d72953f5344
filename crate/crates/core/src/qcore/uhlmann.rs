use super::channel::PartialIsometry;
use super::layout::vec_to_mat;
use super::state::PureState;
use crate::error::{Error, Result};
use crate::linalg::polar_partial_isometry;

/// Partial isometry V: B → C maximizing |⟨σ|(I⊗V)|ρ⟩|, where A is the first
/// subsystem of both states and B, C are everything after it.
pub fn uhlmann_isometry(rho_ab: &PureState, sigma_ac: &PureState) -> Result<PartialIsometry> {
    Ok(uhlmann_split(rho_ab, sigma_ac, 1)?.0)
}

/// As [`uhlmann_isometry`] with A the first `n_a` subsystems. Also returns the
/// achieved fidelity |⟨σ|(I⊗V)|ρ⟩|², which equals F(ρ_A, σ_A).
pub fn uhlmann_split(rho_ab: &PureState, sigma_ac: &PureState, n_a: usize) -> Result<(PartialIsometry, f64)> {
    if n_a == 0 || n_a >= rho_ab.dims().len() || n_a >= sigma_ac.dims().len() {
        return Err(Error::param("both states need a nonempty A part and a nonempty remainder"));
    }
    if rho_ab.dims()[..n_a] != sigma_ac.dims()[..n_a] {
        return Err(Error::dims(format!(
            "A dimensions differ: {:?} vs {:?}",
            &rho_ab.dims()[..n_a],
            &sigma_ac.dims()[..n_a]
        )));
    }
    let a: Vec<usize> = (0..n_a).collect();
    let psi = vec_to_mat(rho_ab.vector(), rho_ab.layout(), &a)?;
    let phi = vec_to_mat(sigma_ac.vector(), sigma_ac.layout(), &a)?;
    let m = psi.transpose() * phi.map(|z| z.conj());
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    // M = U Σ W†; V = W U† restricted to the support.
    let p = polar_partial_isometry(&m, 1e-13 * scale.max(1e-300));
    let v = p.adjoint();
    let overlap: f64 = crate::linalg::singular_values(&m).iter().sum();
    Ok((PartialIsometry::trusted(v), overlap * overlap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, CMat};
    use crate::qcore::distance::fidelity;
    use crate::qcore::state::{max_entangled, random_pure};
    use crate::rng::SeedStream;

    fn achieved(rho: &PureState, sigma: &PureState, v: &PartialIsometry) -> f64 {
        let d_a = rho.dims()[0];
        let big = CMat::identity(d_a, d_a).kronecker(v.matrix());
        let out = &big * rho.vector();
        sigma.vector().dotc(&out).norm_sqr()
    }

    #[test]
    fn random_instance_matches_marginal_fidelity() {
        let mut rng = SeedStream::new(21).rng();
        for _ in 0..10 {
            let rho = random_pure(&[2, 3], &mut rng).unwrap();
            let sigma = random_pure(&[2, 3], &mut rng).unwrap();
            let v = uhlmann_isometry(&rho, &sigma).unwrap();
            let want = fidelity(&rho.reduced(&[0]).unwrap(), &sigma.reduced(&[0]).unwrap()).unwrap();
            assert!((achieved(&rho, &sigma, &v) - want).abs() < 1e-8);
        }
    }

    #[test]
    fn relabeling_recovers_phi_plus() {
        let phi = max_entangled(2).unwrap();
        let x = crate::qcore::channel::pauli_x();
        let relabeled = PureState::new(CMat::identity(2, 2).kronecker(&x) * phi.vector(), phi.layout().clone()).unwrap();
        let v = uhlmann_isometry(&relabeled, &phi).unwrap();
        assert!((achieved(&relabeled, &phi, &v) - 1.0).abs() < 1e-12);
        assert!(max_abs(&(v.matrix() - &x)) < 1e-12);
    }
}
