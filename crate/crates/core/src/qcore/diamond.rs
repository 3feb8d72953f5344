use crate::error::{Error, Result};
use crate::linalg::{hermiticity_defect, is_real, r, CMat};
use crate::sdp::{Field, Lmi};

/// Diamond norm of a Hermiticity-preserving map given its normalized
/// Choi-like matrix (id ⊗ Δ)(Φ⁺) on (input, output).
///
/// Solves min λ s.t. Y ≽ ±J, tr_out Y ≼ λ I with J the unnormalized Choi matrix.
pub fn diamond_norm(choi: &CMat, d_in: usize, d_out: usize, tol: f64) -> Result<f64> {
    let n = d_in * d_out;
    if choi.nrows() != n || choi.ncols() != n {
        return Err(Error::dims("Choi matrix does not match d_in * d_out"));
    }
    let defect = hermiticity_defect(choi);
    if defect > 1e-10 {
        return Err(Error::NotHermitian(defect));
    }
    let j = choi * r(d_in as f64);
    if crate::linalg::max_abs(&j) == 0.0 {
        return Ok(0.0);
    }
    let field = if is_real(&j, 0.0) { Field::Real } else { Field::Complex };
    let mut lmi = Lmi::new();
    let b_plus = lmi.add_block(n, field);
    let b_minus = lmi.add_block(n, field);
    let b_tr = lmi.add_block(d_in, field);
    lmi.add_constant_dense(b_plus, &(-&j));
    lmi.add_constant_dense(b_minus, &j);
    let y = lmi.add_herm_var(n, field);
    lmi.place_herm(&y, b_plus, |i, k| vec![(i, k, r(1.0))]);
    lmi.place_herm(&y, b_minus, |i, k| vec![(i, k, r(1.0))]);
    lmi.place_herm(&y, b_tr, |i, k| {
        let (a, b) = (i / d_out, i % d_out);
        let (a2, b2) = (k / d_out, k % d_out);
        if b == b2 {
            vec![(a, a2, r(-1.0))]
        } else {
            vec![]
        }
    });
    let lam = lmi.add_var();
    lmi.add_objective(lam, -1.0);
    for a in 0..d_in {
        lmi.add_coef(lam, b_tr, a, a, r(1.0));
    }
    let sol = lmi.solve(tol)?;
    if sol.solution.status != crate::sdp::Status::Optimal {
        return Err(Error::Solver(format!("diamond norm SDP ended with {:?}", sol.solution.status)));
    }
    Ok((-sol.value).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::Channel;

    #[test]
    fn identity_and_zero_and_known_difference() {
        let id = Channel::identity(2).unwrap().choi_matrix();
        assert!((diamond_norm(&id, 2, 2, 1e-8).unwrap() - 1.0).abs() < 1e-6);
        assert_eq!(diamond_norm(&(&id - &id), 2, 2, 1e-8).unwrap(), 0.0);
        let dep = Channel::fully_depolarizing(2).unwrap().choi_matrix();
        assert!((diamond_norm(&(&id - &dep), 2, 2, 1e-8).unwrap() - 1.5).abs() < 1e-6);
    }
}
