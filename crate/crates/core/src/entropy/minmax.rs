use serde::{Deserialize, Serialize};

use super::{bipartite_dims, check_eps, Certificate, EntropyValue};
use crate::error::{Error, Result};
use crate::linalg::{eigh, is_real, r, CMat};
use crate::qcore::{reduce_vec, DensityOperator, DimLayout};
use crate::sdp::{Field, Lmi, Status, DEFAULT_TOL};

/// Smoothing programs with more real variables than this fall back to the
/// unsmoothed value, which bounds the smooth one in the valid direction.
pub const SMOOTH_VAR_LIMIT: usize = 1200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingBall {
    pub epsilon: f64,
}

impl SmoothingBall {
    pub fn new(epsilon: f64) -> Result<Self> {
        check_eps(epsilon)?;
        Ok(SmoothingBall { epsilon })
    }
}

/// Real field when the imaginary parts are rounding noise, with the noise removed.
fn field_of(m: &CMat) -> (Field, CMat) {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if is_real(m, 1e-13 * scale.max(1e-300)) {
        (Field::Real, m.map(|z| r(z.re)))
    } else {
        (Field::Complex, m.clone())
    }
}

fn solved(lmi: &Lmi, tol: f64) -> Result<crate::sdp::LmiSolution> {
    let sol = lmi.solve(tol)?;
    if sol.solution.status != Status::Optimal {
        return Err(Error::Solver(format!(
            "min-entropy program ended with {:?} (gap {:.2e})",
            sol.solution.status, sol.solution.gap
        )));
    }
    Ok(sol)
}

/// Place I_A ⊗ σ_B.
fn place_id_tensor(lmi: &mut Lmi, sigma: &crate::sdp::HermVar, block: usize, d_a: usize, d_b: usize, w: f64) {
    lmi.place_herm(sigma, block, move |i, j| (0..d_a).map(|a| (a * d_b + i, a * d_b + j, r(w))).collect());
}

pub fn h_min(rho: &DensityOperator) -> Result<EntropyValue> {
    h_min_tol(rho, DEFAULT_TOL)
}

/// H_min(A|B) = −log min{tr σ_B : ρ_AB ≼ I_A ⊗ σ_B}.
pub fn h_min_tol(rho: &DensityOperator, tol: f64) -> Result<EntropyValue> {
    let (d_a, d_b) = bipartite_dims(rho);
    let (field, m) = field_of(rho.matrix());
    let m = &m;
    let mut lmi = Lmi::new();
    let blk = lmi.add_block(d_a * d_b, field);
    lmi.add_constant_dense(blk, &(-m));
    let sigma = lmi.add_herm_var(d_b, field);
    for v in sigma.trace_vars() {
        lmi.add_objective(v, -1.0);
    }
    place_id_tensor(&mut lmi, &sigma, blk, d_a, d_b, 1.0);
    let sol = solved(&lmi, tol)?;
    let s = sigma.value(&sol.y);
    let t = -sol.value;
    if !(t > 0.0) {
        return Err(Error::Solver(format!("non-positive optimal trace {t}")));
    }
    Ok(EntropyValue { bits: -t.log2(), certificate: Some(Certificate::Sigma { sigma: s }), exact: true })
}

/// ρ_AC of the canonical purification |ψ⟩_ABC, C restricted to the support.
pub(crate) fn complementary_marginal(rho: &DensityOperator) -> Result<DensityOperator> {
    let (d_a, d_b) = bipartite_dims(rho);
    let flat = rho.relayout(vec![d_a, d_b])?;
    let psi = flat.purify();
    let d_c = psi.dims()[2];
    let layout = DimLayout::new(vec![d_a, d_b, d_c])?;
    let m = reduce_vec(psi.vector(), &layout, &[0, 2])?;
    let lay = DimLayout::new(vec![d_a, d_c])?;
    if rho.is_normalized() {
        DensityOperator::new(m, lay)
    } else {
        DensityOperator::new_subnormalized(m, lay)
    }
}

/// H_max(A|B) = −H_min(A|C) on a purification.
pub fn h_max(rho: &DensityOperator) -> Result<EntropyValue> {
    let ac = complementary_marginal(rho)?;
    let v = h_min(&ac)?;
    Ok(EntropyValue { bits: -v.bits, certificate: v.certificate.map(|c| Certificate::Dual { inner: Box::new(c) }), exact: true })
}

pub fn smooth_h_min(rho: &DensityOperator, eps: f64) -> Result<EntropyValue> {
    smooth_h_min_tol(rho, eps, DEFAULT_TOL)
}

/// max over ρ̃ ∈ 𝒮≤ with P(ρ̃, ρ) ≤ ε of H_min(A|B)_ρ̃, as one joint program:
/// I⊗σ ≽ ρ̃, [[ρ̃, Y],[Y†, D]] ≽ 0 with ρ = V D V†, Re tr V†Y + t ≥ √(1−ε²),
/// and t ≤ √((1−tr ρ̃)(1−tr ρ)) via a 2×2 block.
pub fn smooth_h_min_tol(rho: &DensityOperator, eps: f64, tol: f64) -> Result<EntropyValue> {
    check_eps(eps)?;
    if eps == 0.0 {
        return h_min_tol(rho, tol);
    }
    let (d_a, d_b) = bipartite_dims(rho);
    let n = d_a * d_b;
    let (field, m) = field_of(rho.matrix());
    let m = &m;
    let spec = eigh(m);
    let cut = 1e-12 * spec.max().max(1e-300);
    let support: Vec<usize> = (0..n).rev().filter(|&k| spec.values[k] > cut).collect();
    let rank = support.len();
    let sub = !rho.is_normalized();
    let per = if field == Field::Real { 1 } else { 2 };
    let vars = n * n + d_b * d_b + per * n * rank + usize::from(sub);
    if vars > SMOOTH_VAR_LIMIT {
        let mut v = h_min_tol(rho, tol)?;
        v.exact = false;
        return Ok(v);
    }

    let mut lmi = Lmi::new();
    let b_min = lmi.add_block(n, field);
    let b_fid = lmi.add_block(n + rank, field);
    let b_ovl = lmi.add_block(1, Field::Real);
    let rt = lmi.add_herm_var(n, field);
    let sigma = lmi.add_herm_var(d_b, field);
    let y = lmi.add_mat_var(n, rank, field);
    for v in sigma.trace_vars() {
        lmi.add_objective(v, -1.0);
    }
    place_id_tensor(&mut lmi, &sigma, b_min, d_a, d_b, 1.0);
    lmi.place_herm(&rt, b_min, |i, j| vec![(i, j, r(-1.0))]);

    lmi.place_herm(&rt, b_fid, |i, j| vec![(i, j, r(1.0))]);
    lmi.place_mat(&y, b_fid, 0, n);
    for (k, &col) in support.iter().enumerate() {
        lmi.add_constant(b_fid, n + k, n + k, r(spec.values[col]));
    }

    lmi.add_constant(b_ovl, 0, 0, r(-(1.0 - eps * eps).sqrt()));
    for i in 0..n {
        for (k, &col) in support.iter().enumerate() {
            let v = spec.vectors[(i, col)];
            lmi.add_coef(y.re(i, k), b_ovl, 0, 0, r(v.re));
            if let Some(im) = y.im(i, k) {
                lmi.add_coef(im, b_ovl, 0, 0, r(v.im));
            }
        }
    }

    if sub {
        let b_gen = lmi.add_block(2, Field::Real);
        lmi.add_constant(b_gen, 0, 0, r(1.0));
        lmi.add_constant(b_gen, 1, 1, r((1.0 - rho.trace()).max(0.0)));
        for k in 0..n {
            lmi.add_coef(rt.diag(k), b_gen, 0, 0, r(-1.0));
        }
        let t = lmi.add_var();
        lmi.add_coef(t, b_gen, 0, 1, r(1.0));
        lmi.add_coef(t, b_ovl, 0, 0, r(1.0));
    } else {
        let b_tr = lmi.add_block(1, Field::Real);
        lmi.add_constant(b_tr, 0, 0, r(1.0));
        for k in 0..n {
            lmi.add_coef(rt.diag(k), b_tr, 0, 0, r(-1.0));
        }
    }

    let sol = solved(&lmi, tol)?;
    let t = -sol.value;
    if !(t > 0.0) {
        return Err(Error::Solver(format!("non-positive optimal trace {t}")));
    }
    Ok(EntropyValue {
        bits: -t.log2(),
        certificate: Some(Certificate::Smoothed { rho_tilde: rt.value(&sol.y), sigma: sigma.value(&sol.y) }),
        exact: true,
    })
}

/// H_max^ε(A|B) = −H_min^ε(A|C) on a purification.
pub fn smooth_h_max(rho: &DensityOperator, eps: f64) -> Result<EntropyValue> {
    check_eps(eps)?;
    let ac = complementary_marginal(rho)?;
    let v = smooth_h_min(&ac, eps)?;
    Ok(EntropyValue {
        bits: -v.bits,
        certificate: v.certificate.map(|c| Certificate::Dual { inner: Box::new(c) }),
        exact: v.exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::cond_entropy;
    use crate::linalg::max_eig;
    use crate::qcore::{max_entangled, max_mixed, random_density};
    use crate::rng::SeedStream;

    #[test]
    fn product_with_maximally_mixed_a() {
        let mut rng = SeedStream::new(31).rng();
        let sb = random_density(&[3], None, &mut rng).unwrap();
        let rho = max_mixed(2).unwrap().tensor(&sb);
        let v = h_min(&rho).unwrap();
        assert!((v.bits - 1.0).abs() < 1e-6, "{}", v.bits);
    }

    #[test]
    fn phi_plus_min_and_max() {
        let phi = max_entangled(2).unwrap().density();
        assert!((h_min(&phi).unwrap().bits + 1.0).abs() < 1e-6);
        assert!((h_max(&phi).unwrap().bits + 1.0).abs() < 1e-6);
        assert!((smooth_h_min(&phi, 0.0).unwrap().bits + 1.0).abs() < 1e-6);
    }

    #[test]
    fn trivial_b_reduces_to_operator_norm() {
        let mut rng = SeedStream::new(32).rng();
        let a = random_density(&[3], None, &mut rng).unwrap().relayout(vec![3, 1]).unwrap();
        let v = h_min(&a).unwrap();
        assert!((v.bits + max_eig(a.matrix()).log2()).abs() < 1e-6);
    }

    #[test]
    fn smoothing_orders_and_sandwiches() {
        let mut rng = SeedStream::new(33).rng();
        let rho = random_density(&[2, 2], None, &mut rng).unwrap();
        let h = cond_entropy(&rho, &[0], &[1]).unwrap();
        let lo = h_min(&rho).unwrap().bits;
        let s1 = smooth_h_min(&rho, 0.1).unwrap().bits;
        let s2 = smooth_h_min(&rho, 0.3).unwrap().bits;
        assert!(lo <= s1 + 1e-6 && s1 <= s2 + 1e-6 && s2 <= 1.0 + 1e-6);
        let hi = h_max(&rho).unwrap().bits;
        let m1 = smooth_h_max(&rho, 0.1).unwrap().bits;
        assert!(lo <= h + 1e-6 && h <= hi + 1e-6 && m1 <= hi + 1e-6);
    }
}
