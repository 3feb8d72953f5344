use super::{bipartite_dims, h_min, Certificate, EntropyValue};
use crate::error::{Error, Result};
use crate::linalg::{eigh, eye, hermitian_part, kron, r, CMat, Spectral};
use crate::qcore::{psd_tol, DensityOperator};

const FLOOR: f64 = 1e-12;
const MAX_ITER: usize = 400;

/// tr[(σ^{-1/4} ρ σ^{-1/4})²] for a full-rank σ given by its spectrum.
fn objective(rho: &CMat, d_a: usize, s: &Spectral) -> f64 {
    let q = s.map(|x| x.max(FLOOR).powf(-0.25));
    let g = kron(&eye(d_a), &q);
    let x = &g * rho * &g;
    crate::linalg::inner_re(&x, &x)
}

/// −log tr[(σ^{-1/4} ρ σ^{-1/4})²] with a fixed full-rank σ_B. This is a lower
/// bound on H₂(A|B); σ is normalized before use.
pub fn collision_entropy_given(rho: &DensityOperator, sigma: &CMat) -> Result<EntropyValue> {
    let (d_a, d_b) = bipartite_dims(rho);
    if sigma.nrows() != d_b || sigma.ncols() != d_b {
        return Err(Error::dims(format!("sigma must be {d_b}x{d_b}, got {}x{}", sigma.nrows(), sigma.ncols())));
    }
    let s = eigh(sigma);
    let tol = psd_tol(d_b);
    if s.min() < -tol {
        return Err(Error::NegativeEigenvalue(s.min()));
    }
    if s.min() <= tol.max(FLOOR) {
        return Err(Error::Singular(format!("conditioning state has eigenvalue {:.3e}", s.min())));
    }
    let t: f64 = s.values.iter().sum();
    let sn = Spectral { values: s.values.iter().map(|x| x / t).collect(), vectors: s.vectors.clone() };
    let f = objective(rho.matrix(), d_a, &sn);
    Ok(EntropyValue {
        bits: -f.log2(),
        certificate: Some(Certificate::Conditioning { sigma: sigma.scale(1.0 / t) }),
        exact: true,
    })
}

/// H₂(A|B). With `sigma` the value at that conditioning state is returned;
/// otherwise σ_B is optimized by exponentiated gradient descent started at
/// ρ_B and at the normalized min-entropy certificate, and the best value
/// found is returned. The result never exceeds the true H₂.
pub fn collision_entropy(rho: &DensityOperator, sigma: Option<&CMat>) -> Result<EntropyValue> {
    if let Some(s) = sigma {
        return collision_entropy_given(rho, s);
    }
    let (d_a, d_b) = bipartite_dims(rho);
    let m = rho.matrix();
    let mut starts = Vec::new();
    starts.push(rho.relayout(vec![d_a, d_b])?.partial_trace(&[1])?.into_matrix());
    if let Some(Certificate::Sigma { sigma }) = h_min(rho)?.certificate {
        starts.push(sigma);
    }
    let mut best: Option<(f64, CMat)> = None;
    for s0 in starts {
        let t = s0.trace().re.max(1e-300);
        let s0 = hermitian_part(&s0).scale(1.0 / t) + eye(d_b).scale(1e-9 / d_b as f64);
        let (f, s) = descend(m, d_a, &s0);
        if best.as_ref().is_none_or(|(g, _)| f < *g) {
            best = Some((f, s));
        }
    }
    let (f, s) = best.expect("at least one start");
    Ok(EntropyValue { bits: -f.log2(), certificate: Some(Certificate::Conditioning { sigma: s }), exact: true })
}

fn normalized(s: &CMat) -> Spectral {
    let mut sp = eigh(s);
    for v in sp.values.iter_mut() {
        *v = v.max(FLOOR);
    }
    let t: f64 = sp.values.iter().sum();
    for v in sp.values.iter_mut() {
        *v /= t;
    }
    sp
}

/// Gradient of σ ↦ tr[ρ(I⊗σ^{-1/2})ρ(I⊗σ^{-1/2})] via divided differences.
fn gradient(rho: &CMat, d_a: usize, s: &Spectral) -> CMat {
    let d_b = s.values.len();
    let inv_sqrt = s.map(|x| x.powf(-0.5));
    let g = kron(&eye(d_a), &inv_sqrt);
    let prod = rho * &g * rho;
    let mut k = CMat::zeros(d_b, d_b);
    for a in 0..d_a {
        k += prod.view((a * d_b, a * d_b), (d_b, d_b));
    }
    let u = &s.vectors;
    let mut kt = u.adjoint() * k * u;
    for i in 0..d_b {
        for j in 0..d_b {
            let (li, lj) = (s.values[i], s.values[j]);
            let gamma = if (li - lj).abs() <= 1e-12 * li.max(lj) {
                -0.5 * li.powf(-1.5)
            } else {
                (li.powf(-0.5) - lj.powf(-0.5)) / (li - lj)
            };
            kt[(i, j)] *= r(2.0 * gamma);
        }
    }
    hermitian_part(&(u * kt * u.adjoint()))
}

fn descend(rho: &CMat, d_a: usize, s0: &CMat) -> (f64, CMat) {
    let mut s = normalized(s0);
    let mut f = objective(rho, d_a, &s);
    let mut eta = 1.0;
    for _ in 0..MAX_ITER {
        let g = gradient(rho, d_a, &s);
        let scale = crate::linalg::operator_norm(&g).max(1e-300);
        let log_s = s.map(|x| x.ln());
        let mut improved = false;
        for _ in 0..30 {
            let cand = normalized(&eigh(&(&log_s - g.scale(eta / scale))).map(f64::exp));
            let fc = objective(rho, d_a, &cand);
            if fc < f {
                let rel = (f - fc) / f;
                s = cand;
                f = fc;
                eta = (eta * 2.0).min(50.0);
                improved = rel > 1e-13;
                break;
            }
            eta *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let mat = s.map(|x| x);
    (f, mat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{max_entangled, max_mixed, random_density};
    use crate::rng::SeedStream;

    #[test]
    fn maximally_mixed_gives_log_d() {
        let rho = max_mixed(2).unwrap().tensor(&max_mixed(3).unwrap());
        let v = collision_entropy_given(&rho, &eye(3).scale(1.0 / 3.0)).unwrap();
        assert!((v.bits - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phi_plus_at_maximally_mixed_b() {
        let phi = max_entangled(2).unwrap().density();
        let v = collision_entropy_given(&phi, &eye(2).scale(0.5)).unwrap();
        assert!((v.bits + 1.0).abs() < 1e-12, "{}", v.bits);
    }

    #[test]
    fn singular_sigma_rejected() {
        let phi = max_entangled(2).unwrap().density();
        let mut s = CMat::zeros(2, 2);
        s[(0, 0)] = r(1.0);
        assert!(matches!(collision_entropy_given(&phi, &s), Err(Error::Singular(_))));
    }

    #[test]
    fn optimized_value_dominates_min_entropy() {
        for seed in 0..4 {
            let mut rng = SeedStream::new(40 + seed).rng();
            let rho = random_density(&[2, 2], None, &mut rng).unwrap();
            let h2 = collision_entropy(&rho, None).unwrap();
            let hm = h_min(&rho).unwrap().bits;
            assert!(h2.bits >= hm - 1e-5, "{} < {}", h2.bits, hm);
            let Some(Certificate::Conditioning { sigma }) = &h2.certificate else { panic!() };
            let again = collision_entropy_given(&rho, sigma).unwrap();
            assert!((again.bits - h2.bits).abs() < 1e-9);
        }
    }
}
