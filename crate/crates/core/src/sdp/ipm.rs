//! Infeasible primal-dual path following with Nesterov–Todd scaling and
//! Mehrotra predictor-corrector steps.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::embed::{fro, inner, sparse_inner, RMat, RawSolution, RealProblem, RSparse};
use super::{Method, Status};

const MAX_ITER: usize = 100;
const MAX_COND: f64 = 1e14;

pub(crate) struct Warm {
    pub x: Vec<RMat>,
    pub y: DVector<f64>,
    pub z: Vec<RMat>,
    pub iterations: usize,
}

pub(crate) enum Outcome {
    Done(RawSolution),
    Breakdown(Warm),
}

struct Scaling {
    g: RMat,
    g_inv: RMat,
    w: RMat,
    lambda: DVector<f64>,
    l_inv: RMat,
    r_inv: RMat,
}

fn nt_scaling(x: &RMat, z: &RMat) -> Option<Scaling> {
    let n = x.nrows();
    let l = Cholesky::new(x.clone())?.unpack();
    let r = Cholesky::new(z.clone())?.unpack();
    let svd = (r.transpose() * &l).svd(true, true);
    let u_t = svd.v_t?;
    let v = u_t.transpose();
    let lambda = svd.singular_values;
    if lambda.iter().any(|&s| !(s > 0.0)) {
        return None;
    }
    let isq = DVector::from_iterator(n, lambda.iter().map(|s| 1.0 / s.sqrt()));
    let sq = DVector::from_iterator(n, lambda.iter().map(|s| s.sqrt()));
    let g = &l * &v * DMatrix::from_diagonal(&isq);
    let eye = RMat::identity(n, n);
    let l_inv = l.solve_lower_triangular(&eye)?;
    let r_inv = r.solve_lower_triangular(&eye)?;
    let g_inv = DMatrix::from_diagonal(&sq) * v.transpose() * &l_inv;
    let w = &g * g.transpose();
    Some(Scaling { g, g_inv, w, lambda, l_inv, r_inv })
}

fn sym(m: &RMat) -> RMat {
    0.5 * (m + m.transpose())
}

fn cond(m: &RMat) -> f64 {
    if m.nrows() <= 1 {
        return 1.0;
    }
    let e = m.clone().symmetric_eigenvalues();
    let lo = e.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Largest α ≤ cap with P + αD ≽ 0, given P = L Lᵀ and L⁻¹.
fn max_step(l_inv: &RMat, d: &RMat) -> f64 {
    let m = sym(&(l_inv * d * l_inv.transpose()));
    let lo = m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    if lo >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lo
    }
}

/// M_kl = ⟨A_k, W A_l W⟩ with W block-diagonal.
pub(crate) fn schur(p: &RealProblem, w: &[RMat]) -> DMatrix<f64> {
    let m = p.m();
    let nb = p.dims.len();
    let mut out = DMatrix::zeros(m, m);
    let mut g: Vec<Option<RMat>> = vec![None; nb];
    for l in 0..m {
        for slot in g.iter_mut() {
            *slot = None;
        }
        for &(b, i, j, v) in &p.a[l] {
            let wb = &w[b];
            let gb = g[b].get_or_insert_with(|| RMat::zeros(wb.nrows(), wb.ncols()));
            gb.ger(v, &wb.column(i), &wb.column(j), 1.0);
        }
        for k in l..m {
            let mut s = 0.0;
            for &(b, i, j, v) in &p.a[k] {
                if let Some(gb) = &g[b] {
                    s += v * gb[(i, j)];
                }
            }
            out[(k, l)] = s;
            out[(l, k)] = s;
        }
    }
    out
}

pub(crate) fn factor(mut m: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    let scale = m.diagonal().iter().copied().fold(0.0, f64::max).max(1e-300);
    if let Some(c) = Cholesky::new(m.clone()) {
        return Some(c);
    }
    for reg in [1e-14, 1e-12, 1e-10] {
        for i in 0..m.nrows() {
            m[(i, i)] += reg * scale;
        }
        if let Some(c) = Cholesky::new(m.clone()) {
            return Some(c);
        }
    }
    None
}

pub(crate) fn initial_point(p: &RealProblem) -> (Vec<RMat>, DVector<f64>, Vec<RMat>) {
    let n = p.total_dim() as f64;
    let sqn = n.sqrt();
    let a_norm = |a: &RSparse| a.iter().map(|e| e.3 * e.3).sum::<f64>().sqrt();
    let mut xi: f64 = 10f64.max(sqn);
    let mut eta: f64 = 10f64.max(sqn);
    let c_norm = p.c.iter().map(|e| e.3 * e.3).sum::<f64>().sqrt();
    eta = eta.max(c_norm);
    for (k, a) in p.a.iter().enumerate() {
        let an = a_norm(a);
        xi = xi.max(sqn * (1.0 + p.b[k].abs()) / (1.0 + an));
        eta = eta.max(an);
    }
    let x = p.dims.iter().map(|&d| RMat::identity(d, d) * xi).collect();
    let z = p.dims.iter().map(|&d| RMat::identity(d, d) * eta).collect();
    (x, DVector::zeros(p.m()), z)
}

pub(crate) fn solve(p: &RealProblem, tol: f64) -> Outcome {
    let n_tot = p.total_dim() as f64;
    let b = DVector::from_vec(p.b.clone());
    let c = p.dense(&p.c);
    let (mut x, mut y, mut z) = initial_point(p);

    for iter in 0..MAX_ITER {
        let ax = p.apply_a(&x);
        let rp = &b - &ax;
        let aty = p.apply_at(&y);
        let rd: Vec<RMat> = (0..c.len()).map(|k| &c[k] - &z[k] - &aty[k]).collect();
        let pobj = sparse_inner(&p.c, &x);
        let dobj = b.dot(&y);
        let mu = inner(&x, &z) / n_tot;
        let pinf = rp.amax();
        let dinf = fro(&rd);

        if pinf <= 0.1 * tol && dinf <= 0.1 * tol && (pobj - dobj).abs() <= 0.5 * tol {
            return Outcome::Done(RawSolution { status: Status::Optimal, method: Method::InteriorPoint, x, y, z, iterations: iter });
        }

        // Farkas-type certificates.
        if dobj > 0.0 {
            let ray: Vec<RMat> = (0..c.len()).map(|k| &aty[k] + &z[k]).collect();
            if fro(&ray) / dobj < 1e-8 && pinf > tol {
                let s = 1.0 / dobj;
                return Outcome::Done(RawSolution {
                    status: Status::Infeasible,
                    method: Method::InteriorPoint,
                    x,
                    y: y * s,
                    z: z.iter().map(|zz| zz * s).collect(),
                    iterations: iter,
                });
            }
        }
        if pobj < 0.0 && ax.norm() / (-pobj) < 1e-8 && dinf > tol {
            let s = 1.0 / (-pobj);
            return Outcome::Done(RawSolution {
                status: Status::DualInfeasible,
                method: Method::InteriorPoint,
                x: x.iter().map(|xx| xx * s).collect(),
                y,
                z,
                iterations: iter,
            });
        }

        // A breakdown near the end can leave an iterate that already meets tol.
        let close = pinf <= tol && dinf <= tol && (pobj - dobj).abs() <= tol;
        let warm = |x: Vec<RMat>, y: DVector<f64>, z: Vec<RMat>| {
            if close {
                Outcome::Done(RawSolution { status: Status::Optimal, method: Method::InteriorPoint, x, y, z, iterations: iter })
            } else {
                Outcome::Breakdown(Warm { x, y, z, iterations: iter })
            }
        };

        if x.iter().chain(z.iter()).any(|mm| cond(mm) > MAX_COND) {
            return warm(x, y, z);
        }
        let mut sc = Vec::with_capacity(x.len());
        for k in 0..x.len() {
            match nt_scaling(&x[k], &z[k]) {
                Some(s) => sc.push(s),
                None => return warm(x, y, z),
            }
        }
        let w: Vec<RMat> = sc.iter().map(|s| s.w.clone()).collect();
        let chol = match factor(schur(p, &w)) {
            Some(ch) => ch,
            None => return warm(x, y, z),
        };
        let wrdw: Vec<RMat> = (0..w.len()).map(|k| &w[k] * &rd[k] * &w[k]).collect();

        let direction = |h: &[RMat]| -> (Vec<RMat>, DVector<f64>, Vec<RMat>) {
            let tmp: Vec<RMat> = (0..h.len()).map(|k| &h[k] - &wrdw[k]).collect();
            let rhs = &rp - p.apply_a(&tmp);
            let dy = chol.solve(&rhs);
            let atdy = p.apply_at(&dy);
            let dz: Vec<RMat> = (0..h.len()).map(|k| &rd[k] - &atdy[k]).collect();
            let dx: Vec<RMat> = (0..h.len()).map(|k| sym(&(&h[k] - &w[k] * &dz[k] * &w[k]))).collect();
            (dx, dy, dz)
        };
        let steps = |dx: &[RMat], dz: &[RMat]| -> (f64, f64) {
            let mut ap = f64::INFINITY;
            let mut ad = f64::INFINITY;
            for k in 0..dx.len() {
                ap = ap.min(max_step(&sc[k].l_inv, &dx[k]));
                ad = ad.min(max_step(&sc[k].r_inv, &sym(&dz[k])));
            }
            (ap, ad)
        };

        // Predictor.
        let h_aff: Vec<RMat> = x.iter().map(|xx| -xx).collect();
        let (dx_a, _dy_a, dz_a) = direction(&h_aff);
        let (ap_max, ad_max) = steps(&dx_a, &dz_a);
        let ap_a = ap_max.min(1.0);
        let ad_a = ad_max.min(1.0);
        let mut mu_aff = 0.0;
        for k in 0..x.len() {
            mu_aff += (&x[k] + &dx_a[k] * ap_a).dot(&(&z[k] + &dz_a[k] * ad_a));
        }
        mu_aff /= n_tot;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector.
        let mut h = Vec::with_capacity(x.len());
        for k in 0..x.len() {
            let s = &sc[k];
            let dxt = &s.g_inv * &dx_a[k] * s.g_inv.transpose();
            let dzt = s.g.transpose() * &dz_a[k] * &s.g;
            let prod = 0.5 * (&dxt * &dzt + &dzt * &dxt);
            let nb = s.lambda.len();
            let mut t = -prod;
            for i in 0..nb {
                t[(i, i)] += sigma * mu - s.lambda[i] * s.lambda[i];
            }
            let smat = RMat::from_fn(nb, nb, |i, j| 2.0 * t[(i, j)] / (s.lambda[i] + s.lambda[j]));
            h.push(sym(&(&s.g * smat * s.g.transpose())));
        }
        let (dx, dy, dz) = direction(&h);
        let (ap_max, ad_max) = steps(&dx, &dz);
        let gamma = 0.9 + 0.09 * ap_a.min(ad_a);
        let ap = (gamma * ap_max).min(1.0);
        let ad = (gamma * ad_max).min(1.0);
        if ap < 1e-10 && ad < 1e-10 {
            return warm(x, y, z);
        }
        for k in 0..x.len() {
            x[k] = sym(&(&x[k] + &dx[k] * ap));
            z[k] = sym(&(&z[k] + &dz[k] * ad));
        }
        y += dy * ad;
    }
    Outcome::Breakdown(Warm { x, y, z, iterations: MAX_ITER })
}
