//! Alternating direction augmented Lagrangian method on the dual
//! (Wen, Goldfarb and Yin), used when the interior-point iteration breaks down.

use nalgebra::DVector;

use super::embed::{fro, sparse_inner, RMat, RawSolution, RealProblem};
use super::ipm::{factor, schur, Warm};
use super::{Method, Status};

const MAX_ITER: usize = 50_000;

fn psd_split(v: &RMat) -> RMat {
    let s = 0.5 * (v + v.transpose());
    let e = s.symmetric_eigen();
    let mut vecs = e.eigenvectors.clone();
    for (j, &lam) in e.eigenvalues.iter().enumerate() {
        let f = lam.max(0.0).sqrt();
        for i in 0..vecs.nrows() {
            vecs[(i, j)] *= f;
        }
    }
    &vecs * vecs.transpose()
}

pub(crate) fn solve(p: &RealProblem, tol: f64, warm: Warm) -> RawSolution {
    let b = DVector::from_vec(p.b.clone());
    let c = p.dense(&p.c);
    let eye: Vec<RMat> = p.dims.iter().map(|&d| RMat::identity(d, d)).collect();
    let Some(chol) = factor(schur(p, &eye)) else {
        return RawSolution {
            status: Status::MaxIter,
            method: Method::Splitting,
            x: warm.x,
            y: warm.y,
            z: warm.z,
            iterations: warm.iterations,
        };
    };
    let mut x: Vec<RMat> = warm.x.iter().map(psd_split).collect();
    let mut z: Vec<RMat> = warm.z.iter().map(psd_split).collect();
    let mut y = warm.y;
    let mut mu = 1.0;
    let ac = p.apply_a(&c);
    let mut status = Status::MaxIter;
    let mut it = 0;
    while it < MAX_ITER {
        it += 1;
        let rhs = (&b - p.apply_a(&x)) * mu - (p.apply_a(&z) - &ac);
        y = chol.solve(&rhs);
        let aty = p.apply_at(&y);
        let v: Vec<RMat> = (0..c.len()).map(|k| &c[k] - &aty[k] - &x[k] * mu).collect();
        z = v.iter().map(psd_split).collect();
        x = (0..c.len()).map(|k| (&z[k] - &v[k]) / mu).collect();

        let pinf = (p.apply_a(&x) - &b).amax();
        let rd: Vec<RMat> = (0..c.len()).map(|k| &c[k] - &aty[k] - &z[k]).collect();
        let dinf = fro(&rd);
        let gap = (sparse_inner(&p.c, &x) - b.dot(&y)).abs();
        if pinf <= 0.1 * tol && dinf <= 0.1 * tol && gap <= 0.5 * tol {
            status = Status::Optimal;
            break;
        }
        if it % 10 == 0 {
            if pinf > 5.0 * dinf {
                mu = (mu * 1.6).min(1e6);
            } else if dinf > 5.0 * pinf {
                mu = (mu / 1.6).max(1e-6);
            }
        }
    }
    RawSolution { status, method: Method::Splitting, x, y, z, iterations: warm.iterations + it }
}
