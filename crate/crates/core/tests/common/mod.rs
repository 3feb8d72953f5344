//! Independent oracles shared by the integration and acceptance tests.
//! Nothing here calls the library's optimizers.
#![allow(dead_code)]

use compoundcap::linalg::{c, eigh, r, sqrt_psd, CMat, CVec};
use compoundcap::qcore::{apply_channel, Channel, DensityOperator, DimLayout, PureState};
use compoundcap::sdp::{BlockMatrix, SdpProblem, SdpSolution, Sense};
use nalgebra::SymmetricEigen;

pub fn bloch(v: [f64; 3]) -> CMat {
    let [x, y, z] = v;
    CMat::from_row_slice(2, 2, &[r(0.5 * (1.0 + z)), c(0.5 * x, -0.5 * y), c(0.5 * x, 0.5 * y), r(0.5 * (1.0 - z))])
}

fn clamp_ball(v: [f64; 3], radius: f64) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if n <= radius {
        v
    } else {
        v.map(|x| x * radius / n)
    }
}

/// Maximize f over the closed ball of the given radius: coarse grid, then
/// compass search with step halving.
pub fn maximize_ball(f: impl Fn([f64; 3]) -> f64, radius: f64) -> f64 {
    let g = 8;
    let mut best = ([0.0; 3], f([0.0; 3]));
    for i in 0..=g {
        for j in 0..=g {
            for k in 0..=g {
                let v = [i, j, k].map(|t| radius * (2.0 * t as f64 / g as f64 - 1.0));
                let v = clamp_ball(v, radius);
                let val = f(v);
                if val > best.1 {
                    best = (v, val);
                }
            }
        }
    }
    let mut step = radius / g as f64;
    while step > 1e-9 {
        let mut moved = false;
        for axis in 0..3 {
            for sign in [-1.0, 1.0] {
                let mut v = best.0;
                v[axis] += sign * step;
                let v = clamp_ball(v, radius);
                let val = f(v);
                if val > best.1 + 1e-15 {
                    best = (v, val);
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    best.1
}

fn herm_eigs(m: &CMat) -> Vec<f64> {
    let h = (m + m.adjoint()) * r(0.5);
    SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
}

fn lambda_max(m: &CMat) -> f64 {
    herm_eigs(m).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn lambda_min(m: &CMat) -> f64 {
    herm_eigs(m).into_iter().fold(f64::INFINITY, f64::min)
}

fn trace_norm_svd(m: &CMat) -> f64 {
    m.clone().svd(false, false).singular_values.iter().sum()
}

/// H_min(A|B) for a qubit B by direct minimization of
/// λ_max((I⊗σ)^{-1/2} ρ (I⊗σ)^{-1/2}) over states σ.
pub fn h_min_qubit_b(rho: &CMat, d_a: usize) -> f64 {
    let f = |v: [f64; 3]| {
        let s = bloch(v);
        let e = eigh(&s);
        let inv = &e.vectors * CMat::from_diagonal(&nalgebra::DVector::from_iterator(2, e.values.iter().map(|&x| r(1.0 / x.sqrt())))) * e.vectors.adjoint();
        let w = CMat::identity(d_a, d_a).kronecker(&inv);
        -lambda_max(&(&w * rho * &w))
    };
    -(-maximize_ball(f, 1.0 - 1e-7)).log2()
}

/// H_max(A|B) = log max_σ ‖√ρ √(I⊗σ)‖₁² for a qubit B.
pub fn h_max_qubit_b(rho: &CMat, d_a: usize) -> f64 {
    let sr = sqrt_psd(rho);
    let f = |v: [f64; 3]| {
        let s = CMat::identity(d_a, d_a).kronecker(&sqrt_psd(&bloch(v)));
        trace_norm_svd(&(&sr * s)).powi(2)
    };
    maximize_ball(f, 1.0).log2()
}

/// Purification on (A, B, C) with a random isometry on C of dimension rank + extra.
pub fn purify_randomly(rho: &DensityOperator, extra: usize, u: &CMat) -> PureState {
    let e = eigh(rho.matrix());
    let n = rho.dim();
    let keep: Vec<usize> = (0..n).filter(|&k| e.values[k] > 1e-14).collect();
    let dc = keep.len() + extra;
    assert!(u.nrows() >= dc && u.ncols() >= dc);
    let mut v = CVec::zeros(n * dc);
    for (col, &k) in keep.iter().enumerate() {
        let s = e.values[k].sqrt();
        for i in 0..n {
            for j in 0..dc {
                v[i * dc + j] += e.vectors[(i, k)] * u[(j, col)] * r(s);
            }
        }
    }
    let mut dims = rho.dims().to_vec();
    dims.push(dc);
    PureState::new(v, DimLayout::new(dims).unwrap()).unwrap()
}

/// ½ max_ρ I(ρ, N) for a qubit-input channel, over the Bloch ball.
pub fn qe_qubit_oracle(n: &Channel) -> f64 {
    let f = |v: [f64; 3]| {
        let rho = DensityOperator::from_matrix(bloch(v), &[2]).unwrap();
        let psi = rho.purify();
        let out = apply_channel(n, &psi.density(), 0).unwrap();
        let s = |m: &DensityOperator| -> f64 {
            herm_eigs(m.matrix()).iter().filter(|&&x| x > 1e-15).map(|&x| -x * x.log2()).sum()
        };
        let b = out.partial_trace(&[0]).unwrap();
        let rr = out.partial_trace(&[1]).unwrap();
        s(&b) + s(&rr) - s(&out)
    };
    0.5 * maximize_ball(f, 1.0)
}

/// ‖N − M‖⋄ for qubit-input maps, maximizing over inputs √ρ ⊗ I |Φ⁺⟩·√2.
pub fn diamond_qubit_oracle(n: &Channel, m: &Channel) -> f64 {
    let diff = n.choi_matrix() - m.choi_matrix();
    let dout = n.d_out();
    let f = |v: [f64; 3]| {
        let sr = sqrt_psd(&bloch(v));
        // (√ρᵀ ⊗ I) J (√ρᵀ ⊗ I) · d_in with J on (input, output)
        let w = sr.transpose().kronecker(&CMat::identity(dout, dout));
        trace_norm_svd(&(&w * &diff * &w)) * 2.0
    };
    maximize_ball(f, 1.0)
}

fn dense(m: &BlockMatrix, block: usize, dim: usize) -> CMat {
    let mut out = CMat::zeros(dim, dim);
    for e in m.entries.iter().filter(|e| e.block == block) {
        out[(e.row, e.col)] += e.value;
        if e.row != e.col {
            out[(e.col, e.row)] += e.value.conj();
        }
    }
    out
}

fn inner(a: &CMat, x: &CMat) -> f64 {
    a.iter().zip(x.iter()).map(|(p, q)| (p.conj() * q).re).sum()
}

#[derive(Debug, Clone, Copy)]
pub struct Recheck {
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

/// Gap and residuals of a claimed optimal pair, recomputed from dense blocks.
pub fn recheck_sdp(p: &SdpProblem, s: &SdpSolution) -> Recheck {
    let nb = p.blocks.len();
    let obj: Vec<CMat> = (0..nb).map(|b| dense(&p.objective, b, p.blocks[b].dim)).collect();
    let pobj: f64 = (0..nb).map(|b| inner(&obj[b], &s.primal[b])).sum();
    let dobj: f64 = p.constraints.iter().zip(&s.dual).map(|(k, y)| k.b * y).sum();
    let mut pres: f64 = 0.0;
    let mut dres: f64 = 0.0;
    let mut z = obj.clone();
    for (k, (con, &y)) in p.constraints.iter().zip(&s.dual).enumerate() {
        let a: Vec<CMat> = (0..nb).map(|b| dense(&con.a, b, p.blocks[b].dim)).collect();
        let lhs: f64 = (0..nb).map(|b| inner(&a[b], &s.primal[b])).sum();
        let slack = if con.sense == Sense::Le { s.slacks[k] } else { 0.0 };
        pres = pres.max((lhs + slack - con.b).abs()).max(-slack);
        if con.sense == Sense::Le {
            dres = dres.max(y);
        }
        for b in 0..nb {
            z[b] -= &a[b] * r(y);
        }
    }
    for b in 0..nb {
        pres = pres.max(-lambda_min(&s.primal[b]));
        dres = dres.max(-lambda_min(&z[b]));
    }
    Recheck { gap: (pobj - dobj).abs(), primal_residual: pres, dual_residual: dres }
}
