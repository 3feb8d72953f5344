use nalgebra::{DMatrix, DVector};

use super::{verify, Field, Method, SdpProblem, SdpSolution, Sense, Status};
use crate::linalg::{c, CMat};

pub(crate) type RMat = DMatrix<f64>;

/// Sparse symmetric block matrix; both triangles listed explicitly.
pub(crate) type RSparse = Vec<(usize, usize, usize, f64)>;

pub(crate) struct RealProblem {
    pub dims: Vec<usize>,
    pub c: RSparse,
    pub a: Vec<RSparse>,
    pub b: Vec<f64>,
    pub slack_block: Vec<Option<usize>>,
}

pub(crate) struct RawSolution {
    pub status: Status,
    pub method: Method,
    pub x: Vec<RMat>,
    pub y: DVector<f64>,
    pub z: Vec<RMat>,
    pub iterations: usize,
}

fn embed_entries(out: &mut RSparse, p: &SdpProblem, m: &super::BlockMatrix) {
    for e in &m.entries {
        let (i, j, v) = (e.row, e.col, e.value);
        match p.blocks[e.block].field {
            Field::Real => {
                out.push((e.block, i, j, v.re));
                if i != j {
                    out.push((e.block, j, i, v.re));
                }
            }
            Field::Complex => {
                let n = p.blocks[e.block].dim;
                let (a, b) = (0.5 * v.re, 0.5 * v.im);
                let blk = e.block;
                if i == j {
                    out.push((blk, i, i, a));
                    out.push((blk, i + n, i + n, a));
                } else {
                    out.push((blk, i, j, a));
                    out.push((blk, j, i, a));
                    out.push((blk, i + n, j + n, a));
                    out.push((blk, j + n, i + n, a));
                    if b != 0.0 {
                        out.push((blk, i, j + n, -b));
                        out.push((blk, j + n, i, -b));
                        out.push((blk, j, i + n, b));
                        out.push((blk, i + n, j, b));
                    }
                }
            }
        }
    }
}

impl RealProblem {
    pub fn from_problem(p: &SdpProblem) -> Self {
        let mut dims: Vec<usize> = p
            .blocks
            .iter()
            .map(|b| match b.field {
                Field::Real => b.dim,
                Field::Complex => 2 * b.dim,
            })
            .collect();
        let mut cs = RSparse::new();
        embed_entries(&mut cs, p, &p.objective);
        let mut a = Vec::with_capacity(p.constraints.len());
        let mut slack_block = Vec::with_capacity(p.constraints.len());
        for con in &p.constraints {
            let mut ak = RSparse::new();
            embed_entries(&mut ak, p, &con.a);
            match con.sense {
                Sense::Eq => slack_block.push(None),
                Sense::Le => {
                    let blk = dims.len();
                    dims.push(1);
                    ak.push((blk, 0, 0, 1.0));
                    slack_block.push(Some(blk));
                }
            }
            a.push(ak);
        }
        let b = p.constraints.iter().map(|c| c.b).collect();
        RealProblem { dims, c: cs, a, b, slack_block }
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn zeros(&self) -> Vec<RMat> {
        self.dims.iter().map(|&d| RMat::zeros(d, d)).collect()
    }

    pub fn dense(&self, s: &RSparse) -> Vec<RMat> {
        let mut out = self.zeros();
        for &(b, i, j, v) in s {
            out[b][(i, j)] += v;
        }
        out
    }

    pub fn apply_a(&self, x: &[RMat]) -> DVector<f64> {
        DVector::from_iterator(self.m(), self.a.iter().map(|ak| sparse_inner(ak, x)))
    }

    pub fn apply_at(&self, y: &DVector<f64>) -> Vec<RMat> {
        let mut out = self.zeros();
        for (k, ak) in self.a.iter().enumerate() {
            let yk = y[k];
            if yk == 0.0 {
                continue;
            }
            for &(b, i, j, v) in ak {
                out[b][(i, j)] += yk * v;
            }
        }
        out
    }
}

pub(crate) fn sparse_inner(s: &RSparse, x: &[RMat]) -> f64 {
    s.iter().map(|&(b, i, j, v)| v * x[b][(i, j)]).sum()
}

pub(crate) fn inner(a: &[RMat], b: &[RMat]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

pub(crate) fn fro(a: &[RMat]) -> f64 {
    a.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt()
}

fn complexify(m: &RMat, n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| {
        let re = 0.5 * (m[(i, j)] + m[(i + n, j + n)]);
        let im = 0.5 * (m[(i + n, j)] - m[(i, j + n)]);
        c(re, im)
    })
}

fn to_complex(m: &RMat) -> CMat {
    let s = 0.5 * (m + m.transpose());
    s.map(|x| c(x, 0.0))
}

pub(crate) fn lift_solution(p: &SdpProblem, real: &RealProblem, raw: RawSolution, tol: f64) -> SdpSolution {
    let mut primal = Vec::with_capacity(p.blocks.len());
    let mut dual_slack = Vec::with_capacity(p.blocks.len());
    for (k, spec) in p.blocks.iter().enumerate() {
        match spec.field {
            Field::Real => {
                primal.push(to_complex(&raw.x[k]));
                dual_slack.push(to_complex(&raw.z[k]));
            }
            Field::Complex => {
                primal.push(complexify(&raw.x[k], spec.dim));
                dual_slack.push(complexify(&raw.z[k], spec.dim) * c(2.0, 0.0));
            }
        }
    }
    let slacks = real
        .slack_block
        .iter()
        .map(|s| s.map(|b| raw.x[b][(0, 0)].max(0.0)).unwrap_or(0.0))
        .collect();
    let dual: Vec<f64> = raw.y.iter().copied().collect();
    let mut sol = SdpSolution {
        status: raw.status,
        method: raw.method,
        primal,
        slacks,
        dual,
        dual_slack,
        primal_objective: 0.0,
        dual_objective: 0.0,
        gap: 0.0,
        primal_residual: 0.0,
        dual_residual: 0.0,
        iterations: raw.iterations,
    };
    let v = verify(p, &sol);
    sol.primal_objective = v.primal_objective;
    sol.dual_objective = v.dual_objective;
    sol.gap = v.gap;
    sol.primal_residual = v.primal_residual;
    sol.dual_residual = v.dual_residual;
    if sol.status == Status::Optimal && (v.gap > tol || v.primal_residual > tol || v.dual_residual > tol) {
        sol.status = Status::MaxIter;
    }
    sol
}
