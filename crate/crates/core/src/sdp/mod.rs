//! Dense semidefinite programs over Hermitian block-diagonal variables.
//!
//! Primal: minimize ⟨C, X⟩ subject to ⟨A_k, X⟩ = b_k (or ≤ b_k), X ≽ 0.
//! Dual:   maximize bᵀy subject to C − Σ y_k A_k ≽ 0, with y_k ≤ 0 on ≤ rows.
//!
//! Complex blocks are solved through the real symmetric embedding.

mod admm;
mod embed;
mod ipm;
mod lmi;
mod verify;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};

pub use lmi::{HermVar, Lmi, LmiSolution, MatVar};
pub use verify::{verify, Verification};

pub const DEFAULT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub dim: usize,
    pub field: Field,
}

/// One stored entry of a Hermitian block matrix. Off-diagonal entries
/// (row < col) implicitly carry their conjugate partner at (col, row).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: C64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BlockMatrix {
    pub entries: Vec<Entry>,
}

impl BlockMatrix {
    pub fn new() -> Self {
        BlockMatrix { entries: Vec::new() }
    }

    /// Add v at (row, col) together with its Hermitian partner.
    pub fn push(&mut self, block: usize, row: usize, col: usize, value: C64) {
        if row <= col {
            self.entries.push(Entry { block, row, col, value });
        } else {
            self.entries.push(Entry { block, row: col, col: row, value: value.conj() });
        }
    }

    /// Upper triangle of a dense Hermitian matrix placed in `block`.
    pub fn from_dense(block: usize, m: &CMat) -> Self {
        let mut out = BlockMatrix::new();
        out.add_dense(block, m, 1.0);
        out
    }

    pub fn add_dense(&mut self, block: usize, m: &CMat, scale: f64) {
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                let v = m[(i, j)] * scale;
                if v.norm() > 0.0 {
                    self.entries.push(Entry { block, row: i, col: j, value: v });
                }
            }
        }
    }

    /// Dense Hermitian matrix of `block` with dimension `dim`.
    pub fn dense(&self, block: usize, dim: usize) -> CMat {
        let mut m = CMat::zeros(dim, dim);
        for e in self.entries.iter().filter(|e| e.block == block) {
            if e.row == e.col {
                m[(e.row, e.row)] += C64::new(e.value.re, 0.0);
            } else {
                m[(e.row, e.col)] += e.value;
                m[(e.col, e.row)] += e.value.conj();
            }
        }
        m
    }

    /// ⟨self, X⟩ = Re tr(self · X) for Hermitian block variables X.
    pub fn inner(&self, x: &[CMat]) -> f64 {
        let mut s = 0.0;
        for e in &self.entries {
            let xb = &x[e.block];
            if e.row == e.col {
                s += e.value.re * xb[(e.row, e.row)].re;
            } else {
                s += 2.0 * (e.value * xb[(e.col, e.row)]).re;
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Eq,
    Le,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub a: BlockMatrix,
    pub b: f64,
    pub sense: Sense,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    pub blocks: Vec<BlockSpec>,
    pub objective: BlockMatrix,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    /// No X satisfies the constraints; `dual` holds an improving ray.
    Infeasible,
    /// The dual is infeasible (primal unbounded); `primal` holds a ray.
    DualInfeasible,
    MaxIter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    InteriorPoint,
    Splitting,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpSolution {
    pub status: Status,
    pub method: Method,
    #[serde(with = "crate::io::cmat_vec")]
    pub primal: Vec<CMat>,
    /// Slack s_k ≥ 0 of each ≤ row (zero for equality rows).
    pub slacks: Vec<f64>,
    pub dual: Vec<f64>,
    #[serde(with = "crate::io::cmat_vec")]
    pub dual_slack: Vec<CMat>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

impl SdpProblem {
    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::Solver("problem has no blocks".into()));
        }
        let check = |m: &BlockMatrix, what: &str| -> Result<()> {
            for e in &m.entries {
                let spec = self
                    .blocks
                    .get(e.block)
                    .ok_or_else(|| Error::Solver(format!("{what}: block {} does not exist", e.block)))?;
                if e.row >= spec.dim || e.col >= spec.dim || e.row > e.col {
                    return Err(Error::Solver(format!("{what}: entry ({}, {}) outside upper triangle", e.row, e.col)));
                }
                if !e.value.re.is_finite() || !e.value.im.is_finite() {
                    return Err(Error::Solver(format!("{what}: non-finite coefficient")));
                }
                if spec.field == Field::Real && e.value.im != 0.0 {
                    return Err(Error::Solver(format!("{what}: complex coefficient in real block {}", e.block)));
                }
                if e.row == e.col && e.value.im.abs() > 1e-14 * (1.0 + e.value.re.abs()) {
                    return Err(Error::Solver(format!("{what}: non-real diagonal coefficient")));
                }
            }
            Ok(())
        };
        if self.blocks.iter().any(|b| b.dim == 0) {
            return Err(Error::Solver("zero-dimensional block".into()));
        }
        check(&self.objective, "objective")?;
        for (k, c) in self.constraints.iter().enumerate() {
            check(&c.a, &format!("constraint {k}"))?;
            if !c.b.is_finite() {
                return Err(Error::Solver(format!("constraint {k}: non-finite right-hand side")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse { field: "sdp".into(), message: e.to_string() })
    }
}

/// Solve with the interior-point method, falling back to a splitting method
/// on numerical breakdown.
pub fn solve(p: &SdpProblem, tol: f64) -> Result<SdpSolution> {
    p.validate()?;
    if !(tol > 0.0) {
        return Err(Error::param("tolerance must be positive"));
    }
    let real = embed::RealProblem::from_problem(p);
    let out = match ipm::solve(&real, tol) {
        ipm::Outcome::Done(s) => s,
        ipm::Outcome::Breakdown(warm) => admm::solve(&real, tol, warm),
    };
    Ok(embed::lift_solution(p, &real, out, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, r};

    #[test]
    fn dominance_forces_equality() {
        // minimize tr σ s.t. σ − ρ ≽ 0, written as an LMI in σ.
        let rho = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![r(0.5), r(0.3)]));
        let mut lmi = Lmi::new();
        let b = lmi.add_block(2, Field::Real);
        lmi.add_constant_dense(b, &(-&rho));
        let s = lmi.add_herm_var(2, Field::Real);
        for k in 0..2 {
            lmi.add_objective(s.diag(k), -1.0);
        }
        lmi.place_herm(&s, b, |i, j| vec![(i, j, r(1.0))]);
        let sol = lmi.solve(1e-9).unwrap();
        assert_eq!(sol.solution.status, Status::Optimal);
        assert!((-sol.value - 0.8).abs() < 1e-7);
        let sigma = s.value(&sol.y);
        assert!((sigma[(0, 0)].re - 0.5).abs() < 1e-6 && (sigma[(1, 1)].re - 0.3).abs() < 1e-6);
    }

    #[test]
    fn complex_block_and_le_constraint() {
        // minimize −Re tr(H X) s.t. tr X ≤ 1: value −λ_max(H).
        let h = CMat::from_row_slice(2, 2, &[r(1.0), c(0.0, 1.0), c(0.0, -1.0), r(1.0)]);
        let p = SdpProblem {
            blocks: vec![BlockSpec { dim: 2, field: Field::Complex }],
            objective: BlockMatrix::from_dense(0, &(-&h)),
            constraints: vec![Constraint {
                a: BlockMatrix::from_dense(0, &CMat::identity(2, 2)),
                b: 1.0,
                sense: Sense::Le,
            }],
        };
        let sol = solve(&p, 1e-8).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert!((sol.primal_objective + 2.0).abs() < 1e-7);
        let v = verify(&p, &sol);
        assert!(v.gap <= 1e-8 && v.primal_residual <= 1e-8 && v.dual_residual <= 1e-8, "{v:?}");
    }

    #[test]
    fn infeasible_problem_detected() {
        // tr X = −1 with X ≽ 0 is infeasible.
        let p = SdpProblem {
            blocks: vec![BlockSpec { dim: 2, field: Field::Real }],
            objective: BlockMatrix::new(),
            constraints: vec![Constraint {
                a: BlockMatrix::from_dense(0, &CMat::identity(2, 2)),
                b: -1.0,
                sense: Sense::Eq,
            }],
        };
        let sol = solve(&p, 1e-7).unwrap();
        assert_eq!(sol.status, Status::Infeasible);
        assert!(sol.dual[0] < 0.0);
    }

    #[test]
    fn json_dump_round_trips() {
        let p = SdpProblem {
            blocks: vec![BlockSpec { dim: 2, field: Field::Complex }],
            objective: BlockMatrix::from_dense(0, &CMat::identity(2, 2)),
            constraints: vec![],
        };
        assert_eq!(SdpProblem::from_json(&p.to_json()).unwrap(), p);
    }
}
