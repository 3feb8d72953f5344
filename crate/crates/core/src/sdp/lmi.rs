//! Builder for problems stated as linear matrix inequalities:
//! maximize Σ c_k y_k subject to F₀ + Σ y_k F_k ≽ 0 (blockwise).
//! This is exactly the dual form of [`SdpProblem`] with C = F₀, A_k = −F_k.

use super::{solve, BlockMatrix, BlockSpec, Constraint, Field, SdpProblem, SdpSolution, Sense, Status};
use crate::error::{Error, Result};
use crate::linalg::{c, CMat, C64};

#[derive(Debug, Clone, Default)]
pub struct Lmi {
    blocks: Vec<BlockSpec>,
    constant: BlockMatrix,
    coefs: Vec<BlockMatrix>,
    objective: Vec<f64>,
}

/// Hermitian matrix variable σ = Σ y_k E_k in the standard real basis.
#[derive(Debug, Clone)]
pub struct HermVar {
    n: usize,
    re: Vec<usize>,
    im: Vec<Option<usize>>,
}

/// General n×m matrix variable with independent real and imaginary parts.
#[derive(Debug, Clone)]
pub struct MatVar {
    rows: usize,
    cols: usize,
    re: Vec<usize>,
    im: Vec<Option<usize>>,
}

#[derive(Debug, Clone)]
pub struct LmiSolution {
    /// Dual objective Σ c_k y_k at the returned point.
    pub value: f64,
    /// Primal objective; the optimum lies between `value` and `bound`.
    pub bound: f64,
    pub y: Vec<f64>,
    pub solution: SdpSolution,
}

fn upper(n: usize, i: usize, j: usize) -> usize {
    i * n + j
}

impl HermVar {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn diag(&self, k: usize) -> usize {
        self.re[upper(self.n, k, k)]
    }

    pub fn value(&self, y: &[f64]) -> CMat {
        let n = self.n;
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let idx = upper(n, i, j);
                let v = c(y[self.re[idx]], self.im[idx].map(|k| y[k]).unwrap_or(0.0));
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
        for i in 0..n {
            m[(i, i)].im = 0.0;
        }
        m
    }

    /// Variables whose sum with unit weights is tr σ.
    pub fn trace_vars(&self) -> Vec<usize> {
        (0..self.n).map(|k| self.diag(k)).collect()
    }
}

impl MatVar {
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn value(&self, y: &[f64]) -> CMat {
        CMat::from_fn(self.rows, self.cols, |i, j| {
            let idx = i * self.cols + j;
            c(y[self.re[idx]], self.im[idx].map(|k| y[k]).unwrap_or(0.0))
        })
    }

    pub fn re(&self, i: usize, j: usize) -> usize {
        self.re[i * self.cols + j]
    }

    pub fn im(&self, i: usize, j: usize) -> Option<usize> {
        self.im[i * self.cols + j]
    }
}

impl Lmi {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, dim: usize, field: Field) -> usize {
        self.blocks.push(BlockSpec { dim, field });
        self.blocks.len() - 1
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn var_count(&self) -> usize {
        self.coefs.len()
    }

    pub fn add_constant(&mut self, block: usize, row: usize, col: usize, v: C64) {
        self.constant.push(block, row, col, v);
    }

    pub fn add_constant_dense(&mut self, block: usize, m: &CMat) {
        self.constant.add_dense(block, m, 1.0);
    }

    pub fn add_var(&mut self) -> usize {
        self.coefs.push(BlockMatrix::new());
        self.objective.push(0.0);
        self.coefs.len() - 1
    }

    pub fn add_objective(&mut self, var: usize, coef: f64) {
        self.objective[var] += coef;
    }

    pub fn add_coef(&mut self, var: usize, block: usize, row: usize, col: usize, v: C64) {
        self.coefs[var].push(block, row, col, v);
    }

    pub fn add_herm_var(&mut self, n: usize, field: Field) -> HermVar {
        let mut re = vec![usize::MAX; n * n];
        let mut im = vec![None; n * n];
        for i in 0..n {
            for j in i..n {
                re[upper(n, i, j)] = self.add_var();
                if i != j && field == Field::Complex {
                    im[upper(n, i, j)] = Some(self.add_var());
                }
            }
        }
        HermVar { n, re, im }
    }

    pub fn add_mat_var(&mut self, rows: usize, cols: usize, field: Field) -> MatVar {
        let mut re = Vec::with_capacity(rows * cols);
        let mut im = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            re.push(self.add_var());
            im.push(if field == Field::Complex { Some(self.add_var()) } else { None });
        }
        MatVar { rows, cols, re, im }
    }

    /// Place σ linearly into `block`: entry σ[i][j] (i ≤ j) is added at each
    /// returned (row, col) with the given coefficient. The placement must be
    /// Hermitian-structured, i.e. σ[j][i] lands at the mirrored positions.
    pub fn place_herm(&mut self, var: &HermVar, block: usize, f: impl Fn(usize, usize) -> Vec<(usize, usize, C64)>) {
        let n = var.n;
        for i in 0..n {
            for j in i..n {
                let idx = upper(n, i, j);
                for (row, col, w) in f(i, j) {
                    self.add_coef(var.re[idx], block, row, col, w);
                    if let Some(k) = var.im[idx] {
                        self.add_coef(k, block, row, col, w * c(0.0, 1.0));
                    }
                }
            }
        }
    }

    /// Place a general matrix variable Y at rows `r0..`, columns `c0..` of
    /// `block`, strictly above the diagonal; Y† fills the mirrored block.
    pub fn place_mat(&mut self, var: &MatVar, block: usize, r0: usize, c0: usize) {
        for i in 0..var.rows {
            for j in 0..var.cols {
                let idx = i * var.cols + j;
                self.add_coef(var.re[idx], block, r0 + i, c0 + j, c(1.0, 0.0));
                if let Some(k) = var.im[idx] {
                    self.add_coef(k, block, r0 + i, c0 + j, c(0.0, 1.0));
                }
            }
        }
    }

    pub fn to_problem(&self) -> SdpProblem {
        let constraints = self
            .coefs
            .iter()
            .zip(&self.objective)
            .map(|(f, &b)| {
                let mut a = f.clone();
                for e in a.entries.iter_mut() {
                    e.value = -e.value;
                }
                Constraint { a, b, sense: Sense::Eq }
            })
            .collect();
        SdpProblem { blocks: self.blocks.clone(), objective: self.constant.clone(), constraints }
    }

    pub fn solve(&self, tol: f64) -> Result<LmiSolution> {
        let p = self.to_problem();
        let sol = solve(&p, tol)?;
        match sol.status {
            Status::Optimal | Status::MaxIter => {}
            Status::Infeasible => return Err(Error::Solver("LMI is unbounded (dual ray found)".into())),
            Status::DualInfeasible => return Err(Error::Solver("LMI is infeasible (certified)".into())),
        }
        Ok(LmiSolution { value: sol.dual_objective, bound: sol.primal_objective, y: sol.dual.clone(), solution: sol })
    }
}
