use serde::{Deserialize, Serialize};

use super::{SdpProblem, SdpSolution, Sense};
use crate::linalg::{min_eig, CMat};

/// Residuals recomputed from the problem data in complex arithmetic,
/// independent of the solver's internal embedding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub gap: f64,
    /// Max of constraint violations and negative primal eigenvalues.
    pub primal_residual: f64,
    /// Max of negative eigenvalues of C − Σ y_k A_k and sign violations of y.
    pub dual_residual: f64,
}

impl Verification {
    pub fn certified(&self, tol: f64) -> bool {
        self.gap <= tol && self.primal_residual <= tol && self.dual_residual <= tol
    }
}

pub fn verify(p: &SdpProblem, sol: &SdpSolution) -> Verification {
    let pobj = p.objective.inner(&sol.primal);
    let dobj: f64 = p.constraints.iter().zip(&sol.dual).map(|(c, y)| c.b * y).sum();

    let mut pres: f64 = 0.0;
    for (k, con) in p.constraints.iter().enumerate() {
        let s = match con.sense {
            Sense::Eq => 0.0,
            Sense::Le => sol.slacks.get(k).copied().unwrap_or(0.0),
        };
        pres = pres.max((con.a.inner(&sol.primal) + s - con.b).abs());
        if s < 0.0 {
            pres = pres.max(-s);
        }
    }
    for x in &sol.primal {
        pres = pres.max(-min_eig(x));
    }

    let mut zs: Vec<CMat> = p.blocks.iter().enumerate().map(|(b, spec)| p.objective.dense(b, spec.dim)).collect();
    let mut dres: f64 = 0.0;
    for (con, &y) in p.constraints.iter().zip(&sol.dual) {
        if con.sense == Sense::Le {
            dres = dres.max(y);
        }
        for e in &con.a.entries {
            let z = &mut zs[e.block];
            if e.row == e.col {
                z[(e.row, e.row)] -= crate::linalg::r(y * e.value.re);
            } else {
                z[(e.row, e.col)] -= e.value * y;
                z[(e.col, e.row)] -= e.value.conj() * y;
            }
        }
    }
    for z in &zs {
        dres = dres.max(-min_eig(z));
    }

    Verification {
        primal_objective: pobj,
        dual_objective: dobj,
        gap: (pobj - dobj).abs(),
        primal_residual: pres,
        dual_residual: dres,
    }
}
