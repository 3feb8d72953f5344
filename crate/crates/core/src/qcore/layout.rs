use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, ZERO};

/// Ordered subsystem dimensions. The first subsystem is the most significant
/// digit of the Kronecker index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimLayout {
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl DimLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidLayout("no subsystems".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidLayout(format!("zero dimension in {dims:?}")));
        }
        Ok(DimLayout { dims, labels: None })
    }

    pub fn single(d: usize) -> Result<Self> {
        Self::new(vec![d])
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dims.len() {
            return Err(Error::InvalidLayout("label count differs from subsystem count".into()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn concat(&self, other: &DimLayout) -> DimLayout {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let labels = match (&self.labels, &other.labels) {
            (Some(a), Some(b)) => Some(a.iter().chain(b.iter()).cloned().collect()),
            _ => None,
        };
        DimLayout { dims, labels }
    }

    pub fn subset(&self, keep: &[usize]) -> DimLayout {
        DimLayout {
            dims: keep.iter().map(|&k| self.dims[k]).collect(),
            labels: self.labels.as_ref().map(|l| keep.iter().map(|&k| l[k].clone()).collect()),
        }
    }

    pub fn check_indices(&self, idx: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.dims.len()];
        for &k in idx {
            if k >= self.dims.len() {
                return Err(Error::BadSubsystem { index: k, count: self.dims.len() });
            }
            if seen[k] {
                return Err(Error::InvalidLayout(format!("subsystem {k} listed twice")));
            }
            seen[k] = true;
        }
        Ok(())
    }

    fn digits(&self, mut idx: usize, out: &mut [usize]) {
        for (k, &d) in self.dims.iter().enumerate().rev() {
            out[k] = idx % d;
            idx /= d;
        }
    }

    /// For each flat index, its flat index within `keep` and within the rest.
    fn split_indices(&self, keep: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let n = self.total();
        let rest: Vec<usize> = (0..self.dims.len()).filter(|k| !keep.contains(k)).collect();
        let mut dig = vec![0; self.dims.len()];
        let mut ki = Vec::with_capacity(n);
        let mut ri = Vec::with_capacity(n);
        for i in 0..n {
            self.digits(i, &mut dig);
            let mut a = 0;
            for &k in keep {
                a = a * self.dims[k] + dig[k];
            }
            let mut b = 0;
            for &k in &rest {
                b = b * self.dims[k] + dig[k];
            }
            ki.push(a);
            ri.push(b);
        }
        (ki, ri)
    }

    /// Map new flat index -> old flat index for reordering subsystems as `order`.
    pub fn permutation(&self, order: &[usize]) -> Result<Vec<usize>> {
        if order.len() != self.dims.len() {
            return Err(Error::InvalidLayout("permutation must list every subsystem".into()));
        }
        self.check_indices(order)?;
        let (ki, _) = self.split_indices(order);
        let mut map = vec![0; ki.len()];
        for (old, &new) in ki.iter().enumerate() {
            map[new] = old;
        }
        Ok(map)
    }
}

/// Partial trace of a square matrix over every subsystem not in `keep`.
/// The kept subsystems appear in the order given.
pub fn partial_trace_mat(m: &CMat, layout: &DimLayout, keep: &[usize]) -> Result<CMat> {
    if m.nrows() != layout.total() || m.ncols() != layout.total() {
        return Err(Error::dims(format!(
            "matrix {}x{} does not match layout {:?}",
            m.nrows(),
            m.ncols(),
            layout.dims
        )));
    }
    layout.check_indices(keep)?;
    let dk: usize = keep.iter().map(|&k| layout.dims[k]).product();
    let dr = layout.total() / dk;
    let (ki, ri) = layout.split_indices(keep);
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(dk); dr];
    for i in 0..layout.total() {
        groups[ri[i]].push((i, ki[i]));
    }
    let mut out = CMat::zeros(dk, dk);
    for g in &groups {
        for &(i, a) in g {
            for &(j, b) in g {
                out[(a, b)] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

pub fn permute_mat(m: &CMat, layout: &DimLayout, order: &[usize]) -> Result<CMat> {
    let map = layout.permutation(order)?;
    let n = map.len();
    Ok(CMat::from_fn(n, n, |i, j| m[(map[i], map[j])]))
}

pub fn permute_vec(v: &CVec, layout: &DimLayout, order: &[usize]) -> Result<CVec> {
    let map = layout.permutation(order)?;
    Ok(CVec::from_fn(map.len(), |i, _| v[map[i]]))
}

/// Reduced density matrix of |v><v| on `keep`, without forming |v><v|.
pub fn reduce_vec(v: &CVec, layout: &DimLayout, keep: &[usize]) -> Result<CMat> {
    if v.len() != layout.total() {
        return Err(Error::dims("vector length does not match layout"));
    }
    layout.check_indices(keep)?;
    let dk: usize = keep.iter().map(|&k| layout.dims[k]).product();
    let dr = layout.total() / dk;
    let (ki, ri) = layout.split_indices(keep);
    let mut psi = CMat::from_element(dk, dr, ZERO);
    for i in 0..v.len() {
        psi[(ki[i], ri[i])] = v[i];
    }
    Ok(&psi * psi.adjoint())
}

/// Reshape a vector on layout (X, Y) with X = `rows` subsystems into a matrix
/// with entry (x, y) = v[x ⊗ y].
pub fn vec_to_mat(v: &CVec, layout: &DimLayout, rows: &[usize]) -> Result<CMat> {
    layout.check_indices(rows)?;
    let dk: usize = rows.iter().map(|&k| layout.dims[k]).product();
    let dr = layout.total() / dk;
    let (ki, ri) = layout.split_indices(rows);
    let mut out = CMat::zeros(dk, dr);
    for i in 0..v.len() {
        out[(ki[i], ri[i])] = v[i];
    }
    Ok(out)
}

/// Embed an operator acting on subsystem `k` into the full layout, rectangular
/// if `op` changes that subsystem's dimension.
pub fn embed_op(op: &CMat, layout: &DimLayout, k: usize) -> Result<CMat> {
    if k >= layout.len() {
        return Err(Error::BadSubsystem { index: k, count: layout.len() });
    }
    if op.ncols() != layout.dims[k] {
        return Err(Error::dims(format!(
            "operator input {} does not match subsystem {} of dim {}",
            op.ncols(),
            k,
            layout.dims[k]
        )));
    }
    let before: usize = layout.dims[..k].iter().product();
    let after: usize = layout.dims[k + 1..].iter().product();
    Ok(CMat::identity(before, before).kronecker(op).kronecker(&CMat::identity(after, after)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs};

    fn sample(n: usize) -> CMat {
        CMat::from_fn(n, n, |i, j| c((i * 7 + j * 3) as f64 * 0.1, (i as f64) - (j as f64)))
    }

    #[test]
    fn partial_trace_matches_index_loop() {
        let lay = DimLayout::new(vec![2, 3]).unwrap();
        let m = sample(6);
        let a = partial_trace_mat(&m, &lay, &[0]).unwrap();
        let b = partial_trace_mat(&m, &lay, &[1]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let s: crate::linalg::C64 = (0..3).map(|t| m[(i * 3 + t, j * 3 + t)]).sum();
                assert!((a[(i, j)] - s).norm() < 1e-12);
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let s: crate::linalg::C64 = (0..2).map(|t| m[(t * 3 + i, t * 3 + j)]).sum();
                assert!((b[(i, j)] - s).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn permutation_swaps_kron_factors() {
        let x = sample(2);
        let y = sample(3);
        let lay = DimLayout::new(vec![2, 3]).unwrap();
        let p = permute_mat(&x.kronecker(&y), &lay, &[1, 0]).unwrap();
        assert!(max_abs(&(p - y.kronecker(&x))) < 1e-12);
    }

    #[test]
    fn bad_subsystem_rejected() {
        let lay = DimLayout::new(vec![2, 2]).unwrap();
        assert!(matches!(
            partial_trace_mat(&sample(4), &lay, &[2]),
            Err(Error::BadSubsystem { .. })
        ));
        assert!(DimLayout::new(vec![2, 0]).is_err());
    }
}
