//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_all(ms: &[&CMat]) -> CMat {
    let mut out = CMat::identity(1, 1);
    for m in ms {
        out = out.kronecker(*m);
    }
    out
}

pub fn trace(m: &CMat) -> C64 {
    m.trace()
}

/// Re tr(A B) without forming the product.
pub fn inner_re(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut s = 0.0;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            let x = a[(i, k)] * b[(k, i)];
            s += x.re;
        }
    }
    s
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn hermiticity_defect(m: &CMat) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_real(m: &CMat, tol: f64) -> bool {
    m.iter().all(|z| z.im.abs() <= tol)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Spectral {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

pub fn eigh(m: &CMat) -> Spectral {
    let n = m.nrows();
    if n == 0 {
        return Spectral { values: vec![], vectors: CMat::zeros(0, 0) };
    }
    let h = hermitian_part(m);
    // Real input keeps real eigenvectors.
    let (evals, evecs): (Vec<f64>, CMat) = if is_real(&h, 0.0) {
        let eig = h.map(|z| z.re).symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors.map(r))
    } else {
        let eig = h.symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| evals[a].total_cmp(&evals[b]).then(a.cmp(&b)));
    let values = order.iter().map(|&k| evals[k]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (j, &k) in order.iter().enumerate() {
        vectors.set_column(j, &evecs.column(k));
    }
    Spectral { values, vectors }
}

impl Spectral {
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return vec![];
    }
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn min_eig(m: &CMat) -> f64 {
    eigvalsh(m).first().copied().unwrap_or(0.0)
}

pub fn max_eig(m: &CMat) -> f64 {
    eigvalsh(m).last().copied().unwrap_or(0.0)
}

/// Square root of a PSD matrix; negative eigenvalues are clamped to zero.
pub fn sqrt_psd(m: &CMat) -> CMat {
    eigh(m).map(|x| x.max(0.0).sqrt())
}

/// Generalized inverse power on the support (eigenvalues above `cut`).
pub fn pinv_power(m: &CMat, p: f64, cut: f64) -> CMat {
    eigh(m).map(|x| if x > cut { x.powf(p) } else { 0.0 })
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return vec![];
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

pub fn trace_norm(m: &CMat) -> f64 {
    if m.nrows() == m.ncols() && hermiticity_defect(m) <= 1e-13 * (1.0 + max_abs(m)) {
        return eigvalsh(m).iter().map(|x| x.abs()).sum();
    }
    singular_values(m).iter().sum()
}

pub fn operator_norm(m: &CMat) -> f64 {
    singular_values(m).iter().copied().fold(0.0, f64::max)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Shannon entropy (bits) of a nonnegative spectrum; entries below 1e-300 skipped.
pub fn shannon_bits(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&x| x > 1e-300)
        .map(|&x| -x * x.log2())
        .sum()
}

/// Binary entropy in bits.
pub fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// log2 of a PSD matrix with eigenvalues floored at `floor`.
pub fn log2_psd(m: &CMat, floor: f64) -> CMat {
    eigh(m).map(|x| x.max(floor).log2())
}

/// Polar factor U of a square or rectangular matrix M = U |M|, via SVD.
/// Singular directions below `cut` are dropped, so U is a partial isometry.
pub fn polar_partial_isometry(m: &CMat, cut: f64) -> CMat {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v_t");
    let mut out = CMat::zeros(m.nrows(), m.ncols());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cut {
            out += u.column(k) * vt.row(k);
        }
    }
    out
}

/// Gram–Schmidt completion: returns a unitary whose first columns span `cols`.
pub fn complete_basis(cols: &CMat) -> CMat {
    let n = cols.nrows();
    let mut basis: Vec<CVec> = Vec::with_capacity(n);
    let push = |v: CVec, basis: &mut Vec<CVec>| {
        let mut w = v;
        for _ in 0..2 {
            for b in basis.iter() {
                let p = b.dotc(&w);
                w -= b * p;
            }
        }
        let nrm = w.norm();
        if nrm > 1e-10 && basis.len() < n {
            basis.push(w / r(nrm));
        }
    };
    for j in 0..cols.ncols() {
        push(cols.column(j).into_owned(), &mut basis);
    }
    for j in 0..n {
        let mut e = CVec::zeros(n);
        e[j] = ONE;
        push(e, &mut basis);
    }
    CMat::from_columns(&basis)
}

pub fn check_square(m: &CMat, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::dims(format!("{what} must be square, got {}x{}", m.nrows(), m.ncols())));
    }
    Ok(m.nrows())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_sorted_and_reconstructs() {
        let m = CMat::from_row_slice(2, 2, &[r(2.0), c(0.0, 1.0), c(0.0, -1.0), r(2.0)]);
        let s = eigh(&m);
        assert!((s.values[0] - 1.0).abs() < 1e-12 && (s.values[1] - 3.0).abs() < 1e-12);
        assert!(max_abs(&(s.map(|x| x) - &m)) < 1e-12);
    }

    #[test]
    fn trace_norm_of_pauli_difference() {
        let z = CMat::from_diagonal(&CVec::from_vec(vec![r(1.0), r(-1.0)]));
        assert!((trace_norm(&z) - 2.0).abs() < 1e-12);
        let nonsq = CMat::from_row_slice(1, 2, &[r(3.0), r(4.0)]);
        assert!((trace_norm(&nonsq) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn binary_entropy_endpoints() {
        assert_eq!(h2(0.0), 0.0);
        assert!((h2(0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn completion_is_unitary() {
        let v = CMat::from_column_slice(3, 1, &[r(1.0), c(0.0, 1.0), r(0.0)]) / r(2f64.sqrt());
        let u = complete_basis(&v);
        assert!(max_abs(&(u.adjoint() * &u - eye(3))) < 1e-12);
        assert!((u.column(0) - v.column(0)).norm() < 1e-12);
    }
}
