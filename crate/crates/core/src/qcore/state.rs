use rand::Rng;
use rand_distr::StandardNormal;

use super::layout::{partial_trace_mat, permute_mat, reduce_vec, DimLayout};
use crate::error::{Error, Result};
use crate::linalg::{c, eigh, hermiticity_defect, r, CMat, CVec, ONE};

pub fn psd_tol(dim: usize) -> f64 {
    1e-9 * dim.max(1) as f64
}

/// Hermitian PSD operator with trace in (0, 1]. Whether the trace is exactly
/// one is fixed by the constructor used and carried as a flag.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMat,
    layout: DimLayout,
    normalized: bool,
}

fn validate(matrix: &CMat, layout: &DimLayout) -> Result<f64> {
    let n = layout.total();
    if matrix.nrows() != n || matrix.ncols() != n {
        return Err(Error::dims(format!(
            "matrix {}x{} vs layout total {}",
            matrix.nrows(),
            matrix.ncols(),
            n
        )));
    }
    let tol = psd_tol(n);
    let herm = hermiticity_defect(matrix);
    if herm > tol {
        return Err(Error::NotHermitian(herm));
    }
    let lo = eigh(matrix).min();
    if lo < -tol {
        return Err(Error::NegativeEigenvalue(lo));
    }
    Ok(matrix.trace().re)
}

impl DensityOperator {
    /// A normalized state; trace must be 1 within tolerance.
    pub fn new(matrix: CMat, layout: DimLayout) -> Result<Self> {
        let t = validate(&matrix, &layout)?;
        if (t - 1.0).abs() > psd_tol(layout.total()) {
            return Err(Error::NotNormalized(t));
        }
        Ok(DensityOperator { matrix: crate::linalg::hermitian_part(&matrix), layout, normalized: true })
    }

    /// A sub-normalized state with trace in (0, 1].
    pub fn new_subnormalized(matrix: CMat, layout: DimLayout) -> Result<Self> {
        let t = validate(&matrix, &layout)?;
        if t <= 0.0 || t > 1.0 + psd_tol(layout.total()) {
            return Err(Error::InvalidTrace(t));
        }
        Ok(DensityOperator { matrix: crate::linalg::hermitian_part(&matrix), layout, normalized: false })
    }

    pub fn from_matrix(matrix: CMat, dims: &[usize]) -> Result<Self> {
        Self::new(matrix, DimLayout::new(dims.to_vec())?)
    }

    pub(crate) fn trusted(matrix: CMat, layout: DimLayout, normalized: bool) -> Self {
        DensityOperator { matrix, layout, normalized }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn layout(&self) -> &DimLayout {
        &self.layout
    }

    pub fn dims(&self) -> &[usize] {
        &self.layout.dims
    }

    pub fn dim(&self) -> usize {
        self.layout.total()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn require_normalized(&self) -> Result<()> {
        if self.normalized {
            Ok(())
        } else {
            Err(Error::NotNormalized(self.trace()))
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        crate::linalg::eigvalsh(&self.matrix)
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let m = partial_trace_mat(&self.matrix, &self.layout, keep)?;
        Ok(DensityOperator { matrix: m, layout: self.layout.subset(keep), normalized: self.normalized })
    }

    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let m = permute_mat(&self.matrix, &self.layout, order)?;
        let layout = self.layout.subset(order);
        Ok(DensityOperator { matrix: m, layout, normalized: self.normalized })
    }

    pub fn relayout(&self, dims: Vec<usize>) -> Result<Self> {
        let layout = DimLayout::new(dims)?;
        if layout.total() != self.dim() {
            return Err(Error::dims("relayout changes total dimension"));
        }
        Ok(DensityOperator { matrix: self.matrix.clone(), layout, normalized: self.normalized })
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator {
            matrix: self.matrix.kronecker(&other.matrix),
            layout: self.layout.concat(&other.layout),
            normalized: self.normalized && other.normalized,
        }
    }

    /// Clip negative eigenvalues and rescale to unit trace. Never applied
    /// implicitly by any other routine.
    pub fn clip_and_renormalize(matrix: &CMat, layout: DimLayout) -> Result<Self> {
        let s = eigh(matrix);
        let clipped = s.map(|x| x.max(0.0));
        let t = clipped.trace().re;
        if t <= 0.0 {
            return Err(Error::InvalidTrace(t));
        }
        Self::new(clipped / r(t), layout)
    }

    /// Canonical purification on (system, C) with C of dimension rank.
    pub fn purify(&self) -> PureState {
        let s = eigh(&self.matrix);
        let n = self.dim();
        let tol = psd_tol(n) * 1e-3;
        let support: Vec<usize> = (0..n).rev().filter(|&k| s.values[k] > tol).collect();
        let rank = support.len().max(1);
        let mut v = CVec::zeros(n * rank);
        for (col, &k) in support.iter().enumerate() {
            let w = s.values[k].max(0.0).sqrt();
            for i in 0..n {
                v[i * rank + col] += s.vectors[(i, k)] * w;
            }
        }
        let mut dims = self.layout.dims.clone();
        dims.push(rank);
        PureState { vector: v, layout: DimLayout { dims, labels: None }, normalized: self.normalized }
    }
}

/// Unit vector (or sub-normalized vector when the flag is cleared).
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    vector: CVec,
    layout: DimLayout,
    normalized: bool,
}

impl PureState {
    pub fn new(vector: CVec, layout: DimLayout) -> Result<Self> {
        if vector.len() != layout.total() {
            return Err(Error::dims("vector length does not match layout"));
        }
        let nrm = vector.norm();
        if (nrm - 1.0).abs() > 1e-9 {
            return Err(Error::NotUnitNorm(nrm));
        }
        Ok(PureState { vector, layout, normalized: true })
    }

    pub fn new_subnormalized(vector: CVec, layout: DimLayout) -> Result<Self> {
        if vector.len() != layout.total() {
            return Err(Error::dims("vector length does not match layout"));
        }
        let nrm = vector.norm();
        if nrm <= 0.0 || nrm > 1.0 + 1e-9 {
            return Err(Error::InvalidTrace(nrm * nrm));
        }
        Ok(PureState { vector, layout, normalized: false })
    }

    pub(crate) fn trusted(vector: CVec, layout: DimLayout, normalized: bool) -> Self {
        PureState { vector, layout, normalized }
    }

    pub fn vector(&self) -> &CVec {
        &self.vector
    }

    pub fn layout(&self) -> &DimLayout {
        &self.layout
    }

    pub fn dims(&self) -> &[usize] {
        &self.layout.dims
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.vector.norm_squared()
    }

    pub fn density(&self) -> DensityOperator {
        let m = &self.vector * self.vector.adjoint();
        DensityOperator::trusted(m, self.layout.clone(), self.normalized)
    }

    pub fn reduced(&self, keep: &[usize]) -> Result<DensityOperator> {
        let m = reduce_vec(&self.vector, &self.layout, keep)?;
        Ok(DensityOperator::trusted(m, self.layout.subset(keep), self.normalized))
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            vector: self.vector.kronecker(&other.vector),
            layout: self.layout.concat(&other.layout),
            normalized: self.normalized && other.normalized,
        }
    }

    pub fn permute(&self, order: &[usize]) -> Result<PureState> {
        let v = super::layout::permute_vec(&self.vector, &self.layout, order)?;
        Ok(PureState { vector: v, layout: self.layout.subset(order), normalized: self.normalized })
    }

    pub fn relayout(&self, dims: Vec<usize>) -> Result<Self> {
        let layout = DimLayout::new(dims)?;
        if layout.total() != self.vector.len() {
            return Err(Error::dims("relayout changes total dimension"));
        }
        Ok(PureState { vector: self.vector.clone(), layout, normalized: self.normalized })
    }
}

pub fn basis_state(d: usize, k: usize) -> Result<PureState> {
    if k >= d {
        return Err(Error::param(format!("basis index {k} out of range for dimension {d}")));
    }
    let mut v = CVec::zeros(d);
    v[k] = ONE;
    PureState::new(v, DimLayout::single(d)?)
}

/// |Φ⁺⟩ = Σ_i |ii⟩/√d on (d, d).
pub fn max_entangled(d: usize) -> Result<PureState> {
    if d == 0 {
        return Err(Error::param("dimension must be positive"));
    }
    let mut v = CVec::zeros(d * d);
    let a = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        v[i * d + i] = r(a);
    }
    Ok(PureState::trusted(v, DimLayout::new(vec![d, d])?, true))
}

pub fn max_mixed(d: usize) -> Result<DensityOperator> {
    if d == 0 {
        return Err(Error::param("dimension must be positive"));
    }
    Ok(DensityOperator::trusted(
        CMat::identity(d, d) / r(d as f64),
        DimLayout::single(d)?,
        true,
    ))
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        c(a, b) * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn random_pure<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<PureState> {
    let layout = DimLayout::new(dims.to_vec())?;
    let g = ginibre(layout.total(), 1, rng);
    let v: CVec = g.column(0).into_owned();
    let nrm = v.norm();
    Ok(PureState::trusted(v / r(nrm), layout, true))
}

/// Induced-measure random state of the given rank (full rank if `None`).
pub fn random_density<R: Rng + ?Sized>(
    dims: &[usize],
    rank: Option<usize>,
    rng: &mut R,
) -> Result<DensityOperator> {
    let layout = DimLayout::new(dims.to_vec())?;
    let n = layout.total();
    let k = rank.unwrap_or(n).clamp(1, n);
    let g = ginibre(n, k, rng);
    let m = &g * g.adjoint();
    let t = m.trace().re;
    Ok(DensityOperator::trusted(crate::linalg::hermitian_part(&(m / r(t))), layout, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::rng::SeedStream;

    #[test]
    fn maximally_mixed_composes() {
        let t = max_mixed(2).unwrap().tensor(&max_mixed(2).unwrap());
        assert!(max_abs(&(t.matrix() - max_mixed(4).unwrap().matrix())) < 1e-15);
        assert_eq!(t.dims(), &[2, 2]);
    }

    #[test]
    fn basis_tensor() {
        let v = basis_state(2, 0).unwrap().tensor(&basis_state(2, 1).unwrap());
        assert_eq!(v.vector()[1], ONE);
        let one = DensityOperator::from_matrix(CMat::identity(1, 1), &[1]).unwrap();
        let rho = random_density(&[2], None, &mut SeedStream::new(1).rng()).unwrap();
        assert!(max_abs(&(rho.tensor(&one).matrix() - rho.matrix())) < 1e-15);
    }

    #[test]
    fn phi_plus_marginal_and_purity() {
        for d in 1..5 {
            let phi = max_entangled(d).unwrap();
            let rho = phi.density();
            let p = (rho.matrix() * rho.matrix()).trace().re;
            assert!((p - 1.0).abs() < 1e-12);
            let a = rho.partial_trace(&[0]).unwrap();
            assert!(max_abs(&(a.matrix() - max_mixed(d).unwrap().matrix())) < 1e-12);
        }
        assert!(max_entangled(0).is_err());
    }

    #[test]
    fn product_partial_trace() {
        let mut rng = SeedStream::new(3).rng();
        let a = random_density(&[2], None, &mut rng).unwrap();
        let b = random_density(&[3], None, &mut rng).unwrap();
        let t = a.tensor(&b).partial_trace(&[0]).unwrap();
        assert!(max_abs(&(t.matrix() - a.matrix())) < 1e-12);
    }

    #[test]
    fn purification_reproduces_state() {
        let rho = random_density(&[2, 2], Some(3), &mut SeedStream::new(5).rng()).unwrap();
        let psi = rho.purify();
        assert_eq!(psi.dims(), &[2, 2, 3]);
        let back = psi.reduced(&[0, 1]).unwrap();
        assert!(max_abs(&(back.matrix() - rho.matrix())) < 1e-12);
    }

    #[test]
    fn validation_errors() {
        let lay = DimLayout::single(2).unwrap();
        let neg = CMat::from_diagonal(&CVec::from_vec(vec![r(1.5), r(-0.5)]));
        assert!(matches!(DensityOperator::new(neg, lay.clone()), Err(Error::NegativeEigenvalue(_))));
        let half = CMat::identity(2, 2) * r(0.25);
        assert!(DensityOperator::new(half.clone(), lay.clone()).is_err());
        let s = DensityOperator::new_subnormalized(half, lay).unwrap();
        assert!(!s.is_normalized());
    }
}
