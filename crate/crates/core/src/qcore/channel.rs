use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::Rng;

use super::layout::{embed_op, DimLayout};
use super::state::{ginibre, DensityOperator};
use crate::error::{Error, Result};
use crate::linalg::{c, eigh, max_abs, r, CMat, CVec};

pub const KRAUS_TOL: f64 = 1e-8;

/// Matrix V with V†V an orthogonal projection.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialIsometry {
    matrix: CMat,
}

impl PartialIsometry {
    pub fn new(matrix: CMat) -> Result<Self> {
        let p = matrix.adjoint() * &matrix;
        let dev = max_abs(&(&p * &p - &p));
        if dev > 1e-8 {
            return Err(Error::NotPartialIsometry(dev));
        }
        Ok(PartialIsometry { matrix })
    }

    pub(crate) fn trusted(matrix: CMat) -> Self {
        PartialIsometry { matrix }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn d_in(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn d_out(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_isometry(&self, tol: f64) -> bool {
        max_abs(&(self.matrix.adjoint() * &self.matrix - CMat::identity(self.d_in(), self.d_in()))) <= tol
    }

    pub fn conjugate(&self, rho: &CMat) -> CMat {
        &self.matrix * rho * self.matrix.adjoint()
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        &self.matrix * v
    }
}

/// Completely positive map in Kraus form. Trace preserving unless built with
/// [`Channel::new_cp`].
#[derive(Debug, Clone)]
pub struct Channel {
    kraus: Vec<CMat>,
    d_in: usize,
    d_out: usize,
    trace_preserving: bool,
    choi: OnceLock<CMat>,
}

impl PartialEq for Channel {
    fn eq(&self, other: &Self) -> bool {
        self.kraus == other.kraus && self.trace_preserving == other.trace_preserving
    }
}

fn kraus_dims(kraus: &[CMat]) -> Result<(usize, usize)> {
    let first = kraus.first().ok_or_else(|| Error::param("empty Kraus list"))?;
    let (d_out, d_in) = first.shape();
    if d_in == 0 || d_out == 0 {
        return Err(Error::dims("zero-dimensional Kraus operator"));
    }
    if kraus.iter().any(|k| k.shape() != (d_out, d_in)) {
        return Err(Error::dims("Kraus operators have differing shapes"));
    }
    Ok((d_in, d_out))
}

fn completeness(kraus: &[CMat], d_in: usize) -> CMat {
    let mut s = CMat::zeros(d_in, d_in);
    for k in kraus {
        s += k.adjoint() * k;
    }
    s
}

impl Channel {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let (d_in, d_out) = kraus_dims(&kraus)?;
        let dev = max_abs(&(completeness(&kraus, d_in) - CMat::identity(d_in, d_in)));
        if dev > KRAUS_TOL {
            return Err(Error::KrausCompleteness(dev));
        }
        Ok(Channel { kraus, d_in, d_out, trace_preserving: true, choi: OnceLock::new() })
    }

    /// Completely positive, trace non-increasing map.
    pub fn new_cp(kraus: Vec<CMat>) -> Result<Self> {
        let (d_in, d_out) = kraus_dims(&kraus)?;
        let top = eigh(&completeness(&kraus, d_in)).max();
        if top > 1.0 + KRAUS_TOL {
            return Err(Error::KrausCompleteness(top - 1.0));
        }
        Ok(Channel { kraus, d_in, d_out, trace_preserving: false, choi: OnceLock::new() })
    }

    /// CP map without the trace bound. Used for unnormalized encoder ansätze.
    pub(crate) fn new_unbounded(kraus: Vec<CMat>) -> Result<Self> {
        let (d_in, d_out) = kraus_dims(&kraus)?;
        Ok(Channel { kraus, d_in, d_out, trace_preserving: false, choi: OnceLock::new() })
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    pub fn kraus_count(&self) -> usize {
        self.kraus.len()
    }

    pub fn identity(d: usize) -> Result<Self> {
        Channel::new(vec![CMat::identity(d, d)])
    }

    pub fn unitary(u: CMat) -> Result<Self> {
        Channel::new(vec![u])
    }

    /// ρ ↦ (1−p)ρ + p·tr(ρ)·I/d, Kraus form from the Weyl basis.
    pub fn depolarizing(d: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param(format!("depolarizing probability {p} outside [0,1]")));
        }
        let dd = (d * d) as f64;
        let mut kraus = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                let w = if a == 0 && b == 0 { (1.0 - p + p / dd).sqrt() } else { (p / dd).sqrt() };
                if w == 0.0 && !(a == 0 && b == 0) {
                    continue;
                }
                kraus.push(weyl(d, a, b) * r(w));
            }
        }
        Channel::new(kraus)
    }

    pub fn fully_depolarizing(d: usize) -> Result<Self> {
        Channel::depolarizing(d, 1.0)
    }

    /// ρ ↦ (1−p)ρ + p·ZρZ† with Z the clock operator (Pauli Z for d = 2).
    pub fn dephasing(d: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param(format!("dephasing probability {p} outside [0,1]")));
        }
        let mut kraus = vec![CMat::identity(d, d) * r((1.0 - p).sqrt())];
        if p > 0.0 {
            kraus.push(weyl(d, 0, 1) * r(p.sqrt()));
        }
        Channel::new(kraus)
    }

    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::param(format!("damping {gamma} outside [0,1]")));
        }
        let k0 = CMat::from_row_slice(2, 2, &[r(1.0), r(0.0), r(0.0), r((1.0 - gamma).sqrt())]);
        let k1 = CMat::from_row_slice(2, 2, &[r(0.0), r(gamma.sqrt()), r(0.0), r(0.0)]);
        Channel::new(vec![k0, k1])
    }

    /// Random channel from a Haar-like isometry d_in → d_out·kraus_count.
    pub fn random<R: Rng + ?Sized>(d_in: usize, d_out: usize, kraus_count: usize, rng: &mut R) -> Result<Self> {
        if d_out * kraus_count < d_in {
            return Err(Error::param("environment too small for an isometry"));
        }
        let g = ginibre(d_out * kraus_count, d_in, rng);
        let w = g.qr().q();
        let kraus = (0..kraus_count)
            .map(|k| CMat::from_fn(d_out, d_in, |b, a| w[(b * kraus_count + k, a)]))
            .collect();
        Channel::new(kraus)
    }

    pub fn apply(&self, rho: &CMat) -> Result<CMat> {
        if rho.nrows() != self.d_in || rho.ncols() != self.d_in {
            return Err(Error::dims(format!("channel input {} vs operator {}x{}", self.d_in, rho.nrows(), rho.ncols())));
        }
        let mut out = CMat::zeros(self.d_out, self.d_out);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        Ok(out)
    }

    /// Heisenberg-picture adjoint Y ↦ Σ K† Y K.
    pub fn apply_adjoint(&self, y: &CMat) -> Result<CMat> {
        if y.nrows() != self.d_out || y.ncols() != self.d_out {
            return Err(Error::dims("adjoint input does not match channel output"));
        }
        let mut out = CMat::zeros(self.d_in, self.d_in);
        for k in &self.kraus {
            out += k.adjoint() * y * k;
        }
        Ok(out)
    }

    /// Act on subsystem `k` of an arbitrary operator with the given layout.
    pub fn apply_on(&self, m: &CMat, layout: &DimLayout, k: usize) -> Result<(CMat, DimLayout)> {
        if k >= layout.len() {
            return Err(Error::BadSubsystem { index: k, count: layout.len() });
        }
        if layout.dims[k] != self.d_in {
            return Err(Error::dims(format!("subsystem {k} has dim {} but channel expects {}", layout.dims[k], self.d_in)));
        }
        let mut out_layout = layout.clone();
        out_layout.dims[k] = self.d_out;
        let n = out_layout.total();
        let mut out = CMat::zeros(n, n);
        for kr in &self.kraus {
            let big = embed_op(kr, layout, k)?;
            out += &big * m * big.adjoint();
        }
        Ok((out, out_layout))
    }

    /// Normalized Choi state (id ⊗ N)(Φ⁺) on (input reference, output).
    pub fn choi(&self) -> DensityOperator {
        let m = self
            .choi
            .get_or_init(|| {
                let (di, dout) = (self.d_in, self.d_out);
                let mut j = CMat::zeros(di * dout, di * dout);
                for k in &self.kraus {
                    let v = CVec::from_fn(di * dout, |idx, _| k[(idx % dout, idx / dout)]);
                    j += &v * v.adjoint();
                }
                j / r(di as f64)
            })
            .clone();
        let layout = DimLayout { dims: vec![self.d_in, self.d_out], labels: None };
        DensityOperator::trusted(m, layout, self.trace_preserving)
    }

    pub fn choi_matrix(&self) -> CMat {
        self.choi().into_matrix()
    }

    /// Isometry W: A → B⊗E with E indexed by Kraus operator.
    pub fn stinespring(&self) -> PartialIsometry {
        let e = self.kraus.len();
        let w = CMat::from_fn(self.d_out * e, self.d_in, |row, a| self.kraus[row % e][(row / e, a)]);
        PartialIsometry::trusted(w)
    }

    /// Complementary map A → E obtained by tracing B from the Stinespring dilation.
    pub fn complementary(&self) -> Channel {
        let e = self.kraus.len();
        let kraus = (0..self.d_out)
            .map(|b| CMat::from_fn(e, self.d_in, |k, a| self.kraus[k][(b, a)]))
            .collect();
        Channel { kraus, d_in: self.d_in, d_out: e, trace_preserving: self.trace_preserving, choi: OnceLock::new() }
    }

    /// self ∘ first.
    pub fn compose(&self, first: &Channel) -> Result<Channel> {
        if first.d_out != self.d_in {
            return Err(Error::dims("composition dimension mismatch"));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * first.kraus.len());
        for a in &self.kraus {
            for b in &first.kraus {
                kraus.push(a * b);
            }
        }
        Ok(Channel {
            kraus,
            d_in: first.d_in,
            d_out: self.d_out,
            trace_preserving: self.trace_preserving && first.trace_preserving,
            choi: OnceLock::new(),
        })
    }

    pub fn tensor(&self, other: &Channel) -> Channel {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(a.kronecker(b));
            }
        }
        Channel {
            kraus,
            d_in: self.d_in * other.d_in,
            d_out: self.d_out * other.d_out,
            trace_preserving: self.trace_preserving && other.trace_preserving,
            choi: OnceLock::new(),
        }
    }

    /// Kraus-union with weights: Σ w_i N_i.
    pub fn mixture(members: &[&Channel], weights: &[f64]) -> Result<Channel> {
        if members.is_empty() || members.len() != weights.len() {
            return Err(Error::param("mixture needs one weight per member"));
        }
        let (di, dout) = (members[0].d_in, members[0].d_out);
        let mut kraus = Vec::new();
        let mut tp = true;
        for (m, &w) in members.iter().zip(weights) {
            if m.d_in != di || m.d_out != dout {
                return Err(Error::dims("mixture members differ in dimensions"));
            }
            if w < 0.0 {
                return Err(Error::param("negative mixture weight"));
            }
            tp &= m.trace_preserving;
            for k in &m.kraus {
                kraus.push(k * r(w.sqrt()));
            }
        }
        let total: f64 = weights.iter().sum();
        Ok(Channel {
            kraus,
            d_in: di,
            d_out: dout,
            trace_preserving: tp && (total - 1.0).abs() < 1e-12,
            choi: OnceLock::new(),
        })
    }
}

/// Weyl operator X^a Z^b.
pub fn weyl(d: usize, a: usize, b: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    for j in 0..d {
        let phase = 2.0 * PI * ((b * j) % d) as f64 / d as f64;
        m[((j + a) % d, j)] = c(phase.cos(), phase.sin());
    }
    m
}

pub fn pauli_x() -> CMat {
    weyl(2, 1, 0)
}

pub fn pauli_z() -> CMat {
    weyl(2, 0, 1)
}

/// Apply a channel to one subsystem of a state.
pub fn apply_channel(n: &Channel, rho: &DensityOperator, acting_on: usize) -> Result<DensityOperator> {
    let (m, layout) = n.apply_on(rho.matrix(), rho.layout(), acting_on)?;
    let normalized = rho.is_normalized() && n.is_trace_preserving();
    Ok(DensityOperator::trusted(crate::linalg::hermitian_part(&m), layout, normalized))
}

/// Rebuild a channel from a normalized Choi matrix on (d_in, d_out).
pub fn channel_from_choi(j: &CMat, d_in: usize, d_out: usize) -> Result<Channel> {
    if j.nrows() != d_in * d_out || j.ncols() != d_in * d_out {
        return Err(Error::dims("Choi matrix size does not match dimensions"));
    }
    let tol = super::state::psd_tol(d_in * d_out);
    let s = eigh(j);
    if s.min() < -tol {
        return Err(Error::NegativeEigenvalue(s.min()));
    }
    let mut kraus = Vec::new();
    for (k, &lam) in s.values.iter().enumerate().rev() {
        if lam <= tol * 1e-3 {
            continue;
        }
        let w = (d_in as f64 * lam).sqrt();
        kraus.push(CMat::from_fn(d_out, d_in, |b, a| s.vectors[(a * d_out + b, k)] * w));
    }
    if kraus.is_empty() {
        return Err(Error::param("zero Choi matrix"));
    }
    let tp_dev = max_abs(&(completeness(&kraus, d_in) - CMat::identity(d_in, d_in)));
    if tp_dev <= KRAUS_TOL.max(tol * 10.0) {
        Ok(Channel { kraus, d_in, d_out, trace_preserving: true, choi: OnceLock::new() })
    } else {
        Channel::new_cp(kraus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::state::{max_entangled, max_mixed, random_density};
    use crate::rng::SeedStream;

    #[test]
    fn depolarizing_and_dephasing_actions() {
        let mut rng = SeedStream::new(11).rng();
        let rho = random_density(&[3], None, &mut rng).unwrap();
        let out = Channel::fully_depolarizing(3).unwrap().apply(rho.matrix()).unwrap();
        assert!(max_abs(&(out - max_mixed(3).unwrap().matrix())) < 1e-12);

        let phi = max_entangled(2).unwrap().density();
        let deph = apply_channel(&Channel::dephasing(2, 0.5).unwrap(), &phi, 1).unwrap();
        let mut want = CMat::zeros(4, 4);
        want[(0, 0)] = r(0.5);
        want[(3, 3)] = r(0.5);
        assert!(max_abs(&(deph.matrix() - want)) < 1e-12);
    }

    #[test]
    fn identity_choi_is_phi_plus() {
        let j = Channel::identity(3).unwrap().choi_matrix();
        let phi = max_entangled(3).unwrap().density();
        assert!(max_abs(&(j - phi.matrix())) < 1e-12);
    }

    #[test]
    fn choi_round_trip() {
        let mut rng = SeedStream::new(2).rng();
        let n = Channel::random(2, 3, 2, &mut rng).unwrap();
        let back = channel_from_choi(&n.choi_matrix(), 2, 3).unwrap();
        assert!(back.is_trace_preserving());
        for _ in 0..5 {
            let rho = random_density(&[2], None, &mut rng).unwrap();
            let a = n.apply(rho.matrix()).unwrap();
            let b = back.apply(rho.matrix()).unwrap();
            assert!(max_abs(&(a - b)) < 1e-10);
        }
    }

    #[test]
    fn non_tp_rejected_with_message() {
        let k = CMat::identity(2, 2) * r(0.5);
        let err = Channel::new(vec![k.clone()]).unwrap_err();
        assert!(err.to_string().contains("kraus completeness violated"));
        assert!(Channel::new_cp(vec![k]).is_ok());
    }

    #[test]
    fn complement_of_identity_is_rank_one() {
        let c = Channel::identity(2).unwrap().complementary();
        assert_eq!(c.d_out(), 1);
        let mut rng = SeedStream::new(4).rng();
        let rho = random_density(&[2], None, &mut rng).unwrap();
        let out = c.apply(rho.matrix()).unwrap();
        assert!((out[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn apply_on_middle_subsystem() {
        let mut rng = SeedStream::new(8).rng();
        let a = random_density(&[2], None, &mut rng).unwrap();
        let b = random_density(&[2], None, &mut rng).unwrap();
        let cst = random_density(&[3], None, &mut rng).unwrap();
        let n = Channel::random(2, 3, 2, &mut rng).unwrap();
        let full = a.tensor(&b).tensor(&cst);
        let out = apply_channel(&n, &full, 1).unwrap();
        let nb = n.apply(b.matrix()).unwrap();
        let want = a.matrix().kronecker(&nb).kronecker(cst.matrix());
        assert!(max_abs(&(out.matrix() - want)) < 1e-12);
        assert_eq!(out.dims(), &[2, 3, 3]);
    }
}
