use crate::compound::lcm_all;
use crate::error::{Error, Result};
use crate::linalg::{max_abs, r, trace_norm, CMat, CVec};
use crate::qcore::{
    haar_unitary, max_entangled, reduce_vec, uhlmann_split, Channel, DimLayout, PureState,
};
use crate::rng::SeedStream;

/// O_A(ρ) with entries ρ_{a,a′}, so that |ρ⟩ = √d_A (O ⊗ I)|Φ⁺⟩.
/// Not Hermitian in general.
pub fn build_oa(rho: &PureState) -> Result<CMat> {
    let dims = rho.dims();
    if dims.len() != 2 || dims[0] != dims[1] {
        return Err(Error::dims(format!("O_A needs a state on two equal systems, got {dims:?}")));
    }
    let d = dims[0];
    let v = rho.vector();
    Ok(CMat::from_fn(d, d, |a, b| v[a * d + b]))
}

/// Ingredients of the informed-sender encoders: one pure input state, one
/// unitary and one entanglement split M₁ⁱ per index. Jⁱ embeds A₀⊗A₁ⁱ into the
/// first M₀M₁ⁱ basis vectors of A and Kⁱ embeds (A₁ⁱ)ᶜ into the first M₁/M₁ⁱ
/// basis vectors of Aᶜ, which has dimension M₁ = lcm M₁ⁱ.
#[derive(Debug, Clone)]
pub struct IsEncoderSpec {
    states: Vec<PureState>,
    unitaries: Vec<CMat>,
    m0: usize,
    m1i: Vec<usize>,
    m1: usize,
    d_a: usize,
}

impl IsEncoderSpec {
    pub fn new(states: Vec<PureState>, m0: usize, m1i: Vec<usize>, unitaries: Vec<CMat>) -> Result<Self> {
        Self::build(states, m0, m1i, unitaries, false)
    }

    /// As [`IsEncoderSpec::new`] with Haar unitaries drawn from `stream.child(i)`.
    pub fn sample(states: Vec<PureState>, m0: usize, m1i: Vec<usize>, stream: &SeedStream) -> Result<Self> {
        let d = states.first().map(|s| s.dims()[0]).unwrap_or(0);
        let us = (0..states.len()).map(|i| haar_unitary(d, &stream.child(i as u64))).collect();
        Self::new(states, m0, m1i, us)
    }

    /// Single-branch spec that allows M₀M₁ > d_A; J then keeps the first d_A
    /// input basis vectors.
    pub(crate) fn truncating(state: PureState, m0: usize, m1: usize, stream: &SeedStream) -> Result<Self> {
        let d = state.dims()[0];
        let u = haar_unitary(d, &stream.child(0));
        Self::build(vec![state], m0, vec![m1], vec![u], true)
    }

    fn build(states: Vec<PureState>, m0: usize, m1i: Vec<usize>, unitaries: Vec<CMat>, truncate: bool) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::param("encoder spec needs at least one index"));
        }
        if m1i.len() != states.len() || unitaries.len() != states.len() {
            return Err(Error::param("one state, one M1 value and one unitary per index required"));
        }
        if m0 == 0 || m1i.contains(&0) {
            return Err(Error::param("M0 and M1 values must be at least 1"));
        }
        let d_a = states[0].dims()[0];
        for (i, s) in states.iter().enumerate() {
            if s.dims() != [d_a, d_a] {
                return Err(Error::dims(format!("state {i} must live on ({d_a}, {d_a}), got {:?}", s.dims())));
            }
            s.is_normalized().then_some(()).ok_or_else(|| Error::NotUnitNorm(s.norm_sqr().sqrt()))?;
        }
        for (i, u) in unitaries.iter().enumerate() {
            if u.nrows() != d_a || u.ncols() != d_a {
                return Err(Error::dims(format!("unitary {i} must be {d_a}x{d_a}")));
            }
            let dev = max_abs(&(u.adjoint() * u - CMat::identity(d_a, d_a)));
            if dev > 1e-8 {
                return Err(Error::param(format!("matrix {i} is not unitary (deviation {dev:.3e})")));
            }
        }
        if !truncate {
            if let Some((i, m)) = m1i.iter().enumerate().find(|(_, &m)| m0 * m > d_a) {
                return Err(Error::param(format!("M0·M1 = {} exceeds d_A = {d_a} at index {i}", m0 * m)));
            }
        }
        let m1 = lcm_all(&m1i.iter().map(|&m| m as u64).collect::<Vec<_>>())? as usize;
        Ok(IsEncoderSpec { states, unitaries, m0, m1i, m1, d_a })
    }

    /// Same states and splits with fresh Haar unitaries.
    pub fn resampled(&self, stream: &SeedStream) -> Self {
        let us = (0..self.len()).map(|i| haar_unitary(self.d_a, &stream.child(i as u64))).collect();
        IsEncoderSpec { unitaries: us, ..self.clone() }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn m0(&self) -> usize {
        self.m0
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn m1i(&self) -> &[usize] {
        &self.m1i
    }

    pub fn state(&self, i: usize) -> &PureState {
        &self.states[i]
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn unitary(&self, i: usize) -> &CMat {
        &self.unitaries[i]
    }

    /// Jⁱ: A₀⊗A₁ⁱ → A.
    pub fn j(&self, i: usize) -> CMat {
        let k = self.m0 * self.m1i[i];
        CMat::from_fn(self.d_a, k, |a, b| if a == b { r(1.0) } else { r(0.0) })
    }

    /// Kⁱ: (A₁ⁱ)ᶜ → Aᶜ.
    pub fn k(&self, i: usize) -> CMat {
        let q = self.m1 / self.m1i[i];
        CMat::from_fn(self.m1, q, |a, b| if a == b { r(1.0) } else { r(0.0) })
    }

    /// (UⁱJⁱ ⊗ Kⁱ) as a map A₀⊗A₁ → A⊗Aᶜ, with A₁ ≅ A₁ⁱ⊗(A₁ⁱ)ᶜ.
    pub(crate) fn embedding(&self, i: usize) -> CMat {
        let (m0, m1, mi) = (self.m0, self.m1, self.m1i[i]);
        let q = m1 / mi;
        let uj = &self.unitaries[i] * self.j(i);
        let mut e = CMat::zeros(self.d_a * m1, m0 * m1);
        for a0 in 0..m0 {
            for a1 in 0..mi {
                for c in 0..q {
                    let col = a0 * m1 + a1 * q + c;
                    for a in 0..self.d_a {
                        e[(a * m1 + c, col)] = uj[(a, a0 * mi + a1)];
                    }
                }
            }
        }
        e
    }

    /// Dimension of (A₁ⁱ)ᶜ.
    pub(crate) fn complement_dim(&self, i: usize) -> usize {
        self.m1 / self.m1i[i]
    }
}

/// Linear map X: A₀⊗A₁ → A⊗Aᶜ acting as σ ↦ tr_{Aᶜ}[XσX†]. Completely
/// positive; trace non-increasing only when X†X ≤ I.
#[derive(Debug, Clone)]
pub struct Encoder {
    x: CMat,
    d_a: usize,
    d_c: usize,
}

impl Encoder {
    pub fn new(x: CMat, d_a: usize, d_c: usize) -> Result<Self> {
        if x.nrows() != d_a * d_c || x.ncols() == 0 {
            return Err(Error::dims(format!("encoder matrix has {} rows, expected {}", x.nrows(), d_a * d_c)));
        }
        Ok(Encoder { x, d_a, d_c })
    }

    pub fn matrix(&self) -> &CMat {
        &self.x
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_c(&self) -> usize {
        self.d_c
    }

    pub fn d_in(&self) -> usize {
        self.x.ncols()
    }

    pub fn apply(&self, sigma: &CMat) -> Result<CMat> {
        if sigma.nrows() != self.d_in() || sigma.ncols() != self.d_in() {
            return Err(Error::dims("input does not match encoder domain"));
        }
        self.to_channel()?.apply(sigma)
    }

    /// Kraus form, one operator ⟨c|X per basis vector of Aᶜ.
    pub fn to_channel(&self) -> Result<Channel> {
        let kraus = (0..self.d_c)
            .map(|c| CMat::from_fn(self.d_a, self.d_in(), |a, k| self.x[(a * self.d_c + c, k)]))
            .collect();
        Channel::new_unbounded(kraus)
    }

    /// (X ⊗ I)|Φ⁺⟩ on (A, Aᶜ, R⊗B₁).
    pub(crate) fn phi_vector(&self) -> CVec {
        let d = self.d_in();
        let s = 1.0 / (d as f64).sqrt();
        CVec::from_fn(self.x.nrows() * d, |idx, _| self.x[(idx / d, idx % d)] * r(s))
    }

    /// ℰ(Φ⁺⊗Φ⁺) on (A, R⊗B₁).
    pub fn phi_image(&self) -> Result<CMat> {
        let layout = DimLayout::new(vec![self.d_a, self.d_c, self.d_in()])?;
        reduce_vec(&self.phi_vector(), &layout, &[0, 2])
    }

    /// tr ℰ(Φ⁺⊗Φ⁺).
    pub fn phi_trace(&self) -> f64 {
        self.x.norm_squared() / self.d_in() as f64
    }

    /// ‖tr_A ℰ(Φ⁺⊗Φ⁺) − τ_{RB₁}‖₁ = ‖X†X − I‖₁ / d.
    pub fn marginal_deviation(&self) -> f64 {
        let d = self.d_in();
        trace_norm(&(self.x.adjoint() * &self.x - CMat::identity(d, d))) / d as f64
    }
}

/// ℰⁱ(σ) = d_A O(ρⁱ) Uⁱ Jⁱ σ_{A₀A₁ⁱ} Jⁱ† Uⁱ† O(ρⁱ)†, with the (A₁ⁱ)ᶜ part of the
/// input traced out through Kⁱ.
pub fn build_is_encoder(spec: &IsEncoderSpec, i: usize) -> Result<Encoder> {
    if i >= spec.len() {
        return Err(Error::param(format!("no index {i} in a spec of {}", spec.len())));
    }
    let o = build_oa(spec.state(i))?.scale((spec.d_a as f64).sqrt());
    let big = o.kronecker(&CMat::identity(spec.m1, spec.m1));
    Encoder::new(big * spec.embedding(i), spec.d_a, spec.m1)
}

#[derive(Debug, Clone)]
pub struct NormalizedEncoder {
    pub encoder: Encoder,
    /// ‖tr_A ℰ(Φ⁺⊗Φ⁺) − τ_{RB₁}‖₁ of the map being replaced.
    pub deviation: f64,
    /// dev + 2√(2·dev).
    pub bound: f64,
    /// Realized ‖(Ẽ − ℰ)(Φ⁺⊗Φ⁺)‖₁.
    pub distance: f64,
    /// Set when the deviation exceeds 1, where the bound says nothing.
    pub flagged: bool,
}

/// Trace non-increasing replacement Ẽ = tr_{Aᶜ}[W · W†] with W the Uhlmann
/// partial isometry from Φ⁺ to the purification of ℰ(Φ⁺⊗Φ⁺).
pub fn normalize_encoder(enc: &Encoder) -> Result<NormalizedEncoder> {
    let d = enc.d_in();
    let rows = enc.x.nrows();
    let norm = enc.x.norm();
    if norm <= 0.0 {
        return Err(Error::param("encoder is the zero map"));
    }
    let s = 1.0 / norm;
    let target = CVec::from_fn(d * rows, |idx, _| enc.x[(idx % rows, idx / rows)] * r(s));
    let target = PureState::new(target, DimLayout::new(vec![d, rows])?)?;
    let phi = max_entangled(d)?;
    let (w, _) = uhlmann_split(&phi, &target, 1)?;
    let encoder = Encoder::new(w.matrix().clone(), enc.d_a, enc.d_c)?;
    let deviation = enc.marginal_deviation();
    let distance = trace_norm(&(encoder.phi_image()? - enc.phi_image()?));
    Ok(NormalizedEncoder {
        encoder,
        deviation,
        bound: deviation + 2.0 * (2.0 * deviation).sqrt(),
        distance,
        flagged: deviation > 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{basis_state, random_pure};

    #[test]
    fn oa_reconstructs_the_state() {
        let mut rng = SeedStream::new(3).rng();
        let psi = random_pure(&[3, 3], &mut rng).unwrap();
        let o = build_oa(&psi).unwrap();
        let phi = max_entangled(3).unwrap();
        let back = o.kronecker(&CMat::identity(3, 3)) * phi.vector() * r(3f64.sqrt());
        assert!((back - psi.vector()).norm() < 1e-10);
        let phi_o = build_oa(&phi).unwrap();
        assert!(max_abs(&(phi_o - CMat::identity(3, 3).scale(1.0 / 3f64.sqrt()))) < 1e-12);
        let prod = basis_state(4, 0).unwrap().relayout(vec![2, 2]).unwrap();
        assert_eq!(crate::linalg::singular_values(&build_oa(&prod).unwrap()).iter().filter(|&&x| x > 1e-12).count(), 1);
    }

    #[test]
    fn full_rate_phi_plus_encoder_is_isometric() {
        let phi = max_entangled(4).unwrap();
        let spec = IsEncoderSpec::new(vec![phi], 4, vec![1], vec![CMat::identity(4, 4)]).unwrap();
        let e = build_is_encoder(&spec, 0).unwrap();
        assert!(max_abs(&(e.matrix().adjoint() * e.matrix() - CMat::identity(4, 4))) < 1e-12);
        let n = normalize_encoder(&e).unwrap();
        assert!(n.deviation < 1e-12 && n.distance < 1e-10);
    }

    #[test]
    fn rate_above_dimension_rejected() {
        let phi = max_entangled(2).unwrap();
        assert!(IsEncoderSpec::new(vec![phi], 2, vec![2], vec![CMat::identity(2, 2)]).is_err());
    }

    #[test]
    fn normalization_distance_within_bound() {
        for seed in 0..5 {
            let mut rng = SeedStream::new(seed).rng();
            let psi = random_pure(&[4, 4], &mut rng).unwrap();
            let spec = IsEncoderSpec::sample(vec![psi], 2, vec![2], &SeedStream::new(100 + seed)).unwrap();
            let e = build_is_encoder(&spec, 0).unwrap();
            let n = normalize_encoder(&e).unwrap();
            assert!(n.distance <= n.bound + 1e-9, "{} > {}", n.distance, n.bound);
            let m = n.encoder.matrix();
            assert!(crate::linalg::max_eig(&(m.adjoint() * m)) <= 1.0 + 1e-9);
        }
    }
}
