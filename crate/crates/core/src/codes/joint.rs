use crate::error::{Error, Result};
use crate::linalg::{eigh, kron, r, trace_norm, CMat, CVec};
use crate::qcore::{
    max_entangled, reduce_vec, uhlmann_split, vec_to_mat, Channel, DimLayout, PartialIsometry, PureState,
};

use super::encoder::{build_oa, Encoder, IsEncoderSpec};

/// Largest matrix side formed while evaluating a code.
pub(crate) const MAX_JOINT_DIM: usize = 2048;

/// Stinespring isometries of the members with E padded to a common size.
/// Rows are indexed b·e + k.
pub(crate) fn padded_dilations(channels: &[&Channel]) -> (Vec<CMat>, usize) {
    let e = channels.iter().map(|c| c.kraus().len()).max().unwrap_or(1);
    let dils = channels
        .iter()
        .map(|c| {
            let ek = c.kraus().len();
            let w = c.stinespring();
            let w = w.matrix();
            let d_b = c.d_out();
            let mut out = CMat::zeros(d_b * e, c.d_in());
            for b in 0..d_b {
                for k in 0..ek {
                    out.row_mut(b * e + k).copy_from(&w.row(b * ek + k));
                }
            }
            out
        })
        .collect();
    (dils, e)
}

/// The maps Gⁱ = (Wⁱ ⊗ I_{Aᶜ}) Eⁱ : A₀A₁ → B⊗E⊗Aᶜ of every branch, with Wⁱ a
/// dilation of 𝒯ⁱ and Eⁱ the unitary-and-embedding part of the encoder.
#[derive(Debug, Clone)]
pub(crate) struct Joint {
    g: Vec<CMat>,
    dil: Vec<CMat>,
    q: Vec<usize>,
    coherent: bool,
    m0: usize,
    m1: usize,
    d_a: usize,
    d_b: usize,
    e: usize,
    d_c: usize,
}

impl Joint {
    /// `dil[i]`: A → B⊗E (rows b·e + k); `embed[i]`: A₀A₁ → A⊗Aᶜ; `q[i]` the
    /// dimension of (A₁ⁱ)ᶜ. With `coherent` the target state keeps the |i⟩⟨j|
    /// blocks, as for a single encoder shared by every branch.
    pub(crate) fn new(
        dil: Vec<CMat>,
        embed: Vec<CMat>,
        q: Vec<usize>,
        coherent: bool,
        m0: usize,
        d_b: usize,
        d_c: usize,
    ) -> Result<Self> {
        let n = dil.len();
        if n == 0 || embed.len() != n || q.len() != n {
            return Err(Error::param("one dilation, embedding and split per branch required"));
        }
        let d_a = dil[0].ncols();
        let e = dil[0].nrows() / d_b;
        let d_in = embed[0].ncols();
        if !d_in.is_multiple_of(m0) {
            return Err(Error::dims("encoder input is not a multiple of M0"));
        }
        for (w, x) in dil.iter().zip(&embed) {
            if w.ncols() != d_a || w.nrows() != d_b * e || x.nrows() != d_a * d_c || x.ncols() != d_in {
                return Err(Error::dims("branch maps disagree in dimensions"));
            }
        }
        let side = d_c * e * n * m0;
        if side > MAX_JOINT_DIM || d_b * d_in > MAX_JOINT_DIM {
            return Err(Error::param(format!(
                "code too large to evaluate: environment side {side}, output side {}",
                d_b * d_in
            )));
        }
        let eye_c = CMat::identity(d_c, d_c);
        let g = dil.iter().zip(&embed).map(|(w, x)| kron(w, &eye_c) * x).collect();
        Ok(Joint { g, dil, q, coherent, m0, m1: d_in / m0, d_a, d_b, e, d_c })
    }

    /// Branches for the informed-sender ansatz: Wⁱ = V_{𝒩ⁱ} √d_A O(ρⁱ).
    pub(crate) fn ansatz(channels: &[&Channel], spec: &IsEncoderSpec, branch_of: &[usize], coherent: bool) -> Result<Self> {
        let (vs, _) = padded_dilations(channels);
        let d_a = spec.d_a();
        if channels.iter().any(|c| c.d_in() != d_a) {
            return Err(Error::dims("channel input differs from the encoder output"));
        }
        let mut dil = Vec::with_capacity(channels.len());
        let mut embed = Vec::with_capacity(channels.len());
        let mut q = Vec::with_capacity(channels.len());
        for (v, &s) in vs.iter().zip(branch_of) {
            let o = build_oa(spec.state(s))?.scale((d_a as f64).sqrt());
            dil.push(v * o);
            embed.push(spec.embedding(s));
            q.push(spec.complement_dim(s));
        }
        Self::new(dil, embed, q, coherent, spec.m0(), channels[0].d_out(), spec.m1())
    }

    pub(crate) fn len(&self) -> usize {
        self.g.len()
    }

    fn d_in(&self) -> usize {
        self.m0 * self.m1
    }

    /// Layout (B, E, Aᶜ, R, B₁, I) of [`Joint::vector`].
    fn layout(&self) -> DimLayout {
        DimLayout::new(vec![self.d_b, self.e, self.d_c, self.m0, self.m1, self.len()]).expect("positive dims")
    }

    /// Σᵢ N^{-1/2} (Gⁱ ⊗ I)|Φ⁺_{A₀R}⟩|Φ⁺_{A₁B₁}⟩ ⊗ |i⟩.
    fn vector(&self) -> CVec {
        let n = self.len();
        let d = self.d_in();
        let rows = self.g[0].nrows();
        let s = r(1.0 / ((n * d) as f64).sqrt());
        CVec::from_fn(rows * d * n, |idx, _| {
            let i = idx % n;
            let rc = idx / n;
            self.g[i][(rc / d, rc % d)] * s
        })
    }

    /// ω on (Aᶜ, E, I): (1/N) Σ Kⁱτ Kʲ† ⊗ tr_B[Wⁱ τ_A Wʲ†] ⊗ |i⟩⟨j| over i = j, or
    /// over all pairs when coherent.
    pub(crate) fn omega(&self) -> CMat {
        let n = self.len();
        let (e, dc, db) = (self.e, self.d_c, self.d_b);
        let side = dc * e * n;
        let mut out = CMat::zeros(side, side);
        let scale = 1.0 / (n as f64 * self.d_a as f64);
        for i in 0..n {
            for j in 0..n {
                if i != j && !self.coherent {
                    continue;
                }
                let mut env = CMat::zeros(e, e);
                for b in 0..db {
                    let wi = self.dil[i].rows(b * e, e);
                    let wj = self.dil[j].rows(b * e, e);
                    env += wi * wj.adjoint();
                }
                let qi = self.q[i].min(self.q[j]);
                for c in 0..qi {
                    let w = r(scale / self.q[i] as f64);
                    for k in 0..e {
                        for l in 0..e {
                            out[((c * e + k) * n + i, (c * e + l) * n + j)] += env[(k, l)] * w;
                        }
                    }
                }
            }
        }
        out
    }

    /// T̄ᶜ(Φ⁺_{A₀R}⊗τ_{A₁}) on (Aᶜ, E, I, R).
    fn complement_state(&self, psi: &CVec) -> Result<CMat> {
        reduce_vec(psi, &self.layout(), &[2, 1, 5, 3])
    }

    /// ‖T̄ᶜ(Φ⁺_{A₀R}⊗τ_{A₁}) − ω⊗τ_R‖₁.
    pub(crate) fn decoupling_deviation(&self) -> Result<f64> {
        let rho = self.complement_state(&self.vector())?;
        let tau = CMat::identity(self.m0, self.m0).scale(1.0 / self.m0 as f64);
        Ok(trace_norm(&(rho - kron(&self.omega(), &tau))))
    }

    /// Uhlmann decoder from the purification of T̄(Φ⁺⊗Φ⁺) to |ω⟩⊗|Φ⁺_{RA₀}⟩.
    pub(crate) fn decoder(&self) -> Result<UniversalDecoder> {
        let psi = self.vector();
        let nrm = psi.norm();
        if nrm <= 1e-300 {
            return Err(Error::param("every branch maps Φ⁺ to zero"));
        }
        let omega = self.omega();
        let deviation = {
            let rho = self.complement_state(&psi)?;
            let tau = CMat::identity(self.m0, self.m0).scale(1.0 / self.m0 as f64);
            trace_norm(&(rho - kron(&omega, &tau)))
        };
        // Ψ reordered to (AᶜEI, R, BB₁).
        let x = self.d_c * self.e * self.len();
        let m = vec_to_mat(&psi, &self.layout(), &[2, 1, 5, 3])?;
        let (m0, db, m1) = (self.m0, self.d_b, self.m1);
        let mut v = CVec::zeros(x * m0 * db * m1);
        // rest subsystems of m are (B, B₁) in layout order.
        for row in 0..x * m0 {
            for col in 0..db * m1 {
                v[row * db * m1 + col] = m[(row, col)] / r(nrm);
            }
        }
        let psi_state = PureState::new(v, DimLayout::new(vec![x, m0, db * m1])?)?;

        let s = eigh(&omega);
        let support: Vec<usize> = (0..x).filter(|&k| s.values[k] > 1e-14 * s.max().max(1e-300)).collect();
        let p = support.len().max(1);
        let t: f64 = support.iter().map(|&k| s.values[k]).sum();
        let phi = max_entangled(m0)?;
        let mut tv = CVec::zeros(x * m0 * m0 * p);
        for xi in 0..x {
            for (col, &k) in support.iter().enumerate() {
                let amp = s.vectors[(xi, k)] * r((s.values[k] / t).sqrt());
                for rr in 0..m0 {
                    for a0 in 0..m0 {
                        let ph = phi.vector()[a0 * m0 + rr];
                        tv[((xi * m0 + rr) * m0 + a0) * p + col] += amp * ph;
                    }
                }
            }
        }
        let target = PureState::new(tv, DimLayout::new(vec![x, m0, m0 * p])?)?;
        let (iso, fidelity) = uhlmann_split(&psi_state, &target, 2)?;
        Ok(UniversalDecoder {
            decoder: Decoder { v: iso, d_b: db, d_b1: m1, m0, d_p: p },
            deviation,
            fidelity,
        })
    }

    /// ‖D∘T̄(Φ⁺⊗Φ⁺) − Φ⁺_{A₀R}‖₁ for this joint map.
    pub(crate) fn decoded_deviation(&self, dec: &Decoder) -> Result<f64> {
        let psi = self.vector();
        let m = vec_to_mat(&psi, &self.layout(), &[0, 4])?;
        let z = dec.v.matrix() * m;
        let (p, e, dc, m0, n) = (dec.d_p, self.e, self.d_c, self.m0, self.len());
        let flat = CVec::from_fn(z.nrows() * z.ncols(), |idx, _| z[(idx / z.ncols(), idx % z.ncols())]);
        let rho = reduce_vec(&flat, &DimLayout::new(vec![m0, p, e, dc, m0, n])?, &[0, 4])?;
        let phi = max_entangled(m0)?.density().into_matrix();
        Ok(trace_norm(&(rho - phi)))
    }
}

/// Quantum operation D(ξ) = tr_P[V ξ V†] from B⊗B₁ to A₀.
#[derive(Debug, Clone)]
pub struct Decoder {
    v: PartialIsometry,
    d_b: usize,
    d_b1: usize,
    m0: usize,
    d_p: usize,
}

impl Decoder {
    pub fn isometry(&self) -> &PartialIsometry {
        &self.v
    }

    pub fn d_in(&self) -> usize {
        self.d_b * self.d_b1
    }

    pub fn d_out(&self) -> usize {
        self.m0
    }

    pub fn apply(&self, xi: &CMat) -> Result<CMat> {
        if xi.nrows() != self.d_in() || xi.ncols() != self.d_in() {
            return Err(Error::dims("input does not match decoder domain B⊗B1"));
        }
        let full = self.v.conjugate(xi);
        crate::qcore::partial_trace_mat(&full, &DimLayout::new(vec![self.m0, self.d_p])?, &[0])
    }

    /// Entanglement fidelity ⟨Φ⁺|D∘𝒩∘Ẽ(Φ⁺⊗Φ⁺)|Φ⁺⟩ for one branch.
    pub fn fidelity(&self, enc: &Encoder, channel: &Channel) -> Result<f64> {
        if channel.d_in() != enc.d_a() || channel.d_out() != self.d_b || enc.d_in() != self.m0 * self.d_b1 {
            return Err(Error::dims("encoder, channel and decoder do not compose"));
        }
        let w = channel.stinespring();
        let e = channel.kraus().len();
        let dc = enc.d_c();
        let y = kron(w.matrix(), &CMat::identity(dc, dc)) * enc.matrix();
        let d = enc.d_in();
        let s = r(1.0 / (d as f64).sqrt());
        let v = CVec::from_fn(y.nrows() * d, |idx, _| y[(idx / d, idx % d)] * s);
        let layout = DimLayout::new(vec![self.d_b, e, dc, self.m0, self.d_b1])?;
        let m = vec_to_mat(&v, &layout, &[0, 4])?;
        let z = self.v.matrix() * m;
        let (m0, p) = (self.m0, self.d_p);
        let norm = 1.0 / (m0 as f64).sqrt();
        let mut f = 0.0;
        for pp in 0..p {
            for kc in 0..e * dc {
                let mut amp = r(0.0);
                for a in 0..m0 {
                    amp += z[(a * p + pp, kc * m0 + a)];
                }
                f += (amp * r(norm)).norm_sqr();
            }
        }
        Ok(f.min(1.0))
    }
}

#[derive(Debug, Clone)]
pub struct UniversalDecoder {
    pub decoder: Decoder,
    /// Realized ‖T̄ᶜ(Φ⁺⊗τ) − ω⊗τ_R‖₁ used in the recovery guarantee.
    pub deviation: f64,
    /// Fidelity of the Uhlmann overlap, for the normalized purification.
    pub fidelity: f64,
}

fn ansatz_channels<'a>(pi: &'a crate::compound::CompoundChannel, spec: &IsEncoderSpec) -> Result<Vec<&'a Channel>> {
    if pi.len() != spec.len() {
        return Err(Error::param(format!("{} members but {} encoder indices", pi.len(), spec.len())));
    }
    Ok(pi.channels().iter().collect())
}

/// Decoder for the informed-sender average map (1/N) Σ 𝒩ⁱ∘ℰⁱ.
pub fn build_universal_decoder(pi: &crate::compound::CompoundChannel, spec: &IsEncoderSpec) -> Result<UniversalDecoder> {
    let chans = ansatz_channels(pi, spec)?;
    let idx: Vec<usize> = (0..spec.len()).collect();
    Joint::ansatz(&chans, spec, &idx, false)?.decoder()
}

/// (1/N) Σ 𝒩ⁱ∘ℰⁱ, or (1/N) Σ 𝒯ⁱ(Uⁱ Jⁱ σ Jⁱ† Uⁱ†) when the maps 𝒯ⁱ are given.
pub fn average_encoded_channel(
    pi: &crate::compound::CompoundChannel,
    spec: &IsEncoderSpec,
    maps: Option<&[Channel]>,
) -> Result<Channel> {
    let joint = general_joint(pi, spec, maps)?;
    let (db, e, dc, n) = (joint.d_b, joint.e, joint.d_c, joint.len());
    let s = 1.0 / (n as f64).sqrt();
    let mut kraus = Vec::with_capacity(n * e * dc);
    for g in &joint.g {
        for k in 0..e {
            for c in 0..dc {
                kraus.push(CMat::from_fn(db, g.ncols(), |b, col| g[((b * e + k) * dc + c, col)] * r(s)));
            }
        }
    }
    Channel::new_unbounded(kraus)
}

/// Complement of [`average_encoded_channel`] with output Aᶜ⊗E⊗I. Its Kraus
/// operators are indexed by the basis of B; the |i⟩⟨j| blocks come from the
/// cross terms between branches.
pub fn complementary_average(
    pi: &crate::compound::CompoundChannel,
    spec: &IsEncoderSpec,
    maps: Option<&[Channel]>,
) -> Result<Channel> {
    let joint = general_joint(pi, spec, maps)?;
    let (db, e, dc, n) = (joint.d_b, joint.e, joint.d_c, joint.len());
    let s = 1.0 / (n as f64).sqrt();
    let d_in = joint.d_in();
    let kraus = (0..db)
        .map(|b| {
            CMat::from_fn(dc * e * n, d_in, |row, col| {
                let i = row % n;
                let k = (row / n) % e;
                let c = row / (n * e);
                joint.g[i][((b * e + k) * dc + c, col)] * r(s)
            })
        })
        .collect();
    Channel::new_unbounded(kraus)
}

fn general_joint(
    pi: &crate::compound::CompoundChannel,
    spec: &IsEncoderSpec,
    maps: Option<&[Channel]>,
) -> Result<Joint> {
    let chans = ansatz_channels(pi, spec)?;
    let idx: Vec<usize> = (0..spec.len()).collect();
    match maps {
        None => Joint::ansatz(&chans, spec, &idx, false),
        Some(ts) => {
            if ts.len() != spec.len() {
                return Err(Error::param("one map per encoder index required"));
            }
            if ts.iter().any(|t| t.d_in() != spec.d_a() || t.d_out() != ts[0].d_out()) {
                return Err(Error::dims("maps must share input A and a common output"));
            }
            let refs: Vec<&Channel> = ts.iter().collect();
            let (dil, _) = padded_dilations(&refs);
            let embed = idx.iter().map(|&i| spec.embedding(i)).collect();
            let q = idx.iter().map(|&i| spec.complement_dim(i)).collect();
            Joint::new(dil, embed, q, false, spec.m0(), ts[0].d_out(), spec.m1())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compound::CompoundChannel;
    use crate::linalg::max_abs;
    use crate::qcore::random_density;
    use crate::rng::SeedStream;

    fn two_branch() -> (CompoundChannel, IsEncoderSpec) {
        let mut rng = SeedStream::new(8).rng();
        let pi = CompoundChannel::new(vec![
            Channel::random(4, 2, 2, &mut rng).unwrap(),
            Channel::random(4, 2, 3, &mut rng).unwrap(),
        ])
        .unwrap();
        let states = vec![
            crate::qcore::random_pure(&[4, 4], &mut rng).unwrap(),
            crate::qcore::random_pure(&[4, 4], &mut rng).unwrap(),
        ];
        let spec = IsEncoderSpec::sample(states, 2, vec![1, 2], &SeedStream::new(9)).unwrap();
        (pi, spec)
    }

    #[test]
    fn average_matches_hand_sum() {
        let (pi, spec) = two_branch();
        let avg = average_encoded_channel(&pi, &spec, None).unwrap();
        let mut rng = SeedStream::new(10).rng();
        for _ in 0..5 {
            let sigma = random_density(&[4], None, &mut rng).unwrap().into_matrix();
            let mut want = CMat::zeros(2, 2);
            for i in 0..2 {
                let e = super::super::build_is_encoder(&spec, i).unwrap();
                want += pi.channels()[i].apply(&e.apply(&sigma).unwrap()).unwrap().scale(0.5);
            }
            assert!(max_abs(&(avg.apply(&sigma).unwrap() - want)) < 1e-10);
        }
    }

    #[test]
    fn complement_traced_over_environment_gives_average() {
        let (pi, spec) = two_branch();
        let avg = average_encoded_channel(&pi, &spec, None).unwrap();
        let comp = complementary_average(&pi, &spec, None).unwrap();
        let mut rng = SeedStream::new(11).rng();
        for _ in 0..5 {
            let sigma = random_density(&[4], None, &mut rng).unwrap().into_matrix();
            let f = comp.kraus();
            let b_out = CMat::from_fn(f.len(), f.len(), |b, bp| (&f[b] * &sigma * f[bp].adjoint()).trace());
            assert!(max_abs(&(b_out - avg.apply(&sigma).unwrap())) < 1e-8);
        }
    }

    #[test]
    fn fully_depolarizing_branches_decouple() {
        let phi = max_entangled(2).unwrap();
        let pi = CompoundChannel::new(vec![Channel::fully_depolarizing(2).unwrap()]).unwrap();
        for seed in 0..3 {
            let spec = IsEncoderSpec::sample(vec![phi.clone()], 1, vec![2], &SeedStream::new(seed)).unwrap();
            let j = Joint::ansatz(&pi.channels().iter().collect::<Vec<_>>(), &spec, &[0], false).unwrap();
            assert!(j.decoupling_deviation().unwrap() < 1e-10);
        }
    }

    #[test]
    fn identity_full_rate_decodes_perfectly() {
        let phi = max_entangled(4).unwrap();
        let pi = CompoundChannel::new(vec![Channel::identity(4).unwrap()]).unwrap();
        let spec = IsEncoderSpec::sample(vec![phi], 4, vec![1], &SeedStream::new(5)).unwrap();
        let dec = build_universal_decoder(&pi, &spec).unwrap();
        assert!(dec.deviation < 1e-10);
        let enc = super::super::build_is_encoder(&spec, 0).unwrap();
        let f = dec.decoder.fidelity(&enc, &pi.channels()[0]).unwrap();
        assert!((f - 1.0).abs() < 1e-10, "{f}");
    }
}
