//! Concave maximization of ρ ↦ minᵢ I(ρ, Nⁱ) over density matrices.

use rayon::prelude::*;

use crate::linalg::{eigh, eye, hermitian_part, inner_re, shannon_bits, CMat, Spectral};
use crate::qcore::Channel;

const LOG_FLOOR: f64 = 1e-15;
const T_START: f64 = 1.0;
const T_END: f64 = 1e-4;
const POLISH_STEPS: usize = 200;
const CERT_EIG: f64 = 1e-12;

pub(crate) struct Member {
    channel: Channel,
    comp: Channel,
}

impl Member {
    pub(crate) fn new(channel: &Channel) -> Self {
        Member { channel: channel.clone(), comp: channel.complementary() }
    }

    /// I(A′:B) = H(ρ) + H(N(ρ)) − H(Nᶜ(ρ)).
    pub(crate) fn info(&self, rho: &CMat, h_rho: f64) -> f64 {
        let b = self.channel.apply(rho).expect("dims checked");
        let e = self.comp.apply(rho).expect("dims checked");
        h_rho + entropy(&b) - entropy(&e)
    }

    /// Gradient of I up to a multiple of the identity:
    /// −log ρ − N†(log N(ρ)) + Nᶜ†(log Nᶜ(ρ)).
    pub(crate) fn grad(&self, rho: &CMat, log_rho: &CMat) -> CMat {
        let b = self.channel.apply(rho).expect("dims checked");
        let e = self.comp.apply(rho).expect("dims checked");
        let gb = self.channel.apply_adjoint(&log2(&b)).expect("dims checked");
        let ge = self.comp.apply_adjoint(&log2(&e)).expect("dims checked");
        hermitian_part(&(ge - gb - log_rho))
    }
}

fn entropy(m: &CMat) -> f64 {
    let v: Vec<f64> = crate::linalg::eigvalsh(m).into_iter().map(|x| x.max(0.0)).collect();
    shannon_bits(&v)
}

fn log2(m: &CMat) -> CMat {
    eigh(m).map(|x| x.max(LOG_FLOOR).log2())
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub rho: CMat,
    pub values: Vec<f64>,
    /// Certified upper bound on max_ρ minᵢ Iᵢ.
    pub upper: f64,
    pub iterations: usize,
}

struct Point {
    rho: CMat,
    spec: Spectral,
    values: Vec<f64>,
}

impl Point {
    fn new(rho: CMat, members: &[Member]) -> Self {
        let spec = eigh(&rho);
        let h = shannon_bits(&spec.values.iter().map(|x| x.max(0.0)).collect::<Vec<_>>());
        let values = members.par_iter().map(|m| m.info(&rho, h)).collect();
        Point { rho, spec, values }
    }

    fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn grads(&self, members: &[Member]) -> Vec<CMat> {
        let log_rho = self.spec.map(|x| x.max(LOG_FLOOR).log2());
        members.par_iter().map(|m| m.grad(&self.rho, &log_rho)).collect()
    }
}

/// Soft-min −T ln Σ exp(−Iᵢ/T) and its weights.
fn softmin(values: &[f64], t: f64) -> (f64, Vec<f64>) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let ws: Vec<f64> = values.iter().map(|v| (-(v - lo) / t).exp()).collect();
    let z: f64 = ws.iter().sum();
    (lo - t * z.ln(), ws.iter().map(|w| w / z).collect())
}

fn combine(grads: &[CMat], w: &[f64]) -> CMat {
    let mut g = CMat::zeros(grads[0].nrows(), grads[0].ncols());
    for (gi, &wi) in grads.iter().zip(w) {
        if wi > 0.0 {
            g += gi.scale(wi);
        }
    }
    g
}

/// Σ wᵢ Iᵢ(ρ) + λmax(G) − tr ρG with G = Σ wᵢ ∇Iᵢ: an upper bound on the
/// max-min value by concavity of each Iᵢ.
fn upper_bound(p: &Point, grads: &[CMat], w: &[f64]) -> (f64, CMat) {
    let g = combine(grads, w);
    let s = eigh(&g);
    let lin: f64 = p.values.iter().zip(w).map(|(v, wi)| v * wi).sum();
    let top = s.vectors.column(s.values.len() - 1).into_owned();
    (lin + s.max() - inner_re(&p.rho, &g), &top * top.adjoint())
}

/// Exponentiated-gradient refinement of the certificate weights.
fn best_weights(p: &Point, grads: &[CMat], w0: &[f64]) -> f64 {
    let n = w0.len();
    let mut w = w0.iter().map(|x| x.max(1e-12)).collect::<Vec<_>>();
    let mut best = upper_bound(p, grads, &w).0;
    if n == 1 {
        return best;
    }
    let base: Vec<f64> = grads.iter().zip(&p.values).map(|(g, v)| v - inner_re(&p.rho, g)).collect();
    let mut eta = 1.0;
    for _ in 0..300 {
        let (u, proj) = upper_bound(p, grads, &w);
        best = best.min(u);
        let sub: Vec<f64> = grads.iter().zip(&base).map(|(g, b)| b + inner_re(&proj, g)).collect();
        let scale = sub.iter().map(|x| x.abs()).fold(1e-300, f64::max);
        for (wi, si) in w.iter_mut().zip(&sub) {
            *wi *= (-eta * si / scale).exp();
        }
        let z: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x = (*x / z).max(1e-300));
        eta *= 0.98;
    }
    best
}

fn mirror(p: &Point, g: &CMat, eta: f64) -> CMat {
    let scale = crate::linalg::operator_norm(g).max(1e-300);
    let log_rho = p.spec.map(|x| x.max(1e-300).ln());
    let m = eigh(&(log_rho + g.scale(eta / scale)));
    let top = m.max();
    let out = m.map(|x| (x - top).exp());
    let t = out.trace().re;
    hermitian_part(&out.scale(1.0 / t))
}

fn line_search(p: &Point, dir: &CMat, members: &[Member], t: f64) -> Point {
    let f = |x: f64| {
        let q = Point::new(&p.rho + (dir - &p.rho).scale(x), members);
        let v = softmin(&q.values, t).0;
        (v, q)
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut pc) = f(c);
    let (mut fd, mut pd) = f(d);
    for _ in 0..40 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            pd = pc;
            c = b - inv_phi * (b - a);
            (fc, pc) = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            pc = pd;
            d = a + inv_phi * (b - a);
            (fd, pd) = f(d);
        }
        if b - a < 1e-10 {
            break;
        }
    }
    if fc > fd {
        pc
    } else {
        pd
    }
}

/// Frank–Wolfe with mirror-ascent candidate steps on the soft-min, a
/// temperature schedule, then subgradient polishing of the exact minimum.
pub(crate) fn maximize(members: &[Member], d: usize, tol: f64, max_iter: usize) -> Outcome {
    let n = members.len();
    let mut p = Point::new(eye(d).scale(1.0 / d as f64), members);
    let mut best_lower = p.min();
    let mut best_rho = p.rho.clone();
    let mut best_values = p.values.clone();
    let mut upper = f64::INFINITY;
    let mut t = if n == 1 { T_END } else { T_START };
    let mut eta = 1.0;
    let mut stall_ref = f64::INFINITY;
    let mut stall_count = 0;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let grads = p.grads(members);
        let (ft, w) = softmin(&p.values, t);
        let (u, vertex) = upper_bound(&p, &grads, &w);
        if p.spec.min() > CERT_EIG {
            upper = upper.min(u);
        }
        if upper - best_lower <= tol {
            break;
        }
        let g = combine(&grads, &w);
        let fw_gap = crate::linalg::max_eig(&g) - inner_re(&p.rho, &g);

        if n > 1 && t > T_END {
            if fw_gap < 0.99 * stall_ref {
                stall_ref = fw_gap;
                stall_count = 0;
            } else {
                stall_count += 1;
            }
            if fw_gap <= tol || stall_count >= 5 {
                t = (t * 0.5).max(T_END);
                stall_ref = f64::INFINITY;
                stall_count = 0;
                continue;
            }
        }

        let fw = line_search(&p, &vertex, members, t);
        let f_fw = softmin(&fw.values, t).0;
        let mut cand = fw;
        let mut f_cand = f_fw;
        for _ in 0..20 {
            let q = Point::new(mirror(&p, &g, eta), members);
            let fq = softmin(&q.values, t).0;
            if fq > ft {
                if fq > f_cand {
                    cand = q;
                    f_cand = fq;
                }
                eta = (eta * 1.5).min(10.0);
                break;
            }
            eta *= 0.5;
        }
        if f_cand <= ft {
            if n == 1 || t <= T_END {
                break;
            }
            t = (t * 0.5).max(T_END);
            continue;
        }
        p = cand;
        if p.min() > best_lower {
            best_lower = p.min();
            best_rho = p.rho.clone();
            best_values = p.values.clone();
        }
    }

    if n > 1 {
        let mut q = Point::new(best_rho.clone(), members);
        let mut step = 0.1;
        for k in 1..=POLISH_STEPS {
            let i = q.values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|x| x.0).unwrap_or(0);
            let mut w = vec![0.0; n];
            w[i] = 1.0;
            let g = combine(&q.grads(members), &w);
            q = Point::new(mirror(&q, &g, step / (k as f64).sqrt()), members);
            if q.min() > best_lower {
                best_lower = q.min();
                best_rho = q.rho.clone();
                best_values = q.values.clone();
            } else {
                step *= 0.97;
            }
        }
    }

    // The certificate needs the exact gradient, so evaluate it at a full-rank point.
    let cert = if eigh(&best_rho).min() > CERT_EIG {
        Point::new(best_rho.clone(), members)
    } else {
        Point::new(&best_rho * crate::linalg::r(1.0 - 1e-9) + eye(d).scale(1e-9 / d as f64), members)
    };
    if cert.min() > best_lower {
        best_lower = cert.min();
        best_rho = cert.rho.clone();
        best_values = cert.values.clone();
    }
    let grads = cert.grads(members);
    let (_, w) = softmin(&cert.values, T_END.min(t));
    upper = upper.min(best_weights(&cert, &grads, &w));
    Outcome { rho: best_rho, values: best_values, upper: upper.max(best_lower), iterations }
}

/// Exact derivative of ρ ↦ I(ρ, N) for full-rank ρ.
pub(crate) fn gradient(ch: &Channel, rho: &CMat) -> CMat {
    let m = Member::new(ch);
    let log_rho = eigh(rho).map(|x| x.max(LOG_FLOOR).log2());
    m.grad(rho, &log_rho) - eye(rho.nrows()).scale(std::f64::consts::LOG2_E)
}
