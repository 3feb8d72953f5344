mod common;

use compoundcap::capacity::{channel_mutual_info, mutual_info_gradient, qe_compound, qe_single};
use compoundcap::compound::CompoundChannel;
use compoundcap::linalg::{r, CMat};
use compoundcap::qcore::{random_density, Channel, DensityOperator};
use compoundcap::SeedStream;
use rand::Rng;

const TOL: f64 = 1e-6;

#[test]
fn identity_and_fully_depolarizing() {
    assert!((qe_single(&Channel::identity(2).unwrap(), TOL).unwrap().bits_per_use - 1.0).abs() < 1e-4);
    assert!(qe_single(&Channel::fully_depolarizing(2).unwrap(), TOL).unwrap().bits_per_use <= 1e-4);
}

#[test]
fn qubit_channels_match_the_bloch_ball_search() {
    let mut rng = SeedStream::new(501).rng();
    let mut chans = vec![Channel::depolarizing(2, 0.25).unwrap(), Channel::amplitude_damping(0.3).unwrap()];
    chans.push(Channel::random(2, 2, 2, &mut rng).unwrap());
    for ch in &chans {
        let q = qe_single(ch, TOL).unwrap();
        let oracle = common::qe_qubit_oracle(ch);
        assert!((q.bits_per_use - oracle).abs() < 1e-3, "{} vs {oracle}", q.bits_per_use);
    }
}

#[test]
fn compound_value_is_below_every_member() {
    let stream = SeedStream::new(502);
    for t in 0..10 {
        let mut rng = stream.child(t).rng();
        let n = 2 + t as usize % 2;
        let members: Vec<Channel> =
            (0..n).map(|_| Channel::random(2, 2, rng.random_range(1..4), &mut rng).unwrap()).collect();
        let each: Vec<f64> = members.iter().map(|c| qe_single(c, TOL).unwrap().bits_per_use).collect();
        let pi = CompoundChannel::new(members).unwrap();
        let v = qe_compound(&pi, TOL).unwrap();
        let min = each.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(v.bits_per_use <= min + TOL, "{} > {min}", v.bits_per_use);
        assert!(v.active_indices.iter().all(|&i| i < n));
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = SeedStream::new(503).rng();
    for d in [2usize, 3] {
        let ch = Channel::random(d, d, 2, &mut rng).unwrap();
        let rho = random_density(&[d], None, &mut rng).unwrap();
        let g = mutual_info_gradient(&rho, &ch).unwrap();
        let h = compoundcap::qcore::random_density(&[d], None, &mut rng).unwrap();
        let dir = h.matrix() - CMat::identity(d, d) * r(1.0 / d as f64);
        let step = 1e-5;
        let at = |t: f64| {
            let m = rho.matrix() + &dir * r(t);
            channel_mutual_info(&DensityOperator::from_matrix(m, &[d]).unwrap(), &ch).unwrap()
        };
        let fd = (at(step) - at(-step)) / (2.0 * step);
        let exact: f64 = g.iter().zip(dir.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        assert!((fd - exact).abs() <= 1e-4 * exact.abs().max(1e-3), "d {d}: fd {fd} exact {exact}");
    }
}
