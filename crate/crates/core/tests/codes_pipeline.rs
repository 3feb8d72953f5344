use compoundcap::codes::{
    build_is_encoder, mc_decoupling_l5, normalize_encoder, run_one_shot_is, run_one_shot_uninformed, IsEncoderSpec,
};
use compoundcap::compound::CompoundChannel;
use compoundcap::qcore::{max_entangled, random_pure, Channel};
use compoundcap::SeedStream;

#[test]
fn full_rate_encoders_never_exceed_unit_trace() {
    let stream = SeedStream::new(701);
    for k in 0..20 {
        let mut rng = stream.child(k).rng();
        let psi = random_pure(&[4, 4], &mut rng).unwrap();
        let spec = IsEncoderSpec::sample(vec![psi], 2, vec![2], &stream.child(100 + k)).unwrap();
        let enc = build_is_encoder(&spec, 0).unwrap();
        assert!(enc.phi_trace() <= 1.0 + 1e-9, "{}", enc.phi_trace());
    }
}

#[test]
fn normalization_stays_within_its_distance_bound() {
    let stream = SeedStream::new(702);
    for k in 0..10 {
        let psi = random_pure(&[4, 4], &mut stream.child(k).rng()).unwrap();
        let spec = IsEncoderSpec::sample(vec![psi], 2, vec![1], &stream.child(50 + k)).unwrap();
        let n = normalize_encoder(&build_is_encoder(&spec, 0).unwrap()).unwrap();
        assert!(n.distance <= n.bound + 1e-9, "{} > {}", n.distance, n.bound);
    }
}

#[test]
fn decoupling_mean_is_within_bound_at_low_rate() {
    let pi = CompoundChannel::new(vec![Channel::depolarizing(4, 0.3).unwrap()]).unwrap();
    let spec = IsEncoderSpec::sample(vec![max_entangled(4).unwrap()], 1, vec![4], &SeedStream::new(703)).unwrap();
    let rep = mc_decoupling_l5(&pi, &spec, 40, 703).unwrap();
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn single_member_full_rate_identity_codes() {
    let pi = CompoundChannel::new(vec![Channel::identity(4).unwrap()]).unwrap();
    let phi = max_entangled(4).unwrap();
    let is = run_one_shot_is(&pi, std::slice::from_ref(&phi), 2, &[2], 0.0, 704).unwrap();
    assert!(is.min_fidelity >= 0.99, "{is:?}");
    let un = run_one_shot_uninformed(&pi, &phi, 4, 1, 0.0, 704).unwrap();
    assert!(un.min_fidelity >= 0.99, "{un:?}");
}

#[test]
fn lowering_the_rate_does_not_lower_the_median_fidelity() {
    let pi = CompoundChannel::new(vec![Channel::depolarizing(2, 0.2).unwrap(), Channel::dephasing(2, 0.3).unwrap()])
        .unwrap();
    let phi = max_entangled(2).unwrap();
    let median = |m0: usize| {
        let mut f: Vec<f64> = (0..20).map(|s| run_one_shot_uninformed(&pi, &phi, m0, 1, 0.0, s).unwrap().min_fidelity).collect();
        f.sort_by(|a, b| a.total_cmp(b));
        0.5 * (f[9] + f[10])
    };
    let (hi, lo) = (median(2), median(1));
    assert!(lo >= hi - 1e-9, "M0=1 {lo} < M0=2 {hi}");
}
