use compoundcap::compound::{average_channel, diamond_distance_matrix, CompoundChannel};
use compoundcap::linalg::{r, trace_norm, CMat};
use compoundcap::qcore::{haar_unitary, random_density, Channel};
use compoundcap::SeedStream;

#[test]
fn average_channel_is_the_mean_of_member_outputs() {
    let mut rng = SeedStream::new(601).rng();
    let members: Vec<Channel> = (0..3).map(|k| Channel::random(2, 3, k + 1, &mut rng).unwrap()).collect();
    let pi = CompoundChannel::new(members.clone()).unwrap();
    let avg = average_channel(&pi).unwrap();
    assert!(avg.is_trace_preserving());
    for _ in 0..10 {
        let rho = random_density(&[2], None, &mut rng).unwrap();
        let mean = members.iter().fold(CMat::zeros(3, 3), |acc, m| acc + m.apply(rho.matrix()).unwrap()) * r(1.0 / 3.0);
        assert!(trace_norm(&(avg.apply(rho.matrix()).unwrap() - mean)) < 1e-12);
    }
}

#[test]
fn haar_second_and_fourth_moments() {
    let stream = SeedStream::new(602);
    let d = 3;
    let samples = 4000;
    let (mut m2, mut m4) = (0.0, 0.0);
    for k in 0..samples {
        let u = haar_unitary(d, &stream.child(k));
        let p = u[(0, 0)].norm_sqr();
        m2 += p;
        m4 += p * p;
    }
    m2 /= samples as f64;
    m4 /= samples as f64;
    // E|U₀₀|² = 1/d and E|U₀₀|⁴ = 2/(d(d+1)).
    assert!((m2 - 1.0 / 3.0).abs() < 0.02, "{m2}");
    assert!((m4 - 2.0 / 12.0).abs() < 0.02, "{m4}");
}

#[test]
fn distance_matrix_is_a_metric() {
    let mut rng = SeedStream::new(603).rng();
    let mut members: Vec<Channel> = (0..3).map(|k| Channel::random(2, 2, k + 1, &mut rng).unwrap()).collect();
    members.push(members[0].clone());
    let dm = diamond_distance_matrix(&CompoundChannel::new(members).unwrap());
    assert!(dm.failures.is_empty());
    let v = &dm.values;
    assert!(v[0][3].abs() < 1e-6);
    for i in 0..4 {
        assert_eq!(v[i][i], 0.0);
        for j in 0..4 {
            assert_eq!(v[i][j], v[j][i]);
            for k in 0..4 {
                assert!(v[i][k] <= v[i][j] + v[j][k] + 1e-6);
            }
        }
    }
}
