use rand::Rng;

use super::state::ginibre;
use crate::linalg::CMat;
use crate::rng::SeedStream;

/// Haar-distributed unitary from the given seed stream.
pub fn haar_unitary(d: usize, stream: &SeedStream) -> CMat {
    haar_unitary_with(d, &mut stream.rng())
}

/// Ginibre matrix, QR, then the phases of diag(R) moved into Q.
pub fn haar_unitary_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = ginibre(d, d, rng);
    let qr = g.qr();
    let rr = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let x = rr[(j, j)];
        let n = x.norm();
        let ph = if n > 0.0 { x / n } else { crate::linalg::ONE };
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eye, max_abs};

    #[test]
    fn unitary_and_scalar_case() {
        let s = SeedStream::new(9);
        for d in 1..6 {
            let u = haar_unitary(d, &s.child(d as u64));
            assert!(max_abs(&(u.adjoint() * &u - eye(d))) < 1e-10);
        }
        let u1 = haar_unitary(1, &s);
        assert!((u1[(0, 0)].norm() - 1.0).abs() < 1e-12);
    }
}
