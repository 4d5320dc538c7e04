//! Seeded random generators shared by unit tests and the randomized suites.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::hermitian::{CMatrix, HermMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex<R: Rng>(r: &mut R) -> Complex64 {
    Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
}

pub fn random_matrix<R: Rng>(n: usize, r: &mut R) -> CMatrix {
    DMatrix::from_fn(n, n, |_, _| random_complex(r))
}

pub fn random_hermitian<R: Rng>(n: usize, r: &mut R) -> HermMatrix {
    let a = random_matrix(n, r);
    HermMatrix::new((&a + a.adjoint()).scale(0.5)).expect("symmetrized matrix is Hermitian")
}

/// Haar-ish random unitary from the QR factor of a complex Gaussian-ish matrix.
pub fn random_unitary<R: Rng>(n: usize, r: &mut R) -> CMatrix {
    let a = random_matrix(n, r);
    let qr = a.qr();
    qr.q()
}
