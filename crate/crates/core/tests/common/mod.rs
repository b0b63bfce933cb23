#![allow(dead_code)]

use krein_core::{Involution, OperatorMatrix, StateVector, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_c64(rng: &mut impl Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut impl Rng, n: usize) -> OperatorMatrix {
    let vals: Vec<C64> = (0..n * n).map(|_| random_c64(rng)).collect();
    OperatorMatrix::from_fn(n, None, |i, j| vals[i * n + j]).unwrap()
}

/// `(B + J B^† J) / 2`, J-Hermitian up to rounding of the sum.
pub fn j_hermitian_part(b: &OperatorMatrix, j: &Involution) -> OperatorMatrix {
    let adj = j.sandwich_adjoint(b.entries()).unwrap();
    let n = b.dim();
    OperatorMatrix::from_fn(n, None, |r, c| (b.get(r, c) + adj[(r, c)]) * 0.5).unwrap()
}

pub fn random_j_hermitian(rng: &mut impl Rng, j: &Involution) -> OperatorMatrix {
    j_hermitian_part(&random_matrix(rng, j.dim()), j)
}

pub fn random_amplitudes(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| random_c64(rng)).collect()
}

pub fn random_state(rng: &mut impl Rng, n: usize) -> StateVector {
    StateVector::from_vec(random_amplitudes(rng, n)).unwrap()
}
