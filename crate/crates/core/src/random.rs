//! Seeded sampling of Haar-random states and unitaries.
//!
//! Every routine takes the generator from the caller; nothing here owns RNG
//! state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, ComplexMatrix, ComplexVector};
use crate::state::{DensityOperator, PureState};

pub type PurityRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> PurityRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for sub-task `index` of a run started from `master`.
///
/// Two rounds of splitmix64 over the pair, so neighbouring indices give
/// unrelated streams.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> num_complex::Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    linalg::c(re, im)
}

pub fn complex_gaussian_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexVector {
    ComplexVector::from_fn(d, |_, _| complex_gaussian(rng))
}

pub fn complex_gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Normalized complex Gaussian vector.
pub fn haar_random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PureState {
    assert!(d >= 1, "dimension must be positive");
    loop {
        let v = complex_gaussian_vector(d, rng);
        if let Ok(psi) = PureState::normalized(v) {
            return psi;
        }
    }
}

/// Haar-random `rows x cols` isometry (`cols <= rows`).
///
/// Gram-Schmidt on the columns of a Gaussian matrix is the QR factorization
/// with a positive real diagonal of `R`, which is the phase fix that makes
/// the distribution Haar.
pub fn haar_random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    assert!(cols >= 1 && cols <= rows, "isometry needs 1 <= cols <= rows");
    let mut q = complex_gaussian_matrix(rows, cols, rng);
    for j in 0..cols {
        // Two passes of modified Gram-Schmidt keep orthogonality at 1e-15.
        for _ in 0..2 {
            for k in 0..j {
                let proj = q.column(k).dotc(&q.column(j));
                let qk = q.column(k).into_owned();
                let mut col = q.column_mut(j);
                col -= qk * proj;
            }
        }
        let norm = q.column(j).norm();
        q.column_mut(j).unscale_mut(norm);
    }
    q
}

pub fn haar_random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    haar_random_isometry(d, d, rng)
}

/// Full-rank random state from the Ginibre ensemble, `G G^dag / tr`.
pub fn random_density_operator<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityOperator {
    let g = complex_gaussian_matrix(d, d, rng);
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    let m = linalg::hermitian_part(&m.unscale(tr));
    DensityOperator::from_validated(m)
}
