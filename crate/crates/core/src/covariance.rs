//! Sampling test for unitary covariance.
//!
//! If `Phi(U rho U^dag) = V Phi(rho) V^dag` for some unitary `V`, the two
//! outputs have the same spectrum. A spectral mismatch is therefore a proof
//! that the channel is not covariant; agreement on finitely many samples is
//! only evidence.

use rand::Rng;
use serde::Serialize;

use crate::channel::Channel;
use crate::error::{PurityError, Result};
use crate::linalg;
use crate::random::{haar_random_pure_state, haar_random_unitary, random_density_operator};

pub const DEFAULT_COVARIANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceVerdict {
    Consistent,
    Falsified,
}

#[derive(Debug, Clone, Serialize)]
pub struct CovarianceTestResult {
    pub n_samples: usize,
    pub max_spectral_deviation: f64,
    pub tol: f64,
    pub verdict: CovarianceVerdict,
    /// Index of the first sample whose deviation exceeded `tol`.
    pub first_violation: Option<usize>,
}

/// Compares output spectra of `rho` and `U rho U^dag` for `n_samples` draws.
///
/// Even-indexed samples use Haar pure states, odd ones full-rank Ginibre
/// states.
pub fn covariance_test<R: Rng + ?Sized>(phi: &Channel, n_samples: usize, tol: f64, rng: &mut R) -> Result<CovarianceTestResult> {
    if phi.dim_in() != phi.dim_out() {
        return Err(PurityError::DimensionMismatch { expected: phi.dim_in(), found: phi.dim_out() });
    }
    let d = phi.dim_in();
    let mut worst = 0.0f64;
    let mut first_violation = None;
    for s in 0..n_samples {
        let rho = if s % 2 == 0 { haar_random_pure_state(d, rng).projector() } else { random_density_operator(d, rng).into_matrix() };
        let u = haar_random_unitary(d, rng);
        let rotated = &u * &rho * u.adjoint();
        let a = linalg::hermitian_eigenvalues_unchecked(&phi.apply_operator(&rho));
        let b = linalg::hermitian_eigenvalues_unchecked(&phi.apply_operator(&rotated));
        let dev = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        if dev > tol && first_violation.is_none() {
            first_violation = Some(s);
        }
        worst = worst.max(dev);
    }
    Ok(CovarianceTestResult {
        n_samples,
        max_spectral_deviation: worst,
        tol,
        verdict: if worst > tol { CovarianceVerdict::Falsified } else { CovarianceVerdict::Consistent },
        first_violation,
    })
}
