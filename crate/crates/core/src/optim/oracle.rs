//! Brute-force reference values for the purity optimizers.
//!
//! Shares nothing with the multi-start path except the channel action:
//! outputs go through the validated `apply_state` route and candidates come
//! from Haar sampling, an exhaustive 1-degree Bloch grid for qubits and a
//! coordinate-descent polish.

use rand::Rng;

use crate::channel::Channel;
use crate::error::{PurityError, Result};
use crate::linalg::{self, ComplexVector};
use crate::random::haar_random_pure_state;
use crate::state::{PureState, SchattenP};

pub const ORACLE_MAX_DIM: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleObjective {
    EntropyMin,
    PNormMax(SchattenP),
}

impl OracleObjective {
    /// Score to minimize.
    fn score(&self, phi: &Channel, psi: &PureState) -> Result<f64> {
        let out = phi.apply_state(psi)?;
        match self {
            OracleObjective::EntropyMin => out.entropy(),
            OracleObjective::PNormMax(p) => Ok(-out.schatten_norm(*p)?),
        }
    }

    fn report(&self, score: f64) -> f64 {
        match self {
            OracleObjective::EntropyMin => score,
            OracleObjective::PNormMax(_) => -score,
        }
    }
}

fn from_real(x: &[f64]) -> Option<PureState> {
    let v = ComplexVector::from_iterator(x.len() / 2, x.chunks_exact(2).map(|c| linalg::c(c[0], c[1])));
    PureState::normalized(v).ok()
}

fn coordinate_descent(phi: &Channel, objective: OracleObjective, start: &PureState, start_score: f64) -> Result<f64> {
    let mut x: Vec<f64> = start.amplitudes().iter().flat_map(|z| [z.re, z.im]).collect();
    let mut best = start_score;
    let mut step = 0.05;
    while step > 1e-8 {
        let mut improved = false;
        for k in 0..x.len() {
            for dir in [1.0, -1.0] {
                let old = x[k];
                x[k] = old + dir * step;
                let score = match from_real(&x) {
                    Some(psi) => objective.score(phi, &psi)?,
                    None => f64::INFINITY,
                };
                if score < best {
                    best = score;
                    improved = true;
                    break;
                }
                x[k] = old;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(best)
}

/// Best objective value over Haar samples (and the Bloch grid for qubits),
/// optionally polished by coordinate descent from the best candidate.
pub fn brute_force_oracle<R: Rng + ?Sized>(
    phi: &Channel,
    objective: OracleObjective,
    n_samples: usize,
    refine: bool,
    rng: &mut R,
) -> Result<f64> {
    let d = phi.dim_in();
    if d > ORACLE_MAX_DIM {
        return Err(PurityError::DimensionTooLarge { dim: d, limit: ORACLE_MAX_DIM });
    }
    let mut best: Option<(f64, PureState)> = None;
    let mut consider = |psi: PureState| -> Result<()> {
        let s = objective.score(phi, &psi)?;
        if best.as_ref().is_none_or(|(b, _)| s < *b) {
            best = Some((s, psi));
        }
        Ok(())
    };
    for _ in 0..n_samples {
        consider(haar_random_pure_state(d, rng))?;
    }
    if d == 2 {
        for theta_deg in 0..=180 {
            let theta = (theta_deg as f64).to_radians();
            for phi_deg in 0..360 {
                let azimuth = (phi_deg as f64).to_radians();
                let amps = ComplexVector::from_vec(vec![
                    linalg::c((theta / 2.0).cos(), 0.0),
                    num_complex::Complex64::from_polar((theta / 2.0).sin(), azimuth),
                ]);
                consider(PureState::normalized(amps)?)?;
            }
        }
    }
    let (score, state) = best.ok_or_else(|| PurityError::InvalidConfig("oracle needs samples for d > 2".into()))?;
    let score = if refine { coordinate_descent(phi, objective, &state, score)? } else { score };
    Ok(objective.report(score))
}
