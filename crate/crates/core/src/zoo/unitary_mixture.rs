//! Mixtures of unitaries that share an eigenvector.

use num_complex::Complex64;

use crate::channel::Channel;
use crate::error::{PurityError, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::state::PureState;

const EIGEN_RESIDUAL_TOL: f64 = 1e-8;
const UNITARITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct CommonEigenvector {
    pub vector: PureState,
    /// `V_k v = mu_k v`.
    pub eigenvalues: Vec<Complex64>,
    pub residual: f64,
}

/// `max_k |V_k v - <v|V_k|v> v|`.
fn eigen_residual(ops: &[ComplexMatrix], v: &linalg::ComplexVector) -> f64 {
    ops.iter()
        .map(|u| {
            let uv = u * v;
            let mu = v.dotc(&uv);
            (uv - v * mu).norm()
        })
        .fold(0.0, f64::max)
}

/// Orthonormal basis (as columns) of `{c : |(V - mu) B c| <= tol}` mapped back through `B`.
fn eigen_subspace(v: &ComplexMatrix, mu: Complex64, basis: &ComplexMatrix, tol: f64) -> Option<ComplexMatrix> {
    let d = v.nrows();
    let shifted = (v - ComplexMatrix::identity(d, d) * mu) * basis;
    let m = basis.ncols();
    // Pad to a square matrix so the SVD returns a full right basis.
    let mut square = ComplexMatrix::zeros(d.max(m), m);
    square.rows_mut(0, d).copy_from(&shifted);
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let null: Vec<usize> = (0..m).filter(|&k| svd.singular_values[k] <= tol).collect();
    if null.is_empty() {
        return None;
    }
    let mut coords = ComplexMatrix::zeros(m, null.len());
    for (col, &k) in null.iter().enumerate() {
        coords.set_column(col, &v_t.row(k).adjoint());
    }
    Some(basis * coords)
}

fn distinct_eigenvalues(m: &ComplexMatrix) -> Vec<Complex64> {
    let t = m.clone().schur().unpack().1;
    let mut out: Vec<Complex64> = Vec::new();
    for k in 0..t.nrows() {
        let mu = t[(k, k)];
        if out.iter().all(|x| (x - mu).norm() > 1e-7) {
            out.push(mu);
        }
    }
    out
}

fn search(ops: &[ComplexMatrix], basis: ComplexMatrix, depth: usize) -> Option<ComplexMatrix> {
    if depth == ops.len() {
        return Some(basis);
    }
    let compressed = basis.adjoint() * &ops[depth] * &basis;
    for mu in distinct_eigenvalues(&compressed) {
        if let Some(sub) = eigen_subspace(&ops[depth], mu, &basis, EIGEN_RESIDUAL_TOL) {
            if let Some(found) = search(ops, sub, depth + 1) {
                return Some(found);
            }
        }
    }
    None
}

/// Finds a unit vector that is an eigenvector of every operator in `ops`.
///
/// Walks the eigenspaces of `ops[0]`, intersecting each with the eigenspaces
/// of the remaining operators, so degenerate spectra are handled.
pub fn common_eigenvector(ops: &[ComplexMatrix]) -> Result<CommonEigenvector> {
    let first = ops.first().ok_or_else(|| PurityError::InvalidParameters("no operators given".into()))?;
    let d = first.nrows();
    if let Some(bad) = ops.iter().find(|u| u.shape() != (d, d)) {
        return Err(PurityError::DimensionMismatch { expected: d, found: bad.nrows() });
    }
    if let Some(basis) = search(ops, ComplexMatrix::identity(d, d), 0) {
        let v = PureState::normalized(basis.column(0).into_owned())?;
        let residual = eigen_residual(ops, v.amplitudes());
        let eigenvalues = ops.iter().map(|u| v.amplitudes().dotc(&(u * v.amplitudes()))).collect();
        return Ok(CommonEigenvector { vector: v, eigenvalues, residual });
    }
    // Report how close the eigenvectors of the first operator came.
    let q = first.clone().schur().unpack().0;
    let best_residual = (0..d).map(|k| eigen_residual(ops, &q.column(k).into_owned())).fold(f64::INFINITY, f64::min);
    Err(PurityError::NoCommonEigenvector { best_residual })
}

fn validate_mixture(weights: &[f64], unitaries: &[ComplexMatrix]) -> Result<(usize, f64)> {
    if weights.is_empty() || weights.len() != unitaries.len() {
        return Err(PurityError::InvalidParameters(format!("{} weights for {} unitaries", weights.len(), unitaries.len())));
    }
    if let Some(w) = weights.iter().find(|&&w| w.is_nan() || w <= 0.0) {
        return Err(PurityError::InvalidParameters(format!("weight {w} is not positive")));
    }
    let total: f64 = weights.iter().sum();
    if total > 1.0 + 1e-12 {
        return Err(PurityError::NotCptp(format!("weights sum to {total} > 1")));
    }
    let d = unitaries[0].nrows();
    for u in unitaries {
        if u.shape() != (d, d) {
            return Err(PurityError::DimensionMismatch { expected: d, found: u.nrows() });
        }
        let err = linalg::max_abs_diff(&(u.adjoint() * u), &linalg::identity(d));
        if err > UNITARITY_TOL {
            return Err(PurityError::InvalidParameters(format!("operator is not unitary (|V^dag V - I| = {err:.3e})")));
        }
    }
    Ok((d, total))
}

/// `rho -> (1/lambda) sum_k lambda_k V_k rho V_k^dag` with `lambda = sum_k lambda_k`.
pub fn unitary_mixture_m(weights: &[f64], unitaries: &[ComplexMatrix]) -> Result<Channel> {
    let (_, total) = validate_mixture(weights, unitaries)?;
    let common = common_eigenvector(unitaries)?;
    let ops: Vec<ComplexMatrix> = weights.iter().zip(unitaries).map(|(&w, u)| u.scale((w / total).sqrt())).collect();
    Ok(Channel::from_kraus(&ops, format!("unitary_mixture_m(k={})", weights.len()))?.with_rank_one_witness(common.vector))
}

/// `rho -> sum_k lambda_k V_k rho V_k^dag + (1 - lambda) I / d`.
///
/// Rejects unitaries without a common eigenvector; the eigenvector found is
/// recorded as the rank-one witness of the unitary part.
pub fn unitary_mixture_channel(weights: &[f64], unitaries: &[ComplexMatrix], d: usize) -> Result<Channel> {
    let (dim, total) = validate_mixture(weights, unitaries)?;
    if dim != d {
        return Err(PurityError::DimensionMismatch { expected: d, found: dim });
    }
    let common = common_eigenvector(unitaries)?;
    let ch = Channel::from_action(d, d, format!("unitary_mixture(d={d}, k={})", weights.len()), |a| {
        let mut out = linalg::identity(d) * (linalg::trace(a) * ((1.0 - total) / d as f64));
        for (&w, u) in weights.iter().zip(unitaries) {
            out += (u * a * u.adjoint()).scale(w);
        }
        out
    });
    Ok(ch.with_rank_one_witness(common.vector))
}
