//! Density operators, pure states and their spectral functionals.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{PurityError, Result};
use crate::linalg::{self, hermitian_asymmetry, hermitian_eigen, ComplexMatrix, ComplexVector, HERMITIAN_TOL};

/// Eigenvalues in `[-CLIP_TOL, 0)` are treated as numerical zeros.
pub const CLIP_TOL: f64 = 1e-10;
const STATE_HERMITIAN_TOL: f64 = 1e-12;
const STATE_TRACE_TOL: f64 = 1e-12;
const PURE_NORM_TOL: f64 = 1e-12;

/// Real eigenvalues sorted in descending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    pub fn from_unsorted(mut values: Vec<f64>) -> Self {
        values.sort_by(|x, y| y.total_cmp(x));
        Spectrum(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn largest(&self) -> f64 {
        self.0.first().copied().unwrap_or(0.0)
    }

    pub fn smallest(&self) -> f64 {
        self.0.last().copied().unwrap_or(0.0)
    }

    /// Eigenvalues with noise below zero clipped; errors on genuine negativity.
    pub fn clipped(&self) -> Result<Vec<f64>> {
        self.0
            .iter()
            .map(|&v| {
                if v >= 0.0 {
                    Ok(v)
                } else if v >= -CLIP_TOL {
                    Ok(0.0)
                } else {
                    Err(PurityError::InvalidState(format!("negative eigenvalue {v:.3e}")))
                }
            })
            .collect()
    }

    /// Von Neumann entropy in nats, `0 ln 0 = 0`.
    pub fn entropy(&self) -> Result<f64> {
        Ok(entropy_of(&self.clipped()?))
    }

    pub fn schatten_norm(&self, p: SchattenP) -> Result<f64> {
        Ok(schatten_of(&self.clipped()?, p))
    }
}

impl fmt::Display for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Schatten exponent; `Infinity` is the operator norm, not a large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchattenP {
    Finite(f64),
    Infinity,
}

impl SchattenP {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            Ok(SchattenP::Infinity)
        } else if p.is_nan() || p < 1.0 {
            Err(PurityError::InvalidExponent(p))
        } else {
            Ok(SchattenP::Finite(p))
        }
    }

    /// `1/p`, zero for the operator norm.
    pub fn reciprocal(&self) -> f64 {
        match self {
            SchattenP::Finite(p) => 1.0 / p,
            SchattenP::Infinity => 0.0,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            SchattenP::Finite(p) => *p,
            SchattenP::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for SchattenP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchattenP::Finite(p) => write!(f, "{p}"),
            SchattenP::Infinity => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for SchattenP {
    type Err = PurityError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(SchattenP::Infinity),
            other => {
                let p: f64 = other.parse().map_err(|_| PurityError::InvalidExponent(f64::NAN))?;
                SchattenP::new(p)
            }
        }
    }
}

impl Serialize for SchattenP {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SchattenP::Finite(p) => s.serialize_f64(*p),
            SchattenP::Infinity => s.serialize_str("inf"),
        }
    }
}

/// Entropy of already-clipped nonnegative eigenvalues.
pub(crate) fn entropy_of(eigs: &[f64]) -> f64 {
    eigs.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.ln()).sum()
}

/// `(sum v^p)^(1/p)` evaluated as `max * (sum (v/max)^p)^(1/p)`, which stays
/// finite for very large `p`.
pub(crate) fn schatten_of(eigs: &[f64], p: SchattenP) -> f64 {
    let max = eigs.iter().copied().fold(0.0, f64::max);
    match p {
        SchattenP::Infinity => max,
        SchattenP::Finite(_) if max == 0.0 => 0.0,
        SchattenP::Finite(1.0) => eigs.iter().sum(),
        SchattenP::Finite(p) => {
            let s: f64 = eigs.iter().map(|&v| (v / max).powf(p)).sum();
            max * s.powf(1.0 / p)
        }
    }
}

/// Hermitian eigenvalues sorted descending, rejecting non-Hermitian input.
pub fn hermitian_spectrum(a: &ComplexMatrix) -> Result<Spectrum> {
    let asymmetry = hermitian_asymmetry(a);
    if asymmetry > HERMITIAN_TOL {
        return Err(PurityError::NotHermitian { asymmetry });
    }
    Ok(Spectrum(linalg::hermitian_eigenvalues_unchecked(a)))
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(PurityError::InvalidState(format!("matrix of shape {}x{} is not square", matrix.nrows(), matrix.ncols())));
        }
        let asymmetry = hermitian_asymmetry(&matrix);
        if asymmetry > STATE_HERMITIAN_TOL {
            return Err(PurityError::InvalidState(format!("not Hermitian (asymmetry {asymmetry:.3e})")));
        }
        let tr = linalg::trace(&matrix);
        if (tr - linalg::ONE).norm() > STATE_TRACE_TOL {
            return Err(PurityError::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = linalg::hermitian_eigenvalues_unchecked(&matrix).last().copied().unwrap_or(0.0);
        if min < -CLIP_TOL {
            return Err(PurityError::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(DensityOperator { matrix })
    }

    /// Wraps a matrix the caller has already validated.
    pub(crate) fn from_validated(matrix: ComplexMatrix) -> Self {
        DensityOperator { matrix }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityOperator { matrix: linalg::identity(d).unscale(d as f64) }
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let v = ComplexVector::from_iterator(probs.len(), probs.iter().map(|&p| linalg::c(p, 0.0)));
        DensityOperator::new(ComplexMatrix::from_diagonal(&v))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum(linalg::hermitian_eigenvalues_unchecked(&self.matrix))
    }

    pub fn entropy(&self) -> Result<f64> {
        von_neumann_entropy(self)
    }

    pub fn schatten_norm(&self, p: SchattenP) -> Result<f64> {
        schatten_p_norm(self, p)
    }

    /// Convex combination `w * self + (1 - w) * other`.
    pub fn mix(&self, w: f64, other: &DensityOperator) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(PurityError::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(DensityOperator { matrix: self.matrix.scale(w) + other.matrix.scale(1.0 - w) })
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator { matrix: linalg::tensor(&self.matrix, &other.matrix) }
    }

    /// Bloch vector `w` with `rho = (I + w . sigma) / 2`; qubits only.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 {
            return Err(PurityError::DimensionMismatch { expected: 2, found: self.dim() });
        }
        let m = &self.matrix;
        Ok([2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, (m[(0, 0)] - m[(1, 1)]).re])
    }

    pub fn from_bloch(w: [f64; 3]) -> Result<Self> {
        let [x, y, z] = linalg::paulis();
        let m = (linalg::identity(2) + x.scale(w[0]) + y.scale(w[1]) + z.scale(w[2])).scale(0.5);
        DensityOperator::new(m)
    }
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    rho.spectrum().entropy()
}

/// Schatten p-norm of a state.
pub fn schatten_p_norm(rho: &DensityOperator, p: SchattenP) -> Result<f64> {
    rho.spectrum().schatten_norm(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Traces out one factor of a state on `H (x) K` with `dim H = d_first`.
///
/// `which` names the factor that is traced out.
pub fn partial_trace(rho: &DensityOperator, d_first: usize, d_second: usize, which: Subsystem) -> Result<DensityOperator> {
    let m = partial_trace_matrix(rho.matrix(), d_first, d_second, which)?;
    Ok(DensityOperator { matrix: m })
}

pub(crate) fn partial_trace_matrix(m: &ComplexMatrix, d_first: usize, d_second: usize, which: Subsystem) -> Result<ComplexMatrix> {
    let total = m.nrows();
    if d_first == 0 || d_second == 0 || d_first * d_second != total || !m.is_square() {
        return Err(PurityError::NotFactorizable { total, first: d_first, second: d_second });
    }
    let out = match which {
        Subsystem::Second => {
            ComplexMatrix::from_fn(d_first, d_first, |i, j| (0..d_second).map(|k| m[(i * d_second + k, j * d_second + k)]).sum())
        }
        Subsystem::First => {
            ComplexMatrix::from_fn(d_second, d_second, |k, l| (0..d_first).map(|i| m[(i * d_second + k, i * d_second + l)]).sum())
        }
    };
    Ok(out)
}

/// Unit vector in `C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: ComplexVector,
}

impl PureState {
    pub fn new(amplitudes: ComplexVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if amplitudes.is_empty() || (norm - 1.0).abs() > PURE_NORM_TOL {
            return Err(PurityError::InvalidState(format!("state vector has norm {norm}")));
        }
        Ok(PureState { amplitudes })
    }

    /// Normalizes `v`; fails on a zero vector.
    pub fn normalized(v: ComplexVector) -> Result<Self> {
        let norm = v.norm();
        if norm.is_nan() || norm <= 0.0 || !norm.is_finite() {
            return Err(PurityError::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(PureState { amplitudes: v.unscale(norm) })
    }

    pub fn basis(d: usize, index: usize) -> Self {
        let mut v = ComplexVector::zeros(d);
        v[index] = linalg::ONE;
        PureState { amplitudes: v }
    }

    /// Pure qubit state with Bloch vector `w` (`|w| = 1`).
    pub fn from_bloch(w: [f64; 3]) -> Result<Self> {
        let rho = DensityOperator::from_bloch(w)?;
        let (vals, vecs) = hermitian_eigen(rho.matrix())?;
        if vals[1].abs() > 1e-10 {
            return Err(PurityError::InvalidState(format!("Bloch vector {w:?} is not on the sphere")));
        }
        PureState::normalized(vecs.column(0).into_owned())
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn projector(&self) -> ComplexMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    pub fn as_density(&self) -> DensityOperator {
        DensityOperator { matrix: self.projector() }
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState { amplitudes: linalg::tensor_vec(&self.amplitudes, &other.amplitudes) }
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }

    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        self.as_density().bloch_vector()
    }
}

impl Serialize for PureState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.amplitudes.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PureState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        let v = ComplexVector::from_iterator(pairs.len(), pairs.iter().map(|p| linalg::c(p[0], p[1])));
        PureState::new(v).map_err(serde::de::Error::custom)
    }
}
