//! Linear maps on operators stored as superoperators.
//!
//! A channel from `d_in x d_in` to `d_out x d_out` operators is the matrix
//! `S` of shape `(d_out^2, d_in^2)` with `vec(Phi(A)) = S vec(A)`, using the
//! column-stacking `vec` from [`crate::linalg`]. Kraus operators and the Choi
//! matrix are derived from `S` on demand.

use std::fmt;

use serde::Serialize;

use crate::error::{PurityError, Result};
use crate::linalg::{self, hermitian_asymmetry, ComplexMatrix, ComplexVector};
use crate::state::{partial_trace_matrix, DensityOperator, PureState, Subsystem};

/// Positivity slack tolerated on channel outputs before the map is declared non-CP.
pub const OUTPUT_POSITIVITY_TOL: f64 = 1e-8;
const OUTPUT_TRACE_TOL: f64 = 1e-10;

/// Families whose unitary covariance is known in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Covariance {
    /// `V = U`.
    Depolarising,
    /// `V = conj(U)`.
    TransposeDepolarising,
    /// `V = conj(U)`.
    WernerHolevo,
    /// Qubit map scaling all Bloch axes by the same magnitude.
    IsotropicQubit,
    /// Composition of covariant maps.
    Composite,
}

#[derive(Debug, Clone)]
pub struct Channel {
    dim_in: usize,
    dim_out: usize,
    superop: ComplexMatrix,
    label: String,
    covariance: Option<Covariance>,
    rank_one_witness: Option<PureState>,
}

impl Channel {
    pub fn from_superop(dim_in: usize, dim_out: usize, superop: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        if superop.nrows() != dim_out * dim_out {
            return Err(PurityError::DimensionMismatch { expected: dim_out * dim_out, found: superop.nrows() });
        }
        if superop.ncols() != dim_in * dim_in {
            return Err(PurityError::DimensionMismatch { expected: dim_in * dim_in, found: superop.ncols() });
        }
        Ok(Channel { dim_in, dim_out, superop, label: label.into(), covariance: None, rank_one_witness: None })
    }

    /// Builds the superoperator by evaluating `action` on every matrix unit.
    pub fn from_action<F>(dim_in: usize, dim_out: usize, label: impl Into<String>, action: F) -> Self
    where
        F: Fn(&ComplexMatrix) -> ComplexMatrix,
    {
        let mut superop = ComplexMatrix::zeros(dim_out * dim_out, dim_in * dim_in);
        for j in 0..dim_in {
            for i in 0..dim_in {
                let out = action(&linalg::matrix_unit(dim_in, i, j));
                assert_eq!(out.shape(), (dim_out, dim_out), "action returned wrong shape");
                superop.set_column(j * dim_in + i, &linalg::vectorize(&out));
            }
        }
        Channel { dim_in, dim_out, superop, label: label.into(), covariance: None, rank_one_witness: None }
    }

    /// `rho -> sum_k K_k rho K_k^dag`.
    pub fn from_kraus(ops: &[ComplexMatrix], label: impl Into<String>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| PurityError::InvalidParameters("empty Kraus list".into()))?;
        let (dim_out, dim_in) = first.shape();
        if dim_in == 0 || dim_out == 0 {
            return Err(PurityError::InvalidParameters("Kraus operators must be non-empty".into()));
        }
        let mut superop = ComplexMatrix::zeros(dim_out * dim_out, dim_in * dim_in);
        for k in ops {
            if k.shape() != (dim_out, dim_in) {
                return Err(PurityError::InvalidParameters(format!(
                    "Kraus operator of shape {:?} differs from {:?}",
                    k.shape(),
                    (dim_out, dim_in)
                )));
            }
            superop += linalg::tensor(&k.map(|z| z.conj()), k);
        }
        Channel::from_superop(dim_in, dim_out, superop, label)
    }

    pub fn identity(d: usize) -> Self {
        let mut ch = Channel::from_superop(d, d, ComplexMatrix::identity(d * d, d * d), format!("identity({d})")).expect("square identity");
        ch.covariance = Some(Covariance::Depolarising);
        ch
    }

    /// Matrix transposition; positive but not completely positive.
    pub fn transpose(d: usize) -> Self {
        Channel::from_action(d, d, format!("transpose({d})"), |a| a.transpose())
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn superop(&self) -> &ComplexMatrix {
        &self.superop
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Closed-form covariance, if the constructor established one.
    pub fn covariance(&self) -> Option<Covariance> {
        self.covariance
    }

    pub fn is_analytically_covariant(&self) -> bool {
        self.covariance.is_some()
    }

    pub(crate) fn with_covariance(mut self, cov: Covariance) -> Self {
        self.covariance = Some(cov);
        self
    }

    /// An input known to produce a rank-one output.
    pub fn rank_one_witness(&self) -> Option<&PureState> {
        self.rank_one_witness.as_ref()
    }

    pub(crate) fn with_rank_one_witness(mut self, psi: PureState) -> Self {
        self.rank_one_witness = Some(psi);
        self
    }

    /// Raw linear action on an arbitrary `d_in x d_in` operator.
    pub fn apply_operator(&self, a: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(a.shape(), (self.dim_in, self.dim_in), "operator dimension mismatch");
        let v = &self.superop * linalg::vectorize(a);
        linalg::unvectorize(&v, self.dim_out, self.dim_out)
    }

    /// Output on the pure input `psi` (unnormalized amplitudes accepted).
    pub fn apply_pure(&self, psi: &ComplexVector) -> ComplexMatrix {
        let d = self.dim_in;
        let mut v = ComplexVector::zeros(d * d);
        for j in 0..d {
            let cj = psi[j].conj();
            for i in 0..d {
                v[j * d + i] = psi[i] * cj;
            }
        }
        let out = &self.superop * v;
        linalg::unvectorize(&out, self.dim_out, self.dim_out)
    }

    /// Applies the channel and validates the output as a state.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.dim_in {
            return Err(PurityError::DimensionMismatch { expected: self.dim_in, found: rho.dim() });
        }
        validate_output(self.apply_operator(rho.matrix()))
    }

    pub fn apply_state(&self, psi: &PureState) -> Result<DensityOperator> {
        if psi.dim() != self.dim_in {
            return Err(PurityError::DimensionMismatch { expected: self.dim_in, found: psi.dim() });
        }
        validate_output(self.apply_pure(psi.amplitudes()))
    }

    pub fn to_choi(&self) -> ChoiMatrix {
        let (din, dout) = (self.dim_in, self.dim_out);
        let n = din * dout;
        let m = ComplexMatrix::from_fn(n, n, |r, c| {
            let (i, k) = (r / dout, r % dout);
            let (j, l) = (c / dout, c % dout);
            self.superop[(l * dout + k, j * din + i)]
        });
        ChoiMatrix { matrix: m, dim_in: din, dim_out: dout }
    }

    /// CPTP verdict with its diagnostics.
    pub fn is_cptp(&self, tol: f64) -> CptpVerdict {
        self.to_choi().cptp_verdict(tol)
    }

    pub fn kraus(&self, rank_tol: f64) -> Result<Vec<ComplexMatrix>> {
        kraus_from_choi(&self.to_choi(), rank_tol)
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{} -> {}]", self.label, self.dim_in, self.dim_out)
    }
}

fn validate_output(out: ComplexMatrix) -> Result<DensityOperator> {
    let asymmetry = hermitian_asymmetry(&out);
    if asymmetry > linalg::HERMITIAN_TOL {
        return Err(PurityError::NotHermitian { asymmetry });
    }
    let out = linalg::hermitian_part(&out);
    let tr = linalg::trace(&out).re;
    if (tr - 1.0).abs() > OUTPUT_TRACE_TOL {
        return Err(PurityError::NotCptp(format!("output trace {tr}")));
    }
    let min_eigenvalue = linalg::hermitian_eigenvalues_unchecked(&out).last().copied().unwrap_or(0.0);
    if min_eigenvalue < -OUTPUT_POSITIVITY_TOL {
        return Err(PurityError::OutputNotPositive { min_eigenvalue });
    }
    Ok(DensityOperator::from_validated(out))
}

/// `psi o m`: apply `m` first.
pub fn compose(psi: &Channel, m: &Channel) -> Result<Channel> {
    if m.dim_out != psi.dim_in {
        return Err(PurityError::DimensionMismatch { expected: psi.dim_in, found: m.dim_out });
    }
    let mut out = Channel::from_superop(m.dim_in, psi.dim_out, &psi.superop * &m.superop, format!("{} o {}", psi.label, m.label))?;
    if psi.covariance.is_some() && m.covariance.is_some() {
        out.covariance = Some(Covariance::Composite);
    }
    Ok(out)
}

/// `phi (x) omega` on `H_phi (x) H_omega`.
pub fn tensor_channels(phi: &Channel, omega: &Channel) -> Channel {
    let (a_in, b_in) = (phi.dim_in, omega.dim_in);
    let d_in = a_in * b_in;
    let d_out = phi.dim_out * omega.dim_out;
    let phi_units: Vec<ComplexMatrix> =
        (0..a_in * a_in).map(|col| linalg::unvectorize(&phi.superop.column(col).into_owned(), phi.dim_out, phi.dim_out)).collect();
    let omega_units: Vec<ComplexMatrix> =
        (0..b_in * b_in).map(|col| linalg::unvectorize(&omega.superop.column(col).into_owned(), omega.dim_out, omega.dim_out)).collect();
    let mut superop = ComplexMatrix::zeros(d_out * d_out, d_in * d_in);
    for j in 0..a_in {
        for i in 0..a_in {
            let left = &phi_units[j * a_in + i];
            for l in 0..b_in {
                for k in 0..b_in {
                    let right = &omega_units[l * b_in + k];
                    let row = i * b_in + k;
                    let col = j * b_in + l;
                    let out = linalg::tensor(left, right);
                    superop.set_column(col * d_in + row, &linalg::vectorize(&out));
                }
            }
        }
    }
    Channel {
        dim_in: d_in,
        dim_out: d_out,
        superop,
        label: format!("({}) x ({})", phi.label, omega.label),
        covariance: None,
        rank_one_witness: None,
    }
}

/// Unnormalized Choi matrix `J = sum_ij |i><j| (x) Phi(|i><j|)`.
#[derive(Debug, Clone)]
pub struct ChoiMatrix {
    matrix: ComplexMatrix,
    dim_in: usize,
    dim_out: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CptpVerdict {
    pub cptp: bool,
    pub min_choi_eigenvalue: f64,
    pub trace_residual: f64,
    pub choi_asymmetry: f64,
    pub tol: f64,
}

impl ChoiMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    /// `tr_out J`, equal to `I_in` exactly when the map is trace preserving.
    pub fn trace_over_output(&self) -> ComplexMatrix {
        partial_trace_matrix(&self.matrix, self.dim_in, self.dim_out, Subsystem::Second).expect("Choi dimensions factor by construction")
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues_unchecked(&linalg::hermitian_part(&self.matrix))
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.eigenvalues().iter().filter(|&&v| v > tol).count()
    }

    pub fn cptp_verdict(&self, tol: f64) -> CptpVerdict {
        let choi_asymmetry = hermitian_asymmetry(&self.matrix);
        let min_choi_eigenvalue = self.eigenvalues().last().copied().unwrap_or(0.0);
        let trace_residual = linalg::max_abs_diff(&self.trace_over_output(), &linalg::identity(self.dim_in));
        CptpVerdict {
            cptp: choi_asymmetry <= tol && min_choi_eigenvalue >= -tol && trace_residual <= tol,
            min_choi_eigenvalue,
            trace_residual,
            choi_asymmetry,
            tol,
        }
    }
}

/// Kraus operators from the eigendecomposition of the Choi matrix.
///
/// Eigenvalues at or below `rank_tol` are dropped; eigenvalues below
/// `-rank_tol` mean the map is not CP.
pub fn kraus_from_choi(choi: &ChoiMatrix, rank_tol: f64) -> Result<Vec<ComplexMatrix>> {
    let (vals, vecs) = linalg::hermitian_eigen(&choi.matrix)?;
    let min = vals.last().copied().unwrap_or(0.0);
    if min < -rank_tol {
        return Err(PurityError::NotCptp(format!("Choi matrix has eigenvalue {min:.3e}")));
    }
    let (din, dout) = (choi.dim_in, choi.dim_out);
    Ok(vals
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > rank_tol)
        .map(|(col, &v)| {
            let s = v.sqrt();
            ComplexMatrix::from_fn(dout, din, |k, i| vecs[(i * dout + k, col)] * s)
        })
        .collect())
}
