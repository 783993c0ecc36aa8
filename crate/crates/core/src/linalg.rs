//! Dense complex matrix helpers shared by states and channels.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`; vectorization of operators is
//! column-stacking, `vec(|i><j|) = e_j (x) e_i`, i.e. entry `(i, j)` of a
//! `d x d` operator sits at index `j * d + i`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{PurityError, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Tolerance on `|A - A^dag|` accepted by the spectral routines.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest entrywise modulus of `A - A^dag`.
pub fn hermitian_asymmetry(a: &ComplexMatrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(A + A^dag) / 2`.
pub fn hermitian_part(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()).scale(0.5)
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn trace(a: &ComplexMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

/// Kronecker product with `(i (x) k, j (x) l) -> (i * dB + k, j * dB + l)`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn tensor_vec(a: &ComplexVector, b: &ComplexVector) -> ComplexVector {
    a.kronecker(b)
}

/// Column-stacking vectorization.
pub fn vectorize(a: &ComplexMatrix) -> ComplexVector {
    // nalgebra storage is column-major, which is exactly column stacking.
    ComplexVector::from_iterator(a.len(), a.iter().copied())
}

pub fn unvectorize(v: &ComplexVector, rows: usize, cols: usize) -> ComplexMatrix {
    assert_eq!(v.len(), rows * cols);
    ComplexMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Matrix unit `|i><j|` of dimension `d`.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    m[(i, j)] = ONE;
    m
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn paulis() -> [ComplexMatrix; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

/// Eigenvalues of a Hermitian matrix, sorted descending.
///
/// No Hermiticity check; callers on hot paths pass matrices they built
/// Hermitian. The 2x2 case uses the closed form.
pub fn hermitian_eigenvalues_unchecked(a: &ComplexMatrix) -> Vec<f64> {
    match a.nrows() {
        0 => Vec::new(),
        1 => vec![a[(0, 0)].re],
        2 => {
            let p = a[(0, 0)].re;
            let q = a[(1, 1)].re;
            let off = 0.5 * (a[(0, 1)] + a[(1, 0)].conj());
            let mean = 0.5 * (p + q);
            let half_gap = (0.25 * (p - q) * (p - q) + off.norm_sqr()).sqrt();
            vec![mean + half_gap, mean - half_gap]
        }
        _ => {
            let h = hermitian_part(a);
            let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(|x, y| y.total_cmp(x));
            ev
        }
    }
}

/// Full eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues sorted descending and the matching orthonormal
/// eigenvectors as columns.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let asymmetry = hermitian_asymmetry(a);
    if asymmetry > HERMITIAN_TOL {
        return Err(PurityError::NotHermitian { asymmetry });
    }
    let eig = hermitian_part(a).symmetric_eigen();
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    Ok((values, vectors))
}
