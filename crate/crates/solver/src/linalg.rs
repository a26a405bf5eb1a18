//! Small dense complex matrices: Kronecker products, partial traces, Hermitian spectra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::herm2::Herm2;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `|v⟩⟨v|`.
pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn herm2_to_matrix(h: &Herm2) -> CMatrix {
    let m = h.to_complex();
    CMatrix::from_fn(2, 2, |i, j| m[i][j])
}

/// Hermitian part of a 2x2 matrix as a [`Herm2`].
pub fn matrix_to_herm2(m: &CMatrix) -> Herm2 {
    assert_eq!((m.nrows(), m.ncols()), (2, 2), "expected a 2x2 matrix");
    Herm2::from_complex([[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]])
}

/// Traces out the first factor of a `da·db` operator.
pub fn partial_trace_first(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    CMatrix::from_fn(db, db, |i, j| (0..da).map(|k| m[(k * db + i, k * db + j)]).sum())
}

/// Traces out the second factor of a `da·db` operator.
pub fn partial_trace_second(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    CMatrix::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum())
}

/// `tr[a·b]`.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let mut t = c(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            t += a[(i, k)] * b[(k, i)];
        }
    }
    t
}

pub fn hermitian_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Eigenvalues (ascending) and matching eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, Vec<CVector>) {
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect();
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0[0]
}

/// Projector onto the span of eigenvectors with eigenvalue `< 0`.
pub fn negative_projector(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let d = m.nrows();
    let mut p = CMatrix::zeros(d, d);
    for (l, v) in vals.iter().zip(&vecs) {
        if *l < 0.0 {
            p += projector(v);
        }
    }
    p
}
