//! Thin safe wrappers over the LAPACK routines this crate needs:
//! dense nonsymmetric eigendecomposition, linear solves and singular values.
//!
//! Matrices are row-major [`ndarray::Array2`]; buffers are transposed or
//! reinterpreted as needed before the column-major LAPACK calls.

use ndarray::Array2;
use std::ffi::{c_char, c_int};
use std::sync::Once;
use thiserror::Error;

extern "C" {
    fn openblas_set_num_threads(num: c_int);
}

/// Parallelism lives at the study-cell level; OpenBLAS's own worker pool
/// is disabled (its workers run on small stacks and the matrices here are
/// modest).
fn init_backend() {
    static ONCE: Once = Once::new();
    ONCE.call_once(|| unsafe { openblas_set_num_threads(1) });
}

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("LAPACK {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },
    #[error("matrix must be square, got {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },
}

/// Eigenvalues and right eigenvectors of a real square matrix.
///
/// For a complex conjugate pair `re[j] +/- i im[j]` (with `im[j] > 0`),
/// columns `j` and `j+1` of `vectors` hold the real and imaginary parts;
/// the right eigenvector of eigenvalue `re[j] + i im[j]` is
/// `col(j) - i col(j+1)`.
pub struct EigResult {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub vectors: Array2<f64>,
}

/// Full eigendecomposition via `dgeev`.
///
/// The row-major input buffer is handed to LAPACK unchanged, so LAPACK sees
/// the transpose; requesting its left eigenvectors yields (conjugates of)
/// the right eigenvectors of the original matrix, which is what `EigResult`
/// stores.
pub fn eig(a: &Array2<f64>) -> Result<EigResult, LinalgError> {
    init_backend();
    let n = check_square(a)?;
    let nn = n as i32;
    let mut at: Vec<f64> = a.iter().copied().collect();
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut vl = vec![0.0; n * n];
    let mut vr = [0.0f64];
    let mut info = 0;
    let jobvl = b'V' as c_char;
    let jobvr = b'N' as c_char;
    unsafe {
        let mut query = [0.0f64];
        lapack_sys::dgeev_(
            &jobvl, &jobvr, &nn, at.as_mut_ptr(), &nn, wr.as_mut_ptr(), wi.as_mut_ptr(),
            vl.as_mut_ptr(), &nn, vr.as_mut_ptr(), &1, query.as_mut_ptr(), &-1, &mut info,
        );
        if info != 0 {
            return Err(LinalgError::Lapack { routine: "dgeev (workspace)", info });
        }
        let lwork = query[0] as i32;
        let mut work = vec![0.0; lwork.max(1) as usize];
        lapack_sys::dgeev_(
            &jobvl, &jobvr, &nn, at.as_mut_ptr(), &nn, wr.as_mut_ptr(), wi.as_mut_ptr(),
            vl.as_mut_ptr(), &nn, vr.as_mut_ptr(), &1, work.as_mut_ptr(), &lwork, &mut info,
        );
    }
    if info != 0 {
        return Err(LinalgError::Lapack { routine: "dgeev", info });
    }
    // vl is column-major n x n; column j is eigenvector j.
    let vectors = Array2::from_shape_fn((n, n), |(i, j)| vl[i + j * n]);
    Ok(EigResult { re: wr, im: wi, vectors })
}

/// Solves `A x = b` via `dgesv`.
pub fn solve(a: &Array2<f64>, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    init_backend();
    let n = check_square(a)?;
    assert_eq!(b.len(), n, "right-hand side length mismatch");
    let nn = n as i32;
    // column-major copy
    let mut a_cm = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            a_cm[i + j * n] = a[[i, j]];
        }
    }
    let mut x = b.to_vec();
    let mut ipiv = vec![0i32; n];
    let mut info = 0;
    unsafe {
        lapack_sys::dgesv_(
            &nn, &1, a_cm.as_mut_ptr(), &nn, ipiv.as_mut_ptr(), x.as_mut_ptr(), &nn, &mut info,
        );
    }
    if info != 0 {
        return Err(LinalgError::Lapack { routine: "dgesv", info });
    }
    Ok(x)
}

/// Singular values via `dgesvd` (descending).
pub fn singular_values(a: &Array2<f64>) -> Result<Vec<f64>, LinalgError> {
    init_backend();
    let n = check_square(a)?;
    let nn = n as i32;
    // singular values are transpose-invariant, the row-major buffer is fine
    let mut buf: Vec<f64> = a.iter().copied().collect();
    let mut s = vec![0.0; n];
    let mut u = [0.0f64];
    let mut vt = [0.0f64];
    let mut info = 0;
    let jobn = b'N' as c_char;
    unsafe {
        let mut query = [0.0f64];
        lapack_sys::dgesvd_(
            &jobn, &jobn, &nn, &nn, buf.as_mut_ptr(), &nn, s.as_mut_ptr(),
            u.as_mut_ptr(), &1, vt.as_mut_ptr(), &1, query.as_mut_ptr(), &-1, &mut info,
        );
        if info != 0 {
            return Err(LinalgError::Lapack { routine: "dgesvd (workspace)", info });
        }
        let lwork = query[0] as i32;
        let mut work = vec![0.0; lwork.max(1) as usize];
        lapack_sys::dgesvd_(
            &jobn, &jobn, &nn, &nn, buf.as_mut_ptr(), &nn, s.as_mut_ptr(),
            u.as_mut_ptr(), &1, vt.as_mut_ptr(), &1, work.as_mut_ptr(), &lwork, &mut info,
        );
    }
    if info != 0 {
        return Err(LinalgError::Lapack { routine: "dgesvd", info });
    }
    Ok(s)
}

/// 2-norm condition number estimate from the singular values.
pub fn condition_number(a: &Array2<f64>) -> Result<f64, LinalgError> {
    let s = singular_values(a)?;
    let smax = s.first().copied().unwrap_or(0.0);
    let smin = s.last().copied().unwrap_or(0.0);
    Ok(if smin == 0.0 { f64::INFINITY } else { smax / smin })
}

fn check_square(a: &Array2<f64>) -> Result<usize, LinalgError> {
    if a.nrows() != a.ncols() {
        return Err(LinalgError::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    Ok(a.nrows())
}
