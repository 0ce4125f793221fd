//! Thin safe wrappers around the LAPACK routines used by the solvers.
//!
//! All wrappers copy into column-major scratch buffers, so callers can stay
//! with ndarray's default row-major layout.

use std::sync::Once;

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::{Error, Result};

static BLAS_SETUP: Once = Once::new();

extern "C" {
    fn openblas_set_num_threads(n: i32);
}

/// Pin the BLAS backend to one thread per call.
///
/// The crate parallelizes over independent solves with rayon; letting
/// OpenBLAS run its own pool on top oversubscribes the machine and adds
/// per-call synchronization that dwarfs the small solves used here. The
/// pool exists before `main` runs, so the runtime API is required; the
/// environment variables only cover freshly spawned tools.
pub fn ensure_single_threaded_blas() {
    BLAS_SETUP.call_once(|| {
        unsafe { openblas_set_num_threads(1) };
        if std::env::var_os("OPENBLAS_NUM_THREADS").is_none() {
            std::env::set_var("OPENBLAS_NUM_THREADS", "1");
        }
        if std::env::var_os("OMP_NUM_THREADS").is_none() {
            std::env::set_var("OMP_NUM_THREADS", "1");
        }
    });
}

fn to_col_major_f64(a: &Array2<f64>) -> Vec<f64> {
    let (m, n) = a.dim();
    let mut out = Vec::with_capacity(m * n);
    for j in 0..n {
        for i in 0..m {
            out.push(a[(i, j)]);
        }
    }
    out
}

fn to_col_major_c64(a: &Array2<Complex64>) -> Vec<Complex64> {
    let (m, n) = a.dim();
    let mut out = Vec::with_capacity(m * n);
    for j in 0..n {
        for i in 0..m {
            out.push(a[(i, j)]);
        }
    }
    out
}

/// Solve the overdetermined least-squares problem min‖Ax − b‖₂ via QR
/// (`dgels`). Requires `A` to have full column rank; use
/// [`min_norm_least_squares`] for rank-deficient systems.
pub fn least_squares(a: &Array2<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let sols = least_squares_multi(a, &[b])?;
    Ok(sols.into_iter().next().unwrap())
}

/// `dgels` with several right-hand sides sharing one factorization.
pub fn least_squares_multi(a: &Array2<f64>, bs: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
    ensure_single_threaded_blas();
    let (m, n) = a.dim();
    let nrhs = bs.len();
    if m < n {
        return Err(Error::Dimension(format!(
            "least squares needs rows >= cols, got {m}x{n}"
        )));
    }
    for b in bs {
        if b.len() != m {
            return Err(Error::Dimension(format!(
                "rhs length {} does not match {} rows",
                b.len(),
                m
            )));
        }
    }
    let mut ac = to_col_major_f64(a);
    let mut bc = vec![0.0; m * nrhs];
    for (j, b) in bs.iter().enumerate() {
        bc[j * m..(j + 1) * m].copy_from_slice(b);
    }
    let mut info = 0;
    let mut work = [0.0f64];
    unsafe {
        lapack::dgels(
            b'N', m as i32, n as i32, nrhs as i32, &mut ac, m as i32, &mut bc, m as i32, &mut work,
            -1, &mut info, 1,
        );
    }
    let lwork = work[0] as i32;
    let mut work = vec![0.0f64; lwork.max(1) as usize];
    unsafe {
        lapack::dgels(
            b'N', m as i32, n as i32, nrhs as i32, &mut ac, m as i32, &mut bc, m as i32, &mut work,
            lwork, &mut info, 1,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "dgels", info });
    }
    Ok((0..nrhs).map(|j| bc[j * m..j * m + n].to_vec()).collect())
}

/// `dgels` on an owned column-major matrix, destroying `a` and overwriting
/// `b` with the solution in its first `n` entries. The workspace vector is
/// grown on demand and reused across calls.
pub fn least_squares_colmajor_inplace(
    m: usize,
    n: usize,
    a: &mut [f64],
    b: &mut [f64],
    work: &mut Vec<f64>,
) -> Result<()> {
    ensure_single_threaded_blas();
    if a.len() != m * n || b.len() != m || m < n {
        return Err(Error::Dimension(format!(
            "in-place least squares got a {}-element matrix for {m}x{n} and rhs {}",
            a.len(),
            b.len()
        )));
    }
    let mut info = 0;
    // the size query is O(1); only the allocation is worth reusing
    let mut query = [0.0f64];
    unsafe {
        lapack::dgels(
            b'N', m as i32, n as i32, 1, a, m as i32, b, m as i32, &mut query, -1, &mut info, 1,
        );
    }
    let needed = (query[0] as usize).max(1);
    if work.len() < needed {
        work.resize(needed, 0.0);
    }
    let lwork = work.len() as i32;
    unsafe {
        lapack::dgels(
            b'N', m as i32, n as i32, 1, a, m as i32, b, m as i32, work, lwork, &mut info, 1,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "dgels", info });
    }
    Ok(())
}

/// Minimum-norm least-squares solution via divide-and-conquer SVD (`dgelsd`).
///
/// Returns the solution together with the effective rank and the singular
/// values of `A`. Singular values below `rcond · σ_max` are treated as zero.
pub fn min_norm_least_squares(
    a: &Array2<f64>,
    b: &[f64],
    rcond: f64,
) -> Result<(Vec<f64>, usize, Vec<f64>)> {
    ensure_single_threaded_blas();
    let (m, n) = a.dim();
    if b.len() != m {
        return Err(Error::Dimension(format!(
            "rhs length {} does not match {} rows",
            b.len(),
            m
        )));
    }
    let mut ac = to_col_major_f64(a);
    let ldb = m.max(n);
    let mut bc = vec![0.0; ldb];
    bc[..m].copy_from_slice(b);
    let mut s = vec![0.0; m.min(n)];
    let mut rank = 0;
    let mut info = 0;
    let mut work = [0.0f64];
    let mut iwork_query = [0i32];
    unsafe {
        lapack::dgelsd(
            m as i32,
            n as i32,
            1,
            &mut ac,
            m as i32,
            &mut bc,
            ldb as i32,
            &mut s,
            rcond,
            &mut rank,
            &mut work,
            -1,
            &mut iwork_query,
            &mut info,
        );
    }
    let lwork = work[0] as i32;
    let mut work = vec![0.0f64; lwork.max(1) as usize];
    let mut iwork = vec![0i32; (iwork_query[0] as usize).max(1)];
    unsafe {
        lapack::dgelsd(
            m as i32,
            n as i32,
            1,
            &mut ac,
            m as i32,
            &mut bc,
            ldb as i32,
            &mut s,
            rcond,
            &mut rank,
            &mut work,
            lwork,
            &mut iwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "dgelsd", info });
    }
    Ok((bc[..n].to_vec(), rank as usize, s))
}

/// Singular values of a real matrix, descending (`dgesvd`, values only).
pub fn singular_values(a: &Array2<f64>) -> Result<Vec<f64>> {
    ensure_single_threaded_blas();
    let (m, n) = a.dim();
    let mut ac = to_col_major_f64(a);
    let mut s = vec![0.0; m.min(n)];
    let mut u = [0.0f64];
    let mut vt = [0.0f64];
    let mut info = 0;
    let mut work = [0.0f64];
    unsafe {
        lapack::dgesvd(
            b'N', b'N', m as i32, n as i32, &mut ac, m as i32, &mut s, &mut u, 1, &mut vt, 1,
            &mut work, -1, &mut info,
        );
    }
    let lwork = work[0] as i32;
    let mut work = vec![0.0f64; lwork.max(1) as usize];
    unsafe {
        lapack::dgesvd(
            b'N', b'N', m as i32, n as i32, &mut ac, m as i32, &mut s, &mut u, 1, &mut vt, 1,
            &mut work, lwork, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "dgesvd", info });
    }
    Ok(s)
}

/// Eigenvalues and right eigenvectors of a general complex matrix (`zgeev`).
pub fn eig(a: &Array2<Complex64>) -> Result<(Array1<Complex64>, Array2<Complex64>)> {
    ensure_single_threaded_blas();
    let (m, n) = a.dim();
    if m != n {
        return Err(Error::Dimension(format!("eig needs a square matrix, got {m}x{n}")));
    }
    let mut ac = to_col_major_c64(a);
    let mut w = vec![Complex64::ZERO; n];
    let mut vl = [Complex64::ZERO];
    let mut vr = vec![Complex64::ZERO; n * n];
    let mut rwork = vec![0.0; 2 * n];
    let mut info = 0;
    let mut work = [Complex64::ZERO];
    unsafe {
        lapack::zgeev(
            b'N', b'V', n as i32, &mut ac, n as i32, &mut w, &mut vl, 1, &mut vr, n as i32,
            &mut work, -1, &mut rwork, &mut info,
        );
    }
    let lwork = work[0].re as i32;
    let mut work = vec![Complex64::ZERO; lwork.max(1) as usize];
    unsafe {
        lapack::zgeev(
            b'N', b'V', n as i32, &mut ac, n as i32, &mut w, &mut vl, 1, &mut vr, n as i32,
            &mut work, lwork, &mut rwork, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "zgeev", info });
    }
    let values = Array1::from_vec(w);
    let vectors = Array2::from_shape_fn((n, n), |(i, j)| vr[j * n + i]);
    Ok((values, vectors))
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix (`zheev`).
pub fn eigh(a: &Array2<Complex64>) -> Result<(Vec<f64>, Array2<Complex64>)> {
    ensure_single_threaded_blas();
    let (m, n) = a.dim();
    if m != n {
        return Err(Error::Dimension(format!("eigh needs a square matrix, got {m}x{n}")));
    }
    let mut ac = to_col_major_c64(a);
    let mut w = vec![0.0; n];
    let mut rwork = vec![0.0; (3 * n).max(1)];
    let mut info = 0;
    let mut work = [Complex64::ZERO];
    unsafe {
        lapack::zheev(
            b'V', b'L', n as i32, &mut ac, n as i32, &mut w, &mut work, -1, &mut rwork, &mut info,
        );
    }
    let lwork = work[0].re as i32;
    let mut work = vec![Complex64::ZERO; lwork.max(1) as usize];
    unsafe {
        lapack::zheev(
            b'V', b'L', n as i32, &mut ac, n as i32, &mut w, &mut work, lwork, &mut rwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "zheev", info });
    }
    let vectors = Array2::from_shape_fn((n, n), |(i, j)| ac[j * n + i]);
    Ok((w, vectors))
}

/// Smallest eigenvalue of a Hermitian matrix (values-only `zheev`).
pub fn min_eigenvalue_hermitian(a: &Array2<Complex64>) -> Result<f64> {
    ensure_single_threaded_blas();
    let (m, n) = a.dim();
    if m != n {
        return Err(Error::Dimension(format!("expected square matrix, got {m}x{n}")));
    }
    let mut ac = to_col_major_c64(a);
    let mut w = vec![0.0; n];
    let mut rwork = vec![0.0; (3 * n).max(1)];
    let mut info = 0;
    let mut work = [Complex64::ZERO];
    unsafe {
        lapack::zheev(
            b'N', b'L', n as i32, &mut ac, n as i32, &mut w, &mut work, -1, &mut rwork, &mut info,
        );
    }
    let lwork = work[0].re as i32;
    let mut work = vec![Complex64::ZERO; lwork.max(1) as usize];
    unsafe {
        lapack::zheev(
            b'N', b'L', n as i32, &mut ac, n as i32, &mut w, &mut work, lwork, &mut rwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "zheev", info });
    }
    Ok(w[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn least_squares_recovers_exact_solution() {
        let a = array![[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]];
        // b generated from x = (3, -1)
        let b = [3.0, -2.0, 2.0];
        let x = least_squares(&a, &b).unwrap();
        assert_abs_diff_eq!(x[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn min_norm_handles_rank_deficiency() {
        let a = array![[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]];
        let b = [2.0, 4.0, 6.0];
        let (x, rank, s) = min_norm_least_squares(&a, &b, 1e-10).unwrap();
        assert_eq!(rank, 1);
        assert!(s[1] / s[0] < 1e-12);
        // minimum-norm solution splits evenly
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(x[1], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn eig_diagonalizes_rotation() {
        let a = array![
            [Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)],
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
        ];
        let (vals, vecs) = eig(&a).unwrap();
        let mut norms: Vec<f64> = vals.iter().map(|v| (v.norm() - 1.0).abs()).collect();
        norms.sort_by(f64::total_cmp);
        assert!(norms[1] < 1e-12);
        // residual check A v = λ v
        for j in 0..2 {
            for i in 0..2 {
                let av: Complex64 = (0..2).map(|k| a[(i, k)] * vecs[(k, j)]).sum();
                assert_abs_diff_eq!((av - vals[j] * vecs[(i, j)]).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn eigh_orders_ascending() {
        let a = array![
            [Complex64::new(2.0, 0.0), Complex64::new(0.0, -1.0)],
            [Complex64::new(0.0, 1.0), Complex64::new(2.0, 0.0)]
        ];
        let (w, _) = eigh(&a).unwrap();
        assert_abs_diff_eq!(w[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(min_eigenvalue_hermitian(&a).unwrap(), 1.0, epsilon = 1e-12);
    }
}
