//! Dense linear-algebra helpers: small symmetric problems through nalgebra,
//! large Hermitian eigenproblems through LAPACK (zheevd/zheevr).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Symmetric square root of a symmetric positive-definite matrix.
pub fn spd_sqrt(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = g.clone().symmetric_eigen();
    let mut vals = sym.eigenvalues.clone();
    for v in vals.iter_mut() {
        if *v <= 0.0 {
            return Err(Error::NotSpd(format!("eigenvalue {v:.3e} <= 0")));
        }
        *v = v.sqrt();
    }
    let q = sym.eigenvectors;
    Ok(&q * DMatrix::from_diagonal(&vals) * q.transpose())
}

/// Max absolute entry of `a - a^T`, for symmetry asserts.
pub fn asym_norm(a: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..i {
            worst = worst.max((a[(i, j)] + -a[(j, i)]).abs());
        }
    }
    worst
}

/// Deterministic pairwise summation; stable against the accumulation error
/// of a naive left fold on long quadrature cell lists.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Eigenvalues (ascending) and optionally eigenvectors of a Hermitian matrix,
/// via LAPACK `zheevd`. The matrix is passed in column-major order and is
/// destroyed.
pub fn zheevd(matrix: &mut [Complex64], n: usize, vectors: bool) -> Result<Vec<f64>> {
    assert_eq!(matrix.len(), n * n);
    let jobz = if vectors { b'V' } else { b'N' };
    let nn = n as i32;
    let mut w = vec![0.0f64; n];
    let mut info = 0i32;
    // Workspace sizes from the zheevd documentation for jobz='V'.
    let (lwork, lrwork, liwork) = if vectors {
        (2 * n + n * n, 1 + 5 * n + 2 * n * n, 3 + 5 * n)
    } else {
        (n + 1, n.max(1), 1)
    };
    let mut work = vec![Complex64::new(0.0, 0.0); lwork.max(1)];
    let mut rwork = vec![0.0f64; lrwork.max(1)];
    let mut iwork = vec![0i32; liwork.max(1)];
    unsafe {
        lapack_sys::zheevd_(
            &jobz as *const u8 as *const _,
            b"L".as_ptr() as *const _,
            &nn,
            matrix.as_mut_ptr() as *mut _,
            &nn,
            w.as_mut_ptr(),
            work.as_mut_ptr() as *mut _,
            &(lwork as i32),
            rwork.as_mut_ptr(),
            &(lrwork as i32),
            iwork.as_mut_ptr(),
            &(liwork as i32),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack {
            routine: "zheevd",
            info,
        });
    }
    Ok(w)
}

/// Eigenpairs of a Hermitian matrix with eigenvalue in `(vl, vu]`, via
/// LAPACK `zheevr`. Returns `(eigenvalues ascending, vectors)` where column
/// `k` of `vectors` (length n per column, column-major) is the k-th pair.
/// Cheaper than `zheevd` when only a spectral window is needed.
pub fn zheevr_range(
    matrix: &mut [Complex64],
    n: usize,
    vl: f64,
    vu: f64,
) -> Result<(Vec<f64>, Vec<Complex64>)> {
    assert_eq!(matrix.len(), n * n);
    let nn = n as i32;
    let mut m = 0i32;
    let mut w = vec![0.0f64; n];
    let mut z = vec![Complex64::new(0.0, 0.0); n * n];
    let mut isuppz = vec![0i32; 2 * n.max(1)];
    let mut info = 0i32;
    let abstol = 0.0f64; // default tolerance
    let il = 0i32;
    let iu = 0i32;
    let lwork = (2 * n).max(1) * 2;
    let lrwork = (24 * n).max(1);
    let liwork = (10 * n).max(1);
    let mut work = vec![Complex64::new(0.0, 0.0); lwork];
    let mut rwork = vec![0.0f64; lrwork];
    let mut iwork = vec![0i32; liwork];
    unsafe {
        lapack_sys::zheevr_(
            b"V".as_ptr() as *const _,
            b"V".as_ptr() as *const _,
            b"L".as_ptr() as *const _,
            &nn,
            matrix.as_mut_ptr() as *mut _,
            &nn,
            &vl,
            &vu,
            &il,
            &iu,
            &abstol,
            &mut m,
            w.as_mut_ptr(),
            z.as_mut_ptr() as *mut _,
            &nn,
            isuppz.as_mut_ptr(),
            work.as_mut_ptr() as *mut _,
            &(lwork as i32),
            rwork.as_mut_ptr(),
            &(lrwork as i32),
            iwork.as_mut_ptr(),
            &(liwork as i32),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack {
            routine: "zheevr",
            info,
        });
    }
    let m = m as usize;
    w.truncate(m);
    z.truncate(m * n);
    Ok((w, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn spd_sqrt_squares_back() {
        let g = dmatrix![2.0, 0.5; 0.5, 1.0];
        let s = spd_sqrt(&g).unwrap();
        let back = &s * &s;
        assert!((back - g).amax() < 1e-12);
    }

    #[test]
    fn spd_sqrt_rejects_indefinite() {
        let g = dmatrix![1.0, 0.0; 0.0, -1.0];
        assert!(spd_sqrt(&g).is_err());
    }

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let xs = [0.1, 0.2, 0.3, 0.4, 0.5];
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-15);
    }

    #[test]
    fn zheevd_diagonal_matrix() {
        let n = 3;
        let mut a = vec![Complex64::new(0.0, 0.0); n * n];
        a[0] = Complex64::new(3.0, 0.0);
        a[4] = Complex64::new(1.0, 0.0);
        a[8] = Complex64::new(2.0, 0.0);
        let w = zheevd(&mut a, n, false).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-14);
        assert!((w[1] - 2.0).abs() < 1e-14);
        assert!((w[2] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn zheevr_window_agrees_with_zheevd() {
        // Hermitian 4x4 with a complex off-diagonal pair.
        let n = 4;
        let mut a = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            a[i * n + i] = Complex64::new(i as f64, 0.0);
        }
        a[1] = Complex64::new(0.3, 0.2); // (1,0) lower triangle
        a[n + 2] = Complex64::new(-0.1, 0.4); // (2,1)
        let mut b = a.clone();
        let all = zheevd(&mut b, n, false).unwrap();
        let (window, vecs) = zheevr_range(&mut a, n, f64::NEG_INFINITY, 1.5).unwrap();
        let expect: Vec<f64> = all.iter().copied().filter(|&x| x <= 1.5).collect();
        assert_eq!(window.len(), expect.len());
        for (a, b) in window.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert_eq!(vecs.len(), window.len() * n);
    }
}
