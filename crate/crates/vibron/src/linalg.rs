//! Small dense complex linear algebra: thin QR, Hermitian eigensolve,
//! Gram-matrix SVD and pivoted LU.
//!
//! Everything here is pure Rust and single-threaded, so results are
//! bit-reproducible across runs and worker counts. Matrix sizes in this
//! crate are bounded by the MPS bond dimension and the dense-oracle cap,
//! which keeps O(n³) sweeps affordable.

use ndarray::{s, Array1, Array2};
use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("singular matrix in LU solve (pivot {0:.3e})")]
    Singular(f64),
    #[error("jacobi eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),
}

pub fn dagger(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

/// Frobenius norm.
pub fn fro_norm(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Thin QR of an m×n matrix with m ≥ n, by twice-iterated modified
/// Gram-Schmidt. Columns that vanish under orthogonalization are replaced
/// by deterministically chosen unit vectors (their R entries stay zero), so
/// Q always has exactly orthonormal columns.
pub fn thin_qr(a: &Array2<C64>) -> (Array2<C64>, Array2<C64>) {
    let (m, n) = a.dim();
    assert!(m >= n, "thin_qr expects a tall matrix, got {m}x{n}");
    let mut q = a.clone();
    let mut r = Array2::<C64>::zeros((n, n));
    let scale = fro_norm(a).max(1.0);
    for j in 0..n {
        // two MGS passes for orthogonality near machine precision
        for _pass in 0..2 {
            for i in 0..j {
                let qi = q.column(i);
                let qj = q.column(j);
                let proj: C64 = qi.iter().zip(qj.iter()).map(|(x, y)| x.conj() * y).sum();
                let (qi, mut qj) = q.multi_slice_mut((s![.., i], s![.., j]));
                qj.zip_mut_with(&qi, |y, x| *y -= proj * x);
                r[(i, j)] += proj;
            }
        }
        let norm = q.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-14 * scale {
            r[(j, j)] = C64::new(norm, 0.0);
            q.column_mut(j).mapv_inplace(|z| z / norm);
        } else {
            // dead direction: r[(j,j)] = 0, fill column with a unit vector
            // orthogonal to the previous ones
            r[(j, j)] = C64::new(0.0, 0.0);
            let mut filled = false;
            for k in 0..m {
                let mut e = Array1::<C64>::zeros(m);
                e[k] = C64::new(1.0, 0.0);
                for i in 0..j {
                    let proj: C64 = q.column(i).iter().zip(e.iter()).map(|(x, y)| x.conj() * y).sum();
                    let qi = q.column(i).to_owned();
                    e.zip_mut_with(&qi, |y, x| *y -= proj * x);
                }
                let en = e.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if en > 0.5 {
                    q.column_mut(j).assign(&(e / en));
                    filled = true;
                    break;
                }
            }
            assert!(filled, "failed to complete orthonormal basis");
        }
    }
    (q, r)
}

/// Thin LQ: a = L·Q with Q having orthonormal rows; for wide matrices.
pub fn thin_lq(a: &Array2<C64>) -> (Array2<C64>, Array2<C64>) {
    let (q, r) = thin_qr(&dagger(a));
    (dagger(&r), dagger(&q))
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns eigenvalues ascending and the matching eigenvector
/// columns.
pub fn eigh(h: &Array2<C64>) -> Result<(Vec<f64>, Array2<C64>), LinalgError> {
    let n = h.nrows();
    assert_eq!(n, h.ncols(), "eigh needs a square matrix");
    let mut a = h.clone();
    let mut v = Array2::<C64>::eye(n);
    if n <= 1 {
        return Ok((a.iter().map(|z| z.re).collect(), v));
    }
    let norm2 = fro_norm(&a).powi(2);
    let tol = (norm2 * 1e-30).max(f64::MIN_POSITIVE);
    let max_sweeps = 60;
    for sweep in 0..max_sweeps {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off <= tol {
            // sort ascending
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
            let vals: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
            let mut vec_sorted = Array2::<C64>::zeros((n, n));
            for (col, &i) in order.iter().enumerate() {
                vec_sorted.column_mut(col).assign(&v.column(i));
            }
            return Ok((vals, vec_sorted));
        }
        let _ = sweep;
        for p in 0..n {
            for q in (p + 1)..n {
                let hpq = a[(p, q)];
                let absb = hpq.norm();
                if absb <= 1e-300 {
                    continue;
                }
                let phi = hpq.arg();
                let eip = C64::from_polar(1.0, phi);
                let eim = eip.conj();
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * absb);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // columns: col_p' = c col_p − s e^{−iφ} col_q ; col_q' = s col_p + c e^{−iφ} col_q
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)] * eim;
                    a[(i, p)] = c * aip - s * aiq;
                    a[(i, q)] = s * aip + c * aiq;
                }
                // rows: row_p' = c row_p − s e^{iφ} row_q ; row_q' = s row_p + c e^{iφ} row_q
                for i in 0..n {
                    let api = a[(p, i)];
                    let aqi = a[(q, i)] * eip;
                    a[(p, i)] = c * api - s * aqi;
                    a[(q, i)] = s * api + c * aqi;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)] * eim;
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
    }
    Err(LinalgError::NoConvergence(max_sweeps))
}

/// Economy SVD a = U·diag(s)·V† computed from the Gram matrix of the
/// smaller side. Returns singular values in descending order; directions
/// with σ below 1e-15·σ_max are dropped (rank-revealing behavior). The
/// squared singular values are exact eigenvalues of the Gram matrix, which
/// is what bond-truncation weights need.
pub fn gram_svd(a: &Array2<C64>) -> Result<(Array2<C64>, Vec<f64>, Array2<C64>), LinalgError> {
    let (m, n) = a.dim();
    if m >= n {
        let g = dagger(a).dot(a); // n×n
        let (vals, vecs) = eigh(&g)?;
        let smax2 = vals.last().copied().unwrap_or(0.0).max(0.0);
        let cut = smax2.sqrt() * 1e-15;
        let mut sv = Vec::new();
        let mut keep = Vec::new();
        for (i, &lam) in vals.iter().enumerate().rev() {
            let sigma = lam.max(0.0).sqrt();
            if sigma > cut && sigma > 0.0 {
                sv.push(sigma);
                keep.push(i);
            }
        }
        let k = sv.len();
        let mut u = Array2::<C64>::zeros((m, k));
        let mut vh = Array2::<C64>::zeros((k, n));
        for (col, (&idx, &sigma)) in keep.iter().zip(sv.iter()).enumerate() {
            let v_col = vecs.column(idx);
            let u_col = a.dot(&v_col);
            u.column_mut(col).assign(&(&u_col / C64::new(sigma, 0.0)));
            for (j, x) in v_col.iter().enumerate() {
                vh[(col, j)] = x.conj();
            }
        }
        Ok((u, sv, vh))
    } else {
        let (v, sv, uh) = gram_svd(&dagger(a))?;
        Ok((dagger(&uh), sv, dagger(&v)))
    }
}

/// Solve a·x = b for dense complex a via partially pivoted LU. `b` may have
/// several right-hand-side columns.
pub fn lu_solve(a: &Array2<C64>, b: &Array2<C64>) -> Result<Array2<C64>, LinalgError> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    assert_eq!(n, b.nrows());
    let mut lu = a.clone();
    let mut x = b.clone();
    let mut piv: Vec<usize> = (0..n).collect();
    for k in 0..n {
        // pivot
        let mut pmax = lu[(k, k)].norm();
        let mut prow = k;
        for i in (k + 1)..n {
            let v = lu[(i, k)].norm();
            if v > pmax {
                pmax = v;
                prow = i;
            }
        }
        if pmax < 1e-300 {
            return Err(LinalgError::Singular(pmax));
        }
        if prow != k {
            for j in 0..n {
                lu.swap((k, j), (prow, j));
            }
            piv.swap(k, prow);
            for j in 0..x.ncols() {
                x.swap((k, j), (prow, j));
            }
        }
        let pivot = lu[(k, k)];
        for i in (k + 1)..n {
            let f = lu[(i, k)] / pivot;
            lu[(i, k)] = f;
            for j in (k + 1)..n {
                let v = lu[(k, j)];
                lu[(i, j)] -= f * v;
            }
        }
    }
    // forward substitution (L has unit diagonal)
    for j in 0..x.ncols() {
        for i in 1..n {
            let mut acc = x[(i, j)];
            for k in 0..i {
                acc -= lu[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[(i, j)];
            for k in (i + 1)..n {
                acc -= lu[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = acc / lu[(i, i)];
        }
    }
    Ok(x)
}
