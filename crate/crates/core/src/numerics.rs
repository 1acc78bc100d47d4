//! Self-contained dense linear algebra: cyclic Jacobi eigensolver for
//! symmetric matrices, Cholesky log-determinant, LU solve/determinant, and
//! PCA built on top of the eigensolver.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

const JACOBI_THRESHOLD: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a symmetric matrix.
///
/// `values` are sorted descending; `vectors` has the matching eigenvectors as
/// columns (`vectors[i][j]` = component i of eigenvector j).
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEig {
    pub fn eigenvector(&self, j: usize) -> Vec<f64> {
        (0..self.vectors.rows()).map(|i| self.vectors.get(i, j)).collect()
    }
}

/// Cyclic Jacobi eigensolver.
///
/// Sweeps stop once the largest off-diagonal magnitude drops below 1e-12, or
/// fail with `NoConvergence` after 100 sweeps. Ordering is deterministic:
/// eigenvalues descending, ties broken by the original column index of the
/// accumulated rotation; each eigenvector is sign-fixed so its
/// largest-magnitude component is positive (first such index on ties).
pub fn sym_eig(m: &Matrix) -> Result<SymEig> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "sym_eig expects square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("sym_eig input".into()));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (m.get(i, j) - m.get(j, i)).abs() > 1e-9 * (1.0 + m.get(i, j).abs()) {
                return Err(Error::NotSymmetric);
            }
        }
    }
    let mut a = m.clone();
    let mut v = Matrix::identity(n);
    if n <= 1 {
        return Ok(SymEig {
            values: (0..n).map(|i| a.get(i, i)).collect(),
            vectors: v,
        });
    }

    // convergence is judged relative to the matrix scale so that large-
    // magnitude inputs terminate at the same relative accuracy
    let scale = {
        let mut fro = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                fro += a.get(i, j) * a.get(i, j);
            }
        }
        fro.sqrt().max(1.0)
    };
    let threshold = JACOBI_THRESHOLD * scale;

    let mut converged = false;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a.get(p, q).abs());
            }
        }
        if off < threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq.abs() < threshold {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                // stable tan of the smaller rotation angle
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    if !converged {
        // final check: the last sweep may have finished the job
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a.get(p, q).abs());
            }
        }
        if off >= threshold {
            return Err(Error::NoConvergence);
        }
    }

    // sort descending, ties by original column index (stable sort keeps it)
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).partial_cmp(&a.get(i, i)).unwrap());

    let mut values = Vec::with_capacity(n);
    let mut vectors = Matrix::zeros(n, n);
    for (out_col, &src_col) in order.iter().enumerate() {
        values.push(a.get(src_col, src_col));
        // sign convention: largest-magnitude component positive
        let mut best = 0usize;
        let mut best_abs = -1.0f64;
        for i in 0..n {
            let x = v.get(i, src_col).abs();
            if x > best_abs + 1e-15 {
                best_abs = x;
                best = i;
            }
        }
        let flip = if v.get(best, src_col) < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors.set(i, out_col, flip * v.get(i, src_col));
        }
    }
    Ok(SymEig { values, vectors })
}

/// log det of a symmetric positive-definite matrix via Cholesky.
pub fn logdet_spd(m: &Matrix) -> Result<f64> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "logdet_spd expects square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let mut l = Matrix::zeros(n, n);
    let mut logdet = 0.0;
    for i in 0..n {
        for j in 0..=i {
            let mut sum = m.get(i, j);
            for k in 0..j {
                sum -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return Err(Error::NotPositiveDefinite);
                }
                let d = sum.sqrt();
                l.set(i, j, d);
                logdet += 2.0 * d.ln();
            } else {
                l.set(i, j, sum / l.get(j, j));
            }
        }
    }
    Ok(logdet)
}

/// LU decomposition with partial pivoting; returns (LU packed, pivots, parity).
fn lu_decompose(m: &Matrix) -> Result<(Matrix, Vec<usize>, f64)> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::DimensionMismatch("lu expects square matrix".into()));
    }
    let mut a = m.clone();
    let mut piv: Vec<usize> = (0..n).collect();
    let mut parity = 1.0;
    for k in 0..n {
        let mut p = k;
        let mut max = a.get(k, k).abs();
        for i in (k + 1)..n {
            let x = a.get(i, k).abs();
            if x > max {
                max = x;
                p = i;
            }
        }
        if max == 0.0 {
            // singular: leave pivot zero, determinant will come out 0
            continue;
        }
        if p != k {
            for j in 0..n {
                let tmp = a.get(k, j);
                a.set(k, j, a.get(p, j));
                a.set(p, j, tmp);
            }
            piv.swap(k, p);
            parity = -parity;
        }
        let pivot = a.get(k, k);
        for i in (k + 1)..n {
            let f = a.get(i, k) / pivot;
            a.set(i, k, f);
            for j in (k + 1)..n {
                let v = a.get(i, j) - f * a.get(k, j);
                a.set(i, j, v);
            }
        }
    }
    Ok((a, piv, parity))
}

/// Determinant via LU with partial pivoting.
pub fn det(m: &Matrix) -> Result<f64> {
    let (lu, _, parity) = lu_decompose(m)?;
    let mut d = parity;
    for i in 0..lu.rows() {
        d *= lu.get(i, i);
    }
    Ok(d)
}

/// Solve A x = b for square A via LU with partial pivoting.
pub fn solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    if b.len() != n {
        return Err(Error::DimensionMismatch("solve rhs length".into()));
    }
    let (lu, piv, _) = lu_decompose(a)?;
    let mut x: Vec<f64> = piv.iter().map(|&p| b[p]).collect();
    for i in 1..n {
        for k in 0..i {
            x[i] -= lu.get(i, k) * x[k];
        }
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            x[i] -= lu.get(i, k) * x[k];
        }
        let d = lu.get(i, i);
        if d == 0.0 {
            return Err(Error::NotPositiveDefinite);
        }
        x[i] /= d;
    }
    Ok(x)
}

/// PCA by eigendecomposition of the covariance of the centered rows.
///
/// Returns the rows projected onto the top `dims` principal directions
/// (descending eigenvalue order, deterministic sign per `sym_eig`).
pub fn pca_fit_transform(points: &Matrix, dims: usize) -> Result<Matrix> {
    let n = points.rows();
    let d = points.cols();
    if dims > d {
        return Err(Error::Dimension(format!(
            "pca dims {} exceeds feature dimension {}",
            dims, d
        )));
    }
    if n == 0 {
        return Ok(Matrix::zeros(0, dims));
    }
    let mut mean = vec![0.0; d];
    for row in points.row_iter() {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut centered = points.clone();
    for i in 0..n {
        let row = centered.row_mut(i);
        for (x, m) in row.iter_mut().zip(&mean) {
            *x -= m;
        }
    }
    let cov = centered.scaled_gram();
    let eig = sym_eig(&cov)?;
    let mut out = Matrix::zeros(n, dims);
    for i in 0..n {
        let row = centered.row(i);
        for j in 0..dims {
            let mut s = 0.0;
            for k in 0..d {
                s += row[k] * eig.vectors.get(k, j);
            }
            out.set(i, j, s);
        }
    }
    Ok(out)
}
