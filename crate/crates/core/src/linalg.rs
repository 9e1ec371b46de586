//! Dense matrix/vector helpers and a cyclic Jacobi eigensolver.
//!
//! Everything here works at desk scale (n up to a few hundred): matrices
//! are row-major `Vec<f64>` and the eigensolver is plain cyclic Jacobi,
//! which is deterministic and accurate to machine precision for the
//! symmetric Laplacians this crate produces.

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// y = A x for a dense vector x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec dimension mismatch");
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut s = 0.0;
            for (a, b) in row.iter().zip(x) {
                s += a * b;
            }
            y[i] = s;
        }
        y
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest |entry| of A - B.
    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigen-decomposition of a symmetric matrix: ascending eigenvalues and
/// the matching orthonormal eigenvectors (columns of `vectors`).
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

/// Off-diagonal Frobenius norm used as the Jacobi stopping criterion.
fn off_diagonal_norm(a: &Mat) -> f64 {
    let n = a.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi sweeps for a symmetric matrix.
///
/// Stops when the off-diagonal norm falls below `tol` relative to the
/// Frobenius norm of the input; fails after `max_sweeps` sweeps.
/// Deterministic: identical input bits give identical output bits.
pub fn jacobi_eigh(a: &Mat, tol: f64, max_sweeps: usize) -> Result<SymmetricEigen> {
    assert_eq!(a.rows, a.cols, "eigensolver requires a square matrix");
    let n = a.rows;
    let mut m = a.clone();
    let mut v = Mat::identity(n);
    let scale = a.frobenius_norm().max(1.0);
    let target = tol * scale;

    let mut sweeps = 0;
    while off_diagonal_norm(&m) > target {
        if sweeps >= max_sweeps {
            return Err(Error::EigenFailure { sweeps, off: off_diagonal_norm(&m) });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= f64::EPSILON * scale {
                    continue;
                }
                // Stable rotation: t = sign(theta) / (|theta| + sqrt(theta^2 + 1)).
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
    }

    // Sort ascending, carrying eigenvector columns along; fix each
    // column's sign so the largest-magnitude component is positive.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap());
    let mut values = Vec::with_capacity(n);
    let mut vectors = Mat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(m[(src, src)]);
        let mut pivot = 0.0f64;
        for k in 0..n {
            if v[(k, src)].abs() > pivot.abs() {
                pivot = v[(k, src)];
            }
        }
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for k in 0..n {
            vectors[(k, dst)] = sign * v[(k, src)];
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

// ---------------------------------------------------------------------------
// Vector helpers
// ---------------------------------------------------------------------------

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // [[2,-1,0],[-1,2,-1],[0,-1,2]] has eigenvalues 2 - sqrt(2), 2, 2 + sqrt(2).
        let a = Mat::from_rows(&[&[2.0, -1.0, 0.0], &[-1.0, 2.0, -1.0], &[0.0, -1.0, 2.0]]);
        let e = jacobi_eigh(&a, 1e-12, 1000).unwrap();
        let s = std::f64::consts::SQRT_2;
        assert_abs_diff_eq!(e.values[0], 2.0 - s, epsilon = 1e-12);
        assert_abs_diff_eq!(e.values[1], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.values[2], 2.0 + s, epsilon = 1e-12);
    }

    #[test]
    fn jacobi_vectors_orthonormal_and_reconstruct() {
        let a = Mat::from_rows(&[
            &[4.0, 1.0, 0.5, 0.0],
            &[1.0, 3.0, 0.0, 0.2],
            &[0.5, 0.0, 2.0, 1.0],
            &[0.0, 0.2, 1.0, 5.0],
        ]);
        let e = jacobi_eigh(&a, 1e-12, 1000).unwrap();
        let q = &e.vectors;
        let qtq = q.transpose().matmul(q);
        assert!(qtq.max_abs_diff(&Mat::identity(4)) < 1e-12);

        let mut lam = Mat::zeros(4, 4);
        for i in 0..4 {
            lam[(i, i)] = e.values[i];
        }
        let recon = q.matmul(&lam).matmul(&q.transpose());
        assert!(recon.max_abs_diff(&a) < 1e-11);
    }

    #[test]
    fn jacobi_handles_diagonal_input() {
        let mut a = Mat::zeros(3, 3);
        a[(0, 0)] = 3.0;
        a[(1, 1)] = 1.0;
        a[(2, 2)] = 2.0;
        let e = jacobi_eigh(&a, 1e-12, 1000).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
    }
}
