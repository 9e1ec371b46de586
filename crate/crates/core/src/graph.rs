//! Weighted undirected communication graphs and Laplacian spectral data.
//!
//! The algorithms in this crate consume a connected graph through its
//! Laplacian `L = D - A` and a handful of spectral quantities: the
//! algebraic connectivity `rho2` (smallest positive eigenvalue), the
//! spectral radius `rho`, and the orthogonal factorization
//! `L = R diag(lambda1) R^T` where the columns of `[r R]` are orthonormal
//! and `r = (1/sqrt(n)) 1_n` spans the null space.
//!
//! Stacked vectors in `R^{n p}` are always handled blockwise; Kronecker
//! products `L (x) I_p` are never materialized.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigh, Mat};

/// Off-diagonal tolerance for the Jacobi eigensolver.
const EIGEN_TOL: f64 = 1e-12;
/// Sweep budget before the eigensolver reports failure.
const EIGEN_MAX_SWEEPS: usize = 1000;
/// Eigenvalues at or below this are treated as numerically zero.
const NULL_EIGENVALUE: f64 = 1e-9;

/// Topology descriptor, also the `graph` section of the experiment config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    pub kind: TopologyKind,
    pub n: usize,
    /// Uniform edge weight for `ring`/`path`/`complete`.
    #[serde(default = "default_weight")]
    pub weight: f64,
    /// Edge list `[i, j, w]` with 1-based vertex ids, for `custom` only.
    #[serde(default)]
    pub edges: Vec<(usize, usize, f64)>,
}

fn default_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopologyKind {
    Ring,
    Path,
    Complete,
    Custom,
}

impl TopologySpec {
    pub fn ring(n: usize) -> Self {
        Self { kind: TopologyKind::Ring, n, weight: 1.0, edges: Vec::new() }
    }

    pub fn path(n: usize) -> Self {
        Self { kind: TopologyKind::Path, n, weight: 1.0, edges: Vec::new() }
    }

    pub fn complete(n: usize) -> Self {
        Self { kind: TopologyKind::Complete, n, weight: 1.0, edges: Vec::new() }
    }

    pub fn custom(n: usize, edges: Vec<(usize, usize, f64)>) -> Self {
        Self { kind: TopologyKind::Custom, n, weight: 1.0, edges }
    }
}

/// Weighted undirected graph with symmetric nonnegative adjacency and
/// zero diagonal. Connectivity is verified at construction; everything
/// downstream assumes it.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    weights: Mat,
    laplacian: Mat,
}

impl Graph {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Symmetric adjacency matrix.
    pub fn weights(&self) -> &Mat {
        &self.weights
    }

    /// Laplacian `L = D - A`.
    pub fn laplacian(&self) -> &Mat {
        &self.laplacian
    }

    /// Blockwise `(L (x) I_p) x` for a stacked vector of n blocks of
    /// dimension p.
    pub fn apply_laplacian(&self, x: &[f64], p: usize) -> Vec<f64> {
        apply_blockwise(&self.laplacian, x, p)
    }
}

/// `(M (x) I_p) x` for an n-by-n matrix applied to n stacked p-blocks,
/// without forming the Kronecker product. Zero entries are skipped, so
/// the cost is O(nnz(M) * p).
pub fn apply_blockwise(m: &Mat, x: &[f64], p: usize) -> Vec<f64> {
    let n = m.rows;
    assert_eq!(x.len(), n * p, "stacked vector length mismatch");
    let mut y = vec![0.0; n * p];
    for i in 0..n {
        let yi = i * p;
        for j in 0..n {
            let w = m[(i, j)];
            if w == 0.0 {
                continue;
            }
            let xj = j * p;
            for k in 0..p {
                y[yi + k] += w * x[xj + k];
            }
        }
    }
    y
}

/// Build a graph from a topology descriptor.
///
/// Errors with `InvalidWeight` on non-positive weights or self-loops,
/// `InvalidVertex` on out-of-range ids, and `DisconnectedGraph` when the
/// positive-weight edges do not connect all vertices.
pub fn build_graph(spec: &TopologySpec) -> Result<Graph> {
    if spec.n == 0 {
        return Err(Error::DimensionMismatch("graph needs at least one vertex".into()));
    }
    let n = spec.n;
    let mut weights = Mat::zeros(n, n);
    let add_edge = |i: usize, j: usize, w: f64, weights: &mut Mat| -> Result<()> {
        if i == j || w <= 0.0 {
            return Err(Error::InvalidWeight { i: i + 1, j: j + 1, w });
        }
        weights[(i, j)] += w;
        weights[(j, i)] += w;
        Ok(())
    };

    match spec.kind {
        TopologyKind::Ring => {
            if n >= 2 {
                // A 2-ring collapses to a single edge.
                let last = if n == 2 { 1 } else { n };
                for i in 0..last {
                    add_edge(i, (i + 1) % n, spec.weight, &mut weights)?;
                }
            }
        }
        TopologyKind::Path => {
            for i in 0..n.saturating_sub(1) {
                add_edge(i, i + 1, spec.weight, &mut weights)?;
            }
        }
        TopologyKind::Complete => {
            for i in 0..n {
                for j in (i + 1)..n {
                    add_edge(i, j, spec.weight, &mut weights)?;
                }
            }
        }
        TopologyKind::Custom => {
            for &(i, j, w) in &spec.edges {
                if i == 0 || i > n {
                    return Err(Error::InvalidVertex { v: i, n });
                }
                if j == 0 || j > n {
                    return Err(Error::InvalidVertex { v: j, n });
                }
                add_edge(i - 1, j - 1, w, &mut weights)?;
            }
        }
    }

    let mut laplacian = Mat::zeros(n, n);
    for i in 0..n {
        let mut deg = 0.0;
        for j in 0..n {
            deg += weights[(i, j)];
            laplacian[(i, j)] = -weights[(i, j)];
        }
        laplacian[(i, i)] = deg;
    }

    let g = Graph { n, weights, laplacian };
    if !check_connected(&g) {
        return Err(Error::DisconnectedGraph);
    }
    Ok(g)
}

/// Breadth-first reachability over positive-weight edges.
pub fn check_connected(g: &Graph) -> bool {
    let n = g.n;
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    seen[0] = true;
    queue.push_back(0);
    let mut count = 1;
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if !seen[j] && g.weights[(i, j)] > 0.0 {
                seen[j] = true;
                count += 1;
                queue.push_back(j);
            }
        }
    }
    count == n
}

/// Laplacian spectral data: eigenvalues, the orthogonal factor `[r R]`,
/// and the extremal positive eigenvalues.
#[derive(Debug, Clone)]
pub struct SpectralData {
    /// The Laplacian the decomposition was computed from.
    pub laplacian: Mat,
    /// Smallest positive eigenvalue (algebraic connectivity). Zero only
    /// for the single-vertex graph, which has no positive eigenvalues.
    pub rho2: f64,
    /// Largest eigenvalue.
    pub rho: f64,
    /// Unit null-space vector `(1/sqrt(n)) 1_n`.
    pub r: Vec<f64>,
    /// n-by-(n-1) matrix whose orthonormal columns span `1_n^perp`.
    pub r_basis: Mat,
    /// Positive eigenvalues `lambda_2 <= ... <= lambda_n`.
    pub lambda1: Vec<f64>,
}

/// Eigen-decompose the Laplacian of a connected graph.
///
/// Eigenvalues come out sorted ascending. A second numerically-zero
/// eigenvalue means the graph is disconnected and is reported as such
/// rather than folded into `rho2`.
pub fn spectral(g: &Graph) -> Result<SpectralData> {
    let n = g.n;
    let eig = jacobi_eigh(&g.laplacian, EIGEN_TOL, EIGEN_MAX_SWEEPS)?;

    if n >= 2 && eig.values[1] <= NULL_EIGENVALUE {
        return Err(Error::DisconnectedGraph);
    }

    let r = vec![1.0 / (n as f64).sqrt(); n];
    let mut r_basis = Mat::zeros(n, n.saturating_sub(1));
    for j in 1..n {
        for i in 0..n {
            r_basis[(i, j - 1)] = eig.vectors[(i, j)];
        }
    }
    let lambda1 = eig.values[1..].to_vec();
    let rho2 = lambda1.first().copied().unwrap_or(0.0);
    let rho = eig.values[n - 1].max(0.0);

    Ok(SpectralData { laplacian: g.laplacian.clone(), rho2, rho, r, r_basis, lambda1 })
}

impl SpectralData {
    pub fn n(&self) -> usize {
        self.r.len()
    }

    /// Blockwise `(L (x) I_p) x`.
    pub fn apply_laplacian(&self, x: &[f64], p: usize) -> Vec<f64> {
        apply_blockwise(&self.laplacian, x, p)
    }

    /// Blockwise application of the Laplacian pseudoinverse
    /// `R diag(lambda1)^{-1} R^T`, the metric weighting the dual part of
    /// the Lyapunov function.
    pub fn apply_laplacian_pinv(&self, x: &[f64], p: usize) -> Vec<f64> {
        let n = self.n();
        assert_eq!(x.len(), n * p, "stacked vector length mismatch");
        let m = self.lambda1.len();
        let mut y = vec![0.0; n * p];
        let mut coeffs = vec![0.0; m];
        for k in 0..p {
            for j in 0..m {
                let mut s = 0.0;
                for i in 0..n {
                    s += self.r_basis[(i, j)] * x[i * p + k];
                }
                coeffs[j] = s / self.lambda1[j];
            }
            for i in 0..n {
                let mut s = 0.0;
                for j in 0..m {
                    s += self.r_basis[(i, j)] * coeffs[j];
                }
                y[i * p + k] = s;
            }
        }
        y
    }

    /// Dense `R diag(lambda1)^{-1} R^T` (test/diagnostic use).
    pub fn laplacian_pinv_dense(&self) -> Mat {
        let n = self.n();
        let mut out = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..self.lambda1.len() {
                    s += self.r_basis[(i, k)] * self.r_basis[(j, k)] / self.lambda1[k];
                }
                out[(i, j)] = s;
            }
        }
        out
    }
}

/// Dense centering matrix `K_n = I - (1/n) 1 1^T` (test/diagnostic use).
pub fn centering_dense(n: usize) -> Mat {
    let mut k = Mat::zeros(n, n);
    let inv = 1.0 / n as f64;
    for i in 0..n {
        for j in 0..n {
            k[(i, j)] = if i == j { 1.0 - inv } else { -inv };
        }
    }
    k
}
