//! Small dense linear algebra: symmetric eigensolve (cyclic Jacobi) and a
//! tridiagonal (Thomas) solver. The matrices here are tiny (d x d with d the
//! number of PDE components) or tridiagonal, so nothing fancier is needed.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Symmetric matrix stored row-major, dimension `n`.
#[derive(Debug, Clone)]
pub struct SymMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(n: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        SymMatrix { n, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Largest asymmetry `|a_ij - a_ji|` over the matrix.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d = math::abs(self.get(i, j) - self.get(j, i));
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            out[i] = math::dot(&self.data[i * self.n..(i + 1) * self.n], v);
        }
        out
    }
}

/// Eigendecomposition of a symmetric matrix, eigenvalues ascending.
pub struct EigenSym {
    pub values: Vec<f64>,
    /// Column `k` (i.e. `vectors[k]`) is the normalized eigenvector of
    /// `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

/// Cyclic Jacobi iteration. Always converges for symmetric input.
pub fn eigen_sym(a: &SymMatrix) -> EigenSym {
    let n = a.n;
    let mut m = a.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let idx = |i: usize, j: usize| i * n + j;
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[idx(i, j)] * m[idx(i, j)];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[idx(p, q)];
                if math::abs(apq) < 1e-300 {
                    continue;
                }
                let app = m[idx(p, p)];
                let aqq = m[idx(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + math::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + math::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let akp = m[idx(k, p)];
                    let akq = m[idx(k, q)];
                    m[idx(k, p)] = c * akp - s * akq;
                    m[idx(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[idx(p, k)];
                    let aqk = m[idx(q, k)];
                    m[idx(p, k)] = c * apk - s * aqk;
                    m[idx(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[idx(k, p)];
                    let vkq = v[idx(k, q)];
                    v[idx(k, p)] = c * vkp - s * vkq;
                    v[idx(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|k| {
            let val = m[idx(k, k)];
            let vec_k: Vec<f64> = (0..n).map(|i| v[idx(i, k)]).collect();
            (val, vec_k)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    EigenSym {
        values: pairs.iter().map(|p| p.0).collect(),
        vectors: pairs.into_iter().map(|p| p.1).collect(),
    }
}

/// Solve a dense linear system by Gaussian elimination with partial pivoting.
/// Used only for tiny Newton systems.
pub fn solve_dense(a: &SymMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.n;
    let mut m = a.data.clone();
    let mut rhs = b.to_vec();
    let idx = |i: usize, j: usize| i * n + j;
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if math::abs(m[idx(r, col)]) > math::abs(m[idx(piv, col)]) {
                piv = r;
            }
        }
        if math::abs(m[idx(piv, col)]) < 1e-300 {
            return Err(Error::SingularMatrix(alloc::format!(
                "pivot {} vanished",
                col
            )));
        }
        if piv != col {
            for k in 0..n {
                m.swap(idx(col, k), idx(piv, k));
            }
            rhs.swap(col, piv);
        }
        for r in (col + 1)..n {
            let f = m[idx(r, col)] / m[idx(col, col)];
            for k in col..n {
                m[idx(r, k)] -= f * m[idx(col, k)];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for k in (i + 1)..n {
            s -= m[idx(i, k)] * x[k];
        }
        x[i] = s / m[idx(i, i)];
    }
    Ok(x)
}

/// Thomas algorithm for a tridiagonal system. `lower`, `diag`, `upper` are
/// the three bands (`lower[0]` and `upper[n-1]` unused). Overwrites nothing;
/// returns the solution.
pub fn solve_tridiag(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i] * c[i - 1];
        c[i] = if i < n - 1 { upper[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}
