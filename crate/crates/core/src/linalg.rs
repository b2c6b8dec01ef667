//! Small dense linear algebra: row-major square matrices, Cholesky
//! factorization with triangular solves, and a pivoted Gaussian solve for
//! least-squares normal equations.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn add_diagonal(&mut self, v: f64) {
        for i in 0..self.n {
            self.data[i * self.n + i] += v;
        }
    }
}

/// Dot product with four partial sums (fixed order, so deterministic).
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Fails with `None` when `a` is not numerically positive definite.
    pub fn factor(a: &Matrix) -> Option<Self> {
        let n = a.dim();
        let mut l = Matrix::zeros(n);
        for j in 0..n {
            let lj = &l.data[j * n..j * n + j];
            let d = a.get(j, j) - dot(lj, lj);
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let djj = d.sqrt();
            l.data[j * n + j] = djj;
            for i in (j + 1)..n {
                let (head, tail) = l.data.split_at(i * n);
                l.data[i * n + j] = (a.get(i, j) - dot(&tail[..j], &head[j * n..j * n + j])) / djj;
            }
        }
        Some(Cholesky { l })
    }

    pub fn dim(&self) -> usize {
        self.l.dim()
    }

    pub fn lower(&self) -> &Matrix {
        &self.l
    }

    /// Solves `L x = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.n;
        let mut x = b.to_vec();
        for i in 0..n {
            let row = self.l.row(i);
            x[i] = (x[i] - dot(&row[..i], &x[..i])) / row[i];
        }
        x
    }

    /// Solves `Lᵀ x = b`.
    pub fn solve_upper(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.n;
        let mut x = b.to_vec();
        // column sweep over rows of L, which are columns of Lᵀ
        for i in (0..n).rev() {
            let row = self.l.row(i);
            x[i] /= row[i];
            let xi = x[i];
            for (xk, lik) in x[..i].iter_mut().zip(&row[..i]) {
                *xk -= lik * xi;
            }
        }
        x
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// `ln det A = 2 Σ ln L_ii`.
    pub fn log_det(&self) -> f64 {
        (0..self.l.n).map(|i| self.l.get(i, i).ln()).sum::<f64>() * 2.0
    }

    /// Extends the factor of `A` to that of `[[A, c], [cᵀ, d]]`.
    pub fn append(&self, c: &[f64], d: f64) -> Option<Cholesky> {
        let n = self.l.n;
        let l_row = self.solve_lower(c);
        let rem = d - dot(&l_row, &l_row);
        if !(rem > 0.0) || !rem.is_finite() {
            return None;
        }
        let m = n + 1;
        let mut data = vec![0.0; m * m];
        for i in 0..n {
            data[i * m..i * m + n].copy_from_slice(self.l.row(i));
        }
        data[n * m..n * m + n].copy_from_slice(&l_row);
        data[n * m + n] = rem.sqrt();
        Some(Cholesky { l: Matrix { n: m, data } })
    }
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve_dense(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::Dimension(format!("rhs length {} for {n}x{n} system", b.len())));
    }
    let mut m = a.data.clone();
    let mut x = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .expect("non-empty range");
        if m[pivot * n + col].abs() < 1e-300 {
            return Err(Error::Dimension("singular system".into()));
        }
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            x.swap(col, pivot);
        }
        for r in (col + 1)..n {
            let f = m[r * n + col] / m[col * n + col];
            if f != 0.0 {
                for k in col..n {
                    m[r * n + k] -= f * m[col * n + k];
                }
                x[r] -= f * x[col];
            }
        }
    }
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| m[i * n + k] * x[k]).sum();
        x[i] = (x[i] - s) / m[i * n + i];
    }
    Ok(x)
}
