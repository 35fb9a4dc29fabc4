//! Small dense-matrix helpers.
//!
//! Everything here targets the low dimensions of this crate (ambient k <= 4
//! for level sets, modest k for affine maps), so the implementations favour
//! clarity over blocking or SIMD: row-major storage, LU with partial
//! pivoting, cyclic Jacobi for symmetric eigenproblems.

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds from a row-major slice of rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
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
        assert_eq!(self.cols, other.rows, "matmul shape");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(l, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec shape");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Maximum absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> f64 {
        assert_eq!(self.rows, self.cols, "det of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut sign = 1.0;
        let mut det = 1.0;
        for p in 0..n {
            let mut piv = p;
            for i in p + 1..n {
                if a[(i, p)].abs() > a[(piv, p)].abs() {
                    piv = i;
                }
            }
            if a[(piv, p)] == 0.0 {
                return 0.0;
            }
            if piv != p {
                a.swap_rows(piv, p);
                sign = -sign;
            }
            det *= a[(p, p)];
            for i in p + 1..n {
                let f = a[(i, p)] / a[(p, p)];
                for j in p..n {
                    let v = a[(p, j)];
                    a[(i, j)] -= f * v;
                }
            }
        }
        sign * det
    }

    /// Solves the square system `self * x = b` by LU with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(self.rows, self.cols, "solve needs a square matrix");
        assert_eq!(self.rows, b.len(), "rhs length");
        let n = self.rows;
        let mut a = self.clone();
        let mut x = b.to_vec();
        for p in 0..n {
            let mut piv = p;
            for i in p + 1..n {
                if a[(i, p)].abs() > a[(piv, p)].abs() {
                    piv = i;
                }
            }
            if a[(piv, p)].abs() < 1e-300 {
                return Err(Error::SingularSystem);
            }
            if piv != p {
                a.swap_rows(piv, p);
                x.swap(piv, p);
            }
            for i in p + 1..n {
                let f = a[(i, p)] / a[(p, p)];
                for j in p..n {
                    let v = a[(p, j)];
                    a[(i, j)] -= f * v;
                }
                x[i] -= f * x[p];
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= a[(i, j)] * x[j];
            }
            x[i] = s / a[(i, i)];
        }
        Ok(x)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    /// Extracts the square submatrix picked by `ri` (rows) and `ci` (columns).
    pub fn submatrix(&self, ri: &[usize], ci: &[usize]) -> Mat {
        let mut s = Mat::zeros(ri.len(), ci.len());
        for (a, &i) in ri.iter().enumerate() {
            for (b, &j) in ci.iter().enumerate() {
                s[(a, b)] = self[(i, j)];
            }
        }
        s
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

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Iterates over all `m`-element index subsets of `0..n` in lexicographic order.
pub fn for_each_subset(n: usize, m: usize, mut f: impl FnMut(&[usize])) {
    if m > n {
        return;
    }
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        f(&idx);
        // advance to the next combination
        let mut i = m;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - m {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Gram-Schmidt orthonormalisation of the given vectors; near-dependent
/// vectors are dropped.
pub fn orthonormalize(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            // re-orthogonalise once for stability
            for b in &basis {
                let c = dot(&w, b);
                axpy(&mut w, -c, b);
            }
        }
        let n = norm(&w);
        if n > 1e-12 * (1.0 + norm(v)) {
            for x in &mut w {
                *x /= n;
            }
            basis.push(w);
        }
    }
    basis
}

/// Particular solution and orthonormal null-space basis of `m z = r`
/// (n rows, k columns, n <= k) by Gauss-Jordan with full pivoting.
/// `None` when the system is inconsistent or m has rank below n.
pub fn affine_solution(m: &Mat, r: &[f64]) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = m.rows();
    let k = m.cols();
    let scale = m.max_abs();
    if scale <= 0.0 {
        return None;
    }
    let tol = 1e-10 * scale;
    let mut a = vec![vec![0.0; k + 1]; n];
    for i in 0..n {
        for j in 0..k {
            a[i][j] = m[(i, j)];
        }
        a[i][k] = r[i];
    }
    let mut pivot_col = vec![usize::MAX; n];
    let mut col_used = vec![false; k];
    for step in 0..n {
        let mut best = (step, 0usize, 0.0f64);
        for i in step..n {
            for (j, used) in col_used.iter().enumerate() {
                if !used && a[i][j].abs() > best.2 {
                    best = (i, j, a[i][j].abs());
                }
            }
        }
        if best.2 <= tol {
            return None; // rank < n: degenerate simplex, caller skips
        }
        a.swap(step, best.0);
        let pc = best.1;
        col_used[pc] = true;
        pivot_col[step] = pc;
        let pv = a[step][pc];
        for j in 0..=k {
            a[step][j] /= pv;
        }
        for i in 0..n {
            if i != step && a[i][pc] != 0.0 {
                let f = a[i][pc];
                for j in 0..=k {
                    a[i][j] -= f * a[step][j];
                }
            }
        }
    }
    let mut particular = vec![0.0; k];
    for step in 0..n {
        particular[pivot_col[step]] = a[step][k];
    }
    let mut raw_null = Vec::with_capacity(k - n);
    for (jf, used) in col_used.iter().enumerate() {
        if *used {
            continue;
        }
        let mut v = vec![0.0; k];
        v[jf] = 1.0;
        for step in 0..n {
            v[pivot_col[step]] = -a[step][jf];
        }
        raw_null.push(v);
    }
    let basis = orthonormalize(&raw_null);
    if basis.len() != k - n {
        return None;
    }
    Some((particular, basis))
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns `(q, lambda)` with `a = q * diag(lambda) * q^T`, eigenvalues sorted
/// nonincreasing and eigenvectors in the corresponding columns of `q`.
pub fn jacobi_eigen(a: &Mat) -> (Mat, Vec<f64>) {
    assert_eq!(a.rows(), a.cols(), "jacobi_eigen needs a square matrix");
    let n = a.rows();
    let mut a = a.clone();
    let mut q = Mat::identity(n);
    let scale = a.max_abs().max(1e-300);
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for p in 0..n {
            for r in p + 1..n {
                off = off.max(a[(p, r)].abs());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for r in p + 1..n {
                let apq = a[(p, r)];
                if apq.abs() <= 1e-18 * scale {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(r, r)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for j in 0..n {
                    let ap = a[(p, j)];
                    let aq = a[(r, j)];
                    a[(p, j)] = c * ap - s * aq;
                    a[(r, j)] = s * ap + c * aq;
                }
                for i in 0..n {
                    let ap = a[(i, p)];
                    let aq = a[(i, r)];
                    a[(i, p)] = c * ap - s * aq;
                    a[(i, r)] = s * ap + c * aq;
                }
                for i in 0..n {
                    let qp = q[(i, p)];
                    let qr = q[(i, r)];
                    q[(i, p)] = c * qp - s * qr;
                    q[(i, r)] = s * qp + c * qr;
                }
            }
        }
    }
    let mut lambda: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    // sort eigenpairs by nonincreasing eigenvalue, stable under ties
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| lambda[j].partial_cmp(&lambda[i]).unwrap().then(i.cmp(&j)));
    let mut qs = Mat::zeros(n, n);
    let mut ls = vec![0.0; n];
    for (newj, &oldj) in order.iter().enumerate() {
        ls[newj] = lambda[oldj];
        for i in 0..n {
            qs[(i, newj)] = q[(i, oldj)];
        }
    }
    lambda = ls;
    (qs, lambda)
}

/// Singular values by one-sided Jacobi (Hestenes) rotations, sorted
/// nonincreasing. Orthogonalising columns directly keeps full relative
/// accuracy on tiny singular values, where the Gram-matrix route would lose
/// half the digits.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    // work on the orientation with fewer columns
    let mut w = if a.rows() >= a.cols() { a.clone() } else { a.transpose() };
    let (n, k) = (w.rows(), w.cols());
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for i in 0..n {
                    app += w[(i, p)] * w[(i, p)];
                    aqq += w[(i, q)] * w[(i, q)];
                    apq += w[(i, p)] * w[(i, q)];
                }
                if apq.abs() <= 1e-16 * (app * aqq).sqrt().max(1e-300) {
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let vp = w[(i, p)];
                    let vq = w[(i, q)];
                    w[(i, p)] = c * vp - s * vq;
                    w[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s: Vec<f64> = (0..k)
        .map(|j| (0..n).map(|i| w[(i, j)] * w[(i, j)]).sum::<f64>().sqrt())
        .collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}
