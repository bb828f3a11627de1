//! Small dense linear algebra: a row-major matrix, Householder QR,
//! modified Gram-Schmidt, and a symmetric eigensolver (Householder
//! tridiagonalization followed by implicit-shift QL).

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use libm::{fabs, sqrt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major `f64` matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Matrix { rows, cols, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows, "ragged column set");
            for (i, &x) in c.iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        m
    }

    /// Diagonal matrix.
    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let o_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in o_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec shape mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| if fabs(x) > m { fabs(x) } else { m })
    }

    pub fn frobenius_norm(&self) -> f64 {
        sqrt(self.data.iter().map(|x| x * x).sum())
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise asymmetry `|m_ij - m_ji|`.
    pub fn asymmetry(&self) -> f64 {
        assert!(self.is_square());
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max(fabs(self[(i, j)] - self[(j, i)]));
            }
        }
        worst
    }

    /// Replaces the matrix with `(M + Mᵀ)/2`.
    pub fn symmetrize(&mut self) {
        assert!(self.is_square());
        let n = self.rows;
        for i in 0..n {
            for j in 0..i {
                let avg = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = avg;
                self[(j, i)] = avg;
            }
        }
    }

    /// `‖A‖ = σ_max(A)`: top eigenvector of `AᵀA`, polished by a few power
    /// steps, then `‖Av‖`. Measuring `‖Av‖` directly keeps tiny norms
    /// accurate where `sqrt(λ_max)` would sit at the rounding floor.
    pub fn operator_norm(&self) -> f64 {
        let wide = self.rows < self.cols;
        let a = if wide { self.transpose() } else { self.clone() };
        if a.cols == 0 || a.max_abs() == 0.0 {
            return 0.0;
        }
        let at = a.transpose();
        let mut gram = at.matmul(&a);
        gram.symmetrize();
        let eig = symmetric_eigen(&gram).expect("Gram matrix is symmetric");
        let vecs = eig.vectors.expect("eigenvectors requested");
        let mut v = vecs.column(a.cols - 1);
        for _ in 0..3 {
            let w = at.matvec(&a.matvec(&v));
            let nw = norm(&w);
            if nw == 0.0 {
                break;
            }
            v = w.into_iter().map(|x| x / nw).collect();
        }
        norm(&a.matvec(&v))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    sqrt(dot(a, a))
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Householder QR of a square or tall matrix. Returns the explicit `Q`
/// (rows × rows) and the upper-triangular `R` (rows × cols).
pub fn householder_qr(a: &Matrix) -> (Matrix, Matrix) {
    let (m, n) = (a.rows(), a.cols());
    let mut r = a.clone();
    let mut reflectors: Vec<(usize, Vec<f64>)> = Vec::new();
    for k in 0..n.min(m.saturating_sub(1)) {
        let x: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
        let alpha = norm(&x);
        if alpha == 0.0 {
            continue;
        }
        let sign = if x[0] >= 0.0 { 1.0 } else { -1.0 };
        let mut v = x;
        v[0] += sign * alpha;
        let vnorm = norm(&v);
        for vi in v.iter_mut() {
            *vi /= vnorm;
        }
        for j in k..n {
            let s: f64 = (k..m).map(|i| v[i - k] * r[(i, j)]).sum();
            for i in k..m {
                r[(i, j)] -= 2.0 * v[i - k] * s;
            }
        }
        reflectors.push((k, v));
    }
    let mut q = Matrix::identity(m);
    for (k, v) in reflectors.iter().rev() {
        for j in 0..m {
            let s: f64 = (*k..m).map(|i| v[i - k] * q[(i, j)]).sum();
            for i in *k..m {
                q[(i, j)] -= 2.0 * v[i - k] * s;
            }
        }
    }
    for i in 0..m {
        for j in 0..i.min(n) {
            r[(i, j)] = 0.0;
        }
    }
    (q, r)
}

/// Modified Gram-Schmidt over `vectors` in order. Vectors whose residual
/// norm falls below `drop_tol` are discarded, so the result is an
/// orthonormal basis of their span.
pub fn gram_schmidt(vectors: &[Vec<f64>], drop_tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                axpy(-c, b, &mut w);
            }
        }
        let nw = norm(&w);
        if nw > drop_tol {
            for x in w.iter_mut() {
                *x /= nw;
            }
            basis.push(w);
        }
    }
    basis
}

/// Eigen-decomposition of a symmetric matrix: ascending eigenvalues and
/// (optionally) the matching orthonormal eigenvectors as matrix columns.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Option<Matrix>,
}

fn check_symmetric(m: &Matrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSymmetric { asymmetry: f64::INFINITY });
    }
    let scale = m.max_abs().max(1.0);
    let asym = m.asymmetry();
    if asym > 1e-10 * scale {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(())
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    check_symmetric(m)?;
    Ok(symmetric_eigenvalues_unchecked(m.clone()))
}

pub(crate) fn symmetric_eigenvalues_unchecked(m: Matrix) -> Vec<f64> {
    let n = m.rows();
    let (mut d, mut e, _) = tridiagonalize(m, false);
    tql(&mut d, &mut e, None).expect("QL iteration failed to converge");
    debug_assert_eq!(d.len(), n);
    d
}

/// Full eigen-decomposition of a symmetric matrix.
pub fn symmetric_eigen(m: &Matrix) -> Result<SymmetricEigen> {
    check_symmetric(m)?;
    let n = m.rows();
    let (mut d, mut e, z) = tridiagonalize(m.clone(), true);
    let mut z = z.unwrap_or_else(|| Matrix::identity(n));
    tql(&mut d, &mut e, Some(&mut z))?;
    Ok(SymmetricEigen { values: d, vectors: Some(z) })
}

/// Householder reduction to tridiagonal form. Works from the last row up;
/// row `i` holds the reflector that annihilates `a[i][0..i-1]`. Both
/// triangles of the active block are updated so all inner loops run along
/// contiguous rows.
///
/// Returns the diagonal, the off-diagonal (`e[i]` couples `i` and `i+1`,
/// `e[n-1] = 0`), and the accumulated orthogonal factor when requested.
fn tridiagonalize(mut a: Matrix, want_vectors: bool) -> (Vec<f64>, Vec<f64>, Option<Matrix>) {
    let n = a.rows();
    let mut sub = vec![0.0; n];
    let mut hs = vec![0.0; n];
    let mut p = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i;
        if l == 1 {
            sub[i] = a[(i, 0)];
            continue;
        }
        let scale: f64 = a.row(i)[..l].iter().map(|x| fabs(*x)).sum();
        if scale == 0.0 {
            sub[i] = 0.0;
            continue;
        }
        let mut h = 0.0;
        {
            let row = &mut a.row_mut(i)[..l];
            for x in row.iter_mut() {
                *x /= scale;
                h += *x * *x;
            }
        }
        let f = a[(i, l - 1)];
        let g = if f >= 0.0 { -sqrt(h) } else { sqrt(h) };
        sub[i] = scale * g;
        h -= f * g;
        a[(i, l - 1)] = f - g;
        let u: Vec<f64> = a.row(i)[..l].to_vec();
        // symmetric matvec and rank-2 update touch only the lower triangle
        p[..l].iter_mut().for_each(|x| *x = 0.0);
        for j in 0..l {
            let row = &a.row(j)[..j];
            let uj = u[j];
            let mut s = a[(j, j)] * uj;
            for ((pk, &x), &uk) in p[..j].iter_mut().zip(row).zip(&u[..j]) {
                s += x * uk;
                *pk += x * uj;
            }
            p[j] += s;
        }
        let mut k_acc = 0.0;
        for j in 0..l {
            p[j] /= h;
            k_acc += u[j] * p[j];
        }
        let kk = k_acc / (2.0 * h);
        for j in 0..l {
            p[j] -= kk * u[j];
        }
        for j in 0..l {
            let (qj, uj) = (p[j], u[j]);
            let row = &mut a.row_mut(j)[..=j];
            for ((x, &uk), &qk) in row.iter_mut().zip(&u[..=j]).zip(&p[..=j]) {
                *x -= qj * uk + uj * qk;
            }
        }
        hs[i] = h;
    }
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    let mut off = vec![0.0; n];
    for i in 1..n {
        off[i - 1] = sub[i];
    }
    let z = if want_vectors {
        let mut z = Matrix::identity(n);
        let mut s = vec![0.0; n];
        for i in 2..n {
            let h = hs[i];
            if h == 0.0 {
                continue;
            }
            let u = &a.row(i)[..i];
            s.iter_mut().for_each(|x| *x = 0.0);
            for (k, &uk) in u.iter().enumerate() {
                axpy(uk, z.row(k), &mut s);
            }
            for (k, &uk) in u.iter().enumerate() {
                let c = -uk / h;
                let row = z.row_mut(k);
                for (x, &sc) in row.iter_mut().zip(&s) {
                    *x += c * sc;
                }
            }
        }
        Some(z)
    } else {
        None
    };
    (diag, off, z)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix. On exit `d` holds
/// the eigenvalues in ascending order and the columns of `z` (if given) the
/// matching eigenvectors.
fn tql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut Matrix>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    // absolute floor: clusters near zero otherwise never satisfy the relative test
    let anorm = (0..n).map(|i| fabs(d[i]) + fabs(e[i])).fold(0.0, f64::max);
    let floor = f64::EPSILON * anorm;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = fabs(d[m]) + fabs(d[m + 1]);
                if fabs(e[m]) <= f64::EPSILON * dd || fabs(e[m]) <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::EigenNoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { fabs(r) } else { -fabs(r) });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut early = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[(k, i + 1)];
                        z[(k, i + 1)] = s * z[(k, i)] + c * f;
                        z[(k, i)] = c * z[(k, i)] - s * f;
                    }
                }
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    // ascending sort, carrying eigenvector columns along
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    d.copy_from_slice(&sorted);
    if let Some(z) = z {
        let old = z.clone();
        for (new_j, &old_j) in order.iter().enumerate() {
            for k in 0..n {
                z[(k, new_j)] = old[(k, old_j)];
            }
        }
    }
    Ok(())
}
