//! Small dense linear algebra: a row-major matrix plus the handful of
//! factorizations the pipeline needs (Cholesky for normal equations,
//! partial-pivot LU for square systems, Householder QR for direct
//! least squares).

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Wraps row-major storage. Panics if the length does not match.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix storage size mismatch");
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    /// Builds a matrix whose columns are the given equally long slices.
    pub fn from_columns<C: AsRef<[T]>>(cols: &[C]) -> Self {
        let rows = cols.first().map_or(0, |c| c.as_ref().len());
        Self::from_fn(rows, cols.len(), |r, c| cols[c].as_ref()[r])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of entries.
    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == T::zero() {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `y = self * x`.
    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (r, out) in y.iter_mut().enumerate() {
            *out = dot(self.row(r), x);
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.rows];
        self.matvec_into(x, &mut y);
        y
    }

    /// `selfᵀ self`, exploiting symmetry.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut g = Self::zeros(n, n);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let ri = row[i];
                if ri == T::zero() {
                    continue;
                }
                let gi = &mut g.data[i * n..(i + 1) * n];
                for j in i..n {
                    gi[j] += ri * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g.data[i * n + j] = g.data[j * n + i];
            }
        }
        g
    }

    /// `selfᵀ y` for a matrix `y` with the same row count.
    pub fn t_matmul(&self, y: &Self) -> Self {
        assert_eq!(self.rows, y.rows, "row counts differ");
        let mut out = Self::zeros(self.cols, y.cols);
        for r in 0..self.rows {
            let xr = self.row(r);
            let yr = y.row(r);
            for (i, &xi) in xr.iter().enumerate() {
                if xi == T::zero() {
                    continue;
                }
                let oi = &mut out.data[i * y.cols..(i + 1) * y.cols];
                for (o, &yj) in oi.iter_mut().zip(yr) {
                    *o += xi * yj;
                }
            }
        }
        out
    }

    pub fn cast<U: Real>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| U::lit(x.as_f64())).collect(),
        }
    }

    pub fn scale(&mut self, s: T) {
        for x in &mut self.data {
            *x *= s;
        }
    }

    /// Max absolute entry.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    /// Rows `[start, end)` as a new matrix.
    pub fn slice_rows(&self, start: usize, end: usize) -> Self {
        Self {
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    /// Selected columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |r, c| self[(r, cols[c])])
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Lower-triangular Cholesky factor of a symmetric positive definite
/// matrix. `None` when a pivot is not strictly positive relative to the
/// diagonal scale.
pub fn cholesky<T: Real>(a: &Matrix<T>) -> Option<Matrix<T>> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "cholesky needs a square matrix");
    let diag_scale = (0..n).fold(T::zero(), |m, i| m.max(a[(i, i)].abs()));
    let floor = diag_scale * T::EPS * T::from_count(n.max(1));
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) {
            return None;
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(l)
}

/// Solves `L Lᵀ x = b` in place for each column of `b`.
pub fn cholesky_solve<T: Real>(l: &Matrix<T>, b: &mut Matrix<T>) {
    let n = l.rows();
    assert_eq!(b.rows(), n);
    for c in 0..b.cols() {
        for i in 0..n {
            let mut s = b[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * b[(k, c)];
            }
            b[(i, c)] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = b[(i, c)];
            for k in (i + 1)..n {
                s -= l[(k, i)] * b[(k, c)];
            }
            b[(i, c)] = s / l[(i, i)];
        }
    }
}

/// Solves a square system by Gaussian elimination with partial pivoting.
/// Returns `None` if a pivot falls below `rel_tol` times the largest
/// entry of the matrix.
pub fn lu_solve<T: Real>(a: &Matrix<T>, b: &[T], rel_tol: T) -> Option<Vec<T>> {
    let n = a.rows();
    assert_eq!(n, a.cols());
    assert_eq!(n, b.len());
    let mut m = a.clone();
    let mut x = b.to_vec();
    let scale = m.max_abs();
    if scale == T::zero() {
        return None;
    }
    for col in 0..n {
        let (piv, piv_val) = (col..n)
            .map(|r| (r, m[(r, col)].abs()))
            .fold((col, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_val <= rel_tol * scale {
            return None;
        }
        if piv != col {
            for c in 0..n {
                let tmp = m[(col, c)];
                m[(col, c)] = m[(piv, c)];
                m[(piv, c)] = tmp;
            }
            x.swap(col, piv);
        }
        let p = m[(col, col)];
        for r in (col + 1)..n {
            let f = m[(r, col)] / p;
            if f == T::zero() {
                continue;
            }
            for c in col..n {
                let v = m[(col, c)];
                m[(r, c)] -= f * v;
            }
            let xc = x[col];
            x[r] -= f * xc;
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s -= m[(i, k)] * x[k];
        }
        x[i] = s / m[(i, i)];
    }
    Some(x)
}

/// Least-squares solution of `a x ≈ b` by Householder QR. `None` if `a`
/// is numerically rank deficient.
pub fn qr_lstsq<T: Real>(a: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    let (m, n) = (a.rows(), a.cols());
    assert_eq!(m, b.len());
    if m < n {
        return None;
    }
    let mut r = a.clone();
    let mut y = b.to_vec();
    let scale = r.max_abs();
    for k in 0..n {
        let norm = (k..m).map(|i| r[(i, k)] * r[(i, k)]).sum::<T>().sqrt();
        if norm <= scale * T::EPS * T::from_count(m) {
            return None;
        }
        let alpha = if r[(k, k)] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2 = dot(&v, &v);
        if vnorm2 == T::zero() {
            continue;
        }
        let two = T::lit(2.0);
        for c in k..n {
            let s = (k..m).map(|i| v[i - k] * r[(i, c)]).sum::<T>() * two / vnorm2;
            for i in k..m {
                r[(i, c)] -= s * v[i - k];
            }
        }
        let s = (k..m).map(|i| v[i - k] * y[i]).sum::<T>() * two / vnorm2;
        for i in k..m {
            y[i] -= s * v[i - k];
        }
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= r[(i, k)] * x[k];
        }
        x[i] = s / r[(i, i)];
    }
    Some(x)
}
