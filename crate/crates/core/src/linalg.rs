//! Small dense and sparse linear algebra used by the bound and oracle modules.
//!
//! Dense symmetric eigensolves use Householder tridiagonalisation followed by
//! implicit QL (the classic EISPACK `tred2`/`tql2` pair). Symmetric
//! tridiagonal matrices get Sturm-sequence bisection plus inverse iteration.

use rayon::prelude::*;

use crate::Scalar;

/// Square dense matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds from a row-major slice of length `n * n`.
    pub fn from_row_slice(n: usize, data: &[T]) -> Self {
        assert_eq!(data.len(), n * n, "row slice has wrong length");
        Self {
            n,
            data: data.to_vec(),
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        Self::from_fn(n, |i, j| {
            (0..n).fold(T::zero(), |acc, k| acc + self[(i, k)] * other[(k, j)])
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.n, v.len());
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_fn(self.n, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_fn(self.n, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    /// Max-row-sum norm.
    pub fn norm_inf(&self) -> T {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .fold(T::zero(), |acc, v| acc + v.abs())
            })
            .fold(T::zero(), T::max)
    }

    /// `‖M − Mᵀ‖_∞`.
    pub fn asymmetry(&self) -> T {
        self.sub(&self.transpose()).norm_inf()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Inverse by Gauss-Jordan with partial pivoting; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.norm_inf().max(T::min_positive_value());
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| {
                    a[(r, col)]
                        .abs()
                        .partial_cmp(&a[(s, col)].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap();
            if a[(pivot, col)].abs() <= T::epsilon() * scale * T::c(16.0) {
                return None;
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= p;
                inv[(col, j)] /= p;
            }
            for r in 0..n {
                if r != col {
                    let f = a[(r, col)];
                    if f != T::zero() {
                        for j in 0..n {
                            let av = a[(col, j)];
                            let iv = inv[(col, j)];
                            a[(r, j)] -= f * av;
                            inv[(r, j)] -= f * iv;
                        }
                    }
                }
            }
        }
        Some(inv)
    }

    /// Cholesky factor `L` with `A = L Lᵀ`; `None` unless positive-definite.
    pub fn cholesky(&self) -> Option<Self> {
        let n = self.n;
        let mut l = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                if i == j {
                    if s <= T::zero() || !s.is_finite() {
                        return None;
                    }
                    l[(i, i)] = s.sqrt();
                } else {
                    l[(i, j)] = s / l[(j, j)];
                }
            }
        }
        Some(l)
    }

    /// Solves `A x = b` for symmetric positive-definite `A`.
    pub fn solve_spd(&self, b: &[T]) -> Option<Vec<T>> {
        let l = self.cholesky()?;
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                let lik = l[(i, k)];
                let yk = y[k];
                y[i] -= lik * yk;
            }
            y[i] /= l[(i, i)];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let lki = l[(k, i)];
                let yk = y[k];
                y[i] -= lki * yk;
            }
            y[i] /= l[(i, i)];
        }
        Some(y)
    }

    /// Full symmetric eigendecomposition (only the lower triangle is read).
    pub fn symmetric_eigen(&self) -> SymmetricEigen<T> {
        symmetric_eigen(self)
    }

    /// Smallest eigenvalue of the symmetric part.
    pub fn min_eigenvalue(&self) -> T {
        match self.n {
            0 => T::infinity(),
            1 => self.data[0],
            2 => {
                let a = self[(0, 0)];
                let d = self[(1, 1)];
                let b = T::c(0.5) * (self[(0, 1)] + self[(1, 0)]);
                let half_tr = T::c(0.5) * (a + d);
                let half_diff = T::c(0.5) * (a - d);
                half_tr - half_diff.hypot(b)
            }
            _ => symmetric_eigen(self).values[0],
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// Eigenvalues in ascending order with matching eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: DenseMatrix<T>,
}

impl<T: Scalar> SymmetricEigen<T> {
    pub fn vector(&self, k: usize) -> Vec<T> {
        let n = self.vectors.dim();
        (0..n).map(|i| self.vectors[(i, k)]).collect()
    }
}

fn symmetric_eigen<T: Scalar>(a: &DenseMatrix<T>) -> SymmetricEigen<T> {
    let n = a.dim();
    if n == 0 {
        return SymmetricEigen {
            values: vec![],
            vectors: DenseMatrix::zeros(0),
        };
    }
    // symmetrise from the lower triangle
    let mut v = DenseMatrix::from_fn(n, |i, j| if j <= i { a[(i, j)] } else { a[(j, i)] });
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = DenseMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    SymmetricEigen { values, vectors }
}

fn tred2<T: Scalar>(v: &mut DenseMatrix<T>, d: &mut [T], e: &mut [T]) {
    let n = v.dim();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = T::zero();
                v[(j, i)] = T::zero();
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in j + 1..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let val = v[(k, j)] - (f * e[k] + g * d[k]);
                    v[(k, j)] = val;
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    let val = v[(k, j)] - g * d[k];
                    v[(k, j)] = val;
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = T::zero();
    }
    v[(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

fn tql2<T: Scalar>(v: &mut DenseMatrix<T>, d: &mut [T], e: &mut [T]) {
    let n = v.dim();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();

    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut guard = 0;
            loop {
                guard += 1;
                if guard > 60 {
                    break;
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (T::c(2.0) * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[(k, i + 1)];
                        let vki = v[(k, i)];
                        v[(k, i + 1)] = s * vki + c * h;
                        v[(k, i)] = c * vki - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
}

/// Number of eigenvalues of the symmetric tridiagonal matrix strictly below `x`.
fn sturm_count<T: Scalar>(diag: &[T], off: &[T], x: T) -> usize {
    let tiny = T::min_positive_value().sqrt();
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < T::zero() {
        count += 1;
    }
    for i in 1..diag.len() {
        if q.abs() < tiny {
            q = if q < T::zero() { -tiny } else { tiny };
        }
        q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        if q < T::zero() {
            count += 1;
        }
    }
    count
}

/// The `k` smallest eigenvalues of a symmetric tridiagonal matrix by bisection.
///
/// `off[i]` couples rows `i` and `i + 1`.
pub fn tridiagonal_lowest<T: Scalar>(diag: &[T], off: &[T], k: usize) -> Vec<T> {
    let n = diag.len();
    assert_eq!(off.len() + 1, n.max(1));
    let k = k.min(n);
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { T::zero() }
            + if i + 1 < n { off[i].abs() } else { T::zero() };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let span = (hi - lo).max(T::one());
    let tol = T::epsilon() * span * T::c(4.0);
    (0..k)
        .map(|j| {
            let (mut a, mut b) = (lo - tol, hi + tol);
            for _ in 0..200 {
                let mid = T::c(0.5) * (a + b);
                if sturm_count(diag, off, mid) > j {
                    b = mid;
                } else {
                    a = mid;
                }
                if b - a <= tol {
                    break;
                }
            }
            T::c(0.5) * (a + b)
        })
        .collect()
}

/// Unit eigenvector of a symmetric tridiagonal matrix for a converged
/// eigenvalue, by inverse iteration. `previous` vectors are projected out.
pub fn tridiagonal_eigenvector<T: Scalar>(
    diag: &[T],
    off: &[T],
    lambda: T,
    previous: &[Vec<T>],
) -> Vec<T> {
    let n = diag.len();
    let scale = diag.iter().fold(T::one(), |a, v| a.max(v.abs()));
    let shift = lambda + scale * T::epsilon() * T::c(8.0);
    let mut x: Vec<T> = (0..n)
        .map(|i| T::one() + T::c(1e-3) * T::from_usize_lossy(i % 7))
        .collect();
    for _ in 0..4 {
        orthogonalize_against(&mut x, previous);
        x = tridiagonal_solve_shifted(diag, off, shift, &x);
        normalize(&mut x);
    }
    orthogonalize_against(&mut x, previous);
    normalize(&mut x);
    x
}

/// Solves `(T − σ I) y = b` by Gaussian elimination with partial pivoting.
fn tridiagonal_solve_shifted<T: Scalar>(diag: &[T], off: &[T], sigma: T, b: &[T]) -> Vec<T> {
    let n = diag.len();
    if n == 1 {
        let p = diag[0] - sigma;
        let p = if p == T::zero() { T::epsilon() } else { p };
        return vec![b[0] / p];
    }
    // rows stored as (sub, main, super, super2) after pivoting
    let mut a = vec![T::zero(); n];
    let mut bm = vec![T::zero(); n];
    let mut c = vec![T::zero(); n];
    let mut c2 = vec![T::zero(); n];
    let mut rhs = b.to_vec();
    for i in 0..n {
        bm[i] = diag[i] - sigma;
        if i > 0 {
            a[i] = off[i - 1];
        }
        if i + 1 < n {
            c[i] = off[i];
        }
    }
    let tiny = T::epsilon() * T::c(1e-3);
    for i in 0..n - 1 {
        if a[i + 1].abs() > bm[i].abs() {
            // swap rows i and i+1
            std::mem::swap(&mut bm[i], &mut a[i + 1]);
            std::mem::swap(&mut c[i], &mut bm[i + 1]);
            std::mem::swap(&mut c2[i], &mut c[i + 1]);
            rhs.swap(i, i + 1);
            // after the swap row i holds (a[i+1] moved into bm[i])
            // and row i+1's sub-diagonal position holds old bm[i]
        }
        if bm[i] == T::zero() {
            bm[i] = tiny;
        }
        let m = a[i + 1] / bm[i];
        a[i + 1] = T::zero();
        bm[i + 1] -= m * c[i];
        c[i + 1] -= m * c2[i];
        let r = rhs[i];
        rhs[i + 1] -= m * r;
    }
    if bm[n - 1] == T::zero() {
        bm[n - 1] = tiny;
    }
    let mut y = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        if i + 1 < n {
            s -= c[i] * y[i + 1];
        }
        if i + 2 < n {
            s -= c2[i] * y[i + 2];
        }
        y[i] = s / bm[i];
    }
    y
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn normalize<T: Scalar>(a: &mut [T]) -> T {
    let n = norm(a);
    if n > T::zero() {
        for v in a.iter_mut() {
            *v /= n;
        }
    }
    n
}

pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Modified Gram-Schmidt step against an orthonormal set.
pub fn orthogonalize_against<T: Scalar>(x: &mut [T], basis: &[Vec<T>]) {
    for _ in 0..2 {
        for b in basis {
            let p = dot(x, b);
            axpy(-p, b, x);
        }
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix<T> {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Builds from per-row `(column, value)` lists; duplicate columns are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, T)>>) -> Self {
        let n = rows.len();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                assert!(c < n, "column index out of range");
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            n,
            indptr,
            indices,
            values,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        (self.indptr[i]..self.indptr[i + 1]).map(move |p| (self.indices[p], self.values[p]))
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.row(i)
            .find(|&(c, _)| c == j)
            .map(|(_, v)| v)
            .unwrap_or_else(T::zero)
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`; rows are independent so the result does not depend on
    /// the thread count.
    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let row = |i: usize| {
            (self.indptr[i]..self.indptr[i + 1]).fold(T::zero(), |acc, p| {
                acc + self.values[p] * x[self.indices[p]]
            })
        };
        if self.n >= 1 << 14 {
            y.par_iter_mut()
                .enumerate()
                .for_each(|(i, yi)| *yi = row(i));
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = row(i);
            }
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// Largest `|a_ij − a_ji|`.
    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut m = DenseMatrix::zeros(self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// Tridiagonal view `(diag, off)` if the sparsity pattern allows it.
    pub fn as_tridiagonal(&self) -> Option<(Vec<T>, Vec<T>)> {
        let mut diag = vec![T::zero(); self.n];
        let mut off = vec![T::zero(); self.n.saturating_sub(1)];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                if j == i {
                    diag[i] = v;
                } else if j == i + 1 {
                    off[i] = v;
                } else if j + 1 == i {
                    // symmetric counterpart, checked by caller
                } else {
                    return None;
                }
            }
        }
        Some((diag, off))
    }

    /// `D A D` for a diagonal `D`.
    pub fn scale_symmetric(&self, d: &[T]) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for p in self.indptr[i]..self.indptr[i + 1] {
                out.values[p] = self.values[p] * d[i] * d[self.indices[p]];
            }
        }
        out
    }

    /// `A + s I` (diagonal entries must already be present in the pattern).
    pub fn add_diagonal(&self, s: &[T]) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            let p = (self.indptr[i]..self.indptr[i + 1])
                .find(|&p| self.indices[p] == i)
                .expect("diagonal entry present");
            out.values[p] += s[i];
        }
        out
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_eigen_reconstructs() {
        let a = DenseMatrix::<f64>::from_row_slice(
            4,
            &[
                4.0, 1.0, -2.0, 0.5, 1.0, 3.0, 0.0, 1.0, -2.0, 0.0, 5.0, -1.0, 0.5, 1.0, -1.0, 2.0,
            ],
        );
        let eig = a.symmetric_eigen();
        for k in 0..4 {
            let v = eig.vector(k);
            let av = a.mul_vec(&v);
            for i in 0..4 {
                assert!((av[i] - eig.values[k] * v[i]).abs() < 1e-12);
            }
        }
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let tr: f64 = eig.values.iter().sum();
        assert!((tr - 14.0).abs() < 1e-12);
    }

    #[test]
    fn min_eigenvalue_2x2_matches_general() {
        let a = DenseMatrix::<f64>::from_row_slice(2, &[2.0, -0.7, -0.7, 0.3]);
        let e = a.symmetric_eigen();
        assert!((a.min_eigenvalue() - e.values[0]).abs() < 1e-14);
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let n = 30;
        let diag: Vec<f64> = (0..n).map(|i| 2.0 + 0.1 * i as f64).collect();
        let off: Vec<f64> = (0..n - 1).map(|i| -1.0 + 0.01 * i as f64).collect();
        let dense = DenseMatrix::from_fn(n, |i, j| {
            if i == j {
                diag[i]
            } else if j == i + 1 {
                off[i]
            } else if i == j + 1 {
                off[j]
            } else {
                0.0
            }
        });
        let eig = dense.symmetric_eigen();
        let low = tridiagonal_lowest(&diag, &off, 5);
        let mut prev: Vec<Vec<f64>> = vec![];
        for k in 0..5 {
            assert!((low[k] - eig.values[k]).abs() < 1e-12, "{k}");
            let v = tridiagonal_eigenvector(&diag, &off, low[k], &prev);
            let av = dense.mul_vec(&v);
            let res: f64 = av
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - low[k] * b).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(res < 1e-10, "residual {res}");
            prev.push(v);
        }
    }

    #[test]
    fn cholesky_solve_and_inverse() {
        let a =
            DenseMatrix::<f64>::from_row_slice(3, &[4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0]);
        let x = a.solve_spd(&[1.0, 2.0, 3.0]).unwrap();
        let ax = a.mul_vec(&x);
        assert!((ax[0] - 1.0).abs() < 1e-14 && (ax[2] - 3.0).abs() < 1e-14);
        let inv = a.inverse().unwrap();
        let id = a.mul(&inv);
        assert!(id.sub(&DenseMatrix::identity(3)).norm_inf() < 1e-14);
        let neg = DenseMatrix::<f64>::from_row_slice(2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(neg.cholesky().is_none());
    }

    #[test]
    fn csr_sums_duplicates() {
        let m = CsrMatrix::from_rows(vec![vec![(0, 1.0), (1, 2.0), (0, 0.5)], vec![(1, 3.0)]]);
        assert_eq!(m.get(0, 0), 1.5);
        assert_eq!(m.mul_vec(&[1.0, 1.0]), vec![3.5, 3.0]);
    }
}
