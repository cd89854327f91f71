use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{HoaError, Result};
use crate::scalar::{to_f64_vec, Real};

/// Dense row-major matrix of finite reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RealMatrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> RealMatrix<T> {
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

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(HoaError::Dimension {
                context: "matrix from row-major data",
                expected: rows * cols,
                got: data.len(),
            });
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(HoaError::NonFinite {
                what: "matrix entries",
                at: to_f64_vec(&data),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(HoaError::Dimension {
                context: "ragged matrix rows",
                expected: c,
                got: bad.len(),
            });
        }
        Self::from_row_major(r, c, rows.concat())
    }

    pub fn from_columns(cols: &[Vec<T>]) -> Result<Self> {
        Ok(Self::from_rows(cols)?.transpose())
    }

    pub fn column_vector(v: &[T]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(HoaError::Dimension {
                context: "matrix product",
                expected: self.cols,
                got: rhs.rows,
            });
        }
        Ok(Self::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols).map(|k| self[(i, k)] * rhs[(k, j)]).sum()
        }))
    }

    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        if self.cols != x.len() {
            return Err(HoaError::Dimension {
                context: "matrix-vector product",
                expected: self.cols,
                got: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    /// `selfᵀ x`.
    pub fn tr_matvec(&self, x: &[T]) -> Result<Vec<T>> {
        if self.rows != x.len() {
            return Err(HoaError::Dimension {
                context: "transposed matrix-vector product",
                expected: self.rows,
                got: x.len(),
            });
        }
        let mut out = vec![T::zero(); self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(-T::one())
    }

    /// `(A + Aᵀ)/2`; the result is exactly symmetric.
    pub fn symmetrized(&self) -> Self {
        let half = T::lit(0.5);
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..i {
                let v = (self[(i, j)] + self[(j, i)]) * half;
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Sub-matrix keeping the listed rows and columns in order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    /// Columns other than `k`.
    pub fn without_column(&self, k: usize) -> Self {
        let cols: Vec<usize> = (0..self.cols).filter(|&j| j != k).collect();
        let rows: Vec<usize> = (0..self.rows).collect();
        self.select(&rows, &cols)
    }

    /// Principal sub-matrix with row and column `k` removed.
    pub fn without_index(&self, k: usize) -> Self {
        let idx: Vec<usize> = (0..self.rows).filter(|&j| j != k).collect();
        self.select(&idx, &idx)
    }

    pub fn with_column_replaced(&self, k: usize, col: &[T]) -> Self {
        let mut out = self.clone();
        for (i, &v) in col.iter().enumerate() {
            out[(i, k)] = v;
        }
        out
    }

    pub fn lu(&self) -> Result<Lu<T>> {
        Lu::new(self)
    }

    /// Determinant by LU; zero for exactly singular matrices.
    pub fn det(&self) -> Result<T> {
        if !self.is_square() {
            return Err(HoaError::Dimension {
                context: "determinant of non-square matrix",
                expected: self.rows,
                got: self.cols,
            });
        }
        Ok(match Lu::new(self) {
            Ok(lu) => lu.det(),
            Err(HoaError::Singular { .. }) => T::zero(),
            Err(e) => return Err(e),
        })
    }

    pub fn inverse(&self) -> Result<Self> {
        self.lu()?.inverse()
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        self.lu()?.solve(b)
    }

    pub fn cholesky(&self) -> Option<Cholesky<T>> {
        Cholesky::new(self)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.cholesky().is_some()
    }
}

impl<T: Real> Index<(usize, usize)> for RealMatrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for RealMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorisation with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu<T: Real> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
    sign: T,
}

impl<T: Real> Lu<T> {
    fn new(a: &RealMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(HoaError::Dimension {
                context: "LU of non-square matrix",
                expected: a.rows,
                got: a.cols,
            });
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        let scale = a.data.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        let tiny = scale * T::epsilon() * T::lit(n.max(1) as f64);
        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -T::one()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax <= tiny || pmax == T::zero() {
                return Err(HoaError::Singular {
                    context: "LU factorisation",
                    rank: k,
                    cols: n,
                });
            }
            if piv != k {
                for j in 0..n {
                    lu.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let d = lu[k * n + k];
            for i in (k + 1)..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                for j in (k + 1)..n {
                    let v = lu[k * n + j];
                    lu[i * n + j] -= f * v;
                }
            }
        }
        Ok(Self { n, lu, perm, sign })
    }

    pub fn det(&self) -> T {
        (0..self.n).fold(self.sign, |acc, i| acc * self.lu[i * self.n + i])
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.n;
        if b.len() != n {
            return Err(HoaError::Dimension {
                context: "LU solve",
                expected: n,
                got: b.len(),
            });
        }
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let v = x[j];
                x[i] -= self.lu[i * n + j] * v;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let v = x[j];
                x[i] -= self.lu[i * n + j] * v;
            }
            x[i] /= self.lu[i * n + i];
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<RealMatrix<T>> {
        let n = self.n;
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![T::zero(); n];
            e[j] = T::one();
            cols.push(self.solve(&e)?);
        }
        Ok(RealMatrix::from_fn(n, n, |i, j| cols[j][i]))
    }
}

/// Cholesky factor `A = L Lᵀ` of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<T: Real> {
    n: usize,
    l: Vec<T>,
}

impl<T: Real> Cholesky<T> {
    fn new(a: &RealMatrix<T>) -> Option<Self> {
        if !a.is_square() {
            return None;
        }
        let n = a.rows;
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > T::zero()) || !d.is_finite() {
                return None;
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        Some(Self { n, l })
    }

    pub fn det(&self) -> T {
        (0..self.n).fold(T::one(), |acc, i| acc * self.l[i * self.n + i]).powi(2)
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                let v = y[k];
                y[i] -= self.l[i * n + k] * v;
            }
            y[i] /= self.l[i * n + i];
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let v = y[k];
                y[i] -= self.l[k * n + i] * v;
            }
            y[i] /= self.l[i * n + i];
        }
        y
    }
}

/// `|AᵀA|^{1/2}` from a column-pivoted Householder QR: the product of the
/// absolute diagonal of R.
pub fn gram_det_sqrt<T: Real>(a: &RealMatrix<T>) -> Result<T> {
    let (m, n) = (a.rows(), a.cols());
    if n == 0 {
        return Ok(T::one());
    }
    if m < n {
        return Err(HoaError::Singular {
            context: "gram determinant (fewer rows than columns)",
            rank: m,
            cols: n,
        });
    }
    let mut r = a.clone();
    let mut col_norms: Vec<T> = (0..n)
        .map(|j| crate::numcore::vector::norm(&r.column(j)))
        .collect();
    let ref_norm = col_norms.iter().fold(T::zero(), |acc, &x| acc.max(x));
    let tol = ref_norm * T::epsilon() * T::lit((m.max(n) * 10) as f64);
    let mut prod = T::one();
    for k in 0..n {
        // pivot on the largest remaining column norm
        let (piv, _) = (k..n)
            .map(|j| (j, col_norms[j]))
            .fold((k, -T::one()), |acc, x| if x.1 > acc.1 { x } else { acc });
        if piv != k {
            for i in 0..m {
                let tmp = r[(i, k)];
                r[(i, k)] = r[(i, piv)];
                r[(i, piv)] = tmp;
            }
            col_norms.swap(k, piv);
        }
        let x: Vec<T> = (k..m).map(|i| r[(i, k)]).collect();
        let alpha = crate::numcore::vector::norm(&x);
        if alpha <= tol || ref_norm == T::zero() {
            return Err(HoaError::Singular {
                context: "gram determinant",
                rank: k,
                cols: n,
            });
        }
        prod *= alpha;
        let sign = if x[0] >= T::zero() { T::one() } else { -T::one() };
        let mut v = x;
        v[0] += sign * alpha;
        let vnorm2: T = v.iter().map(|&t| t * t).sum();
        if vnorm2 > T::zero() {
            for j in (k + 1)..n {
                let s: T = (k..m).map(|i| v[i - k] * r[(i, j)]).sum();
                let f = T::lit(2.0) * s / vnorm2;
                for i in k..m {
                    r[(i, j)] -= f * v[i - k];
                }
            }
        }
        for (j, cn) in col_norms.iter_mut().enumerate().skip(k + 1) {
            let tail: Vec<T> = ((k + 1)..m).map(|i| r[(i, j)]).collect();
            *cn = crate::numcore::vector::norm(&tail);
        }
    }
    Ok(prod)
}
