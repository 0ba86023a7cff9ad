//! Dense matrices over exact rationals or `f64`, with Gaussian elimination
//! based rank, kernel, solve, inverse and determinant.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::exactpoly::Q;

/// Scalar field used by the dense linear algebra routines.
///
/// Implemented for [`Q`] (exact) and `f64` (floating). Floating elimination
/// uses partial pivoting and treats only exact zeros as zero, so callers that
/// need a numerical rank should go through the SVD helpers in `recon`.
pub trait Field: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    /// Exact fields take the first nonzero pivot.
    const EXACT: bool;
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    /// Size used for pivot selection.
    fn magnitude(&self) -> f64;
    fn to_f64(&self) -> f64;
    /// Exact conversion for [`Q`]; non-finite values map to zero.
    fn from_f64(x: f64) -> Self;
}

impl Field for Q {
    const EXACT: bool = true;
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        Q::from_integer(v.into())
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn magnitude(&self) -> f64 {
        if Zero::is_zero(self) {
            0.0
        } else {
            1.0
        }
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn from_f64(x: f64) -> Self {
        Q::from_float(x).unwrap_or_else(Zero::zero)
    }
}

impl Field for f64 {
    const EXACT: bool = false;
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_f64(x: f64) -> Self {
        x
    }
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type QMat = Mat<Q>;

impl<T: Field> Mat<T> {
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

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix rows");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
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

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| T::from_i64(v)).collect())
                .collect(),
        )
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "dimension mismatch in product");
        Self::from_fn(self.rows, o.cols, |i, j| {
            let mut acc = T::zero();
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if !a.is_zero() {
                    acc = acc.add(&a.mul(&o[(k, j)]));
                }
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc.add(&a.mul(b)))
            })
            .collect()
    }

    pub fn map<U: Field>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Submatrix with the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| {
            self[(rows[i], cols[j])].clone()
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Field::is_zero)
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let mut best = None;
            let mut best_mag = 0.0;
            for i in r..m.rows {
                let mag = m[(i, c)].magnitude();
                if !m[(i, c)].is_zero() && (best.is_none() || mag > best_mag) {
                    best = Some(i);
                    best_mag = mag;
                    if T::EXACT {
                        break;
                    }
                }
            }
            let Some(p) = best else { continue };
            m.swap_rows(r, p);
            let inv = T::one().div(&m[(r, c)]);
            for j in c..m.cols {
                m[(r, j)] = m[(r, j)].mul(&inv);
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in c..m.cols {
                        let v = m[(r, j)].mul(&f);
                        m[(i, j)] = m[(i, j)].sub(&v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel `{x : A x = 0}`.
    pub fn kernel_basis(&self) -> Vec<Vec<T>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![T::zero(); self.cols];
                v[f] = T::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = r[(row, f)].neg();
                }
                v
            })
            .collect()
    }

    /// Basis of the left kernel `{y : y A = 0}`.
    pub fn left_kernel_basis(&self) -> Vec<Vec<T>> {
        self.transpose().kernel_basis()
    }

    /// One solution of `A x = b`, or `None` when the system is inconsistent.
    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        assert_eq!(b.len(), self.rows);
        let aug = Self::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                b[i].clone()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![T::zero(); self.cols];
        for (row, &p) in pivots.iter().enumerate() {
            x[p] = r[(row, self.cols)].clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let aug = Self::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                T::one()
            } else {
                T::zero()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(Self::from_fn(n, n, |i, j| r[(i, j + n)].clone()))
    }

    pub fn det(&self) -> T {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        let mut m = self.clone();
        let mut det = T::one();
        for c in 0..n {
            let mut best = None;
            let mut best_mag = 0.0;
            for i in c..n {
                if !m[(i, c)].is_zero() && (best.is_none() || m[(i, c)].magnitude() > best_mag) {
                    best = Some(i);
                    best_mag = m[(i, c)].magnitude();
                }
            }
            let Some(p) = best else { return T::zero() };
            if p != c {
                m.swap_rows(p, c);
                det = det.neg();
            }
            let piv = m[(c, c)].clone();
            det = det.mul(&piv);
            for i in c + 1..n {
                if !m[(i, c)].is_zero() {
                    let f = m[(i, c)].div(&piv);
                    for j in c..n {
                        let v = m[(c, j)].mul(&f);
                        m[(i, j)] = m[(i, j)].sub(&v);
                    }
                }
            }
        }
        det
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Stack `self` on top of `o`.
    pub fn vstack(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.cols);
        let mut data = self.data.clone();
        data.extend(o.data.iter().cloned());
        Self {
            rows: self.rows + o.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn hstack(&self, o: &Self) -> Self {
        assert_eq!(self.rows, o.rows);
        Self::from_fn(self.rows, self.cols + o.cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                o[(i, j - self.cols)].clone()
            }
        })
    }

    pub fn to_f64(&self) -> Mat<f64> {
        self.map(|v| v.to_f64())
    }
}

impl QMat {
    /// Extend a set of independent row vectors to a basis of `Q^n` using
    /// standard basis vectors, returning the square matrix with the given
    /// rows first.
    pub fn complete_rows(rows: &[Vec<Q>], n: usize) -> Option<QMat> {
        let mut out: Vec<Vec<Q>> = rows.to_vec();
        if QMat::from_rows_or_empty(&out, n).rank() < out.len() {
            return None;
        }
        for k in 0..n {
            if out.len() == n {
                break;
            }
            let mut e = vec![<Q as Zero>::zero(); n];
            e[k] = <Q as One>::one();
            let mut cand = out.clone();
            cand.push(e);
            if QMat::from_rows_or_empty(&cand, n).rank() == cand.len() {
                out = cand;
            }
        }
        (out.len() == n).then(|| QMat::from_rows(out))
    }

    fn from_rows_or_empty(rows: &[Vec<Q>], n: usize) -> QMat {
        if rows.is_empty() {
            QMat::zeros(0, n)
        } else {
            QMat::from_rows(rows.to_vec())
        }
    }

    pub fn max_abs(&self) -> Q {
        self.data
            .iter()
            .map(|v| v.abs())
            .fold(<Q as Zero>::zero(), |a, b| if b > a { b } else { a })
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Display> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<T: fmt::Display> fmt::Display for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.data[i * self.cols + j])?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    #[test]
    fn kernel_of_identity_is_empty() {
        assert!(QMat::identity(4).kernel_basis().is_empty());
    }

    #[test]
    fn kernel_of_rank_three_camera_is_two_dimensional() {
        let p = QMat::from_i64_rows(&[&[1, 0, 0, 0, 0], &[0, 1, 0, 0, 0], &[0, 0, 1, 0, 0]]);
        let k = p.kernel_basis();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(p.mul_vec(v).iter().all(|x| Zero::is_zero(x)));
        }
    }

    #[test]
    fn solves_consistent_two_by_two() {
        let a = QMat::from_i64_rows(&[&[2, 1], &[1, 3]]);
        let x = a.solve(&[q(3), q(5)]).unwrap();
        assert_eq!(
            x,
            vec![Q::new(4.into(), 5.into()), Q::new(7.into(), 5.into())]
        );
        let sing = QMat::from_i64_rows(&[&[1, 1], &[1, 1]]);
        assert!(sing.solve(&[q(1), q(2)]).is_none());
    }

    #[test]
    fn det_and_inverse_agree() {
        let a = QMat::from_i64_rows(&[&[2, 0, 1], &[1, 3, 2], &[1, 1, 2]]);
        assert_eq!(a.det(), q(6));
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), QMat::identity(3));
        let f = a.to_f64();
        assert!((f.det() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn complete_rows_extends_to_basis() {
        let m = QMat::complete_rows(&[vec![q(0), q(1), q(1)]], 3).unwrap();
        assert_eq!(m.rank(), 3);
        assert_eq!(m.row(0), &[q(0), q(1), q(1)]);
    }
}
