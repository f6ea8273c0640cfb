//! Dense exact matrices over a coefficient field, and matrices of series.

use std::ops::{Index, IndexMut};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Coeff;
use crate::series::{SeriesVector, TruncatedSeries};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Coeff> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
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

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data,
        })
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

    pub fn scale(&self, c: &T) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v.clone() * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b)
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a.clone() * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for (j, x) in v.iter().enumerate() {
                    if !x.is_zero() {
                        acc += self[(i, j)].clone() * x;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn trace(&self) -> T {
        let mut t = T::zero();
        for i in 0..self.rows.min(self.cols) {
            t += &self[(i, i)];
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn determinant(&self) -> T {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = T::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !a[(r, col)].is_zero()) else {
                return T::zero();
            };
            if p != col {
                a.swap_rows(p, col);
                det = -det;
            }
            let pivot = a[(col, col)].clone();
            det *= &pivot;
            for r in col + 1..n {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let factor = a[(r, col)].clone() / pivot.clone();
                for c in col..n {
                    let v = a[(col, c)].clone() * &factor;
                    a[(r, c)] -= v;
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    /// Solve `self · X = rhs` by Gauss–Jordan elimination (sparse-aware).
    pub fn solve_matrix(&self, rhs: &Self) -> Result<Self> {
        assert!(self.is_square());
        assert_eq!(self.rows, rhs.rows);
        let n = self.rows;
        let m = rhs.cols;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for col in 0..n {
            let p = (col..n)
                .find(|&r| !a[(r, col)].is_zero())
                .ok_or(Error::SingularMatrix)?;
            if p != col {
                a.swap_rows(p, col);
                b.swap_rows(p, col);
            }
            let inv = T::one() / a[(col, col)].clone();
            for c in 0..n {
                if !a[(col, c)].is_zero() {
                    a[(col, c)] *= &inv;
                }
            }
            for c in 0..m {
                if !b[(col, c)].is_zero() {
                    b[(col, c)] *= &inv;
                }
            }
            let pivot_cols: Vec<usize> = (0..n).filter(|&c| !a[(col, c)].is_zero()).collect();
            let pivot_rhs: Vec<usize> = (0..m).filter(|&c| !b[(col, c)].is_zero()).collect();
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let factor = a[(r, col)].clone();
                for &c in &pivot_cols {
                    let v = a[(col, c)].clone() * &factor;
                    a[(r, c)] -= v;
                }
                for &c in &pivot_rhs {
                    let v = b[(col, c)].clone() * &factor;
                    b[(r, c)] -= v;
                }
            }
        }
        Ok(b)
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        let b = Matrix {
            rows: rhs.len(),
            cols: 1,
            data: rhs.to_vec(),
        };
        Ok(self.solve_matrix(&b)?.data)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve_matrix(&Self::identity(self.rows))
    }

    /// Coefficients `[c_0, …, c_n]` of `det(t I − self) = Σ c_k t^k`
    /// (Faddeev–LeVerrier).
    pub fn characteristic_polynomial(&self) -> Vec<T> {
        assert!(self.is_square());
        let n = self.rows;
        let mut coeffs = vec![T::zero(); n + 1];
        coeffs[n] = T::one();
        let mut m = Self::zeros(n, n);
        for k in 1..=n {
            // M_k = A M_{k-1} + c_{n-k+1} I
            let mut next = self.mul(&m);
            for i in 0..n {
                next[(i, i)] += &coeffs[n - k + 1];
            }
            m = next;
            let am = self.mul(&m);
            coeffs[n - k] = -(am.trace() / T::from_integer(k as i64));
        }
        coeffs
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Evaluate a polynomial given by ascending coefficients.
pub fn eval_poly<T: Coeff>(coeffs: &[T], t: &T) -> T {
    coeffs
        .iter()
        .rev()
        .fold(T::zero(), |acc, c| acc * t + c)
}

/// Square matrix whose entries are truncated series.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesMatrix<T> {
    n: usize,
    entries: Vec<TruncatedSeries<T>>,
}

impl<T: Coeff> SeriesMatrix<T> {
    pub fn zeros(n: usize, dim: usize, trunc: u32) -> Self {
        SeriesMatrix {
            n,
            entries: vec![TruncatedSeries::zero(dim, trunc); n * n],
        }
    }

    pub fn from_rows(rows: Vec<Vec<TruncatedSeries<T>>>) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            entries.extend(row);
        }
        Ok(SeriesMatrix { n, entries })
    }

    pub fn from_constant(m: &Matrix<T>, dim: usize, trunc: u32) -> Self {
        assert!(m.is_square());
        let n = m.rows();
        let mut out = Self::zeros(n, dim, trunc);
        for i in 0..n {
            for j in 0..n {
                out.entries[i * n + j] = TruncatedSeries::constant(dim, trunc, m[(i, j)].clone());
            }
        }
        out
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &TruncatedSeries<T> {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, s: TruncatedSeries<T>) {
        self.entries[i * self.n + j] = s;
    }

    pub fn entries(&self) -> &[TruncatedSeries<T>] {
        &self.entries
    }

    pub fn constant_part(&self) -> Matrix<T> {
        let mut m = Matrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = self.get(i, j).constant_term();
            }
        }
        m
    }

    pub fn map(&self, f: impl Fn(&TruncatedSeries<T>) -> TruncatedSeries<T>) -> Self {
        SeriesMatrix {
            n: self.n,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn truncate(&self, t: u32) -> Self {
        self.map(|s| s.truncate(t))
    }

    /// Matrix–vector product with conservative truncation.
    pub fn apply(&self, v: &SeriesVector<T>) -> SeriesVector<T> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                let mut acc: Option<TruncatedSeries<T>> = None;
                for (j, vj) in v.iter().enumerate() {
                    let term = self.get(i, j) * vj;
                    acc = Some(match acc {
                        Some(a) => &a + &term,
                        None => term,
                    });
                }
                acc.expect("nonempty matrix")
            })
            .collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = self.get(i, 0) * other.get(0, j);
                for k in 1..n {
                    acc = &acc + &(self.get(i, k) * other.get(k, j));
                }
                entries.push(acc);
            }
        }
        SeriesMatrix { n, entries }
    }

    pub fn add(&self, other: &Self) -> Self {
        SeriesMatrix {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Inverse when the constant part is invertible, by a Neumann series
    /// around the constant part.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let Some(first) = self.entries.first() else {
            return Ok(self.clone());
        };
        let (dim, trunc) = (first.dim(), self.entries.iter().map(|e| e.trunc()).min().unwrap_or(0));
        let m0 = self.constant_part();
        let m0_inv = m0.inverse()?;
        let m0_inv_s = Self::from_constant(&m0_inv, dim, trunc);
        let tail = self.map(|s| &s.truncate(trunc) - &TruncatedSeries::constant(dim, trunc, s.constant_term()));
        // step = -M0^{-1} tail has order ≥ 1
        let step = m0_inv_s.mul(&tail).map(|s| -s);
        let mut term = Self::from_constant(&Matrix::identity(n), dim, trunc);
        let mut sum = term.clone();
        for _ in 0..trunc {
            term = step.mul(&term);
            if term.entries.iter().all(TruncatedSeries::is_zero) {
                break;
            }
            sum = sum.add(&term);
        }
        Ok(sum.mul(&m0_inv_s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    fn m(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| rat(v, 1)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn determinant_and_inverse() {
        let a = m(&[&[2, 1], &[1, 1]]);
        assert_eq!(a.determinant(), rat(1, 1));
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Matrix::identity(2));
        assert_eq!(m(&[&[1, 2], &[2, 4]]).inverse(), Err(Error::SingularMatrix));
    }

    #[test]
    fn characteristic_polynomial_matches_determinant() {
        let a = m(&[&[1, 2, 0], &[0, 3, 1], &[4, 0, -2]]);
        let p = a.characteristic_polynomial();
        for t in -3..4 {
            let tt = rat(t, 1);
            let shifted = Matrix::identity(3).scale(&tt).add(&a.scale(&rat(-1, 1)));
            assert_eq!(eval_poly(&p, &tt), shifted.determinant());
        }
    }

    #[test]
    fn series_matrix_inverse() {
        type S = TruncatedSeries<Rational>;
        let x = S::variable(1, 6, 0);
        let one = S::one(1, 6);
        let a = SeriesMatrix::from_rows(vec![
            vec![&one + &x, x.clone()],
            vec![S::zero(1, 6), &one.scale(&rat(2, 1)) - &x],
        ])
        .unwrap();
        let inv = a.inverse().unwrap();
        let prod = a.mul(&inv);
        let id = SeriesMatrix::from_constant(&Matrix::identity(2), 1, 6);
        assert_eq!(prod, id);
    }
}
