//! Dense row-major matrices over a [`Scalar`].

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_traits::Signed;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dim(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

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

    pub fn diag(entries: &[T]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::dim("ragged rows"));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| T::from_i64(v)).collect())
                .collect(),
        )
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(cols: &[Vec<T>]) -> Result<Self> {
        Ok(Self::from_rows(cols.to_vec())?.transpose())
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

    pub fn data(&self) -> &[T] {
        &self.data
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

    pub fn columns(&self) -> Vec<Vec<T>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(|x| x.to_f64())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::dim(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] = out[(i, j)].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(Error::dim(format!(
                "vector of length {} for {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| dot(self.row(i), v))
            .collect())
    }

    /// Integer coefficient vector times the columns.
    pub fn mul_int_vec(&self, c: &[i64]) -> Result<Vec<T>> {
        let v: Vec<T> = c.iter().map(|&x| T::from_i64(x)).collect();
        self.mul_vec(&v)
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out[(a, b)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        let rows: Vec<usize> = (r0..r0 + nr).collect();
        let cols: Vec<usize> = (c0..c0 + nc).collect();
        self.submatrix(&rows, &cols)
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)].clone();
            }
        }
    }

    pub fn vstack(blocks: &[Self]) -> Result<Self> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        if blocks.iter().any(|b| b.cols != cols) {
            return Err(Error::dim("vstack column mismatch"));
        }
        let rows = blocks.iter().map(|b| b.rows).sum();
        let data = blocks.iter().flat_map(|b| b.data.iter().cloned()).collect();
        Ok(Self { rows, cols, data })
    }

    pub fn hstack(blocks: &[Self]) -> Result<Self> {
        let t: Vec<Self> = blocks.iter().map(Self::transpose).collect();
        Ok(Self::vstack(&t)?.transpose())
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.data.iter().all(Scalar::is_negligible)
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| (a.clone() - b.clone()).is_negligible())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && self.approx_eq(&Self::identity(self.rows))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_negligible()))
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self[(i, j)].is_negligible()))
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.rows).all(|i| (0..i.min(self.cols)).all(|j| self[(i, j)].is_negligible()))
    }

    pub fn is_lower_unipotent(&self) -> bool {
        self.is_square()
            && self.is_lower_triangular()
            && (0..self.rows).all(|i| (self[(i, i)].clone() - T::one()).is_negligible())
    }

    pub fn is_integral(&self) -> bool
    where
        T: Scalar,
    {
        self.data
            .iter()
            .all(|x| x.floor_i64().is_some_and(|f| (x.clone() - T::from_i64(f)).is_negligible()))
    }

    /// Entries as machine integers, when every entry is one.
    pub fn to_i64(&self) -> Option<Vec<Vec<i64>>> {
        if !self.is_integral() {
            return None;
        }
        Some(
            (0..self.rows)
                .map(|i| self.row(i).iter().map(|x| x.round_i64().unwrap()).collect())
                .collect(),
        )
    }

    fn pivot_row(&self, col: usize, from: usize) -> Option<usize> {
        if T::is_exact() {
            (from..self.rows).find(|&r| !self[(r, col)].is_zero())
        } else {
            let mut best: Option<(usize, T)> = None;
            for r in from..self.rows {
                let a = self[(r, col)].abs();
                if best.as_ref().is_none_or(|(_, b)| a > *b) {
                    best = Some((r, a));
                }
            }
            best.filter(|(_, a)| !a.is_negligible()).map(|(r, _)| r)
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn det(&self) -> Result<T> {
        if !self.is_square() {
            return Err(Error::dim("determinant of a non-square matrix"));
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut det = T::one();
        for c in 0..n {
            let Some(p) = m.pivot_row(c, c) else {
                return Ok(T::zero());
            };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            let piv = m[(c, c)].clone();
            det = det * piv.clone();
            for r in c + 1..n {
                let f = m[(r, c)].clone() / piv.clone();
                if f.is_zero() {
                    continue;
                }
                for j in c..n {
                    let v = m[(c, j)].clone();
                    m[(r, j)] = m[(r, j)].clone() - f.clone() * v;
                }
            }
        }
        Ok(det)
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = m.pivot_row(c, r) else { continue };
            m.swap_rows(p, r);
            let piv = m[(r, c)].clone();
            for j in 0..self.cols {
                m[(r, j)] = m[(r, j)].clone() / piv.clone();
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = m[(i, c)].clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..self.cols {
                    let v = m[(r, j)].clone();
                    m[(i, j)] = m[(i, j)].clone() - f.clone() * v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        if !T::is_exact() {
            for x in m.data.iter_mut() {
                if x.is_negligible() {
                    *x = T::zero();
                }
            }
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right null space, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<T>> {
        let (r, pivots) = self.rref();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivots.contains(&free) {
                continue;
            }
            let mut v = vec![T::zero(); self.cols];
            v[free] = T::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r[(row, free)].clone();
            }
            basis.push(v);
        }
        basis
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::dim("inverse of a non-square matrix"));
        }
        let n = self.rows;
        let aug = Self::hstack(&[self.clone(), Self::identity(n)])?;
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::Singular);
        }
        Ok(r.block(0, n, n, n))
    }

    /// Solves `self * x = b` for square invertible `self`.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        self.inverse()?.mul_vec(b)
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    /// Determinant one, for square matrices.
    pub fn is_unimodular(&self) -> bool {
        self.det()
            .map(|d| (d - T::one()).is_negligible())
            .unwrap_or(false)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        Ok(self.try_mul(other)? - other.try_mul(self)?)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            (0..self.rows)
                .map(|i| Value::Array(self.row(i).iter().map(Scalar::to_json).collect()))
                .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let rows = v
            .as_array()
            .ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
        let parsed = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| Error::Parse("matrix row must be an array".into()))?
                    .iter()
                    .map(T::from_json)
                    .collect::<Result<Vec<T>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(parsed)
    }
}

impl Matrix<Rational> {
    /// Every entry has denominator one.
    pub fn denominators_one(&self) -> bool {
        self.data.iter().all(crate::scalar::is_integer)
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn norm_sq<T: Scalar>(a: &[T]) -> T {
    dot(a, a)
}

pub fn sup_norm<T: Scalar>(a: &[T]) -> T {
    a.iter()
        .map(Signed::abs)
        .fold(T::zero(), |m, x| if x > m { x } else { m })
}


impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, rhs: Self) -> Matrix<T> {
        self.try_mul(rhs).expect("matrix product dimensions")
    }
}

impl<T: Scalar> Mul for Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, rhs: Self) -> Matrix<T> {
        &self * &rhs
    }
}

impl<T: Scalar> Add for Matrix<T> {
    type Output = Matrix<T>;

    fn add(self, rhs: Self) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.into_iter().zip(rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Scalar> Sub for Matrix<T> {
    type Output = Matrix<T>;

    fn sub(self, rhs: Self) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.into_iter().zip(rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T: Scalar> Neg for Matrix<T> {
    type Output = Matrix<T>;

    fn neg(self) -> Matrix<T> {
        self.map(|x| -x.clone())
    }
}

impl<T: Scalar> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let cells: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num_traits::Zero;
    use proptest::prelude::*;

    type Q = Matrix<Rational>;

    #[test]
    fn det_and_inverse_exact() {
        let m = Q::from_i64_rows(&[&[3, 0, 1], &[2, 2, 1], &[2, 1, 1]]).unwrap();
        assert_eq!(m.det().unwrap(), rat(1, 1));
        let inv = m.inverse().unwrap();
        assert!((&m * &inv).is_identity());
        assert!(inv.denominators_one());
    }

    #[test]
    fn singular_is_reported() {
        let m = Q::from_i64_rows(&[&[1, 2], &[2, 4]]).unwrap();
        assert!(matches!(m.inverse(), Err(Error::Singular)));
        assert_eq!(m.rank(), 1);
        let k = m.kernel();
        assert_eq!(k.len(), 1);
        assert!(m.mul_vec(&k[0]).unwrap().iter().all(|x| x.is_zero()));
    }

    #[test]
    fn float_det() {
        let m = Matrix::<f64>::from_i64_rows(&[&[0, 1], &[1, 0]]).unwrap();
        assert!((m.det().unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn stacking() {
        let a = Q::identity(2);
        let b = Q::zeros(1, 2);
        let v = Q::vstack(&[a.clone(), b]).unwrap();
        assert_eq!((v.rows(), v.cols()), (3, 2));
        let h = Q::hstack(&[a.clone(), a]).unwrap();
        assert_eq!((h.rows(), h.cols()), (2, 4));
    }

    #[test]
    fn json_round_trip() {
        let m = Q::from_rows(vec![vec![rat(1, 2), rat(-3, 1)]]).unwrap();
        assert_eq!(Q::from_json(&m.to_json()).unwrap(), m);
        assert!(matches!(
            Matrix::<f64>::from_json(&m.to_json()),
            Err(Error::BackendMismatch(_))
        ));
    }

    fn small_int_matrix(n: usize) -> impl Strategy<Value = Q> {
        proptest::collection::vec(-5i64..=5, n * n).prop_map(move |v| {
            Q::new(n, n, v.into_iter().map(Rational::from_i64).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn det_is_multiplicative(a in small_int_matrix(3), b in small_int_matrix(3)) {
            prop_assert_eq!((&a * &b).det().unwrap(), a.det().unwrap() * b.det().unwrap());
        }

        #[test]
        fn rank_nullity(a in proptest::collection::vec(-3i64..=3, 12)) {
            let m = Q::new(3, 4, a.into_iter().map(Rational::from_i64).collect()).unwrap();
            let k = m.kernel();
            prop_assert_eq!(m.rank() + k.len(), 4);
            for v in &k {
                prop_assert!(m.mul_vec(v).unwrap().iter().all(|x| x.is_zero()));
            }
        }
    }
}
