//! Exact subspaces of `Q^d`, stored as a reduced row-echelon basis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Rational;

/// Span of `basis` inside `Q^ambient`. The basis is the nonzero rows of
/// a reduced row-echelon form, so equal subspaces compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subspace {
    ambient: usize,
    #[serde(with = "crate::scalar::rational_serde::nested")]
    basis: Vec<Vec<Rational>>,
}

impl Subspace {
    pub fn span(ambient: usize, vectors: &[Vec<Rational>]) -> Result<Self> {
        if vectors.iter().any(|v| v.len() != ambient) {
            return Err(Error::dim("spanning vector of the wrong length"));
        }
        if vectors.is_empty() {
            return Ok(Self::zero(ambient));
        }
        let (r, pivots) = Matrix::from_rows(vectors.to_vec())?.rref();
        Ok(Self {
            ambient,
            basis: (0..pivots.len()).map(|i| r.row(i).to_vec()).collect(),
        })
    }

    pub fn zero(ambient: usize) -> Self {
        Self {
            ambient,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Self::coordinate(ambient, &(0..ambient).collect::<Vec<_>>())
    }

    /// Span of the standard basis vectors with the given indices.
    pub fn coordinate(ambient: usize, idx: &[usize]) -> Self {
        let mut idx = idx.to_vec();
        idx.sort_unstable();
        idx.dedup();
        Self {
            ambient,
            basis: idx
                .iter()
                .map(|&i| {
                    let mut v = vec![Rational::from_integer(0.into()); ambient];
                    v[i] = Rational::from_integer(1.into());
                    v
                })
                .collect(),
        }
    }

    /// Right null space of `m`.
    pub fn kernel_of(m: &Matrix<Rational>) -> Result<Self> {
        Self::span(m.cols(), &m.kernel())
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    /// Basis vectors as the columns of an `ambient x dim` matrix.
    pub fn matrix(&self) -> Matrix<Rational> {
        if self.basis.is_empty() {
            return Matrix::zeros(self.ambient, 0);
        }
        Matrix::from_cols(&self.basis).expect("consistent basis lengths")
    }

    pub fn contains_vector(&self, v: &[Rational]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        Matrix::from_rows(rows).is_ok_and(|m| m.rank() == self.dim())
    }

    pub fn contains(&self, other: &Subspace) -> bool {
        other.basis.iter().all(|v| self.contains_vector(v))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Self> {
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        Self::span(self.ambient, &rows)
    }

    /// `{v in self : m v = 0}`.
    pub fn restricted_kernel(&self, m: &Matrix<Rational>) -> Result<Self> {
        if m.cols() != self.ambient {
            return Err(Error::dim("map does not act on the ambient space"));
        }
        if self.is_zero() {
            return Ok(self.clone());
        }
        let b = self.matrix();
        let coeffs = m.try_mul(&b)?.kernel();
        let vectors = coeffs
            .iter()
            .map(|c| b.mul_vec(c))
            .collect::<Result<Vec<_>>>()?;
        Self::span(self.ambient, &vectors)
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Self> {
        if other.ambient != self.ambient {
            return Err(Error::dim("subspaces of different spaces"));
        }
        let annihilator = Self::kernel_of(&other.row_matrix())?;
        if annihilator.is_zero() {
            return Ok(self.clone());
        }
        self.restricted_kernel(&annihilator.row_matrix())
    }

    /// `m(self)`.
    pub fn image(&self, m: &Matrix<Rational>) -> Result<Self> {
        let vectors = self
            .basis
            .iter()
            .map(|v| m.mul_vec(v))
            .collect::<Result<Vec<_>>>()?;
        Self::span(m.rows(), &vectors)
    }

    fn row_matrix(&self) -> Matrix<Rational> {
        if self.basis.is_empty() {
            return Matrix::zeros(1, self.ambient);
        }
        Matrix::from_rows(self.basis.clone()).expect("consistent basis lengths")
    }
}
