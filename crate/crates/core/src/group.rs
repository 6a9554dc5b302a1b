//! Named elements and subgroups of SL(n, R).
//!
//! Conventions: `a_tau` is diagonal with entries
//! `(e^{tau_1+...+tau_{n-1}}, e^{-tau_1}, ..., e^{-tau_{n-1}})`, `u(xi)` is the
//! identity with first row `(1, xi)`, and `sigma(g) = w (g^{-1})^T w^{-1}` with
//! `w` the flip `e_i -> e_{n+1-i}`.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{product, Rational, Scalar};

/// The diagonal flow parameter.
///
/// `LogRational(N)` stands for `tau_j = log N_j`; with it `a_tau` is a
/// rational matrix and the exact backend can be used. `Real` is float-only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauVector {
    LogRational(#[serde(with = "crate::scalar::rational_serde::vec")] Vec<Rational>),
    Real(Vec<f64>),
}

impl TauVector {
    pub fn from_n(ns: &[i64]) -> Self {
        TauVector::LogRational(ns.iter().map(|&v| Rational::from_i64(v)).collect())
    }

    pub fn zero(n: usize) -> Self {
        TauVector::Real(vec![0.0; n - 1])
    }

    /// Ambient dimension.
    pub fn n(&self) -> usize {
        match self {
            TauVector::LogRational(v) => v.len() + 1,
            TauVector::Real(v) => v.len() + 1,
        }
    }

    pub fn as_f64(&self) -> Vec<f64> {
        match self {
            TauVector::LogRational(v) => v.iter().map(|x| x.to_f64().ln()).collect(),
            TauVector::Real(v) => v.clone(),
        }
    }

    /// `tau_1 >= ... >= tau_{n-1} >= 0`.
    pub fn is_ordered(&self) -> bool {
        match self {
            TauVector::LogRational(v) => {
                v.windows(2).all(|w| w[0] >= w[1])
                    && v.last().is_none_or(|x| *x >= Rational::from_i64(1))
            }
            TauVector::Real(v) => {
                v.windows(2).all(|w| w[0] >= w[1]) && v.last().is_none_or(|x| *x >= 0.0)
            }
        }
    }

    /// The diagonal of `a_tau`.
    pub fn diagonal<T: Scalar>(&self) -> Result<Vec<T>> {
        match self {
            TauVector::LogRational(ns) => {
                if let Some(bad) = ns.iter().find(|x| **x <= Rational::zero()) {
                    return Err(Error::NonLogRational(format!("N = {bad} is not positive")));
                }
                let ns: Vec<T> = ns.iter().map(T::from_rational).collect();
                Ok(a_tau_diagonal(&ns))
            }
            TauVector::Real(taus) => {
                if T::is_exact() {
                    return Err(Error::NonLogRational(
                        "real tau vectors are only supported on the float backend".into(),
                    ));
                }
                let total: f64 = taus.iter().sum();
                let mut d = Vec::with_capacity(taus.len() + 1);
                d.push(float_entry(total.exp())?);
                for t in taus {
                    d.push(float_entry((-t).exp())?);
                }
                Ok(d)
            }
        }
    }
}

fn float_entry<T: Scalar>(x: f64) -> Result<T> {
    T::from_float(x).ok_or_else(|| Error::OutOfRange(format!("a_tau entry {x} is not finite")))
}

/// `(N_1 ... N_k, 1/N_1, ..., 1/N_k)`.
pub fn a_tau_diagonal<T: Scalar>(ns: &[T]) -> Vec<T> {
    let mut d = Vec::with_capacity(ns.len() + 1);
    d.push(product(ns));
    d.extend(ns.iter().map(|x| T::one() / x.clone()));
    d
}

pub fn make_a_tau<T: Scalar>(tau: &TauVector) -> Result<Matrix<T>> {
    Ok(Matrix::diag(&tau.diagonal::<T>()?))
}

/// `a_tau` for `tau_j = log N_j`, directly from the `N_j`.
pub fn a_tau_from_n<T: Scalar>(ns: &[T]) -> Matrix<T> {
    Matrix::diag(&a_tau_diagonal(ns))
}

pub fn make_u<T: Scalar>(xi: &[T]) -> Matrix<T> {
    let n = xi.len() + 1;
    let mut m = Matrix::identity(n);
    for (j, x) in xi.iter().enumerate() {
        m[(0, j + 1)] = x.clone();
    }
    m
}

/// Permutation matrix sending `e_j` to `e_{p[j]}` (0-based).
pub fn perm_matrix<T: Scalar>(p: &[usize]) -> Result<Matrix<T>> {
    let n = p.len();
    let mut seen = vec![false; n];
    for &i in p {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidPermutation(format!("{p:?}")));
        }
    }
    let mut m = Matrix::zeros(n, n);
    for (j, &i) in p.iter().enumerate() {
        m[(i, j)] = T::one();
    }
    Ok(m)
}

/// +1 for even permutations, -1 for odd ones.
pub fn permutation_sign(p: &[usize]) -> i64 {
    let mut seen = vec![false; p.len()];
    let mut sign = 1;
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            j = p[j];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// The flip `e_i -> e_{n+1-i}`.
pub fn flip<T: Scalar>(n: usize) -> Matrix<T> {
    let p: Vec<usize> = (0..n).rev().collect();
    perm_matrix(&p).expect("reversal is a permutation")
}

pub fn sigma<T: Scalar>(g: &Matrix<T>) -> Result<Matrix<T>> {
    let inv = g.inverse()?;
    let n = g.rows();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = inv[(n - 1 - j, n - 1 - i)].clone();
        }
    }
    Ok(out)
}

pub fn rho_pair<T: Scalar>(g: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
    Ok((g.clone(), sigma(g)?))
}

/// Membership in `Q_m`: zero bottom-left `(n-m) x m` block, identity
/// bottom-right block, unit determinant on the top-left `m x m` block.
pub fn in_q_m<T: Scalar>(g: &Matrix<T>, m: usize) -> Result<bool> {
    let n = g.rows();
    if !g.is_square() {
        return Err(Error::dim("Q_m membership of a non-square matrix"));
    }
    if m < 2 || m > n {
        return Err(Error::OutOfRange(format!("m = {m} outside 2..={n}")));
    }
    Ok(in_q_block(g, m))
}

/// Same block test without the range restriction; `m = 1` gives `Q_1`,
/// the first-row unipotent elements with a unit corner.
pub fn in_q_block<T: Scalar>(g: &Matrix<T>, m: usize) -> bool {
    let n = g.rows();
    let bottom_left = g.block(m, 0, n - m, m);
    let bottom_right = g.block(m, m, n - m, n - m);
    let top_left = g.block(0, 0, m, m);
    bottom_left.is_zero_matrix()
        && bottom_right.is_identity()
        && top_left
            .det()
            .is_ok_and(|d| (d - T::one()).is_negligible())
}

/// `sigma(Q_m)`: top-left identity of size `n-m`, zero bottom-left block,
/// unit determinant on the bottom-right `m x m` block.
pub fn in_q_m_prime<T: Scalar>(g: &Matrix<T>, m: usize) -> bool {
    let n = g.rows();
    let k = n - m;
    g.block(0, 0, k, k).is_identity()
        && g.block(k, 0, m, k).is_zero_matrix()
        && g.block(k, k, m, m)
            .det()
            .is_ok_and(|d| (d - T::one()).is_negligible())
}

/// Lower triangular with ones on the diagonal.
pub fn in_n_minus<T: Scalar>(g: &Matrix<T>) -> bool {
    g.is_lower_unipotent()
}
