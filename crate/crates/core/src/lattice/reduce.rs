//! Gram-Schmidt data and LLL reduction over a [`Scalar`].

use crate::error::{Error, Result};
use crate::matrix::{dot, norm_sq};
use crate::scalar::Scalar;

/// Gram-Schmidt coefficients of an ordered family of vectors:
/// `b*_i = b_i - sum_{j<i} mu[i][j] b*_j` and `norms[i] = |b*_i|^2`.
#[derive(Clone, Debug)]
pub struct GramSchmidt<T> {
    pub mu: Vec<Vec<T>>,
    pub norms: Vec<T>,
}

pub fn gram_schmidt<T: Scalar>(cols: &[Vec<T>]) -> Result<GramSchmidt<T>> {
    let n = cols.len();
    let mut stars: Vec<Vec<T>> = Vec::with_capacity(n);
    let mut mu = vec![vec![T::zero(); n]; n];
    let mut norms: Vec<T> = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = cols[i].clone();
        for j in 0..i {
            let m = dot(&cols[i], &stars[j]) / norms[j].clone();
            for (a, b) in v.iter_mut().zip(&stars[j]) {
                *a = a.clone() - m.clone() * b.clone();
            }
            mu[i][j] = m;
        }
        mu[i][i] = T::one();
        let b = norm_sq(&v);
        if b.is_zero() || (!T::is_exact() && !(b.to_f64() > 0.0)) {
            return Err(Error::Singular);
        }
        norms.push(b);
        stars.push(v);
    }
    Ok(GramSchmidt { mu, norms })
}

/// Reduced basis together with the integer change of basis:
/// `basis[j] = sum_i original[i] * transform[j][i]`.
#[derive(Clone, Debug)]
pub struct Reduced<T> {
    pub basis: Vec<Vec<T>>,
    pub transform: Vec<Vec<i64>>,
}

const MAX_SWAPS: usize = 100_000;

fn checked_axpy(dst: &mut [i64], r: i64, src: &[i64]) -> Result<()> {
    for (d, s) in dst.iter_mut().zip(src) {
        *d = r
            .checked_mul(*s)
            .and_then(|p| d.checked_sub(p))
            .ok_or_else(|| Error::OutOfRange("LLL transform overflowed i64".into()))?;
    }
    Ok(())
}

/// LLL with Lovasz constant `delta` on the given columns.
pub fn lll<T: Scalar>(cols: &[Vec<T>], delta: &T) -> Result<Reduced<T>> {
    let n = cols.len();
    let mut b = cols.to_vec();
    let mut u: Vec<Vec<i64>> = (0..n)
        .map(|j| (0..n).map(|i| i64::from(i == j)).collect())
        .collect();
    if n <= 1 {
        return Ok(Reduced { basis: b, transform: u });
    }
    let mut gs = gram_schmidt(&b)?;
    let mut k = 1;
    let mut swaps = 0;
    while k < n {
        for j in (0..k).rev() {
            let r = gs.mu[k][j]
                .round_i64()
                .ok_or_else(|| Error::OutOfRange("LLL coefficient overflowed i64".into()))?;
            if r == 0 {
                continue;
            }
            let rt = T::from_i64(r);
            let bj = b[j].clone();
            for (x, y) in b[k].iter_mut().zip(&bj) {
                *x = x.clone() - rt.clone() * y.clone();
            }
            let uj = u[j].clone();
            checked_axpy(&mut u[k], r, &uj)?;
            for i in 0..j {
                let m = gs.mu[j][i].clone();
                gs.mu[k][i] = gs.mu[k][i].clone() - rt.clone() * m;
            }
            gs.mu[k][j] = gs.mu[k][j].clone() - rt;
        }
        let m = gs.mu[k][k - 1].clone();
        let lovasz = gs.norms[k].clone() >= (delta.clone() - m.clone() * m) * gs.norms[k - 1].clone();
        if lovasz {
            k += 1;
        } else {
            b.swap(k, k - 1);
            u.swap(k, k - 1);
            gs = gram_schmidt(&b)?;
            k = (k - 1).max(1);
            swaps += 1;
            if swaps > MAX_SWAPS {
                if T::is_exact() {
                    return Err(Error::Internal("LLL did not terminate".into()));
                }
                log::warn!("float LLL stopped after {MAX_SWAPS} swaps");
                break;
            }
        }
    }
    Ok(Reduced { basis: b, transform: u })
}
