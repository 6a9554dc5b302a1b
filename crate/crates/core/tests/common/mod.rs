//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use latflow::scalar::rat;
use latflow::{Matrix, Rational};

/// Laplace expansion; fine for the small sizes used here.
pub fn laplace_det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = Rational::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Rational>> = m[1..]
            .iter()
            .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, v)| v.clone()).collect())
            .collect();
        let term = &m[0][j] * laplace_det(&minor);
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Inverse through the adjugate.
pub fn adjugate_inverse(m: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = m.len();
    let d = laplace_det(m);
    assert!(!d.is_zero(), "singular basis");
    let mut inv = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<Rational>> = (0..n)
                .filter(|&r| r != i)
                .map(|r| (0..n).filter(|&c| c != j).map(|c| m[r][c].clone()).collect())
                .collect();
            let cof = if n == 1 { Rational::one() } else { laplace_det(&minor) };
            let cof = if (i + j) % 2 == 0 { cof } else { -cof };
            inv[j][i] = cof / &d;
        }
    }
    inv
}

/// Cramer bound `|c_j| <= sum_i |B^{-1}_{ji}| b_i`.
pub fn cramer_ranges(basis: &[Vec<Rational>], bounds: &[Rational]) -> Vec<i64> {
    let inv = adjugate_inverse(basis);
    inv.iter()
        .map(|row| {
            let s = row.iter().zip(bounds).fold(Rational::zero(), |a, (x, b)| a + x.abs() * b);
            s.floor().to_integer().to_i64().unwrap()
        })
        .collect()
}

pub fn brute_volume(basis: &[Vec<Rational>], bounds: &[Rational]) -> f64 {
    cramer_ranges(basis, bounds)
        .iter()
        .map(|&r| (2 * r + 1) as f64)
        .product()
}

/// Every coefficient vector (origin included) whose point lies in the box.
pub fn brute_box_points(basis: &[Vec<Rational>], bounds: &[Rational], closed: &[bool]) -> BTreeSet<Vec<i64>> {
    let n = basis.len();
    let ranges = cramer_ranges(basis, bounds);
    let mut out = BTreeSet::new();
    let mut c: Vec<i64> = ranges.iter().map(|r| -r).collect();
    loop {
        let inside = (0..n).all(|i| {
            let x = (0..n).fold(Rational::zero(), |a, j| a + &basis[i][j] * Rational::from_integer(c[j].into()));
            let x = x.abs();
            if closed[i] {
                x <= bounds[i]
            } else {
                x < bounds[i]
            }
        });
        if inside {
            out.insert(c.clone());
        }
        let mut j = 0;
        loop {
            if j == n {
                return out;
            }
            if c[j] < ranges[j] {
                c[j] += 1;
                break;
            }
            c[j] = -ranges[j];
            j += 1;
        }
    }
}

/// No nonzero point in the open unit cube, by brute force.
pub fn brute_in_k1(basis: &Matrix<Rational>) -> bool {
    let n = basis.rows();
    let rows = basis.to_rows();
    brute_box_points(&rows, &vec![rat(1, 1); n], &vec![false; n]).len() == 1
}

/// `p/q` with `|p| <= h`, `1 <= q <= h`.
pub fn small_rational<R: Rng>(rng: &mut R, h: i64) -> Rational {
    rat(rng.gen_range(-h..=h), rng.gen_range(1..=h))
}

pub fn height(r: &Rational) -> i64 {
    r.numer().abs().to_i64().unwrap().max(r.denom().to_i64().unwrap())
}

/// Random det-1 rational matrix: signed permutation times diagonal scaling
/// times a unipotent triangle, with every entry of height at most `h`.
pub fn random_unimodular<R: Rng>(rng: &mut R, n: usize, h: i64) -> Matrix<Rational> {
    loop {
        let upper = rng.gen_bool(0.5);
        let mut t = vec![vec![Rational::zero(); n]; n];
        for (i, row) in t.iter_mut().enumerate() {
            row[i] = Rational::one();
            for (j, v) in row.iter_mut().enumerate() {
                if (upper && j > i) || (!upper && j < i) {
                    *v = small_rational(rng, h);
                }
            }
        }
        let d = rat(rng.gen_range(1..=3), rng.gen_range(1..=3));
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let mut rows: Vec<Vec<Rational>> = perm.iter().map(|&p| t[p].clone()).collect();
        for v in rows[0].iter_mut() {
            *v = &*v * &d;
        }
        for v in rows[1].iter_mut() {
            *v = &*v / &d;
        }
        if rng.gen_bool(0.5) {
            for v in rows[0].iter_mut() {
                *v = -v.clone();
            }
        }
        if laplace_det(&rows).is_negative() {
            for v in rows[n - 1].iter_mut() {
                *v = -v.clone();
            }
        }
        if rows.iter().flatten().all(|v| height(v) <= h) {
            return Matrix::from_rows(rows).unwrap();
        }
    }
}

/// Upper unipotent matrix with small rational entries.
pub fn random_upper_unipotent<R: Rng>(rng: &mut R, n: usize, h: i64) -> Matrix<Rational> {
    let mut m = Matrix::identity(n);
    for i in 0..n {
        for j in i + 1..n {
            m[(i, j)] = small_rational(rng, h);
        }
    }
    m
}

pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, rng.gen_range(0..=i));
    }
    p
}
