//! Exact constructions around `K_1`: the matrix `gamma`, its reduction by
//! a lower unipotent matrix, Hajós-type inclusions and the `K_1 x K_1`
//! witness, plus the solubility scan for non-integral window limits.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::diophantine::{dt_primal_soluble, WindowSpec};
use crate::error::{Error, Result};
use crate::group::{a_tau_from_n, in_q_m, perm_matrix, sigma};
use crate::lattice::{in_k1, Lattice};
use crate::matrix::Matrix;
use crate::scalar::{format_rational, product, rat, rational_from_f64, Rational};

fn check_ns(ns: &[i64]) -> Result<()> {
    if ns.is_empty() {
        return Err(Error::dim("need at least one N"));
    }
    if ns.iter().any(|&x| x < 1) {
        return Err(Error::OutOfRange(format!("N = {ns:?} must be positive integers")));
    }
    Ok(())
}

/// Row `i < k` has `N_k - 1, ..., N_{k-i+1} - 1` below the diagonal, the
/// diagonal entry `N_{k-i}`, zeros, and a final `1`; the last row is
/// `N_k - 1, ..., N_1 - 1, 1`.
pub fn gamma_matrix(ns: &[i64]) -> Result<Matrix<Rational>> {
    check_ns(ns)?;
    let k = ns.len();
    let n = k + 1;
    let col = |j: usize| ns[k - 1 - j];
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i.min(k) {
            g[(i, j)] = rat(col(j) - 1, 1);
        }
        if i < k {
            g[(i, i)] = rat(col(i), 1);
        }
        g[(i, k)] = rat(1, 1);
    }
    Ok(g)
}

/// `h gamma` with `h` lower unipotent and the certified shape
/// "positive diagonal with product 1 plus a free last column".
#[derive(Clone, Debug)]
pub struct GammaWitness {
    pub ns: Vec<i64>,
    pub gamma: Matrix<Rational>,
    pub h: Matrix<Rational>,
    pub reduced: Matrix<Rational>,
    pub diagonal: Vec<Rational>,
    /// `reversed` for `(N_k, ..., N_1, 1/prod N)`, `forward` for
    /// `(N_1, ..., N_k, 1/prod N)`, `both` when these coincide.
    pub ordering: String,
    pub certified: bool,
}

impl GammaWitness {
    pub fn to_json(&self) -> Value {
        json!({
            "N": self.ns,
            "gamma": self.gamma.to_json(),
            "h": self.h.to_json(),
            "h_gamma": self.reduced.to_json(),
            "diagonal": self.diagonal.iter().map(format_rational).collect::<Vec<_>>(),
            "ordering": self.ordering,
            "certified": self.certified,
        })
    }
}

/// Whether `m` is a positive diagonal with product 1 plus a last column.
pub fn is_diagonal_plus_last_column(m: &Matrix<Rational>) -> bool {
    let n = m.rows();
    if !m.is_square() || n == 0 {
        return false;
    }
    let zero = rat(0, 1);
    for i in 0..n {
        for j in 0..n - 1 {
            if i != j && m[(i, j)] != zero {
                return false;
            }
        }
    }
    let diag: Vec<Rational> = (0..n).map(|i| m[(i, i)].clone()).collect();
    diag.iter().all(|d| *d > zero) && product(&diag) == rat(1, 1)
}

/// Forward elimination of the first `n - 1` columns by row operations
/// `row_i -= c row_j` with `j < i`.
pub fn reduce_by_lower_unipotent(ns: &[i64], gamma: &Matrix<Rational>) -> Result<GammaWitness> {
    let n = gamma.rows();
    if !gamma.is_square() || n != ns.len() + 1 {
        return Err(Error::dim("gamma must be (k+1) x (k+1)"));
    }
    let mut m = gamma.clone();
    let mut h = Matrix::<Rational>::identity(n);
    let zero = rat(0, 1);
    for j in 0..n - 1 {
        let piv = m[(j, j)].clone();
        if piv == zero {
            return Err(Error::Internal(format!("zero pivot in column {j}")));
        }
        for i in j + 1..n {
            let c = &m[(i, j)] / &piv;
            if c == zero {
                continue;
            }
            for col in 0..n {
                let v = &c * &m[(j, col)];
                m[(i, col)] = &m[(i, col)] - v;
                let w = &c * &h[(j, col)];
                h[(i, col)] = &h[(i, col)] - w;
            }
        }
    }
    if h.try_mul(gamma)? != m || !h.is_lower_unipotent() {
        return Err(Error::Internal("elimination bookkeeping mismatch".into()));
    }
    let diagonal: Vec<Rational> = (0..n).map(|i| m[(i, i)].clone()).collect();
    let k = ns.len();
    let big = rat(1, 1) / rat(ns.iter().product(), 1);
    let mut reversed: Vec<Rational> = ns.iter().rev().map(|&x| rat(x, 1)).collect();
    reversed.push(big.clone());
    let mut forward: Vec<Rational> = ns.iter().map(|&x| rat(x, 1)).collect();
    forward.push(big);
    let ordering = match (diagonal == reversed, diagonal == forward) {
        (true, true) => "both",
        (true, false) => "reversed",
        (false, true) => "forward",
        (false, false) => "other",
    };
    let certified = gamma.det()? == rat(1, 1)
        && gamma.denominators_one()
        && is_diagonal_plus_last_column(&m)
        && k + 1 == n;
    Ok(GammaWitness {
        ns: ns.to_vec(),
        gamma: gamma.clone(),
        h,
        reduced: m,
        diagonal,
        ordering: ordering.into(),
        certified,
    })
}

/// `(w g w^{-1}) Z^n` has no nonzero point in the open unit cube.
pub fn hajos_inclusion_check(w: &[usize], g: &Matrix<Rational>) -> Result<bool> {
    if !g.is_square() || g.rows() != w.len() {
        return Err(Error::dim("permutation and matrix sizes differ"));
    }
    if !g.is_upper_triangular() || (0..g.rows()).any(|i| g[(i, i)] != rat(1, 1)) {
        return Err(Error::OutOfRange("g must be upper unipotent".into()));
    }
    let p = perm_matrix::<Rational>(w)?;
    let conj = p.try_mul(g)?.try_mul(&p.transpose())?;
    in_k1(&Lattice::new(conj)?)
}

/// `a_{tau_0} g = h gamma` with `g` in `Q_{m_1+1}`, `h` lower unipotent and
/// `gamma` integral, plus both `K_1` memberships of `rho(h) x_0`.
#[derive(Clone, Debug)]
pub struct K1Witness {
    pub n0: Vec<i64>,
    pub m1: usize,
    pub g: Matrix<Rational>,
    pub h: Matrix<Rational>,
    pub gamma: Matrix<Rational>,
    pub factorization_ok: bool,
    pub g_in_q: bool,
    pub h_in_k1: bool,
    pub sigma_h_in_k1: bool,
}

impl K1Witness {
    pub fn certified(&self) -> bool {
        self.factorization_ok && self.g_in_q && self.h_in_k1 && self.sigma_h_in_k1
    }

    pub fn to_json(&self) -> Value {
        json!({
            "N0": self.n0,
            "m1": self.m1,
            "g": self.g.to_json(),
            "h": self.h.to_json(),
            "gamma": self.gamma.to_json(),
            "factorization_ok": self.factorization_ok,
            "g_in_Q": self.g_in_q,
            "h_in_K1": self.h_in_k1,
            "sigma_h_in_K1": self.sigma_h_in_k1,
            "certified": self.certified(),
        })
    }
}

/// `tau_0` keeps the logs of `N_{m_1+1}, ..., N_k` and zeroes the rest.
pub fn tau0_windows(ns: &[i64], m1: usize) -> Result<Vec<i64>> {
    check_ns(ns)?;
    if m1 == 0 || m1 > ns.len() {
        return Err(Error::OutOfRange(format!("m1 = {m1} outside 1..={}", ns.len())));
    }
    Ok(ns
        .iter()
        .enumerate()
        .map(|(j, &x)| if j < m1 { 1 } else { x })
        .collect())
}

pub fn k1_witness(ns: &[i64], m1: usize) -> Result<K1Witness> {
    let n0 = tau0_windows(ns, m1)?;
    let gamma0 = gamma_matrix(&n0)?;
    let red = reduce_by_lower_unipotent(&n0, &gamma0)?;
    if !red.certified {
        return Err(Error::Internal("gamma reduction not certified".into()));
    }
    let h = sigma(&red.h)?;
    let gamma = sigma(&gamma0)?;
    let ns_r: Vec<Rational> = n0.iter().map(|&x| rat(x, 1)).collect();
    let a = a_tau_from_n(&ns_r);
    let hg = h.try_mul(&gamma)?;
    let g = a.inverse()?.try_mul(&hg)?;
    let factorization_ok = a.try_mul(&g)? == hg
        && h.is_lower_unipotent()
        && gamma.denominators_one()
        && gamma.det()? == rat(1, 1);
    let g_in_q = in_q_m(&g, m1 + 1)?;
    let h_in_k1 = in_k1(&Lattice::new(h.clone())?)?;
    let sigma_h_in_k1 = in_k1(&Lattice::new(sigma(&h)?)?)?;
    Ok(K1Witness {
        n0,
        m1,
        g,
        h,
        gamma,
        factorization_ok,
        g_in_q,
        h_in_k1,
        sigma_h_in_k1,
    })
}

/// `frac(j (sqrt 5 - 1)/2)`, `frac(j (sqrt 2 - 1))` for `j = 1..=count`,
/// rounded to doubles and read back as exact rationals with large
/// denominators.
pub fn kronecker_grid(count: usize) -> Vec<Vec<Rational>> {
    let slopes = [(5f64.sqrt() - 1.0) / 2.0, 2f64.sqrt() - 1.0];
    (1..=count)
        .map(|j| {
            slopes
                .iter()
                .map(|s| {
                    let x = (j as f64 * s).fract();
                    rational_from_f64(x).expect("finite")
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub n1: i64,
    #[serde(with = "crate::scalar::rational_serde::vec")]
    pub xi: Vec<Rational>,
    pub soluble: bool,
    pub witness: Option<Vec<i64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    #[serde(with = "crate::scalar::rational_serde")]
    pub n_fixed: Rational,
    #[serde(with = "crate::scalar::rational_serde")]
    pub mu: Rational,
    pub rows: Vec<ScanRow>,
    pub insoluble: usize,
    /// Least `mu` on the bisection lattice at which every point is
    /// soluble, if the bisection was requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<String>,
}

impl ScanReport {
    pub fn all_soluble(&self) -> bool {
        self.insoluble == 0
    }
}

fn scan_rows(n_fixed: &Rational, n1s: &[i64], grid: &[Vec<Rational>], mu: &Rational) -> Result<Vec<ScanRow>> {
    let jobs: Vec<(i64, &Vec<Rational>)> = n1s
        .iter()
        .flat_map(|&n1| grid.iter().map(move |xi| (n1, xi)))
        .collect();
    jobs.par_iter()
        .map(|&(n1, xi)| {
            if xi.len() != 2 {
                return Err(Error::dim("grid points must lie in the plane"));
            }
            let w = WindowSpec::new(vec![rat(n1, 1), n_fixed.clone()], mu.clone())?;
            let s = dt_primal_soluble(xi, &w)?;
            Ok(ScanRow {
                n1,
                xi: xi.clone(),
                soluble: s.soluble,
                witness: s.witness,
            })
        })
        .collect()
}

/// Decides the primal system with `N = (N_1, N_fixed)` over the grid.
/// Integral `N_fixed` is accepted so that controls can be run; the
/// bisection (when `bisect_steps > 0`) searches `[1/2, 1]`.
pub fn nonintegral_counterexample_scan(
    n_fixed: &Rational,
    n1s: &[i64],
    grid: &[Vec<Rational>],
    mu: &Rational,
    bisect_steps: usize,
) -> Result<ScanReport> {
    if *n_fixed < rat(1, 1) {
        return Err(Error::OutOfRange("N_fixed must be at least 1".into()));
    }
    let rows = scan_rows(n_fixed, n1s, grid, mu)?;
    let insoluble = rows.iter().filter(|r| !r.soluble).count();
    let threshold = if bisect_steps > 0 {
        Some(format_rational(&solubility_threshold(n_fixed, n1s, grid, bisect_steps)?))
    } else {
        None
    };
    Ok(ScanReport {
        n_fixed: n_fixed.clone(),
        mu: mu.clone(),
        rows,
        insoluble,
        threshold,
    })
}

/// Bisection for the least `mu` in `[1/2, 1]` (up to `2^-steps`) with
/// every grid point soluble; solubility is monotone in `mu`.
pub fn solubility_threshold(n_fixed: &Rational, n1s: &[i64], grid: &[Vec<Rational>], steps: usize) -> Result<Rational> {
    let all = |mu: &Rational| -> Result<bool> {
        Ok(scan_rows(n_fixed, n1s, grid, mu)?.iter().all(|r| r.soluble))
    };
    let mut lo = rat(1, 2);
    let mut hi = rat(1, 1);
    if all(&lo)? {
        return Ok(lo);
    }
    for _ in 0..steps {
        let mid = (&lo + &hi) / rat(2, 1);
        if all(&mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
