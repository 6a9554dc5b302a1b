//! Dirichlet-type inequality systems and their lattice reformulation.
//!
//! For `N = (N_1, ..., N_k)` and `xi` in `Q^k` the primal system asks for a
//! nonzero integer `(p, q_1, ..., q_k)` with
//! `|p + q.xi| <= mu / prod N` and `|q_j| < mu N_j`; it is soluble exactly
//! when `a_tau u(xi) Z^n` meets `B_mu` away from the origin. The dual system
//! asks for `(q, p_1, ..., p_k)` with `|q xi_k + p_k| <= mu / N_k`,
//! `|q xi_j + p_j| < mu / N_j` for `j < k` and `|q| < mu prod N`, which is
//! the same statement for `sigma(a_tau u(xi)) Z^n`.

use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SampleGrid;
use crate::group::{a_tau_from_n, make_u, sigma};
use crate::lattice::{least_sup_point, AxisBox, EnumOptions, Lattice};
use crate::matrix::Matrix;
use crate::scalar::{product, rational_serde, Rational, Scalar};

/// Polynomial curve `phi(s) = sum_j c_j s^j` on `[a, b]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    /// `coeffs[j]` is the vector `c_j` in `Q^k`.
    #[serde(with = "rational_serde::nested")]
    coeffs: Vec<Vec<Rational>>,
    #[serde(with = "rational_serde")]
    pub a: Rational,
    #[serde(with = "rational_serde")]
    pub b: Rational,
}

impl Curve {
    pub fn new(coeffs: Vec<Vec<Rational>>, a: Rational, b: Rational) -> Result<Self> {
        let k = coeffs.first().map_or(0, Vec::len);
        if k == 0 || coeffs.iter().any(|c| c.len() != k) {
            return Err(Error::dim("curve coefficients must be nonempty vectors of equal length"));
        }
        if a >= b {
            return Err(Error::OutOfRange(format!("empty interval [{a}, {b}]")));
        }
        Ok(Self { coeffs, a, b })
    }

    /// `s -> (s, s^2, ..., s^k)` on `[a, b]`.
    pub fn moment(k: usize, a: Rational, b: Rational) -> Result<Self> {
        let mut coeffs = vec![vec![Rational::zero(); k]; k + 1];
        for (j, c) in coeffs.iter_mut().enumerate().skip(1) {
            c[j - 1] = Rational::one();
        }
        Self::new(coeffs, a, b)
    }

    /// Parses `{"coeffs": [["c00", ...], ...], "a": "..", "b": ".."}` and
    /// rechecks the invariants.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s)?;
        Self::new(c.coeffs, c.a, c.b)
    }

    pub fn k(&self) -> usize {
        self.coeffs[0].len()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficient_vectors(&self) -> &[Vec<Rational>] {
        &self.coeffs
    }

    pub fn eval<T: Scalar>(&self, s: &T) -> Vec<T> {
        let mut out = vec![T::zero(); self.k()];
        for c in self.coeffs.iter().rev() {
            for (o, cj) in out.iter_mut().zip(c) {
                *o = o.clone() * s.clone() + T::from_rational(cj);
            }
        }
        out
    }

    pub fn derivative<T: Scalar>(&self, s: &T) -> Vec<T> {
        let mut out = vec![T::zero(); self.k()];
        for (j, c) in self.coeffs.iter().enumerate().skip(1).rev() {
            for (o, cj) in out.iter_mut().zip(c) {
                *o = o.clone() * s.clone() + T::from_rational(cj) * T::from_i64(j as i64);
            }
        }
        out
    }

    /// The columns `c_1, ..., c_d` span `R^k`.
    pub fn is_affine_full(&self) -> bool {
        if self.degree() == 0 {
            return false;
        }
        let m = Matrix::from_cols(&self.coeffs[1..]).expect("equal lengths");
        m.rank() == self.k()
    }
}

/// Window sizes `N` and shrink factor `mu`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    #[serde(with = "rational_serde::vec")]
    pub n: Vec<Rational>,
    #[serde(with = "rational_serde")]
    pub mu: Rational,
}

impl WindowSpec {
    pub fn new(n: Vec<Rational>, mu: Rational) -> Result<Self> {
        if n.is_empty() {
            return Err(Error::dim("at least one window size is required"));
        }
        if n.iter().any(|x| *x < Rational::one()) {
            return Err(Error::OutOfRange("window sizes must be at least 1".into()));
        }
        if mu <= Rational::zero() || mu > Rational::one() {
            return Err(Error::OutOfRange(format!("mu = {mu} outside (0, 1]")));
        }
        Ok(Self { n, mu })
    }

    pub fn k(&self) -> usize {
        self.n.len()
    }

    pub fn product(&self) -> Rational {
        product(&self.n)
    }
}

/// Decision plus a witness verified by substitution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Solubility {
    pub soluble: bool,
    /// `(p, q_1, ..., q_k)` for the primal system, `(q, p_1, ..., p_k)` for
    /// the dual one, `x` for linear forms.
    pub witness: Option<Vec<i64>>,
}

impl Solubility {
    fn insoluble() -> Self {
        Self {
            soluble: false,
            witness: None,
        }
    }

    fn with(witness: Vec<i64>) -> Self {
        Self {
            soluble: true,
            witness: Some(witness),
        }
    }
}

/// Nonzero point of least sup-norm, ties broken by coefficients.
fn least_point(lat: &Lattice<Rational>, bx: &AxisBox<Rational>) -> Result<Option<Vec<i64>>> {
    Ok(least_sup_point(lat, bx, &EnumOptions::default())?.map(|p| p.coeffs))
}

fn check_lengths(xi: &[Rational], w: &WindowSpec) -> Result<()> {
    if xi.len() != w.k() {
        return Err(Error::dim(format!("xi has {} entries, N has {}", xi.len(), w.k())));
    }
    Ok(())
}

fn to_i64(r: &Rational) -> Result<i64> {
    r.to_integer()
        .to_i64()
        .ok_or_else(|| Error::OutOfRange(format!("{r} does not fit in i64")))
}

/// Integers `p` with `|p + t| <= e` (closed) or `< e` (open).
fn integer_window(t: &Rational, e: &Rational, closed: bool) -> Result<(i64, i64)> {
    let lo = -t - e;
    let hi = -t + e;
    if closed {
        Ok((to_i64(&lo.ceil())?, to_i64(&hi.floor())?))
    } else {
        Ok((to_i64(&lo.floor())? + 1, to_i64(&hi.ceil())? - 1))
    }
}

/// Largest integer `c` with `c < x`, for `x > 0`.
fn strict_floor(x: &Rational) -> Result<i64> {
    Ok(to_i64(&x.ceil())? - 1)
}

fn dot_int(q: &[i64], xi: &[Rational]) -> Rational {
    q.iter()
        .zip(xi)
        .fold(Rational::zero(), |acc, (&a, x)| acc + x * Rational::from_i64(a))
}

/// Substitutes a primal witness `(p, q)` back into the inequalities.
pub fn check_primal_witness(xi: &[Rational], w: &WindowSpec, x: &[i64]) -> bool {
    if x.len() != w.k() + 1 || x.iter().all(|&v| v == 0) {
        return false;
    }
    let (p, q) = (x[0], &x[1..]);
    let first = (Rational::from_i64(p) + dot_int(q, xi)).abs() <= &w.mu / w.product();
    first
        && q
            .iter()
            .zip(&w.n)
            .all(|(&qj, nj)| Rational::from_i64(qj).abs() < &w.mu * nj)
}

/// Substitutes a dual witness `(q, p_1, ..., p_k)` back into the inequalities.
pub fn check_dual_witness(xi: &[Rational], w: &WindowSpec, x: &[i64]) -> bool {
    let k = w.k();
    if x.len() != k + 1 || x.iter().all(|&v| v == 0) {
        return false;
    }
    let q = Rational::from_i64(x[0]);
    let forms = (0..k).all(|j| {
        let v = (&q * &xi[j] + Rational::from_i64(x[j + 1])).abs();
        let bound = &w.mu / &w.n[j];
        if j == k - 1 {
            v <= bound
        } else {
            v < bound
        }
    });
    forms && q.abs() < &w.mu * w.product()
}

/// Decides the primal system by looping over `q` and solving for `p`.
pub fn dt_primal_direct(xi: &[Rational], w: &WindowSpec, budget: u64) -> Result<Solubility> {
    check_lengths(xi, w)?;
    let caps: Vec<i64> = w
        .n
        .iter()
        .map(|nj| strict_floor(&(&w.mu * nj)))
        .collect::<Result<_>>()?;
    let total = caps
        .iter()
        .try_fold(1u64, |acc, &c| acc.checked_mul(2 * c.max(0) as u64 + 1))
        .unwrap_or(u64::MAX);
    if total > budget {
        return Err(Error::NodeBudget(budget));
    }
    let eps = &w.mu / w.product();
    let mut q: Vec<i64> = caps.iter().map(|c| -c).collect();
    loop {
        let (lo, hi) = integer_window(&dot_int(&q, xi), &eps, true)?;
        let zero_q = q.iter().all(|&v| v == 0);
        let p = if zero_q {
            (lo..=hi).find(|&p| p != 0)
        } else {
            (lo <= hi).then_some(lo)
        };
        if let Some(p) = p {
            let mut x = vec![p];
            x.extend(&q);
            debug_assert!(check_primal_witness(xi, w, &x));
            return Ok(Solubility::with(x));
        }
        let mut i = 0;
        loop {
            if i == q.len() {
                return Ok(Solubility::insoluble());
            }
            if q[i] < caps[i] {
                q[i] += 1;
                break;
            }
            q[i] = -caps[i];
            i += 1;
        }
    }
}

/// Decides the dual system by looping over `q` and solving for each `p_j`.
pub fn dt_dual_direct(xi: &[Rational], w: &WindowSpec, budget: u64) -> Result<Solubility> {
    check_lengths(xi, w)?;
    let k = w.k();
    let cap = strict_floor(&(&w.mu * w.product()))?;
    if (2 * cap.max(0) as u64 + 1) > budget {
        return Err(Error::NodeBudget(budget));
    }
    let bounds: Vec<Rational> = w.n.iter().map(|nj| &w.mu / nj).collect();
    for q in -cap..=cap {
        let qr = Rational::from_i64(q);
        let mut windows = Vec::with_capacity(k);
        for j in 0..k {
            windows.push(integer_window(&(&qr * &xi[j]), &bounds[j], j == k - 1)?);
        }
        if windows.iter().any(|(lo, hi)| lo > hi) {
            continue;
        }
        let ps: Vec<i64> = if q != 0 {
            windows.iter().map(|&(lo, _)| lo).collect()
        } else {
            let Some(j) = windows.iter().position(|&(lo, hi)| lo < 0 || hi > 0) else {
                continue;
            };
            let mut ps = vec![0; k];
            ps[j] = if windows[j].1 > 0 { windows[j].1 } else { windows[j].0 };
            ps
        };
        let mut x = vec![q];
        x.extend(ps);
        debug_assert!(check_dual_witness(xi, w, &x));
        return Ok(Solubility::with(x));
    }
    Ok(Solubility::insoluble())
}

/// `a_tau u(xi) Z^n` with `tau_j = log N_j`.
pub fn primal_lattice(ns: &[Rational], xi: &[Rational]) -> Result<Lattice<Rational>> {
    if ns.len() != xi.len() {
        return Err(Error::dim("N and xi lengths differ"));
    }
    Lattice::new(&a_tau_from_n(ns) * &make_u(xi))
}

/// `sigma(a_tau u(xi)) Z^n`.
pub fn dual_lattice(ns: &[Rational], xi: &[Rational]) -> Result<Lattice<Rational>> {
    if ns.len() != xi.len() {
        return Err(Error::dim("N and xi lengths differ"));
    }
    Lattice::new(sigma(&(&a_tau_from_n(ns) * &make_u(xi)))?)
}

/// Decides the primal system through `K_mu` membership of the translate.
pub fn dt_primal_soluble(xi: &[Rational], w: &WindowSpec) -> Result<Solubility> {
    check_lengths(xi, w)?;
    let lat = primal_lattice(&w.n, xi)?;
    let bx = AxisBox::b_mu(w.k() + 1, w.mu.clone())?;
    match least_point(&lat, &bx)? {
        None => Ok(Solubility::insoluble()),
        Some(x) => {
            if !check_primal_witness(xi, w, &x) {
                return Err(Error::Internal(format!("primal witness {x:?} fails substitution")));
            }
            Ok(Solubility::with(x))
        }
    }
}

/// Decides the dual system through `K_mu` membership of the sigma-translate.
pub fn dt_dual_soluble(xi: &[Rational], w: &WindowSpec) -> Result<Solubility> {
    check_lengths(xi, w)?;
    let k = w.k();
    let lat = dual_lattice(&w.n, xi)?;
    let bx = AxisBox::b_mu(k + 1, w.mu.clone())?;
    match least_point(&lat, &bx)? {
        None => Ok(Solubility::insoluble()),
        Some(c) => {
            // sigma(u(xi)) carries -xi in its last column, so the lattice
            // coefficients are (-p_k, ..., -p_1, q).
            let mut x = vec![c[k]];
            x.extend((0..k).map(|j| -c[k - 1 - j]));
            if !check_dual_witness(xi, w, &x) {
                return Err(Error::Internal(format!("dual witness {x:?} fails substitution")));
            }
            Ok(Solubility::with(x))
        }
    }
}

/// Nonzero integer `x` with `|row_1 . x| <= mu alpha_1` and
/// `|row_i . x| < mu alpha_i` for `i >= 2`.
pub fn minkowski_soluble(
    phi: &Matrix<Rational>,
    alpha: &[Rational],
    mu: &Rational,
) -> Result<Solubility> {
    let n = phi.rows();
    if !phi.is_square() || alpha.len() != n {
        return Err(Error::dim("linear forms need a square matrix and one alpha per row"));
    }
    if phi.det()? != Rational::one() {
        return Err(Error::NotUnimodular("det of the linear forms must be 1".into()));
    }
    if alpha.iter().any(|a| *a <= Rational::zero()) || product(alpha) != Rational::one() {
        return Err(Error::OutOfRange("alpha must be positive with product 1".into()));
    }
    let scale: Vec<Rational> = alpha.iter().map(|a| a.recip()).collect();
    let lat = Lattice::new(&Matrix::diag(&scale) * phi)?;
    let bx = AxisBox::b_mu(n, mu.clone())?;
    Ok(match least_point(&lat, &bx)? {
        None => Solubility::insoluble(),
        Some(x) => {
            let vals = phi.mul_int_vec(&x)?;
            let ok = vals.iter().enumerate().all(|(i, v)| {
                let b = mu * &alpha[i];
                if i == 0 {
                    v.abs() <= b
                } else {
                    v.abs() < b
                }
            });
            if !ok {
                return Err(Error::Internal("linear-forms witness fails substitution".into()));
            }
            Solubility::with(x)
        }
    })
}

/// The displayed coordinates of `rho(a_tau u(xi))` applied to
/// `x = (p, q_1, ..., q_k)` (primal) or `x' = (p_k, ..., p_1, q)` (dual).
pub fn translate_vector(
    ns: &[Rational],
    xi: &[Rational],
    x: &[i64],
    dual: bool,
) -> Result<Vec<Rational>> {
    let k = ns.len();
    if xi.len() != k || x.len() != k + 1 {
        return Err(Error::dim("translate_vector length mismatch"));
    }
    let big = product(ns);
    let r = |v: i64| Rational::from_i64(v);
    if !dual {
        let mut out = vec![&big * (r(x[0]) + dot_int(&x[1..], xi))];
        out.extend((0..k).map(|j| r(x[j + 1]) / &ns[j]));
        Ok(out)
    } else {
        let q = r(x[k]);
        let mut out: Vec<Rational> = (0..k)
            .map(|row| {
                let j = k - 1 - row;
                &ns[j] * (&q * &xi[j] + r(x[row]))
            })
            .collect();
        out.push(q / big);
        Ok(out)
    }
}

/// Both routes, for both systems, agree.
pub fn correspondence_check(xi: &[Rational], w: &WindowSpec, budget: u64) -> Result<bool> {
    let primal_direct = dt_primal_direct(xi, w, budget)?.soluble;
    let dual_direct = dt_dual_direct(xi, w, budget)?.soluble;
    let primal_member = crate::lattice::in_k_mu(&primal_lattice(&w.n, xi)?, &w.mu)?;
    let dual_member = crate::lattice::in_k_mu(&dual_lattice(&w.n, xi)?, &w.mu)?;
    Ok(primal_direct == !primal_member && dual_direct == !dual_member)
}

#[derive(Clone, Debug, Serialize)]
pub struct WindowOutcome {
    #[serde(with = "rational_serde::vec")]
    pub n: Vec<Rational>,
    pub primal: Solubility,
    pub dual: Solubility,
}

impl WindowOutcome {
    /// The doubled translate leaves `K_mu x K_mu`.
    pub fn misses_window_pair(&self) -> bool {
        self.primal.soluble || self.dual.soluble
    }

    pub fn both_soluble(&self) -> bool {
        self.primal.soluble && self.dual.soluble
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleRecord {
    #[serde(with = "rational_serde")]
    pub s: Rational,
    pub outcomes: Vec<WindowOutcome>,
}

impl SampleRecord {
    /// Candidate for `E_mu` over the first `len` windows: every translate
    /// leaves `K_mu x K_mu`.
    pub fn candidate(&self, len: usize) -> bool {
        self.outcomes[..len].iter().all(WindowOutcome::misses_window_pair)
    }

    /// Both systems soluble at every one of the first `len` windows.
    pub fn always_both(&self, len: usize) -> bool {
        self.outcomes[..len].iter().all(WindowOutcome::both_soluble)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ImprovabilityReport {
    /// Fraction of samples that are `E_mu` candidates.
    pub fraction: f64,
    /// Fraction of samples where both systems are soluble at every window.
    pub fraction_both: f64,
    pub records: Vec<SampleRecord>,
}

pub fn evaluate_sample(s: &Rational, curve: &Curve, windows: &[Vec<Rational>], mu: &Rational) -> Result<SampleRecord> {
    let xi = curve.eval(s);
    let outcomes = windows
        .iter()
        .map(|n| {
            let w = WindowSpec::new(n.clone(), mu.clone())?;
            Ok(WindowOutcome {
                n: n.clone(),
                primal: dt_primal_soluble(&xi, &w)?,
                dual: dt_dual_soluble(&xi, &w)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleRecord {
        s: s.clone(),
        outcomes,
    })
}

/// Per-sample solubility of both systems for every listed window, on the
/// given grid. Samples are evaluated in parallel and returned in grid order.
pub fn improvability_fraction(
    curve: &Curve,
    windows: &[Vec<Rational>],
    mu: &Rational,
    samples: usize,
    grid: SampleGrid,
) -> Result<ImprovabilityReport> {
    if !curve.is_affine_full() {
        return Err(Error::NotAffineBasis("curve lies in a proper affine subspace".into()));
    }
    if windows.iter().any(|n| n.len() != curve.k()) {
        return Err(Error::dim("window size vectors must match the curve dimension"));
    }
    let points = grid.points(&curve.a, &curve.b, samples)?;
    let records = points
        .par_iter()
        .map(|s| evaluate_sample(s, curve, windows, mu))
        .collect::<Result<Vec<_>>>()?;
    let len = windows.len();
    let m = records.len() as f64;
    let fraction = records.iter().filter(|r| r.candidate(len)).count() as f64 / m;
    let fraction_both = records.iter().filter(|r| r.always_both(len)).count() as f64 / m;
    Ok(ImprovabilityReport {
        fraction,
        fraction_both,
        records,
    })
}
