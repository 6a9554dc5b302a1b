//! Exact verifiers for the subspace statements about `V0 + V-`.
//!
//! Every check reduces to a kernel intersection or a containment of
//! rational subspaces, so a pass is a proof for the given instance.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::diophantine::Curve;
use crate::error::{Error, Result};
use crate::group::make_u;
use crate::matrix::Matrix;
use crate::scalar::{format_rational, rat, Rational};

use super::growth::{split_spaces, GrowthSpec, Sign, Splitting};
use super::{generator_diagonal, MConfig, RepKind, RepSpace, Subspace};

/// One named exact check.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub dims: BTreeMap<String, usize>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool) -> Self {
        Self {
            name: name.into(),
            dims: BTreeMap::new(),
            pass,
            witness: None,
        }
    }

    fn dim(mut self, key: &str, d: usize) -> Self {
        self.dims.insert(key.into(), d);
        self
    }

    fn witness_from(mut self, s: &Subspace) -> Self {
        if let Some(v) = s.basis().first() {
            self.witness = Some(v.iter().map(format_rational).collect());
        }
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub rep: String,
    pub config: Vec<usize>,
    pub growth: String,
    pub basis: Vec<Vec<String>>,
    pub hypothesis_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub checks: Vec<Check>,
}

impl LemmaReport {
    fn new(lemma: &str, rep: &RepSpace, growth: &GrowthSpec, points: &[Vec<Rational>]) -> Self {
        Self {
            lemma: lemma.into(),
            rep: rep.to_string(),
            config: growth.config().m().to_vec(),
            growth: growth.describe(),
            basis: points
                .iter()
                .map(|p| p.iter().map(format_rational).collect())
                .collect(),
            hypothesis_dim: 0,
            note: None,
            checks: Vec::new(),
        }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }

    fn set_hypothesis(&mut self, h: &Subspace) {
        self.hypothesis_dim = h.dim();
        if h.is_zero() {
            self.note = Some("hypothesis space trivial".into());
        }
    }
}

fn check_rep(rep: &RepSpace, config: &MConfig) -> Result<()> {
    if rep.n() != config.n() {
        return Err(Error::dim(format!(
            "representation of SL({}) with a configuration for n = {}",
            rep.n(),
            config.n()
        )));
    }
    Ok(())
}

/// `|B| = dim + 1` and the differences `e - e_0` span `Q^dim`.
pub fn is_affine_basis(points: &[Vec<Rational>], dim: usize) -> bool {
    if points.len() != dim + 1 || points.iter().any(|p| p.len() != dim) {
        return false;
    }
    if dim == 0 {
        return true;
    }
    let diffs: Vec<Vec<Rational>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(&points[0]).map(|(a, b)| a - b).collect())
        .collect();
    Matrix::from_rows(diffs).is_ok_and(|m| m.rank() == dim)
}

fn require_affine_basis(points: &[Vec<Rational>], dim: usize) -> Result<()> {
    if is_affine_basis(points, dim) {
        Ok(())
    } else {
        Err(Error::NotAffineBasis(format!(
            "{} points do not form an affine basis of Q^{dim}",
            points.len()
        )))
    }
}

/// Random affine basis of `Q^dim` with numerators and denominators of
/// absolute value at most `height`.
pub fn random_affine_basis<R: Rng>(rng: &mut R, dim: usize, height: i64) -> Vec<Vec<Rational>> {
    loop {
        let pts: Vec<Vec<Rational>> = (0..=dim)
            .map(|_| {
                (0..dim)
                    .map(|_| rat(rng.gen_range(-height..=height), rng.gen_range(1..=height)))
                    .collect()
            })
            .collect();
        if is_affine_basis(&pts, dim) {
            return pts;
        }
    }
}

fn action_u(rep: &RepSpace, e: &[Rational]) -> Result<Matrix<Rational>> {
    if e.len() + 1 != rep.n() {
        return Err(Error::dim(format!("point of length {} in R^{}", e.len(), rep.n() - 1)));
    }
    rep.group_action(&make_u(e))
}

fn hypothesis_with(rep: &RepSpace, split: &Splitting, points: &[Vec<Rational>]) -> Result<Subspace> {
    let p = split.projection(Sign::Plus);
    let mut h = Subspace::full(rep.dim());
    for e in points {
        h = h.restricted_kernel(&p.try_mul(&action_u(rep, e)?)?)?;
    }
    Ok(h)
}

/// `{v : u(e) v in V0 + V- for every e in points}`.
pub fn hypothesis_subspace(rep: &RepSpace, growth: &GrowthSpec, points: &[Vec<Rational>]) -> Result<Subspace> {
    check_rep(rep, growth.config())?;
    let split = split_spaces(rep, growth)?;
    hypothesis_with(rep, &split, points)
}

fn pad(e: &[Rational], n1: usize) -> Vec<Rational> {
    let mut v = e.to_vec();
    v.resize(n1, rat(0, 1));
    v
}

/// Single generator `A = m E_11 - sum_{j<=m+1} E_jj`, points of `Q^m`
/// embedded in `Q^{n-1}`: `pi_0(u(e) w) != 0` for all nonzero `w` in
/// the hypothesis space.
pub fn basic_lemma1_verify(rep: &RepSpace, m: usize, points: &[Vec<Rational>]) -> Result<LemmaReport> {
    let config = MConfig::new(rep.n(), vec![m])?;
    require_affine_basis(points, m)?;
    let growth = GrowthSpec::linear(config);
    let embedded: Vec<Vec<Rational>> = points.iter().map(|e| pad(e, rep.n() - 1)).collect();
    let split = split_spaces(rep, &growth)?;
    let h = hypothesis_with(rep, &split, &embedded)?;
    let mut report = LemmaReport::new("basic-lemma-1", rep, &growth, &embedded);
    report.set_hypothesis(&h);
    let p0 = split.projection(Sign::Zero);
    for (j, e) in embedded.iter().enumerate() {
        let k = h.restricted_kernel(&p0.try_mul(&action_u(rep, e)?)?)?;
        report.checks.push(
            Check::new(format!("pi0-nonvanishing[{j}]"), k.is_zero())
                .dim("hypothesis", h.dim())
                .dim("kernel", k.dim())
                .witness_from(&k),
        );
    }
    Ok(report)
}

/// The two conclusions for a multi-layer growth sequence, without the
/// affine-basis precondition. Used directly for negative controls.
pub fn basic_lemma2_on_points(rep: &RepSpace, growth: &GrowthSpec, points: &[Vec<Rational>]) -> Result<LemmaReport> {
    check_rep(rep, growth.config())?;
    if growth.k() < 2 {
        return Err(Error::BadConfig("the second lemma needs at least two layers".into()));
    }
    let split = split_spaces(rep, growth)?;
    let prime = split_spaces(rep, &growth.truncate(growth.k() - 1)?)?;
    let h = hypothesis_with(rep, &split, points)?;
    let mut report = LemmaReport::new("basic-lemma-2", rep, growth, points);
    report.set_hypothesis(&h);
    let target = prime.non_expanding();
    let p00 = split.zero_weight_projection();
    let p00_prime = prime.zero_weight_projection();
    for (j, e) in points.iter().enumerate() {
        let u = action_u(rep, e)?;
        let image = h.image(&u)?;
        let contained = target.contains(&image);
        let mut c = Check::new(format!("truncated-non-expanding[{j}]"), contained)
            .dim("hypothesis", h.dim())
            .dim("target", target.dim());
        if !contained {
            let bad = h.restricted_kernel(&prime.projection(Sign::Plus).try_mul(&u)?)?;
            let escape = (0..h.dim()).find(|&i| !bad.contains_vector(&h.basis()[i]));
            if let Some(i) = escape {
                c = c.witness_from(&Subspace::span(h.ambient(), &[h.basis()[i].clone()])?);
            }
        }
        report.checks.push(c);
        let k = h.restricted_kernel(&p00.try_mul(&u)?)?;
        let image = k.image(&p00_prime.try_mul(&u)?)?;
        let mut c = Check::new(format!("zero-weight-transfer[{j}]"), image.is_zero())
            .dim("kernel", k.dim())
            .dim("image", image.dim());
        if !image.is_zero() {
            let w = k
                .basis()
                .iter()
                .find(|v| p00_prime.try_mul(&u).and_then(|m| m.mul_vec(v)).is_ok_and(|x| x.iter().any(|a| a != &rat(0, 1))))
                .cloned();
            if let Some(w) = w {
                c = c.witness_from(&Subspace::span(h.ambient(), &[w])?);
            }
        }
        report.checks.push(c);
    }
    Ok(report)
}

pub fn basic_lemma2_verify(rep: &RepSpace, growth: &GrowthSpec, points: &[Vec<Rational>]) -> Result<LemmaReport> {
    if growth.k() < 2 {
        return Err(Error::BadConfig("the second lemma needs at least two layers".into()));
    }
    require_affine_basis(points, rep.n() - 1)?;
    basic_lemma2_on_points(rep, growth, points)
}

/// `pi_0(u(e) v) != 0` on the hypothesis space, for both the projection
/// onto the zero weight space and onto `V0`; no precondition on `points`.
pub fn cor_main_on_points(rep: &RepSpace, growth: &GrowthSpec, points: &[Vec<Rational>]) -> Result<LemmaReport> {
    check_rep(rep, growth.config())?;
    let split = split_spaces(rep, growth)?;
    let h = hypothesis_with(rep, &split, points)?;
    let mut report = LemmaReport::new("cor-main", rep, growth, points);
    report.set_hypothesis(&h);
    let p00 = split.zero_weight_projection();
    let p0 = split.projection(Sign::Zero);
    for (j, e) in points.iter().enumerate() {
        let u = action_u(rep, e)?;
        for (name, p) in [("zero-weight", &p00), ("bounded", &p0)] {
            let k = h.restricted_kernel(&p.try_mul(&u)?)?;
            report.checks.push(
                Check::new(format!("{name}-nonvanishing[{j}]"), k.is_zero())
                    .dim("hypothesis", h.dim())
                    .dim("kernel", k.dim())
                    .witness_from(&k),
            );
        }
    }
    Ok(report)
}

pub fn cor_main_verify(rep: &RepSpace, growth: &GrowthSpec, points: &[Vec<Rational>]) -> Result<LemmaReport> {
    require_affine_basis(points, rep.n() - 1)?;
    cor_main_on_points(rep, growth, points)
}

/// `omega(w)`: identity plus the block `w` in rows `2..=m_k+1` and the
/// remaining columns, with `w` solving `q(e)^T w = q_perp(e)^T`.
pub fn omega_straighten(config: &MConfig, points: &[Vec<Rational>]) -> Result<Matrix<Rational>> {
    let n = config.n();
    let mk = config.last();
    if points.len() != mk || points.iter().any(|e| e.len() + 1 != n) {
        return Err(Error::dim(format!("need {mk} points of Q^{}", n - 1)));
    }
    let q = Matrix::from_rows(points.iter().map(|e| e[..mk].to_vec()).collect())?;
    let mut omega = Matrix::identity(n);
    if mk + 1 < n {
        let p = Matrix::from_rows(points.iter().map(|e| e[mk..].to_vec()).collect())?;
        let w = q.inverse()?.try_mul(&p)?;
        omega.set_block(1, mk + 1, &w);
    } else if q.det()? == rat(0, 1) {
        return Err(Error::Singular);
    }
    let inv = omega.inverse()?;
    for e in points {
        let lhs = omega.try_mul(&make_u(e))?.try_mul(&inv)?;
        if lhs != make_u(&pad(&e[..mk], n - 1)) {
            return Err(Error::Internal("straightening failed the conjugation check".into()));
        }
    }
    Ok(omega)
}

/// `{1/3, 1, 5/2, 7}^k`.
pub fn default_t_grid(k: usize) -> Vec<Vec<Rational>> {
    let vals = [rat(1, 3), rat(1, 1), rat(5, 2), rat(7, 1)];
    let mut grid = vec![Vec::new()];
    for _ in 0..k {
        grid = grid
            .into_iter()
            .flat_map(|t: Vec<Rational>| {
                vals.iter().map(move |v| {
                    let mut t = t.clone();
                    t.push(v.clone());
                    t
                })
            })
            .collect();
    }
    grid
}

fn pairing(mu: &[i64], t: &[Rational]) -> Rational {
    mu.iter().zip(t).fold(rat(0, 1), |acc, (m, x)| acc + rat(*m, 1) * x)
}

/// Decomposes a wedge power into the pieces `wedge^a U ^ e_J` with
/// `U = span(e_1..e_{m_k+1})` and checks the scalar identity for the
/// central part and the order equivalence on every piece.
pub fn positivity_check(rep: &RepSpace, config: &MConfig, grid: &[Vec<Rational>]) -> Result<LemmaReport> {
    check_rep(rep, config)?;
    if !matches!(rep.kind(), RepKind::Wedge { .. }) {
        return Err(Error::Unsupported("positivity decomposition needs a wedge power".into()));
    }
    let k = config.k();
    if k < 2 {
        return Err(Error::BadConfig("positivity needs at least two layers".into()));
    }
    if grid.iter().any(|t| t.len() != k || t.iter().any(|x| *x <= rat(0, 1))) {
        return Err(Error::OutOfRange("grid points must be positive k-tuples".into()));
    }
    let growth = GrowthSpec::linear(config.clone());
    let mut report = LemmaReport::new("positivity", rep, &growth, &[]);
    let mk = config.last();
    let u_size = mk + 1;
    let ak: Vec<Rational> = generator_diagonal(config, k - 1)?;
    let weights = super::weight_table(rep, config)?;

    for l in 0..k - 1 {
        let ml = config.m()[l];
        let al: Vec<Rational> = generator_diagonal(config, l)?;
        let ratio = rat(ml as i64 + 1, mk as i64 + 1);
        let expected = rat(ml as i64 - mk as i64, mk as i64 + 1);
        let central: Vec<Rational> = al.iter().zip(&ak).map(|(a, b)| a - &ratio * b).collect();
        let ok = central[..u_size].iter().all(|x| *x == expected);
        report
            .checks
            .push(Check::new(format!("central-scalar[{l}]"), ok).dim("u", u_size));
    }

    let mut pieces: BTreeMap<(usize, Vec<usize>), Vec<usize>> = BTreeMap::new();
    for (i, s) in rep.wedge_subsets().iter().enumerate() {
        let a = s.iter().filter(|&&x| x < u_size).count();
        let j: Vec<usize> = s.iter().copied().filter(|&x| x >= u_size).collect();
        pieces.entry((a, j)).or_default().push(i);
    }
    for ((a, j), members) in &pieces {
        let label = format!(
            "piece[a={a},J={}]",
            j.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join("")
        );
        let mut delta: Vec<&Vec<i64>> = members.iter().map(|&i| &weights[i]).collect();
        delta.sort();
        delta.dedup();
        let mut ok = true;
        let mut witness = None;
        // The central part z(t') must act on the piece by a scalar.
        for l in 0..k - 1 {
            let ratio = rat(config.m()[l] as i64 + 1, mk as i64 + 1);
            let vals: Vec<Rational> = members
                .iter()
                .map(|&i| rat(weights[i][l], 1) - &ratio * rat(weights[i][k - 1], 1))
                .collect();
            if vals.windows(2).any(|w| w[0] != w[1]) {
                ok = false;
            }
        }
        'outer: for t in grid {
            let tp = &t[..k - 1];
            for mu in &delta {
                for nu in &delta {
                    let full = pairing(mu, t) >= pairing(nu, t);
                    let last = mu[k - 1] >= nu[k - 1];
                    let trunc = pairing(&mu[..k - 1], tp) >= pairing(&nu[..k - 1], tp);
                    if full != last || last != trunc {
                        ok = false;
                        witness = Some(vec![
                            format!("{mu:?}"),
                            format!("{nu:?}"),
                            t.iter().map(format_rational).collect::<Vec<_>>().join(","),
                        ]);
                        break 'outer;
                    }
                }
            }
        }
        let mut c = Check::new(label, ok).dim("piece", members.len()).dim("weights", delta.len());
        c.witness = witness;
        report.checks.push(c);
    }
    Ok(report)
}

/// Lie algebra generators of `Q_{m1+1}`: the `sl(m1+1)` block and the
/// top-right block `E_pq`, `p <= m1 < q` (0-based).
pub fn q_generators(n: usize, m1: usize) -> Result<Vec<Matrix<Rational>>> {
    if m1 == 0 || m1 >= n {
        return Err(Error::OutOfRange(format!("m1 = {m1} outside 1..{n}")));
    }
    let m = m1 + 1;
    let unit = |p: usize, q: usize| {
        let mut e = Matrix::zeros(n, n);
        e[(p, q)] = rat(1, 1);
        e
    };
    let mut out = Vec::new();
    for p in 0..m {
        for q in 0..n {
            if p != q {
                out.push(unit(p, q));
            }
        }
    }
    for i in 0..m - 1 {
        let mut h = unit(i, i);
        h[(i + 1, i + 1)] = rat(-1, 1);
        out.push(h);
    }
    Ok(out)
}

pub fn fixed_subspace_q(rep: &RepSpace, m1: usize) -> Result<Subspace> {
    let mut s = Subspace::full(rep.dim());
    for g in q_generators(rep.n(), m1)? {
        s = s.restricted_kernel(&rep.lie_action(&g)?)?;
    }
    Ok(s)
}

pub fn stabilizer_check(rep: &RepSpace, v: &[Rational], m1: usize) -> Result<bool> {
    if v.len() != rep.dim() {
        return Err(Error::dim("vector length differs from the representation dimension"));
    }
    Ok(fixed_subspace_q(rep, m1)?.contains_vector(v))
}

/// Polynomial degree of `s -> rho(u(phi(s)))` per degree of `phi`.
fn unipotent_degree(rep: &RepSpace) -> usize {
    match rep.kind() {
        RepKind::Trivial => 0,
        RepKind::Wedge { .. } => 1,
        RepKind::Adjoint => 2,
    }
}

/// Samples a full-span polynomial curve at enough equispaced points that
/// the sampled hypothesis equals the one over the whole interval, and
/// checks it lies in the `Q_{m1+1}`-fixed vectors.
pub fn curve_containment_verify(rep: &RepSpace, growth: &GrowthSpec, curve: &Curve, samples: usize) -> Result<LemmaReport> {
    check_rep(rep, growth.config())?;
    if curve.k() + 1 != rep.n() || !curve.is_affine_full() {
        return Err(Error::NotAffineBasis(
            "curve must lie in R^{n-1} and span it affinely".into(),
        ));
    }
    let needed = (unipotent_degree(rep) * curve.degree() + 1).max(rep.n());
    let samples = samples.max(needed);
    let width = &curve.b - &curve.a;
    let points: Vec<Vec<Rational>> = (0..samples)
        .map(|j| curve.eval(&(&curve.a + &width * rat(j as i64, samples as i64))))
        .collect();
    let h = hypothesis_subspace(rep, growth, &points)?;
    let m1 = growth.config().m()[0];
    let fixed = fixed_subspace_q(rep, m1)?;
    let mut report = LemmaReport::new("q-fixed-containment", rep, growth, &points);
    report.set_hypothesis(&h);
    let inside = fixed.contains(&h);
    let mut c = Check::new("hypothesis-in-fixed", inside)
        .dim("hypothesis", h.dim())
        .dim("fixed", fixed.dim())
        .dim("samples", samples);
    if !inside {
        if let Some(v) = h.basis().iter().find(|v| !fixed.contains_vector(v)) {
            c = c.witness_from(&Subspace::span(h.ambient(), std::slice::from_ref(v))?);
        }
    }
    report.checks.push(c);
    Ok(report)
}

/// Every verifier on `trials` random affine bases of height `height`.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub rep: String,
    pub config: Vec<usize>,
    pub growth: String,
    pub trials: usize,
    pub reports: Vec<LemmaReport>,
    pub skipped: Vec<String>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(LemmaReport::pass)
    }

    pub fn failures(&self) -> usize {
        self.reports.iter().map(LemmaReport::failures).sum()
    }

    pub fn check_count(&self) -> usize {
        self.reports.iter().map(|r| r.checks.len()).sum()
    }
}

/// Runs the first lemma for every layer size, the second lemma (two or
/// more layers), the corollary, the positivity decomposition (wedge powers,
/// two or more layers) and the fixed-vector containment for the moment
/// curve.
pub fn lemma_suite<R: Rng>(rep: &RepSpace, growth: &GrowthSpec, trials: usize, height: i64, rng: &mut R) -> Result<SuiteReport> {
    check_rep(rep, growth.config())?;
    let config = growth.config();
    let dim = rep.n() - 1;
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for _ in 0..trials {
        for &m in config.m() {
            let b = random_affine_basis(rng, m, height);
            reports.push(basic_lemma1_verify(rep, m, &b)?);
        }
        let b = random_affine_basis(rng, dim, height);
        if growth.k() >= 2 {
            reports.push(basic_lemma2_verify(rep, growth, &b)?);
        }
        reports.push(cor_main_verify(rep, growth, &b)?);
    }
    if growth.k() < 2 {
        skipped.push("basic-lemma-2: single layer".into());
    }
    match (rep.kind(), growth.k() >= 2) {
        (RepKind::Wedge { .. }, true) => reports.push(positivity_check(rep, config, &default_t_grid(growth.k()))?),
        (RepKind::Wedge { .. }, false) => skipped.push("positivity: single layer".into()),
        _ => skipped.push("positivity: not a wedge power".into()),
    }
    let curve = Curve::moment(dim, rat(0, 1), rat(1, 1))?;
    reports.push(curve_containment_verify(rep, growth, &curve, 0)?);
    Ok(SuiteReport {
        rep: rep.to_string(),
        config: config.m().to_vec(),
        growth: growth.describe(),
        trials,
        reports,
        skipped,
    })
}
