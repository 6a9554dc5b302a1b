//! Monte Carlo scans along a diverging sequence.

use rayon::prelude::*;
use serde::Serialize;

use super::measure::{empirical_measure, tau_vector_for, BasePoint};
use super::sequence::{layered_presentation, SequenceSpec};
use crate::diophantine::{improvability_fraction, Curve, SampleRecord};
use crate::error::{Error, Result};
use crate::grid::SampleGrid;
use crate::group::make_u;
use crate::lattice::{siegel_transform, sup_shortest, Lattice, Tent};
use crate::matrix::Matrix;
use crate::scalar::{format_rational, rational_to_f64, Rational, Scalar};

/// Shared inputs of the sequence scans.
#[derive(Clone, Debug)]
pub struct ScanSetup {
    pub curve: Curve,
    pub sequence: SequenceSpec,
    pub base: BasePoint,
    pub samples: usize,
    pub grid: SampleGrid,
}

impl ScanSetup {
    pub fn new(curve: Curve, sequence: SequenceSpec, base: BasePoint, samples: usize, grid: SampleGrid) -> Result<Self> {
        let n = curve.k() + 1;
        if sequence.n != n || base.n() != n {
            return Err(Error::dim(format!(
                "curve gives n = {n}, sequence n = {}, base point n = {}",
                sequence.n,
                base.n()
            )));
        }
        if samples == 0 {
            return Err(Error::OutOfRange("at least one sample is required".into()));
        }
        Ok(Self {
            curve,
            sequence,
            base,
            samples,
            grid,
        })
    }

    fn lattices<T: Scalar>(&self, i: u64) -> Result<Vec<Lattice<T>>> {
        let tau = tau_vector_for::<T>(&self.sequence.tau_at(i))?;
        let m = empirical_measure::<T>(&self.curve, &tau, self.base.at(i), self.samples, false, self.grid)?;
        Ok(m.points.into_iter().map(|p| p.lattice).collect())
    }
}

fn mean_and_stderr(v: &[f64]) -> (f64, f64) {
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct EquidistRow {
    pub i: u64,
    pub samples: usize,
    pub mean: f64,
    pub std_err: f64,
    pub reference: f64,
    pub gap: f64,
    pub rel_gap: f64,
}

/// Siegel averages over `mu_i` against `int f`.
pub fn equidistribution_siegel<T: Scalar>(setup: &ScanSetup, f: &Tent<T>) -> Result<Vec<EquidistRow>> {
    let reference = f.integral().to_f64();
    setup
        .sequence
        .indices()
        .map(|i| {
            let vals = setup
                .lattices::<T>(i)?
                .par_iter()
                .map(|l| siegel_transform(l, f).map(|v| v.to_f64()))
                .collect::<Result<Vec<_>>>()?;
            let (mean, std_err) = mean_and_stderr(&vals);
            let gap = (mean - reference).abs();
            Ok(EquidistRow {
                i,
                samples: vals.len(),
                mean,
                std_err,
                reference,
                gap,
                rel_gap: gap / reference.abs(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct NondivRow {
    pub i: u64,
    pub eps: f64,
    pub fraction: f64,
    pub min_shortest: f64,
}

/// Fractions of samples whose shortest vector has sup-norm below `eps`.
pub fn nondivergence_scan<T: Scalar>(setup: &ScanSetup, eps: &[f64]) -> Result<Vec<NondivRow>> {
    let mut rows = Vec::new();
    for i in setup.sequence.indices() {
        let short = setup
            .lattices::<T>(i)?
            .par_iter()
            .map(|l| sup_shortest(l).map(|v| v.to_f64()))
            .collect::<Result<Vec<_>>>()?;
        let min_shortest = short.iter().copied().fold(f64::INFINITY, f64::min);
        for &e in eps {
            let hits = short.iter().filter(|&&x| x < e).count();
            rows.push(NondivRow {
                i,
                eps: e,
                fraction: hits as f64 / short.len() as f64,
                min_shortest,
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct ImprovRow {
    pub mu: String,
    pub prefix: usize,
    pub candidates: usize,
    pub samples: usize,
    pub fraction: f64,
}

#[derive(Clone, Debug)]
pub struct ImprovabilityScan {
    pub rows: Vec<ImprovRow>,
    /// Per-sample outcomes for every `mu`, in the order of `rows`' `mu`s.
    pub records: Vec<(Rational, Vec<SampleRecord>)>,
}

impl ImprovabilityScan {
    /// Candidate fractions are nonincreasing in the prefix length.
    pub fn is_monotone(&self) -> bool {
        self.rows
            .windows(2)
            .filter(|w| w[0].mu == w[1].mu)
            .all(|w| w[1].candidates <= w[0].candidates)
    }
}

/// Fraction of samples whose doubled translate leaves `K_mu x K_mu` at every
/// one of the first `L` windows, for `L = 0..=windows.len()`.
pub fn improvability_scan(
    curve: &Curve,
    windows: &[Vec<Rational>],
    mus: &[Rational],
    samples: usize,
    grid: SampleGrid,
) -> Result<ImprovabilityScan> {
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for mu in mus {
        let rep = improvability_fraction(curve, windows, mu, samples, grid)?;
        for len in 0..=windows.len() {
            let candidates = rep.records.iter().filter(|r| r.candidate(len)).count();
            rows.push(ImprovRow {
                mu: format_rational(mu),
                prefix: len,
                candidates,
                samples: rep.records.len(),
                fraction: candidates as f64 / rep.records.len() as f64,
            });
        }
        records.push((mu.clone(), rep.records));
    }
    Ok(ImprovabilityScan { rows, records })
}

/// A bounded lattice function: the Siegel transform of a tent, clipped at
/// `cap`.
#[derive(Clone, Debug)]
pub struct Observable {
    pub tent: Tent<f64>,
    pub cap: f64,
}

impl Observable {
    pub fn new(tent: Tent<f64>, cap: f64) -> Result<Self> {
        if !(cap > 0.0 && cap.is_finite()) {
            return Err(Error::OutOfRange("cap must be positive and finite".into()));
        }
        Ok(Self { tent, cap })
    }

    pub fn sup(&self) -> f64 {
        self.cap
    }

    pub fn value(&self, l: &Lattice<f64>) -> Result<f64> {
        Ok(siegel_transform(l, &self.tent)?.min(self.cap))
    }
}

/// `z = diag(lambda, g)` in the centraliser of `exp(R A_k)` inside the top
/// `(m+1) x (m+1)` block, with `lambda det g = 1` and `z . q = sign w_0`
/// for the action `v -> lambda v g^{-1}`. For `m >= 2` the sign is `+1`;
/// for `m = 1` it is the sign of `q`.
pub fn z_matrix(n: usize, q: &[f64]) -> Result<(Matrix<f64>, f64)> {
    let m = q.len();
    if m == 0 || m + 1 > n {
        return Err(Error::dim("q must have 1..=n-1 coordinates"));
    }
    let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::OutOfRange("q vanishes".into()));
    }
    // h is orthogonal with det 1 and q h = |q| e_1 (row vectors).
    let (h, sign) = if m == 1 {
        (Matrix::identity(1), q[0].signum())
    } else {
        let mut v = q.to_vec();
        v[0] -= norm;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let mut refl = Matrix::<f64>::identity(m);
        if vv > 1e-30 * norm * norm {
            for r in 0..m {
                for c in 0..m {
                    refl[(r, c)] -= 2.0 * v[r] * v[c] / vv;
                }
            }
            for r in 0..m {
                refl[(r, 1)] = -refl[(r, 1)];
            }
        }
        (refl, 1.0)
    };
    let c = norm.powf(-1.0 / (m as f64 + 1.0));
    let lambda = c.powi(m as i32);
    let mut z = Matrix::<f64>::identity(n);
    z[(0, 0)] = lambda;
    // g = (c h)^{-1} = h^T / c.
    for r in 0..m {
        for col in 0..m {
            z[(1 + r, 1 + col)] = h[(col, r)] / c;
        }
    }
    Ok((z, sign))
}

#[derive(Clone, Debug, Serialize)]
pub struct TwistRow {
    pub i: u64,
    pub t: f64,
    pub lambda_f: f64,
    pub lambda_shifted: f64,
    pub defect: f64,
    pub sup_f: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TwistReport {
    pub m_k: usize,
    /// `w_0 = w0_sign * e_1`; for `m_k = 1` this follows the sign of `q(phi')`.
    pub w0_sign: f64,
    pub skipped: usize,
    pub rows: Vec<TwistRow>,
}

/// `|lambda_i(f o u(t w_0)) - lambda_i(f)|` for the twisted measures
/// `f(z(s) a_i u(phi(s)) x_i)`, with `a_i = a_{tau_bar_i}`. Float backend.
pub fn twisted_w_invariance(setup: &ScanSetup, f: &Observable, ts: &[f64]) -> Result<TwistReport> {
    let pres = layered_presentation(&setup.sequence)?;
    let mk = pres.config.last();
    let n = setup.sequence.n;
    let pts = setup.grid.points(&setup.curve.a, &setup.curve.b, setup.samples)?;
    let mut kept = Vec::new();
    let mut sign = None;
    for s in &pts {
        let d = setup.curve.derivative(&rational_to_f64(s));
        let q = &d[..mk];
        if q.iter().all(|x| x.abs() < 1e-12) {
            continue;
        }
        let (z, sg) = z_matrix(n, q)?;
        match sign {
            None => sign = Some(sg),
            Some(prev) if prev != sg => {
                return Err(Error::OutOfRange("q(phi') changes sign on the interval".into()));
            }
            _ => {}
        }
        kept.push((s.clone(), z));
    }
    let skipped = pts.len() - kept.len();
    if skipped > 0 {
        log::warn!("skipped {skipped} samples with q(phi'(s)) = 0");
    }
    if kept.is_empty() {
        return Err(Error::OutOfRange("q(phi') vanishes at every sample".into()));
    }
    let w0_sign = sign.unwrap_or(1.0);
    let mut rows = Vec::new();
    for i in setup.sequence.indices() {
        let tb = pres.tau_bar_at(i);
        let mut diag = vec![tb.iter().sum::<f64>().exp()];
        diag.extend(tb.iter().map(|x| (-x).exp()));
        let a = Matrix::diag(&diag);
        let g0 = setup.base.at(i).map(rational_to_f64);
        let elems = kept
            .par_iter()
            .map(|(s, z)| {
                let xi = setup.curve.eval(&rational_to_f64(s));
                z.try_mul(&a)?.try_mul(&make_u(&xi))?.try_mul(&g0)
            })
            .collect::<Result<Vec<_>>>()?;
        let base_vals = elems
            .par_iter()
            .map(|g| f.value(&Lattice::new(g.clone())?))
            .collect::<Result<Vec<_>>>()?;
        let lambda_f = base_vals.iter().sum::<f64>() / base_vals.len() as f64;
        for &t in ts {
            let mut w = vec![0.0; n - 1];
            w[0] = t * w0_sign;
            let u = make_u(&w);
            let vals = elems
                .par_iter()
                .map(|g| f.value(&Lattice::new(u.try_mul(g)?)?))
                .collect::<Result<Vec<_>>>()?;
            let lambda_shifted = vals.iter().sum::<f64>() / vals.len() as f64;
            rows.push(TwistRow {
                i,
                t,
                lambda_f,
                lambda_shifted,
                defect: (lambda_shifted - lambda_f).abs(),
                sup_f: f.sup(),
            });
        }
    }
    Ok(TwistReport {
        m_k: mk,
        w0_sign,
        skipped,
        rows,
    })
}
