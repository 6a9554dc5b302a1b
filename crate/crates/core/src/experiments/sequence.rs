//! Closed-form diverging sequences `tau_i` and their layered presentation.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{is_integer, parse_rational, rat, rational_to_f64, Rational};
use crate::weights::{a_of_t, GrowthSpec, Layer, MConfig, Term};

/// `sum_j c_j i^{p_j} + d` with positive exponents `p_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedForm {
    terms: Vec<Term>,
    constant: Rational,
}

/// Limit behaviour of a closed form as `i -> infinity`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Asymptotic {
    Bounded,
    PlusInfinity,
    MinusInfinity,
}

impl ClosedForm {
    pub fn new(terms: Vec<Term>, constant: Rational) -> Result<Self> {
        if terms.iter().any(|t| t.p <= Rational::zero()) {
            return Err(Error::Unsupported("exponents of i must be positive".into()));
        }
        let mut merged: Vec<Term> = Vec::new();
        for t in terms {
            match merged.iter_mut().find(|m| m.p == t.p) {
                Some(m) => m.c = &m.c + &t.c,
                None => merged.push(t),
            }
        }
        merged.retain(|t| !t.c.is_zero());
        merged.sort_by(|a, b| b.p.cmp(&a.p));
        Ok(Self {
            terms: merged,
            constant,
        })
    }

    pub fn constant(d: Rational) -> Self {
        Self {
            terms: Vec::new(),
            constant: d,
        }
    }

    /// `c i^p`.
    pub fn power(c: Rational, p: Rational) -> Result<Self> {
        Self::new(vec![Term { c, p }], Rational::zero())
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn constant_part(&self) -> &Rational {
        &self.constant
    }

    pub fn asymptotic(&self) -> Asymptotic {
        match self.terms.first() {
            None => Asymptotic::Bounded,
            Some(t) if t.c.is_positive() => Asymptotic::PlusInfinity,
            Some(_) => Asymptotic::MinusInfinity,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|t| Term {
            c: -t.c.clone(),
            p: t.p.clone(),
        }));
        Self::new(terms, &self.constant - &other.constant).expect("exponents stay positive")
    }

    pub fn at(&self, i: f64) -> f64 {
        rational_to_f64(&self.constant)
            + self
                .terms
                .iter()
                .map(|t| rational_to_f64(&t.c) * i.powf(rational_to_f64(&t.p)))
                .sum::<f64>()
    }

    /// Exact value when every exponent is an integer.
    pub fn at_exact(&self, i: u64) -> Option<Rational> {
        let base = Rational::from_integer(i.into());
        let mut acc = self.constant.clone();
        for t in &self.terms {
            if !is_integer(&t.p) {
                return None;
            }
            let e = t.p.to_integer().to_u32()?;
            acc += &t.c * num_traits::pow(base.clone(), e as usize);
        }
        Some(acc)
    }

    /// The unbounded part as a growth layer.
    pub fn growth_layer(&self) -> Result<Layer> {
        Layer::new(self.terms.clone())
    }
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| format!("{}:{}", t.c, t.p))
            .collect();
        if !self.constant.is_zero() || parts.is_empty() {
            parts.push(self.constant.to_string());
        }
        f.write_str(&parts.join("+"))
    }
}

/// `+`-joined items, each `c:p` for `c i^p` or a bare rational constant:
/// `2:1`, `3`, `1:2+5`, `1:2+-1:1`.
impl FromStr for ClosedForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut terms = Vec::new();
        let mut constant = Rational::zero();
        for item in s.split('+').map(str::trim) {
            if item.is_empty() {
                return Err(Error::Parse(format!("empty item in `{s}`")));
            }
            match item.split_once(':') {
                Some((c, p)) => terms.push(Term {
                    c: parse_rational(c.trim())?,
                    p: parse_rational(p.trim())?,
                }),
                None => constant += parse_rational(item)?,
            }
        }
        Self::new(terms, constant)
    }
}

impl Serialize for ClosedForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ClosedForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `tau_i` for `i` in `[i_min, i_max]`, one closed form per coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub n: usize,
    pub tau: Vec<ClosedForm>,
    pub i_min: u64,
    pub i_max: u64,
}

impl SequenceSpec {
    pub fn new(n: usize, tau: Vec<ClosedForm>, i_min: u64, i_max: u64) -> Result<Self> {
        let s = Self { n, tau, i_min, i_max };
        s.validate()?;
        Ok(s)
    }

    /// Parses `["2:1", "1:1", "3"]`-style coordinates.
    pub fn parse(n: usize, coords: &[&str], i_min: u64, i_max: u64) -> Result<Self> {
        let tau = coords.iter().map(|c| c.parse()).collect::<Result<Vec<_>>>()?;
        Self::new(n, tau, i_min, i_max)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    /// `tau_{i,j} = c i` for every coordinate.
    pub fn uniform_linear(n: usize, c: i64, i_min: u64, i_max: u64) -> Result<Self> {
        let f = ClosedForm::power(rat(c, 1), Rational::one())?;
        Self::new(n, vec![f; n - 1], i_min, i_max)
    }

    /// Checks `tau_{i,1} >= ... >= tau_{i,n-1} >= 0` on the whole index
    /// range, exactly when all exponents are integral.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.tau.len() != self.n - 1 {
            return Err(Error::dim(format!("need {} tau coordinates for n = {}", self.n.saturating_sub(1), self.n)));
        }
        if self.i_min > self.i_max {
            return Err(Error::OutOfRange(format!("empty index range [{}, {}]", self.i_min, self.i_max)));
        }
        for i in self.indices() {
            let ok = match self.tau_exact(i) {
                Some(v) => v.windows(2).all(|w| w[0] >= w[1]) && v.last().is_none_or(|x| !x.is_negative()),
                None => {
                    let v = self.tau_at(i);
                    let slack = 1e-12 * v.iter().fold(1.0f64, |a, x| a.max(x.abs()));
                    v.windows(2).all(|w| w[0] >= w[1] - slack) && v.last().is_none_or(|x| *x >= -slack)
                }
            };
            if !ok {
                return Err(Error::OutOfRange(format!("tau_{i} is not ordered and nonnegative")));
            }
        }
        Ok(())
    }

    pub fn indices(&self) -> impl Iterator<Item = u64> {
        self.i_min..=self.i_max
    }

    pub fn tau_at(&self, i: u64) -> Vec<f64> {
        self.tau.iter().map(|f| f.at(i as f64)).collect()
    }

    pub fn tau_exact(&self, i: u64) -> Option<Vec<Rational>> {
        self.tau.iter().map(|f| f.at_exact(i)).collect()
    }
}

/// Output of [`layered_presentation`].
#[derive(Clone, Debug, Serialize)]
pub struct LayeredPresentation {
    pub config: MConfig,
    /// `t_l` including bounded parts.
    pub t: Vec<ClosedForm>,
    /// The unbounded parts of `t`, used for weight signs.
    pub growth: GrowthSpec,
    pub tau_bar: Vec<ClosedForm>,
    /// `tau_i - tau_bar_i`, constant in `i`.
    #[serde(with = "crate::scalar::rational_serde::vec")]
    pub residual: Vec<Rational>,
}

impl LayeredPresentation {
    pub fn t_at(&self, i: u64) -> Vec<f64> {
        self.t.iter().map(|f| f.at(i as f64)).collect()
    }

    pub fn tau_bar_at(&self, i: u64) -> Vec<f64> {
        self.tau_bar.iter().map(|f| f.at(i as f64)).collect()
    }

    /// Largest relative entry difference between `a_{tau_bar_i}` and
    /// `exp(A(t_i))`.
    pub fn exp_identity_defect(&self, i: u64) -> Result<f64> {
        let tb = self.tau_bar_at(i);
        let mut lhs = vec![tb.iter().sum::<f64>().exp()];
        lhs.extend(tb.iter().map(|x| (-x).exp()));
        let a = a_of_t::<f64>(&self.config, &self.t_at(i))?;
        let rhs: Vec<f64> = (0..a.rows()).map(|j| a[(j, j)].exp()).collect();
        Ok(lhs
            .iter()
            .zip(&rhs)
            .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max))
    }
}

/// Splits `tau_i` into nested layers `m_1 > ... > m_k` with diverging gaps.
pub fn layered_presentation(seq: &SequenceSpec) -> Result<LayeredPresentation> {
    seq.validate()?;
    let tau = &seq.tau;
    let dim = tau.len();
    if let Some(j) = tau.iter().position(|f| f.asymptotic() == Asymptotic::MinusInfinity) {
        return Err(Error::Unsupported(format!("tau coordinate {} tends to -infinity", j + 1)));
    }
    let m1 = (1..=dim)
        .rev()
        .find(|&r| tau[r - 1].asymptotic() == Asymptotic::PlusInfinity)
        .ok_or_else(|| Error::Unsupported("the sequence is bounded".into()))?;
    let mut m = vec![m1];
    loop {
        let top = *m.last().expect("nonempty");
        let pivot = &tau[top - 1];
        let mut next = None;
        for r in (1..top).rev() {
            match tau[r - 1].sub(pivot).asymptotic() {
                Asymptotic::PlusInfinity => {
                    next = Some(r);
                    break;
                }
                Asymptotic::MinusInfinity => {
                    return Err(Error::Unsupported(format!("tau coordinates {r} and {top} cross")));
                }
                Asymptotic::Bounded => {}
            }
        }
        match next {
            Some(r) => m.push(r),
            None => break,
        }
    }
    let config = MConfig::new(seq.n, m.clone())?;
    let mut tau_bar = vec![ClosedForm::constant(Rational::zero()); dim];
    for (l, &ml) in m.iter().enumerate() {
        let lower = m.get(l + 1).copied().unwrap_or(0);
        for r in lower + 1..=ml {
            tau_bar[r - 1] = tau[ml - 1].clone();
        }
    }
    let residual = tau
        .iter()
        .zip(&tau_bar)
        .map(|(a, b)| {
            let d = a.sub(b);
            if d.terms().is_empty() {
                Ok(d.constant_part().clone())
            } else {
                Err(Error::Internal(format!("residual {d} is not constant")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let t: Vec<ClosedForm> = m
        .iter()
        .enumerate()
        .map(|(l, &ml)| {
            if l == 0 {
                tau_bar[ml - 1].clone()
            } else {
                tau_bar[ml - 1].sub(&tau_bar[m[l - 1] - 1])
            }
        })
        .collect();
    let layers = t.iter().map(ClosedForm::growth_layer).collect::<Result<Vec<_>>>()?;
    let growth = GrowthSpec::new(config.clone(), layers)?;
    Ok(LayeredPresentation {
        config,
        t,
        growth,
        tau_bar,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_parsing() {
        let f: ClosedForm = "1:2+-1:1+5".parse().unwrap();
        assert_eq!(f.at_exact(3), Some(rat(11, 1)));
        assert_eq!(f.to_string(), "1:2+-1:1+5");
        assert_eq!("3".parse::<ClosedForm>().unwrap().asymptotic(), Asymptotic::Bounded);
        assert!("1:0".parse::<ClosedForm>().is_err());
        assert!("x".parse::<ClosedForm>().is_err());
        let g: ClosedForm = "1:1/2".parse().unwrap();
        assert_eq!(g.at_exact(4), None);
        assert!((g.at(4.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn ordering_is_enforced() {
        assert!(SequenceSpec::parse(3, &["1:1", "2:1"], 1, 5).is_err());
        assert!(SequenceSpec::parse(3, &["1:1", "3"], 1, 5).is_err());
        assert!(SequenceSpec::parse(3, &["1:1", "3"], 3, 5).is_ok());
        assert!(SequenceSpec::parse(3, &["1:1"], 1, 5).is_err());
    }

    #[test]
    fn two_layer_example() {
        let seq = SequenceSpec::parse(4, &["2:1", "1:1", "3"], 3, 12).unwrap();
        let p = layered_presentation(&seq).unwrap();
        assert_eq!(p.config.m(), &[2, 1]);
        assert_eq!(p.t_at(5), vec![5.0, 5.0]);
        assert_eq!(p.tau_bar_at(5), vec![10.0, 5.0, 0.0]);
        assert_eq!(p.residual, vec![rat(0, 1), rat(0, 1), rat(3, 1)]);
        for i in [5u64, 10] {
            let a = a_of_t::<f64>(&p.config, &p.t_at(i)).unwrap();
            let x = i as f64;
            assert_eq!(
                (0..4).map(|j| a[(j, j)]).collect::<Vec<_>>(),
                vec![3.0 * x, -2.0 * x, -x, 0.0]
            );
            assert!(p.exp_identity_defect(i).unwrap() < 1e-9);
        }
    }

    #[test]
    fn single_layer() {
        let seq = SequenceSpec::uniform_linear(4, 1, 1, 5).unwrap();
        let p = layered_presentation(&seq).unwrap();
        assert_eq!(p.config.m(), &[3]);
        assert_eq!(p.t_at(2), vec![2.0]);
        assert!(p.residual.iter().all(Zero::is_zero));
    }

    #[test]
    fn quadratic_example() {
        let seq = SequenceSpec::parse(5, &["1:2", "1:2", "1:1", "5"], 5, 10).unwrap();
        let p = layered_presentation(&seq).unwrap();
        assert_eq!(p.config.m(), &[3, 2]);
        assert_eq!(p.t[0].to_string(), "1:1");
        assert_eq!(p.t[1].to_string(), "1:2+-1:1");
        assert_eq!(p.residual, vec![rat(0, 1), rat(0, 1), rat(0, 1), rat(5, 1)]);
        for i in [5, 10] {
            assert!(p.exp_identity_defect(i).unwrap() < 1e-9);
        }
    }

    #[test]
    fn bounded_residuals_inside_layers() {
        let seq = SequenceSpec::parse(4, &["1:1+2", "1:1", "1/2"], 1, 6).unwrap();
        let p = layered_presentation(&seq).unwrap();
        assert_eq!(p.config.m(), &[2]);
        assert_eq!(p.residual, vec![rat(2, 1), rat(0, 1), rat(1, 2)]);
        assert!(layered_presentation(&SequenceSpec::parse(3, &["2", "1"], 1, 3).unwrap()).is_err());
    }

    #[test]
    fn json_round_trip() {
        let seq = SequenceSpec::parse(4, &["2:1", "1:1", "3"], 3, 8).unwrap();
        let s = serde_json::to_string(&seq).unwrap();
        assert_eq!(SequenceSpec::from_json_str(&s).unwrap(), seq);
    }
}
