//! Parametric growth sequences `t_{i,l} = sum_j c_j i^{p_j}` and the
//! induced splitting `V = V+ (+) V0 (+) V-`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{format_rational, parse_rational, rat, rational_to_f64, Rational};

use super::{weight_table, MConfig, RepSpace, Subspace};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    #[serde(with = "crate::scalar::rational_serde")]
    pub c: Rational,
    #[serde(with = "crate::scalar::rational_serde")]
    pub p: Rational,
}

/// `t_l(i) = sum c i^p` over positive exponents; bounded parts are dropped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layer {
    terms: Vec<Term>,
}

impl Layer {
    /// Merges equal exponents, drops zero coefficients and sorts by
    /// decreasing exponent. The leading coefficient must be positive.
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        let zero = rat(0, 1);
        if terms.iter().any(|t| t.p <= zero) {
            return Err(Error::BadConfig("growth exponents must be positive".into()));
        }
        let mut merged: Vec<Term> = Vec::new();
        for t in terms {
            match merged.iter_mut().find(|m| m.p == t.p) {
                Some(m) => m.c = &m.c + &t.c,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.c != zero);
        merged.sort_by(|a, b| b.p.cmp(&a.p));
        if merged.first().is_none_or(|t| t.c <= zero) {
            return Err(Error::BadConfig("growth layer must tend to +infinity".into()));
        }
        Ok(Self { terms: merged })
    }

    pub fn single(c: Rational, p: Rational) -> Result<Self> {
        Self::new(vec![Term { c, p }])
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn at(&self, i: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| rational_to_f64(&t.c) * i.powf(rational_to_f64(&t.p)))
            .sum()
    }

    /// `c:p` terms joined by `+`.
    pub fn describe(&self) -> String {
        self.terms
            .iter()
            .map(|t| format!("{}:{}", format_rational(&t.c), format_rational(&t.p)))
            .collect::<Vec<_>>()
            .join("+")
    }

    fn parse(s: &str) -> Result<Self> {
        let terms = s
            .split('+')
            .map(|item| {
                let (c, p) = item
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("growth term `{item}` is not c:p")))?;
                Ok(Term {
                    c: parse_rational(c.trim())?,
                    p: parse_rational(p.trim())?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(terms)
    }
}

/// A growth sequence attached to a layer configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthSpec {
    config: MConfig,
    layers: Vec<Layer>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "-")]
    Minus,
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Zero => "0",
            Sign::Minus => "-",
        })
    }
}

impl GrowthSpec {
    pub fn new(config: MConfig, layers: Vec<Layer>) -> Result<Self> {
        if layers.len() != config.k() {
            return Err(Error::BadConfig(format!(
                "{} growth layers for a {}-layer configuration",
                layers.len(),
                config.k()
            )));
        }
        Ok(Self { config, layers })
    }

    /// Every layer grows like `i`.
    pub fn linear(config: MConfig) -> Self {
        let layers = vec![Layer::single(rat(1, 1), rat(1, 1)).expect("valid"); config.k()];
        Self { config, layers }
    }

    /// Parses comma-separated layers of `+`-joined `c:p` terms, e.g.
    /// `1:1,1:2` for `t_i = (i, i^2)` or `1:1,1:2+-1:1` for `(i, i^2 - i)`.
    pub fn parse(config: MConfig, s: &str) -> Result<Self> {
        let layers = s.split(',').map(Layer::parse).collect::<Result<Vec<_>>>()?;
        Self::new(config, layers)
    }

    pub fn config(&self) -> &MConfig {
        &self.config
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn k(&self) -> usize {
        self.layers.len()
    }

    /// The first `l` layers, i.e. `T(l)`; `T'` is `truncate(k - 1)`.
    pub fn truncate(&self, l: usize) -> Result<Self> {
        Ok(Self {
            config: self.config.truncate(l)?,
            layers: self.layers[..l].to_vec(),
        })
    }

    /// `t_i` as floats.
    pub fn t_at(&self, i: f64) -> Vec<f64> {
        self.layers.iter().map(|l| l.at(i)).collect()
    }

    pub fn describe(&self) -> String {
        self.layers.iter().map(Layer::describe).collect::<Vec<_>>().join(",")
    }
}

/// Sign of `lim mu . t_i`: the largest exponent whose aggregate
/// `sum mu_l c_l` is nonzero decides; all aggregates zero gives `Zero`.
pub fn classify_weight(mu: &[i64], growth: &GrowthSpec) -> Result<Sign> {
    if mu.len() != growth.k() {
        return Err(Error::dim("weight and growth lengths differ"));
    }
    let mut exps: Vec<&Rational> = growth
        .layers
        .iter()
        .flat_map(|l| l.terms.iter().map(|t| &t.p))
        .collect();
    exps.sort();
    exps.dedup();
    for p in exps.into_iter().rev() {
        let mut agg = rat(0, 1);
        for (l, &m) in growth.layers.iter().zip(mu) {
            for t in l.terms.iter().filter(|t| &t.p == p) {
                agg += &t.c * rat(m, 1);
            }
        }
        if agg > rat(0, 1) {
            return Ok(Sign::Plus);
        }
        if agg < rat(0, 1) {
            return Ok(Sign::Minus);
        }
    }
    Ok(Sign::Zero)
}

/// Weight-basis splitting of a representation for a growth sequence.
#[derive(Clone, Debug, Serialize)]
pub struct Splitting {
    pub weights: Vec<Vec<i64>>,
    pub signs: Vec<Sign>,
}

impl Splitting {
    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    pub fn indices(&self, s: Sign) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.signs[i] == s).collect()
    }

    pub fn subspace(&self, s: Sign) -> Subspace {
        Subspace::coordinate(self.dim(), &self.indices(s))
    }

    /// `V0 + V-`.
    pub fn non_expanding(&self) -> Subspace {
        let idx: Vec<usize> = (0..self.dim()).filter(|&i| self.signs[i] != Sign::Plus).collect();
        Subspace::coordinate(self.dim(), &idx)
    }

    /// Projection onto the part of sign `s` along the others.
    pub fn projection(&self, s: Sign) -> Matrix<Rational> {
        diagonal_selector(self.dim(), |i| self.signs[i] == s)
    }

    /// Projection onto the weight space `V_mu`.
    pub fn weight_projection(&self, mu: &[i64]) -> Matrix<Rational> {
        diagonal_selector(self.dim(), |i| self.weights[i] == mu)
    }

    /// Projection onto the zero weight space `V_0` of all generators.
    pub fn zero_weight_projection(&self) -> Matrix<Rational> {
        diagonal_selector(self.dim(), |i| self.weights[i].iter().all(|&w| w == 0))
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (
            self.indices(Sign::Plus).len(),
            self.indices(Sign::Zero).len(),
            self.indices(Sign::Minus).len(),
        )
    }
}

fn diagonal_selector(d: usize, keep: impl Fn(usize) -> bool) -> Matrix<Rational> {
    let diag: Vec<Rational> = (0..d).map(|i| rat(i64::from(keep(i)), 1)).collect();
    Matrix::diag(&diag)
}

pub fn split_spaces(rep: &RepSpace, growth: &GrowthSpec) -> Result<Splitting> {
    let weights = weight_table(rep, growth.config())?;
    let signs = weights
        .iter()
        .map(|w| classify_weight(w, growth))
        .collect::<Result<Vec<_>>>()?;
    Ok(Splitting { weights, signs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn growth(n: usize, m: &[usize], s: &str) -> GrowthSpec {
        GrowthSpec::parse(MConfig::new(n, m.to_vec()).unwrap(), s).unwrap()
    }

    #[test]
    fn sign_rule_examples() {
        let g = growth(3, &[2, 1], "1:1,1:2");
        assert_eq!(classify_weight(&[0, 0], &g).unwrap(), Sign::Zero);
        assert_eq!(classify_weight(&[1, -1], &g).unwrap(), Sign::Minus);
        let g = growth(3, &[2, 1], "1:1,1:1");
        assert_eq!(classify_weight(&[1, -1], &g).unwrap(), Sign::Zero);
        assert_eq!(classify_weight(&[1, 0], &g).unwrap(), Sign::Plus);
        let g = growth(3, &[2, 1], "2:1,1:1");
        assert_eq!(classify_weight(&[1, -1], &g).unwrap(), Sign::Plus);
        let g = growth(3, &[2, 1], "1:2+1:1,1:2");
        assert_eq!(classify_weight(&[1, -1], &g).unwrap(), Sign::Plus);
        assert_eq!(classify_weight(&[-1, 1], &g).unwrap(), Sign::Minus);
        let g = growth(3, &[2, 1], "1:1,1:2+-1:1");
        assert_eq!(classify_weight(&[1, 0], &g).unwrap(), Sign::Plus);
        assert_eq!(classify_weight(&[1, -1], &g).unwrap(), Sign::Minus);
        assert_eq!(g.t_at(3.0), vec![3.0, 6.0]);
    }

    #[test]
    fn split_examples() {
        let g = growth(3, &[2, 1], "1:1,1:1");
        let s = split_spaces(&RepSpace::wedge(3, 1).unwrap(), &g).unwrap();
        assert_eq!(s.indices(Sign::Plus), vec![0]);
        assert_eq!(s.indices(Sign::Zero), Vec::<usize>::new());
        assert_eq!(s.indices(Sign::Minus), vec![1, 2]);
        let s = split_spaces(&RepSpace::trivial(3).unwrap(), &g).unwrap();
        assert_eq!(s.dims(), (0, 1, 0));
    }

    #[test]
    fn projections_are_idempotent() {
        let g = growth(4, &[3, 1], "1:1,1:2");
        for rep in RepSpace::catalogue(4).unwrap() {
            let s = split_spaces(&rep, &g).unwrap();
            let (a, b, c) = s.dims();
            assert_eq!(a + b + c, rep.dim());
            let p = s.projection(Sign::Zero);
            assert_eq!(&p * &p, p);
            let sum = s.projection(Sign::Plus) + s.projection(Sign::Zero) + s.projection(Sign::Minus);
            assert!(sum.is_identity());
        }
    }

    #[test]
    fn bad_growth() {
        let c = MConfig::new(3, vec![2, 1]).unwrap();
        assert!(GrowthSpec::parse(c.clone(), "1:1").is_err());
        assert!(GrowthSpec::parse(c.clone(), "1:0,1:1").is_err());
        assert!(GrowthSpec::parse(c.clone(), "1,1").is_err());
        assert!(GrowthSpec::parse(c.clone(), "-1:2+1:1,1:1").is_err());
        assert!(GrowthSpec::parse(c, "1:1+-1:1,1:1").is_err());
    }

    #[test]
    fn truncation() {
        let g = growth(4, &[3, 2], "1:1,1:2");
        let t = g.truncate(1).unwrap();
        assert_eq!(t.config().m(), &[3]);
        assert_eq!(t.describe(), "1/1:1/1");
        let g = growth(4, &[3, 2], "1:1,1:2+-1:1+0:3");
        assert_eq!(g.describe(), "1/1:1/1,1/1:2/1+-1/1:1/1");
    }
}
