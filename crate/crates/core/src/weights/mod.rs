//! Weight decompositions for the commuting generators `A_l` and the
//! exact subspace checks built on them.

pub mod growth;
pub mod lemmas;
pub mod rep;
pub mod subspace;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{Rational, Scalar};

pub use growth::{classify_weight, split_spaces, GrowthSpec, Layer, Sign, Splitting, Term};
pub use lemmas::{
    basic_lemma1_verify, basic_lemma2_on_points, basic_lemma2_verify, cor_main_on_points, cor_main_verify,
    curve_containment_verify,
    fixed_subspace_q, hypothesis_subspace, omega_straighten, positivity_check, stabilizer_check,
    lemma_suite, Check, LemmaReport, SuiteReport,
};
pub use rep::{RepKind, RepSpace};
pub use subspace::Subspace;

/// A layer configuration `n - 1 >= m_1 > ... > m_k >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MConfig {
    n: usize,
    m: Vec<usize>,
}

impl MConfig {
    pub fn new(n: usize, m: Vec<usize>) -> Result<Self> {
        if m.is_empty() {
            return Err(Error::BadConfig("configuration needs at least one layer".into()));
        }
        if m[0] + 1 > n || m[m.len() - 1] == 0 || m.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::BadConfig(format!(
                "{m:?} is not strictly decreasing inside 1..={}",
                n.saturating_sub(1)
            )));
        }
        Ok(Self { n, m })
    }

    /// Parses `2,1`.
    pub fn parse(n: usize, s: &str) -> Result<Self> {
        let m = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad layer `{t}` in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, m)
    }

    /// Every valid configuration with at most `kmax` layers.
    pub fn all(n: usize, kmax: usize) -> Vec<Self> {
        let mut out = Vec::new();
        fn go(top: usize, kmax: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<MConfig>) {
            if !cur.is_empty() {
                out.push(MConfig { n, m: cur.clone() });
            }
            if cur.len() == kmax {
                return;
            }
            for m in (1..top).rev() {
                cur.push(m);
                go(m, kmax, n, cur, out);
                cur.pop();
            }
        }
        go(n, kmax, n, &mut Vec::new(), &mut out);
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.m.len()
    }

    pub fn m(&self) -> &[usize] {
        &self.m
    }

    pub fn last(&self) -> usize {
        self.m[self.m.len() - 1]
    }

    /// The first `l` layers.
    pub fn truncate(&self, l: usize) -> Result<Self> {
        if l == 0 || l > self.k() {
            return Err(Error::OutOfRange(format!("truncation {l} of a {}-layer config", self.k())));
        }
        Ok(Self {
            n: self.n,
            m: self.m[..l].to_vec(),
        })
    }
}

/// Diagonal of `A_l = m_l E_11 - sum_{j=2}^{m_l+1} E_jj` (layer `l` is 0-based).
pub fn generator_diagonal<T: Scalar>(config: &MConfig, l: usize) -> Result<Vec<T>> {
    let m = *config
        .m
        .get(l)
        .ok_or_else(|| Error::OutOfRange(format!("layer {l} of a {}-layer config", config.k())))?;
    let mut d = vec![T::zero(); config.n];
    d[0] = T::from_i64(m as i64);
    for x in d.iter_mut().skip(1).take(m) {
        *x = -T::one();
    }
    Ok(d)
}

pub fn generator_a<T: Scalar>(config: &MConfig, l: usize) -> Result<Matrix<T>> {
    Ok(Matrix::diag(&generator_diagonal(config, l)?))
}

/// `A(t) = sum_l t_l A_l`.
pub fn a_of_t<T: Scalar>(config: &MConfig, t: &[T]) -> Result<Matrix<T>> {
    if t.len() != config.k() {
        return Err(Error::dim("t has the wrong number of layers"));
    }
    let mut d = vec![T::zero(); config.n];
    for (l, tl) in t.iter().enumerate() {
        for (x, g) in d.iter_mut().zip(generator_diagonal::<T>(config, l)?) {
            *x = x.clone() + tl.clone() * g;
        }
    }
    Ok(Matrix::diag(&d))
}

/// Weight vectors `(mu_1, ..., mu_k)` of every basis vector, as integers.
pub fn weight_table(rep: &RepSpace, config: &MConfig) -> Result<Vec<Vec<i64>>> {
    if rep.n() != config.n {
        return Err(Error::dim("representation and configuration disagree on n"));
    }
    let per_layer = (0..config.k())
        .map(|l| rep.diagonal_weights::<Rational>(&generator_diagonal(config, l)?))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..rep.dim())
        .map(|i| {
            per_layer
                .iter()
                .map(|w| w[i].to_integer().try_into().expect("small integer weight"))
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn generator_examples() {
        let c = MConfig::new(3, vec![2]).unwrap();
        let a: Matrix<Rational> = generator_a(&c, 0).unwrap();
        assert_eq!(a, Matrix::diag(&[rat(2, 1), rat(-1, 1), rat(-1, 1)]));
        let c = MConfig::new(3, vec![2, 1]).unwrap();
        let t = a_of_t(&c, &[rat(3, 1), rat(5, 1)]).unwrap();
        assert_eq!(t, Matrix::diag(&[rat(11, 1), rat(-8, 1), rat(-3, 1)]));
    }

    #[test]
    fn traces_vanish() {
        for n in 2..=6 {
            for c in MConfig::all(n, n) {
                for l in 0..c.k() {
                    assert_eq!(generator_a::<Rational>(&c, l).unwrap().trace(), rat(0, 1));
                }
            }
        }
    }

    #[test]
    fn bad_configs() {
        assert!(MConfig::new(3, vec![3]).is_err());
        assert!(MConfig::new(4, vec![1, 2]).is_err());
        assert!(MConfig::new(4, vec![2, 2]).is_err());
        assert!(MConfig::new(4, vec![]).is_err());
        assert_eq!(MConfig::parse(4, "3,1").unwrap().m(), &[3, 1]);
    }

    #[test]
    fn config_enumeration() {
        let all = MConfig::all(4, 2);
        // (3) (2) (1) (3,2) (3,1) (2,1)
        assert_eq!(all.len(), 6);
        assert!(all.iter().all(|c| MConfig::new(c.n, c.m.clone()).is_ok()));
    }

    #[test]
    fn weight_table_examples() {
        let c = MConfig::new(3, vec![2]).unwrap();
        let w = weight_table(&RepSpace::wedge(3, 1).unwrap(), &c).unwrap();
        assert_eq!(w, vec![vec![2], vec![-1], vec![-1]]);
        let c = MConfig::new(3, vec![2, 1]).unwrap();
        let w = weight_table(&RepSpace::wedge(3, 2).unwrap(), &c).unwrap();
        assert_eq!(w, vec![vec![1, 0], vec![1, 1], vec![-2, -1]]);
        let c = MConfig::new(2, vec![1]).unwrap();
        let w = weight_table(&RepSpace::adjoint(2).unwrap(), &c).unwrap();
        assert_eq!(w, vec![vec![2], vec![-2], vec![0]]);
    }

    #[test]
    fn weight_sums_vanish() {
        for n in 2..=5 {
            for rep in RepSpace::catalogue(n).unwrap() {
                for c in MConfig::all(n, 3) {
                    let w = weight_table(&rep, &c).unwrap();
                    for l in 0..c.k() {
                        assert_eq!(w.iter().map(|x| x[l]).sum::<i64>(), 0, "{rep} {c:?}");
                    }
                }
            }
        }
    }
}
