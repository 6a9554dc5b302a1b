//! The representation catalogue: exterior powers of the standard
//! representation, the adjoint representation and the trivial one.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RepKind {
    Trivial,
    Wedge { d: usize },
    Adjoint,
}

/// A representation of `SL(n)` with an ordered weight basis.
///
/// Wedge bases are the monomials `e_J` with `J` in lexicographic order.
/// The adjoint basis is `E_pq` (`p != q`, lexicographic) followed by
/// `H_i = E_ii - E_{i+1,i+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepSpace {
    n: usize,
    kind: RepKind,
    subsets: Vec<Vec<usize>>,
    offdiag: Vec<(usize, usize)>,
}

fn subsets(n: usize, d: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, d: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, d, &mut Vec::new(), &mut out);
    out
}

/// Sorts `v` in place and returns the permutation sign, or `None` when
/// an index repeats.
fn sort_with_sign(v: &mut [usize]) -> Option<i64> {
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

impl RepSpace {
    pub fn new(n: usize, kind: RepKind) -> Result<Self> {
        if n < 2 {
            return Err(Error::BadConfig(format!("n = {n} is below 2")));
        }
        let mut rep = Self {
            n,
            kind,
            subsets: Vec::new(),
            offdiag: Vec::new(),
        };
        match kind {
            RepKind::Trivial => {}
            RepKind::Wedge { d } => {
                if d == 0 || d >= n {
                    return Err(Error::BadConfig(format!("wedge degree {d} outside 1..{n}")));
                }
                rep.subsets = subsets(n, d);
            }
            RepKind::Adjoint => {
                rep.offdiag = (0..n)
                    .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
                    .collect();
            }
        }
        Ok(rep)
    }

    pub fn wedge(n: usize, d: usize) -> Result<Self> {
        Self::new(n, RepKind::Wedge { d })
    }

    pub fn adjoint(n: usize) -> Result<Self> {
        Self::new(n, RepKind::Adjoint)
    }

    pub fn trivial(n: usize) -> Result<Self> {
        Self::new(n, RepKind::Trivial)
    }

    /// Every catalogued nontrivial representation of `SL(n)`.
    pub fn catalogue(n: usize) -> Result<Vec<Self>> {
        let mut out = (1..n).map(|d| Self::wedge(n, d)).collect::<Result<Vec<_>>>()?;
        out.push(Self::adjoint(n)?);
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> RepKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            RepKind::Trivial => 1,
            RepKind::Wedge { .. } => self.subsets.len(),
            RepKind::Adjoint => self.offdiag.len() + self.n - 1,
        }
    }

    /// Index sets of the wedge monomials.
    pub fn wedge_subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn label(&self, i: usize) -> String {
        match self.kind {
            RepKind::Trivial => "1".into(),
            RepKind::Wedge { .. } => self.subsets[i]
                .iter()
                .map(|j| format!("e{}", j + 1))
                .collect::<Vec<_>>()
                .join("^"),
            RepKind::Adjoint => match self.offdiag.get(i) {
                Some((p, q)) => format!("E{}{}", p + 1, q + 1),
                None => format!("H{}", i - self.offdiag.len() + 1),
            },
        }
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.dim()).map(|i| self.label(i)).collect()
    }

    fn check_square<T: Scalar>(&self, g: &Matrix<T>) -> Result<()> {
        if g.rows() != self.n || g.cols() != self.n {
            return Err(Error::dim(format!(
                "{}x{} matrix acting on a representation of SL({})",
                g.rows(),
                g.cols(),
                self.n
            )));
        }
        Ok(())
    }

    /// Weights of the basis vectors under a diagonal Lie algebra element.
    pub fn diagonal_weights<T: Scalar>(&self, diag: &[T]) -> Result<Vec<T>> {
        if diag.len() != self.n {
            return Err(Error::dim("diagonal length differs from n"));
        }
        Ok(match self.kind {
            RepKind::Trivial => vec![T::zero()],
            RepKind::Wedge { .. } => self
                .subsets
                .iter()
                .map(|j| j.iter().fold(T::zero(), |acc, &i| acc + diag[i].clone()))
                .collect(),
            RepKind::Adjoint => self
                .offdiag
                .iter()
                .map(|&(p, q)| diag[p].clone() - diag[q].clone())
                .chain((1..self.n).map(|_| T::zero()))
                .collect(),
        })
    }

    /// Coordinates of a traceless matrix in the adjoint basis.
    pub fn adjoint_coords<T: Scalar>(&self, x: &Matrix<T>) -> Vec<T> {
        let mut out: Vec<T> = self.offdiag.iter().map(|&(p, q)| x[(p, q)].clone()).collect();
        let mut acc = T::zero();
        for i in 0..self.n - 1 {
            acc = acc + x[(i, i)].clone();
            out.push(acc.clone());
        }
        out
    }

    /// The traceless matrix with the given adjoint coordinates.
    pub fn adjoint_matrix<T: Scalar>(&self, c: &[T]) -> Matrix<T> {
        let mut m = Matrix::zeros(self.n, self.n);
        for (k, &(p, q)) in self.offdiag.iter().enumerate() {
            m[(p, q)] = c[k].clone();
        }
        let h = &c[self.offdiag.len()..];
        for (i, x) in h.iter().enumerate() {
            m[(i, i)] = m[(i, i)].clone() + x.clone();
            m[(i + 1, i + 1)] = m[(i + 1, i + 1)].clone() - x.clone();
        }
        m
    }

    /// The derivation action of `x` in the gl(n) sense.
    pub fn lie_action<T: Scalar>(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_square(x)?;
        let dim = self.dim();
        let mut out: Matrix<T> = Matrix::zeros(dim, dim);
        match self.kind {
            RepKind::Trivial => {}
            RepKind::Wedge { .. } => {
                for (col, j) in self.subsets.iter().enumerate() {
                    for slot in 0..j.len() {
                        for i in 0..self.n {
                            let c = x[(i, j[slot])].clone();
                            if c.is_zero() {
                                continue;
                            }
                            let mut idx = j.clone();
                            idx[slot] = i;
                            if let Some(s) = sort_with_sign(&mut idx) {
                                let row = self.subset_index(&idx);
                                out[(row, col)] = out[(row, col)].clone() + T::from_i64(s) * c;
                            }
                        }
                    }
                }
            }
            RepKind::Adjoint => {
                for col in 0..dim {
                    let mut e = vec![T::zero(); dim];
                    e[col] = T::one();
                    let b = self.adjoint_matrix(&e);
                    let image = self.adjoint_coords(&x.commutator(&b)?);
                    for (row, v) in image.into_iter().enumerate() {
                        out[(row, col)] = v;
                    }
                }
            }
        }
        Ok(out)
    }

    /// The group action of `g`; wedge entries are `d x d` minors.
    pub fn group_action<T: Scalar>(&self, g: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_square(g)?;
        let dim = self.dim();
        Ok(match self.kind {
            RepKind::Trivial => Matrix::identity(1),
            RepKind::Wedge { .. } => {
                let mut out = Matrix::zeros(dim, dim);
                for (col, j) in self.subsets.iter().enumerate() {
                    for (row, i) in self.subsets.iter().enumerate() {
                        out[(row, col)] = g.submatrix(i, j).det()?;
                    }
                }
                out
            }
            RepKind::Adjoint => {
                let inv = g.inverse()?;
                let mut out = Matrix::zeros(dim, dim);
                for col in 0..dim {
                    let mut e = vec![T::zero(); dim];
                    e[col] = T::one();
                    let b = self.adjoint_matrix(&e);
                    let image = self.adjoint_coords(&g.try_mul(&b)?.try_mul(&inv)?);
                    for (row, v) in image.into_iter().enumerate() {
                        out[(row, col)] = v;
                    }
                }
                out
            }
        })
    }

    fn subset_index(&self, j: &[usize]) -> usize {
        self.subsets
            .binary_search_by(|s| s.as_slice().cmp(j))
            .expect("sorted index set of the right size")
    }
}

impl fmt::Display for RepSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RepKind::Trivial => write!(f, "trivial:{}", self.n),
            RepKind::Wedge { d } => write!(f, "wedge:{}:{d}", self.n),
            RepKind::Adjoint => write!(f, "adjoint:{}", self.n),
        }
    }
}

/// Parses `wedge:<n>:<d>`, `adjoint:<n>` or `trivial:<n>`.
impl FromStr for RepSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad integer `{t}` in rep `{s}`")))
        };
        match parts.as_slice() {
            ["wedge", n, d] => Self::wedge(num(n)?, num(d)?),
            ["adjoint", n] => Self::adjoint(num(n)?),
            ["trivial", n] => Self::trivial(num(n)?),
            _ => Err(Error::Parse(format!(
                "rep `{s}` is not wedge:<n>:<d>, adjoint:<n> or trivial:<n>"
            ))),
        }
    }
}

impl Serialize for RepSpace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RepSpace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::make_u;
    use crate::scalar::{rat, Rational};
    use proptest::prelude::*;

    fn elementary(n: usize, p: usize, q: usize) -> Matrix<Rational> {
        let mut m = Matrix::zeros(n, n);
        m[(p, q)] = rat(1, 1);
        m
    }

    #[test]
    fn dimensions() {
        assert_eq!(RepSpace::wedge(4, 2).unwrap().dim(), 6);
        assert_eq!(RepSpace::adjoint(3).unwrap().dim(), 8);
        assert_eq!(RepSpace::trivial(5).unwrap().dim(), 1);
        assert!(RepSpace::wedge(3, 3).is_err());
        assert!(RepSpace::wedge(3, 0).is_err());
    }

    #[test]
    fn parse_and_display() {
        let r: RepSpace = "wedge:3:2".parse().unwrap();
        assert_eq!(r.to_string(), "wedge:3:2");
        assert_eq!(r.labels(), vec!["e1^e2", "e1^e3", "e2^e3"]);
        let a: RepSpace = "adjoint:2".parse().unwrap();
        assert_eq!(a.labels(), vec!["E12", "E21", "H1"]);
        assert!("sym:3:2".parse::<RepSpace>().is_err());
    }

    #[test]
    fn adjoint_weights_sl2() {
        let a = RepSpace::adjoint(2).unwrap();
        let w = a.diagonal_weights(&[rat(1, 1), rat(-1, 1)]).unwrap();
        assert_eq!(w, vec![rat(2, 1), rat(-2, 1), rat(0, 1)]);
    }

    #[test]
    fn adjoint_unipotent_action() {
        let a = RepSpace::adjoint(2).unwrap();
        let g = a.group_action(&make_u(&[rat(1, 1)])).unwrap();
        // columns: E, F, H
        assert_eq!(g.col(1), vec![rat(-1, 1), rat(1, 1), rat(1, 1)]);
        assert_eq!(g.col(2), vec![rat(-2, 1), rat(0, 1), rat(1, 1)]);
    }

    #[test]
    fn wedge_lie_action_matches_hand_computation() {
        let r = RepSpace::wedge(3, 2).unwrap();
        // E_23 sends e1^e3 to e1^e2 and kills e1^e2.
        let x = r.lie_action(&elementary(3, 1, 2)).unwrap();
        assert_eq!(x.col(1), vec![rat(1, 1), rat(0, 1), rat(0, 1)]);
        assert_eq!(x.col(0), vec![rat(0, 1); 3]);
        // E_31 sends e1^e2 to e3^e2 = -e2^e3.
        let y = r.lie_action(&elementary(3, 2, 0)).unwrap();
        assert_eq!(y.col(0), vec![rat(0, 1), rat(0, 1), rat(-1, 1)]);
    }

    fn small_sl3() -> impl Strategy<Value = Matrix<Rational>> {
        prop::collection::vec((0usize..3, 0usize..3, -3i64..=3), 1..5).prop_map(|ops| {
            let mut g = Matrix::<Rational>::identity(3);
            for (p, q, c) in ops {
                if p != q {
                    let mut e = Matrix::identity(3);
                    e[(p, q)] = rat(c, 2);
                    g = &g * &e;
                }
            }
            g
        })
    }

    proptest! {
        #[test]
        fn group_action_is_a_homomorphism(g in small_sl3(), h in small_sl3(), kind in 0usize..3) {
            let rep = match kind {
                0 => RepSpace::wedge(3, 1).unwrap(),
                1 => RepSpace::wedge(3, 2).unwrap(),
                _ => RepSpace::adjoint(3).unwrap(),
            };
            let lhs = rep.group_action(&(&g * &h)).unwrap();
            let rhs = &rep.group_action(&g).unwrap() * &rep.group_action(&h).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn lie_action_is_a_homomorphism(p in 0usize..3, q in 0usize..3, r in 0usize..3, s in 0usize..3, kind in 0usize..3) {
            let rep = match kind {
                0 => RepSpace::wedge(3, 1).unwrap(),
                1 => RepSpace::wedge(3, 2).unwrap(),
                _ => RepSpace::adjoint(3).unwrap(),
            };
            let x = elementary(3, p, q);
            let y = elementary(3, r, s);
            let lhs = rep.lie_action(&x.commutator(&y).unwrap()).unwrap();
            let rhs = rep.lie_action(&x).unwrap().commutator(&rep.lie_action(&y).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
