//! Empirical measures on translated curve segments.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::diophantine::Curve;
use crate::error::{Error, Result};
use crate::grid::SampleGrid;
use crate::group::{make_a_tau, make_u, sigma, TauVector};
use crate::lattice::Lattice;
use crate::matrix::Matrix;
use crate::scalar::{rational_from_f64, Rational, Scalar};

/// `x_0 = g_0 Z^n`, optionally with a sequence `x_i = g_i Z^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasePoint {
    g0: Matrix<Rational>,
    sequence: Vec<(u64, Matrix<Rational>)>,
}

fn check_sl(g: &Matrix<Rational>, n: usize) -> Result<()> {
    if !g.is_square() || g.rows() != n {
        return Err(Error::dim("base point has the wrong size"));
    }
    if g.det()? != Rational::from_integer(1.into()) {
        return Err(Error::NotUnimodular("base points need det g = 1".into()));
    }
    Ok(())
}

impl BasePoint {
    pub fn new(g0: Matrix<Rational>) -> Result<Self> {
        check_sl(&g0, g0.rows())?;
        Ok(Self {
            g0,
            sequence: Vec::new(),
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            g0: Matrix::identity(n),
            sequence: Vec::new(),
        }
    }

    /// `g_i` for the listed indices; other indices use `g_0`.
    pub fn with_sequence(mut self, sequence: Vec<(u64, Matrix<Rational>)>) -> Result<Self> {
        for (_, g) in &sequence {
            check_sl(g, self.n())?;
        }
        self.sequence = sequence;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.g0.rows()
    }

    pub fn g0(&self) -> &Matrix<Rational> {
        &self.g0
    }

    pub fn at(&self, i: u64) -> &Matrix<Rational> {
        self.sequence
            .iter()
            .find(|(j, _)| *j == i)
            .map_or(&self.g0, |(_, g)| g)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "g0": self.g0.to_json(),
            "sequence": self.sequence.iter().map(|(i, g)| json!({"i": i, "g": g.to_json()})).collect::<Vec<_>>(),
        })
    }

    /// `{"g0": [[..]], "sequence": [{"i": 3, "g": [[..]]}]}`; the sequence
    /// is optional.
    pub fn from_json(v: &Value) -> Result<Self> {
        let g0 = Matrix::from_json(v.get("g0").ok_or_else(|| Error::Parse("base point lacks `g0`".into()))?)?;
        let mut sequence = Vec::new();
        if let Some(items) = v.get("sequence").and_then(Value::as_array) {
            for it in items {
                let i = it
                    .get("i")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Error::Parse("sequence entry lacks `i`".into()))?;
                let g = Matrix::from_json(it.get("g").ok_or_else(|| Error::Parse("sequence entry lacks `g`".into()))?)?;
                sequence.push((i, g));
            }
        }
        Self::new(g0)?.with_sequence(sequence)
    }
}

/// `a_tau` for real `tau` on either backend. On the exact backend the
/// entries `e^{-tau_j}` are read back exactly from their doubles and the
/// first entry is their reciprocal product, so `det = 1` holds exactly.
pub fn tau_vector_for<T: Scalar>(taus: &[f64]) -> Result<TauVector> {
    if T::is_exact() {
        let ns = taus
            .iter()
            .map(|t| rational_from_f64(t.exp()))
            .collect::<Result<Vec<_>>>()?;
        Ok(TauVector::LogRational(ns))
    } else {
        Ok(TauVector::Real(taus.to_vec()))
    }
}

#[derive(Clone, Debug)]
pub struct MeasurePoint<T> {
    pub s: Rational,
    pub lattice: Lattice<T>,
    /// The `sigma`-partner for the doubled system.
    pub partner: Option<Lattice<T>>,
}

#[derive(Clone, Debug)]
pub struct Provenance {
    pub i: Option<u64>,
    pub curve: Curve,
    pub tau: Vec<f64>,
    pub base: Value,
}

/// Uniform probability measure on the sample lattices.
#[derive(Clone, Debug)]
pub struct EmpiricalMeasure<T> {
    pub points: Vec<MeasurePoint<T>>,
    pub provenance: Provenance,
}

impl<T: Scalar> EmpiricalMeasure<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.points.len() as f64
    }

    pub fn total_weight(&self) -> f64 {
        self.weight() * self.points.len() as f64
    }

    /// `int f d mu` for a lattice function `f`.
    pub fn integrate(&self, f: impl Fn(&MeasurePoint<T>) -> Result<f64> + Sync + Send) -> Result<f64> {
        let vals = self.points.par_iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(vals.iter().sum::<f64>() * self.weight())
    }
}

/// `a u(phi(s)) g_0`.
pub fn translate_element<T: Scalar>(a: &Matrix<T>, curve: &Curve, s: &Rational, g0: &Matrix<Rational>) -> Result<Matrix<T>> {
    let xi = curve.eval(&T::from_rational(s));
    a.try_mul(&make_u(&xi))?.try_mul(&g0.map(T::from_rational))
}

/// Lattices `a_tau u(phi(s_j)) g_0 Z^n` on the grid, with their
/// `sigma`-partners when `doubled`.
pub fn empirical_measure<T: Scalar>(
    curve: &Curve,
    tau: &TauVector,
    g0: &Matrix<Rational>,
    samples: usize,
    doubled: bool,
    grid: SampleGrid,
) -> Result<EmpiricalMeasure<T>> {
    let n = curve.k() + 1;
    if tau.n() != n || g0.rows() != n {
        return Err(Error::dim("curve, tau and base point dimensions differ"));
    }
    let a = make_a_tau::<T>(tau)?;
    let pts = grid.points(&curve.a, &curve.b, samples)?;
    let points = pts
        .par_iter()
        .map(|s| {
            let g = translate_element(&a, curve, s, g0)?;
            let partner = if doubled {
                Some(Lattice::new(sigma(&g)?)?)
            } else {
                None
            };
            Ok(MeasurePoint {
                s: s.clone(),
                lattice: Lattice::new(g)?,
                partner,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EmpiricalMeasure {
        points,
        provenance: Provenance {
            i: None,
            curve: curve.clone(),
            tau: tau.as_f64(),
            base: g0.to_json(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num_traits::Zero;

    fn line() -> Curve {
        Curve::new(vec![vec![rat(0, 1)], vec![rat(1, 1)]], rat(0, 1), rat(1, 1)).unwrap()
    }

    #[test]
    fn trivial_translate_is_standard() {
        let flat = Curve::new(vec![vec![rat(0, 1), rat(0, 1)], vec![rat(0, 1), rat(0, 1)]], rat(0, 1), rat(1, 1)).unwrap();
        let m = empirical_measure::<Rational>(&flat, &TauVector::from_n(&[1, 1]), &Matrix::identity(3), 5, false, SampleGrid::Equispaced)
            .unwrap();
        assert_eq!(m.len(), 5);
        assert!(m.points.iter().all(|p| p.lattice.basis().is_identity()));
        assert!((m.total_weight() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn horocycle_basis() {
        let m = empirical_measure::<Rational>(&line(), &TauVector::from_n(&[100]), &Matrix::identity(2), 4, false, SampleGrid::Equispaced)
            .unwrap();
        for p in &m.points {
            let want = Matrix::from_rows(vec![
                vec![rat(100, 1), rat(100, 1) * &p.s],
                vec![Rational::zero(), rat(1, 100)],
            ])
            .unwrap();
            assert_eq!(p.lattice.basis(), &want);
        }
    }

    #[test]
    fn doubled_partners_are_sigma_images() {
        let c = Curve::moment(2, rat(0, 1), rat(1, 1)).unwrap();
        let m = empirical_measure::<Rational>(&c, &TauVector::from_n(&[3, 2]), &Matrix::identity(3), 3, true, SampleGrid::Equispaced)
            .unwrap();
        for p in &m.points {
            let partner = p.partner.as_ref().unwrap();
            assert_eq!(partner.basis(), &sigma(p.lattice.basis()).unwrap());
        }
    }

    #[test]
    fn exact_tau_is_unimodular() {
        let tau = tau_vector_for::<Rational>(&[3.5, 1.25]).unwrap();
        let d = tau.diagonal::<Rational>().unwrap();
        assert_eq!(d.iter().fold(rat(1, 1), |a, x| a * x), rat(1, 1));
        assert!(matches!(tau_vector_for::<f64>(&[1.0]).unwrap(), TauVector::Real(_)));
    }

    #[test]
    fn base_point_json() {
        let g = Matrix::from_i64_rows(&[&[1, 1], &[0, 1]]).unwrap();
        let b = BasePoint::new(Matrix::identity(2)).unwrap().with_sequence(vec![(3, g.clone())]).unwrap();
        let back = BasePoint::from_json(&b.to_json()).unwrap();
        assert_eq!(back, b);
        assert_eq!(back.at(3), &g);
        assert!(back.at(4).is_identity());
        assert!(BasePoint::new(Matrix::from_i64_rows(&[&[2, 0], &[0, 1]]).unwrap()).is_err());
    }
}
