//! Unimodular lattices, boxes and the window sets `K_mu`, `K_1`.

pub mod enumerate;
pub mod reduce;
pub mod siegel;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::matrix::{sup_norm, Matrix};
use crate::scalar::Scalar;

pub use enumerate::{enumerate_in_box, EnumOptions, Enumeration, LatticePoint, DEFAULT_NODE_BUDGET};
pub use siegel::{siegel_transform, Tent};

/// The lattice spanned by the columns of `basis`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice<T> {
    basis: Matrix<T>,
}

impl<T: Scalar> Lattice<T> {
    /// Checks `|det| = 1`, exactly or up to a float tolerance scaled by the
    /// Hadamard bound of the basis.
    pub fn new(basis: Matrix<T>) -> Result<Self> {
        if !basis.is_square() || basis.rows() == 0 {
            return Err(Error::dim("lattice basis must be a nonempty square matrix"));
        }
        let det = basis.det()?.abs();
        let ok = if T::is_exact() {
            det == T::one()
        } else {
            let hadamard: f64 = basis
                .columns()
                .iter()
                .map(|c| c.iter().map(|x| x.to_f64().powi(2)).sum::<f64>().sqrt())
                .product();
            (det.to_f64() - 1.0).abs() <= T::tolerance().to_f64() * hadamard.max(1.0)
        };
        if !ok {
            return Err(Error::NotUnimodular(format!("|det| = {det}")));
        }
        Ok(Self { basis })
    }

    pub fn standard(n: usize) -> Self {
        Self {
            basis: Matrix::identity(n),
        }
    }

    /// `g Z^n`.
    pub fn from_group_element(g: &Matrix<T>) -> Result<Self> {
        Self::new(g.clone())
    }

    pub fn n(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &Matrix<T> {
        &self.basis
    }

    /// `g Lambda`.
    pub fn transform(&self, g: &Matrix<T>) -> Result<Self> {
        Self::new(g.try_mul(&self.basis)?)
    }

    pub fn to_json(&self) -> Value {
        self.basis.to_json()
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        Self::new(Matrix::from_json(v)?)
    }
}

/// Axis-aligned box `{x : |x_j| <= b_j (closed) or |x_j| < b_j (open)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisBox<T> {
    bounds: Vec<T>,
    closed: Vec<bool>,
}

impl<T: Scalar> AxisBox<T> {
    pub fn new(bounds: Vec<T>, closed: Vec<bool>) -> Result<Self> {
        if bounds.len() != closed.len() || bounds.is_empty() {
            return Err(Error::dim("box bounds and flags must have equal nonzero length"));
        }
        if bounds.iter().any(|b| *b <= T::zero()) {
            return Err(Error::OutOfRange("box bounds must be positive".into()));
        }
        Ok(Self { bounds, closed })
    }

    pub fn closed_cube(n: usize, b: T) -> Result<Self> {
        Self::new(vec![b; n], vec![true; n])
    }

    pub fn open_cube(n: usize, b: T) -> Result<Self> {
        Self::new(vec![b; n], vec![false; n])
    }

    /// `B_mu`: first coordinate closed, the rest open, all bounded by `mu`.
    pub fn b_mu(n: usize, mu: T) -> Result<Self> {
        let mut closed = vec![false; n];
        closed[0] = true;
        Self::new(vec![mu; n], closed)
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[T] {
        &self.bounds
    }

    pub fn closed_flags(&self) -> &[bool] {
        &self.closed
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.iter()
            .zip(self.bounds.iter().zip(&self.closed))
            .all(|(v, (b, &c))| if c { v.abs() <= *b } else { v.abs() < *b })
    }

    /// Intersection with the closed cube of radius `r`.
    pub fn within_cube(&self, r: &T) -> Result<Self> {
        let mut bounds = Vec::with_capacity(self.dim());
        let mut closed = Vec::with_capacity(self.dim());
        for (b, &c) in self.bounds.iter().zip(&self.closed) {
            if *r < *b {
                bounds.push(r.clone());
                closed.push(true);
            } else {
                bounds.push(b.clone());
                closed.push(c);
            }
        }
        Self::new(bounds, closed)
    }

    /// `min_j | b_j - |x_j| |`.
    pub fn face_distance(&self, x: &[T]) -> T {
        x.iter()
            .zip(&self.bounds)
            .map(|(v, b)| (b.clone() - v.abs()).abs())
            .reduce(|a, b| if b < a { b } else { a })
            .unwrap_or_else(T::zero)
    }

    /// Lebesgue measure `prod 2 b_j`.
    pub fn volume(&self) -> T {
        self.bounds
            .iter()
            .fold(T::one(), |acc, b| acc * T::from_i64(2) * b.clone())
    }
}

fn check_mu<T: Scalar>(mu: &T) -> Result<()> {
    if *mu <= T::zero() || *mu > T::one() {
        return Err(Error::OutOfRange(format!("mu = {mu} outside (0, 1]")));
    }
    Ok(())
}

/// A nonzero point of `Lambda` in `B_mu`, if there is one.
pub fn k_mu_witness<T: Scalar>(
    lattice: &Lattice<T>,
    mu: &T,
    opts: &EnumOptions,
) -> Result<Option<LatticePoint<T>>> {
    check_mu(mu)?;
    let bx = AxisBox::b_mu(lattice.n(), mu.clone())?;
    let e = enumerate_in_box(lattice, &bx, &opts.first_hit())?;
    if e.boundary_ambiguous {
        log::warn!(
            "K_mu decision within {} of a box face (margin {:?})",
            enumerate::BOUNDARY_MARGIN,
            e.margin.as_ref().map(Scalar::to_f64)
        );
    }
    let w = e.nonzero().next().cloned();
    Ok(w)
}

/// `Lambda ∩ B_mu = {0}`.
pub fn in_k_mu<T: Scalar>(lattice: &Lattice<T>, mu: &T) -> Result<bool> {
    Ok(k_mu_witness(lattice, mu, &EnumOptions::default())?.is_none())
}

/// No nonzero point in the open unit cube. Exact backend only.
pub fn in_k1<T: Scalar>(lattice: &Lattice<T>) -> Result<bool> {
    if !T::is_exact() {
        return Err(Error::ExactRequired("K_1 membership is a boundary decision".into()));
    }
    let bx = AxisBox::open_cube(lattice.n(), T::one())?;
    Ok(enumerate_in_box(lattice, &bx, &EnumOptions::default().first_hit())?.nonzero_count() == 0)
}

/// Sup-norm of a shortest nonzero vector.
pub fn sup_shortest<T: Scalar>(lattice: &Lattice<T>) -> Result<T> {
    sup_shortest_with(lattice, &EnumOptions::default())
}

pub fn sup_shortest_with<T: Scalar>(lattice: &Lattice<T>, opts: &EnumOptions) -> Result<T> {
    let n = lattice.n();
    let cols = lattice.basis().columns();
    let reduced = reduce::lll(&cols, &T::ratio(3, 4))?;
    let mut radius = reduced
        .basis
        .iter()
        .map(|v| sup_norm(v))
        .reduce(|a, b| if b < a { b } else { a })
        .ok_or_else(|| Error::dim("empty basis"))?;
    if radius > T::one() {
        radius = T::one();
    }
    for _ in 0..64 {
        let bx = AxisBox::closed_cube(n, radius.clone())?;
        if let Some(p) = least_sup_point(lattice, &bx, opts)? {
            return Ok(sup_norm(&p.coords));
        }
        radius = radius * T::from_i64(2);
    }
    Err(Error::Internal("no nonzero vector found in growing boxes".into()))
}

/// Nonzero point of `Lambda` in `bx` of least sup-norm, ties broken by
/// coefficients. The box is shrunk by halving before the final full
/// enumeration, so huge boxes around degenerate lattices stay cheap.
pub fn least_sup_point<T: Scalar>(
    lattice: &Lattice<T>,
    bx: &AxisBox<T>,
    opts: &EnumOptions,
) -> Result<Option<LatticePoint<T>>> {
    let first = enumerate_in_box(lattice, bx, &opts.first_hit())?;
    let Some(p) = first.nonzero().next() else {
        return Ok(None);
    };
    let two = T::from_i64(2);
    let mut r = sup_norm(&p.coords);
    loop {
        let half = r.clone() / two.clone();
        if half <= T::zero() {
            break;
        }
        let e = enumerate_in_box(lattice, &bx.within_cube(&half)?, &opts.first_hit())?;
        let Some(q) = e.nonzero().next() else {
            break;
        };
        r = sup_norm(&q.coords);
    }
    let e = enumerate_in_box(lattice, &bx.within_cube(&r)?, opts)?;
    Ok(e.nonzero()
        .min_by(|a, b| {
            sup_norm(&a.coords)
                .partial_cmp(&sup_norm(&b.coords))
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.coeffs.cmp(&b.coeffs))
        })
        .cloned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{make_a_tau, make_u, TauVector};
    use crate::scalar::{rat, Rational};

    type L = Lattice<Rational>;

    fn diag(a: Rational, b: Rational) -> L {
        L::new(Matrix::diag(&[a, b])).unwrap()
    }

    #[test]
    fn closed_box_around_z2() {
        let bx = AxisBox::closed_cube(2, rat(3, 2)).unwrap();
        let e = enumerate_in_box(&L::standard(2), &bx, &EnumOptions::default()).unwrap();
        assert_eq!(e.points.len(), 9);
    }

    #[test]
    fn open_unit_box_around_z2() {
        let bx = AxisBox::open_cube(2, rat(1, 1)).unwrap();
        let e = enumerate_in_box(&L::standard(2), &bx, &EnumOptions::default()).unwrap();
        assert_eq!(e.points.len(), 1);
        assert!(e.points[0].is_origin());
    }

    #[test]
    fn stretched_lattice_in_open_unit_box() {
        let lat = diag(rat(2, 1), rat(1, 2));
        let bx = AxisBox::open_cube(2, rat(1, 1)).unwrap();
        let e = enumerate_in_box(&lat, &bx, &EnumOptions::default()).unwrap();
        let coords: Vec<Vec<Rational>> = e.points.iter().map(|p| p.coords.clone()).collect();
        assert_eq!(
            coords,
            vec![
                vec![rat(0, 1), rat(-1, 2)],
                vec![rat(0, 1), rat(0, 1)],
                vec![rat(0, 1), rat(1, 2)],
            ]
        );
    }

    #[test]
    fn k_mu_examples() {
        assert!(in_k_mu(&L::standard(3), &rat(99, 100)).unwrap());
        assert!(!in_k_mu(&diag(rat(1, 2), rat(2, 1)), &rat(3, 5)).unwrap());
        let u = L::new(make_u(&[rat(3, 10)])).unwrap();
        assert!(in_k_mu(&u, &rat(9, 10)).unwrap());
        assert!(in_k_mu(&u, &rat(0, 1)).is_err());
    }

    #[test]
    fn k1_examples() {
        assert!(in_k1(&L::standard(3)).unwrap());
        assert!(!in_k1(&diag(rat(1, 2), rat(2, 1))).unwrap());
        let mut g = Matrix::<Rational>::identity(3);
        g[(0, 1)] = rat(1, 2);
        g[(0, 2)] = rat(1, 3);
        g[(1, 2)] = rat(1, 5);
        assert!(in_k1(&L::new(g).unwrap()).unwrap());
        assert!(matches!(in_k1(&Lattice::<f64>::standard(2)), Err(Error::ExactRequired(_))));
    }

    #[test]
    fn shortest_examples() {
        assert_eq!(sup_shortest(&L::standard(4)).unwrap(), rat(1, 1));
        let a: Matrix<Rational> = make_a_tau(&TauVector::from_n(&[4])).unwrap();
        assert_eq!(sup_shortest(&L::new(a).unwrap()).unwrap(), rat(1, 4));
        let f = Lattice::<f64>::new(make_a_tau(&TauVector::Real(vec![3.0])).unwrap()).unwrap();
        assert!((sup_shortest(&f).unwrap() - (-3.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn non_unimodular_rejected() {
        let m = Matrix::diag(&[rat(2, 1), rat(1, 1)]);
        assert!(matches!(L::new(m), Err(Error::NotUnimodular(_))));
    }

    #[test]
    fn float_boundary_is_flagged() {
        let bx = AxisBox::open_cube(2, 1.0).unwrap();
        let e = enumerate_in_box(&Lattice::<f64>::standard(2), &bx, &EnumOptions::default()).unwrap();
        assert!(e.boundary_ambiguous);
        let bx = AxisBox::open_cube(2, 0.5).unwrap();
        let e = enumerate_in_box(&Lattice::<f64>::standard(2), &bx, &EnumOptions::default()).unwrap();
        assert!(!e.boundary_ambiguous);
    }

    #[test]
    fn node_budget_is_enforced() {
        let bx = AxisBox::closed_cube(2, rat(50, 1)).unwrap();
        let opts = EnumOptions { node_budget: 100, stop_after: None };
        assert!(matches!(
            enumerate_in_box(&L::standard(2), &bx, &opts),
            Err(Error::NodeBudget(100))
        ));
    }
}
