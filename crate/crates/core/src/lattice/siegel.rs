//! Siegel transforms of sup-norm tent functions.

use serde_json::{json, Value};

use super::{enumerate_in_box, AxisBox, EnumOptions, Lattice};
use crate::error::{Error, Result};
use crate::matrix::sup_norm;
use crate::scalar::Scalar;

/// `f(v) = height * max(0, 1 - |v - center|_inf / radius)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tent<T> {
    pub center: Vec<T>,
    pub radius: T,
    pub height: T,
}

impl<T: Scalar> Tent<T> {
    pub fn new(center: Vec<T>, radius: T, height: T) -> Result<Self> {
        if radius <= T::zero() {
            return Err(Error::OutOfRange("tent radius must be positive".into()));
        }
        Ok(Self {
            center,
            radius,
            height,
        })
    }

    pub fn centered(n: usize, radius: T, height: T) -> Result<Self> {
        Self::new(vec![T::zero(); n], radius, height)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn value(&self, v: &[T]) -> T {
        let d: Vec<T> = v
            .iter()
            .zip(&self.center)
            .map(|(a, c)| a.clone() - c.clone())
            .collect();
        let t = T::one() - sup_norm(&d) / self.radius.clone();
        if t > T::zero() {
            self.height.clone() * t
        } else {
            T::zero()
        }
    }

    /// `integral over R^n = height * 2^n * radius^n / (n + 1)`.
    pub fn integral(&self) -> T {
        let n = self.dim();
        let mut acc = self.height.clone();
        for _ in 0..n {
            acc = acc * T::from_i64(2) * self.radius.clone();
        }
        acc / T::from_i64(n as i64 + 1)
    }

    /// Closed origin-centred box containing the support.
    pub fn support_box(&self) -> Result<AxisBox<T>> {
        let bounds = self
            .center
            .iter()
            .map(|c| c.abs() + self.radius.clone())
            .collect();
        AxisBox::new(bounds, vec![true; self.dim()])
    }

    pub fn to_json(&self) -> Value {
        json!({
            "center": self.center.iter().map(Scalar::to_json).collect::<Vec<_>>(),
            "radius": self.radius.to_json(),
            "height": self.height.to_json(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let field = |k: &str| {
            v.get(k)
                .ok_or_else(|| Error::Parse(format!("tent descriptor lacks `{k}`")))
        };
        let center = field("center")?
            .as_array()
            .ok_or_else(|| Error::Parse("tent center must be an array".into()))?
            .iter()
            .map(T::from_json)
            .collect::<Result<Vec<_>>>()?;
        Self::new(center, T::from_json(field("radius")?)?, T::from_json(field("height")?)?)
    }
}

/// `sum over nonzero v in Lambda of f(v)`.
pub fn siegel_transform<T: Scalar>(lattice: &Lattice<T>, f: &Tent<T>) -> Result<T> {
    if f.dim() != lattice.n() {
        return Err(Error::dim("tent and lattice dimensions differ"));
    }
    let e = enumerate_in_box(lattice, &f.support_box()?, &EnumOptions::default())?;
    Ok(e.nonzero().fold(T::zero(), |acc, p| acc + f.value(&p.coords)))
}
