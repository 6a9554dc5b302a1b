//! Sample grids on a parameter interval `[a, b)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{rat, Rational, Scalar};

/// Denominator of randomly drawn rational sample points.
const RANDOM_DENOMINATOR: i64 = 1 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SampleGrid {
    /// `a + (b - a) j / m` for `j = 0..m`.
    #[default]
    Equispaced,
    /// Seeded uniform draws; rational with denominator `2^30` on `[0, 1)`.
    Random { seed: u64 },
}

impl SampleGrid {
    pub fn points(&self, a: &Rational, b: &Rational, m: usize) -> Result<Vec<Rational>> {
        if m == 0 {
            return Err(Error::OutOfRange("at least one sample is required".into()));
        }
        if a >= b {
            return Err(Error::OutOfRange(format!("empty interval [{a}, {b})")));
        }
        let width = b - a;
        Ok(match self {
            SampleGrid::Equispaced => (0..m)
                .map(|j| a + &width * rat(j as i64, m as i64))
                .collect(),
            SampleGrid::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..m)
                    .map(|_| {
                        let r = rng.gen_range(0..RANDOM_DENOMINATOR);
                        a + &width * rat(r, RANDOM_DENOMINATOR)
                    })
                    .collect()
            }
        })
    }

    pub fn points_as<T: Scalar>(&self, a: &Rational, b: &Rational, m: usize) -> Result<Vec<T>> {
        Ok(self
            .points(a, b, m)?
            .iter()
            .map(T::from_rational)
            .collect())
    }
}
