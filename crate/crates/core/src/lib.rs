pub mod constructions;
pub mod diophantine;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod group;
pub mod lattice;
pub mod matrix;
pub mod scalar;
pub mod weights;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::{Backend, Rational, Scalar};

pub type ExactMatrix = Matrix<Rational>;
pub type FloatMatrix = Matrix<f64>;
pub type ExactLattice = lattice::Lattice<Rational>;
pub type FloatLattice = lattice::Lattice<f64>;
