//! Holomorphic functional calculus, divided differences and the
//! noncommutative series built on them, realised on complex matrices.
//!
//! Every routine is generic over the real scalar (`f32` or `f64`); the
//! aliases below fix `f64`.

pub mod contour;
pub mod divdiff;
pub mod error;
pub mod funcalc;
pub mod magnus;
pub mod ncseries;
pub mod quadrature;
pub mod random;
pub mod rearrange;
pub mod scalar;
pub mod tensor;

pub use error::{Error, Result};
pub use contour::Contour;
pub use divdiff::{Domain, HolomorphicFunction, MultiIndex, NodeSet};
pub use scalar::Real;
pub use tensor::{SquareMatrix, TensorOperator};

pub type C64 = num_complex::Complex<f64>;
pub type Matrix = SquareMatrix<f64>;
pub type Tensor = TensorOperator<f64>;
