//! Finite differences, dense linear algebra and normal-distribution helpers.

pub mod diff;
pub mod interp;
pub mod matrix;
pub mod normal;
pub mod vector;

pub use diff::{gradient, hessian, jacobian, jacobian5};
pub use matrix::{gram_det_sqrt, Cholesky, Lu, RealMatrix};
pub use vector::RealVector;
