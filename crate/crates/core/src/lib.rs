//! Higher-order likelihood inference for a scalar interest parameter.

pub mod error;
pub mod firstorder;
pub mod mc;
pub mod models;
pub mod numcore;
pub mod optim;
pub mod oracle;
pub mod scalar;
pub mod tem;

pub use error::{HoaError, Result};
pub use scalar::Real;

/// Double-precision instantiations of the generic core.
pub type Vector64 = numcore::RealVector<f64>;
pub type Matrix64 = numcore::RealMatrix<f64>;
pub type Fit64 = optim::Fit<f64>;
pub type ConstrainedFit64 = optim::ConstrainedFit<f64>;
pub type Pivots64 = firstorder::FirstOrderPivots<f64>;
pub type Directions64 = tem::Directions<f64>;
pub type Pipeline64 = tem::Pipeline<f64>;
pub type PivotSet64 = tem::PivotSet<f64>;
pub type Curve64 = tem::SignificanceCurve<f64>;
pub type Model64 = dyn models::Model<f64>;
