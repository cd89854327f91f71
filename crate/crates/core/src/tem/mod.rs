//! Tangent exponential model: sufficient directions, canonical parameter,
//! `q`, `r*` and the Lugannani–Rice approximation.

pub mod canonical;
pub mod curve;
pub mod directions;
pub mod pipeline;
pub mod q;

pub use canonical::{canonical_phi, CanonicalParam};
pub use curve::{
    confidence_interval, confidence_interval_with, curve_from_pipeline, data_digest,
    significance_curve, SignificanceCurve,
};
pub use directions::{directions, directions_discrete, directions_from_quantile, DirectionKind, Directions};
pub use pipeline::{Method, Pipeline, PivotSet};
pub use q::{chi_projection, lugannani_rice, q_general, q_scalar, rstar, ChiProjection, WINDOW};
