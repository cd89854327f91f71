//! Parametric models and the built-in catalog.
//!
//! A model exposes its log-likelihood as a function of both the parameter and
//! the data, since the tangent exponential model differentiates in the sample
//! space. Terms of the log-likelihood that depend on neither `θ` jointly with
//! `y` may be dropped; they never affect any inferential quantity.

mod adapters;
mod bvn_corr;
mod exp_mean;
mod exp_pair;
mod gamma_ratio;
mod glm;
mod linexp;
mod regression;
mod spec;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{HoaError, Result};
use crate::numcore::RealMatrix;
use crate::scalar::{to_f64_vec, Real};

pub use adapters::{NumericOnly, Reparametrized};
pub use bvn_corr::BvnCorr;
pub use exp_mean::{ExpMean, ExpMeanScale};
pub use exp_pair::ExpPair;
pub use gamma_ratio::GammaRatio;
pub use glm::{BinomialGlm, PoissonGlm};
pub use linexp::LinExp2;
pub use regression::{ErrorLaw, RegressionScale};
pub use spec::{catalog, catalog_ids, ModelSpec};

/// How sufficient directions are obtained for a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    /// Continuous observations with a per-observation pivot `F_j(y_j; θ)`.
    DistributionFunction,
    /// Continuous observations `y_j = g_j(θ, ε_j)`; the pivot is `ε_j`.
    StructuralEquation,
    /// Discrete observations handled through a locally defined score variable.
    DiscreteScore,
}

impl Structure {
    pub fn is_discrete(self) -> bool {
        self == Structure::DiscreteScore
    }
}

/// Smooth coordinate map used for reparametrisation: `θ = g(θ')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordMap {
    Identity,
    /// `θ = exp(θ')`, for coordinates on the positive half-line.
    Log,
}

impl CoordMap {
    pub fn forward<T: Real>(self, t: T) -> T {
        match self {
            CoordMap::Identity => t,
            CoordMap::Log => t.exp(),
        }
    }

    pub fn inverse<T: Real>(self, x: T) -> T {
        match self {
            CoordMap::Identity => x,
            CoordMap::Log => x.ln(),
        }
    }

    /// `dθ/dθ'` at `θ'`.
    pub fn d1<T: Real>(self, t: T) -> T {
        match self {
            CoordMap::Identity => T::one(),
            CoordMap::Log => t.exp(),
        }
    }

    /// `d²θ/dθ'²` at `θ'`.
    pub fn d2<T: Real>(self, t: T) -> T {
        match self {
            CoordMap::Identity => T::zero(),
            CoordMap::Log => t.exp(),
        }
    }
}

/// Open rectangular parameter domain; bounds may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBox<T: Real> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Real> ParamBox<T> {
    pub fn unbounded(p: usize) -> Self {
        Self {
            lower: vec![T::neg_infinity(); p],
            upper: vec![T::infinity(); p],
        }
    }

    pub fn positive(p: usize) -> Self {
        Self {
            lower: vec![T::zero(); p],
            upper: vec![T::infinity(); p],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, theta: &[T]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&t, (&lo, &hi))| t.is_finite() && t > lo && t < hi)
    }

    pub fn contains_coord(&self, k: usize, v: T) -> bool {
        v.is_finite() && v > self.lower[k] && v < self.upper[k]
    }

    pub fn check(&self, theta: &[T]) -> Result<()> {
        if self.contains(theta) {
            Ok(())
        } else {
            Err(HoaError::Inadmissible {
                at: to_f64_vec(theta),
            })
        }
    }

    /// Largest `t ∈ (0, 1]` keeping `theta + t·step` inside the box, with the
    /// iterate moving at most 90% of the way to any finite bound.
    pub fn step_fraction(&self, theta: &[T], step: &[T]) -> T {
        let keep = T::lit(0.9);
        let mut t = T::one();
        for (k, (&x, &d)) in theta.iter().zip(step).enumerate() {
            if d > T::zero() && self.upper[k].is_finite() {
                t = t.min(keep * (self.upper[k] - x) / d);
            } else if d < T::zero() && self.lower[k].is_finite() {
                t = t.min(keep * (self.lower[k] - x) / d);
            }
        }
        t
    }
}

/// A parametric model together with its observed data `y°`.
///
/// Only `loglik_at` is mandatory for inference; the closed-form hooks, when
/// present, replace finite differences.
pub trait Model<T: Real>: Send + Sync {
    fn id(&self) -> &str;

    /// Parameter dimension `p`.
    fn dim(&self) -> usize;

    fn param_names(&self) -> Vec<String>;

    /// Observed responses, flattened observation by observation.
    fn observations(&self) -> &[T];

    /// Length of each observation vector `y_j`.
    fn obs_dim(&self) -> usize {
        1
    }

    fn n_obs(&self) -> usize {
        self.observations().len() / self.obs_dim()
    }

    fn domain(&self) -> ParamBox<T>;

    /// Coordinate of `θ` holding the interest parameter `ψ`.
    fn interest_index(&self) -> usize {
        0
    }

    /// Starting point for the full fit; must be admissible.
    fn start(&self) -> Vec<T>;

    fn structure(&self) -> Structure;

    /// `ℓ(θ; y)` for arbitrary data of the observed shape.
    fn loglik_at(&self, theta: &[T], y: &[T]) -> T;

    fn loglik(&self, theta: &[T]) -> T {
        self.loglik_at(theta, self.observations())
    }

    fn score(&self, _theta: &[T]) -> Option<Vec<T>> {
        None
    }

    /// Observed information `−∂²ℓ/∂θ∂θᵀ`.
    fn obs_info(&self, _theta: &[T]) -> Option<RealMatrix<T>> {
        None
    }

    /// `∂ℓ(θ; y)/∂y` at `y°`, flattened like `observations`.
    fn dloglik_dy(&self, _theta: &[T]) -> Option<Vec<T>> {
        None
    }

    /// Pivotal quantity for observation `j` given its value `y_j`.
    fn pivot(&self, _j: usize, _yj: &[T], _theta: &[T]) -> Option<Vec<T>> {
        None
    }

    /// Closed-form sufficient directions at `θ̂`, `n·obs_dim × p`.
    fn sufficient_directions(&self, _theta_hat: &[T]) -> Option<RealMatrix<T>> {
        None
    }

    /// `E(y_j; θ)` for discrete models.
    fn mean(&self, _j: usize, _theta: &[T]) -> Option<T> {
        None
    }

    /// `∂E(y_j; θ)/∂θ`.
    fn dmean_dtheta(&self, _j: usize, _theta: &[T]) -> Option<Vec<T>> {
        None
    }

    /// `∂²ℓ(θ; y_j)/∂θ∂y_j` at `y_j°`; for discrete models this is `∂w_j/∂y_j`.
    fn dscore_dy(&self, _j: usize, _theta: &[T]) -> Option<Vec<T>> {
        None
    }

    /// Declared smooth reparametrisation used by invariance checks.
    fn reparam(&self) -> Option<Vec<CoordMap>> {
        None
    }

    /// Draws a data set of the observed shape at `theta`.
    fn simulate(&self, _theta: &[T], _rng: &mut dyn RngCore) -> Option<Vec<T>> {
        None
    }

    /// The same model with different observed data.
    fn with_observations(&self, y: Vec<T>) -> Result<Box<dyn Model<T>>>;

    /// Number of observations the catalog entry treats as its sample size.
    fn sample_size(&self) -> usize {
        self.n_obs()
    }
}

pub(crate) fn check_positive<T: Real>(what: &str, v: &[T]) -> Result<()> {
    if v.iter().all(|&x| x.is_finite() && x > T::zero()) {
        Ok(())
    } else {
        Err(HoaError::InvalidInput(format!("{what} must be positive and finite")))
    }
}

pub(crate) fn check_finite<T: Real>(what: &str, v: &[T]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(HoaError::InvalidInput(format!("{what} must be finite")))
    }
}
