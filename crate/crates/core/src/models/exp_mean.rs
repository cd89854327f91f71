use rand::RngCore;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::{check_positive, CoordMap, Model, ParamBox, Structure};
use crate::error::{HoaError, Result};
use crate::numcore::RealMatrix;
use crate::scalar::Real;

/// Parametrisation of the exponential sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpMeanScale {
    /// `θ = μ`, the mean.
    Mean,
    /// `θ = 1/μ`, the canonical rate.
    Rate,
}

/// Independent exponential observations.
#[derive(Debug, Clone)]
pub struct ExpMean<T: Real> {
    y: Vec<T>,
    scale: ExpMeanScale,
}

impl<T: Real> ExpMean<T> {
    pub fn new(y: Vec<T>) -> Result<Self> {
        Self::with_scale(y, ExpMeanScale::Mean)
    }

    pub fn with_scale(y: Vec<T>, scale: ExpMeanScale) -> Result<Self> {
        if y.is_empty() {
            return Err(HoaError::InvalidInput("exp_mean needs at least one observation".into()));
        }
        check_positive("exp_mean observations", &y)?;
        Ok(Self { y, scale })
    }

    fn n(&self) -> T {
        T::lit(self.y.len() as f64)
    }

    fn total(&self) -> T {
        self.y.iter().copied().sum()
    }
}

impl<T: Real> Model<T> for ExpMean<T> {
    fn id(&self) -> &str {
        "exp_mean"
    }

    fn dim(&self) -> usize {
        1
    }

    fn param_names(&self) -> Vec<String> {
        match self.scale {
            ExpMeanScale::Mean => vec!["mu".into()],
            ExpMeanScale::Rate => vec!["rate".into()],
        }
    }

    fn observations(&self) -> &[T] {
        &self.y
    }

    fn domain(&self) -> ParamBox<T> {
        ParamBox::positive(1)
    }

    fn start(&self) -> Vec<T> {
        vec![T::one()]
    }

    fn structure(&self) -> Structure {
        Structure::DistributionFunction
    }

    fn loglik_at(&self, theta: &[T], y: &[T]) -> T {
        let n = T::lit(y.len() as f64);
        let s: T = y.iter().copied().sum();
        match self.scale {
            ExpMeanScale::Mean => -n * theta[0].ln() - s / theta[0],
            ExpMeanScale::Rate => n * theta[0].ln() - s * theta[0],
        }
    }

    fn score(&self, theta: &[T]) -> Option<Vec<T>> {
        let t = theta[0];
        Some(vec![match self.scale {
            ExpMeanScale::Mean => -self.n() / t + self.total() / (t * t),
            ExpMeanScale::Rate => self.n() / t - self.total(),
        }])
    }

    fn obs_info(&self, theta: &[T]) -> Option<RealMatrix<T>> {
        let t = theta[0];
        let v = match self.scale {
            ExpMeanScale::Mean => -self.n() / (t * t) + T::lit(2.0) * self.total() / (t * t * t),
            ExpMeanScale::Rate => self.n() / (t * t),
        };
        Some(RealMatrix::from_fn(1, 1, |_, _| v))
    }

    fn dloglik_dy(&self, theta: &[T]) -> Option<Vec<T>> {
        let g = match self.scale {
            ExpMeanScale::Mean => -T::one() / theta[0],
            ExpMeanScale::Rate => -theta[0],
        };
        Some(vec![g; self.y.len()])
    }

    fn pivot(&self, _j: usize, yj: &[T], theta: &[T]) -> Option<Vec<T>> {
        Some(vec![match self.scale {
            ExpMeanScale::Mean => yj[0] / theta[0],
            ExpMeanScale::Rate => yj[0] * theta[0],
        }])
    }

    fn sufficient_directions(&self, theta_hat: &[T]) -> Option<RealMatrix<T>> {
        let t = theta_hat[0];
        let col: Vec<T> = self
            .y
            .iter()
            .map(|&y| match self.scale {
                ExpMeanScale::Mean => y / t,
                ExpMeanScale::Rate => -y / t,
            })
            .collect();
        Some(RealMatrix::column_vector(&col))
    }

    fn reparam(&self) -> Option<Vec<CoordMap>> {
        Some(vec![CoordMap::Log])
    }

    fn simulate(&self, theta: &[T], rng: &mut dyn RngCore) -> Option<Vec<T>> {
        let rate = match self.scale {
            ExpMeanScale::Mean => 1.0 / theta[0].to_f64_lossy(),
            ExpMeanScale::Rate => theta[0].to_f64_lossy(),
        };
        let e = Exp::new(rate).ok()?;
        Some((0..self.y.len()).map(|_| T::lit(e.sample(rng))).collect())
    }

    fn with_observations(&self, y: Vec<T>) -> Result<Box<dyn Model<T>>> {
        Ok(Box::new(Self::with_scale(y, self.scale)?))
    }
}
