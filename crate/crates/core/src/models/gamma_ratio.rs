use rand::RngCore;
use rand_distr::{Distribution, Gamma};

use super::{check_positive, CoordMap, Model, ParamBox, Structure};
use crate::error::{HoaError, Result};
use crate::numcore::RealMatrix;
use crate::scalar::Real;

/// `Y₁/θ` and `Y₂θ` independent unit-scale gammas, observed through
/// `(y₁, y₂) = (a·s, a/s)` with `ℓ(θ) = −a(s/θ + θ/s)`.
#[derive(Debug, Clone)]
pub struct GammaRatio<T: Real> {
    y: Vec<T>,
    shape: f64,
}

impl<T: Real> GammaRatio<T> {
    /// Built from the conditional coordinates `(s°, a°)`.
    pub fn from_sa(s: T, a: T) -> Result<Self> {
        check_positive("gamma_ratio s and a", &[s, a])?;
        Ok(Self {
            y: vec![a * s, a / s],
            shape: 1.0,
        })
    }

    pub fn from_y(y: Vec<T>) -> Result<Self> {
        if y.len() != 2 {
            return Err(HoaError::InvalidInput(
                "gamma_ratio data must be the pair (y1, y2)".into(),
            ));
        }
        check_positive("gamma_ratio observations", &y)?;
        Ok(Self { y, shape: 1.0 })
    }

    /// Gamma shape used when simulating.
    pub fn with_shape(mut self, shape: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(HoaError::InvalidInput("gamma_ratio shape must be positive".into()));
        }
        self.shape = shape;
        Ok(self)
    }

    pub fn s(&self) -> T {
        (self.y[0] / self.y[1]).sqrt()
    }

    pub fn a(&self) -> T {
        (self.y[0] * self.y[1]).sqrt()
    }
}

impl<T: Real> Model<T> for GammaRatio<T> {
    fn id(&self) -> &str {
        "gamma_ratio"
    }

    fn dim(&self) -> usize {
        1
    }

    fn param_names(&self) -> Vec<String> {
        vec!["theta".into()]
    }

    fn observations(&self) -> &[T] {
        &self.y
    }

    fn n_obs(&self) -> usize {
        2
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
        let t = theta[0];
        -y[0] / t - y[1] * t
    }

    fn score(&self, theta: &[T]) -> Option<Vec<T>> {
        let t = theta[0];
        Some(vec![self.y[0] / (t * t) - self.y[1]])
    }

    fn obs_info(&self, theta: &[T]) -> Option<RealMatrix<T>> {
        let t = theta[0];
        Some(RealMatrix::from_fn(1, 1, |_, _| T::lit(2.0) * self.y[0] / (t * t * t)))
    }

    fn dloglik_dy(&self, theta: &[T]) -> Option<Vec<T>> {
        let t = theta[0];
        Some(vec![-T::one() / t, -t])
    }

    fn pivot(&self, j: usize, yj: &[T], theta: &[T]) -> Option<Vec<T>> {
        let t = theta[0];
        Some(vec![if j == 0 { yj[0] / t } else { yj[0] * t }])
    }

    fn sufficient_directions(&self, theta_hat: &[T]) -> Option<RealMatrix<T>> {
        let t = theta_hat[0];
        Some(RealMatrix::column_vector(&[self.y[0] / t, -self.y[1] / t]))
    }

    fn reparam(&self) -> Option<Vec<CoordMap>> {
        Some(vec![CoordMap::Log])
    }

    fn simulate(&self, theta: &[T], rng: &mut dyn RngCore) -> Option<Vec<T>> {
        let t = theta[0].to_f64_lossy();
        let g = Gamma::new(self.shape, 1.0).ok()?;
        Some(vec![T::lit(g.sample(rng) * t), T::lit(g.sample(rng) / t)])
    }

    fn with_observations(&self, y: Vec<T>) -> Result<Box<dyn Model<T>>> {
        Ok(Box::new(Self::from_y(y)?.with_shape(self.shape)?))
    }
}
