use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use super::{check_finite, Model, ParamBox, Structure};
use crate::error::{HoaError, Result};
use crate::numcore::RealMatrix;
use crate::scalar::Real;

/// Normal sample in a linear exponential family parametrisation:
/// `θ = (μ/σ², 1/σ²)`, so `ℓ = θ₁Σy − θ₂Σy²/2 − nθ₁²/(2θ₂) + (n/2)log θ₂`.
#[derive(Debug, Clone)]
pub struct LinExp2<T: Real> {
    y: Vec<T>,
    interest: usize,
}

impl<T: Real> LinExp2<T> {
    pub fn new(y: Vec<T>, interest: usize) -> Result<Self> {
        if y.len() < 3 {
            return Err(HoaError::InvalidInput("linexp_2par needs at least three observations".into()));
        }
        if interest > 1 {
            return Err(HoaError::InvalidInput("linexp_2par interest index must be 0 or 1".into()));
        }
        check_finite("linexp_2par observations", &y)?;
        Ok(Self { y, interest })
    }

    fn sums(y: &[T]) -> (T, T, T) {
        let n = T::lit(y.len() as f64);
        let s1: T = y.iter().copied().sum();
        let s2: T = y.iter().map(|&v| v * v).sum();
        (n, s1, s2)
    }
}

impl<T: Real> Model<T> for LinExp2<T> {
    fn id(&self) -> &str {
        "linexp_2par"
    }

    fn dim(&self) -> usize {
        2
    }

    fn param_names(&self) -> Vec<String> {
        vec!["mu_over_var".into(), "precision".into()]
    }

    fn observations(&self) -> &[T] {
        &self.y
    }

    fn domain(&self) -> ParamBox<T> {
        ParamBox {
            lower: vec![T::neg_infinity(), T::zero()],
            upper: vec![T::infinity(), T::infinity()],
        }
    }

    fn interest_index(&self) -> usize {
        self.interest
    }

    fn start(&self) -> Vec<T> {
        let (n, s1, s2) = Self::sums(&self.y);
        let mean = s1 / n;
        let var = (s2 / n - mean * mean).max(T::epsilon().sqrt());
        vec![mean / var, T::one() / var]
    }

    fn structure(&self) -> Structure {
        Structure::StructuralEquation
    }

    fn loglik_at(&self, theta: &[T], y: &[T]) -> T {
        let (n, s1, s2) = Self::sums(y);
        let (a, b) = (theta[0], theta[1]);
        let two = T::lit(2.0);
        a * s1 - b * s2 / two - n * a * a / (two * b) + n / two * b.ln()
    }

    fn score(&self, theta: &[T]) -> Option<Vec<T>> {
        let (n, s1, s2) = Self::sums(&self.y);
        let (a, b) = (theta[0], theta[1]);
        let two = T::lit(2.0);
        Some(vec![
            s1 - n * a / b,
            -s2 / two + n * a * a / (two * b * b) + n / (two * b),
        ])
    }

    fn obs_info(&self, theta: &[T]) -> Option<RealMatrix<T>> {
        let n = T::lit(self.y.len() as f64);
        let (a, b) = (theta[0], theta[1]);
        let two = T::lit(2.0);
        RealMatrix::from_rows(&[
            vec![n / b, -n * a / (b * b)],
            vec![-n * a / (b * b), n * a * a / (b * b * b) + n / (two * b * b)],
        ])
        .ok()
    }

    fn dloglik_dy(&self, theta: &[T]) -> Option<Vec<T>> {
        Some(self.y.iter().map(|&y| theta[0] - theta[1] * y).collect())
    }

    // ε = (y − μ)/σ = y√θ₂ − θ₁/√θ₂
    fn pivot(&self, _j: usize, yj: &[T], theta: &[T]) -> Option<Vec<T>> {
        let r = theta[1].sqrt();
        Some(vec![yj[0] * r - theta[0] / r])
    }

    fn sufficient_directions(&self, theta_hat: &[T]) -> Option<RealMatrix<T>> {
        let (a, b) = (theta_hat[0], theta_hat[1]);
        let two = T::lit(2.0);
        let rows: Vec<Vec<T>> = self
            .y
            .iter()
            .map(|&y| vec![T::one() / b, -y / (two * b) - a / (two * b * b)])
            .collect();
        RealMatrix::from_rows(&rows).ok()
    }

    fn simulate(&self, theta: &[T], rng: &mut dyn RngCore) -> Option<Vec<T>> {
        let (a, b) = (theta[0].to_f64_lossy(), theta[1].to_f64_lossy());
        let (mu, sd) = (a / b, 1.0 / b.sqrt());
        Some(
            (0..self.y.len())
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    T::lit(mu + sd * z)
                })
                .collect(),
        )
    }

    fn with_observations(&self, y: Vec<T>) -> Result<Box<dyn Model<T>>> {
        Ok(Box::new(Self::new(y, self.interest)?))
    }
}
