use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use super::{check_finite, Model, ParamBox, Structure};
use crate::error::{HoaError, Result};
use crate::numcore::RealMatrix;
use crate::scalar::Real;

/// Pairs from a bivariate normal with zero means, unit variances and
/// correlation `θ`.
#[derive(Debug, Clone)]
pub struct BvnCorr<T: Real> {
    y: Vec<T>,
}

impl<T: Real> BvnCorr<T> {
    /// `y` holds the pairs flattened as `(y₁₁, y₂₁, y₁₂, y₂₂, …)`.
    pub fn new(y: Vec<T>) -> Result<Self> {
        if y.len() < 4 || !y.len().is_multiple_of(2) {
            return Err(HoaError::InvalidInput(
                "bvn_corr data must contain at least two (y1, y2) pairs".into(),
            ));
        }
        check_finite("bvn_corr observations", &y)?;
        Ok(Self { y })
    }

    /// Sufficient pair `(s, t) = (Σy₁y₂, Σ(y₁² + y₂²)/2)` of arbitrary data.
    pub fn sufficient(y: &[T]) -> (T, T) {
        let mut s = T::zero();
        let mut t = T::zero();
        for pair in y.chunks(2) {
            s += pair[0] * pair[1];
            t += (pair[0] * pair[0] + pair[1] * pair[1]) / T::lit(2.0);
        }
        (s, t)
    }

    fn n(&self) -> T {
        T::lit((self.y.len() / 2) as f64)
    }
}

impl<T: Real> Model<T> for BvnCorr<T> {
    fn id(&self) -> &str {
        "bvn_corr"
    }

    fn dim(&self) -> usize {
        1
    }

    fn param_names(&self) -> Vec<String> {
        vec!["rho".into()]
    }

    fn observations(&self) -> &[T] {
        &self.y
    }

    fn obs_dim(&self) -> usize {
        2
    }

    fn domain(&self) -> ParamBox<T> {
        ParamBox {
            lower: vec![-T::one()],
            upper: vec![T::one()],
        }
    }

    fn start(&self) -> Vec<T> {
        let (s, t) = Self::sufficient(&self.y);
        let lim = T::lit(0.9);
        vec![(s / t).max(-lim).min(lim)]
    }

    fn structure(&self) -> Structure {
        Structure::DistributionFunction
    }

    fn loglik_at(&self, theta: &[T], y: &[T]) -> T {
        let th = theta[0];
        let d = T::one() - th * th;
        let (s, t) = Self::sufficient(y);
        let n = T::lit((y.len() / 2) as f64);
        -n / T::lit(2.0) * d.ln() - (t - th * s) / d
    }

    fn score(&self, theta: &[T]) -> Option<Vec<T>> {
        let th = theta[0];
        let d = T::one() - th * th;
        let (s, t) = Self::sufficient(&self.y);
        let two = T::lit(2.0);
        Some(vec![self.n() * th / d + s / d - two * th * (t - th * s) / (d * d)])
    }

    fn obs_info(&self, theta: &[T]) -> Option<RealMatrix<T>> {
        let th = theta[0];
        let d = T::one() - th * th;
        let (s, t) = Self::sufficient(&self.y);
        let two = T::lit(2.0);
        let d2 = d * d;
        let h = self.n() * (T::one() + th * th) / d2 + two * th * s / d2
            - two * (t - two * th * s) / d2
            - T::lit(8.0) * th * th * (t - th * s) / (d2 * d);
        Some(RealMatrix::from_fn(1, 1, |_, _| -h))
    }

    fn dloglik_dy(&self, theta: &[T]) -> Option<Vec<T>> {
        let th = theta[0];
        let d = T::one() - th * th;
        let mut g = Vec::with_capacity(self.y.len());
        for pair in self.y.chunks(2) {
            g.push(-(pair[0] - th * pair[1]) / d);
            g.push(-(pair[1] - th * pair[0]) / d);
        }
        Some(g)
    }

    fn pivot(&self, _j: usize, yj: &[T], theta: &[T]) -> Option<Vec<T>> {
        let th = theta[0];
        let two = T::lit(2.0);
        let sum = yj[0] + yj[1];
        let diff = yj[0] - yj[1];
        Some(vec![
            sum * sum / (two * (T::one() + th)),
            diff * diff / (two * (T::one() - th)),
        ])
    }

    fn sufficient_directions(&self, theta_hat: &[T]) -> Option<RealMatrix<T>> {
        let th = theta_hat[0];
        let d = T::lit(2.0) * (T::one() - th * th);
        let col: Vec<T> = self
            .y
            .chunks(2)
            .flat_map(|p| [(p[1] - th * p[0]) / d, (p[0] - th * p[1]) / d])
            .collect();
        Some(RealMatrix::column_vector(&col))
    }

    fn simulate(&self, theta: &[T], rng: &mut dyn RngCore) -> Option<Vec<T>> {
        let th = theta[0].to_f64_lossy();
        let c = (1.0 - th * th).sqrt();
        let mut out = Vec::with_capacity(self.y.len());
        for _ in 0..self.y.len() / 2 {
            let z1: f64 = StandardNormal.sample(rng);
            let z2: f64 = StandardNormal.sample(rng);
            out.push(T::lit(z1));
            out.push(T::lit(th * z1 + c * z2));
        }
        Some(out)
    }

    fn with_observations(&self, y: Vec<T>) -> Result<Box<dyn Model<T>>> {
        Ok(Box::new(Self::new(y)?))
    }

    fn sample_size(&self) -> usize {
        self.y.len() / 2
    }
}
