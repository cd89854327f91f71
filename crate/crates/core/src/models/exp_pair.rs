use rand::RngCore;
use rand_distr::{Distribution, Exp};

use super::{check_positive, CoordMap, Model, ParamBox, Structure};
use crate::error::{HoaError, Result};
use crate::numcore::RealMatrix;
use crate::scalar::Real;

/// Two independent exponentials with rates `λψ` and `λ`; `θ = (ψ, λ)`.
#[derive(Debug, Clone)]
pub struct ExpPair<T: Real> {
    y: Vec<T>,
}

impl<T: Real> ExpPair<T> {
    pub fn new(y: Vec<T>) -> Result<Self> {
        if y.len() != 2 {
            return Err(HoaError::InvalidInput("exp_pair data must be (y1, y2)".into()));
        }
        check_positive("exp_pair observations", &y)?;
        Ok(Self { y })
    }

    /// `λ̂_ψ = 2/(ψy₁ + y₂)`.
    pub fn lambda_hat(&self, psi: T) -> T {
        T::lit(2.0) / (psi * self.y[0] + self.y[1])
    }
}

impl<T: Real> Model<T> for ExpPair<T> {
    fn id(&self) -> &str {
        "exp_pair"
    }

    fn dim(&self) -> usize {
        2
    }

    fn param_names(&self) -> Vec<String> {
        vec!["psi".into(), "lambda".into()]
    }

    fn observations(&self) -> &[T] {
        &self.y
    }

    fn domain(&self) -> ParamBox<T> {
        ParamBox::positive(2)
    }

    fn start(&self) -> Vec<T> {
        vec![T::one(), T::one()]
    }

    fn structure(&self) -> Structure {
        Structure::DistributionFunction
    }

    fn loglik_at(&self, theta: &[T], y: &[T]) -> T {
        let (psi, lam) = (theta[0], theta[1]);
        T::lit(2.0) * lam.ln() + psi.ln() - lam * (psi * y[0] + y[1])
    }

    fn score(&self, theta: &[T]) -> Option<Vec<T>> {
        let (psi, lam) = (theta[0], theta[1]);
        Some(vec![
            T::one() / psi - lam * self.y[0],
            T::lit(2.0) / lam - psi * self.y[0] - self.y[1],
        ])
    }

    fn obs_info(&self, theta: &[T]) -> Option<RealMatrix<T>> {
        let (psi, lam) = (theta[0], theta[1]);
        RealMatrix::from_rows(&[
            vec![T::one() / (psi * psi), self.y[0]],
            vec![self.y[0], T::lit(2.0) / (lam * lam)],
        ])
        .ok()
    }

    fn dloglik_dy(&self, theta: &[T]) -> Option<Vec<T>> {
        let (psi, lam) = (theta[0], theta[1]);
        Some(vec![-lam * psi, -lam])
    }

    fn pivot(&self, j: usize, yj: &[T], theta: &[T]) -> Option<Vec<T>> {
        let (psi, lam) = (theta[0], theta[1]);
        Some(vec![if j == 0 { lam * psi * yj[0] } else { lam * yj[0] }])
    }

    // Each y_j is sufficient for its own rate, so any invertible V spans the
    // same directions; the identity gives φ = −(λψ, λ).
    fn sufficient_directions(&self, _theta_hat: &[T]) -> Option<RealMatrix<T>> {
        Some(RealMatrix::identity(2))
    }

    fn reparam(&self) -> Option<Vec<CoordMap>> {
        Some(vec![CoordMap::Log, CoordMap::Log])
    }

    fn simulate(&self, theta: &[T], rng: &mut dyn RngCore) -> Option<Vec<T>> {
        let (psi, lam) = (theta[0].to_f64_lossy(), theta[1].to_f64_lossy());
        let e1 = Exp::new(lam * psi).ok()?;
        let e2 = Exp::new(lam).ok()?;
        Some(vec![T::lit(e1.sample(rng)), T::lit(e2.sample(rng))])
    }

    fn with_observations(&self, y: Vec<T>) -> Result<Box<dyn Model<T>>> {
        Ok(Box::new(Self::new(y)?))
    }
}
