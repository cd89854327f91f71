//! Canonical-link generalised linear models for counts.

use rand::RngCore;
use rand_distr::{Binomial, Distribution, Poisson};

use super::{check_finite, Model, ParamBox, Structure};
use crate::error::{HoaError, Result};
use crate::numcore::RealMatrix;
use crate::scalar::Real;

fn linear_predictor<T: Real>(x: &RealMatrix<T>, j: usize, beta: &[T]) -> T {
    (0..x.cols()).map(|k| x[(j, k)] * beta[k]).sum()
}

fn check_design<T: Real>(y: &[T], x: &RealMatrix<T>, interest: usize) -> Result<()> {
    if x.rows() != y.len() {
        return Err(HoaError::Dimension {
            context: "glm design rows",
            expected: y.len(),
            got: x.rows(),
        });
    }
    if x.cols() == 0 || interest >= x.cols() {
        return Err(HoaError::InvalidInput(format!(
            "glm interest index {interest} outside 0..{}",
            x.cols()
        )));
    }
    check_finite("glm observations", y)?;
    check_finite("glm design", x.as_slice())
}

// Start from a single Fisher-scoring step at β = 0 with the intercept-like
// first coefficient set from the pooled response.
fn glm_start<T: Real>(
    x: &RealMatrix<T>,
    y: &[T],
    var: impl Fn(usize, T) -> T,
    mean: impl Fn(usize, T) -> T,
) -> Vec<T> {
    let p = x.cols();
    let mut info = RealMatrix::zeros(p, p);
    let mut score = vec![T::zero(); p];
    for (j, &yj) in y.iter().enumerate() {
        let v = var(j, T::zero());
        let r = yj - mean(j, T::zero());
        for a in 0..p {
            score[a] += r * x[(j, a)];
            for b in 0..p {
                info[(a, b)] += v * x[(j, a)] * x[(j, b)];
            }
        }
    }
    match info.solve(&score) {
        Ok(step) if step.iter().all(|s| s.is_finite()) => step
            .into_iter()
            .map(|s| s.max(-T::lit(5.0)).min(T::lit(5.0)))
            .collect(),
        _ => vec![T::zero(); p],
    }
}

/// Poisson counts with log link, `ℓ = Σ y_j η_j − e^{η_j}`.
#[derive(Debug, Clone)]
pub struct PoissonGlm<T: Real> {
    y: Vec<T>,
    x: RealMatrix<T>,
    interest: usize,
}

impl<T: Real> PoissonGlm<T> {
    pub fn new(y: Vec<T>, x: RealMatrix<T>, interest: usize) -> Result<Self> {
        check_design(&y, &x, interest)?;
        if y.iter().any(|&v| v < T::zero()) {
            return Err(HoaError::InvalidInput("poisson counts must be non-negative".into()));
        }
        Ok(Self { y, x, interest })
    }

    pub fn intercept_only(y: Vec<T>) -> Result<Self> {
        let x = RealMatrix::from_fn(y.len(), 1, |_, _| T::one());
        Self::new(y, x, 0)
    }

    fn mu(&self, j: usize, theta: &[T]) -> T {
        linear_predictor(&self.x, j, theta).exp()
    }
}

impl<T: Real> Model<T> for PoissonGlm<T> {
    fn id(&self) -> &str {
        "poisson_glm"
    }

    fn dim(&self) -> usize {
        self.x.cols()
    }

    fn param_names(&self) -> Vec<String> {
        (0..self.dim()).map(|k| format!("beta{k}")).collect()
    }

    fn observations(&self) -> &[T] {
        &self.y
    }

    fn domain(&self) -> ParamBox<T> {
        ParamBox::unbounded(self.dim())
    }

    fn interest_index(&self) -> usize {
        self.interest
    }

    fn start(&self) -> Vec<T> {
        glm_start(&self.x, &self.y, |_, eta| eta.exp(), |_, eta| eta.exp())
    }

    fn structure(&self) -> Structure {
        Structure::DiscreteScore
    }

    fn loglik_at(&self, theta: &[T], y: &[T]) -> T {
        y.iter()
            .enumerate()
            .map(|(j, &yj)| {
                let eta = linear_predictor(&self.x, j, theta);
                yj * eta - eta.exp()
            })
            .sum()
    }

    fn score(&self, theta: &[T]) -> Option<Vec<T>> {
        let p = self.dim();
        let mut g = vec![T::zero(); p];
        for (j, &yj) in self.y.iter().enumerate() {
            let r = yj - self.mu(j, theta);
            for (k, gk) in g.iter_mut().enumerate() {
                *gk += r * self.x[(j, k)];
            }
        }
        Some(g)
    }

    fn obs_info(&self, theta: &[T]) -> Option<RealMatrix<T>> {
        let p = self.dim();
        let mut h = RealMatrix::zeros(p, p);
        for j in 0..self.y.len() {
            let m = self.mu(j, theta);
            for a in 0..p {
                for b in 0..p {
                    h[(a, b)] += m * self.x[(j, a)] * self.x[(j, b)];
                }
            }
        }
        Some(h)
    }

    fn dloglik_dy(&self, theta: &[T]) -> Option<Vec<T>> {
        Some((0..self.y.len()).map(|j| linear_predictor(&self.x, j, theta)).collect())
    }

    fn mean(&self, j: usize, theta: &[T]) -> Option<T> {
        Some(self.mu(j, theta))
    }

    fn dmean_dtheta(&self, j: usize, theta: &[T]) -> Option<Vec<T>> {
        let m = self.mu(j, theta);
        Some(self.x.row(j).iter().map(|&xk| m * xk).collect())
    }

    fn dscore_dy(&self, j: usize, _theta: &[T]) -> Option<Vec<T>> {
        Some(self.x.row(j).to_vec())
    }

    fn simulate(&self, theta: &[T], rng: &mut dyn RngCore) -> Option<Vec<T>> {
        (0..self.y.len())
            .map(|j| {
                let m = self.mu(j, theta).to_f64_lossy();
                Poisson::new(m).ok().map(|d| T::lit(d.sample(rng)))
            })
            .collect()
    }

    fn with_observations(&self, y: Vec<T>) -> Result<Box<dyn Model<T>>> {
        Ok(Box::new(Self::new(y, self.x.clone(), self.interest)?))
    }
}

/// Binomial counts out of known totals with logit link,
/// `ℓ = Σ y_j η_j − m_j log(1 + e^{η_j})`.
#[derive(Debug, Clone)]
pub struct BinomialGlm<T: Real> {
    y: Vec<T>,
    trials: Vec<T>,
    x: RealMatrix<T>,
    interest: usize,
}

fn softplus<T: Real>(eta: T) -> T {
    if eta > T::zero() {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

fn expit<T: Real>(eta: T) -> T {
    if eta >= T::zero() {
        T::one() / (T::one() + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (T::one() + e)
    }
}

impl<T: Real> BinomialGlm<T> {
    pub fn new(y: Vec<T>, trials: Vec<T>, x: RealMatrix<T>, interest: usize) -> Result<Self> {
        check_design(&y, &x, interest)?;
        if trials.len() != y.len() {
            return Err(HoaError::Dimension {
                context: "binomial trial counts",
                expected: y.len(),
                got: trials.len(),
            });
        }
        if y
            .iter()
            .zip(&trials)
            .any(|(&v, &m)| v < T::zero() || !(m > T::zero()) || v > m)
        {
            return Err(HoaError::InvalidInput(
                "binomial counts must satisfy 0 <= y <= m with m > 0".into(),
            ));
        }
        Ok(Self {
            y,
            trials,
            x,
            interest,
        })
    }

    fn prob(&self, j: usize, theta: &[T]) -> T {
        expit(linear_predictor(&self.x, j, theta))
    }
}

impl<T: Real> Model<T> for BinomialGlm<T> {
    fn id(&self) -> &str {
        "binomial_glm"
    }

    fn dim(&self) -> usize {
        self.x.cols()
    }

    fn param_names(&self) -> Vec<String> {
        (0..self.dim()).map(|k| format!("beta{k}")).collect()
    }

    fn observations(&self) -> &[T] {
        &self.y
    }

    fn domain(&self) -> ParamBox<T> {
        ParamBox::unbounded(self.dim())
    }

    fn interest_index(&self) -> usize {
        self.interest
    }

    fn start(&self) -> Vec<T> {
        let quarter = T::lit(0.25);
        let half = T::lit(0.5);
        glm_start(
            &self.x,
            &self.y,
            |j, _| self.trials[j] * quarter,
            |j, _| self.trials[j] * half,
        )
    }

    fn structure(&self) -> Structure {
        Structure::DiscreteScore
    }

    fn loglik_at(&self, theta: &[T], y: &[T]) -> T {
        y.iter()
            .enumerate()
            .map(|(j, &yj)| {
                let eta = linear_predictor(&self.x, j, theta);
                yj * eta - self.trials[j] * softplus(eta)
            })
            .sum()
    }

    fn score(&self, theta: &[T]) -> Option<Vec<T>> {
        let mut g = vec![T::zero(); self.dim()];
        for (j, &yj) in self.y.iter().enumerate() {
            let r = yj - self.trials[j] * self.prob(j, theta);
            for (k, gk) in g.iter_mut().enumerate() {
                *gk += r * self.x[(j, k)];
            }
        }
        Some(g)
    }

    fn obs_info(&self, theta: &[T]) -> Option<RealMatrix<T>> {
        let p = self.dim();
        let mut h = RealMatrix::zeros(p, p);
        for j in 0..self.y.len() {
            let pr = self.prob(j, theta);
            let v = self.trials[j] * pr * (T::one() - pr);
            for a in 0..p {
                for b in 0..p {
                    h[(a, b)] += v * self.x[(j, a)] * self.x[(j, b)];
                }
            }
        }
        Some(h)
    }

    fn dloglik_dy(&self, theta: &[T]) -> Option<Vec<T>> {
        Some((0..self.y.len()).map(|j| linear_predictor(&self.x, j, theta)).collect())
    }

    fn mean(&self, j: usize, theta: &[T]) -> Option<T> {
        Some(self.trials[j] * self.prob(j, theta))
    }

    fn dmean_dtheta(&self, j: usize, theta: &[T]) -> Option<Vec<T>> {
        let pr = self.prob(j, theta);
        let v = self.trials[j] * pr * (T::one() - pr);
        Some(self.x.row(j).iter().map(|&xk| v * xk).collect())
    }

    fn dscore_dy(&self, j: usize, _theta: &[T]) -> Option<Vec<T>> {
        Some(self.x.row(j).to_vec())
    }

    fn simulate(&self, theta: &[T], rng: &mut dyn RngCore) -> Option<Vec<T>> {
        (0..self.y.len())
            .map(|j| {
                let pr = self.prob(j, theta).to_f64_lossy();
                let m = self.trials[j].to_f64_lossy().round() as u64;
                Binomial::new(m, pr).ok().map(|d| T::lit(d.sample(rng) as f64))
            })
            .collect()
    }

    fn with_observations(&self, y: Vec<T>) -> Result<Box<dyn Model<T>>> {
        Ok(Box::new(Self::new(
            y,
            self.trials.clone(),
            self.x.clone(),
            self.interest,
        )?))
    }
}
