use rand::RngCore;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use super::{check_finite, CoordMap, Model, ParamBox, Structure};
use crate::error::{HoaError, Result};
use crate::numcore::RealMatrix;
use crate::scalar::Real;

/// Error density of the regression-scale model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "law")]
pub enum ErrorLaw {
    Normal,
    Student { df: f64 },
}

/// `y = Xβ + σε` with `ε_j` iid from a known density; `θ = (β, σ)`.
#[derive(Debug, Clone)]
pub struct RegressionScale<T: Real> {
    y: Vec<T>,
    x: RealMatrix<T>,
    law: ErrorLaw,
    interest: usize,
}

impl<T: Real> RegressionScale<T> {
    pub fn new(y: Vec<T>, x: RealMatrix<T>, law: ErrorLaw, interest: usize) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(HoaError::Dimension {
                context: "regression design rows",
                expected: y.len(),
                got: x.rows(),
            });
        }
        if y.len() <= x.cols() {
            return Err(HoaError::InvalidInput(
                "regression_scale needs more observations than regression coefficients".into(),
            ));
        }
        if interest > x.cols() {
            return Err(HoaError::InvalidInput(format!(
                "regression_scale interest index {interest} exceeds parameter count {}",
                x.cols() + 1
            )));
        }
        if let ErrorLaw::Student { df } = law {
            if !(df > 0.0 && df.is_finite()) {
                return Err(HoaError::InvalidInput("Student degrees of freedom must be positive".into()));
            }
        }
        check_finite("regression_scale observations", &y)?;
        Ok(Self { y, x, law, interest })
    }

    /// Location model with a column of ones.
    pub fn location_scale(y: Vec<T>, law: ErrorLaw) -> Result<Self> {
        let x = RealMatrix::from_fn(y.len(), 1, |_, _| T::one());
        Self::new(y, x, law, 0)
    }

    pub fn design(&self) -> &RealMatrix<T> {
        &self.x
    }

    fn q(&self) -> usize {
        self.x.cols()
    }

    fn residuals(&self, theta: &[T], y: &[T]) -> Vec<T> {
        let q = self.q();
        let sigma = theta[q];
        (0..y.len())
            .map(|j| {
                let fit: T = (0..q).map(|k| self.x[(j, k)] * theta[k]).sum();
                (y[j] - fit) / sigma
            })
            .collect()
    }

    // log g(ε) and its first two derivatives
    fn log_density(&self, e: T) -> (T, T, T) {
        match self.law {
            ErrorLaw::Normal => (-e * e / T::lit(2.0), -e, -T::one()),
            ErrorLaw::Student { df } => {
                let nu = T::lit(df);
                let c = (nu + T::one()) / T::lit(2.0);
                let den = nu + e * e;
                (
                    -c * (T::one() + e * e / nu).ln(),
                    -(nu + T::one()) * e / den,
                    -(nu + T::one()) * (nu - e * e) / (den * den),
                )
            }
        }
    }
}

impl<T: Real> Model<T> for RegressionScale<T> {
    fn id(&self) -> &str {
        "regression_scale"
    }

    fn dim(&self) -> usize {
        self.q() + 1
    }

    fn param_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (0..self.q()).map(|k| format!("beta{k}")).collect();
        names.push("sigma".into());
        names
    }

    fn observations(&self) -> &[T] {
        &self.y
    }

    fn domain(&self) -> ParamBox<T> {
        let mut b = ParamBox::unbounded(self.dim());
        b.lower[self.q()] = T::zero();
        b
    }

    fn interest_index(&self) -> usize {
        self.interest
    }

    fn start(&self) -> Vec<T> {
        // least squares, falling back to zero coefficients
        let xt = self.x.transpose();
        let beta = xt
            .matmul(&self.x)
            .and_then(|g| g.solve(&xt.matvec(&self.y)?))
            .unwrap_or_else(|_| vec![T::zero(); self.q()]);
        let mut theta = beta;
        theta.push(T::one());
        let e = self.residuals(&theta, &self.y);
        let n = T::lit(self.y.len() as f64);
        let rms = (e.iter().map(|&v| v * v).sum::<T>() / n).sqrt();
        theta[self.q()] = if rms > T::zero() { rms } else { T::one() };
        theta
    }

    fn structure(&self) -> Structure {
        Structure::StructuralEquation
    }

    fn loglik_at(&self, theta: &[T], y: &[T]) -> T {
        let sigma = theta[self.q()];
        let n = T::lit(y.len() as f64);
        let e = self.residuals(theta, y);
        -n * sigma.ln() + e.iter().map(|&v| self.log_density(v).0).sum::<T>()
    }

    fn score(&self, theta: &[T]) -> Option<Vec<T>> {
        let q = self.q();
        let sigma = theta[q];
        let e = self.residuals(theta, &self.y);
        let mut g = vec![T::zero(); q + 1];
        g[q] = -T::lit(self.y.len() as f64) / sigma;
        for (j, &ej) in e.iter().enumerate() {
            let (_, g1, _) = self.log_density(ej);
            for k in 0..q {
                g[k] -= g1 * self.x[(j, k)] / sigma;
            }
            g[q] -= g1 * ej / sigma;
        }
        Some(g)
    }

    fn obs_info(&self, theta: &[T]) -> Option<RealMatrix<T>> {
        let q = self.q();
        let sigma = theta[q];
        let s2 = sigma * sigma;
        let e = self.residuals(theta, &self.y);
        let mut h = RealMatrix::zeros(q + 1, q + 1);
        h[(q, q)] = T::lit(self.y.len() as f64) / s2;
        for (j, &ej) in e.iter().enumerate() {
            let (_, g1, g2) = self.log_density(ej);
            for a in 0..q {
                for b in 0..q {
                    h[(a, b)] += g2 * self.x[(j, a)] * self.x[(j, b)] / s2;
                }
                h[(a, q)] += (g2 * ej + g1) * self.x[(j, a)] / s2;
            }
            h[(q, q)] += (g2 * ej * ej + T::lit(2.0) * g1 * ej) / s2;
        }
        for a in 0..q {
            h[(q, a)] = h[(a, q)];
        }
        Some(h.neg())
    }

    fn dloglik_dy(&self, theta: &[T]) -> Option<Vec<T>> {
        let sigma = theta[self.q()];
        Some(
            self.residuals(theta, &self.y)
                .into_iter()
                .map(|e| self.log_density(e).1 / sigma)
                .collect(),
        )
    }

    fn pivot(&self, j: usize, yj: &[T], theta: &[T]) -> Option<Vec<T>> {
        let q = self.q();
        let fit: T = (0..q).map(|k| self.x[(j, k)] * theta[k]).sum();
        Some(vec![(yj[0] - fit) / theta[q]])
    }

    fn sufficient_directions(&self, theta_hat: &[T]) -> Option<RealMatrix<T>> {
        let q = self.q();
        let e = self.residuals(theta_hat, &self.y);
        Some(RealMatrix::from_fn(self.y.len(), q + 1, |j, k| {
            if k < q {
                self.x[(j, k)]
            } else {
                e[j]
            }
        }))
    }

    fn reparam(&self) -> Option<Vec<CoordMap>> {
        let mut m = vec![CoordMap::Identity; self.dim()];
        m[self.q()] = CoordMap::Log;
        Some(m)
    }

    fn simulate(&self, theta: &[T], rng: &mut dyn RngCore) -> Option<Vec<T>> {
        let q = self.q();
        let sigma = theta[q].to_f64_lossy();
        let student = match self.law {
            ErrorLaw::Student { df } => Some(StudentT::new(df).ok()?),
            ErrorLaw::Normal => None,
        };
        Some(
            (0..self.y.len())
                .map(|j| {
                    let fit: f64 = (0..q)
                        .map(|k| (self.x[(j, k)] * theta[k]).to_f64_lossy())
                        .sum();
                    let e: f64 = match &student {
                        Some(t) => t.sample(rng),
                        None => StandardNormal.sample(rng),
                    };
                    T::lit(fit + sigma * e)
                })
                .collect(),
        )
    }

    fn with_observations(&self, y: Vec<T>) -> Result<Box<dyn Model<T>>> {
        Ok(Box::new(Self::new(y, self.x.clone(), self.law, self.interest)?))
    }
}
