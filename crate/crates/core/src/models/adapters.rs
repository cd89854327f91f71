use std::sync::Arc;

use rand::RngCore;

use super::{CoordMap, Model, ParamBox, Structure};
use crate::error::{HoaError, Result};
use crate::numcore::RealMatrix;
use crate::scalar::Real;

/// A model re-expressed in coordinates `θ'` with `θ_k = g_k(θ'_k)`.
#[derive(Clone)]
pub struct Reparametrized<T: Real> {
    inner: Arc<dyn Model<T>>,
    maps: Vec<CoordMap>,
}

impl<T: Real> Reparametrized<T> {
    pub fn new(inner: Arc<dyn Model<T>>, maps: Vec<CoordMap>) -> Result<Self> {
        if maps.len() != inner.dim() {
            return Err(HoaError::Dimension {
                context: "reparametrisation maps",
                expected: inner.dim(),
                got: maps.len(),
            });
        }
        let dom = inner.domain();
        for (k, m) in maps.iter().enumerate() {
            if *m == CoordMap::Log && !(dom.lower[k] >= T::zero()) {
                return Err(HoaError::InvalidInput(format!(
                    "log map on coordinate {k} requires a non-negative lower bound"
                )));
            }
        }
        Ok(Self { inner, maps })
    }

    /// Uses the model's declared reparametrisation.
    pub fn declared(inner: Arc<dyn Model<T>>) -> Result<Self> {
        let maps = inner.reparam().ok_or_else(|| {
            HoaError::Unsupported(format!("model '{}' declares no reparametrisation", inner.id()))
        })?;
        Self::new(inner, maps)
    }

    /// `θ` from `θ'`.
    pub fn to_inner(&self, theta: &[T]) -> Vec<T> {
        theta
            .iter()
            .zip(&self.maps)
            .map(|(&t, m)| m.forward(t))
            .collect()
    }

    /// `θ'` from `θ`.
    pub fn from_inner(&self, theta: &[T]) -> Vec<T> {
        theta
            .iter()
            .zip(&self.maps)
            .map(|(&t, m)| m.inverse(t))
            .collect()
    }

    pub fn maps(&self) -> &[CoordMap] {
        &self.maps
    }

    fn jac(&self, theta: &[T]) -> Vec<T> {
        theta.iter().zip(&self.maps).map(|(&t, m)| m.d1(t)).collect()
    }
}

impl<T: Real> Model<T> for Reparametrized<T> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn param_names(&self) -> Vec<String> {
        self.inner
            .param_names()
            .into_iter()
            .zip(&self.maps)
            .map(|(n, m)| match m {
                CoordMap::Identity => n,
                CoordMap::Log => format!("log_{n}"),
            })
            .collect()
    }

    fn observations(&self) -> &[T] {
        self.inner.observations()
    }

    fn obs_dim(&self) -> usize {
        self.inner.obs_dim()
    }

    fn n_obs(&self) -> usize {
        self.inner.n_obs()
    }

    fn domain(&self) -> ParamBox<T> {
        let dom = self.inner.domain();
        let map = |v: T, m: &CoordMap| match m {
            CoordMap::Identity => v,
            CoordMap::Log if v == T::zero() => T::neg_infinity(),
            CoordMap::Log => v.ln(),
        };
        ParamBox {
            lower: dom.lower.iter().zip(&self.maps).map(|(&v, m)| map(v, m)).collect(),
            upper: dom.upper.iter().zip(&self.maps).map(|(&v, m)| map(v, m)).collect(),
        }
    }

    fn interest_index(&self) -> usize {
        self.inner.interest_index()
    }

    fn start(&self) -> Vec<T> {
        self.from_inner(&self.inner.start())
    }

    fn structure(&self) -> Structure {
        self.inner.structure()
    }

    fn loglik_at(&self, theta: &[T], y: &[T]) -> T {
        self.inner.loglik_at(&self.to_inner(theta), y)
    }

    fn score(&self, theta: &[T]) -> Option<Vec<T>> {
        let g = self.inner.score(&self.to_inner(theta))?;
        Some(g.iter().zip(self.jac(theta)).map(|(&a, b)| a * b).collect())
    }

    fn obs_info(&self, theta: &[T]) -> Option<RealMatrix<T>> {
        let inner_theta = self.to_inner(theta);
        let g = self.inner.score(&inner_theta)?;
        let j = self.inner.obs_info(&inner_theta)?;
        let d1 = self.jac(theta);
        let p = self.dim();
        let mut out = RealMatrix::from_fn(p, p, |a, b| d1[a] * j[(a, b)] * d1[b]);
        for k in 0..p {
            out[(k, k)] -= g[k] * self.maps[k].d2(theta[k]);
        }
        Some(out)
    }

    fn dloglik_dy(&self, theta: &[T]) -> Option<Vec<T>> {
        self.inner.dloglik_dy(&self.to_inner(theta))
    }

    fn pivot(&self, j: usize, yj: &[T], theta: &[T]) -> Option<Vec<T>> {
        self.inner.pivot(j, yj, &self.to_inner(theta))
    }

    fn sufficient_directions(&self, theta_hat: &[T]) -> Option<RealMatrix<T>> {
        let v = self.inner.sufficient_directions(&self.to_inner(theta_hat))?;
        let d1 = self.jac(theta_hat);
        Some(RealMatrix::from_fn(v.rows(), v.cols(), |i, k| v[(i, k)] * d1[k]))
    }

    fn mean(&self, j: usize, theta: &[T]) -> Option<T> {
        self.inner.mean(j, &self.to_inner(theta))
    }

    fn dmean_dtheta(&self, j: usize, theta: &[T]) -> Option<Vec<T>> {
        let g = self.inner.dmean_dtheta(j, &self.to_inner(theta))?;
        Some(g.iter().zip(self.jac(theta)).map(|(&a, b)| a * b).collect())
    }

    fn dscore_dy(&self, j: usize, theta: &[T]) -> Option<Vec<T>> {
        let g = self.inner.dscore_dy(j, &self.to_inner(theta))?;
        Some(g.iter().zip(self.jac(theta)).map(|(&a, b)| a * b).collect())
    }

    fn simulate(&self, theta: &[T], rng: &mut dyn RngCore) -> Option<Vec<T>> {
        self.inner.simulate(&self.to_inner(theta), rng)
    }

    fn with_observations(&self, y: Vec<T>) -> Result<Box<dyn Model<T>>> {
        let inner: Arc<dyn Model<T>> = Arc::from(self.inner.with_observations(y)?);
        Ok(Box::new(Self::new(inner, self.maps.clone())?))
    }

    fn sample_size(&self) -> usize {
        self.inner.sample_size()
    }
}

/// Hides every closed-form hook so all derivatives go through finite
/// differences. Pivots and mean functions are kept since they define the model.
#[derive(Clone)]
pub struct NumericOnly<T: Real> {
    inner: Arc<dyn Model<T>>,
}

impl<T: Real> NumericOnly<T> {
    pub fn new(inner: Arc<dyn Model<T>>) -> Self {
        Self { inner }
    }
}

impl<T: Real> Model<T> for NumericOnly<T> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn param_names(&self) -> Vec<String> {
        self.inner.param_names()
    }

    fn observations(&self) -> &[T] {
        self.inner.observations()
    }

    fn obs_dim(&self) -> usize {
        self.inner.obs_dim()
    }

    fn n_obs(&self) -> usize {
        self.inner.n_obs()
    }

    fn domain(&self) -> ParamBox<T> {
        self.inner.domain()
    }

    fn interest_index(&self) -> usize {
        self.inner.interest_index()
    }

    fn start(&self) -> Vec<T> {
        self.inner.start()
    }

    fn structure(&self) -> Structure {
        self.inner.structure()
    }

    fn loglik_at(&self, theta: &[T], y: &[T]) -> T {
        self.inner.loglik_at(theta, y)
    }

    fn pivot(&self, j: usize, yj: &[T], theta: &[T]) -> Option<Vec<T>> {
        self.inner.pivot(j, yj, theta)
    }

    fn mean(&self, j: usize, theta: &[T]) -> Option<T> {
        self.inner.mean(j, theta)
    }

    fn reparam(&self) -> Option<Vec<super::CoordMap>> {
        self.inner.reparam()
    }

    fn simulate(&self, theta: &[T], rng: &mut dyn RngCore) -> Option<Vec<T>> {
        self.inner.simulate(theta, rng)
    }

    fn with_observations(&self, y: Vec<T>) -> Result<Box<dyn Model<T>>> {
        Ok(Box::new(Self::new(Arc::from(self.inner.with_observations(y)?))))
    }

    fn sample_size(&self) -> usize {
        self.inner.sample_size()
    }
}
