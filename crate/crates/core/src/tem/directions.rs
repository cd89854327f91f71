use serde::{Deserialize, Serialize};

use crate::error::{HoaError, Result};
use crate::models::Model;
use crate::numcore::{self, gram_det_sqrt, RealMatrix, RealVector};
use crate::optim::Fit;
use crate::scalar::Real;

/// How the directions act on the log-likelihood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub enum DirectionKind<T: Real> {
    /// `V` is `∂y/∂θᵀ`, one row per scalar response.
    Continuous,
    /// `V` stacks the `p×p` blocks `V_j = ∂E(w_j;θ)/∂θᵀ` of the local score
    /// variables `w_j`; `score_dy[j]` holds `∂w_j/∂y_j`.
    Discrete { score_dy: Vec<Vec<T>> },
}

/// Sufficient directions at `(y°, θ̂°)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Directions<T: Real> {
    pub v: RealMatrix<T>,
    pub origin_data: RealVector<T>,
    pub origin_theta: RealVector<T>,
    pub kind: DirectionKind<T>,
}

impl<T: Real> Directions<T> {
    pub fn is_discrete(&self) -> bool {
        matches!(self.kind, DirectionKind::Discrete { .. })
    }

    /// Directions `V·M`; they span the same space and give the same `q`.
    pub fn transformed(&self, m: &RealMatrix<T>) -> Result<Self> {
        Ok(Self {
            v: self.v.matmul(m)?,
            ..self.clone()
        })
    }

    fn checked(self) -> Result<Self> {
        match gram_det_sqrt(&self.v) {
            Ok(_) => Ok(self),
            Err(HoaError::Singular { rank, cols, .. }) => Err(HoaError::Singular {
                context: "sufficient directions",
                rank,
                cols,
            }),
            Err(e) => Err(e),
        }
    }
}

/// Directions appropriate to the model's declared structure.
pub fn directions<T: Real>(model: &dyn Model<T>, fit: &Fit<T>) -> Result<Directions<T>> {
    if model.structure().is_discrete() {
        directions_discrete(model, fit)
    } else {
        directions_from_quantile(model, fit)
    }
}

/// `V_j = −(∂z_j/∂y_jᵀ)^{-1} ∂z_j/∂θᵀ` from the per-observation pivots, or the
/// model's closed form.
pub fn directions_from_quantile<T: Real>(
    model: &dyn Model<T>,
    fit: &Fit<T>,
) -> Result<Directions<T>> {
    if model.structure().is_discrete() {
        return Err(HoaError::Unsupported(format!(
            "model '{}' has discrete responses; use the local score construction",
            model.id()
        )));
    }
    let theta = fit.theta_hat.as_slice();
    let y = model.observations();
    let origin = |v: RealMatrix<T>| Directions {
        v,
        origin_data: RealVector::new(y.to_vec())?,
        origin_theta: fit.theta_hat.clone(),
        kind: DirectionKind::Continuous,
    }
    .checked();
    if let Some(v) = model.sufficient_directions(theta) {
        return origin(v);
    }
    let d = model.obs_dim();
    let p = model.dim();
    let mut v = RealMatrix::zeros(y.len(), p);
    for j in 0..model.n_obs() {
        let yj = &y[j * d..(j + 1) * d];
        let z = |yy: &[T], th: &[T]| {
            model.pivot(j, yy, th).ok_or_else(|| {
                HoaError::Unsupported(format!(
                    "model '{}' declares no pivot or closed-form directions",
                    model.id()
                ))
            })
        };
        let dz_dy = numcore::jacobian5(|yy| z(yy, theta), yj)?;
        let dz_dth = numcore::jacobian5(|th| z(yj, th), theta)?;
        let lu = dz_dy.lu().map_err(|_| HoaError::DensityZero { obs: j })?;
        for k in 0..p {
            let col = lu.solve(&dz_dth.column(k))?;
            for (i, c) in col.into_iter().enumerate() {
                v[(j * d + i, k)] = -c;
            }
        }
    }
    origin(v)
}

/// Local score construction for discrete responses:
/// `w_j = ∂ℓ(θ; y_j)/∂θ` at `θ̂°` and `V_j = ∂E(w_j; θ)/∂θᵀ` at `θ̂°`.
pub fn directions_discrete<T: Real>(model: &dyn Model<T>, fit: &Fit<T>) -> Result<Directions<T>> {
    if !model.structure().is_discrete() {
        return Err(HoaError::Unsupported(format!(
            "model '{}' has continuous responses; the local score construction is for discrete models",
            model.id()
        )));
    }
    if model.obs_dim() != 1 {
        return Err(HoaError::Unsupported(
            "discrete construction expects scalar responses".into(),
        ));
    }
    let theta = fit.theta_hat.as_slice();
    let p = model.dim();
    let n = model.n_obs();
    let y = model.observations();
    let mut v = RealMatrix::zeros(n * p, p);
    let mut score_dy = Vec::with_capacity(n);
    for j in 0..n {
        let a = match model.dscore_dy(j, theta) {
            Some(a) => a,
            None => numcore::jacobian5(|th| Ok(vec![dloglik_dy_single(model, j, th)?]), theta)?
                .row(0)
                .to_vec(),
        };
        let dmu = match model.dmean_dtheta(j, theta) {
            Some(g) => g,
            None => {
                let mean = |th: &[T]| {
                    model.mean(j, th).map(|m| vec![m]).ok_or_else(|| {
                        HoaError::Unsupported(format!(
                            "model '{}' has no mean function differentiable in theta",
                            model.id()
                        ))
                    })
                };
                numcore::jacobian5(mean, theta)?.row(0).to_vec()
            }
        };
        // E(w_j; θ) = a_j·{E(y_j; θ) − E(y_j; θ̂°)} for scores affine in y_j
        for r in 0..p {
            for c in 0..p {
                v[(j * p + r, c)] = a[r] * dmu[c];
            }
        }
        score_dy.push(a);
    }
    Directions {
        v,
        origin_data: RealVector::new(y.to_vec())?,
        origin_theta: fit.theta_hat.clone(),
        kind: DirectionKind::Discrete { score_dy },
    }
    .checked()
}

/// `∂ℓ(θ; y)/∂y_j` at `y°`, closed form when the model has one.
pub(crate) fn dloglik_dy_single<T: Real>(model: &dyn Model<T>, j: usize, theta: &[T]) -> Result<T> {
    if let Some(g) = model.dloglik_dy(theta) {
        return Ok(g[j]);
    }
    let y0 = model.observations();
    let h = numcore::diff::jacobian_step(y0[j]);
    let mut y = y0.to_vec();
    numcore::diff::directional(
        |t| {
            y[j] = y0[j] + t;
            model.loglik_at(theta, &y)
        },
        h,
    )
}
