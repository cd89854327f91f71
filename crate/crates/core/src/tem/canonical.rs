use std::sync::Arc;

use crate::error::{HoaError, Result};
use crate::models::Model;
use crate::numcore::{self, RealMatrix};
use crate::scalar::{to_f64_vec, Real};

use super::directions::{dloglik_dy_single, DirectionKind, Directions};

/// Canonical parameter `φ(θ) = Vᵀ ∂ℓ(θ; y)/∂y` at `y°`.
#[derive(Clone)]
pub struct CanonicalParam<T: Real> {
    model: Arc<dyn Model<T>>,
    dirs: Directions<T>,
}

/// Builds `φ` for `model` along `dirs`.
pub fn canonical_phi<T: Real>(model: Arc<dyn Model<T>>, dirs: &Directions<T>) -> Result<CanonicalParam<T>> {
    let expected = match dirs.kind {
        DirectionKind::Continuous => model.observations().len(),
        DirectionKind::Discrete { .. } => model.n_obs() * model.dim(),
    };
    if dirs.v.rows() != expected || dirs.v.cols() != model.dim() {
        return Err(HoaError::Dimension {
            context: "sufficient directions rows",
            expected,
            got: dirs.v.rows(),
        });
    }
    Ok(CanonicalParam {
        model,
        dirs: dirs.clone(),
    })
}

impl<T: Real> CanonicalParam<T> {
    pub fn directions(&self) -> &Directions<T> {
        &self.dirs
    }

    pub fn model(&self) -> &Arc<dyn Model<T>> {
        &self.model
    }

    /// `φ(θ)`.
    pub fn phi(&self, theta: &[T]) -> Result<Vec<T>> {
        let model = self.model.as_ref();
        let p = model.dim();
        let v = &self.dirs.v;
        let out = match &self.dirs.kind {
            DirectionKind::Continuous => match model.dloglik_dy(theta) {
                Some(g) => v.tr_matvec(&g)?,
                None => self.phi_numeric(theta)?,
            },
            DirectionKind::Discrete { score_dy } => {
                // ∂ℓ/∂w_j = (∂w_j/∂y_j)⁺ ∂ℓ/∂y_j with the Moore–Penrose inverse
                let closed = model.dloglik_dy(theta);
                let mut phi = vec![T::zero(); p];
                for (j, a) in score_dy.iter().enumerate() {
                    let aa: T = a.iter().map(|&x| x * x).sum();
                    if aa == T::zero() {
                        continue;
                    }
                    let g = match &closed {
                        Some(g) => g[j],
                        None => dloglik_dy_single(model, j, theta)?,
                    };
                    for (c, ph) in phi.iter_mut().enumerate() {
                        let vta: T = (0..p).map(|r| v[(j * p + r, c)] * a[r]).sum();
                        *ph += vta / aa * g;
                    }
                }
                phi
            }
        };
        if out.iter().all(|x| x.is_finite()) {
            Ok(out)
        } else {
            Err(HoaError::NonFinite {
                what: "canonical parameter",
                at: to_f64_vec(theta),
            })
        }
    }

    // directional sample-space derivatives of ℓ along each column of V
    fn phi_numeric(&self, theta: &[T]) -> Result<Vec<T>> {
        let model = self.model.as_ref();
        let y0 = model.observations();
        let ymax = numcore::vector::max_abs(y0);
        let v = &self.dirs.v;
        let mut out = Vec::with_capacity(v.cols());
        let mut y = y0.to_vec();
        for k in 0..v.cols() {
            let col = v.column(k);
            let vmax = numcore::vector::max_abs(&col);
            let h = T::epsilon().cbrt() * (T::one() + ymax) / vmax;
            let d = numcore::diff::directional(
                |t| {
                    for (i, yi) in y.iter_mut().enumerate() {
                        *yi = y0[i] + t * col[i];
                    }
                    model.loglik_at(theta, &y)
                },
                h,
            )
            .map_err(|_| HoaError::NonFinite {
                what: "sample-space derivative of the log-likelihood",
                at: to_f64_vec(theta),
            })?;
            out.push(d);
        }
        Ok(out)
    }

    /// `∂φ/∂θᵀ`, row `i` holding the derivatives of `φ_i`.
    pub fn dphi_dtheta(&self, theta: &[T]) -> Result<RealMatrix<T>> {
        numcore::jacobian5(|t| self.phi(t), theta)
    }
}
