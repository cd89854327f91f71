use crate::error::{HoaError, Result};
use crate::models::Model;
use crate::numcore::{gram_det_sqrt, normal, RealMatrix};
use crate::optim::{ConstrainedFit, Fit};
use crate::scalar::{to_f64_vec, Real};

use super::canonical::CanonicalParam;

/// Half-width on the `r` scale of the window around `ψ̂` in which `r*` and the
/// Lugannani–Rice formula are filled by interpolation.
pub const WINDOW: f64 = 0.05;

/// Relative agreement demanded of the two evaluations of `q`.
const CROSS_CHECK_REL: f64 = 1e-8;

/// Unit vector `u` along row `k` of `(∂φ/∂θᵀ)^{-1}` at `θ̂_ψ`, with `χ = uᵀφ`
/// at `θ̂` and at `θ̂_ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiProjection<T: Real> {
    pub u: Vec<T>,
    pub chi_hat: T,
    pub chi_psi: T,
}

fn sign<T: Real>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else if x < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

fn identifiability<T: Real>(theta: &[T]) -> HoaError {
    HoaError::Identifiability {
        at: to_f64_vec(theta),
    }
}

fn invertible<T: Real>(j: &RealMatrix<T>, theta: &[T]) -> Result<T> {
    let d = j.det()?;
    if d == T::zero() || !d.is_finite() {
        return Err(identifiability(theta));
    }
    Ok(d)
}

/// Orthogonal projection of `φ` onto the direction of `∂ψ/∂φ` at `θ̂_ψ`.
pub fn chi_projection<T: Real>(
    cp: &CanonicalParam<T>,
    fit: &Fit<T>,
    cfit: &ConstrainedFit<T>,
) -> Result<ChiProjection<T>> {
    let jpsi = cp.dphi_dtheta(&cfit.theta)?;
    chi_from_jacobian(cp, fit, cfit, &jpsi)
}

fn chi_from_jacobian<T: Real>(
    cp: &CanonicalParam<T>,
    fit: &Fit<T>,
    cfit: &ConstrainedFit<T>,
    jpsi: &RealMatrix<T>,
) -> Result<ChiProjection<T>> {
    let k = cp.model().interest_index();
    invertible(jpsi, &cfit.theta)?;
    let inv = jpsi.inverse().map_err(|_| identifiability(&cfit.theta))?;
    let row = inv.row(k);
    let len = row.iter().map(|&x| x * x).sum::<T>().sqrt();
    let u: Vec<T> = row.iter().map(|&x| x / len).collect();
    let dot = |a: &[T]| a.iter().zip(&u).map(|(&x, &y)| x * y).sum::<T>();
    let chi_hat = dot(&cp.phi(&fit.theta_hat)?);
    let chi_psi = dot(&cp.phi(&cfit.theta)?);
    Ok(ChiProjection { u, chi_hat, chi_psi })
}

/// `q` for a scalar interest parameter with nuisance parameters.
///
/// The value returned is the projection form; the determinant form is
/// evaluated alongside it and the two must agree.
pub fn q_general<T: Real>(
    model: &dyn Model<T>,
    cp: &CanonicalParam<T>,
    fit: &Fit<T>,
    cfit: &ConstrainedFit<T>,
) -> Result<T> {
    let p = model.dim();
    if p < 2 {
        return Err(HoaError::Unsupported(
            "q_general needs a nuisance parameter (p >= 2); use q_scalar".into(),
        ));
    }
    let k = model.interest_index();
    let jhat = cp.dphi_dtheta(&fit.theta_hat)?;
    let jpsi = cp.dphi_dtheta(&cfit.theta)?;
    let det_jhat = invertible(&jhat, &fit.theta_hat)?;
    let chi = chi_from_jacobian(cp, fit, cfit, &jpsi)?;

    let det_info = fit.obs_info.det()?;
    let det_info_ll = cfit.info_lambda_block.det()?;
    let ratio = det_info / det_info_ll;
    if !(det_info > T::zero() && det_info_ll > T::zero()) || !ratio.is_finite() {
        return Err(HoaError::InformationSign {
            value: ratio.to_f64_lossy(),
        });
    }
    let jlam = jpsi.without_column(k);
    let gram = gram_det_sqrt(&jlam).map_err(|_| identifiability(&cfit.theta))?;
    let recal = ratio * (gram / det_jhat) * (gram / det_jhat);
    let psi_hat = fit.theta_hat[k];
    let area = sign(psi_hat - cfit.psi) * (chi.chi_hat - chi.chi_psi).abs() * recal.sqrt();

    let dphi = crate::numcore::vector::sub(&cp.phi(&fit.theta_hat)?, &cp.phi(&cfit.theta)?);
    let num = jpsi.with_column_replaced(k, &dphi).det()?;
    let determinant = num / det_jhat * ratio.sqrt();

    let scale = area.abs().max(determinant.abs());
    let floor = T::epsilon().sqrt() * T::epsilon().cbrt();
    if (area - determinant).abs() > T::lit(CROSS_CHECK_REL) * scale + floor {
        return Err(HoaError::InternalConsistency {
            area: area.to_f64_lossy(),
            determinant: determinant.to_f64_lossy(),
        });
    }
    Ok(area)
}

/// `q` for a one-parameter model at `theta`.
pub fn q_scalar<T: Real>(
    model: &dyn Model<T>,
    cp: &CanonicalParam<T>,
    fit: &Fit<T>,
    theta: T,
) -> Result<T> {
    if model.dim() != 1 {
        return Err(HoaError::Unsupported(format!(
            "q_scalar needs p = 1, model has p = {}",
            model.dim()
        )));
    }
    let theta_hat = fit.theta_hat[0];
    let dphi = cp.dphi_dtheta(&[theta_hat])?[(0, 0)];
    if dphi == T::zero() || !dphi.is_finite() {
        return Err(identifiability(&[theta_hat]));
    }
    let j_hat = fit.obs_info[(0, 0)];
    if !(j_hat > T::zero()) {
        return Err(HoaError::InformationSign {
            value: j_hat.to_f64_lossy(),
        });
    }
    let diff = cp.phi(&[theta_hat])?[0] - cp.phi(&[theta])?[0];
    Ok(sign(theta_hat - theta) * diff.abs() * j_hat.sqrt() / dphi.abs())
}

fn in_window<T: Real>(r: T) -> bool {
    r.abs() < T::lit(WINDOW)
}

fn check_signs<T: Real>(r: T, q: T) -> Result<()> {
    if !(r.is_finite() && q.is_finite()) {
        return Err(HoaError::NonFinite {
            what: "r or q",
            at: vec![r.to_f64_lossy(), q.to_f64_lossy()],
        });
    }
    if !(q / r > T::zero()) {
        return Err(HoaError::SignMismatch {
            r: r.to_f64_lossy(),
            q: q.to_f64_lossy(),
        });
    }
    Ok(())
}

/// `r* = r + log(q/r)/r`; `None` inside the singular window.
pub fn rstar<T: Real>(r: T, q: T) -> Result<Option<T>> {
    if in_window(r) {
        return Ok(None);
    }
    check_signs(r, q)?;
    Ok(Some(r + (q / r).ln() / r))
}

/// `Φ(r) + (1/r − 1/q)·ϕ(r)`, clamped to `[0, 1]`; `None` inside the window.
pub fn lugannani_rice<T: Real>(r: T, q: T) -> Result<Option<T>> {
    if in_window(r) {
        return Ok(None);
    }
    check_signs(r, q)?;
    let v = normal::cdf(r) + (T::one() / r - T::one() / q) * normal::pdf(r);
    Ok(Some(v.max(T::zero()).min(T::one())))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::models::{ExpPair, GammaRatio};
    use crate::optim::{fit_constrained, fit_default};
    use crate::tem::{canonical_phi, directions};

    #[test]
    fn exp_pair_projection_and_q() {
        let m: Arc<dyn Model<f64>> = Arc::new(ExpPair::new(vec![1.0, 2.0]).unwrap());
        let fit = fit_default(m.as_ref()).unwrap();
        let dirs = directions(m.as_ref(), &fit).unwrap();
        let cp = canonical_phi(m.clone(), &dirs).unwrap();
        let c = fit_constrained(m.as_ref(), 1.0, &[0.5]).unwrap();
        let chi = chi_projection(&cp, &fit, &c).unwrap();
        let s = 0.5f64.sqrt();
        assert!((chi.u[0] + s).abs() < 1e-9 && (chi.u[1] - s).abs() < 1e-9);
        assert!((chi.chi_hat - chi.chi_psi - 1.0 / 8f64.sqrt()).abs() < 1e-9);
        let q = q_general(m.as_ref(), &cp, &fit, &c).unwrap();
        assert!((q - 2f64.sqrt() / 3.0).abs() < 1e-9);
        let jl = cp.dphi_dtheta(&c.theta).unwrap().column(1);
        assert!((chi.u[0] * jl[0] + chi.u[1] * jl[1]).abs() < 1e-10);
    }

    #[test]
    fn gamma_ratio_q_scalar() {
        let m: Arc<dyn Model<f64>> = Arc::new(GammaRatio::from_sa(1.6, 3.0).unwrap());
        let fit = fit_default(m.as_ref()).unwrap();
        let dirs = directions(m.as_ref(), &fit).unwrap();
        let cp = canonical_phi(m.clone(), &dirs).unwrap();
        assert!((cp.phi(&[1.0]).unwrap()[0] + 1.828125).abs() < 1e-12);
        let q = q_scalar(m.as_ref(), &cp, &fit, 1.0).unwrap();
        assert!((q - 1.19412624960679932).abs() < 1e-9);
        assert_eq!(q_scalar(m.as_ref(), &cp, &fit, fit.theta_hat[0]).unwrap(), 0.0);
    }

    #[test]
    fn rstar_and_lugannani_rice() {
        let r: f64 = 1.16189500386222507;
        let q: f64 = 1.19412624960679932;
        let rs = rstar(r, q).unwrap().unwrap();
        assert!((rs - 1.18544485109770544).abs() < 1e-12);
        let lr = lugannani_rice(r, q).unwrap().unwrap();
        assert!((lr - 0.88207962948541067).abs() < 1e-12);
        assert_eq!(rstar(0.7, 0.7).unwrap(), Some(0.7));
        assert_eq!(lugannani_rice(0.7, 0.7).unwrap(), Some(normal::cdf(0.7)));
        assert_eq!(rstar(0.01, 0.02).unwrap(), None);
        assert!(matches!(rstar(0.5, -0.5), Err(HoaError::SignMismatch { .. })));
    }
}
