//! First-order pivots: score, Wald and likelihood root.

use serde::{Deserialize, Serialize};

use crate::error::{HoaError, Result};
use crate::models::Model;
use crate::numcore::{normal, RealMatrix};
use crate::optim::{self, ConstrainedFit, Fit};
use crate::scalar::{tol, Real};

/// Score `s`, Wald `t` and likelihood root `r` at one value of the interest
/// parameter, with the profile information `ȷ_p(ψ)` there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FirstOrderPivots<T: Real> {
    pub score: T,
    pub wald: T,
    pub root: T,
    pub profile_info: T,
}

/// `ȷ_ψψ − ȷ_ψλ ȷ_λλ^{-1} ȷ_λψ` for interest coordinate `k`.
pub fn profile_information<T: Real>(info: &RealMatrix<T>, k: usize) -> Result<T> {
    let p = info.rows();
    if p == 1 {
        return Ok(info[(0, 0)]);
    }
    let lam: Vec<usize> = (0..p).filter(|&i| i != k).collect();
    let j_ll = info.select(&lam, &lam);
    let j_lp: Vec<T> = lam.iter().map(|&i| info[(i, k)]).collect();
    let sol = j_ll.solve(&j_lp).map_err(|_| HoaError::NuisanceInformation { psi: f64::NAN })?;
    let correction: T = j_lp.iter().zip(&sol).map(|(&a, &b)| a * b).sum();
    Ok(info[(k, k)] - correction)
}

/// Signed root `sign(ψ̂ − ψ)·√(2{ℓ̂ − ℓ})`, rejecting an `ℓ` above the maximum.
pub fn likelihood_root<T: Real>(psi_hat: T, psi: T, loglik_max: T, loglik: T) -> Result<T> {
    let drop = loglik_max - loglik;
    if -drop > tol::<T>(1e-9) * (T::one() + loglik_max.abs()) {
        return Err(HoaError::OptimizerInconsistency {
            theta: psi.to_f64_lossy(),
            excess: (-drop).to_f64_lossy(),
        });
    }
    let mag = (T::lit(2.0) * drop.max(T::zero())).sqrt();
    Ok(sign(psi_hat - psi) * mag)
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

/// Pivots for a one-parameter model at `theta`.
pub fn pivots_scalar<T: Real>(
    model: &dyn Model<T>,
    fit: &Fit<T>,
    theta: T,
) -> Result<FirstOrderPivots<T>> {
    if model.dim() != 1 {
        return Err(HoaError::Unsupported(format!(
            "scalar pivots need p = 1, model has p = {}",
            model.dim()
        )));
    }
    model.domain().check(&[theta])?;
    let j_hat = fit.obs_info[(0, 0)];
    if !(j_hat > T::zero()) {
        return Err(HoaError::NotPositiveDefinite {
            at: vec![fit.theta_hat[0].to_f64_lossy()],
        });
    }
    let theta_hat = fit.theta_hat[0];
    let (g, _) = optim::score(model, &[theta])?;
    let root = likelihood_root(theta_hat, theta, fit.loglik_max, model.loglik(&[theta]))?;
    Ok(FirstOrderPivots {
        score: g[0] / j_hat.sqrt(),
        wald: (theta_hat - theta) * j_hat.sqrt(),
        root,
        profile_info: j_hat,
    })
}

/// Pivots from the profile log-likelihood at `cfit.psi`.
pub fn pivots_profile<T: Real>(
    model: &dyn Model<T>,
    fit: &Fit<T>,
    cfit: &ConstrainedFit<T>,
) -> Result<FirstOrderPivots<T>> {
    if model.dim() < 2 {
        return Err(HoaError::Unsupported(
            "profile pivots need a nuisance parameter (p >= 2)".into(),
        ));
    }
    let k = model.interest_index();
    let psi = cfit.psi;
    let nuisance = |e: HoaError| match e {
        HoaError::NuisanceInformation { .. } => HoaError::NuisanceInformation {
            psi: psi.to_f64_lossy(),
        },
        other => other,
    };
    if !cfit.info_lambda_block.is_positive_definite() {
        return Err(HoaError::NuisanceInformation {
            psi: psi.to_f64_lossy(),
        });
    }
    let jp_hat = profile_information(&fit.obs_info, k).map_err(nuisance)?;
    let jp_psi = profile_information(&cfit.obs_info, k).map_err(nuisance)?;
    if !(jp_hat > T::zero()) {
        return Err(HoaError::NotPositiveDefinite {
            at: fit.theta_hat.iter().map(|v| v.to_f64_lossy()).collect(),
        });
    }
    let psi_hat = fit.theta_hat[k];
    let (g, _) = optim::score(model, &cfit.theta)?;
    let root = likelihood_root(psi_hat, psi, fit.loglik_max, cfit.loglik)?;
    Ok(FirstOrderPivots {
        score: g[k] / jp_hat.sqrt(),
        wald: (psi_hat - psi) * jp_hat.sqrt(),
        root,
        profile_info: jp_psi,
    })
}

/// `(Φ(s), Φ(t), Φ(r))`.
pub fn first_order_significance<T: Real>(p: &FirstOrderPivots<T>) -> (T, T, T) {
    (normal::cdf(p.score), normal::cdf(p.wald), normal::cdf(p.root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ExpPair, GammaRatio};
    use crate::optim::{fit_constrained, fit_default};

    #[test]
    fn gamma_ratio_pivots() {
        let m = GammaRatio::<f64>::from_sa(1.6, 3.0).unwrap();
        let fit = fit_default(&m).unwrap();
        let p = pivots_scalar(&m, &fit, 1.0).unwrap();
        assert!((p.root - 1.16189500386222507).abs() < 1e-10);
        assert!((p.wald - 0.91855865354369179).abs() < 1e-10);
        let (_, phi_t, phi_r) = first_order_significance(&p);
        assert!((phi_r - 0.87736094159661358).abs() < 1e-10);
        assert!((phi_t - 0.82083676662555986).abs() < 1e-10);
        let at_mle = pivots_scalar(&m, &fit, 1.6).unwrap();
        assert!(at_mle.root.abs() < 1e-12 && at_mle.wald.abs() < 1e-12 && at_mle.score.abs() < 1e-9);
    }

    #[test]
    fn exp_pair_profile_pivots() {
        let m = ExpPair::<f64>::new(vec![1.0, 2.0]).unwrap();
        let fit = fit_default(&m).unwrap();
        let c = fit_constrained(&m, 1.0, &[0.5]).unwrap();
        let p = pivots_profile(&m, &fit, &c).unwrap();
        assert!((p.root - 0.48535149254202043).abs() < 1e-10);
        assert!((first_order_significance(&p).2 - 0.68628648252760666).abs() < 1e-10);
        let c3 = fit_constrained(&m, 3.0, &[0.5]).unwrap();
        let p3 = pivots_profile(&m, &fit, &c3).unwrap();
        assert!(p3.root < 0.0 && p3.wald < 0.0);
    }

    #[test]
    fn zero_pivots_give_half() {
        let z = FirstOrderPivots {
            score: 0.0,
            wald: 0.0,
            root: 0.0,
            profile_info: 1.0,
        };
        assert_eq!(first_order_significance(&z), (0.5, 0.5, 0.5));
    }
}
