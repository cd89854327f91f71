//! Full and constrained maximum likelihood, and profile log-likelihoods.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HoaError, Result};
use crate::models::{Model, ParamBox};
use crate::numcore::{self, RealMatrix, RealVector};
use crate::scalar::{to_f64_vec, tol, Real};

pub const MAX_ITERATIONS: usize = 200;
pub const MAX_HALVINGS: usize = 30;

/// Full maximum likelihood fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Fit<T: Real> {
    pub theta_hat: RealVector<T>,
    pub loglik_max: T,
    /// Observed information `ȷ(θ̂)`.
    pub obs_info: RealMatrix<T>,
    pub converged: bool,
    pub iterations: usize,
}

impl<T: Real> Fit<T> {
    pub fn psi_hat(&self, k: usize) -> T {
        self.theta_hat[k]
    }
}

/// Maximiser over the nuisance parameter with the interest parameter fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ConstrainedFit<T: Real> {
    pub psi: T,
    pub lambda_hat_psi: RealVector<T>,
    /// `ℓ_p(ψ)`.
    pub loglik: T,
    /// `ȷ_λλ(θ̂_ψ)`.
    pub info_lambda_block: RealMatrix<T>,
    /// Full parameter `θ̂_ψ`.
    pub theta: RealVector<T>,
    /// Full observed information `ȷ(θ̂_ψ)`.
    pub obs_info: RealMatrix<T>,
    pub iterations: usize,
}

/// Score from the model's closed form when available, else central differences.
/// The flag reports whether the closed form was used.
pub fn score<T: Real>(model: &dyn Model<T>, theta: &[T]) -> Result<(Vec<T>, bool)> {
    match model.score(theta) {
        Some(g) => Ok((g, true)),
        None => Ok((numcore::gradient(|t| model.loglik(t), theta)?, false)),
    }
}

/// Observed information from the closed form when available, else the
/// negated finite-difference Hessian.
pub fn information<T: Real>(model: &dyn Model<T>, theta: &[T]) -> Result<RealMatrix<T>> {
    match model.obs_info(theta) {
        Some(j) => Ok(j.symmetrized()),
        None => Ok(numcore::hessian(|t| model.loglik(t), theta)?.neg()),
    }
}

fn grad_tol<T: Real>(closed: bool) -> T {
    // central-difference scores carry noise near 1e-8·|ℓ|
    if closed {
        tol(1e-9)
    } else {
        tol(1e-7)
    }
}

// Gradient with a flag telling whether it came from a closed form.
type GradFn<'a, T> = &'a (dyn Fn(&[T]) -> Result<(Vec<T>, bool)> + Sync);

struct Problem<'a, T: Real> {
    f: &'a (dyn Fn(&[T]) -> T + Sync),
    grad: GradFn<'a, T>,
    info: &'a (dyn Fn(&[T]) -> Result<RealMatrix<T>> + Sync),
    domain: ParamBox<T>,
}

struct Optimum<T: Real> {
    x: Vec<T>,
    value: T,
    info: RealMatrix<T>,
    iterations: usize,
}

// Newton direction, regularised towards ascent when the information is not
// positive definite.
fn newton_direction<T: Real>(info: &RealMatrix<T>, g: &[T]) -> Vec<T> {
    if let Some(ch) = info.cholesky() {
        return ch.solve(g);
    }
    let p = g.len();
    let scale = (0..p).fold(T::zero(), |m, i| m.max(info[(i, i)].abs())) + T::one();
    let mut mu = T::lit(1e-6) * scale;
    for _ in 0..60 {
        let mut shifted = info.clone();
        for i in 0..p {
            shifted[(i, i)] += mu;
        }
        if let Some(ch) = shifted.cholesky() {
            return ch.solve(g);
        }
        mu *= T::lit(4.0);
    }
    g.iter().map(|&v| v / scale).collect()
}

fn maximise<T: Real>(prob: &Problem<'_, T>, start: &[T]) -> Result<Optimum<T>> {
    prob.domain.check(start)?;
    let mut x = start.to_vec();
    let mut fx = (prob.f)(&x);
    if !fx.is_finite() {
        return Err(HoaError::NonFinite {
            what: "log-likelihood at the starting point",
            at: to_f64_vec(&x),
        });
    }
    let step_tol: T = tol(1e-9);
    for it in 1..=MAX_ITERATIONS {
        let (g, closed) = (prob.grad)(&x)?;
        let info = (prob.info)(&x)?;
        let dir = newton_direction(&info, &g);
        // changes this small are indistinguishable from rounding in ℓ
        let flat = T::epsilon() * T::lit(4.0) * (T::one() + fx.abs());
        let g_ok = numcore::vector::norm(&g) <= grad_tol::<T>(closed) * (T::one() + fx.abs());
        let s_ok = numcore::vector::norm(&dir)
            <= step_tol * (T::one() + numcore::vector::norm(&x));
        if g_ok && s_ok {
            if !info.is_positive_definite() {
                return Err(HoaError::NotPositiveDefinite { at: to_f64_vec(&x) });
            }
            // the final Newton step is below tolerance; taking it polishes the
            // estimate to the roundoff level
            let polished: Vec<T> = x.iter().zip(&dir).map(|(&a, &d)| a + d).collect();
            if prob.domain.contains(&polished) {
                let fp = (prob.f)(&polished);
                if fp.is_finite() && fp >= fx - flat {
                    x = polished;
                    fx = fp;
                }
            }
            let info = (prob.info)(&x)?;
            if !info.is_positive_definite() {
                return Err(HoaError::NotPositiveDefinite { at: to_f64_vec(&x) });
            }
            return Ok(Optimum {
                x,
                value: fx,
                info,
                iterations: it,
            });
        }
        let mut t = prob.domain.step_fraction(&x, &dir);
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<T> = x.iter().zip(&dir).map(|(&a, &d)| a + t * d).collect();
            if trial == x {
                break;
            }
            if prob.domain.contains(&trial) {
                let ft = (prob.f)(&trial);
                // a full Newton step below the step tolerance is taken even when
                // cancellation in ℓ hides its ascent
                let polish = s_ok && t == T::one();
                if ft.is_finite() && (ft >= fx - flat || polish) {
                    x = trial;
                    fx = ft;
                    accepted = true;
                    break;
                }
            }
            t *= T::lit(0.5);
        }
        if !accepted {
            // no ascent available along the Newton direction: accept the
            // current point only if it is already stationary
            if g_ok {
                if !info.is_positive_definite() {
                    return Err(HoaError::NotPositiveDefinite { at: to_f64_vec(&x) });
                }
                return Ok(Optimum {
                    x,
                    value: fx,
                    info,
                    iterations: it,
                });
            }
            return Err(HoaError::NotConverged {
                iterations: it,
                last: to_f64_vec(&x),
            });
        }
    }
    Err(HoaError::NotConverged {
        iterations: MAX_ITERATIONS,
        last: to_f64_vec(&x),
    })
}

/// Maximum likelihood estimate from `start`.
pub fn fit_mle<T: Real>(model: &dyn Model<T>, start: &[T]) -> Result<Fit<T>> {
    if start.len() != model.dim() {
        return Err(HoaError::Dimension {
            context: "fit_mle start",
            expected: model.dim(),
            got: start.len(),
        });
    }
    let f = |t: &[T]| model.loglik(t);
    let grad = |t: &[T]| score(model, t);
    let info = |t: &[T]| information(model, t);
    let prob = Problem {
        f: &f,
        grad: &grad,
        info: &info,
        domain: model.domain(),
    };
    let opt = maximise(&prob, start)?;
    Ok(Fit {
        theta_hat: RealVector::new(opt.x)?,
        loglik_max: opt.value,
        obs_info: opt.info,
        converged: true,
        iterations: opt.iterations,
    })
}

/// Maximum likelihood estimate from the model's own starting point.
pub fn fit_default<T: Real>(model: &dyn Model<T>) -> Result<Fit<T>> {
    fit_mle(model, &model.start())
}

fn insert<T: Real>(lambda: &[T], k: usize, psi: T) -> Vec<T> {
    let mut theta = Vec::with_capacity(lambda.len() + 1);
    theta.extend_from_slice(&lambda[..k]);
    theta.push(psi);
    theta.extend_from_slice(&lambda[k..]);
    theta
}

fn remove<T: Real>(theta: &[T], k: usize) -> Vec<T> {
    theta
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != k)
        .map(|(_, &v)| v)
        .collect()
}

/// Nuisance part of `θ`, i.e. `θ` without the interest coordinate.
pub fn nuisance_of<T: Real>(model: &dyn Model<T>, theta: &[T]) -> Vec<T> {
    remove(theta, model.interest_index())
}

/// Maximises over `λ` with `ψ` held fixed, starting from `lambda_start`.
pub fn fit_constrained<T: Real>(
    model: &dyn Model<T>,
    psi: T,
    lambda_start: &[T],
) -> Result<ConstrainedFit<T>> {
    let p = model.dim();
    if p < 2 {
        return Err(HoaError::Unsupported(
            "constrained fit needs a nuisance parameter (p >= 2)".into(),
        ));
    }
    if lambda_start.len() != p - 1 {
        return Err(HoaError::Dimension {
            context: "fit_constrained start",
            expected: p - 1,
            got: lambda_start.len(),
        });
    }
    let k = model.interest_index();
    let dom = model.domain();
    if !dom.contains_coord(k, psi) {
        return Err(HoaError::Inadmissible {
            at: vec![psi.to_f64_lossy()],
        });
    }
    let sub_dom = ParamBox {
        lower: remove(&dom.lower, k),
        upper: remove(&dom.upper, k),
    };
    let f = |l: &[T]| model.loglik(&insert(l, k, psi));
    let grad = |l: &[T]| {
        let (g, closed) = score(model, &insert(l, k, psi))?;
        Ok((remove(&g, k), closed))
    };
    let info = |l: &[T]| {
        let j = information(model, &insert(l, k, psi))?;
        Ok(j.without_index(k))
    };
    let prob = Problem {
        f: &f,
        grad: &grad,
        info: &info,
        domain: sub_dom,
    };
    let opt = maximise(&prob, lambda_start).map_err(|e| match e {
        HoaError::NotPositiveDefinite { .. } => HoaError::NuisanceInformation {
            psi: psi.to_f64_lossy(),
        },
        other => other,
    })?;
    let theta = insert(&opt.x, k, psi);
    let full_info = information(model, &theta)?;
    Ok(ConstrainedFit {
        psi,
        lambda_hat_psi: RealVector::new(opt.x)?,
        loglik: opt.value,
        info_lambda_block: opt.info,
        theta: RealVector::new(theta)?,
        obs_info: full_info,
        iterations: opt.iterations,
    })
}

/// Rejects a constrained maximum that exceeds the full maximum.
pub fn check_profile_consistency<T: Real>(fit: &Fit<T>, cfit: &ConstrainedFit<T>) -> Result<()> {
    let excess = cfit.loglik - fit.loglik_max;
    if excess > tol::<T>(1e-9) * (T::one() + fit.loglik_max.abs()) {
        return Err(HoaError::OptimizerInconsistency {
            theta: cfit.psi.to_f64_lossy(),
            excess: excess.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Every `COARSE_STRIDE`-th grid point is fitted sequentially before the
/// remaining points are fitted in parallel from their nearest coarse neighbour.
const COARSE_STRIDE: usize = 4;

/// Profile log-likelihood along a strictly increasing grid of `ψ` values.
///
/// Results are independent of thread scheduling: every fit starts from a
/// point fixed by a preliminary sequential pass.
pub fn profile_curve<T: Real>(
    model: &dyn Model<T>,
    fit: &Fit<T>,
    psi_grid: &[T],
) -> Result<Vec<ConstrainedFit<T>>> {
    if model.dim() < 2 {
        return Err(HoaError::Unsupported(
            "profile likelihood needs a nuisance parameter (p >= 2)".into(),
        ));
    }
    if psi_grid.is_empty() || !psi_grid.windows(2).all(|w| w[1] > w[0]) {
        return Err(HoaError::InvalidInput("psi grid must be strictly increasing".into()));
    }
    let k = model.interest_index();
    let psi_hat = fit.theta_hat[k];
    let lambda_hat = remove(&fit.theta_hat, k);
    let n = psi_grid.len();

    let coarse: Vec<usize> = (0..n).filter(|i| i % COARSE_STRIDE == 0 || *i == n - 1).collect();
    let centre = coarse
        .iter()
        .enumerate()
        .min_by(|a, b| {
            let da = (psi_grid[*a.1] - psi_hat).abs();
            let db = (psi_grid[*b.1] - psi_hat).abs();
            da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
        })
        .map(|(pos, _)| pos)
        .unwrap_or(0);

    let mut results: Vec<Option<ConstrainedFit<T>>> = vec![None; n];
    let tag = |i: usize| move |e: HoaError| e.at_grid_point(psi_grid[i].to_f64_lossy());
    // outward sweeps from the point nearest ψ̂
    let mut warm = lambda_hat.clone();
    for &i in &coarse[centre..] {
        let c = fit_constrained(model, psi_grid[i], &warm).map_err(tag(i))?;
        warm = c.lambda_hat_psi.to_vec();
        results[i] = Some(c);
    }
    warm = lambda_hat;
    for &i in coarse[..centre].iter().rev() {
        let c = fit_constrained(model, psi_grid[i], &warm).map_err(tag(i))?;
        warm = c.lambda_hat_psi.to_vec();
        results[i] = Some(c);
    }

    let fine: Vec<usize> = (0..n).filter(|i| results[*i].is_none()).collect();
    let starts: Vec<Vec<T>> = fine
        .iter()
        .map(|&i| {
            let nearest = coarse
                .iter()
                .min_by_key(|&&c| c.abs_diff(i))
                .copied()
                .unwrap_or(0);
            results[nearest]
                .as_ref()
                .map(|c| c.lambda_hat_psi.to_vec())
                .unwrap_or_default()
        })
        .collect();
    let fitted: Vec<Result<ConstrainedFit<T>>> = fine
        .par_iter()
        .zip(starts.par_iter())
        .map(|(&i, start)| fit_constrained(model, psi_grid[i], start).map_err(tag(i)))
        .collect();
    for (&i, r) in fine.iter().zip(fitted) {
        results[i] = Some(r?);
    }
    let out: Vec<ConstrainedFit<T>> = results.into_iter().flatten().collect();
    for c in &out {
        check_profile_consistency(fit, c).map_err(|e| e.at_grid_point(c.psi.to_f64_lossy()))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ExpPair, GammaRatio};

    #[test]
    fn gamma_ratio_fit() {
        let m = GammaRatio::<f64>::from_sa(1.6, 3.0).unwrap();
        let fit = fit_default(&m).unwrap();
        assert!((fit.theta_hat[0] - 1.6).abs() < 1e-10);
        assert!((fit.obs_info[(0, 0)] - 2.34375).abs() < 1e-10);
    }

    #[test]
    fn exp_pair_fit_and_constrained() {
        let m = ExpPair::<f64>::new(vec![1.0, 2.0]).unwrap();
        let fit = fit_default(&m).unwrap();
        assert!((fit.theta_hat[0] - 2.0).abs() < 1e-10);
        assert!((fit.theta_hat[1] - 0.5).abs() < 1e-10);
        let c1 = fit_constrained(&m, 1.0, &[0.5]).unwrap();
        assert!((c1.lambda_hat_psi[0] - 2.0 / 3.0).abs() < 1e-10);
        let c2 = fit_constrained(&m, 2.0, &[1.0]).unwrap();
        assert!((c2.lambda_hat_psi[0] - 0.5).abs() < 1e-10);
        assert!((c2.loglik - c1.loglik - (9.0f64 / 8.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn scalar_model_rejects_profile() {
        let m = GammaRatio::<f64>::from_sa(1.6, 3.0).unwrap();
        let fit = fit_default(&m).unwrap();
        assert!(matches!(
            profile_curve(&m, &fit, &[1.0, 2.0]),
            Err(HoaError::Unsupported(_))
        ));
        assert!(matches!(
            fit_constrained(&m, 1.0, &[]),
            Err(HoaError::Unsupported(_))
        ));
    }
}
