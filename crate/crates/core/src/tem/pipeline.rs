use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{HoaError, Result};
use crate::firstorder::{self, profile_information};
use crate::models::{CoordMap, Model};
use crate::numcore::{interp, normal};
use crate::optim::{self, ConstrainedFit, Fit};
use crate::scalar::{to_f64_vec, Real};

use super::canonical::{canonical_phi, CanonicalParam};
use super::directions::{directions, Directions};
use super::q::{lugannani_rice, q_general, q_scalar, rstar};

/// Higher-order and first-order pivots at one value of the interest parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PivotSet<T: Real> {
    pub psi: T,
    pub r: T,
    pub q: T,
    pub rstar: T,
    pub phi_r: T,
    pub phi_rstar: T,
    pub lugannani_rice: T,
    pub wald: T,
    /// Set when `|r|` is inside the singular window and `r*` was interpolated.
    pub interpolated: bool,
    /// `λ̂_ψ`; empty for one-parameter models.
    pub nuisance: Vec<T>,
}

impl<T: Real> PivotSet<T> {
    fn from_parts(psi: T, r: T, q: T, wald: T, nuisance: Vec<T>) -> Result<Self> {
        let (rs, lr, interpolated) = match (rstar(r, q)?, lugannani_rice(r, q)?) {
            (Some(rs), Some(lr)) => (rs, lr, false),
            _ => (r, normal::cdf(r), true),
        };
        Ok(Self {
            psi,
            r,
            q,
            rstar: rs,
            phi_r: normal::cdf(r),
            phi_rstar: normal::cdf(rs),
            lugannani_rice: lr,
            wald,
            interpolated,
            nuisance,
        })
    }

    pub(crate) fn fill(&mut self, rstar: T, lugannani_rice: T) {
        self.rstar = rstar;
        self.phi_rstar = normal::cdf(rstar);
        self.lugannani_rice = lugannani_rice.max(T::zero()).min(T::one());
    }

    /// Pivot value on the standard normal scale for `method`.
    pub fn z(&self, method: Method) -> T {
        match method {
            Method::Wald => self.wald,
            Method::Root => self.r,
            Method::RStar => self.rstar,
            Method::LugannaniRice => normal::quantile(self.lugannani_rice),
        }
    }

    /// Significance `p(ψ)` for `method`.
    pub fn significance(&self, method: Method) -> T {
        match method {
            Method::Wald => normal::cdf(self.wald),
            Method::Root => self.phi_r,
            Method::RStar => self.phi_rstar,
            Method::LugannaniRice => self.lugannani_rice,
        }
    }
}

/// Which approximation a significance value or interval is read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Wald,
    Root,
    RStar,
    LugannaniRice,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Wald, Method::Root, Method::RStar, Method::LugannaniRice];

    pub fn name(self) -> &'static str {
        match self {
            Method::Wald => "wald",
            Method::Root => "r",
            Method::RStar => "rstar",
            Method::LugannaniRice => "lugannani_rice",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = HoaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wald" | "t" => Ok(Method::Wald),
            "r" | "root" => Ok(Method::Root),
            "rstar" | "r*" => Ok(Method::RStar),
            "lugannani_rice" | "lr" => Ok(Method::LugannaniRice),
            other => Err(HoaError::InvalidInput(format!("unknown method '{other}'"))),
        }
    }
}

/// Model, full fit, sufficient directions and canonical parameter, fixed once
/// and shared by every evaluation.
#[derive(Clone)]
pub struct Pipeline<T: Real> {
    model: Arc<dyn Model<T>>,
    fit: Fit<T>,
    cp: CanonicalParam<T>,
    se: T,
}

impl<T: Real> fmt::Debug for Pipeline<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Pipeline")
            .field("model", &self.model.id())
            .field("theta_hat", &self.fit.theta_hat)
            .field("se", &self.se)
            .finish()
    }
}

/// Distance from `ψ̂` of the innermost nodes used to fill the window, in
/// first-order standard errors.
const FILL_START: f64 = 0.075;
const FILL_DOUBLINGS: usize = 30;

impl<T: Real> Pipeline<T> {
    pub fn new(model: Arc<dyn Model<T>>) -> Result<Self> {
        let fit = optim::fit_default(model.as_ref())?;
        Self::with_fit(model, fit)
    }

    pub fn with_fit(model: Arc<dyn Model<T>>, fit: Fit<T>) -> Result<Self> {
        let dirs = directions(model.as_ref(), &fit)?;
        Self::with_directions(model, fit, &dirs)
    }

    pub fn with_directions(model: Arc<dyn Model<T>>, fit: Fit<T>, dirs: &Directions<T>) -> Result<Self> {
        let cp = canonical_phi(model.clone(), dirs)?;
        let j = cp.dphi_dtheta(&fit.theta_hat)?;
        let d = j.det()?;
        if d == T::zero() || !d.is_finite() {
            return Err(HoaError::Identifiability {
                at: to_f64_vec(&fit.theta_hat),
            });
        }
        let jp = profile_information(&fit.obs_info, model.interest_index())?;
        if !(jp > T::zero()) {
            return Err(HoaError::NotPositiveDefinite {
                at: to_f64_vec(&fit.theta_hat),
            });
        }
        Ok(Self {
            model,
            fit,
            cp,
            se: T::one() / jp.sqrt(),
        })
    }

    pub fn model(&self) -> &Arc<dyn Model<T>> {
        &self.model
    }

    pub fn fit(&self) -> &Fit<T> {
        &self.fit
    }

    pub fn canonical(&self) -> &CanonicalParam<T> {
        &self.cp
    }

    pub fn directions(&self) -> &Directions<T> {
        self.cp.directions()
    }

    pub fn psi_hat(&self) -> T {
        self.fit.theta_hat[self.model.interest_index()]
    }

    /// First-order standard error `ȷ_p(ψ̂)^{-1/2}`.
    pub fn standard_error(&self) -> T {
        self.se
    }

    /// 3 for continuous models, 2 for the discrete construction.
    pub fn accuracy_order(&self) -> u8 {
        if self.cp.directions().is_discrete() {
            2
        } else {
            3
        }
    }

    /// Pivots at `psi` without filling the singular window.
    pub fn evaluate(&self, psi: T, lambda_start: Option<&[T]>) -> Result<PivotSet<T>> {
        let model = self.model.as_ref();
        if model.dim() == 1 {
            let fo = firstorder::pivots_scalar(model, &self.fit, psi)?;
            let q = q_scalar(model, &self.cp, &self.fit, psi)?;
            return PivotSet::from_parts(psi, fo.root, q, fo.wald, Vec::new());
        }
        let default = optim::nuisance_of(model, &self.fit.theta_hat);
        let start = lambda_start.unwrap_or(&default);
        let cfit = optim::fit_constrained(model, psi, start)?;
        self.evaluate_constrained(&cfit)
    }

    /// Pivots at an already computed constrained fit.
    pub fn evaluate_constrained(&self, cfit: &ConstrainedFit<T>) -> Result<PivotSet<T>> {
        let model = self.model.as_ref();
        optim::check_profile_consistency(&self.fit, cfit)?;
        let fo = firstorder::pivots_profile(model, &self.fit, cfit)?;
        let q = q_general(model, &self.cp, &self.fit, cfit)?;
        PivotSet::from_parts(cfit.psi, fo.root, q, fo.wald, cfit.lambda_hat_psi.to_vec())
    }

    /// Pivots at `psi`, with `r*` and Lugannani–Rice interpolated from nearby
    /// nodes when `psi` falls inside the singular window.
    pub fn significance_at(&self, psi: T, lambda_start: Option<&[T]>) -> Result<PivotSet<T>> {
        let mut point = self.evaluate(psi, lambda_start)?;
        if point.interpolated {
            let (rs, lr) = self.fill_locally(psi)?;
            point.fill(rs, lr);
        }
        Ok(point)
    }

    // Evaluates four nodes at ψ̂ ± d, ψ̂ ± 2d outside the window, doubling d as
    // needed, and interpolates at `psi`.
    fn fill_locally(&self, psi: T) -> Result<(T, T)> {
        let k = self.model.interest_index();
        let dom = self.model.domain();
        let psi_hat = self.psi_hat();
        let three = T::lit(3.0);
        let left_room = psi_hat - dom.lower[k];
        let right_room = dom.upper[k] - psi_hat;
        let mut d = T::lit(FILL_START) * self.se;
        let mut usable = 0;
        for _ in 0..FILL_DOUBLINGS {
            let dl = d.min(left_room / three);
            let dr = d.min(right_room / three);
            let nodes = [psi_hat - dl - dl, psi_hat - dl, psi_hat + dr, psi_hat + dr + dr];
            let points: Vec<PivotSet<T>> = nodes
                .iter()
                .map(|&x| self.evaluate(x, None))
                .collect::<Result<_>>()?;
            usable = points.iter().filter(|p| !p.interpolated).count();
            if usable == nodes.len() {
                return interpolate_at(&points, psi);
            }
            d = d + d;
        }
        Err(HoaError::CurveTooShort { usable })
    }

    /// Grid of `count` points spanning `ψ̂ ± half_width` standard errors, on the
    /// log scale when the model declares one for `ψ`, clipped to the domain.
    pub fn auto_grid(&self, count: usize, half_width: T) -> Result<Vec<T>> {
        if count < 2 {
            return Err(HoaError::InvalidInput("grid needs at least two points".into()));
        }
        let k = self.model.interest_index();
        let dom = self.model.domain();
        let psi_hat = self.psi_hat();
        let log_scale = self
            .model
            .reparam()
            .is_some_and(|m| m[k] == CoordMap::Log)
            && psi_hat > T::zero();
        let (lo, hi) = if log_scale {
            let w = half_width * self.se / psi_hat;
            (psi_hat.ln() - w, psi_hat.ln() + w)
        } else {
            let w = half_width * self.se;
            let mut lo = psi_hat - w;
            let mut hi = psi_hat + w;
            let margin = T::lit(0.01);
            if lo <= dom.lower[k] {
                lo = dom.lower[k] + margin * (psi_hat - dom.lower[k]);
            }
            if hi >= dom.upper[k] {
                hi = dom.upper[k] - margin * (dom.upper[k] - psi_hat);
            }
            (lo, hi)
        };
        let n = T::from_usize(count - 1).ok_or_else(|| HoaError::InvalidInput("grid too large".into()))?;
        let grid: Vec<T> = (0..count)
            .map(|i| {
                let t = lo + (hi - lo) * T::from_usize(i).unwrap_or_else(T::zero) / n;
                if log_scale {
                    t.exp()
                } else {
                    t
                }
            })
            .collect();
        if !grid.windows(2).all(|w| w[1] > w[0]) {
            return Err(HoaError::InvalidInput("degenerate automatic grid".into()));
        }
        Ok(grid)
    }
}

/// Monotone cubic interpolation of `r*` and Lugannani–Rice through `nodes`
/// (all outside the window) at `psi`.
pub(crate) fn interpolate_at<T: Real>(nodes: &[PivotSet<T>], psi: T) -> Result<(T, T)> {
    let mut sorted: Vec<&PivotSet<T>> = nodes.iter().collect();
    sorted.sort_by(|a, b| a.psi.partial_cmp(&b.psi).unwrap_or(std::cmp::Ordering::Equal));
    let xs: Vec<T> = sorted.iter().map(|p| p.psi).collect();
    let rs: Vec<T> = sorted.iter().map(|p| p.rstar).collect();
    let lr: Vec<T> = sorted.iter().map(|p| p.lugannani_rice).collect();
    Ok((interp::pchip(&xs, &rs, psi)?, interp::pchip(&xs, &lr, psi)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ExpPair, GammaRatio};

    #[test]
    fn gamma_ratio_point() {
        let m: Arc<dyn Model<f64>> = Arc::new(GammaRatio::from_sa(1.6, 3.0).unwrap());
        let pl = Pipeline::new(m).unwrap();
        let p = pl.significance_at(1.0, None).unwrap();
        assert!(!p.interpolated);
        assert!((p.phi_rstar - 0.88207919634184939).abs() < 1e-9);
        assert!((p.lugannani_rice - 0.88207962948541067).abs() < 1e-9);
        assert_eq!(pl.accuracy_order(), 3);
    }

    #[test]
    fn window_is_filled_near_the_estimate() {
        let m: Arc<dyn Model<f64>> = Arc::new(ExpPair::new(vec![1.0, 2.0]).unwrap());
        let pl = Pipeline::new(m).unwrap();
        let p = pl.significance_at(2.0, None).unwrap();
        assert!(p.interpolated);
        assert!(p.phi_rstar > 0.3 && p.phi_rstar < 0.7);
        let below = pl.significance_at(1.0, None).unwrap();
        assert!((below.phi_rstar - 0.66468297375937182).abs() < 1e-9);
        assert!(below.phi_rstar > p.phi_rstar);
    }

    #[test]
    fn auto_grid_stays_in_domain() {
        let m: Arc<dyn Model<f64>> = Arc::new(GammaRatio::from_sa(1.6, 3.0).unwrap());
        let pl = Pipeline::new(m).unwrap();
        let g = pl.auto_grid(61, 5.0).unwrap();
        assert_eq!(g.len(), 61);
        assert!(g[0] > 0.0);
        assert!((g[30] - 1.6).abs() < 1e-12);
    }
}
