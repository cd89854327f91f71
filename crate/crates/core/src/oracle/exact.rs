use statrs::distribution::{Continuous, ContinuousCDF, Gamma};

use crate::error::{HoaError, Result};

use super::quadrature::integrate;

const ABS_TOL: f64 = 1e-13;
const REL_TOL: f64 = 1e-12;

/// Half-width `U` of the `u` range kept in the gamma-ratio integrals: the
/// smallest `U` with `2a(cosh U − 1) ≥ 40 ln 10`.
pub fn gamma_ratio_truncation(a: f64) -> f64 {
    (1.0 + 40.0 * std::f64::consts::LN_10 / (2.0 * a)).acosh()
}

/// `P(S ≤ s_obs | A = a_obs; θ)` for the ratio of two gamma variables, by
/// quadrature of `exp{−2a(cosh u − 1)}` over `u = log(s/θ)`.
pub fn exact_gamma_ratio_significance(s_obs: f64, a_obs: f64, theta: f64) -> Result<f64> {
    if !(s_obs > 0.0 && a_obs > 0.0 && theta > 0.0) || !(s_obs.is_finite() && a_obs.is_finite() && theta.is_finite()) {
        return Err(HoaError::InvalidInput(
            "s, a and theta must be positive and finite".into(),
        ));
    }
    let big_u = gamma_ratio_truncation(a_obs);
    let g = |u: f64| (-2.0 * a_obs * (u.cosh() - 1.0)).exp();
    let total = integrate(g, -big_u, big_u, ABS_TOL, REL_TOL)?.value;
    let u_obs = (s_obs / theta).ln();
    if u_obs == 0.0 {
        return Ok(0.5);
    }
    // integrate over the smaller tail and use symmetry of the integrand
    let tail_edge = -u_obs.abs();
    let tail = if tail_edge <= -big_u {
        0.0
    } else {
        integrate(g, -big_u, tail_edge, ABS_TOL * 1e-3, REL_TOL)?.value
    };
    let p_tail = tail / total;
    Ok(if u_obs < 0.0 { p_tail } else { 1.0 - p_tail })
}

fn gamma_quantile(dist: &Gamma, p: f64) -> f64 {
    let mut q = dist.inverse_cdf(p);
    for _ in 0..2 {
        let d = dist.pdf(q);
        if d > 0.0 {
            q -= (dist.cdf(q) - p) / d;
        }
    }
    q
}

/// Exact two-sided `level` interval for the mean of an exponential sample,
/// from `Σy/μ ~ Gamma(n, 1)`.
pub fn exact_exp_mean_interval(data: &[f64], level: f64) -> Result<(f64, f64)> {
    if data.is_empty() || !data.iter().all(|&y| y > 0.0 && y.is_finite()) {
        return Err(HoaError::InvalidInput("exponential data must be positive and finite".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(HoaError::InvalidInput(format!("level must lie in (0, 1), got {level}")));
    }
    let total: f64 = data.iter().sum();
    let dist = Gamma::new(data.len() as f64, 1.0)
        .map_err(|e| HoaError::InvalidInput(format!("gamma pivot: {e}")))?;
    let alpha = (1.0 - level) / 2.0;
    Ok((
        total / gamma_quantile(&dist, 1.0 - alpha),
        total / gamma_quantile(&dist, alpha),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_at_the_observed_ratio() {
        assert_eq!(exact_gamma_ratio_significance(1.6, 3.0, 1.6).unwrap(), 0.5);
    }

    #[test]
    fn reference_values() {
        let p = exact_gamma_ratio_significance(1.6, 3.0, 1.0).unwrap();
        assert!((p - 0.88179541485019187).abs() < 1e-10);
        let p20 = exact_gamma_ratio_significance(1.6, 3.0, 20.0).unwrap();
        assert!((p20 / 4.2784160715069e-16 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn single_exponential_interval() {
        let (lo, hi) = exact_exp_mean_interval(&[1.0], 0.95).unwrap();
        assert!((lo - 1.0 / 0.025f64.ln().abs()).abs() < 1e-12);
        assert!((hi - 1.0 / -(0.975f64.ln())).abs() < 1e-9);
    }
}
