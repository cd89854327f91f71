//! Standard normal distribution functions built on `erfc`.

use crate::scalar::Real;

/// `Φ(x)`, accurate in both tails.
pub fn cdf<T: Real>(x: T) -> T {
    T::lit(0.5) * (-x / T::SQRT_2()).erfc()
}

/// `1 − Φ(x)` without cancellation.
pub fn sf<T: Real>(x: T) -> T {
    cdf(-x)
}

/// `ϕ(x)`.
pub fn pdf<T: Real>(x: T) -> T {
    (-(x * x) / T::lit(2.0)).exp() / (T::TAU()).sqrt()
}

/// `Φ^{-1}(p)`: Acklam's rational approximation polished by one Halley step.
pub fn quantile<T: Real>(p: T) -> T {
    if !(p > T::zero()) {
        return if p == T::zero() { T::neg_infinity() } else { T::nan() };
    }
    if !(p < T::one()) {
        return if p == T::one() { T::infinity() } else { T::nan() };
    }
    let pf = p.to_f64_lossy();
    let x0 = acklam(pf);
    let x = T::lit(x0);
    // Halley refinement against the erfc-based cdf
    let e = if p < T::lit(0.5) {
        cdf(x) - p
    } else {
        (T::one() - p) - sf(x)
    };
    let u = e * T::TAU().sqrt() * (x * x / T::lit(2.0)).exp();
    x - u / (T::one() + x * u / T::lit(2.0))
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let lower = 0.02425;
    if p < lower {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - lower {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -acklam(1.0 - p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_reference_values() {
        assert_eq!(cdf(0.0f64), 0.5);
        assert!((cdf(1.16189500386222507f64) - 0.87736094159661358).abs() < 1e-15);
        assert!((cdf(0.48535149254202043f64) - 0.68628648252760666).abs() < 1e-15);
        // deep lower tail keeps relative accuracy
        let t = cdf(-10.0f64);
        assert!((t / 7.619853024160527e-24 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &p in &[1e-12f64, 1e-5, 0.025, 0.3, 0.5, 0.8, 0.975, 1.0 - 1e-9] {
            let x = quantile(p);
            assert!((cdf(x) / p - 1.0).abs() < 1e-12, "p={p}");
        }
        assert!((quantile(0.975f64) - 1.959963984540054).abs() < 1e-13);
    }
}
