use serde::{Deserialize, Serialize};

use crate::error::{HoaError, Result};

// Gauss–Kronrod 7/15 abscissae on [0, 1] (symmetric about 0).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Nodes and weights of a rule mapped affinely onto `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
}

impl QuadratureRule {
    /// 15-point Kronrod rule on `[lo, hi]`.
    pub fn kronrod15(lo: f64, hi: f64) -> Self {
        let c = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        let mut nodes = Vec::with_capacity(15);
        let mut weights = Vec::with_capacity(15);
        for i in 0..7 {
            nodes.push(c - h * XGK[i]);
            weights.push(h * WGK[i]);
        }
        nodes.push(c);
        weights.push(h * WGK[7]);
        for i in (0..7).rev() {
            nodes.push(c + h * XGK[i]);
            weights.push(h * WGK[i]);
        }
        Self { nodes, weights, lo, hi }
    }

    pub fn apply(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

fn gk15(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let pair = f(c - h * XGK[i]) + f(c + h * XGK[i]);
        kron += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

const MAX_INTERVALS: usize = 2000;

/// Globally adaptive Gauss–Kronrod 7/15 quadrature until the summed error
/// bound is at most `max(abs_tol, rel_tol·|value|)`.
pub fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, abs_tol: f64, rel_tol: f64) -> Result<Integral> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(HoaError::InvalidInput("integration limits must be finite".into()));
    }
    if lo == hi {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let (v, e) = gk15(&f, lo, hi);
    let mut parts = vec![(lo, hi, v, e)];
    loop {
        let value: f64 = parts.iter().map(|p| p.2).sum();
        let error: f64 = parts.iter().map(|p| p.3).sum();
        if !value.is_finite() {
            return Err(HoaError::NonFinite {
                what: "quadrature integrand",
                at: vec![lo, hi],
            });
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Integral {
                value,
                error,
                intervals: parts.len(),
            });
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(HoaError::AccuracyNotMet { achieved: error });
        }
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .3.total_cmp(&b.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (a, b, _, _) = parts.swap_remove(worst);
        let m = 0.5 * (a + b);
        let (v1, e1) = gk15(&f, a, m);
        let (v2, e2) = gk15(&f, m, b);
        parts.push((a, m, v1, e1));
        parts.push((m, b, v2, e2));
    }
}
