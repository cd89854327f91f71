//! One-dimensional interpolation on a handful of nodes.

use crate::error::{HoaError, Result};
use crate::scalar::Real;

fn check_nodes<T: Real>(xs: &[T], ys: &[T]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(HoaError::Dimension {
            context: "interpolation nodes",
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < 2 || !xs.windows(2).all(|w| w[1] > w[0]) {
        return Err(HoaError::InvalidInput(
            "interpolation needs at least two strictly increasing nodes".into(),
        ));
    }
    Ok(())
}

/// Monotone piecewise cubic Hermite interpolation (Fritsch–Carlson slopes).
pub fn pchip<T: Real>(xs: &[T], ys: &[T], x: T) -> Result<T> {
    check_nodes(xs, ys)?;
    let n = xs.len();
    let h: Vec<T> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<T> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    let mut d = vec![T::zero(); n];
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
    } else {
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] > T::zero() {
                let w1 = T::lit(2.0) * h[i] + h[i - 1];
                let w2 = h[i] + T::lit(2.0) * h[i - 1];
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }
    let i = match xs.iter().rposition(|&xi| xi <= x) {
        None => 0,
        Some(i) => i.min(n - 2),
    };
    let t = x - xs[i];
    let hi = h[i];
    let s = t / hi;
    let h00 = (T::one() + T::lit(2.0) * s) * (T::one() - s) * (T::one() - s);
    let h10 = s * (T::one() - s) * (T::one() - s);
    let h01 = s * s * (T::lit(3.0) - T::lit(2.0) * s);
    let h11 = s * s * (s - T::one());
    Ok(h00 * ys[i] + h10 * hi * d[i] + h01 * ys[i + 1] + h11 * hi * d[i + 1])
}

// Non-centred three-point end slope, limited to preserve shape.
fn end_slope<T: Real>(h0: T, h1: T, del0: T, del1: T) -> T {
    let d = ((T::lit(2.0) * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d * del0 <= T::zero() {
        T::zero()
    } else if del0 * del1 < T::zero() && d.abs() > (T::lit(3.0) * del0).abs() {
        T::lit(3.0) * del0
    } else {
        d
    }
}

/// Lagrange polynomial through all nodes.
pub fn lagrange<T: Real>(xs: &[T], ys: &[T], x: T) -> Result<T> {
    check_nodes(xs, ys)?;
    let mut acc = T::zero();
    for (i, (&xi, &yi)) in xs.iter().zip(ys).enumerate() {
        let mut w = T::one();
        for (j, &xj) in xs.iter().enumerate() {
            if j != i {
                w *= (x - xj) / (xi - xj);
            }
        }
        acc += w * yi;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pchip_reproduces_nodes_and_stays_monotone() {
        let xs = [0.0f64, 1.0, 2.5, 3.0, 4.0];
        let ys = [0.9f64, 0.8, 0.3, 0.25, 0.1];
        for (x, y) in xs.iter().zip(&ys) {
            assert!((pchip(&xs, &ys, *x).unwrap() - y).abs() < 1e-15);
        }
        let mut prev = f64::INFINITY;
        for k in 0..=400 {
            let v = pchip(&xs, &ys, k as f64 * 0.01).unwrap();
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn lagrange_exact_on_cubics() {
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
        let xs = [-2.0, -0.5, 1.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        assert!((lagrange(&xs, &ys, 0.3).unwrap() - f(0.3)).abs() < 1e-13);
    }
}
