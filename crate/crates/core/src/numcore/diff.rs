//! Central finite differences with fixed relative step rules.

use crate::error::{HoaError, Result};
use crate::numcore::matrix::RealMatrix;
use crate::scalar::{to_f64_vec, Real};

/// Step used for first derivatives: `sqrt(eps)·(1+|x|)`.
pub fn gradient_step<T: Real>(x: T) -> T {
    representable(x, T::epsilon().sqrt() * (T::one() + x.abs()))
}

/// Step used for second differences of function values: `eps^{1/4}·(1+|x|)`.
pub fn hessian_step<T: Real>(x: T) -> T {
    representable(x, T::epsilon().sqrt().sqrt() * (T::one() + x.abs()))
}

/// Step used for first differences of computed derivatives: `cbrt(eps)·(1+|x|)`.
pub fn jacobian_step<T: Real>(x: T) -> T {
    representable(x, T::epsilon().cbrt() * (T::one() + x.abs()))
}

/// Step used by the five-point stencil: `eps^{1/5}·(1+|x|)`.
pub fn stencil5_step<T: Real>(x: T) -> T {
    representable(x, T::epsilon().powf(T::lit(0.2)) * (T::one() + x.abs()))
}

// Rounds `h` so that `x + h` is exactly representable and `(x+h) - x == h`.
fn representable<T: Real>(x: T, h: T) -> T {
    (x + h) - x
}

fn probe<T: Real>(f: &impl Fn(&[T]) -> T, x: &[T]) -> Result<T> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(HoaError::Differentiation {
            probe: to_f64_vec(x),
        })
    }
}

/// Central-difference gradient.
pub fn gradient<T: Real>(f: impl Fn(&[T]) -> T, x: &[T]) -> Result<Vec<T>> {
    let mut xs = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        let h = gradient_step(x[k]);
        xs[k] = x[k] + h;
        let fp = probe(&f, &xs)?;
        xs[k] = x[k] - h;
        let fm = probe(&f, &xs)?;
        xs[k] = x[k];
        g.push((fp - fm) / (h + h));
    }
    Ok(g)
}

/// Central-difference Hessian, returned exactly symmetric.
pub fn hessian<T: Real>(f: impl Fn(&[T]) -> T, x: &[T]) -> Result<RealMatrix<T>> {
    let p = x.len();
    let f0 = probe(&f, x)?;
    let h: Vec<T> = x.iter().map(|&xi| hessian_step(xi)).collect();
    let mut xs = x.to_vec();
    let mut hm = RealMatrix::zeros(p, p);
    for i in 0..p {
        xs[i] = x[i] + h[i];
        let fp = probe(&f, &xs)?;
        xs[i] = x[i] - h[i];
        let fm = probe(&f, &xs)?;
        xs[i] = x[i];
        hm[(i, i)] = (fp - f0 - f0 + fm) / (h[i] * h[i]);
        for j in 0..i {
            let mut corner = |si: T, sj: T| -> Result<T> {
                xs[i] = x[i] + si * h[i];
                xs[j] = x[j] + sj * h[j];
                let v = probe(&f, &xs);
                xs[i] = x[i];
                xs[j] = x[j];
                v
            };
            let one = T::one();
            let pp = corner(one, one)?;
            let pm = corner(one, -one)?;
            let mp = corner(-one, one)?;
            let mm = corner(-one, -one)?;
            let v = (pp - pm - mp + mm) / (T::lit(4.0) * h[i] * h[j]);
            hm[(i, j)] = v;
            hm[(j, i)] = v;
        }
    }
    Ok(hm.symmetrized())
}

/// Central-difference Jacobian of a vector function; row `i` is `∂f_i/∂xᵀ`.
pub fn jacobian<T: Real>(
    f: impl Fn(&[T]) -> Result<Vec<T>>,
    x: &[T],
    step: impl Fn(T) -> T,
) -> Result<RealMatrix<T>> {
    let p = x.len();
    let mut xs = x.to_vec();
    let mut cols = Vec::with_capacity(p);
    for k in 0..p {
        let h = step(x[k]);
        xs[k] = x[k] + h;
        let fp = f(&xs)?;
        xs[k] = x[k] - h;
        let fm = f(&xs)?;
        xs[k] = x[k];
        if fp.len() != fm.len() {
            return Err(HoaError::Dimension {
                context: "jacobian output length",
                expected: fp.len(),
                got: fm.len(),
            });
        }
        let col: Vec<T> = fp.iter().zip(&fm).map(|(&a, &b)| (a - b) / (h + h)).collect();
        if !col.iter().all(|v| v.is_finite()) {
            return Err(HoaError::Differentiation {
                probe: to_f64_vec(&xs),
            });
        }
        cols.push(col);
    }
    let m = cols.first().map_or(0, Vec::len);
    Ok(RealMatrix::from_fn(m, p, |i, j| cols[j][i]))
}

/// Five-point central-difference Jacobian with step `eps^{1/5}·(1+|x_k|)`;
/// exact up to rounding for functions affine in `x`.
pub fn jacobian5<T: Real>(
    f: impl Fn(&[T]) -> Result<Vec<T>>,
    x: &[T],
) -> Result<RealMatrix<T>> {
    let p = x.len();
    let mut xs = x.to_vec();
    let mut cols = Vec::with_capacity(p);
    let eight = T::lit(8.0);
    for k in 0..p {
        let h = stencil5_step(x[k]);
        let mut at = |c: T| -> Result<Vec<T>> {
            xs[k] = x[k] + c * h;
            let v = f(&xs);
            xs[k] = x[k];
            v
        };
        let two = T::lit(2.0);
        let (fp2, fp1, fm1, fm2) = (at(two)?, at(T::one())?, at(-T::one())?, at(-two)?);
        let col: Vec<T> = (0..fp1.len())
            .map(|i| (fm2[i] - fp2[i] + eight * (fp1[i] - fm1[i])) / (T::lit(12.0) * h))
            .collect();
        if !col.iter().all(|v| v.is_finite()) {
            let mut probe = x.to_vec();
            probe[k] = x[k] + h;
            return Err(HoaError::Differentiation {
                probe: to_f64_vec(&probe),
            });
        }
        cols.push(col);
    }
    let m = cols.first().map_or(0, Vec::len);
    Ok(RealMatrix::from_fn(m, p, |i, j| cols[j][i]))
}

/// Central difference of `g(t)` at `t = 0` with step `h`.
pub fn directional<T: Real>(mut g: impl FnMut(T) -> T, h: T) -> Result<T> {
    let fp = g(h);
    let fm = g(-h);
    let d = (fp - fm) / (h + h);
    if d.is_finite() {
        Ok(d)
    } else {
        Err(HoaError::Differentiation {
            probe: vec![h.to_f64_lossy()],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex1(th: &[f64]) -> f64 {
        -3.0 * (1.6 / th[0] + th[0] / 1.6)
    }

    fn ex2(th: &[f64]) -> f64 {
        let (psi, lam) = (th[0], th[1]);
        2.0 * lam.ln() + psi.ln() - lam * (psi * 1.0 + 2.0)
    }

    #[test]
    fn gradient_examples() {
        let g = gradient(|x: &[f64]| x[0] * x[0], &[3.0]).unwrap();
        assert!((g[0] - 6.0).abs() < 1e-6);
        assert!(gradient(ex1, &[1.6]).unwrap()[0].abs() < 1e-6);
        let g2 = gradient(ex2, &[2.0, 0.5]).unwrap();
        assert!(g2[0].abs() < 1e-6 && g2[1].abs() < 1e-6);
    }

    #[test]
    fn hessian_examples() {
        let h = hessian(ex1, &[1.6]).unwrap();
        assert!((-h[(0, 0)] - 2.34375).abs() < 1e-5);
        let q = hessian(|x: &[f64]| -x[0] * x[0] / 2.0, &[0.7]).unwrap();
        assert!((q[(0, 0)] + 1.0).abs() < 1e-7);
        let h2 = hessian(ex2, &[2.0, 0.5]).unwrap();
        assert!((h2.neg().det().unwrap() - 1.0).abs() < 1e-5);
        assert!(h2.is_symmetric());
    }

    #[test]
    fn five_point_jacobian_exact_on_affine_maps() {
        let f = |x: &[f64]| Ok(vec![3.0 * x[0] - 2.0 * x[1] + 1.0, 0.5 * x[1]]);
        let j = jacobian5(f, &[1.3, -40.0]).unwrap();
        assert!((j[(0, 0)] - 3.0).abs() < 1e-10);
        assert!((j[(0, 1)] + 2.0).abs() < 1e-10);
        assert!((j[(1, 1)] - 0.5).abs() < 1e-10);
        let g = |x: &[f64]| Ok(vec![x[0].sin()]);
        assert!((jacobian5(g, &[0.4]).unwrap()[(0, 0)] - 0.4f64.cos()).abs() < 1e-11);
    }

    #[test]
    fn non_finite_probe_reports_location() {
        let err = gradient(|x: &[f64]| x[0].ln(), &[0.0]).unwrap_err();
        assert!(matches!(err, HoaError::Differentiation { .. }));
    }

    #[test]
    fn works_in_single_precision() {
        let g = gradient(|x: &[f32]| x[0] * x[0] * x[1], &[2.0f32, 3.0]).unwrap();
        assert!((g[0] - 12.0).abs() < 1e-2);
        assert!((g[1] - 4.0).abs() < 1e-2);
    }
}
