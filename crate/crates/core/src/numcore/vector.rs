use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{HoaError, Result};
use crate::scalar::{to_f64_vec, Real};

/// A vector of finite reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
#[serde(bound = "")]
pub struct RealVector<T: Real>(Vec<T>);

impl<T: Real> RealVector<T> {
    /// Rejects NaN and infinite entries.
    pub fn new(entries: Vec<T>) -> Result<Self> {
        if entries.iter().all(|x| x.is_finite()) {
            Ok(Self(entries))
        } else {
            Err(HoaError::NonFinite {
                what: "vector entries",
                at: to_f64_vec(&entries),
            })
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![T::zero(); n])
    }

    /// Evenly spaced points from `lo` to `hi` inclusive.
    pub fn linspace(lo: T, hi: T, count: usize) -> Result<Self> {
        if count < 2 || !(hi > lo) {
            return Err(HoaError::InvalidInput(format!(
                "linspace needs lo < hi and count >= 2 (got {lo}..{hi}, {count})"
            )));
        }
        let step = (hi - lo) / T::lit((count - 1) as f64);
        let mut v: Vec<T> = (0..count).map(|i| lo + step * T::lit(i as f64)).collect();
        v[count - 1] = hi;
        Self::new(v)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn norm(&self) -> T {
        norm(&self.0)
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.0.windows(2).all(|w| w[1] > w[0])
    }
}

impl<T: Real> Deref for RealVector<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T: Real> TryFrom<Vec<T>> for RealVector<T> {
    type Error = HoaError;

    fn try_from(v: Vec<T>) -> Result<Self> {
        Self::new(v)
    }
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm<T: Real>(a: &[T]) -> T {
    // scaled to avoid overflow for large entries
    let scale = a.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    if scale == T::zero() {
        return T::zero();
    }
    scale * a.iter().map(|&x| (x / scale) * (x / scale)).sum::<T>().sqrt()
}

pub fn max_abs<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn all_finite<T: Real>(a: &[T]) -> bool {
    a.iter().all(|x| x.is_finite())
}
