use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HoaError, Result};
use crate::models::Model;
use crate::numcore::{interp, normal, RealVector};
use crate::optim;
use crate::scalar::Real;

use super::pipeline::{interpolate_at, Method, Pipeline, PivotSet};

/// Points fed to the monotone cubic that fills the singular window.
const FILL_NODES: usize = 4;
/// Endpoint bisection stops once the bracket is this many standard errors wide.
const ENDPOINT_TOL: f64 = 1e-6;
const MAX_BISECTIONS: usize = 200;

/// Significance function along a grid of interest-parameter values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SignificanceCurve<T: Real> {
    pub grid: RealVector<T>,
    pub points: Vec<PivotSet<T>>,
    pub model_id: String,
    /// SHA-256 of the observations as little-endian `f64`, hex encoded.
    pub data_digest: String,
    /// 3 for continuous models, 2 for the discrete construction.
    pub accuracy_order: u8,
    pub psi_hat: T,
    /// First-order standard error of `ψ̂`.
    pub scale: T,
    #[serde(skip)]
    pipeline: Option<Arc<Pipeline<T>>>,
}

impl<T: Real> SignificanceCurve<T> {
    /// Pipeline used to re-solve interval endpoints; absent after deserialising.
    pub fn pipeline(&self) -> Option<&Arc<Pipeline<T>>> {
        self.pipeline.as_ref()
    }

    pub fn significance(&self, method: Method) -> Vec<T> {
        self.points.iter().map(|p| p.significance(method)).collect()
    }

    /// Curve from stored points, without a pipeline.
    pub fn from_points(
        points: Vec<PivotSet<T>>,
        model_id: impl Into<String>,
        data_digest: impl Into<String>,
        accuracy_order: u8,
        psi_hat: T,
        scale: T,
    ) -> Result<Self> {
        let grid = RealVector::new(points.iter().map(|p| p.psi).collect())?;
        if grid.len() < 2 || !grid.is_strictly_increasing() {
            return Err(HoaError::InvalidInput(
                "curve needs at least two points with strictly increasing psi".into(),
            ));
        }
        if !(scale > T::zero()) {
            return Err(HoaError::InvalidInput(format!("curve scale must be positive, got {scale}")));
        }
        Ok(Self {
            grid,
            points,
            model_id: model_id.into(),
            data_digest: data_digest.into(),
            accuracy_order,
            psi_hat,
            scale,
            pipeline: None,
        })
    }

    /// Attaches `pipeline` so interval endpoints are re-solved exactly. The
    /// pipeline must belong to the same model and data where those are recorded.
    pub fn attach_pipeline(&mut self, pipeline: Arc<Pipeline<T>>) -> Result<()> {
        let m = pipeline.model();
        if !self.model_id.is_empty() && m.id() != self.model_id {
            return Err(HoaError::InvalidInput(format!(
                "curve was computed for model '{}', not '{}'",
                self.model_id,
                m.id()
            )));
        }
        if !self.data_digest.is_empty() && data_digest(m.observations()) != self.data_digest {
            return Err(HoaError::InvalidInput("curve was computed from different data".into()));
        }
        self.model_id = m.id().to_string();
        self.psi_hat = pipeline.psi_hat();
        self.scale = pipeline.standard_error();
        self.pipeline = Some(pipeline);
        Ok(())
    }
}

/// Hex SHA-256 of `y` as little-endian `f64` values.
pub fn data_digest<T: Real>(y: &[T]) -> String {
    let mut h = Sha256::new();
    for v in y {
        h.update(v.to_f64_lossy().to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Full pipeline at every grid value, with the singular window filled.
pub fn significance_curve<T: Real>(model: Arc<dyn Model<T>>, psi_grid: &[T]) -> Result<SignificanceCurve<T>> {
    let pipeline = Arc::new(Pipeline::new(model)?);
    curve_from_pipeline(pipeline, psi_grid)
}

/// As [`significance_curve`] with an existing pipeline.
pub fn curve_from_pipeline<T: Real>(
    pipeline: Arc<Pipeline<T>>,
    psi_grid: &[T],
) -> Result<SignificanceCurve<T>> {
    let grid = RealVector::new(psi_grid.to_vec())?;
    if grid.is_empty() || !grid.is_strictly_increasing() {
        return Err(HoaError::InvalidInput("psi grid must be strictly increasing".into()));
    }
    let model = pipeline.model().clone();
    let k = model.interest_index();
    let dom = model.domain();
    if let Some(bad) = psi_grid.iter().find(|&&v| !dom.contains_coord(k, v)) {
        return Err(HoaError::Inadmissible {
            at: vec![bad.to_f64_lossy()],
        });
    }
    let tag = |psi: T| move |e: HoaError| e.at_grid_point(psi.to_f64_lossy());
    let mut points: Vec<PivotSet<T>> = if model.dim() == 1 {
        psi_grid
            .par_iter()
            .map(|&psi| pipeline.evaluate(psi, None).map_err(tag(psi)))
            .collect::<Result<_>>()?
    } else {
        let cfits = optim::profile_curve(model.as_ref(), pipeline.fit(), psi_grid)?;
        cfits
            .par_iter()
            .map(|c| pipeline.evaluate_constrained(c).map_err(tag(c.psi)))
            .collect::<Result<_>>()?
    };
    fill_window(&mut points)?;
    Ok(SignificanceCurve {
        grid,
        points,
        model_id: model.id().to_string(),
        data_digest: data_digest(model.observations()),
        accuracy_order: pipeline.accuracy_order(),
        psi_hat: pipeline.psi_hat(),
        scale: pipeline.standard_error(),
        pipeline: Some(pipeline),
    })
}

fn fill_window<T: Real>(points: &mut [PivotSet<T>]) -> Result<()> {
    let outside: Vec<usize> = (0..points.len()).filter(|&i| !points[i].interpolated).collect();
    if outside.len() < FILL_NODES {
        if points.iter().all(|p| !p.interpolated) {
            return Ok(());
        }
        return Err(HoaError::CurveTooShort {
            usable: outside.len(),
        });
    }
    let inside: Vec<usize> = (0..points.len()).filter(|&i| points[i].interpolated).collect();
    for i in inside {
        let psi = points[i].psi;
        let mut near = outside.clone();
        near.sort_by(|&a, &b| {
            let da = (points[a].psi - psi).abs();
            let db = (points[b].psi - psi).abs();
            da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
        });
        let nodes: Vec<PivotSet<T>> = near[..FILL_NODES].iter().map(|&j| points[j].clone()).collect();
        let (rs, lr) = interpolate_at(&nodes, psi)?;
        points[i].fill(rs, lr);
    }
    Ok(())
}

/// Two-sided `level` interval from `Φ(r*)`.
pub fn confidence_interval<T: Real>(curve: &SignificanceCurve<T>, level: T) -> Result<(T, T)> {
    confidence_interval_with(curve, level, Method::RStar)
}

/// Two-sided `level` interval `{ψ : α ≤ p(ψ) ≤ 1 − α}`, `α = (1 − level)/2`.
///
/// Endpoints are bracketed on the grid and then bisected with the pipeline
/// when the curve still carries one, else interpolated linearly on the normal
/// scale.
pub fn confidence_interval_with<T: Real>(
    curve: &SignificanceCurve<T>,
    level: T,
    method: Method,
) -> Result<(T, T)> {
    if !(level > T::zero() && level < T::one()) {
        return Err(HoaError::InvalidInput(format!(
            "confidence level must lie in (0, 1), got {level}"
        )));
    }
    let alpha = (T::one() - level) / T::lit(2.0);
    let c = normal::quantile(T::one() - alpha);
    let lower = endpoint(curve, c, method)?;
    let upper = endpoint(curve, -c, method)?;
    Ok((lower, upper))
}

// ψ at which the (decreasing) normal-scale pivot equals `target`.
fn endpoint<T: Real>(curve: &SignificanceCurve<T>, target: T, method: Method) -> Result<T> {
    let z: Vec<T> = curve.points.iter().map(|p| p.z(method)).collect();
    let n = z.len();
    let bracket = (0..n.saturating_sub(1)).find(|&i| {
        let a = z[i] - target;
        let b = z[i + 1] - target;
        a >= T::zero() && b <= T::zero() && (a > T::zero() || b < T::zero() || a == b)
    });
    let Some(i) = bracket else {
        return Err(not_bracketed(curve, target));
    };
    let (x0, x1) = (curve.points[i].psi, curve.points[i + 1].psi);
    let (z0, z1) = (z[i], z[i + 1]);
    if z0 == target {
        return Ok(x0);
    }
    if z1 == target {
        return Ok(x1);
    }
    let Some(pipeline) = curve.pipeline.as_ref() else {
        return Ok(invert_locally(curve, &z, i, target).unwrap_or(x0 + (x1 - x0) * (z0 - target) / (z0 - z1)));
    };
    let start = curve.points[i].nuisance.clone();
    let start = if start.is_empty() { None } else { Some(start.as_slice()) };
    let (mut lo, mut hi) = (x0, x1);
    let width = T::lit(ENDPOINT_TOL) * curve.scale;
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= width {
            break;
        }
        let mid = lo + (hi - lo) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let zm = pipeline.significance_at(mid, start)?.z(method);
        if zm >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + (hi - lo) / T::lit(2.0))
}

// Monotone cubic through the bracket and its neighbours, read as ψ(−z).
fn invert_locally<T: Real>(curve: &SignificanceCurve<T>, z: &[T], i: usize, target: T) -> Option<T> {
    let lo = i.saturating_sub(1);
    let hi = (i + 3).min(z.len());
    let xs: Vec<T> = z[lo..hi].iter().map(|&v| -v).collect();
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return None;
    }
    let ys: Vec<T> = curve.points[lo..hi].iter().map(|p| p.psi).collect();
    interp::pchip(&xs, &ys, -target).ok().filter(|v| v.is_finite())
}

fn not_bracketed<T: Real>(curve: &SignificanceCurve<T>, target: T) -> HoaError {
    let grid = &curve.grid;
    let (g0, g1) = (grid[0], grid[grid.len() - 1]);
    let reach = T::lit(2.0) * (target.abs() + T::one()) * curve.scale;
    let mut lo = g0.min(curve.psi_hat - reach);
    let mut hi = g1.max(curve.psi_hat + reach);
    if let Some(pl) = curve.pipeline.as_ref() {
        let k = pl.model().interest_index();
        let dom = pl.model().domain();
        let quarter = T::lit(0.25);
        if lo <= dom.lower[k] {
            lo = dom.lower[k] + quarter * (g0 - dom.lower[k]);
        }
        if hi >= dom.upper[k] {
            hi = dom.upper[k] - quarter * (dom.upper[k] - g1);
        }
    }
    HoaError::NotBracketed {
        target: normal::cdf(target).to_f64_lossy(),
        suggested_lo: lo.to_f64_lossy(),
        suggested_hi: hi.to_f64_lossy(),
    }
}
