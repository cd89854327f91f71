//! Monte-Carlo calibration: coverage and p-value uniformity of the
//! significance functions under repeated sampling.

use std::sync::Arc;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{HoaError, Result};
use crate::firstorder;
use crate::models::{catalog, Model, ModelSpec};
use crate::numcore::normal;
use crate::optim;
use crate::tem::{Method, Pipeline};

/// Smallest replicate count accepted.
pub const MIN_REPLICATES: usize = 100;
/// Failure fraction above which a report is flagged unreliable.
pub const UNRELIABLE_FRACTION: f64 = 0.05;
/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "HOA_WORKERS";

/// What to simulate and how often.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageConfig {
    /// Catalog template; its data fix the sample shape. A template without data
    /// but with an integer hyperparameter `n` gets a placeholder sample of
    /// that size.
    pub spec: ModelSpec,
    pub true_theta: Vec<f64>,
    pub replicates: usize,
    pub levels: Vec<f64>,
    pub seed: u64,
    /// Worker threads; `None` reads `HOA_WORKERS`, else uses every core.
    #[serde(default)]
    pub workers: Option<usize>,
}

impl CoverageConfig {
    pub fn new(spec: ModelSpec, true_theta: Vec<f64>, replicates: usize, levels: Vec<f64>, seed: u64) -> Self {
        Self {
            spec,
            true_theta,
            replicates,
            levels,
            seed,
            workers: None,
        }
    }
}

/// Per-method calibration summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRecord {
    pub method: Method,
    /// Empirical coverage at each requested level, in order.
    pub coverage: Vec<f64>,
    /// Kolmogorov–Smirnov distance of the p-values from uniform.
    pub ks: f64,
    pub successes: usize,
    pub failures: usize,
}

/// p-values of one replicate, `None` where the method failed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicatePValues {
    pub replicate: usize,
    pub wald: Option<f64>,
    pub root: Option<f64>,
    pub rstar: Option<f64>,
    pub lugannani_rice: Option<f64>,
}

impl ReplicatePValues {
    pub fn get(&self, method: Method) -> Option<f64> {
        match method {
            Method::Wald => self.wald,
            Method::Root => self.root,
            Method::RStar => self.rstar,
            Method::LugannaniRice => self.lugannani_rice,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub model_id: String,
    pub true_theta: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub levels: Vec<f64>,
    pub methods: Vec<MethodRecord>,
    /// Set when any method failed on more than 5% of replicates.
    pub unreliable: bool,
    #[serde(skip)]
    pub pvalues: Vec<ReplicatePValues>,
}

impl CoverageReport {
    pub fn method(&self, method: Method) -> Option<&MethodRecord> {
        self.methods.iter().find(|r| r.method == method)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| HoaError::InvalidInput(format!("report serialisation: {e}")))
    }
}

/// Two-sided Kolmogorov–Smirnov distance of a sample from the uniform law.
pub fn ks_uniform(sample: &[f64]) -> f64 {
    if sample.is_empty() {
        return 0.0;
    }
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &p)| {
            let lo = i as f64 / n;
            let hi = (i + 1) as f64 / n;
            (hi - p).max(p - lo)
        })
        .fold(0.0, f64::max)
}

/// Deterministic generator for replicate `k`: the seed fixes the key and `k`
/// selects the stream.
pub fn replicate_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

fn template(spec: &ModelSpec) -> Result<Arc<dyn Model<f64>>> {
    let mut spec = spec.clone();
    if spec.data.is_empty() {
        if let Some(n) = spec.hyper.get("n").and_then(Value::as_u64) {
            let len = if spec.id == "bvn_corr" { 2 * n } else { n };
            let base = if spec.id == "binomial_glm" { 0.0 } else { 1.0 };
            let data: Vec<f64> = (0..len).map(|i| base + (i % 2) as f64).collect();
            spec = spec.with_data(&data);
        }
    }
    Ok(Arc::from(catalog::<f64>(&spec)?))
}

fn worker_count(cfg: &CoverageConfig) -> Result<Option<usize>> {
    if let Some(w) = cfg.workers {
        return Ok(Some(w));
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| HoaError::InvalidInput(format!("{WORKERS_ENV} must be a positive integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}

fn one_replicate(tmpl: &Arc<dyn Model<f64>>, theta: &[f64], seed: u64, k: usize) -> ReplicatePValues {
    let mut out = ReplicatePValues {
        replicate: k,
        wald: None,
        root: None,
        rstar: None,
        lugannani_rice: None,
    };
    let mut rng = replicate_rng(seed, k);
    let Some(y) = tmpl.simulate(theta, &mut rng) else {
        return out;
    };
    let Ok(model) = tmpl.with_observations(y) else {
        return out;
    };
    let model: Arc<dyn Model<f64>> = Arc::from(model);
    let Ok(fit) = optim::fit_default(model.as_ref()) else {
        return out;
    };
    let psi = theta[model.interest_index()];
    let first = if model.dim() == 1 {
        firstorder::pivots_scalar(model.as_ref(), &fit, psi)
    } else {
        optim::fit_constrained(model.as_ref(), psi, &optim::nuisance_of(model.as_ref(), &fit.theta_hat))
            .and_then(|c| firstorder::pivots_profile(model.as_ref(), &fit, &c))
    };
    if let Ok(fo) = first {
        out.wald = Some(normal::cdf(fo.wald));
        out.root = Some(normal::cdf(fo.root));
    }
    if let Ok(p) = Pipeline::with_fit(model, fit).and_then(|pl| pl.significance_at(psi, None)) {
        out.rstar = Some(p.phi_rstar);
        out.lugannani_rice = Some(p.lugannani_rice);
    }
    out
}

/// Simulates `replicates` data sets at `true_theta` and records, per method,
/// how often `α ≤ p(ψ_true) ≤ 1 − α` for each level and how far the p-values
/// are from uniform.
pub fn run_coverage(cfg: &CoverageConfig) -> Result<CoverageReport> {
    if cfg.replicates < MIN_REPLICATES {
        return Err(HoaError::InvalidInput(format!(
            "coverage needs at least {MIN_REPLICATES} replicates, got {}",
            cfg.replicates
        )));
    }
    if cfg.levels.is_empty() || !cfg.levels.iter().all(|&l| l > 0.0 && l < 1.0) {
        return Err(HoaError::InvalidInput("coverage levels must lie in (0, 1)".into()));
    }
    let tmpl = template(&cfg.spec)?;
    if cfg.true_theta.len() != tmpl.dim() {
        return Err(HoaError::Dimension {
            context: "true theta",
            expected: tmpl.dim(),
            got: cfg.true_theta.len(),
        });
    }
    tmpl.domain().check(&cfg.true_theta)?;
    let mut probe = replicate_rng(cfg.seed, 0);
    if tmpl.simulate(&cfg.true_theta, &mut probe).is_none() {
        return Err(HoaError::Unsupported(format!("model '{}' cannot simulate data", tmpl.id())));
    }

    let run = || -> Vec<ReplicatePValues> {
        (0..cfg.replicates)
            .into_par_iter()
            .map(|k| one_replicate(&tmpl, &cfg.true_theta, cfg.seed, k))
            .collect()
    };
    let pvalues = match worker_count(cfg)? {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| HoaError::InvalidInput(format!("worker pool: {e}")))?
            .install(run),
        None => run(),
    };

    let methods: Vec<MethodRecord> = Method::ALL
        .iter()
        .map(|&method| {
            let ps: Vec<f64> = pvalues.iter().filter_map(|r| r.get(method)).collect();
            let coverage = cfg
                .levels
                .iter()
                .map(|&level| {
                    let alpha = (1.0 - level) / 2.0;
                    let hits = ps.iter().filter(|&&p| p >= alpha && p <= 1.0 - alpha).count();
                    if ps.is_empty() {
                        0.0
                    } else {
                        hits as f64 / ps.len() as f64
                    }
                })
                .collect();
            MethodRecord {
                method,
                coverage,
                ks: ks_uniform(&ps),
                successes: ps.len(),
                failures: cfg.replicates - ps.len(),
            }
        })
        .collect();
    let unreliable = methods
        .iter()
        .any(|m| m.failures as f64 > UNRELIABLE_FRACTION * cfg.replicates as f64);
    Ok(CoverageReport {
        model_id: tmpl.id().to_string(),
        true_theta: cfg.true_theta.clone(),
        replicates: cfg.replicates,
        seed: cfg.seed,
        levels: cfg.levels.clone(),
        methods,
        unreliable,
        pvalues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_a_perfect_grid() {
        let s: Vec<f64> = (0..10).map(|i| (i as f64 + 0.5) / 10.0).collect();
        assert!((ks_uniform(&s) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn streams_differ_by_replicate() {
        use rand::RngCore;
        let a = replicate_rng(1, 0).next_u64();
        let b = replicate_rng(1, 1).next_u64();
        assert_ne!(a, b);
        assert_eq!(a, replicate_rng(1, 0).next_u64());
    }

    #[test]
    fn too_few_replicates_rejected() {
        let cfg = CoverageConfig::new(
            ModelSpec::new("exp_mean").with_hyper("n", 5),
            vec![1.0],
            0,
            vec![0.95],
            42,
        );
        assert!(matches!(run_coverage(&cfg), Err(HoaError::InvalidInput(_))));
    }
}
