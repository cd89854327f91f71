//! Model specifications and the built-in catalog.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{
    BinomialGlm, BvnCorr, ErrorLaw, ExpMean, ExpMeanScale, ExpPair, GammaRatio, LinExp2, Model,
    PoissonGlm, RegressionScale,
};
use crate::error::{HoaError, Result};
use crate::numcore::RealMatrix;
use crate::scalar::Real;

const IDS: [&str; 8] = [
    "gamma_ratio",
    "exp_pair",
    "bvn_corr",
    "regression_scale",
    "exp_mean",
    "linexp_2par",
    "poisson_glm",
    "binomial_glm",
];

pub fn catalog_ids() -> &'static [&'static str] {
    &IDS
}

/// A catalog id with hyperparameters and data, the JSON document format
/// `{"id": …, "hyper": {…}, "data": […]}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub id: String,
    #[serde(default)]
    pub hyper: BTreeMap<String, Value>,
    #[serde(default)]
    pub data: Vec<Value>,
}

impl ModelSpec {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            ..Self::default()
        }
    }

    pub fn with_hyper(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.hyper.insert(key.to_string(), value.into());
        self
    }

    pub fn with_data(mut self, data: &[f64]) -> Self {
        self.data = data.iter().map(|&v| Value::from(v)).collect();
        self
    }

    pub fn with_rows(mut self, rows: &[Vec<f64>]) -> Self {
        self.data = rows.iter().map(|r| Value::from(r.clone())).collect();
        self
    }

    pub fn build<T: Real>(&self) -> Result<Box<dyn Model<T>>> {
        catalog(self)
    }

    fn hyper_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.hyper.get(key) {
            None => Ok(None),
            Some(v) => value_f64(v)
                .map(Some)
                .ok_or_else(|| HoaError::InvalidInput(format!("hyperparameter '{key}' must be a number"))),
        }
    }

    fn hyper_str(&self, key: &str) -> Option<String> {
        self.hyper.get(key).map(|v| match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        })
    }

    fn interest(&self, names: &[&str], default: usize) -> Result<usize> {
        match self.hyper.get("interest") {
            None => Ok(default),
            Some(v) => {
                if let Some(k) = value_f64(v) {
                    if k >= 0.0 && k.fract() == 0.0 {
                        return Ok(k as usize);
                    }
                }
                let s = self.hyper_str("interest").unwrap_or_default();
                names.iter().position(|n| *n == s).ok_or_else(|| {
                    HoaError::InvalidInput(format!(
                        "interest '{s}' is not a parameter index or one of {names:?}"
                    ))
                })
            }
        }
    }

    fn scalars<T: Real>(&self) -> Result<Vec<T>> {
        let mut out = Vec::with_capacity(self.data.len());
        for v in &self.data {
            match v {
                Value::Array(items) => {
                    for item in items {
                        out.push(T::lit(value_f64(item).ok_or_else(bad_data)?));
                    }
                }
                other => out.push(T::lit(value_f64(other).ok_or_else(bad_data)?)),
            }
        }
        Ok(out)
    }

    fn rows(&self) -> Result<Option<Vec<Vec<f64>>>> {
        if self.data.is_empty() || !self.data.iter().all(Value::is_array) {
            return Ok(None);
        }
        let mut rows = Vec::with_capacity(self.data.len());
        for v in &self.data {
            let items = v.as_array().ok_or_else(bad_data)?;
            let row: Option<Vec<f64>> = items.iter().map(value_f64).collect();
            rows.push(row.ok_or_else(bad_data)?);
        }
        Ok(Some(rows))
    }

    fn require_data(&self) -> Result<()> {
        if self.data.is_empty() {
            Err(HoaError::InvalidInput(format!("model '{}' needs a data array", self.id)))
        } else {
            Ok(())
        }
    }
}

fn bad_data() -> HoaError {
    HoaError::InvalidInput("data entries must be numbers or arrays of numbers".into())
}

fn value_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn design<T: Real>(rows: &[Vec<f64>], skip: usize) -> Result<RealMatrix<T>> {
    let converted: Vec<Vec<T>> = rows
        .iter()
        .map(|r| r.iter().skip(skip).map(|&v| T::lit(v)).collect())
        .collect();
    RealMatrix::from_rows(&converted)
}

/// Builds a catalog model from its specification.
pub fn catalog<T: Real>(spec: &ModelSpec) -> Result<Box<dyn Model<T>>> {
    match spec.id.as_str() {
        "gamma_ratio" => {
            let model = match (spec.hyper_f64("s")?, spec.hyper_f64("a")?) {
                (Some(s), Some(a)) => {
                    if !(s > 0.0 && a > 0.0) {
                        return Err(HoaError::InvalidInput(
                            "gamma_ratio requires s > 0 and a > 0".into(),
                        ));
                    }
                    GammaRatio::from_sa(T::lit(s), T::lit(a))?
                }
                (None, None) => {
                    spec.require_data()?;
                    GammaRatio::from_y(spec.scalars()?)?
                }
                _ => {
                    return Err(HoaError::InvalidInput(
                        "gamma_ratio needs both hyperparameters s and a".into(),
                    ))
                }
            };
            let shape = spec.hyper_f64("shape")?.unwrap_or(1.0);
            Ok(Box::new(model.with_shape(shape)?))
        }
        "exp_pair" => {
            spec.require_data()?;
            Ok(Box::new(ExpPair::new(spec.scalars()?)?))
        }
        "bvn_corr" => {
            spec.require_data()?;
            Ok(Box::new(BvnCorr::new(spec.scalars()?)?))
        }
        "regression_scale" => {
            spec.require_data()?;
            let law = match spec.hyper_str("errors").as_deref() {
                None | Some("normal") => ErrorLaw::Normal,
                Some("student") | Some("t") => ErrorLaw::Student {
                    df: spec.hyper_f64("df")?.unwrap_or(5.0),
                },
                Some(other) => {
                    return Err(HoaError::InvalidInput(format!(
                        "unknown error law '{other}' (expected normal or student)"
                    )))
                }
            };
            let (y, x): (Vec<T>, RealMatrix<T>) = match spec.rows()? {
                Some(rows) if rows.iter().all(|r| r.len() >= 2) => (
                    rows.iter().map(|r| T::lit(r[0])).collect(),
                    design(&rows, 1)?,
                ),
                _ => {
                    let y: Vec<T> = spec.scalars()?;
                    let x = RealMatrix::from_fn(y.len(), 1, |_, _| T::one());
                    (y, x)
                }
            };
            let q = x.cols();
            let default = 0;
            let interest = match spec.hyper_str("interest").as_deref() {
                Some("sigma") => q,
                _ => spec.interest(&[], default)?,
            };
            Ok(Box::new(RegressionScale::new(y, x, law, interest)?))
        }
        "exp_mean" => {
            spec.require_data()?;
            let scale = match spec.hyper_str("scale").as_deref() {
                None | Some("mean") => ExpMeanScale::Mean,
                Some("rate") => ExpMeanScale::Rate,
                Some(other) => {
                    return Err(HoaError::InvalidInput(format!(
                        "unknown exp_mean scale '{other}' (expected mean or rate)"
                    )))
                }
            };
            Ok(Box::new(ExpMean::with_scale(spec.scalars()?, scale)?))
        }
        "linexp_2par" => {
            spec.require_data()?;
            let k = spec.interest(&["mu_over_var", "precision"], 0)?;
            Ok(Box::new(LinExp2::new(spec.scalars()?, k)?))
        }
        "poisson_glm" => {
            spec.require_data()?;
            let k = spec.interest(&[], 0)?;
            match spec.rows()? {
                Some(rows) if rows.iter().all(|r| r.len() >= 2) => {
                    let y = rows.iter().map(|r| T::lit(r[0])).collect();
                    Ok(Box::new(PoissonGlm::new(y, design(&rows, 1)?, k)?))
                }
                _ => Ok(Box::new(PoissonGlm::intercept_only(spec.scalars()?)?)),
            }
        }
        "binomial_glm" => {
            spec.require_data()?;
            let k = spec.interest(&[], 0)?;
            match spec.rows()? {
                Some(rows) if rows.iter().all(|r| r.len() >= 3) => {
                    let y = rows.iter().map(|r| T::lit(r[0])).collect();
                    let m = rows.iter().map(|r| T::lit(r[1])).collect();
                    Ok(Box::new(BinomialGlm::new(y, m, design(&rows, 2)?, k)?))
                }
                _ => {
                    let y: Vec<T> = spec.scalars()?;
                    let m = T::lit(spec.hyper_f64("trials")?.unwrap_or(1.0));
                    let x = RealMatrix::from_fn(y.len(), 1, |_, _| T::one());
                    Ok(Box::new(BinomialGlm::new(y.clone(), vec![m; y.len()], x, k)?))
                }
            }
        }
        other => Err(HoaError::UnknownModel(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_id_is_reported() {
        let err = catalog::<f64>(&ModelSpec::new("weibull")).err().unwrap();
        assert_eq!(err, HoaError::UnknownModel("weibull".into()));
    }

    #[test]
    fn inadmissible_hyper_rejected() {
        let spec = ModelSpec::new("gamma_ratio")
            .with_hyper("s", 1.6)
            .with_hyper("a", 0.0);
        assert!(matches!(catalog::<f64>(&spec), Err(HoaError::InvalidInput(_))));
    }

    #[test]
    fn string_hyperparameters_parse() {
        let spec = ModelSpec::new("gamma_ratio")
            .with_hyper("s", "1.6")
            .with_hyper("a", "3");
        let m = catalog::<f64>(&spec).unwrap();
        assert_eq!(m.dim(), 1);
        assert!((m.observations()[0] - 4.8).abs() < 1e-12);
    }

    #[test]
    fn json_document_round_trip() {
        let doc = r#"{"id": "bvn_corr", "data": [[0.1, 0.3], [1.2, 0.8], [-0.5, -0.2]]}"#;
        let spec: ModelSpec = serde_json::from_str(doc).unwrap();
        let m = spec.build::<f64>().unwrap();
        assert_eq!(m.n_obs(), 3);
        assert_eq!(m.obs_dim(), 2);
    }

    #[test]
    fn every_catalog_id_builds() {
        let specs = [
            ModelSpec::new("gamma_ratio").with_hyper("s", 1.6).with_hyper("a", 3.0),
            ModelSpec::new("exp_pair").with_data(&[1.0, 2.0]),
            ModelSpec::new("bvn_corr").with_data(&[0.1, 0.3, 1.2, 0.8]),
            ModelSpec::new("regression_scale").with_data(&[1.0, 3.0, 2.5]),
            ModelSpec::new("exp_mean").with_data(&[1.0, 2.0]),
            ModelSpec::new("linexp_2par").with_data(&[1.0, 2.0, 0.5]),
            ModelSpec::new("poisson_glm").with_data(&[3.0]),
            ModelSpec::new("binomial_glm").with_rows(&[vec![2.0, 5.0, 1.0]]),
        ];
        for (spec, id) in specs.iter().zip(catalog_ids()) {
            assert_eq!(spec.build::<f64>().unwrap().id(), *id);
        }
    }
}
