use std::fs;
use std::path::Path;

use hoa_core::models::{catalog_ids, ModelSpec};
use serde_json::Value;

use crate::args::ModelArgs;
use crate::error::CliError;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read '{}': {e}", path.display())))
}

fn parse_json(text: &str, path: &Path) -> Result<Value, CliError> {
    serde_json::from_str(text)
        .map_err(|e| CliError::usage(format!("'{}' is not valid JSON ({e}); expected {{id, hyper, data}}", path.display())))
}

fn hyper_value(raw: &str) -> Value {
    serde_json::from_str::<Value>(raw)
        .ok()
        .filter(|v| v.is_number() || v.is_boolean())
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Parses `key=value,...`.
pub fn parse_hyper(raw: &str) -> Result<Vec<(String, Value)>, CliError> {
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("--hyper entry '{kv}' must look like key=value")))?;
            Ok((k.trim().to_string(), hyper_value(v.trim())))
        })
        .collect()
}

/// Parses `v1,v2,...` as reals.
pub fn parse_list(raw: &str, flag: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::usage(format!("{flag} entry '{}' is not a number", s.trim())))
        })
        .collect()
}

fn data_values(text: &str, path: &Path) -> Result<(Vec<Value>, Option<ModelSpec>), CliError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') || trimmed.starts_with('{') {
        return match parse_json(text, path)? {
            Value::Array(items) => Ok((items, None)),
            Value::Object(obj) if obj.contains_key("id") => {
                let spec: ModelSpec = serde_json::from_value(Value::Object(obj))
                    .map_err(|e| CliError::usage(format!("'{}': {e}", path.display())))?;
                Ok((spec.data.clone(), Some(spec)))
            }
            Value::Object(obj) => match obj.get("data") {
                Some(Value::Array(items)) => Ok((items.clone(), None)),
                _ => Err(CliError::usage(format!("'{}' has no \"data\" array", path.display()))),
            },
            _ => Err(CliError::usage(format!("'{}' must hold a JSON array or object", path.display()))),
        };
    }
    let mut out = Vec::new();
    for line in text.lines() {
        let tokens: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).collect();
        if tokens.is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let row = tokens
            .iter()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| CliError::usage(format!("'{}': '{t}' is not a number", path.display())))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if row.len() == 1 {
            out.push(Value::from(row[0]));
        } else {
            out.push(Value::from(row));
        }
    }
    Ok((out, None))
}

/// Resolves `--model`, `--data` and `--hyper` into a model specification.
pub fn model_spec(args: &ModelArgs) -> Result<ModelSpec, CliError> {
    let mut from_data = None;
    let mut data = None;
    if let Some(path) = &args.data {
        let (values, spec) = data_values(&read(path)?, path)?;
        data = Some(values);
        from_data = spec;
    }
    let mut spec = match args.model.as_deref() {
        Some(m) if catalog_ids().contains(&m) => ModelSpec::new(m),
        Some(m) if Path::new(m).exists() => {
            let path = Path::new(m);
            serde_json::from_value(parse_json(&read(path)?, path)?)
                .map_err(|e| CliError::usage(format!("'{m}' is not a model document ({e}); expected {{id, hyper, data}}")))?
        }
        Some(m) => {
            return Err(CliError::usage(format!(
                "unknown model '{m}'; use a JSON model file or one of: {}",
                catalog_ids().join(", ")
            )))
        }
        None => from_data.clone().ok_or_else(|| {
            CliError::usage(format!("--model is required; one of: {}", catalog_ids().join(", ")))
        })?,
    };
    if let Some(doc) = from_data {
        if doc.id != spec.id {
            return Err(CliError::usage(format!(
                "data file describes model '{}' but --model is '{}'",
                doc.id, spec.id
            )));
        }
        for (k, v) in doc.hyper {
            spec.hyper.entry(k).or_insert(v);
        }
    }
    if let Some(values) = data {
        spec.data = values;
    }
    if let Some(raw) = &args.hyper {
        for (k, v) in parse_hyper(raw)? {
            spec.hyper.insert(k, v);
        }
    }
    Ok(spec)
}

/// Explicit grid `lo:hi:count`; `None` for `auto`.
pub fn parse_grid(raw: &str) -> Result<Option<(f64, f64, usize)>, CliError> {
    if raw.trim() == "auto" {
        return Ok(None);
    }
    let parts: Vec<&str> = raw.split(':').collect();
    let bad = || CliError::usage(format!("--psi-grid '{raw}' must be lo:hi:count or auto"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count < 8 {
        return Err(CliError::usage(format!("--psi-grid count must be at least 8, got {count}")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CliError::usage(format!("--psi-grid needs finite lo < hi, got {lo}:{hi}")));
    }
    Ok(Some((lo, hi, count)))
}
