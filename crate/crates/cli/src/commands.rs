use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use hoa_core::mc::{run_coverage, CoverageConfig, CoverageReport};
use hoa_core::models::{Model, ModelSpec};
use hoa_core::optim::fit_default;
use hoa_core::tem::{confidence_interval_with, curve_from_pipeline, Method, Pipeline};
use hoa_core::{Curve64, HoaError, Vector64};
use serde_json::json;

use crate::args::{CiArgs, CoverageArgs, FitArgs, Format, ModelArgs, SignifArgs};
use crate::curve_io::{fmt17, read_curve_csv, write_curve_csv};
use crate::error::CliError;
use crate::input::{model_spec, parse_grid, parse_list};

const AUTO_POINTS: usize = 61;
const AUTO_HALF_WIDTH: f64 = 5.0;

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match out {
        Some(p) => File::create(p)
            .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| CliError::usage(format!("cannot create '{}': {e}", p.display()))),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    let mut w = sink(out)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| CliError::usage(format!("write failed: {e}")))
}

fn build(spec: &ModelSpec) -> Result<Arc<dyn Model<f64>>, CliError> {
    Ok(Arc::from(spec.build::<f64>()?))
}

fn model_given(args: &ModelArgs) -> bool {
    args.model.is_some() || args.data.is_some()
}

pub fn fit(args: &FitArgs) -> Result<(), CliError> {
    let model = build(&model_spec(&args.model)?)?;
    let fit = fit_default(model.as_ref())?;
    let cov = fit.obs_info.inverse()?;
    let se: Vec<f64> = (0..model.dim()).map(|i| cov.row(i)[i].max(0.0).sqrt()).collect();
    let names = model.param_names();
    let text = match args.format {
        Format::Json => {
            let doc = json!({
                "model_id": model.id(),
                "param_names": names,
                "theta_hat": fit.theta_hat.as_slice(),
                "standard_errors": se,
                "interest_index": model.interest_index(),
                "loglik_max": fit.loglik_max,
                "converged": fit.converged,
                "iterations": fit.iterations,
            });
            format!("{doc:#}\n")
        }
        Format::Csv => {
            let mut s = String::from("parameter,estimate,standard_error\n");
            for (i, n) in names.iter().enumerate() {
                s.push_str(&format!("{n},{},{}\n", fmt17(fit.theta_hat[i]), fmt17(se[i])));
            }
            s
        }
    };
    emit(args.out.as_deref(), &text)
}

fn curve_on_grid(pipeline: Arc<Pipeline<f64>>, grid: Option<(f64, f64, usize)>) -> Result<Curve64, CliError> {
    let points = match grid {
        Some((lo, hi, n)) => Vector64::linspace(lo, hi, n)?.into_inner(),
        None => pipeline.auto_grid(AUTO_POINTS, AUTO_HALF_WIDTH)?,
    };
    Ok(curve_from_pipeline(pipeline, &points)?)
}

pub fn signif(args: &SignifArgs) -> Result<(), CliError> {
    let grid = parse_grid(&args.psi_grid)?;
    let pipeline = Arc::new(Pipeline::new(build(&model_spec(&args.model)?)?)?);
    let curve = curve_on_grid(pipeline, grid)?;
    match args.format {
        Format::Csv => {
            let w = sink(args.out.as_deref())?;
            write_curve_csv(&curve, w)
        }
        Format::Json => {
            let text = serde_json::to_string_pretty(&curve).map_err(|e| CliError::usage(format!("serialisation: {e}")))?;
            emit(args.out.as_deref(), &(text + "\n"))
        }
    }
}

fn intervals(curve: &Curve64, level: f64) -> Result<[(f64, f64); 2], HoaError> {
    Ok([
        confidence_interval_with(curve, level, Method::Root)?,
        confidence_interval_with(curve, level, Method::RStar)?,
    ])
}

pub fn ci(args: &CiArgs) -> Result<(), CliError> {
    if !(args.level > 0.0 && args.level < 1.0) {
        return Err(CliError::usage(format!("--level must lie in (0, 1), got {}", args.level)));
    }
    let grid = parse_grid(&args.psi_grid)?;
    let (model_id, found) = if let Some(path) = &args.curve {
        let mut curve = read_curve_csv(path)?;
        if model_given(&args.model) {
            let pipeline = Arc::new(Pipeline::new(build(&model_spec(&args.model)?)?)?);
            curve.attach_pipeline(pipeline)?;
        }
        (curve.model_id.clone(), intervals(&curve, args.level)?)
    } else {
        let pipeline = Arc::new(Pipeline::new(build(&model_spec(&args.model)?)?)?);
        let id = pipeline.model().id().to_string();
        let curve = curve_on_grid(pipeline.clone(), grid)?;
        match intervals(&curve, args.level) {
            Ok(found) => (id, found),
            // the automatic grid is widened once to the suggested range
            Err(HoaError::NotBracketed {
                suggested_lo,
                suggested_hi,
                ..
            }) if grid.is_none() => {
                let wide = curve_on_grid(pipeline, Some((suggested_lo, suggested_hi, AUTO_POINTS)))?;
                (id, intervals(&wide, args.level)?)
            }
            Err(e) => return Err(e.into()),
        }
    };
    let [first, higher] = found;
    let text = match args.format {
        Format::Csv => format!(
            "method,level,lower,upper\nphi_r,{level},{},{}\nphi_rstar,{level},{},{}\n",
            fmt17(first.0),
            fmt17(first.1),
            fmt17(higher.0),
            fmt17(higher.1),
            level = args.level
        ),
        Format::Json => {
            let doc = json!({
                "model_id": model_id,
                "level": args.level,
                "first_order": {"method": "phi_r", "lower": first.0, "upper": first.1},
                "higher_order": {"method": "phi_rstar", "lower": higher.0, "upper": higher.1},
            });
            format!("{doc:#}\n")
        }
    };
    emit(args.out.as_deref(), &text)
}

fn pvalue_csv(report: &CoverageReport) -> String {
    let cell = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
    let mut s = String::from("replicate,wald,root,rstar,lugannani_rice\n");
    for r in &report.pvalues {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.replicate,
            cell(r.wald),
            cell(r.root),
            cell(r.rstar),
            cell(r.lugannani_rice)
        ));
    }
    s
}

fn summary_csv(report: &CoverageReport) -> String {
    let mut s = String::from("method,level,coverage,ks,successes,failures\n");
    for m in &report.methods {
        for (level, cov) in report.levels.iter().zip(&m.coverage) {
            s.push_str(&format!(
                "{},{level},{},{},{},{}\n",
                m.method.name(),
                fmt17(*cov),
                fmt17(m.ks),
                m.successes,
                m.failures
            ));
        }
    }
    s
}

pub fn coverage(args: &CoverageArgs) -> Result<(), CliError> {
    let spec = model_spec(&args.model)?;
    let cfg = CoverageConfig::new(
        spec,
        parse_list(&args.true_theta, "--true-theta")?,
        args.replicates,
        parse_list(&args.level, "--level")?,
        args.seed,
    );
    let report = run_coverage(&cfg)?;
    if let Some(path) = &args.pvalues {
        emit(Some(path), &pvalue_csv(&report))?;
    }
    let text = match args.format {
        Format::Json => report.to_json()? + "\n",
        Format::Csv => summary_csv(&report),
    };
    emit(args.out.as_deref(), &text)?;
    if report.unreliable {
        eprintln!("warning: more than 5% of replicates failed for at least one method; coverage is unreliable");
    }
    Ok(())
}
