use std::io::Write;
use std::path::Path;

use hoa_core::{Curve64, PivotSet64};

use crate::error::CliError;

pub const COLUMNS: [&str; 9] = [
    "psi",
    "r",
    "q",
    "rstar",
    "phi_r",
    "phi_rstar",
    "lugannani_rice",
    "interpolated",
    "accuracy_order",
];

/// 17 significant digits.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::usage(format!("CSV error: {e}"))
}

pub fn write_curve_csv(curve: &Curve64, out: impl Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS).map_err(csv_err)?;
    for p in &curve.points {
        w.write_record([
            fmt17(p.psi),
            fmt17(p.r),
            fmt17(p.q),
            fmt17(p.rstar),
            fmt17(p.phi_r),
            fmt17(p.phi_rstar),
            fmt17(p.lugannani_rice),
            p.interpolated.to_string(),
            curve.accuracy_order.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::usage(format!("write failed: {e}")))
}

// ψ̂ where r changes sign and |dψ/dr| there; the midpoint and half-span when r
// never crosses zero.
fn centre_and_scale(points: &[PivotSet64]) -> (f64, f64) {
    for w in points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.r >= 0.0 && b.r <= 0.0 && a.r != b.r {
            let slope = (b.psi - a.psi) / (a.r - b.r);
            return (a.psi + a.r * slope, slope);
        }
    }
    let (lo, hi) = (points[0].psi, points[points.len() - 1].psi);
    (0.5 * (lo + hi), 0.5 * (hi - lo))
}

/// Reads a curve written by [`write_curve_csv`].
pub fn read_curve_csv(path: &Path) -> Result<Curve64, CliError> {
    let shown = path.display();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::usage(format!("cannot read curve '{shown}': {e}")))?;
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let index: Vec<usize> = COLUMNS
        .iter()
        .map(|c| {
            headers.iter().position(|h| h.trim() == *c).ok_or_else(|| {
                CliError::usage(format!("curve '{shown}' lacks column '{c}'; write it with `hoa signif --format csv`"))
            })
        })
        .collect::<Result<_, _>>()?;
    let mut points = Vec::new();
    let mut order = 3u8;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let field = |c: usize| rec.get(index[c]).unwrap_or("").trim();
        let num = |c: usize| -> Result<f64, CliError> {
            field(c).parse::<f64>().map_err(|_| {
                CliError::usage(format!("curve '{shown}' row {}: '{}' is not a number", line + 2, field(c)))
            })
        };
        let interpolated = field(7)
            .parse::<bool>()
            .map_err(|_| CliError::usage(format!("curve '{shown}' row {}: interpolated must be true or false", line + 2)))?;
        order = field(8)
            .parse::<u8>()
            .map_err(|_| CliError::usage(format!("curve '{shown}' row {}: bad accuracy_order", line + 2)))?;
        points.push(PivotSet64 {
            psi: num(0)?,
            r: num(1)?,
            q: num(2)?,
            rstar: num(3)?,
            phi_r: num(4)?,
            phi_rstar: num(5)?,
            lugannani_rice: num(6)?,
            wald: f64::NAN,
            interpolated,
            nuisance: Vec::new(),
        });
    }
    if points.len() < 2 {
        return Err(CliError::usage(format!("curve '{shown}' needs at least two rows")));
    }
    let (psi_hat, scale) = centre_and_scale(&points);
    Ok(Curve64::from_points(points, "", "", order, psi_hat, scale)?)
}
