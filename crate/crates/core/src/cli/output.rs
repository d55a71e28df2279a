//! Byte-reproducible CSV and JSON emission.
//!
//! Every real is written with 17 significant digits in scientific notation;
//! lines end in `\n`.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::curves::Trajectory;
use crate::geometry::{MetricField, PointGeometry};
use crate::tractor::{CurveSamples, TransportPath};
use crate::verify::CheckReport;
use crate::Result;

pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// A real serialized through [`format_real`]; non-finite values become
/// `null`.
#[derive(Debug, Clone, Copy)]
struct Real(f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format_real(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

fn reals(v: &[f64]) -> Vec<Real> {
    v.iter().copied().map(Real).collect()
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable output");
    text.push('\n');
    text
}

fn csv_line(out: &mut String, values: impl IntoIterator<Item = f64>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(',');
        }
        first = false;
        out.push_str(&format_real(v));
    }
    out.push('\n');
}

/// `t,x1..xn,v1..vn,<extra>` with one row per sample.
pub fn trajectory_csv(tr: &Trajectory) -> String {
    let mut out = String::from("t");
    for name in &tr.state_names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (t, y) in tr.times.iter().zip(&tr.states) {
        csv_line(&mut out, std::iter::once(*t).chain(y.iter().copied()));
    }
    out
}

#[derive(Serialize)]
struct TrajectoryJson<'a> {
    system: &'a str,
    columns: Vec<String>,
    rows: Vec<Vec<Real>>,
    diagnostic_columns: &'a [String],
    diagnostics: Vec<Vec<Real>>,
}

pub fn trajectory_json(system: &str, tr: &Trajectory) -> String {
    let columns = std::iter::once("t".to_string())
        .chain(tr.state_names.iter().cloned())
        .collect();
    let rows = tr
        .times
        .iter()
        .zip(&tr.states)
        .map(|(t, y)| std::iter::once(Real(*t)).chain(reals(y)).collect())
        .collect();
    to_json(&TrajectoryJson {
        system,
        columns,
        rows,
        diagnostic_columns: &tr.diagnostic_names,
        diagnostics: tr.diagnostics.iter().map(|d| reals(d)).collect(),
    })
}

fn transport_columns(n: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=n).map(|i| format!("x{i}")));
    cols.extend((1..=n).map(|i| format!("v{i}")));
    cols.push("lambda".into());
    cols.extend((1..=n).map(|i| format!("alpha{i}")));
    cols.push("mu".into());
    cols.push("H".into());
    cols
}

fn transport_rows(curve: &CurveSamples, path: &TransportPath, stride: usize) -> Vec<Vec<f64>> {
    let last = path.times.len() - 1;
    (0..=last)
        .filter(|i| i % stride == 0 || *i == last)
        .map(|i| {
            let mut row = vec![path.times[i]];
            row.extend_from_slice(&curve.positions[i]);
            row.extend_from_slice(&curve.velocities[i]);
            row.extend(path.tractors[i].to_vec());
            row.push(path.h_values[i]);
            row
        })
        .collect()
}

/// `t,x1..xn,v1..vn,lambda,alpha1..alphan,mu,H`.
pub fn transport_csv(curve: &CurveSamples, path: &TransportPath, stride: usize) -> String {
    let n = curve.positions[0].len();
    let mut out = transport_columns(n).join(",");
    out.push('\n');
    for row in transport_rows(curve, path, stride) {
        csv_line(&mut out, row);
    }
    out
}

#[derive(Serialize)]
struct TransportJson {
    columns: Vec<String>,
    rows: Vec<Vec<Real>>,
    error_estimate: Real,
}

pub fn transport_json(curve: &CurveSamples, path: &TransportPath, stride: usize) -> String {
    let n = curve.positions[0].len();
    to_json(&TransportJson {
        columns: transport_columns(n),
        rows: transport_rows(curve, path, stride).iter().map(|r| reals(r)).collect(),
        error_estimate: Real(path.error_estimate),
    })
}

fn matrix(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<Real>> {
    m.row_iter().map(|r| r.iter().copied().map(Real).collect()).collect()
}

#[derive(Serialize)]
struct PointTensors {
    x: Vec<Real>,
    g: Vec<Vec<Real>>,
    /// `christoffel[k][i][j] = Γ^k_ij`
    christoffel: Vec<Vec<Vec<Real>>>,
    ricci: Vec<Vec<Real>>,
    scalar: Real,
    /// Absent in dimension 2.
    schouten: Option<Vec<Vec<Real>>>,
    projective_schouten: Vec<Vec<Real>>,
}

/// g, Γ, Ric, Scal, S and P at each point.
pub fn tensors_json(metric: &MetricField, points: &[Vec<f64>]) -> Result<String> {
    let n = metric.dim();
    let mut out = Vec::with_capacity(points.len());
    for x in points {
        let geo = PointGeometry::new(metric, x)?;
        let christoffel = (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| (0..n).map(|j| Real(geo.christoffel.get(k, i, j))).collect())
                    .collect()
            })
            .collect();
        out.push(PointTensors {
            x: reals(x),
            g: matrix(&geo.metric.g),
            christoffel,
            ricci: matrix(&geo.ricci),
            scalar: Real(geo.scalar),
            schouten: geo.schouten().ok().map(|s| matrix(&s)),
            projective_schouten: matrix(&geo.projective_schouten()),
        });
    }
    Ok(to_json(&out))
}

#[derive(Serialize)]
struct SampleJson<'a> {
    label: &'a str,
    residual: Real,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    name: &'a str,
    passed: bool,
    max_residual: Real,
    tolerance: Real,
    seed: Option<u64>,
    details: Vec<SampleJson<'a>>,
}

/// JSON array of check reports.
pub fn reports_json(reports: &[CheckReport]) -> String {
    let out: Vec<ReportJson> = reports
        .iter()
        .map(|r| ReportJson {
            name: &r.name,
            passed: r.passed,
            max_residual: Real(r.max_residual),
            tolerance: Real(r.tolerance),
            seed: r.seed,
            details: r
                .details
                .iter()
                .map(|d| SampleJson {
                    label: &d.label,
                    residual: Real(d.residual),
                })
                .collect(),
        })
        .collect();
    to_json(&out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_real(0.1), "1.0000000000000001e-1");
        assert_eq!(format_real(-2.0), "-2.0000000000000000e0");
        assert_eq!(format_real(0.0), "0.0000000000000000e0");
        for x in [0.1, 1.0 / 3.0, -7.25e-300, 6.02e23, f64::MIN_POSITIVE] {
            assert_eq!(format_real(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_reals_use_fixed_format() {
        let text = to_json(&vec![Real(0.5), Real(f64::NAN)]);
        assert_eq!(text, "[\n  5.0000000000000000e-1,\n  null\n]\n");
        let back: Vec<Option<f64>> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, vec![Some(0.5), None]);
    }
}
