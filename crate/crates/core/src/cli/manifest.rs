//! JSON job manifests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;

use crate::expr::Expr;
use crate::geometry::{zoo, MetricField, Signature};

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl std::fmt::Display) -> ManifestError {
    ManifestError::Validation {
        field: field.into(),
        message: message.to_string(),
    }
}

/// Curve families the `integrate` and `transport` jobs can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    ConformalCoupled,
    ConformalOde3,
    ProjectiveCoupled,
    Geodesic,
}

impl SystemKind {
    pub fn name(self) -> &'static str {
        match self {
            SystemKind::ConformalCoupled => "conformal_coupled",
            SystemKind::ConformalOde3 => "conformal_ode3",
            SystemKind::ProjectiveCoupled => "projective_coupled",
            SystemKind::Geodesic => "geodesic",
        }
    }

    /// Manifest key of the third initial vector, if the system has one.
    pub fn third_field(self) -> Option<&'static str> {
        match self {
            SystemKind::ConformalCoupled => Some("alpha0"),
            SystemKind::ConformalOde3 => Some("A0"),
            SystemKind::ProjectiveCoupled => Some("u0"),
            SystemKind::Geodesic => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Initial data and time grid of one curve.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub system: SystemKind,
    pub x0: Vec<f64>,
    pub v0: Vec<f64>,
    #[serde(default)]
    pub alpha0: Option<Vec<f64>>,
    #[serde(default, rename = "A0")]
    pub a0: Option<Vec<f64>>,
    #[serde(default)]
    pub u0: Option<Vec<f64>>,
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
    pub step: f64,
}

impl CurveSpec {
    /// The flat initial state `[x0, v0, third]`, with a zero third vector
    /// when it is omitted.
    pub fn initial_state(&self) -> Vec<f64> {
        let n = self.x0.len();
        let mut y = [self.x0.as_slice(), self.v0.as_slice()].concat();
        let third = match self.system {
            SystemKind::ConformalCoupled => &self.alpha0,
            SystemKind::ConformalOde3 => &self.a0,
            SystemKind::ProjectiveCoupled => &self.u0,
            SystemKind::Geodesic => return y,
        };
        match third {
            Some(w) => y.extend_from_slice(w),
            None => y.extend(std::iter::repeat_n(0.0, n)),
        }
        y
    }

    fn validate(&self, field: &str, n: usize) -> Result<(), ManifestError> {
        check_vector(&format!("{field}.x0"), &self.x0, n)?;
        check_vector(&format!("{field}.v0"), &self.v0, n)?;
        let wanted = self.system.third_field();
        for (key, value) in [("alpha0", &self.alpha0), ("A0", &self.a0), ("u0", &self.u0)] {
            if let Some(w) = value {
                if wanted != Some(key) {
                    return Err(invalid(
                        format!("{field}.{key}"),
                        format!("not an initial vector of system `{}`", self.system.name()),
                    ));
                }
                check_vector(&format!("{field}.{key}"), w, n)?;
            }
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(invalid(format!("{field}.step"), "must be a positive number"));
        }
        if !self.t0.is_finite() || !self.t1.is_finite() || self.t0 == self.t1 {
            return Err(invalid(format!("{field}.t1"), "time span must be finite and non-empty"));
        }
        Ok(())
    }
}

fn check_vector(field: &str, v: &[f64], n: usize) -> Result<(), ManifestError> {
    if v.len() != n {
        return Err(invalid(field, format!("expected {n} components, found {}", v.len())));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(invalid(field, "components must be finite"));
    }
    Ok(())
}

fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrateJob {
    pub system: SystemKind,
    pub x0: Vec<f64>,
    pub v0: Vec<f64>,
    #[serde(default)]
    pub alpha0: Option<Vec<f64>>,
    #[serde(default, rename = "A0")]
    pub a0: Option<Vec<f64>>,
    #[serde(default)]
    pub u0: Option<Vec<f64>>,
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
    pub step: f64,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

impl IntegrateJob {
    pub fn curve(&self) -> CurveSpec {
        CurveSpec {
            system: self.system,
            x0: self.x0.clone(),
            v0: self.v0.clone(),
            alpha0: self.alpha0.clone(),
            a0: self.a0.clone(),
            u0: self.u0.clone(),
            t0: self.t0,
            t1: self.t1,
            step: self.step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorsJob {
    pub points: Vec<Vec<f64>>,
    #[serde(default)]
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TractorSpec {
    pub lambda: f64,
    pub alpha: Vec<f64>,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportJob {
    pub curve: CurveSpec,
    pub tractor0: TractorSpec,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckJob {
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub cases: Option<usize>,
    #[serde(default)]
    pub t1: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Job {
    Integrate(IntegrateJob),
    Tensors(TensorsJob),
    Transport(TransportJob),
    Check(CheckJob),
}

impl Job {
    pub fn kind(&self) -> &'static str {
        match self {
            Job::Integrate(_) => "integrate",
            Job::Tensors(_) => "tensors",
            Job::Transport(_) => "transport",
            Job::Check(_) => "check",
        }
    }

    fn validate(&self, field: &str, n: usize) -> Result<(), ManifestError> {
        let positive_stride = |s: usize| {
            if s == 0 {
                Err(invalid(format!("{field}.stride"), "must be at least 1"))
            } else {
                Ok(())
            }
        };
        match self {
            Job::Integrate(j) => {
                j.curve().validate(field, n)?;
                positive_stride(j.stride)
            }
            Job::Tensors(j) => {
                if j.points.is_empty() {
                    return Err(invalid(format!("{field}.points"), "needs at least one point"));
                }
                for (i, p) in j.points.iter().enumerate() {
                    check_vector(&format!("{field}.points[{i}]"), p, n)?;
                }
                Ok(())
            }
            Job::Transport(j) => {
                j.curve.validate(&format!("{field}.curve"), n)?;
                check_vector(&format!("{field}.tractor0.alpha"), &j.tractor0.alpha, n)?;
                if !j.tractor0.lambda.is_finite() || !j.tractor0.mu.is_finite() {
                    return Err(invalid(format!("{field}.tractor0"), "components must be finite"));
                }
                positive_stride(j.stride)
            }
            Job::Check(j) => {
                for name in &j.checks {
                    if !crate::verify::CHECK_NAMES.contains(&name.as_str()) {
                        return Err(invalid(format!("{field}.checks"), format!("unknown check `{name}`")));
                    }
                }
                if let Some(h) = j.step {
                    if !(h > 0.0 && h.is_finite()) {
                        return Err(invalid(format!("{field}.step"), "must be a positive number"));
                    }
                }
                if let Some(t1) = j.t1 {
                    if !(t1 > 0.0 && t1.is_finite()) {
                        return Err(invalid(format!("{field}.t1"), "must be a positive number"));
                    }
                }
                if j.cases == Some(0) {
                    return Err(invalid(format!("{field}.cases"), "must be at least 1"));
                }
                Ok(())
            }
        }
    }
}

/// A validated manifest: the metric is parsed and every job checked against
/// the dimension.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub dimension: usize,
    pub signature: Signature,
    pub metric: MetricField,
    pub jobs: Vec<Job>,
    /// Directory that relative output paths are resolved against.
    pub base_dir: PathBuf,
}

impl Manifest {
    pub fn resolve(&self, output: &str) -> PathBuf {
        self.base_dir.join(output)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetric {
    #[serde(default)]
    builtin: Option<String>,
    #[serde(default)]
    params: BTreeMap<String, Value>,
    #[serde(default)]
    components: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    dimension: Option<usize>,
    signature: Option<[usize; 2]>,
    metric: Option<RawMetric>,
    #[serde(default)]
    job: Option<Value>,
    #[serde(default)]
    jobs: Option<Vec<Value>>,
}

/// Names and parameter lists of the builtin metrics.
pub const BUILTINS: [(&str, &str); 6] = [
    ("euclidean", "identity metric; signature (n, 0)"),
    (
        "minkowski",
        "diag(-1,..,-1, 1,..,1) with q leading minus signs; signature (p, q)",
    ),
    ("sphere_stereographic", "(2/(1+|x|^2))^2 δ, the unit round sphere"),
    ("hyperbolic_halfspace", "δ / x_n^2, the upper half-space"),
    ("conformal", "e^{2f} δ; params: {\"f\": \"<expression>\"}"),
    ("curved_lorentzian", "diag(-1, 1 + x1^2, 1, .., 1); signature (n-1, 1)"),
];

/// Build a builtin metric of dimension `dim` and check it has `signature`.
pub fn builtin_metric(
    name: &str,
    dim: usize,
    signature: Signature,
    params: &BTreeMap<String, Value>,
) -> Result<MetricField, ManifestError> {
    let allowed: &[&str] = if name == "conformal" { &["f"] } else { &[] };
    if let Some(extra) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(invalid(
            "metric.params",
            format!("`{name}` takes no parameter `{extra}`"),
        ));
    }
    let built = match name {
        "euclidean" => zoo::euclidean(dim),
        "minkowski" => {
            if signature.negative == 0 {
                return Err(invalid("signature", "minkowski needs at least one negative direction"));
            }
            zoo::minkowski(signature.positive, signature.negative)
        }
        "sphere_stereographic" => zoo::sphere_stereographic(dim),
        "hyperbolic_halfspace" => zoo::hyperbolic_halfspace(dim),
        "curved_lorentzian" => {
            if dim < 2 {
                return Err(invalid("dimension", "curved_lorentzian needs at least 2 dimensions"));
            }
            zoo::curved_lorentzian(dim)
        }
        "conformal" => {
            let f = params
                .get("f")
                .and_then(Value::as_str)
                .ok_or_else(|| invalid("metric.params.f", "expected an expression string"))?;
            zoo::conformally_flat(f, dim)
        }
        other => return Err(invalid("metric.builtin", format!("unknown builtin `{other}`"))),
    }
    .map_err(|e| invalid("metric", e))?;
    if built.signature() != signature {
        let s = built.signature();
        return Err(invalid(
            "signature",
            format!("builtin `{name}` has signature [{}, {}]", s.positive, s.negative),
        ));
    }
    Ok(built)
}

fn parse_metric(raw: RawMetric, n: usize, signature: Signature) -> Result<MetricField, ManifestError> {
    match (raw.builtin, raw.components) {
        (Some(name), None) => builtin_metric(&name, n, signature, &raw.params),
        (None, Some(rows)) => {
            if !raw.params.is_empty() {
                return Err(invalid("metric.params", "only builtin metrics take parameters"));
            }
            let full = rows.iter().all(|r| r.len() == n) && rows.len() == n;
            let mut parsed = Vec::with_capacity(rows.len());
            for (i, row) in rows.iter().enumerate() {
                let mut out = Vec::with_capacity(row.len());
                for (j, text) in row.iter().enumerate() {
                    let col = if full { j } else { i + j };
                    let e = Expr::parse(text, n).map_err(|e| invalid(format!("metric.components[{i}][{col}]"), e))?;
                    out.push(e);
                }
                parsed.push(out);
            }
            let built = if full {
                MetricField::from_matrix(signature, parsed)
            } else {
                MetricField::from_upper_triangle(signature, parsed)
            };
            built.map_err(|e| invalid("metric.components", e))
        }
        (Some(_), Some(_)) => Err(invalid("metric", "give either `builtin` or `components`, not both")),
        (None, None) => Err(invalid("metric", "needs `builtin` or `components`")),
    }
}

/// Parse and validate manifest text. Relative outputs resolve against
/// `base_dir`.
pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<Manifest, ManifestError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ManifestError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let raw: RawManifest = serde_json::from_value(value).map_err(|e| invalid("manifest", e))?;
    let n = raw.dimension.ok_or_else(|| invalid("dimension", "missing"))?;
    if n < 2 {
        return Err(invalid("dimension", "must be at least 2"));
    }
    let [p, q] = raw.signature.ok_or_else(|| invalid("signature", "missing"))?;
    if p + q != n {
        return Err(invalid(
            "signature",
            format!("[{p}, {q}] does not sum to dimension {n}"),
        ));
    }
    let signature = Signature::new(p, q);
    let metric = parse_metric(raw.metric.ok_or_else(|| invalid("metric", "missing"))?, n, signature)?;

    let raw_jobs: Vec<(String, Value)> = match (raw.job, raw.jobs) {
        (Some(j), None) => vec![("job".to_string(), j)],
        (None, Some(js)) => js
            .into_iter()
            .enumerate()
            .map(|(i, j)| (format!("jobs[{i}]"), j))
            .collect(),
        (None, None) => Vec::new(),
        (Some(_), Some(_)) => return Err(invalid("jobs", "give either `job` or `jobs`, not both")),
    };
    let mut jobs = Vec::with_capacity(raw_jobs.len());
    for (field, value) in raw_jobs {
        let job: Job = serde_json::from_value(value).map_err(|e| invalid(field.as_str(), e))?;
        job.validate(&field, n)?;
        jobs.push(job);
    }
    Ok(Manifest {
        dimension: n,
        signature,
        metric,
        jobs,
        base_dir: base_dir.to_path_buf(),
    })
}

pub fn load_manifest(path: &Path) -> Result<Manifest, ManifestError> {
    let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_manifest(&text, &base)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FLAT: &str = r#"{
        "dimension": 3,
        "signature": [3, 0],
        "metric": {"builtin": "euclidean"},
        "job": {"kind": "integrate", "system": "geodesic",
                "x0": [0, 0, 0], "v0": [1, 0, 0], "t1": 1, "step": 0.01}
    }"#;

    fn parse(text: &str) -> Result<Manifest, ManifestError> {
        parse_manifest(text, Path::new("."))
    }

    fn field_of(e: ManifestError) -> String {
        match e {
            ManifestError::Validation { field, .. } => field,
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_flat_geodesic_manifest() {
        let m = parse(FLAT).unwrap();
        assert_eq!(m.jobs.len(), 1);
        assert_eq!(m.metric.dim(), 3);
        match &m.jobs[0] {
            Job::Integrate(j) => assert_eq!(j.curve().initial_state(), vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_signature() {
        let text = FLAT.replace(r#""signature": [3, 0],"#, "");
        assert_eq!(field_of(parse(&text).unwrap_err()), "signature");
    }

    #[test]
    fn variable_index_error_in_components() {
        let text = r#"{"dimension": 3, "signature": [3, 0],
            "metric": {"components": [["x0^2", "0", "0"], ["1", "0"], ["1"]]}}"#;
        let err = parse(text).unwrap_err();
        let msg = err.to_string();
        assert_eq!(field_of(err), "metric.components[0][0]");
        assert!(msg.contains("x0"), "{msg}");
    }

    #[test]
    fn malformed_json_has_location() {
        match parse("{\n  \"dimension\": 3,\n  oops\n}") {
            Err(ManifestError::Json { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_vector_length_names_field() {
        let text = FLAT.replace("\"v0\": [1, 0, 0]", "\"v0\": [1, 0]");
        assert_eq!(field_of(parse(&text).unwrap_err()), "job.v0");
    }

    #[test]
    fn third_vector_must_match_system() {
        let text = FLAT.replace("\"t1\": 1", "\"u0\": [0, 0, 0], \"t1\": 1");
        assert_eq!(field_of(parse(&text).unwrap_err()), "job.u0");
    }

    #[test]
    fn nonpositive_step() {
        let text = FLAT.replace("\"step\": 0.01", "\"step\": 0");
        assert_eq!(field_of(parse(&text).unwrap_err()), "job.step");
    }

    #[test]
    fn full_and_triangular_components_agree() {
        let full = r#"{"dimension": 2, "signature": [2, 0],
            "metric": {"components": [["1 + x1^2", "x2"], ["x2", "2"]]}}"#;
        let tri = r#"{"dimension": 2, "signature": [2, 0],
            "metric": {"components": [["1 + x1^2", "x2"], ["2"]]}}"#;
        let a = parse(full).unwrap().metric.at(&[0.3, 0.1]).unwrap();
        let b = parse(tri).unwrap().metric.at(&[0.3, 0.1]).unwrap();
        assert_eq!(a.g, b.g);
    }

    #[test]
    fn builtin_examples() {
        let none = BTreeMap::new();
        let e = builtin_metric("euclidean", 3, Signature::riemannian(3), &none).unwrap();
        assert_eq!(e.at(&[0.4, 1.0, -2.0]).unwrap().g, nalgebra::DMatrix::identity(3, 3));
        let s = builtin_metric("sphere_stereographic", 3, Signature::riemannian(3), &none).unwrap();
        assert_eq!(s.at(&[0.0; 3]).unwrap().g, nalgebra::DMatrix::identity(3, 3) * 4.0);
        let mut params = BTreeMap::new();
        params.insert("f".to_string(), Value::from("0.1*x1"));
        let c = builtin_metric("conformal", 3, Signature::riemannian(3), &params).unwrap();
        for x in [[0.0, 0.0, 0.0], [1.0, -2.0, 0.5], [-3.0, 0.1, 0.2]] {
            let g = c.at(&x).unwrap().g;
            let want = (0.2 * x[0]).exp();
            assert!((g[(0, 0)] - want).abs() <= 1e-15 * want);
            assert_eq!(g[(0, 1)], 0.0);
        }
    }

    #[test]
    fn builtin_errors() {
        let none = BTreeMap::new();
        assert_eq!(
            field_of(builtin_metric("torus", 3, Signature::riemannian(3), &none).unwrap_err()),
            "metric.builtin"
        );
        assert_eq!(
            field_of(builtin_metric("minkowski", 3, Signature::riemannian(3), &none).unwrap_err()),
            "signature"
        );
        assert_eq!(
            field_of(builtin_metric("euclidean", 3, Signature::new(2, 1), &none).unwrap_err()),
            "signature"
        );
        assert_eq!(
            field_of(builtin_metric("conformal", 3, Signature::riemannian(3), &none).unwrap_err()),
            "metric.params.f"
        );
    }

    #[test]
    fn unknown_check_name_rejected() {
        let text = r#"{"dimension": 3, "signature": [3, 0], "metric": {"builtin": "euclidean"},
            "jobs": [{"kind": "check", "checks": ["bogus"]}]}"#;
        assert_eq!(field_of(parse(text).unwrap_err()), "jobs[0].checks");
    }
}
