//! Builtin metrics.

use crate::expr::Expr;
use crate::{Error, Result};

use super::{MetricField, Signature};

fn parse_all(n: usize, texts: impl IntoIterator<Item = String>) -> Result<Vec<Expr>> {
    texts
        .into_iter()
        .map(|t| Expr::parse(&t, n).map_err(Error::from))
        .collect()
}

fn radius_squared(n: usize) -> String {
    (1..=n).map(|i| format!("x{i}^2")).collect::<Vec<_>>().join(" + ")
}

pub fn euclidean(n: usize) -> Result<MetricField> {
    MetricField::diagonal(Signature::riemannian(n), parse_all(n, vec!["1".into(); n])?)
}

/// `diag(-1, .., -1, 1, .., 1)` with `negative` leading minus signs.
pub fn minkowski(positive: usize, negative: usize) -> Result<MetricField> {
    let n = positive + negative;
    let diag = (0..n).map(|i| if i < negative { "-1" } else { "1" }.to_string());
    MetricField::diagonal(Signature::new(positive, negative), parse_all(n, diag)?)
}

/// Unit round sphere in stereographic coordinates, `(2 / (1 + |x|^2))^2 δ`.
pub fn sphere_stereographic(n: usize) -> Result<MetricField> {
    let c = format!("4/(1 + {})^2", radius_squared(n));
    MetricField::diagonal(Signature::riemannian(n), parse_all(n, vec![c; n])?)
}

/// Upper half-space model of hyperbolic space, `δ / x_n^2`.
pub fn hyperbolic_halfspace(n: usize) -> Result<MetricField> {
    let c = format!("1/x{n}^2");
    MetricField::diagonal(Signature::riemannian(n), parse_all(n, vec![c; n])?)
}

/// `e^{2f} δ` for a user expression `f`.
pub fn conformally_flat(f: &str, n: usize) -> Result<MetricField> {
    let f = Expr::parse(f, n)?;
    euclidean(n)?.conformally_rescaled(&f)
}

/// A curved Lorentzian metric, `diag(-1, 1 + x1^2, 1, .., 1)`.
pub fn curved_lorentzian(n: usize) -> Result<MetricField> {
    let diag = (0..n).map(|i| match i {
        0 => "-1".to_string(),
        1 => "1 + x1^2".to_string(),
        _ => "1".to_string(),
    });
    MetricField::diagonal(Signature::new(n - 1, 1), parse_all(n, diag)?)
}

/// Exponent `f` with `e^{2f} δ` equal to the stereographic sphere metric.
pub fn sphere_conformal_factor(n: usize) -> String {
    format!("log(2/(1 + {}))", radius_squared(n))
}
