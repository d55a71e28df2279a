//! Conformal Weyl connections in the gauge of a background metric `g`.
//!
//! The connection translated from `g` by a 1-form `α` is
//! `D^α_X Y = D^g_X Y + α(X) Y + α(Y) X − g(X, Y) α♯`.
//! Its geodesics have coordinate acceleration
//! `dv/dt = −Γ(v, v) − 2 α(v) v + g(v, v) α♯`.

use crate::geometry::{MetricAtPoint, MetricField, PointGeometry};
use crate::{Error, Result};

/// Below this, `|g(v, v)|` is treated as a null velocity.
pub const NULL_THRESHOLD: f64 = 1e-12;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Weyl geodesic acceleration from precomputed point data.
pub fn acceleration_at(geo: &PointGeometry, v: &[f64], alpha: &[f64]) -> Vec<f64> {
    let gvv = geo.metric.inner(v, v);
    let av = dot(alpha, v);
    let alpha_sharp = geo.metric.sharp(alpha);
    geo.christoffel
        .contract(v, v)
        .iter()
        .enumerate()
        .map(|(k, gk)| -gk - 2.0 * av * v[k] + gvv * alpha_sharp[k])
        .collect()
}

/// Coordinate acceleration of a `D^α` geodesic through `(x, v)`.
pub fn weyl_acceleration(m: &MetricField, x: &[f64], v: &[f64], alpha: &[f64]) -> Result<Vec<f64>> {
    let n = m.dim();
    Error::check_len("velocity", n, v.len())?;
    Error::check_len("Weyl 1-form", n, alpha.len())?;
    let geo = PointGeometry::new(m, x)?;
    Ok(acceleration_at(&geo, v, alpha))
}

/// Solve for the 1-form from a covariant acceleration `A = D^g_v v`:
/// `α = (A♭ − 2 g(A, v)/g(v, v) v♭) / g(v, v)`.
pub fn alpha_from_covariant(metric: &MetricAtPoint, v: &[f64], cov_acc: &[f64]) -> Result<Vec<f64>> {
    let gvv = metric.inner(v, v);
    if gvv.abs() <= NULL_THRESHOLD {
        return Err(Error::NullVelocity { norm: gvv.abs() });
    }
    let gav = metric.inner(cov_acc, v);
    let a_flat = metric.flat(cov_acc);
    let v_flat = metric.flat(v);
    Ok(a_flat
        .iter()
        .zip(&v_flat)
        .map(|(a, w)| (a - 2.0 * gav / gvv * w) / gvv)
        .collect())
}

/// Recover the unique 1-form `α` for which the `D^α` geodesic through
/// `(x, v)` has coordinate acceleration `acc`.
pub fn alpha_from_acceleration(m: &MetricField, x: &[f64], v: &[f64], acc: &[f64]) -> Result<Vec<f64>> {
    let n = m.dim();
    Error::check_len("velocity", n, v.len())?;
    Error::check_len("acceleration", n, acc.len())?;
    let geo = PointGeometry::new(m, x)?;
    let gvv = geo.metric.inner(v, v);
    if gvv.abs() <= NULL_THRESHOLD {
        return Err(Error::NullVelocity { norm: gvv.abs() });
    }
    let cov: Vec<f64> = geo
        .christoffel
        .contract(v, v)
        .iter()
        .zip(acc)
        .map(|(g, a)| a + g)
        .collect();
    alpha_from_covariant(&geo.metric, v, &cov)
}

/// Connection coefficients `C^k_ij` of `D^α`, stored at `(k*n + i)*n + j`:
/// `C^k_ij = Γ^k_ij + α_i δ^k_j + α_j δ^k_i − g_ij (α♯)^k`.
pub fn connection_coefficients(m: &MetricField, x: &[f64], alpha: &[f64]) -> Result<Vec<f64>> {
    let n = m.dim();
    Error::check_len("Weyl 1-form", n, alpha.len())?;
    let metric = m.at(x)?;
    let gamma = crate::geometry::Christoffel::from_metric(&metric);
    let alpha_sharp = metric.sharp(alpha);
    let mut out = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut c = gamma.get(k, i, j) - metric.g[(i, j)] * alpha_sharp[k];
                if k == j {
                    c += alpha[i];
                }
                if k == i {
                    c += alpha[j];
                }
                out[(k * n + i) * n + j] = c;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::zoo;

    const O: [f64; 3] = [0.0; 3];
    const E1: [f64; 3] = [1.0, 0.0, 0.0];
    const E2: [f64; 3] = [0.0, 1.0, 0.0];

    #[test]
    fn zero_form_gives_metric_geodesic() {
        let m = zoo::sphere_stereographic(3).unwrap();
        let x = [0.3, 0.1, -0.2];
        let v = [0.5, -1.0, 0.25];
        let acc = weyl_acceleration(&m, &x, &v, &O).unwrap();
        let gamma = m.christoffel(&x).unwrap().contract(&v, &v);
        for k in 0..3 {
            assert_eq!(acc[k], -gamma[k]);
        }
    }

    #[test]
    fn euclidean_examples() {
        let m = zoo::euclidean(3).unwrap();
        assert_eq!(weyl_acceleration(&m, &O, &E1, &E2).unwrap(), E2.to_vec());
        assert_eq!(weyl_acceleration(&m, &O, &E1, &E1).unwrap(), vec![-1.0, 0.0, 0.0]);
    }

    #[test]
    fn alpha_recovery_examples() {
        let m = zoo::euclidean(3).unwrap();
        assert_eq!(alpha_from_acceleration(&m, &O, &E1, &O).unwrap(), O.to_vec());
        assert_eq!(alpha_from_acceleration(&m, &O, &E1, &E2).unwrap(), E2.to_vec());
        assert_eq!(alpha_from_acceleration(&m, &O, &E1, &E1).unwrap(), vec![-1.0, 0.0, 0.0]);
    }

    #[test]
    fn null_velocity_rejected() {
        let m = zoo::minkowski(2, 1).unwrap();
        let v = [1.0, 1.0, 0.0];
        assert!(matches!(
            alpha_from_acceleration(&m, &O, &v, &E2),
            Err(Error::NullVelocity { .. })
        ));
    }
}
