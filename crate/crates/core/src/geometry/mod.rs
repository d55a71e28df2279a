//! Metrics given by coordinate expressions and the tensors derived from them.

mod curvature;
pub mod zoo;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::expr::Expr;
use crate::{Error, Result};

pub use curvature::{Christoffel, PointGeometry, Riemann};

/// Eigenvalues below this magnitude count as zero when checking the metric.
pub const DEGENERACY_THRESHOLD: f64 = 1e-10;

/// Metric signature: `positive` plus and `negative` minus signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
}

impl Signature {
    pub fn new(positive: usize, negative: usize) -> Self {
        Signature { positive, negative }
    }

    pub fn riemannian(n: usize) -> Self {
        Signature::new(n, 0)
    }

    pub fn dim(&self) -> usize {
        self.positive + self.negative
    }
}

/// A pseudo-Riemannian metric `g_ij(x)` given componentwise by expressions.
///
/// Only the upper triangle is stored, so symmetry holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    dim: usize,
    signature: Signature,
    upper: Vec<Expr>,
}

fn packed(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl MetricField {
    /// Build from a full `n x n` array; mirrored entries must be identical
    /// expressions.
    pub fn from_matrix(signature: Signature, rows: Vec<Vec<Expr>>) -> Result<Self> {
        let n = rows.len();
        for row in &rows {
            Error::check_len("metric row", n, row.len())?;
        }
        for i in 0..n {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::InvalidArgument(format!(
                        "metric components ({},{}) and ({},{}) differ",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        let upper_rows = rows
            .into_iter()
            .enumerate()
            .map(|(i, row)| row.into_iter().skip(i).collect())
            .collect();
        Self::from_upper_triangle(signature, upper_rows)
    }

    /// Build from rows of the upper triangle: row `i` holds `g_ii .. g_in`.
    pub fn from_upper_triangle(signature: Signature, rows: Vec<Vec<Expr>>) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::InvalidArgument(format!("metric dimension {n} < 2")));
        }
        if signature.dim() != n {
            return Err(Error::InvalidArgument(format!(
                "signature ({},{}) does not match dimension {n}",
                signature.positive, signature.negative
            )));
        }
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for (i, row) in rows.into_iter().enumerate() {
            Error::check_len("upper-triangle metric row", n - i, row.len())?;
            for e in row {
                if e.dim() != n {
                    return Err(Error::DimensionMismatch {
                        what: "metric component dimension",
                        expected: n,
                        actual: e.dim(),
                    });
                }
                upper.push(e);
            }
        }
        Ok(MetricField {
            dim: n,
            signature,
            upper,
        })
    }

    /// Diagonal metric from its diagonal entries.
    pub fn diagonal(signature: Signature, diag: Vec<Expr>) -> Result<Self> {
        let n = diag.len();
        let rows = diag
            .into_iter()
            .enumerate()
            .map(|(i, d)| {
                let mut row = vec![d];
                row.extend((i + 1..n).map(|_| Expr::constant(0.0, n)));
                row
            })
            .collect();
        Self::from_upper_triangle(signature, rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.upper[packed(self.dim, i, j)]
    }

    /// The metric `e^{2f} g` in the same coordinates.
    pub fn conformally_rescaled(&self, f: &Expr) -> Result<Self> {
        let f = f.with_dim(self.dim)?;
        let factor = Expr::call(crate::expr::Func::Exp, Expr::constant(2.0, self.dim) * f);
        Ok(MetricField {
            dim: self.dim,
            signature: self.signature,
            upper: self.upper.iter().map(|c| factor.clone() * c.clone()).collect(),
        })
    }

    /// Metric, inverse, and first and second coordinate derivatives at `x`.
    pub fn at(&self, x: &[f64]) -> Result<MetricAtPoint> {
        let n = self.dim;
        Error::check_len("point", n, x.len())?;
        let mut g = DMatrix::zeros(n, n);
        let mut dg = vec![0.0; n * n * n];
        let mut d2g = vec![0.0; n * n * n * n];
        for i in 0..n {
            for j in i..n {
                let jet = self.component(i, j).eval_jet2(x)?;
                g[(i, j)] = jet.value;
                g[(j, i)] = jet.value;
                for k in 0..n {
                    dg[(i * n + j) * n + k] = jet.grad[k];
                    dg[(j * n + i) * n + k] = jet.grad[k];
                    for l in 0..n {
                        let h = jet.hess(k, l);
                        d2g[((i * n + j) * n + k) * n + l] = h;
                        d2g[((j * n + i) * n + k) * n + l] = h;
                    }
                }
            }
        }

        let eig = SymmetricEigen::new(g.clone());
        let min_abs = eig.eigenvalues.iter().fold(f64::INFINITY, |m, e| m.min(e.abs()));
        if min_abs < DEGENERACY_THRESHOLD {
            return Err(Error::DegenerateMetric {
                x: x.to_vec(),
                min_abs_eigenvalue: min_abs,
            });
        }
        let found_p = eig.eigenvalues.iter().filter(|e| **e > 0.0).count();
        let found_q = n - found_p;
        if found_p != self.signature.positive {
            return Err(Error::SignatureMismatch {
                x: x.to_vec(),
                expected_p: self.signature.positive,
                expected_q: self.signature.negative,
                found_p,
                found_q,
            });
        }
        let g_inv = g.clone().try_inverse().ok_or_else(|| Error::DegenerateMetric {
            x: x.to_vec(),
            min_abs_eigenvalue: min_abs,
        })?;
        // Symmetrize away the rounding asymmetry of the LU inverse.
        let g_inv = (&g_inv + g_inv.transpose()) * 0.5;

        Ok(MetricAtPoint {
            x: x.to_vec(),
            g,
            g_inv,
            dg,
            d2g,
        })
    }

    pub fn christoffel(&self, x: &[f64]) -> Result<Christoffel> {
        Ok(Christoffel::from_metric(&self.at(x)?))
    }

    pub fn riemann(&self, x: &[f64]) -> Result<Riemann> {
        Ok(PointGeometry::new(self, x)?.riemann)
    }

    pub fn ricci(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(PointGeometry::new(self, x)?.ricci)
    }

    pub fn scalar_curvature(&self, x: &[f64]) -> Result<f64> {
        Ok(PointGeometry::new(self, x)?.scalar)
    }

    pub fn schouten(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        PointGeometry::new(self, x)?.schouten()
    }

    pub fn projective_schouten(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(PointGeometry::new(self, x)?.projective_schouten())
    }

    pub fn sharp(&self, x: &[f64], covector: &[f64]) -> Result<Vec<f64>> {
        Error::check_len("covector", self.dim, covector.len())?;
        Ok(self.at(x)?.sharp(covector))
    }

    pub fn flat(&self, x: &[f64], vector: &[f64]) -> Result<Vec<f64>> {
        Error::check_len("vector", self.dim, vector.len())?;
        Ok(self.at(x)?.flat(vector))
    }
}

/// The metric and its derivatives at one point.
#[derive(Debug, Clone)]
pub struct MetricAtPoint {
    pub x: Vec<f64>,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// `dg[(i*n + j)*n + k] = ∂_k g_ij`
    pub dg: Vec<f64>,
    /// `d2g[((i*n + j)*n + k)*n + l] = ∂_l ∂_k g_ij`
    pub d2g: Vec<f64>,
}

impl MetricAtPoint {
    pub fn dim(&self) -> usize {
        self.x.len()
    }

    #[inline]
    pub fn dg(&self, i: usize, j: usize, k: usize) -> f64 {
        let n = self.dim();
        self.dg[(i * n + j) * n + k]
    }

    #[inline]
    pub fn d2g(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.dim();
        self.d2g[((i * n + j) * n + k) * n + l]
    }

    /// `g(u, w)` for vectors.
    pub fn inner(&self, u: &[f64], w: &[f64]) -> f64 {
        bilinear(&self.g, u, w)
    }

    /// `g^{-1}(a, b)` for covectors.
    pub fn inner_dual(&self, a: &[f64], b: &[f64]) -> f64 {
        bilinear(&self.g_inv, a, b)
    }

    pub fn sharp(&self, covector: &[f64]) -> Vec<f64> {
        contract(&self.g_inv, covector)
    }

    pub fn flat(&self, vector: &[f64]) -> Vec<f64> {
        contract(&self.g, vector)
    }
}

/// `uᵀ M w`.
pub fn bilinear(m: &DMatrix<f64>, u: &[f64], w: &[f64]) -> f64 {
    let n = u.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += m[(i, j)] * u[i] * w[j];
        }
    }
    s
}

pub(crate) fn contract(m: &DMatrix<f64>, u: &[f64]) -> Vec<f64> {
    let n = u.len();
    (0..n).map(|i| (0..n).map(|j| m[(i, j)] * u[j]).sum()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exprs(n: usize, texts: &[&str]) -> Vec<Expr> {
        texts.iter().map(|t| Expr::parse(t, n).unwrap()).collect()
    }

    #[test]
    fn euclidean_has_trivial_jets() {
        let m = zoo::euclidean(3).unwrap();
        let p = m.at(&[0.3, -1.0, 2.0]).unwrap();
        assert_eq!(p.g, DMatrix::identity(3, 3));
        assert!(p.dg.iter().all(|d| *d == 0.0));
        assert!(p.d2g.iter().all(|d| *d == 0.0));
    }

    #[test]
    fn half_plane_derivative() {
        let m = zoo::hyperbolic_halfspace(2).unwrap();
        let p = m.at(&[0.0, 1.0]).unwrap();
        assert_eq!(p.g, DMatrix::identity(2, 2));
        assert_eq!(p.dg(0, 0, 1), -2.0);
    }

    #[test]
    fn stereographic_sphere_at_origin() {
        let m = zoo::sphere_stereographic(3).unwrap();
        let p = m.at(&[0.0; 3]).unwrap();
        assert_eq!(p.g, DMatrix::identity(3, 3) * 4.0);
    }

    #[test]
    fn sharp_and_flat() {
        let e = zoo::euclidean(3).unwrap();
        assert_eq!(e.sharp(&[0.0; 3], &[1.0, 0.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0]);
        let four = MetricField::diagonal(Signature::riemannian(3), exprs(3, &["4", "4", "4"])).unwrap();
        assert_eq!(four.sharp(&[0.0; 3], &[4.0, 0.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0]);
        let mink = zoo::minkowski(2, 1).unwrap();
        assert_eq!(mink.sharp(&[0.0; 3], &[1.0, 0.0, 0.0]).unwrap(), vec![-1.0, 0.0, 0.0]);
    }

    #[test]
    fn degenerate_and_signature_errors() {
        let m = MetricField::diagonal(Signature::riemannian(2), exprs(2, &["x1", "1"])).unwrap();
        assert!(matches!(m.at(&[0.0, 0.0]), Err(Error::DegenerateMetric { .. })));
        assert!(matches!(
            m.at(&[-1.0, 0.0]),
            Err(Error::SignatureMismatch { found_p: 1, .. })
        ));
        assert!(m.at(&[1.0, 0.0]).is_ok());
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let rows = vec![exprs(2, &["1", "x1"]), exprs(2, &["x2", "1"])];
        assert!(MetricField::from_matrix(Signature::riemannian(2), rows).is_err());
        let rows = vec![exprs(2, &["1", "0.1*x1"]), exprs(2, &["0.1*x1", "1"])];
        let m = MetricField::from_matrix(Signature::riemannian(2), rows).unwrap();
        assert_eq!(m.at(&[1.0, 0.0]).unwrap().g[(1, 0)], 0.1);
    }

    #[test]
    fn signature_dimension_checked() {
        assert!(MetricField::diagonal(Signature::new(2, 0), exprs(3, &["1", "1", "1"])).is_err());
    }
}
