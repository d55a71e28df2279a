use nalgebra::DMatrix;

use super::{MetricAtPoint, MetricField};
use crate::{Error, Result};

/// Levi-Civita symbols `Γ^k_ij`, stored at `(k*n + i)*n + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn from_metric(m: &MetricAtPoint) -> Self {
        let n = m.dim();
        // first kind: Γ_lij = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
        let mut first = vec![0.0; n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in i..n {
                    let v = 0.5 * (m.dg(j, l, i) + m.dg(i, l, j) - m.dg(i, j, l));
                    first[(l * n + i) * n + j] = v;
                    first[(l * n + j) * n + i] = v;
                }
            }
        }
        let mut data = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let v: f64 = (0..n).map(|l| m.g_inv[(k, l)] * first[(l * n + i) * n + j]).sum();
                    data[(k * n + i) * n + j] = v;
                    data[(k * n + j) * n + i] = v;
                }
            }
        }
        Christoffel { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    /// `Γ^k_ij u^i w^j`.
    pub fn contract(&self, u: &[f64], w: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += self.get(k, i, j) * u[i] * w[j];
                    }
                }
                s
            })
            .collect()
    }

    /// `Γ^k_ij v^j α_k`, the connection term in `d/dt α_i` for a covector
    /// carried by `D_v α = 0`.
    pub fn covector_term(&self, v: &[f64], alpha: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut s = 0.0;
                for k in 0..n {
                    for j in 0..n {
                        s += self.get(k, i, j) * v[j] * alpha[k];
                    }
                }
                s
            })
            .collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Riemann tensor `R^l_ijk` (the components of `R(∂_j, ∂_k)∂_i`), stored at
/// `((l*n + i)*n + j)*n + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Riemann {
    n: usize,
    data: Vec<f64>,
}

impl Riemann {
    #[inline]
    pub fn get(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        let n = self.n;
        self.data[((l * n + i) * n + j) * n + k]
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

/// Everything the curve systems need at one point: metric data, Christoffel
/// symbols and curvature.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub metric: MetricAtPoint,
    pub christoffel: Christoffel,
    pub riemann: Riemann,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
}

impl PointGeometry {
    pub fn new(field: &MetricField, x: &[f64]) -> Result<Self> {
        let metric = field.at(x)?;
        Ok(Self::from_metric(metric))
    }

    pub fn from_metric(metric: MetricAtPoint) -> Self {
        let n = metric.dim();
        let christoffel = Christoffel::from_metric(&metric);
        let dgamma = christoffel_derivatives(&metric, &christoffel);
        let dg = |m: usize, k: usize, i: usize, j: usize| dgamma[((m * n + k) * n + i) * n + j];
        let gam = |k: usize, i: usize, j: usize| christoffel.get(k, i, j);

        // R^l_ijk = ∂_j Γ^l_ki − ∂_k Γ^l_ji + Γ^l_jm Γ^m_ki − Γ^l_km Γ^m_ji
        let mut riemann = vec![0.0; n * n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for k in (j + 1)..n {
                        let mut quad = 0.0;
                        for m in 0..n {
                            quad += gam(l, j, m) * gam(m, k, i) - gam(l, k, m) * gam(m, j, i);
                        }
                        let v = (dg(j, l, k, i) - dg(k, l, j, i)) + quad;
                        riemann[((l * n + i) * n + j) * n + k] = v;
                        riemann[((l * n + i) * n + k) * n + j] = -v;
                    }
                }
            }
        }
        let riemann = Riemann { n, data: riemann };

        let ricci = DMatrix::from_fn(n, n, |i, j| (0..n).map(|k| riemann.get(k, i, k, j)).sum());
        let scalar = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| metric.g_inv[(i, j)] * ricci[(i, j)])
            .sum();

        PointGeometry {
            metric,
            christoffel,
            riemann,
            ricci,
            scalar,
        }
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    fn symmetric_ricci(&self) -> DMatrix<f64> {
        (&self.ricci + self.ricci.transpose()) * 0.5
    }

    /// `S = (Ric − Scal/(2(n−1)) g) / (n−2)`.
    pub fn schouten(&self) -> Result<DMatrix<f64>> {
        let n = self.dim();
        if n < 3 {
            return Err(Error::SchoutenUndefined { dim: n });
        }
        let nf = n as f64;
        let trace_part = &self.metric.g * (self.scalar / (2.0 * (nf - 1.0)));
        Ok((self.symmetric_ricci() - trace_part) / (nf - 2.0))
    }

    /// Projective Schouten tensor of the Levi-Civita connection, `Ric/(n−1)`.
    pub fn projective_schouten(&self) -> DMatrix<f64> {
        self.symmetric_ricci() / (self.dim() as f64 - 1.0)
    }
}

/// `∂_m Γ^k_ij`, stored at `((m*n + k)*n + i)*n + j`.
fn christoffel_derivatives(m: &MetricAtPoint, gamma: &Christoffel) -> Vec<f64> {
    let n = m.dim();
    // ∂_m Γ_lij = ½(∂_m∂_i g_jl + ∂_m∂_j g_il − ∂_m∂_l g_ij)
    // ∂_m Γ^k_ij = g^{kl}(∂_m Γ_lij − ∂_m g_la Γ^a_ij)
    let mut out = vec![0.0; n * n * n * n];
    let mut inner = vec![0.0; n];
    for mm in 0..n {
        for i in 0..n {
            for j in i..n {
                for (l, slot) in inner.iter_mut().enumerate() {
                    let d_first = 0.5 * (m.d2g(j, l, i, mm) + m.d2g(i, l, j, mm) - m.d2g(i, j, l, mm));
                    let correction: f64 = (0..n).map(|a| m.dg(l, a, mm) * gamma.get(a, i, j)).sum();
                    *slot = d_first - correction;
                }
                for k in 0..n {
                    let v: f64 = (0..n).map(|l| m.g_inv[(k, l)] * inner[l]).sum();
                    out[((mm * n + k) * n + i) * n + j] = v;
                    out[((mm * n + k) * n + j) * n + i] = v;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::zoo;

    #[test]
    fn flat_space_has_no_curvature() {
        let g = zoo::euclidean(3).unwrap().at(&[1.0, 2.0, 3.0]).unwrap();
        let pg = super::PointGeometry::from_metric(g);
        assert!(pg.christoffel.as_slice().iter().all(|c| *c == 0.0));
        assert!(pg.ricci.iter().all(|c| *c == 0.0));
        assert_eq!(pg.scalar, 0.0);
        assert!(pg.schouten().unwrap().iter().all(|c| *c == 0.0));
        assert!(pg.projective_schouten().iter().all(|c| *c == 0.0));
    }

    #[test]
    fn half_plane_christoffels() {
        let gam = zoo::hyperbolic_halfspace(2).unwrap().christoffel(&[0.0, 1.0]).unwrap();
        assert!((gam.get(0, 0, 1) + 1.0).abs() < 1e-14);
        assert!((gam.get(0, 1, 0) + 1.0).abs() < 1e-14);
        assert!((gam.get(1, 0, 0) - 1.0).abs() < 1e-14);
        assert!((gam.get(1, 1, 1) + 1.0).abs() < 1e-14);
        assert_eq!(gam.get(0, 0, 0), 0.0);
    }

    #[test]
    fn schouten_needs_three_dimensions() {
        let m = zoo::sphere_stereographic(2).unwrap();
        assert!(matches!(
            m.schouten(&[0.0, 0.0]),
            Err(crate::Error::SchoutenUndefined { dim: 2 })
        ));
        // the projective tensor exists in dimension 2: Ric = g on the unit sphere
        let p = m.projective_schouten(&[0.2, 0.1]).unwrap();
        let g = m.at(&[0.2, 0.1]).unwrap().g;
        assert!((p - g).abs().max() < 1e-12);
    }
}
