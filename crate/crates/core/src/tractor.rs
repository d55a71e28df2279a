//! Standard conformal tractors in the splitting `1 ⊕ T*M ⊕ 1` induced by a
//! metric `g`.
//!
//! A tractor is a triple `u = (λ, α, μ)`. The tractor metric is
//! `H(u, u) = g⁻¹(α, α) − 2 λ μ` and the tractor connection is
//!
//! ```text
//! D_X u = ( dλ(X) + S(α♯, X),
//!           D_X α − λ g(X, ·) + μ S(X, ·),
//!           dμ(X) − α(X) )
//! ```
//! with `S` the Schouten tensor of `g`.

use nalgebra::DMatrix;

use crate::curves::{rk4_step, OdeSystem, Trajectory};
use crate::geometry::{MetricField, PointGeometry};
use crate::weyl::dot;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tractor {
    pub lambda: f64,
    pub alpha: Vec<f64>,
    pub mu: f64,
}

impl Tractor {
    pub fn new(lambda: f64, alpha: Vec<f64>, mu: f64) -> Self {
        Tractor { lambda, alpha, mu }
    }

    pub fn zero(n: usize) -> Self {
        Tractor::new(0.0, vec![0.0; n], 0.0)
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// Flat layout `[λ, α_1..α_n, μ]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim() + 2);
        out.push(self.lambda);
        out.extend_from_slice(&self.alpha);
        out.push(self.mu);
        out
    }

    pub fn from_slice(y: &[f64]) -> Self {
        let n = y.len() - 2;
        Tractor::new(y[0], y[1..=n].to_vec(), y[n + 1])
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Tractor, b: f64) -> Tractor {
        Tractor::new(
            a * self.lambda + b * other.lambda,
            self.alpha
                .iter()
                .zip(&other.alpha)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            a * self.mu + b * other.mu,
        )
    }
}

/// `H(u, w) = g⁻¹(α_u, α_w) − λ_u μ_w − λ_w μ_u` with a precomputed inverse
/// metric.
pub fn metric_with(g_inv: &DMatrix<f64>, u: &Tractor, w: &Tractor) -> f64 {
    crate::geometry::bilinear(g_inv, &u.alpha, &w.alpha) - u.lambda * w.mu - w.lambda * u.mu
}

/// Tractor metric `H(u, w)` at `x`.
pub fn tractor_metric(m: &MetricField, x: &[f64], u: &Tractor, w: &Tractor) -> Result<f64> {
    Error::check_len("tractor", m.dim(), u.dim())?;
    Error::check_len("tractor", m.dim(), w.dim())?;
    Ok(metric_with(&m.at(x)?.g_inv, u, w))
}

fn schouten_times(s: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| (0..n).map(|j| s[(i, j)] * v[j]).sum()).collect()
}

/// Covariant derivative `D_X u` given the component derivatives `du` of `u`
/// along `X` (i.e. `dλ(X)`, `d/dt α_i`, `dμ(X)`).
pub fn tractor_derivative(m: &MetricField, x: &[f64], dir: &[f64], u: &Tractor, du: &Tractor) -> Result<Tractor> {
    let n = m.dim();
    Error::check_len("direction", n, dir.len())?;
    Error::check_len("tractor", n, u.dim())?;
    Error::check_len("tractor derivative", n, du.dim())?;
    let geo = PointGeometry::new(m, x)?;
    let s = geo.schouten()?;
    let s_x = schouten_times(&s, dir);
    let alpha_sharp = geo.metric.sharp(&u.alpha);
    let x_flat = geo.metric.flat(dir);
    let conn = geo.christoffel.covector_term(dir, &u.alpha);
    Ok(Tractor::new(
        du.lambda + dot(&alpha_sharp, &s_x),
        (0..n)
            .map(|i| du.alpha[i] - conn[i] - u.lambda * x_flat[i] + u.mu * s_x[i])
            .collect(),
        du.mu - dot(&u.alpha, dir),
    ))
}

/// Component derivative of a tractor parallel along velocity `v`.
pub fn parallel_rhs(geo: &PointGeometry, schouten: &DMatrix<f64>, v: &[f64], u: &[f64], du: &mut [f64]) {
    let n = v.len();
    let (lambda, alpha, mu) = (u[0], &u[1..=n], u[n + 1]);
    let s_v = schouten_times(schouten, v);
    let alpha_sharp = geo.metric.sharp(alpha);
    let v_flat = geo.metric.flat(v);
    let conn = geo.christoffel.covector_term(v, alpha);
    du[0] = -dot(&alpha_sharp, &s_v);
    for i in 0..n {
        du[1 + i] = conn[i] + lambda * v_flat[i] - mu * s_v[i];
    }
    du[n + 1] = dot(alpha, v);
}

/// Position and velocity samples of a curve, interpolated by cubic Hermite
/// polynomials so that `dx/dt = v` holds exactly between samples.
#[derive(Debug, Clone)]
pub struct CurveSamples {
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
}

impl CurveSamples {
    /// Take positions and velocities from the first `2n` state slots.
    pub fn from_trajectory(tr: &Trajectory, n: usize) -> Result<Self> {
        if tr.len() < 2 {
            return Err(Error::InvalidArgument("curve needs at least two samples".into()));
        }
        if tr.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("curve times must increase".into()));
        }
        for s in &tr.states {
            if s.len() < 2 * n {
                return Err(Error::DimensionMismatch {
                    what: "curve state",
                    expected: 2 * n,
                    actual: s.len(),
                });
            }
        }
        Ok(CurveSamples {
            times: tr.times.clone(),
            positions: tr.states.iter().map(|s| s[..n].to_vec()).collect(),
            velocities: tr.states.iter().map(|s| s[n..2 * n].to_vec()).collect(),
        })
    }

    fn segment(&self, t: f64) -> usize {
        let i = self.times.partition_point(|s| *s <= t);
        i.saturating_sub(1).min(self.times.len() - 2)
    }

    /// Interpolated `(x(t), v(t))`.
    pub fn eval(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let i = self.segment(t);
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let dt = t1 - t0;
        let s = (t - t0) / dt;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let d00 = 6.0 * s2 - 6.0 * s;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = -d00;
        let d11 = 3.0 * s2 - 2.0 * s;
        let (x0, x1) = (&self.positions[i], &self.positions[i + 1]);
        let (v0, v1) = (&self.velocities[i], &self.velocities[i + 1]);
        let x = (0..x0.len())
            .map(|k| h00 * x0[k] + h10 * dt * v0[k] + h01 * x1[k] + h11 * dt * v1[k])
            .collect();
        let v = (0..x0.len())
            .map(|k| (d00 * x0[k] + d01 * x1[k]) / dt + d10 * v0[k] + d11 * v1[k])
            .collect();
        (x, v)
    }
}

struct TransportSystem<'a> {
    metric: &'a MetricField,
    curve: &'a CurveSamples,
}

impl OdeSystem for TransportSystem<'_> {
    fn len(&self) -> usize {
        self.metric.dim() + 2
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let (x, v) = self.curve.eval(t);
        let geo = PointGeometry::new(self.metric, &x)?;
        let s = geo.schouten()?;
        parallel_rhs(&geo, &s, &v, y, dy);
        Ok(())
    }
}

/// Transported tractors, one per curve sample, with `H(u(t), u(t))`.
#[derive(Debug, Clone)]
pub struct TransportPath {
    pub times: Vec<f64>,
    pub tractors: Vec<Tractor>,
    pub h_values: Vec<f64>,
    pub error_estimate: f64,
}

impl TransportPath {
    pub fn max_h_drift(&self) -> f64 {
        let h0 = self.h_values[0];
        self.h_values.iter().fold(0.0, |m, h| m.max((h - h0).abs()))
    }
}

fn transport_run(sys: &TransportSystem, u0: &[f64], grid: &[usize]) -> Result<Vec<Vec<f64>>> {
    let times = &sys.curve.times;
    let mut out = vec![u0.to_vec()];
    let mut next = vec![0.0; u0.len()];
    for w in grid.windows(2) {
        let (t0, t1) = (times[w[0]], times[w[1]]);
        let cur = out.last().expect("initial tractor");
        rk4_step(sys, t0, cur, t1 - t0, &mut next)?;
        out.push(next.clone());
    }
    Ok(out)
}

/// Integrate `D_{γ'} u = 0` with one RK4 step per curve interval.
///
/// The step-doubling estimate compares against a run over every other
/// sample; when `tolerance` is given and the estimate exceeds it the grid is
/// rejected as too coarse.
pub fn parallel_transport(
    m: &MetricField,
    curve: &CurveSamples,
    u0: &Tractor,
    tolerance: Option<f64>,
) -> Result<TransportPath> {
    let n = m.dim();
    Error::check_len("tractor", n, u0.dim())?;
    if curve.times.len() < 2 {
        return Err(Error::InvalidArgument("curve needs at least two samples".into()));
    }
    let sys = TransportSystem { metric: m, curve };
    let samples = curve.times.len();
    let fine_grid: Vec<usize> = (0..samples).collect();
    let mut coarse_grid: Vec<usize> = (0..samples).step_by(2).collect();
    if *coarse_grid.last().expect("non-empty") != samples - 1 {
        coarse_grid.push(samples - 1);
    }
    let fine = transport_run(&sys, &u0.to_vec(), &fine_grid)?;
    let coarse = transport_run(&sys, &u0.to_vec(), &coarse_grid)?;
    let error_estimate = fine
        .last()
        .expect("final tractor")
        .iter()
        .zip(coarse.last().expect("final tractor"))
        .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
        / 15.0;
    if let Some(tol) = tolerance {
        if error_estimate > tol {
            return Err(Error::StepTooCoarse {
                estimate: error_estimate,
                tolerance: tol,
            });
        }
    }
    let tractors: Vec<Tractor> = fine.iter().map(|y| Tractor::from_slice(y)).collect();
    let h_values = tractors
        .iter()
        .zip(&curve.positions)
        .map(|(u, x)| Ok(metric_with(&m.at(x)?.g_inv, u, u)))
        .collect::<Result<Vec<_>>>()?;
    Ok(TransportPath {
        times: curve.times.clone(),
        tractors,
        h_values,
        error_estimate,
    })
}
