//! Curve systems and the fixed-step integrator.
//!
//! Every system keeps position and velocity in the first `2n` slots of its
//! state, followed by a system-specific block of `n` entries.

mod rk4;

pub use rk4::{integrate, integrate_with, rk4_step, step_count, IntegrateOptions, OdeSystem, Trajectory};

use crate::geometry::{MetricField, PointGeometry};
use crate::weyl::{self, dot, NULL_THRESHOLD};
use crate::{Error, Result};

/// Coefficient of the `S(v, v) v` term in the covariant third-order
/// equation. It is the value produced by differentiating the coupled system.
pub const ODE3_TANGENTIAL_SCHOUTEN: f64 = 2.0;

fn names(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}{i}"))
}

fn split3(y: &[f64], n: usize) -> (&[f64], &[f64], &[f64]) {
    (&y[..n], &y[n..2 * n], &y[2 * n..3 * n])
}

/// Position, velocity and a Weyl 1-form along the curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalState {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub alpha: Vec<f64>,
}

/// Position, velocity and covariant acceleration `D_v v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet3State {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub acc: Vec<f64>,
}

/// Position, velocity and the projective 1-form `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveState {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
}

macro_rules! packed_state {
    ($ty:ident, $third:ident) => {
        impl $ty {
            pub fn new(x: Vec<f64>, v: Vec<f64>, $third: Vec<f64>) -> Self {
                $ty { x, v, $third }
            }

            pub fn dim(&self) -> usize {
                self.x.len()
            }

            pub fn to_vec(&self) -> Vec<f64> {
                [self.x.as_slice(), &self.v, &self.$third].concat()
            }

            pub fn from_slice(y: &[f64]) -> Self {
                let n = y.len() / 3;
                let (x, v, w) = split3(y, n);
                $ty {
                    x: x.to_vec(),
                    v: v.to_vec(),
                    $third: w.to_vec(),
                }
            }

            fn validate(&self, n: usize) -> Result<()> {
                Error::check_len("position", n, self.x.len())?;
                Error::check_len("velocity", n, self.v.len())?;
                Error::check_len(stringify!($third), n, self.$third.len())?;
                if self.to_vec().iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidArgument("non-finite initial state".into()));
                }
                Ok(())
            }
        }
    };
}

packed_state!(ConformalState, alpha);
packed_state!(Jet3State, acc);
packed_state!(ProjectiveState, u);

/// Weyl geodesic whose 1-form is parallel for the tractor connection:
///
/// ```text
/// dx/dt = v
/// dv/dt = −Γ(v,v) − 2 α(v) v + g(v,v) α♯
/// D_v α = S(v,·) − ½ g⁻¹(α,α) v♭ + α(v) α
/// ```
#[derive(Debug, Clone, Copy)]
pub struct ConformalCoupled<'a> {
    pub metric: &'a MetricField,
}

/// The third-order conformal geodesic equation written for `(x, v, A)`,
/// `A = D_v v`:
///
/// ```text
/// D_v A = −(3/2)|A|²/|v|² v + 3 g(A,v)/|v|² A + |v|² S(v,·)♯ − 2 S(v,v) v
/// ```
#[derive(Debug, Clone, Copy)]
pub struct ConformalOde3<'a> {
    pub metric: &'a MetricField,
}

/// Projective parabolic geodesic over the Levi-Civita connection:
///
/// ```text
/// dv/dt = −Γ(v,v) − 2 u(v) v
/// D_v u = P(v,·) + u(v) u
/// ```
#[derive(Debug, Clone, Copy)]
pub struct ProjectiveCoupled<'a> {
    pub metric: &'a MetricField,
}

/// Affinely parametrized metric geodesic.
#[derive(Debug, Clone, Copy)]
pub struct Geodesic<'a> {
    pub metric: &'a MetricField,
}

fn speed_diagnostic(m: &MetricField, y: &[f64]) -> Result<Vec<f64>> {
    let n = m.dim();
    let p = m.at(&y[..n])?;
    Ok(vec![p.inner(&y[n..2 * n], &y[n..2 * n])])
}

impl ConformalCoupled<'_> {
    /// State derivative at `s`.
    pub fn derivative(&self, s: &ConformalState) -> Result<ConformalState> {
        let n = self.metric.dim();
        s.validate(n)?;
        let mut dy = vec![0.0; 3 * n];
        self.rhs(0.0, &s.to_vec(), &mut dy)?;
        Ok(ConformalState::from_slice(&dy))
    }
}

impl OdeSystem for ConformalCoupled<'_> {
    fn len(&self) -> usize {
        3 * self.metric.dim()
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let n = self.metric.dim();
        let (x, v, alpha) = split3(y, n);
        let geo = PointGeometry::new(self.metric, x)?;
        let schouten = geo.schouten()?;
        let acc = weyl::acceleration_at(&geo, v, alpha);
        let transport = geo.christoffel.covector_term(v, alpha);
        let v_flat = geo.metric.flat(v);
        let alpha_sq = geo.metric.inner_dual(alpha, alpha);
        let av = dot(alpha, v);
        for i in 0..n {
            let s_v: f64 = (0..n).map(|j| schouten[(i, j)] * v[j]).sum();
            dy[i] = v[i];
            dy[n + i] = acc[i];
            dy[2 * n + i] = transport[i] + s_v - 0.5 * alpha_sq * v_flat[i] + av * alpha[i];
        }
        Ok(())
    }

    fn state_names(&self) -> Vec<String> {
        let n = self.metric.dim();
        names("x", n).chain(names("v", n)).chain(names("alpha", n)).collect()
    }

    fn diagnostic_names(&self) -> Vec<String> {
        vec!["g(v,v)".into()]
    }

    fn diagnostics(&self, _t: f64, y: &[f64]) -> Result<Vec<f64>> {
        speed_diagnostic(self.metric, y)
    }
}

impl ConformalOde3<'_> {
    pub fn derivative(&self, s: &Jet3State) -> Result<Jet3State> {
        let n = self.metric.dim();
        s.validate(n)?;
        let mut dy = vec![0.0; 3 * n];
        self.rhs(0.0, &s.to_vec(), &mut dy)?;
        Ok(Jet3State::from_slice(&dy))
    }
}

impl OdeSystem for ConformalOde3<'_> {
    fn len(&self) -> usize {
        3 * self.metric.dim()
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let n = self.metric.dim();
        let (x, v, acc) = split3(y, n);
        let geo = PointGeometry::new(self.metric, x)?;
        let g = &geo.metric;
        let vv = g.inner(v, v);
        if vv.abs() <= NULL_THRESHOLD {
            return Err(Error::NullVelocity { norm: vv.abs() });
        }
        let schouten = geo.schouten()?;
        let aa = g.inner(acc, acc);
        let av = g.inner(acc, v);
        let s_v: Vec<f64> = (0..n).map(|i| (0..n).map(|j| schouten[(i, j)] * v[j]).sum()).collect();
        let s_vv = dot(&s_v, v);
        let s_v_sharp = g.sharp(&s_v);
        let gamma_vv = geo.christoffel.contract(v, v);
        let gamma_va = geo.christoffel.contract(v, acc);
        for k in 0..n {
            let cov = -1.5 * aa / vv * v[k] + 3.0 * av / vv * acc[k] + vv * s_v_sharp[k]
                - ODE3_TANGENTIAL_SCHOUTEN * s_vv * v[k];
            dy[k] = v[k];
            dy[n + k] = acc[k] - gamma_vv[k];
            dy[2 * n + k] = cov - gamma_va[k];
        }
        Ok(())
    }

    fn state_names(&self) -> Vec<String> {
        let n = self.metric.dim();
        names("x", n).chain(names("v", n)).chain(names("A", n)).collect()
    }

    fn diagnostic_names(&self) -> Vec<String> {
        vec!["g(v,v)".into()]
    }

    fn diagnostics(&self, _t: f64, y: &[f64]) -> Result<Vec<f64>> {
        speed_diagnostic(self.metric, y)
    }
}

impl ProjectiveCoupled<'_> {
    pub fn derivative(&self, s: &ProjectiveState) -> Result<ProjectiveState> {
        let n = self.metric.dim();
        s.validate(n)?;
        let mut dy = vec![0.0; 3 * n];
        self.rhs(0.0, &s.to_vec(), &mut dy)?;
        Ok(ProjectiveState::from_slice(&dy))
    }
}

impl OdeSystem for ProjectiveCoupled<'_> {
    fn len(&self) -> usize {
        3 * self.metric.dim()
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let n = self.metric.dim();
        let (x, v, u) = split3(y, n);
        let geo = PointGeometry::new(self.metric, x)?;
        let rho = geo.projective_schouten();
        let gamma_vv = geo.christoffel.contract(v, v);
        let transport = geo.christoffel.covector_term(v, u);
        let uv = dot(u, v);
        for i in 0..n {
            let p_v: f64 = (0..n).map(|j| rho[(i, j)] * v[j]).sum();
            dy[i] = v[i];
            dy[n + i] = -gamma_vv[i] - 2.0 * uv * v[i];
            dy[2 * n + i] = transport[i] + p_v + uv * u[i];
        }
        Ok(())
    }

    fn state_names(&self) -> Vec<String> {
        let n = self.metric.dim();
        names("x", n).chain(names("v", n)).chain(names("u", n)).collect()
    }

    fn diagnostic_names(&self) -> Vec<String> {
        vec!["g(v,v)".into()]
    }

    fn diagnostics(&self, _t: f64, y: &[f64]) -> Result<Vec<f64>> {
        speed_diagnostic(self.metric, y)
    }
}

impl Geodesic<'_> {
    /// `(dx/dt, dv/dt)` at `(x, v)`.
    pub fn derivative(&self, x: &[f64], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.metric.dim();
        Error::check_len("position", n, x.len())?;
        Error::check_len("velocity", n, v.len())?;
        let mut dy = vec![0.0; 2 * n];
        self.rhs(0.0, &[x, v].concat(), &mut dy)?;
        Ok((dy[..n].to_vec(), dy[n..].to_vec()))
    }
}

impl OdeSystem for Geodesic<'_> {
    fn len(&self) -> usize {
        2 * self.metric.dim()
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let n = self.metric.dim();
        let (x, v) = (&y[..n], &y[n..2 * n]);
        let gamma = self
            .metric
            .at(x)
            .map(|p| crate::geometry::Christoffel::from_metric(&p))?;
        let gamma_vv = gamma.contract(v, v);
        for k in 0..n {
            dy[k] = v[k];
            dy[n + k] = -gamma_vv[k];
        }
        Ok(())
    }

    fn state_names(&self) -> Vec<String> {
        let n = self.metric.dim();
        names("x", n).chain(names("v", n)).collect()
    }

    fn diagnostic_names(&self) -> Vec<String> {
        vec!["g(v,v)".into()]
    }

    fn diagnostics(&self, _t: f64, y: &[f64]) -> Result<Vec<f64>> {
        speed_diagnostic(self.metric, y)
    }
}

/// Initial covariant acceleration matching coupled data:
/// `A0 = −2 α0(v0) v0 + g(v0, v0) α0♯`.
pub fn ode3_initial_from_coupled(m: &MetricField, s: &ConformalState) -> Result<Jet3State> {
    s.validate(m.dim())?;
    let p = m.at(&s.x)?;
    let vv = p.inner(&s.v, &s.v);
    let av = dot(&s.alpha, &s.v);
    let alpha_sharp = p.sharp(&s.alpha);
    let acc = (0..m.dim()).map(|k| -2.0 * av * s.v[k] + vv * alpha_sharp[k]).collect();
    Ok(Jet3State::new(s.x.clone(), s.v.clone(), acc))
}

/// Initial Weyl 1-form matching third-order data; fails for null `v0`.
pub fn coupled_initial_from_ode3(m: &MetricField, s: &Jet3State) -> Result<ConformalState> {
    s.validate(m.dim())?;
    let p = m.at(&s.x)?;
    let alpha = weyl::alpha_from_covariant(&p, &s.v, &s.acc)?;
    Ok(ConformalState::new(s.x.clone(), s.v.clone(), alpha))
}
