use crate::{Error, Result};

/// A first-order system `dy/dt = f(t, y)` on a flat state vector.
pub trait OdeSystem {
    /// Length of the state vector.
    fn len(&self) -> usize;

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;

    /// Column names of the state vector, used for trajectory output.
    fn state_names(&self) -> Vec<String> {
        (1..=self.len()).map(|i| format!("y{i}")).collect()
    }

    fn diagnostic_names(&self) -> Vec<String> {
        Vec::new()
    }

    fn diagnostics(&self, _t: f64, _y: &[f64]) -> Result<Vec<f64>> {
        Ok(Vec::new())
    }
}

/// Samples of an integrated system.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub state_names: Vec<String>,
    pub diagnostic_names: Vec<String>,
    pub diagnostics: Vec<Vec<f64>>,
    /// Step-doubling estimate of the global error at the final time.
    pub error_estimate: Option<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("trajectory has at least one sample")
    }

    /// The `[start, start + n)` slice of sample `i`.
    pub fn block(&self, i: usize, start: usize, n: usize) -> &[f64] {
        &self.states[i][start..start + n]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    /// Record every `stride`-th step; the final step is always recorded.
    pub stride: usize,
    /// Also integrate at twice the step and report the difference.
    pub step_doubling: bool,
    /// Fail when the step-doubling estimate exceeds this.
    pub tolerance: Option<f64>,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            stride: 1,
            step_doubling: false,
            tolerance: None,
        }
    }
}

/// Number of uniform steps of size at most `h` covering `[t0, t1]`.
pub fn step_count(t0: f64, t1: f64, h: f64) -> usize {
    let span = (t1 - t0).abs();
    ((span / h) - 1e-9).ceil().max(1.0) as usize
}

/// One classical RK4 step.
pub fn rk4_step<S: OdeSystem + ?Sized>(sys: &S, t: f64, y: &[f64], h: f64, out: &mut [f64]) -> Result<()> {
    let n = y.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let wrap = |t: f64| move |e: Error| Error::Integration { t, source: Box::new(e) };

    sys.rhs(t, y, &mut k1).map_err(wrap(t))?;
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    sys.rhs(t + 0.5 * h, &tmp, &mut k2).map_err(wrap(t + 0.5 * h))?;
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    sys.rhs(t + 0.5 * h, &tmp, &mut k3).map_err(wrap(t + 0.5 * h))?;
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    sys.rhs(t + h, &tmp, &mut k4).map_err(wrap(t + h))?;
    for i in 0..n {
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t: t + h });
    }
    Ok(())
}

fn run<S: OdeSystem + ?Sized>(
    sys: &S,
    y0: &[f64],
    t0: f64,
    t1: f64,
    steps: usize,
    stride: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let h = (t1 - t0) / steps as f64;
    let mut times = vec![t0];
    let mut states = vec![y0.to_vec()];
    let mut y = y0.to_vec();
    let mut next = vec![0.0; y.len()];
    for step in 0..steps {
        let t = t0 + step as f64 * h;
        rk4_step(sys, t, &y, h, &mut next)?;
        std::mem::swap(&mut y, &mut next);
        let done = step + 1;
        if done == steps || done % stride == 0 {
            times.push(if done == steps { t1 } else { t0 + done as f64 * h });
            states.push(y.clone());
        }
    }
    Ok((times, states))
}

/// Fixed-step RK4 from `t0` to `t1` with step at most `h`.
pub fn integrate<S: OdeSystem + ?Sized>(sys: &S, y0: &[f64], t0: f64, t1: f64, h: f64) -> Result<Trajectory> {
    integrate_with(sys, y0, t0, t1, h, &IntegrateOptions::default())
}

/// [`integrate`] with sampling and error-estimate options.
///
/// The grid is uniform with `ceil(|t1 − t0| / h)` steps; `t1 < t0`
/// integrates backward.
pub fn integrate_with<S: OdeSystem + ?Sized>(
    sys: &S,
    y0: &[f64],
    t0: f64,
    t1: f64,
    h: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    Error::check_len("initial state", sys.len(), y0.len())?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step {h} must be positive")));
    }
    if !(t0.is_finite() && t1.is_finite()) || t0 == t1 {
        return Err(Error::InvalidArgument(format!("empty time span [{t0}, {t1}]")));
    }
    if opts.stride == 0 {
        return Err(Error::InvalidArgument("sample stride must be positive".into()));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t: t0 });
    }

    let steps = step_count(t0, t1, h);
    let (times, states) = run(sys, y0, t0, t1, steps, opts.stride)?;

    let error_estimate = if opts.step_doubling || opts.tolerance.is_some() {
        let coarse_steps = steps.div_ceil(2);
        let (_, coarse) = run(sys, y0, t0, t1, coarse_steps, coarse_steps)?;
        let fine = states.last().expect("final sample");
        let diff = fine
            .iter()
            .zip(coarse.last().expect("final sample"))
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        Some(diff / 15.0)
    } else {
        None
    };
    if let (Some(est), Some(tol)) = (error_estimate, opts.tolerance) {
        if est > tol {
            return Err(Error::StepTooCoarse {
                estimate: est,
                tolerance: tol,
            });
        }
    }

    let diagnostics = times
        .iter()
        .zip(&states)
        .map(|(t, y)| sys.diagnostics(*t, y))
        .collect::<Result<Vec<_>>>()?;

    Ok(Trajectory {
        times,
        states,
        state_names: sys.state_names(),
        diagnostic_names: sys.diagnostic_names(),
        diagnostics,
        error_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Growth;
    impl OdeSystem for Growth {
        fn len(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
            dy[0] = y[0];
            Ok(())
        }
    }

    struct Rotation;
    impl OdeSystem for Rotation {
        fn len(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
            dy[0] = -y[1];
            dy[1] = y[0];
            Ok(())
        }
    }

    struct Blowup;
    impl OdeSystem for Blowup {
        fn len(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
            dy[0] = y[0] * y[0] * 1e200;
            Ok(())
        }
    }

    struct Failing;
    impl OdeSystem for Failing {
        fn len(&self) -> usize {
            1
        }
        fn rhs(&self, t: f64, _y: &[f64], dy: &mut [f64]) -> Result<()> {
            if t > 0.5 {
                return Err(Error::InvalidArgument("past the wall".into()));
            }
            dy[0] = 1.0;
            Ok(())
        }
    }

    #[test]
    fn exponential_growth() {
        let tr = integrate(&Growth, &[1.0], 0.0, 1.0, 1e-3).unwrap();
        assert!((tr.last_state()[0] - std::f64::consts::E).abs() <= 1e-9);
        assert_eq!(tr.len(), 1001);
        assert_eq!(*tr.times.last().unwrap(), 1.0);
    }

    #[test]
    fn rotation_returns_after_a_period() {
        let tau = 2.0 * std::f64::consts::PI;
        let tr = integrate(&Rotation, &[1.0, 0.0], 0.0, tau, 1e-3).unwrap();
        let y = tr.last_state();
        assert!((y[0] - 1.0).abs() <= 1e-8 && y[1].abs() <= 1e-8);
    }

    #[test]
    fn stride_keeps_endpoints() {
        let opts = IntegrateOptions {
            stride: 300,
            ..Default::default()
        };
        let tr = integrate_with(&Growth, &[1.0], 0.0, 1.0, 1e-3, &opts).unwrap();
        assert_eq!(tr.times.len(), 5);
        assert_eq!(tr.times[0], 0.0);
        assert_eq!(tr.times[4], 1.0);
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn backward_integration() {
        let tr = integrate(&Growth, &[1.0], 1.0, 0.0, 1e-3).unwrap();
        assert!((tr.last_state()[0] - (-1.0_f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn invalid_arguments() {
        assert!(integrate(&Growth, &[1.0], 0.0, 1.0, 0.0).is_err());
        assert!(integrate(&Growth, &[1.0], 1.0, 1.0, 0.1).is_err());
        assert!(integrate(&Growth, &[1.0, 2.0], 0.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn nonfinite_state_aborts() {
        assert!(matches!(
            integrate(&Blowup, &[1.0], 0.0, 1.0, 0.1),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn rhs_failure_reports_time() {
        match integrate(&Failing, &[0.0], 0.0, 1.0, 0.1) {
            Err(Error::Integration { t, .. }) => assert!(t > 0.5 && t <= 0.6 + 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn step_doubling_estimate() {
        let opts = IntegrateOptions {
            step_doubling: true,
            ..Default::default()
        };
        let tr = integrate_with(&Growth, &[1.0], 0.0, 1.0, 0.05, &opts).unwrap();
        let est = tr.error_estimate.unwrap();
        let actual = (tr.last_state()[0] - std::f64::consts::E).abs();
        assert!(est > 0.5 * actual && est < 2.0 * actual, "{est} vs {actual}");
        let strict = IntegrateOptions {
            tolerance: Some(1e-12),
            ..Default::default()
        };
        assert!(matches!(
            integrate_with(&Growth, &[1.0], 0.0, 1.0, 0.05, &strict),
            Err(Error::StepTooCoarse { .. })
        ));
    }
}
