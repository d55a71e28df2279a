//! C ABI for `parageo`.
//!
//! Metrics and trajectories are opaque heap handles created and released by
//! this library. Every fallible call returns a [`ParageoStatus`]; on failure
//! [`parageo_last_error`] describes the problem for the calling thread.
//! Array arguments are caller-allocated with the lengths stated on each
//! function; `n` is the metric dimension.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use parageo::cli::{builtin_metric, integrate_curve, CurveSpec, SystemKind};
use parageo::curves::Trajectory;
use parageo::geometry::{MetricField, PointGeometry, Signature};
use parageo::tractor::{metric_with, parallel_transport, CurveSamples, Tractor};
use parageo::{Error, Expr};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParageoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    DegenerateMetric = 4,
    DomainError = 5,
    NumericalAbort = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Curve families for [`parageo_integrate`]. The initial state is
/// `[x, v]` for `Geodesic` and `[x, v, w]` otherwise, where `w` is the Weyl
/// 1-form, the covariant acceleration or the projective 1-form.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParageoSystem {
    ConformalCoupled = 0,
    ConformalOde3 = 1,
    ProjectiveCoupled = 2,
    Geodesic = 3,
}

/// Opaque metric handle.
pub struct ParageoMetric {
    inner: MetricField,
}

/// Opaque trajectory handle.
pub struct ParageoTrajectory {
    inner: Trajectory,
    dim: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(ParageoStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Expr(parageo::ExprError::Domain { .. }) => ParageoStatus::DomainError,
            Error::Expr(_) => ParageoStatus::ParseError,
            Error::DegenerateMetric { .. } | Error::SignatureMismatch { .. } => ParageoStatus::DegenerateMetric,
            Error::Integration { .. } | Error::NonFinite { .. } | Error::StepTooCoarse { .. } => {
                ParageoStatus::NumericalAbort
            }
            _ => ParageoStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: ParageoStatus, message: impl Into<String>) -> Failure {
    Failure(status, message.into())
}

/// Run `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ParageoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            ParageoStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            ParageoStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(fail(ParageoStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(fail(ParageoStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(ParageoStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(ParageoStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn metric<'a>(m: *const ParageoMetric) -> Result<&'a MetricField, Failure> {
    m.as_ref()
        .map(|m| &m.inner)
        .ok_or_else(|| fail(ParageoStatus::NullPointer, "metric handle is null"))
}

unsafe fn trajectory<'a>(t: *const ParageoTrajectory) -> Result<&'a ParageoTrajectory, Failure> {
    t.as_ref()
        .ok_or_else(|| fail(ParageoStatus::NullPointer, "trajectory handle is null"))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(fail(ParageoStatus::NullPointer, "output handle pointer is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message describing the last failure on this thread, or an empty string.
/// The pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn parageo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Build a builtin metric: `euclidean`, `minkowski`, `sphere_stereographic`,
/// `hyperbolic_halfspace`, `curved_lorentzian` or `conformal`. `f` is the
/// conformal exponent for `conformal` and must be null otherwise.
///
/// # Safety
/// `name` and a non-null `f` must be NUL-terminated strings; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn parageo_metric_builtin(
    name: *const c_char,
    positive: usize,
    negative: usize,
    f: *const c_char,
    out: *mut *mut ParageoMetric,
) -> ParageoStatus {
    guard(|| {
        let name = string(name, "name")?;
        let mut params = std::collections::BTreeMap::new();
        if !f.is_null() {
            params.insert("f".to_string(), string(f, "f")?.into());
        }
        let dim = positive + negative;
        if dim < 2 {
            return Err(fail(ParageoStatus::InvalidArgument, "dimension must be at least 2"));
        }
        let m = builtin_metric(name, dim, Signature::new(positive, negative), &params)
            .map_err(|e| fail(ParageoStatus::InvalidArgument, e.to_string()))?;
        store(out, ParageoMetric { inner: m })
    })
}

/// Build a metric from component expressions in `x1..xn`, either all `n*n`
/// entries row by row or the `n(n+1)/2` upper-triangle entries row by row.
///
/// # Safety
/// `components` must point to `count` NUL-terminated strings; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn parageo_metric_from_components(
    positive: usize,
    negative: usize,
    components: *const *const c_char,
    count: usize,
    out: *mut *mut ParageoMetric,
) -> ParageoStatus {
    guard(|| {
        let n = positive + negative;
        if components.is_null() {
            return Err(fail(ParageoStatus::NullPointer, "components is null"));
        }
        let texts = std::slice::from_raw_parts(components, count);
        let exprs = texts
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let text = string(*t, &format!("component {i}"))?;
                Expr::parse(text, n).map_err(|e| Failure::from(Error::from(e)))
            })
            .collect::<Result<Vec<_>, Failure>>()?;
        let signature = Signature::new(positive, negative);
        let built = if count == n * n {
            let rows = exprs.chunks(n).map(<[Expr]>::to_vec).collect();
            MetricField::from_matrix(signature, rows)
        } else if count == n * (n + 1) / 2 {
            let mut rows = Vec::with_capacity(n);
            let mut rest = exprs.as_slice();
            for i in 0..n {
                let (row, tail) = rest.split_at(n - i);
                rows.push(row.to_vec());
                rest = tail;
            }
            MetricField::from_upper_triangle(signature, rows)
        } else {
            return Err(fail(
                ParageoStatus::InvalidArgument,
                format!("expected {} or {} components, got {count}", n * n, n * (n + 1) / 2),
            ));
        }?;
        store(out, ParageoMetric { inner: built })
    })
}

/// Release a metric. Null is ignored.
///
/// # Safety
/// `m` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn parageo_metric_free(m: *mut ParageoMetric) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Dimension of a metric, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live metric handle.
#[no_mangle]
pub unsafe extern "C" fn parageo_metric_dim(m: *const ParageoMetric) -> usize {
    m.as_ref().map_or(0, |m| m.inner.dim())
}

/// Point tensors at `x` (length `n`). Outputs, each optional (null skips):
/// `g` and `ricci` and `schouten` (`n*n`, row-major), `christoffel`
/// (`n^3`, `Γ^k_ij` at `(k*n + i)*n + j`), `scalar` (1). Requesting
/// `schouten` in dimension 2 fails.
///
/// # Safety
/// Non-null pointers must reference arrays of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn parageo_metric_tensors(
    m: *const ParageoMetric,
    x: *const f64,
    g: *mut f64,
    christoffel: *mut f64,
    ricci: *mut f64,
    scalar: *mut f64,
    schouten: *mut f64,
) -> ParageoStatus {
    guard(|| {
        let m = metric(m)?;
        let n = m.dim();
        let geo = PointGeometry::new(m, slice(x, n, "x")?)?;
        let copy_matrix = |dst: *mut f64, src: &nalgebra::DMatrix<f64>| {
            if !dst.is_null() {
                let out = std::slice::from_raw_parts_mut(dst, n * n);
                for i in 0..n {
                    for j in 0..n {
                        out[i * n + j] = src[(i, j)];
                    }
                }
            }
        };
        copy_matrix(g, &geo.metric.g);
        copy_matrix(ricci, &geo.ricci);
        if !christoffel.is_null() {
            std::slice::from_raw_parts_mut(christoffel, n * n * n).copy_from_slice(geo.christoffel.as_slice());
        }
        if !scalar.is_null() {
            *scalar = geo.scalar;
        }
        if !schouten.is_null() {
            copy_matrix(schouten, &geo.schouten()?);
        }
        Ok(())
    })
}

/// Coordinate acceleration of the Weyl geodesic through `(x, v)` for the
/// 1-form `alpha`; all arrays have length `n`.
///
/// # Safety
/// Pointers must reference arrays of length `n`.
#[no_mangle]
pub unsafe extern "C" fn parageo_weyl_acceleration(
    m: *const ParageoMetric,
    x: *const f64,
    v: *const f64,
    alpha: *const f64,
    out: *mut f64,
) -> ParageoStatus {
    guard(|| {
        let m = metric(m)?;
        let n = m.dim();
        let acc = parageo::weyl::weyl_acceleration(m, slice(x, n, "x")?, slice(v, n, "v")?, slice(alpha, n, "alpha")?)?;
        slice_mut(out, n, "out")?.copy_from_slice(&acc);
        Ok(())
    })
}

/// Tractor metric `H(u, w)` at `x`; tractors are `[lambda, alpha_1..n, mu]`
/// of length `n + 2`.
///
/// # Safety
/// Pointers must reference arrays of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn parageo_tractor_metric(
    m: *const ParageoMetric,
    x: *const f64,
    u: *const f64,
    w: *const f64,
    out: *mut f64,
) -> ParageoStatus {
    guard(|| {
        let m = metric(m)?;
        let n = m.dim();
        let at = m.at(slice(x, n, "x")?)?;
        let u = Tractor::from_slice(slice(u, n + 2, "u")?);
        let w = Tractor::from_slice(slice(w, n + 2, "w")?);
        if out.is_null() {
            return Err(fail(ParageoStatus::NullPointer, "out is null"));
        }
        *out = metric_with(&at.g_inv, &u, &w);
        Ok(())
    })
}

/// Integrate a curve with fixed-step RK4, recording every `stride`-th step.
///
/// # Safety
/// `y0` must have `2n` entries for `Geodesic` and `3n` otherwise; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn parageo_integrate(
    m: *const ParageoMetric,
    system: ParageoSystem,
    y0: *const f64,
    t0: f64,
    t1: f64,
    step: f64,
    stride: usize,
    out: *mut *mut ParageoTrajectory,
) -> ParageoStatus {
    guard(|| {
        let m = metric(m)?;
        let n = m.dim();
        let (kind, len) = match system {
            ParageoSystem::ConformalCoupled => (SystemKind::ConformalCoupled, 3 * n),
            ParageoSystem::ConformalOde3 => (SystemKind::ConformalOde3, 3 * n),
            ParageoSystem::ProjectiveCoupled => (SystemKind::ProjectiveCoupled, 3 * n),
            ParageoSystem::Geodesic => (SystemKind::Geodesic, 2 * n),
        };
        let y = slice(y0, len, "y0")?;
        let third = (len == 3 * n).then(|| y[2 * n..].to_vec());
        let spec = CurveSpec {
            system: kind,
            x0: y[..n].to_vec(),
            v0: y[n..2 * n].to_vec(),
            alpha0: third.clone().filter(|_| kind == SystemKind::ConformalCoupled),
            a0: third.clone().filter(|_| kind == SystemKind::ConformalOde3),
            u0: third.filter(|_| kind == SystemKind::ProjectiveCoupled),
            t0,
            t1,
            step,
        };
        if stride == 0 {
            return Err(fail(ParageoStatus::InvalidArgument, "stride must be at least 1"));
        }
        let tr = integrate_curve(m, &spec, stride, step)?;
        store(out, ParageoTrajectory { inner: tr, dim: n })
    })
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn parageo_trajectory_len(t: *const ParageoTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.inner.len())
}

/// State width per sample, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn parageo_trajectory_width(t: *const ParageoTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.inner.state_names.len())
}

/// Copy sample times (`capacity >= len`) into `out`.
///
/// # Safety
/// `out` must have room for `capacity` values.
#[no_mangle]
pub unsafe extern "C" fn parageo_trajectory_times(
    t: *const ParageoTrajectory,
    out: *mut f64,
    capacity: usize,
) -> ParageoStatus {
    guard(|| {
        let t = trajectory(t)?;
        let len = t.inner.len();
        if capacity < len {
            return Err(fail(ParageoStatus::BufferTooSmall, format!("need {len} values")));
        }
        slice_mut(out, len, "out")?.copy_from_slice(&t.inner.times);
        Ok(())
    })
}

/// Copy states row-major (`capacity >= len * width`) into `out`.
///
/// # Safety
/// `out` must have room for `capacity` values.
#[no_mangle]
pub unsafe extern "C" fn parageo_trajectory_states(
    t: *const ParageoTrajectory,
    out: *mut f64,
    capacity: usize,
) -> ParageoStatus {
    guard(|| {
        let t = trajectory(t)?;
        let width = t.inner.state_names.len();
        let need = t.inner.len() * width;
        if capacity < need {
            return Err(fail(ParageoStatus::BufferTooSmall, format!("need {need} values")));
        }
        let out = slice_mut(out, need, "out")?;
        for (row, state) in out.chunks_mut(width).zip(&t.inner.states) {
            row.copy_from_slice(state);
        }
        Ok(())
    })
}

/// Parallel-transport the tractor `u0` (length `n + 2`) along a trajectory
/// recorded with stride 1. Writes `len * (n + 2)` tractor components to
/// `tractors` and `len` values of `H(u, u)` to `h_values` (null skips).
///
/// # Safety
/// Pointers must reference arrays of the stated lengths; `capacity` is the
/// length of `tractors`.
#[no_mangle]
pub unsafe extern "C" fn parageo_transport(
    m: *const ParageoMetric,
    t: *const ParageoTrajectory,
    u0: *const f64,
    tractors: *mut f64,
    capacity: usize,
    h_values: *mut f64,
) -> ParageoStatus {
    guard(|| {
        let m = metric(m)?;
        let t = trajectory(t)?;
        let n = m.dim();
        if t.dim != n {
            return Err(fail(
                ParageoStatus::InvalidArgument,
                "trajectory dimension differs from metric",
            ));
        }
        let len = t.inner.len();
        if capacity < len * (n + 2) {
            return Err(fail(
                ParageoStatus::BufferTooSmall,
                format!("need {} values", len * (n + 2)),
            ));
        }
        let curve = CurveSamples::from_trajectory(&t.inner, n)?;
        let u0 = Tractor::from_slice(slice(u0, n + 2, "u0")?);
        let path = parallel_transport(m, &curve, &u0, None)?;
        let out = slice_mut(tractors, len * (n + 2), "tractors")?;
        for (row, u) in out.chunks_mut(n + 2).zip(&path.tractors) {
            row.copy_from_slice(&u.to_vec());
        }
        if !h_values.is_null() {
            std::slice::from_raw_parts_mut(h_values, len).copy_from_slice(&path.h_values);
        }
        Ok(())
    })
}

/// Release a trajectory. Null is ignored.
///
/// # Safety
/// `t` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn parageo_trajectory_free(t: *mut ParageoTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}
