//! Shared helpers for the integration tests.
#![allow(dead_code)]

use parageo::Expr;
use rand::Rng;

/// Random expression text in `x1..x3` whose functions are composed so that
/// every argument stays inside its domain.
pub fn random_expression(rng: &mut impl Rng, depth: u32) -> String {
    if depth == 0 || rng.random_bool(0.25) {
        return if rng.random_bool(0.7) {
            format!("x{}", rng.random_range(1..=3))
        } else {
            format!("{:.3}", rng.random_range(0.5..2.0))
        };
    }
    let a = random_expression(rng, depth - 1);
    match rng.random_range(0..14) {
        0 => format!("({a} + {})", random_expression(rng, depth - 1)),
        1 => format!("({a} - {})", random_expression(rng, depth - 1)),
        2 | 3 => format!("({a} * {})", random_expression(rng, depth - 1)),
        4 => format!("({a} / (1.5 + sin({})))", random_expression(rng, depth - 1)),
        5 => format!("({a})^{}", rng.random_range(2..=3)),
        6 => format!("(-{a})"),
        7 => format!("sin({a})"),
        8 => format!("cos({a})"),
        9 => format!("exp(0.5*tanh({a}))"),
        10 => format!("log(1 + ({a})^2)"),
        11 => format!("sqrt(1 + ({a})^2)"),
        12 => format!("tan(0.5*sin({a}))"),
        _ => format!("(sinh(0.3*{a}) + cosh(0.3*{a}))"),
    }
}

/// Random point in `[-1, 1]^3`.
pub fn random_point(rng: &mut impl Rng) -> Vec<f64> {
    (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn shifted(x: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut y = x.to_vec();
    for (k, d) in moves {
        y[*k] += d;
    }
    y
}

/// Ridders extrapolation of a difference quotient `d(h)` whose error is a
/// series in `h^2`: the step shrinks geometrically from `h` and the tableau
/// entry with the smallest error estimate is returned with that estimate.
/// `noise(step)` bounds the round-off of `d(step)` and is added to the
/// truncation estimate.
fn ridders_from(d: &impl Fn(f64) -> f64, noise: &impl Fn(f64) -> f64, h: f64) -> (f64, f64) {
    const SHRINK: f64 = 1.4;
    const LEVELS: usize = 12;
    let c2 = SHRINK * SHRINK;
    let mut table = [[0.0; LEVELS]; LEVELS];
    let mut step = h;
    table[0][0] = d(step);
    let (mut best, mut err) = (table[0][0], f64::INFINITY);
    for i in 1..LEVELS {
        step /= SHRINK;
        table[0][i] = d(step);
        let mut fac = c2;
        for j in 1..=i {
            table[j][i] = (table[j - 1][i] * fac - table[j - 1][i - 1]) / (fac - 1.0);
            fac *= c2;
            let e = (table[j][i] - table[j - 1][i])
                .abs()
                .max((table[j][i] - table[j - 1][i - 1]).abs())
                + noise(step);
            if e <= err {
                err = e;
                best = table[j][i];
            }
        }
        if (table[i][i] - table[i - 1][i - 1]).abs() >= 2.0 * err {
            break;
        }
    }
    (best, err)
}

/// [`ridders_from`] started at `h`, `h/10` and `h/100`; the result with the
/// smallest error estimate wins, so a fast oscillation that aliases at the
/// largest step does not decide the answer.
fn ridders(d: impl Fn(f64) -> f64, noise: impl Fn(f64) -> f64, h: f64) -> f64 {
    [h, h / 10.0, h / 100.0]
        .into_iter()
        .map(|h| ridders_from(&d, &noise, h))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
        .0
}

/// Gradient by Ridders-extrapolated central differences of plain
/// evaluations, starting from step `h`.
pub fn fd_gradient(e: &Expr, x: &[f64], h: f64) -> Vec<f64> {
    let f = |y: Vec<f64>| e.eval(&y).unwrap();
    let fx = f(x.to_vec()).abs();
    (0..x.len())
        .map(|k| {
            let d = |h: f64| (f(shifted(x, &[(k, h)])) - f(shifted(x, &[(k, -h)]))) / (2.0 * h);
            ridders(d, |h| f64::EPSILON * fx / h, h)
        })
        .collect()
}

/// Hessian (row-major) by Ridders-extrapolated second differences,
/// starting from step `h`.
pub fn fd_hessian(e: &Expr, x: &[f64], h: f64) -> Vec<f64> {
    let n = x.len();
    let f = |y: Vec<f64>| e.eval(&y).unwrap();
    let second = |i: usize, j: usize, h: f64| {
        if i == j {
            (f(shifted(x, &[(i, h)])) - 2.0 * f(x.to_vec()) + f(shifted(x, &[(i, -h)]))) / (h * h)
        } else {
            (f(shifted(x, &[(i, h), (j, h)])) - f(shifted(x, &[(i, h), (j, -h)])) - f(shifted(x, &[(i, -h), (j, h)]))
                + f(shifted(x, &[(i, -h), (j, -h)])))
                / (4.0 * h * h)
        }
    };
    let fx = f(x.to_vec()).abs();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = ridders(|h| second(i, j, h), |h| 4.0 * f64::EPSILON * fx / (h * h), h);
        }
    }
    out
}

/// Normwise relative error `max|a - b| / max(|a|, |b|)`. The scale is
/// floored at `1e-4` so a vanishing tensor is compared against the
/// round-off floor of the difference quotients instead of against zero.
pub fn normwise_relative(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = a.iter().chain(b).map(|y| y.abs()).fold(1e-4, f64::max);
    diff / scale
}
