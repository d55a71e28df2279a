use super::{BinOp, Expr, ExprError, Func, Jet2, Node, NodeKind};

fn domain(node: &Node, message: impl Into<String>) -> ExprError {
    ExprError::Domain {
        offset: node.offset,
        message: message.into(),
    }
}

/// How a power node is evaluated, decided from its exponent.
enum PowerKind {
    Integer(i32),
    Real(f64),
    Variable,
}

fn power_kind(exponent: &Node) -> Result<PowerKind, ExprError> {
    if !exponent.is_constant() {
        return Ok(PowerKind::Variable);
    }
    let p = eval_node(exponent, &[])?;
    if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
        Ok(PowerKind::Integer(p as i32))
    } else {
        Ok(PowerKind::Real(p))
    }
}

fn check_finite(node: &Node, v: f64) -> Result<f64, ExprError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain(node, "non-finite result"))
    }
}

fn check_func_domain(node: &Node, func: Func, u: f64) -> Result<(), ExprError> {
    match func {
        Func::Log if u <= 0.0 => Err(domain(node, format!("log of non-positive value {u}"))),
        Func::Sqrt if u < 0.0 => Err(domain(node, format!("sqrt of negative value {u}"))),
        _ => Ok(()),
    }
}

fn apply(func: Func, u: f64) -> f64 {
    match func {
        Func::Sin => u.sin(),
        Func::Cos => u.cos(),
        Func::Tan => u.tan(),
        Func::Exp => u.exp(),
        Func::Log => u.ln(),
        Func::Sqrt => u.sqrt(),
        Func::Sinh => u.sinh(),
        Func::Cosh => u.cosh(),
        Func::Tanh => u.tanh(),
    }
}

/// Value, first and second derivative of `func` at `u`.
fn apply_d2(func: Func, u: f64) -> (f64, f64, f64) {
    match func {
        Func::Sin => (u.sin(), u.cos(), -u.sin()),
        Func::Cos => (u.cos(), -u.sin(), -u.cos()),
        Func::Tan => {
            let t = u.tan();
            let sec2 = 1.0 + t * t;
            (t, sec2, 2.0 * t * sec2)
        }
        Func::Exp => {
            let e = u.exp();
            (e, e, e)
        }
        Func::Log => (u.ln(), 1.0 / u, -1.0 / (u * u)),
        Func::Sqrt => {
            let s = u.sqrt();
            (s, 0.5 / s, -0.25 / (s * u))
        }
        Func::Sinh => (u.sinh(), u.cosh(), u.sinh()),
        Func::Cosh => (u.cosh(), u.sinh(), u.cosh()),
        Func::Tanh => {
            let t = u.tanh();
            let sech2 = 1.0 - t * t;
            (t, sech2, -2.0 * t * sech2)
        }
    }
}

fn pow_value(node: &Node, kind: &PowerKind, base: f64, exponent: f64) -> Result<f64, ExprError> {
    match *kind {
        PowerKind::Integer(k) => {
            if base == 0.0 && k < 0 {
                return Err(domain(node, "division by zero in negative power"));
            }
            Ok(base.powi(k))
        }
        PowerKind::Real(p) => {
            if base < 0.0 {
                return Err(domain(node, "real exponent of a negative base"));
            }
            if base == 0.0 && p < 0.0 {
                return Err(domain(node, "division by zero in negative power"));
            }
            Ok(base.powf(p))
        }
        PowerKind::Variable => {
            if base <= 0.0 {
                return Err(domain(node, "variable exponent requires a positive base"));
            }
            Ok(base.powf(exponent))
        }
    }
}

fn eval_node(node: &Node, point: &[f64]) -> Result<f64, ExprError> {
    let v = match &node.kind {
        NodeKind::Num(v) => *v,
        NodeKind::Var(i) => point[*i],
        NodeKind::Neg(a) => -eval_node(a, point)?,
        NodeKind::Call(func, a) => {
            let u = eval_node(a, point)?;
            check_func_domain(node, *func, u)?;
            apply(*func, u)
        }
        NodeKind::Binary(op, a, b) => {
            let u = eval_node(a, point)?;
            match op {
                BinOp::Add => u + eval_node(b, point)?,
                BinOp::Sub => u - eval_node(b, point)?,
                BinOp::Mul => u * eval_node(b, point)?,
                BinOp::Div => {
                    let w = eval_node(b, point)?;
                    if w == 0.0 {
                        return Err(domain(node, "division by zero"));
                    }
                    u / w
                }
                BinOp::Pow => {
                    let kind = power_kind(b)?;
                    let w = match kind {
                        PowerKind::Variable => eval_node(b, point)?,
                        _ => 0.0,
                    };
                    pow_value(node, &kind, u, w)?
                }
            }
        }
    };
    check_finite(node, v)
}

fn jet_node(node: &Node, point: &[f64]) -> Result<Jet2, ExprError> {
    let n = point.len();
    let jet = match &node.kind {
        NodeKind::Num(v) => Jet2::constant(*v, n),
        NodeKind::Var(i) => Jet2::variable(*i, point[*i], n),
        NodeKind::Neg(a) => jet_node(a, point)?.neg(),
        NodeKind::Call(func, a) => {
            let u = jet_node(a, point)?;
            check_func_domain(node, *func, u.value)?;
            let (f, df, d2f) = apply_d2(*func, u.value);
            u.chain(f, df, d2f)
        }
        NodeKind::Binary(op, a, b) => {
            let u = jet_node(a, point)?;
            match op {
                BinOp::Add => u.add(&jet_node(b, point)?),
                BinOp::Sub => u.sub(&jet_node(b, point)?),
                BinOp::Mul => u.mul(&jet_node(b, point)?),
                BinOp::Div => {
                    let w = jet_node(b, point)?;
                    if w.value == 0.0 {
                        return Err(domain(node, "division by zero"));
                    }
                    u.mul(&w.recip())
                }
                BinOp::Pow => match power_kind(b)? {
                    PowerKind::Integer(k) => {
                        if u.value == 0.0 && k < 0 {
                            return Err(domain(node, "division by zero in negative power"));
                        }
                        u.powi(k)
                    }
                    PowerKind::Real(p) => {
                        pow_value(node, &PowerKind::Real(p), u.value, p)?;
                        u.powf(p)
                    }
                    PowerKind::Variable => {
                        let w = jet_node(b, point)?;
                        pow_value(node, &PowerKind::Variable, u.value, w.value)?;
                        let (l, dl, d2l) = apply_d2(Func::Log, u.value);
                        let e = w.mul(&u.chain(l, dl, d2l));
                        let ev = e.value.exp();
                        e.chain(ev, ev, ev)
                    }
                },
            }
        }
    };
    if !jet.is_finite() {
        return Err(domain(node, "non-finite value or derivative"));
    }
    Ok(jet)
}

impl Expr {
    fn check_point(&self, point: &[f64]) -> Result<(), ExprError> {
        if point.len() != self.dim {
            return Err(ExprError::PointDimension {
                expected: self.dim,
                actual: point.len(),
            });
        }
        Ok(())
    }

    /// Evaluate at `point`.
    pub fn eval(&self, point: &[f64]) -> Result<f64, ExprError> {
        self.check_point(point)?;
        eval_node(&self.root, point)
    }

    /// Evaluate value, gradient and Hessian at `point` by jet arithmetic.
    pub fn eval_jet2(&self, point: &[f64]) -> Result<Jet2, ExprError> {
        self.check_point(point)?;
        jet_node(&self.root, point)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn parse(s: &str, n: usize) -> Expr {
        Expr::parse(s, n).unwrap()
    }

    #[test]
    fn plain_evaluation() {
        assert_eq!(parse("x1*x2", 2).eval(&[2.0, 3.0]).unwrap(), 6.0);
        assert_eq!(parse("log(x1)", 1).eval(&[1.0]).unwrap(), 0.0);
        assert_eq!(
            parse("4/(1 + x1^2 + x2^2 + x3^2)^2", 3).eval(&[0.0, 0.0, 0.0]).unwrap(),
            4.0
        );
    }

    #[test]
    fn domain_errors_name_the_node() {
        match parse("1/x1", 1).eval(&[0.0]).unwrap_err() {
            ExprError::Domain { offset, .. } => assert_eq!(offset, 1),
            e => panic!("{e:?}"),
        }
        match parse("2 + log(x1)", 1).eval(&[-1.0]).unwrap_err() {
            ExprError::Domain { offset, .. } => assert_eq!(offset, 4),
            e => panic!("{e:?}"),
        }
        assert!(parse("sqrt(x1)", 1).eval(&[-1.0]).is_err());
        assert!(parse("x1^0.5", 1).eval(&[-4.0]).is_err());
        assert!(parse("x1^x1", 1).eval(&[-2.0]).is_err());
        assert!(parse("x1^-2", 1).eval_jet2(&[0.0]).is_err());
        // the value exists but the derivative does not
        assert_eq!(parse("sqrt(x1)", 1).eval(&[0.0]).unwrap(), 0.0);
        assert!(parse("sqrt(x1)", 1).eval_jet2(&[0.0]).is_err());
    }

    #[test]
    fn integer_exponents_accept_negative_bases() {
        assert_eq!(parse("x1^3", 1).eval(&[-2.0]).unwrap(), -8.0);
        assert_eq!(parse("x1^(1+1)", 1).eval(&[-2.0]).unwrap(), 4.0);
        let j = parse("x1^-1", 1).eval_jet2(&[-2.0]).unwrap();
        assert_eq!((j.value, j.grad[0], j.hess[0]), (-0.5, -0.25, -0.25));
    }

    #[test]
    fn point_dimension_checked() {
        assert!(matches!(
            parse("x1", 2).eval(&[1.0]),
            Err(ExprError::PointDimension { expected: 2, actual: 1 })
        ));
    }

    #[test]
    fn jet_of_square() {
        let j = parse("x1^2", 2).eval_jet2(&[3.0, 0.0]).unwrap();
        assert_eq!(j.value, 9.0);
        assert_eq!(j.grad, vec![6.0, 0.0]);
        assert_eq!(j.hess, vec![2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn jet_of_sine_at_origin() {
        let j = parse("sin(x1)", 2).eval_jet2(&[0.0, 0.0]).unwrap();
        assert_eq!(j.value, 0.0);
        assert_eq!(j.grad, vec![1.0, 0.0]);
        assert!(j.hess.iter().all(|h| *h == 0.0));
    }

    // Frozen from a central-difference oracle at h = 1e-4 (see
    // tests/expr_oracle.rs for the live comparison).
    #[test]
    fn jet_of_exp_product() {
        let j = parse("exp(x1*x2)", 2).eval_jet2(&[1.0, 1.0]).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs();
        assert!(close(j.value, E));
        assert!(close(j.grad[0], E) && close(j.grad[1], E));
        assert!(close(j.hess[0], E) && close(j.hess[3], E));
        assert!(close(j.hess[1], 2.0 * E) && close(j.hess[2], 2.0 * E));
    }

    #[test]
    fn variable_exponent_matches_closed_form() {
        // d/dx x^x = x^x (ln x + 1); d2 = x^x ((ln x + 1)^2 + 1/x)
        let x: f64 = 1.7;
        let j = parse("x1^x1", 1).eval_jet2(&[x]).unwrap();
        let v = x.powf(x);
        let l = x.ln() + 1.0;
        assert!((j.value - v).abs() < 1e-12);
        assert!((j.grad[0] - v * l).abs() < 1e-12);
        assert!((j.hess[0] - v * (l * l + 1.0 / x)).abs() < 1e-12);
    }
}
