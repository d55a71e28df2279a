//! Scalar coordinate expressions.
//!
//! Metric components are written as plain strings over the coordinates
//! `x1..xn`. They are parsed once into an immutable [`Expr`] and evaluated
//! either as a real number ([`Expr::eval`]) or as a second-order jet carrying
//! the exact gradient and Hessian ([`Expr::eval_jet2`]).

mod eval;
mod jet;
mod parser;

use std::fmt;

pub use jet::Jet2;

/// Errors produced while parsing or evaluating an expression.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("variable x{index} at byte {offset} is out of range for dimension {dim}")]
    VariableOutOfRange { index: usize, dim: usize, offset: usize },
    #[error("domain error at byte {offset}: {message}")]
    Domain { offset: usize, message: String },
    #[error("expected a point of dimension {expected}, got {actual}")]
    PointDimension { expected: usize, actual: usize },
    #[error("dimension must be at least 1")]
    ZeroDimension,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone)]
pub enum NodeKind {
    Num(f64),
    /// Zero-based coordinate index; printed as `x{index + 1}`.
    Var(usize),
    Neg(Box<Node>),
    Call(Func, Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
}

/// An AST node together with the byte offset it was parsed from.
///
/// Nodes built programmatically carry offset 0.
#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    pub offset: usize,
}

/// Structural equality ignores source offsets.
impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (NodeKind::Num(a), NodeKind::Num(b)) => a.to_bits() == b.to_bits(),
            (NodeKind::Var(a), NodeKind::Var(b)) => a == b,
            (NodeKind::Neg(a), NodeKind::Neg(b)) => a == b,
            (NodeKind::Call(f, a), NodeKind::Call(g, b)) => f == g && a == b,
            (NodeKind::Binary(o, a1, a2), NodeKind::Binary(p, b1, b2)) => o == p && a1 == b1 && a2 == b2,
            _ => false,
        }
    }
}

impl Node {
    fn new(kind: NodeKind, offset: usize) -> Self {
        Node { kind, offset }
    }

    fn max_var(&self) -> Option<usize> {
        match &self.kind {
            NodeKind::Num(_) => None,
            NodeKind::Var(i) => Some(*i),
            NodeKind::Neg(a) | NodeKind::Call(_, a) => a.max_var(),
            NodeKind::Binary(_, a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    /// True when no coordinate variable occurs below this node.
    pub fn is_constant(&self) -> bool {
        self.max_var().is_none()
    }
}

/// A parsed scalar expression over the coordinates `x1..x{dim}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    dim: usize,
}

impl Expr {
    /// Parse `text` as an expression in `dim` coordinates.
    pub fn parse(text: &str, dim: usize) -> Result<Expr, ExprError> {
        if dim == 0 {
            return Err(ExprError::ZeroDimension);
        }
        let root = parser::parse(text, dim)?;
        Ok(Expr { root, dim })
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constant(value: f64, dim: usize) -> Expr {
        Expr {
            root: Node::new(NodeKind::Num(value), 0),
            dim,
        }
    }

    /// The coordinate `x{index + 1}`. Panics if `index >= dim`.
    pub fn var(index: usize, dim: usize) -> Expr {
        assert!(index < dim, "variable index out of range");
        Expr {
            root: Node::new(NodeKind::Var(index), 0),
            dim,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.root.is_constant()
    }

    /// Re-home the expression in a space of `dim` coordinates.
    pub fn with_dim(&self, dim: usize) -> Result<Expr, ExprError> {
        if let Some(i) = self.root.max_var() {
            if i >= dim {
                return Err(ExprError::VariableOutOfRange {
                    index: i + 1,
                    dim,
                    offset: 0,
                });
            }
        }
        Ok(Expr {
            root: self.root.clone(),
            dim,
        })
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        Expr {
            dim: arg.dim,
            root: Node::new(NodeKind::Call(func, Box::new(arg.root)), 0),
        }
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        assert_eq!(lhs.dim, rhs.dim, "operands live in different dimensions");
        Expr {
            dim: lhs.dim,
            root: Node::new(NodeKind::Binary(op, Box::new(lhs.root), Box::new(rhs.root)), 0),
        }
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr {
            dim: self.dim,
            root: Node::new(NodeKind::Neg(Box::new(self.root)), 0),
        }
    }
}

macro_rules! expr_binop {
    ($trait:ident, $method:ident, $op:expr) => {
        impl std::ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, self, rhs)
            }
        }
    };
}

expr_binop!(Add, add, BinOp::Add);
expr_binop!(Sub, sub, BinOp::Sub);
expr_binop!(Mul, mul, BinOp::Mul);
expr_binop!(Div, div, BinOp::Div);

/// Canonical printer: every compound subterm is parenthesized, so the output
/// re-parses to the same tree.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            NodeKind::Num(v) => write!(f, "{v:?}"),
            NodeKind::Var(i) => write!(f, "x{}", i + 1),
            NodeKind::Neg(a) => write!(f, "(-{a})"),
            NodeKind::Call(func, a) => write!(f, "{}({a})", func.name()),
            NodeKind::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(v: f64) -> Node {
        Node::new(NodeKind::Num(v), 0)
    }
    fn var(i: usize) -> Node {
        Node::new(NodeKind::Var(i), 0)
    }
    fn bin(op: BinOp, a: Node, b: Node) -> Node {
        Node::new(NodeKind::Binary(op, Box::new(a), Box::new(b)), 0)
    }

    #[test]
    fn grammar_derivation() {
        let e = Expr::parse("x1^2 + 1", 2).unwrap();
        let expected = bin(BinOp::Add, bin(BinOp::Pow, var(0), num(2.0)), num(1.0));
        assert_eq!(e.root, expected);
    }

    #[test]
    fn out_of_range_variable() {
        let err = Expr::parse("sin(x3)", 2).unwrap_err();
        assert!(matches!(
            err,
            ExprError::VariableOutOfRange {
                index: 3,
                dim: 2,
                offset: 4
            }
        ));
    }

    #[test]
    fn x0_is_out_of_range() {
        let err = Expr::parse("x0^2", 3).unwrap_err();
        assert!(matches!(err, ExprError::VariableOutOfRange { index: 0, .. }));
    }

    #[test]
    fn power_is_right_associative_and_tight() {
        let e = Expr::parse("2^3^2", 1).unwrap();
        assert_eq!(e.eval(&[0.0]).unwrap(), 512.0);
        let e = Expr::parse("-x1^2", 1).unwrap();
        assert_eq!(e.eval(&[3.0]).unwrap(), -9.0);
        let e = Expr::parse("2*x1^-1", 1).unwrap();
        assert_eq!(e.eval(&[4.0]).unwrap(), 0.5);
    }

    #[test]
    fn whitespace_and_scientific_literals() {
        let e = Expr::parse("  1.5e-1*\tx1 +2E2 ", 1).unwrap();
        assert!((e.eval(&[2.0]).unwrap() - 200.3).abs() < 1e-12);
        let e = Expr::parse(".5 + 3.", 1).unwrap();
        assert_eq!(e.eval(&[0.0]).unwrap(), 3.5);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match Expr::parse("1 + * 2", 1).unwrap_err() {
            ExprError::Syntax { offset, .. } => assert_eq!(offset, 4),
            e => panic!("unexpected {e:?}"),
        }
        match Expr::parse("sin(x1", 1).unwrap_err() {
            ExprError::Syntax { offset, .. } => assert_eq!(offset, 6),
            e => panic!("unexpected {e:?}"),
        }
        assert!(matches!(
            Expr::parse("foo(x1)", 1).unwrap_err(),
            ExprError::UnknownIdentifier { offset: 0, .. }
        ));
        assert!(matches!(
            Expr::parse("", 1).unwrap_err(),
            ExprError::Syntax { offset: 0, .. }
        ));
        assert!(matches!(
            Expr::parse("1 2", 1).unwrap_err(),
            ExprError::Syntax { offset: 2, .. }
        ));
    }

    #[test]
    fn zero_dimension_rejected() {
        assert_eq!(Expr::parse("1", 0).unwrap_err(), ExprError::ZeroDimension);
    }

    #[test]
    fn printer_round_trip() {
        for text in [
            "x1^2 + 1",
            "4/(1 + x1^2 + x2^2 + x3^2)^2",
            "-sin(x1)*cos(-x2) - 2^-x3",
            "exp(0.1*x1) / sqrt(1e-3 + x2^2)",
        ] {
            let a = Expr::parse(text, 3).unwrap();
            let printed = a.to_string();
            let b = Expr::parse(&printed, 3).unwrap();
            assert_eq!(a, b, "{text} -> {printed}");
            assert_eq!(printed, b.to_string());
        }
    }

    #[test]
    fn combinators_build_the_same_tree() {
        let built = Expr::var(0, 2) * Expr::constant(2.0, 2) + Expr::call(Func::Exp, Expr::var(1, 2));
        let parsed = Expr::parse("x1*2 + exp(x2)", 2).unwrap();
        assert_eq!(built, parsed);
    }
}
