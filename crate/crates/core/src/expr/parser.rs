//! Recursive-descent parser.
//!
//! ```text
//! sum      := signed (("+" | "-") signed)*
//! signed   := ("-" | "+") signed | product
//! product  := factor (("*" | "/") factor)*
//! factor   := "-" factor | power
//! power    := atom ("^" exponent)?
//! exponent := ("-" | "+") exponent | power
//! atom     := number | "x" digits | func "(" sum ")" | "(" sum ")"
//! ```

use super::{BinOp, ExprError, Func, Node, NodeKind};

pub(super) fn parse(text: &str, dim: usize) -> Result<Node, ExprError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        dim,
    };
    let node = p.sum()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax(p.pos, "unexpected trailing input"));
    }
    Ok(node)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl Parser<'_> {
    fn syntax(&self, offset: usize, message: &str) -> ExprError {
        ExprError::Syntax {
            offset,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.signed()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let at = self.pos;
            self.pos += 1;
            let rhs = self.signed()?;
            lhs = Node::new(NodeKind::Binary(op, Box::new(lhs), Box::new(rhs)), at);
        }
    }

    fn signed(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            Some(b'-') => {
                let at = self.pos;
                self.pos += 1;
                let inner = self.signed()?;
                Ok(Node::new(NodeKind::Neg(Box::new(inner)), at))
            }
            Some(b'+') => {
                self.pos += 1;
                self.signed()
            }
            _ => self.product(),
        }
    }

    fn product(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            let at = self.pos;
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Node::new(NodeKind::Binary(op, Box::new(lhs), Box::new(rhs)), at);
        }
    }

    fn factor(&mut self) -> Result<Node, ExprError> {
        if self.peek() == Some(b'-') {
            let at = self.pos;
            self.pos += 1;
            let inner = self.factor()?;
            return Ok(Node::new(NodeKind::Neg(Box::new(inner)), at));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            let at = self.pos;
            self.pos += 1;
            let exp = self.exponent()?;
            return Ok(Node::new(
                NodeKind::Binary(BinOp::Pow, Box::new(base), Box::new(exp)),
                at,
            ));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            Some(b'-') => {
                let at = self.pos;
                self.pos += 1;
                let inner = self.exponent()?;
                Ok(Node::new(NodeKind::Neg(Box::new(inner)), at))
            }
            Some(b'+') => {
                self.pos += 1;
                self.exponent()
            }
            _ => self.power(),
        }
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let start = match self.peek() {
            None => return Err(self.syntax(self.pos, "unexpected end of input")),
            Some(_) => self.pos,
        };
        let c = self.src[start];
        if c == b'(' {
            self.pos += 1;
            let inner = self.sum()?;
            if !self.eat(b')') {
                return Err(self.syntax(self.pos, "expected `)`"));
            }
            return Ok(inner);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number(start);
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            return self.identifier(start);
        }
        Err(self.syntax(start, &format!("unexpected character `{}`", c as char)))
    }

    fn number(&mut self, start: usize) -> Result<Node, ExprError> {
        let s = self.src;
        let mut i = start;
        let digits = |i: &mut usize| {
            let from = *i;
            while *i < s.len() && s[*i].is_ascii_digit() {
                *i += 1;
            }
            *i - from
        };
        let mut mantissa = digits(&mut i);
        if i < s.len() && s[i] == b'.' {
            i += 1;
            mantissa += digits(&mut i);
        }
        if mantissa == 0 {
            return Err(self.syntax(start, "malformed number"));
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            if digits(&mut j) == 0 {
                return Err(self.syntax(i, "malformed exponent"));
            }
            i = j;
        }
        // Only ASCII digits, '.', 'e', and signs were consumed.
        let text = std::str::from_utf8(&s[start..i]).expect("ascii literal");
        let value: f64 = text.parse().map_err(|_| self.syntax(start, "malformed number"))?;
        if !value.is_finite() {
            return Err(self.syntax(start, "literal overflows a double"));
        }
        self.pos = i;
        Ok(Node::new(NodeKind::Num(value), start))
    }

    fn identifier(&mut self, start: usize) -> Result<Node, ExprError> {
        let s = self.src;
        let mut i = start;
        while i < s.len() && (s[i].is_ascii_alphanumeric() || s[i] == b'_') {
            i += 1;
        }
        let name = std::str::from_utf8(&s[start..i]).expect("ascii identifier");
        self.pos = i;

        if let Some(digits) = name.strip_prefix('x') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                let index: usize = digits.parse().unwrap_or(usize::MAX);
                if index == 0 || index > self.dim {
                    return Err(ExprError::VariableOutOfRange {
                        index,
                        dim: self.dim,
                        offset: start,
                    });
                }
                return Ok(Node::new(NodeKind::Var(index - 1), start));
            }
        }

        match Func::from_name(name) {
            Some(func) => {
                if !self.eat(b'(') {
                    return Err(self.syntax(self.pos, "expected `(` after function name"));
                }
                let arg = self.sum()?;
                if !self.eat(b')') {
                    return Err(self.syntax(self.pos, "expected `)`"));
                }
                Ok(Node::new(NodeKind::Call(func, Box::new(arg)), start))
            }
            None => Err(ExprError::UnknownIdentifier {
                name: name.to_string(),
                offset: start,
            }),
        }
    }
}
