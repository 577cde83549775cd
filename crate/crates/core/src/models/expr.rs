//! Tiny arithmetic/boolean expression language for closed-form decision
//! rules, e.g. `0 < x1 < 2 && 4*x1 >= x2 + x3`.
//!
//! Values are reals; comparisons and connectives yield `1` or `0`, and any
//! nonzero value is truthy. Comparison chains read like mathematics:
//! `a < b <= c` means `a < b && b <= c`. Features are written `x1 .. xm`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    fn apply(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// 0-based feature index.
    Feature(usize),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Compare(Box<Expr>, Vec<(CmpOp, Expr)>),
}

fn truth(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = lex(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.or()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Model(format!(
                "unexpected token {:?} in rule {src:?}",
                p.tokens[p.pos]
            )));
        }
        Ok(e)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Feature(i) => x[*i],
            Expr::Neg(e) => -e.eval(x),
            Expr::Not(e) => truth(e.eval(x) == 0.0),
            Expr::Binary(op, a, b) => match op {
                BinOp::Add => a.eval(x) + b.eval(x),
                BinOp::Sub => a.eval(x) - b.eval(x),
                BinOp::Mul => a.eval(x) * b.eval(x),
                BinOp::Div => a.eval(x) / b.eval(x),
                BinOp::And => truth(a.eval(x) != 0.0 && b.eval(x) != 0.0),
                BinOp::Or => truth(a.eval(x) != 0.0 || b.eval(x) != 0.0),
            },
            Expr::Compare(first, rest) => {
                let mut lhs = first.eval(x);
                for (op, e) in rest {
                    let rhs = e.eval(x);
                    if !op.apply(lhs, rhs) {
                        return 0.0;
                    }
                    lhs = rhs;
                }
                1.0
            }
        }
    }

    pub fn holds(&self, x: &[f64]) -> bool {
        self.eval(x) != 0.0
    }

    /// One past the largest referenced feature index.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Feature(i) => i + 1,
            Expr::Neg(e) | Expr::Not(e) => e.arity(),
            Expr::Binary(_, a, b) => a.arity().max(b.arity()),
            Expr::Compare(first, rest) => rest.iter().map(|(_, e)| e.arity()).fold(first.arity(), usize::max),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Or, ..) => 1,
            Expr::Binary(BinOp::And, ..) => 2,
            Expr::Not(_) => 3,
            Expr::Compare(..) => 4,
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 5,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 6,
            Expr::Neg(_) => 7,
            Expr::Const(c) if *c < 0.0 => 7,
            Expr::Const(_) | Expr::Feature(_) => 8,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if e.precedence() < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Feature(i) => write!(f, "x{}", i + 1),
            Expr::Neg(e) => {
                f.write_str("-")?;
                write_operand(f, e, 8)
            }
            Expr::Not(e) => {
                f.write_str("!")?;
                write_operand(f, e, 3)
            }
            Expr::Binary(op, a, b) => {
                let (sym, prec) = match op {
                    BinOp::Or => ("||", 1),
                    BinOp::And => ("&&", 2),
                    BinOp::Add => ("+", 5),
                    BinOp::Sub => ("-", 5),
                    BinOp::Mul => ("*", 6),
                    BinOp::Div => ("/", 6),
                };
                write_operand(f, a, prec)?;
                write!(f, " {sym} ")?;
                write_operand(f, b, prec + 1)
            }
            Expr::Compare(first, rest) => {
                write_operand(f, first, 5)?;
                for (op, e) in rest {
                    write!(f, " {} ", op.symbol())?;
                    write_operand(f, e, 5)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Var(usize),
    Op(&'static str),
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    const OPS: [&str; 14] = [
        "&&", "||", "<=", ">=", "==", "!=", "<", ">", "!", "+", "-", "*", "/", "=",
    ];
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '(' {
            out.push(Token::LParen);
            i += 1;
            continue;
        }
        if c == ')' {
            out.push(Token::RParen);
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                i += 1;
                if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                    i += 1;
                }
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let text = &src[start..i];
            let v: f64 = text
                .parse()
                .map_err(|_| Error::Model(format!("bad number {text:?} in rule {src:?}")))?;
            out.push(Token::Num(v));
            continue;
        }
        if c == 'x' {
            let start = i + 1;
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let idx: usize = src[start..i]
                .parse()
                .map_err(|_| Error::Model(format!("feature reference needs an index in rule {src:?}")))?;
            if idx == 0 {
                return Err(Error::Model(format!(
                    "feature references are 1-based (x1, x2, ...) in rule {src:?}"
                )));
            }
            out.push(Token::Var(idx - 1));
            continue;
        }
        for op in OPS {
            if src[i..].starts_with(op) {
                if op == "=" {
                    return Err(Error::Model(format!("use == for equality in rule {src:?}")));
                }
                out.push(Token::Op(op));
                i += op.len();
                continue 'outer;
            }
        }
        return Err(Error::Model(format!("unexpected character {c:?} in rule {src:?}")));
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek_op(&self) -> Option<&'static str> {
        match self.tokens.get(self.pos) {
            Some(Token::Op(op)) => Some(op),
            _ => None,
        }
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.peek_op() == Some(op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn or(&mut self) -> Result<Expr> {
        let mut e = self.and()?;
        while self.eat_op("||") {
            let rhs = self.and()?;
            e = Expr::Binary(BinOp::Or, Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn and(&mut self) -> Result<Expr> {
        let mut e = self.not()?;
        while self.eat_op("&&") {
            let rhs = self.not()?;
            e = Expr::Binary(BinOp::And, Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn not(&mut self) -> Result<Expr> {
        if self.eat_op("!") {
            return Ok(Expr::Not(Box::new(self.not()?)));
        }
        self.compare()
    }

    fn compare(&mut self) -> Result<Expr> {
        let first = self.additive()?;
        let mut rest = Vec::new();
        loop {
            let op = match self.peek_op() {
                Some("<") => CmpOp::Lt,
                Some("<=") => CmpOp::Le,
                Some(">") => CmpOp::Gt,
                Some(">=") => CmpOp::Ge,
                Some("==") => CmpOp::Eq,
                Some("!=") => CmpOp::Ne,
                _ => break,
            };
            self.pos += 1;
            rest.push((op, self.additive()?));
        }
        Ok(if rest.is_empty() {
            first
        } else {
            Expr::Compare(Box::new(first), rest)
        })
    }

    fn additive(&mut self) -> Result<Expr> {
        let mut e = self.multiplicative()?;
        loop {
            let op = if self.eat_op("+") {
                BinOp::Add
            } else if self.eat_op("-") {
                BinOp::Sub
            } else {
                break;
            };
            let rhs = self.multiplicative()?;
            e = Expr::Binary(op, Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn multiplicative(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        loop {
            let op = if self.eat_op("*") {
                BinOp::Mul
            } else if self.eat_op("/") {
                BinOp::Div
            } else {
                break;
            };
            let rhs = self.unary()?;
            e = Expr::Binary(op, Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_op("-") {
            return Ok(match self.unary()? {
                Expr::Const(c) => Expr::Const(-c),
                e => Expr::Neg(Box::new(e)),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr> {
        let tok = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        match tok {
            Some(Token::Num(v)) => Ok(Expr::Const(v)),
            Some(Token::Var(i)) => Ok(Expr::Feature(i)),
            Some(Token::LParen) => {
                let e = self.or()?;
                match self.tokens.get(self.pos) {
                    Some(Token::RParen) => {
                        self.pos += 1;
                        Ok(e)
                    }
                    _ => Err(Error::Model("missing closing parenthesis".into())),
                }
            }
            Some(t) => Err(Error::Model(format!("unexpected token {t:?}"))),
            None => Err(Error::Model("unexpected end of rule".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn running_rule() -> Expr {
        Expr::parse("0 < x1 < 2 && 4*x1 >= x2 + x3").unwrap()
    }

    #[test]
    fn running_example_rule() {
        let e = running_rule();
        assert!(e.holds(&[1.0, 1.0, 1.0]));
        assert!(!e.holds(&[0.0, 1.0, 1.0]));
        assert!(!e.holds(&[2.0, 1.0, 1.0]));
        assert!(e.holds(&[1.0, 1.5, 1.5]));
        assert!(!e.holds(&[1.0, 5.0, 1.0]));
        // 4·x1 ≥ x2+x3 is non-strict
        assert!(e.holds(&[1.0, 2.0, 2.0]));
        assert_eq!(e.arity(), 3);
    }

    #[test]
    fn precedence_and_negation() {
        let e = Expr::parse("-x1 * 2 + 3 > 0 || !(x2 == 1)").unwrap();
        assert!(e.holds(&[1.0, 0.0]));
        assert!(e.holds(&[-1.0, 1.0]));
        assert!(!e.holds(&[2.0, 1.0]));
        assert_eq!(Expr::parse("-3").unwrap(), Expr::Const(-3.0));
    }

    #[test]
    fn display_reparses_to_same_tree() {
        for src in [
            "0 < x1 < 2 && 4 * x1 >= x2 + x3",
            "x1 - (x2 - x3) != 0.25",
            "!(x1 > 1 || x2 > 1) && x3 / (x1 + 1) <= -2.5",
            "-(x1 + x2) * 3 == x3",
            "(x1 > 0) + (x2 > 0) >= 2",
        ] {
            let e = Expr::parse(src).unwrap();
            let again = Expr::parse(&e.to_string()).unwrap();
            assert_eq!(e, again, "{src} -> {e}");
        }
    }

    #[test]
    fn lexing_errors() {
        assert!(Expr::parse("x0 > 1").is_err());
        assert!(Expr::parse("x1 = 1").is_err());
        assert!(Expr::parse("x1 > ").is_err());
        assert!(Expr::parse("(x1 > 1").is_err());
        assert!(Expr::parse("y1 > 1").is_err());
        assert!(Expr::parse("x1 > 1 )").is_err());
    }
}
