//! Expression trees over the variables `x`, `y`, `z`.
//!
//! Integrands, limit functions and the optional closed-form third derivative
//! are all written in a small infix language:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?            (right-associative)
//! primary := number | 'pi' | 'x' | 'y' | 'z'
//!          | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | tan | exp | log | sqrt
//! ```
//!
//! A minus sign directly in front of a numeric literal that is not itself a
//! power base folds into a negative [`Expr::Constant`], so `-2*x` and
//! `(-2)*x` parse to the same tree while `-2^2` stays `-(2^2)`.

mod diff;
mod parse;

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

pub use parse::parse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X,
    Y,
    Z,
}

impl Var {
    pub const ALL: [Var; 3] = [Var::X, Var::Y, Var::Z];

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::Z => "z",
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
}

impl UnaryOp {
    pub const FUNCTIONS: [UnaryOp; 6] = [
        UnaryOp::Sin,
        UnaryOp::Cos,
        UnaryOp::Tan,
        UnaryOp::Exp,
        UnaryOp::Log,
        UnaryOp::Sqrt,
    ];

    /// Surface name of a function; `None` for negation.
    pub fn function_name(self) -> Option<&'static str> {
        match self {
            UnaryOp::Neg => None,
            UnaryOp::Sin => Some("sin"),
            UnaryOp::Cos => Some("cos"),
            UnaryOp::Tan => Some("tan"),
            UnaryOp::Exp => Some("exp"),
            UnaryOp::Log => Some("log"),
            UnaryOp::Sqrt => Some("sqrt"),
        }
    }

    fn apply(self, a: f64) -> Result<f64> {
        Ok(match self {
            UnaryOp::Neg => -a,
            UnaryOp::Sin => a.sin(),
            UnaryOp::Cos => a.cos(),
            UnaryOp::Tan => a.tan(),
            UnaryOp::Exp => a.exp(),
            UnaryOp::Log => {
                if a <= 0.0 {
                    return Err(Error::Domain {
                        what: "log of non-positive argument",
                        value: a,
                    });
                }
                a.ln()
            }
            UnaryOp::Sqrt => {
                if a < 0.0 {
                    return Err(Error::Domain {
                        what: "sqrt of negative argument",
                        value: a,
                    });
                }
                a.sqrt()
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => " + ",
            BinaryOp::Sub => " - ",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }

    fn apply(self, a: f64, b: f64) -> Result<f64> {
        Ok(match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => {
                if b == 0.0 {
                    return Err(Error::Domain {
                        what: "division by zero",
                        value: a,
                    });
                }
                a / b
            }
            BinaryOp::Pow => {
                if a == 0.0 && b == 0.0 {
                    return Err(Error::Domain {
                        what: "0^0 is undefined",
                        value: a,
                    });
                }
                if a == 0.0 && b < 0.0 {
                    return Err(Error::Domain {
                        what: "zero raised to a negative power",
                        value: b,
                    });
                }
                if a < 0.0 && b.fract() != 0.0 {
                    return Err(Error::Domain {
                        what: "negative base with non-integer exponent",
                        value: a,
                    });
                }
                a.powf(b)
            }
        })
    }
}

/// Immutable expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Constant(f64),
    Variable(Var),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

/// Values for the free variables of an expression. Unset variables are an
/// error at evaluation time, never a default.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Bindings {
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub z: Option<f64>,
}

impl Bindings {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn x(x: f64) -> Self {
        Self {
            x: Some(x),
            ..Self::default()
        }
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Self {
            x: Some(x),
            y: Some(y),
            z: None,
        }
    }

    pub fn xyz(x: f64, y: f64, z: f64) -> Self {
        Self {
            x: Some(x),
            y: Some(y),
            z: Some(z),
        }
    }

    pub fn get(&self, v: Var) -> Option<f64> {
        match v {
            Var::X => self.x,
            Var::Y => self.y,
            Var::Z => self.z,
        }
    }

    pub fn with(mut self, v: Var, value: f64) -> Self {
        match v {
            Var::X => self.x = Some(value),
            Var::Y => self.y = Some(value),
            Var::Z => self.z = Some(value),
        }
        self
    }
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr::Constant(c)
    }

    pub fn var(v: Var) -> Self {
        Expr::Variable(v)
    }

    pub fn unary(op: UnaryOp, e: Expr) -> Self {
        Expr::Unary(op, Box::new(e))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Self {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn sin(self) -> Self {
        Self::unary(UnaryOp::Sin, self)
    }

    pub fn cos(self) -> Self {
        Self::unary(UnaryOp::Cos, self)
    }

    pub fn tan(self) -> Self {
        Self::unary(UnaryOp::Tan, self)
    }

    pub fn exp(self) -> Self {
        Self::unary(UnaryOp::Exp, self)
    }

    pub fn log(self) -> Self {
        Self::unary(UnaryOp::Log, self)
    }

    pub fn sqrt(self) -> Self {
        Self::unary(UnaryOp::Sqrt, self)
    }

    pub fn pow(self, exponent: Expr) -> Self {
        Self::binary(BinaryOp::Pow, self, exponent)
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Expr::Constant(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_constant() == Some(1.0)
    }

    pub fn eval(&self, b: &Bindings) -> Result<f64> {
        match self {
            Expr::Constant(c) => Ok(*c),
            Expr::Variable(v) => b.get(*v).ok_or(Error::UnboundVariable(*v)),
            Expr::Unary(op, a) => op.apply(a.eval(b)?),
            Expr::Binary(op, l, r) => op.apply(l.eval(b)?, r.eval(b)?),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Constant(_) => {}
            Expr::Variable(v) => {
                out.insert(*v);
            }
            Expr::Unary(_, a) => a.collect_vars(out),
            Expr::Binary(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Expr::Constant(_) => true,
            Expr::Variable(_) => false,
            Expr::Unary(_, a) => a.is_closed(),
            Expr::Binary(_, l, r) => l.is_closed() && r.is_closed(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Constant(_) | Expr::Variable(_) => 1,
            Expr::Unary(_, a) => 1 + a.depth(),
            Expr::Binary(_, l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    // Binding strength used by the printer: 1 additive, 2 multiplicative,
    // 3 prefix minus, 4 power, 5 atoms and calls.
    fn precedence(&self) -> u8 {
        match self {
            Expr::Constant(c) if c.is_sign_negative() => 3,
            Expr::Constant(_) | Expr::Variable(_) => 5,
            Expr::Unary(UnaryOp::Neg, _) => 3,
            Expr::Unary(_, _) => 5,
            Expr::Binary(BinaryOp::Add | BinaryOp::Sub, _, _) => 1,
            Expr::Binary(BinaryOp::Mul | BinaryOp::Div, _, _) => 2,
            Expr::Binary(BinaryOp::Pow, _, _) => 4,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            f.write_str("(")?;
            self.write_bare(f)?;
            f.write_str(")")
        } else {
            self.write_bare(f)
        }
    }

    fn write_bare(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Constant(c) => {
                if c.is_sign_negative() {
                    write!(f, "-{:?}", c.abs())
                } else {
                    write!(f, "{c:?}")
                }
            }
            Expr::Variable(v) => write!(f, "{v}"),
            Expr::Unary(UnaryOp::Neg, a) => {
                f.write_str("-")?;
                // A bare literal after '-' would fold back into a constant.
                if matches!(**a, Expr::Constant(_)) {
                    f.write_str("(")?;
                    a.write_bare(f)?;
                    f.write_str(")")
                } else {
                    a.write_at(f, 3)
                }
            }
            Expr::Unary(op, a) => {
                write!(f, "{}(", op.function_name().unwrap_or_default())?;
                a.write_bare(f)?;
                f.write_str(")")
            }
            Expr::Binary(op, l, r) => {
                let (lmin, rmin) = match op {
                    BinaryOp::Add | BinaryOp::Sub => (1, 2),
                    BinaryOp::Mul | BinaryOp::Div => (2, 3),
                    BinaryOp::Pow => (5, 3),
                };
                l.write_at(f, lmin)?;
                f.write_str(op.symbol())?;
                r.write_at(f, rmin)
            }
        }
    }
}

/// Prints in the surface syntax; `parse(&e.to_string())` rebuilds `e`.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_bare(f)
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::Constant(c)
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Self {
        Expr::Variable(v)
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $op:expr) => {
        impl std::ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, self, rhs)
            }
        }
    };
}

impl_binop!(Add, add, BinaryOp::Add);
impl_binop!(Sub, sub, BinaryOp::Sub);
impl_binop!(Mul, mul, BinaryOp::Mul);
impl_binop!(Div, div, BinaryOp::Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self)
    }
}
