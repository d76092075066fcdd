//! Symbolic differentiation and the rewrite set used to tidy its output.

use super::{BinaryOp, Expr, UnaryOp, Var};

fn zero() -> Expr {
    Expr::Constant(0.0)
}

fn one() -> Expr {
    Expr::Constant(1.0)
}

fn negate(e: Expr) -> Expr {
    match e {
        Expr::Unary(UnaryOp::Neg, inner) => *inner,
        Expr::Constant(c) => Expr::Constant(-c),
        other => Expr::unary(UnaryOp::Neg, other),
    }
}

fn fold_finite(v: crate::Result<f64>) -> Option<Expr> {
    match v {
        Ok(v) if v.is_finite() => Some(Expr::Constant(v)),
        _ => None,
    }
}

impl Expr {
    /// Applies one bottom-up pass of a fixed rewrite set:
    ///
    /// - constant folding, skipped when the result would be non-finite or
    ///   the operation is undefined (so `0^0` survives to runtime);
    /// - `0*e`, `e*0`, `0/e` → `0`;
    /// - `1*e`, `e*1`, `e/1`, `e^1`, `e+0`, `0+e`, `e-0` → `e`;
    /// - `0-e` → `-e`;
    /// - `e^0` → `1` for symbolic or nonzero `e`;
    /// - `--e` → `e`.
    ///
    /// Each rule holds wherever both sides are defined. The pass is a fixed
    /// point: simplifying twice gives the same tree.
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Constant(_) | Expr::Variable(_) => self.clone(),
            Expr::Unary(UnaryOp::Neg, a) => negate(a.simplify()),
            Expr::Unary(op, a) => {
                let a = a.simplify();
                if let Some(c) = a.as_constant() {
                    if let Some(folded) = fold_finite(op.apply(c)) {
                        return folded;
                    }
                }
                Expr::unary(*op, a)
            }
            Expr::Binary(op, l, r) => {
                let l = l.simplify();
                let r = r.simplify();
                if let (Some(a), Some(b)) = (l.as_constant(), r.as_constant()) {
                    if let Some(folded) = fold_finite(op.apply(a, b)) {
                        return folded;
                    }
                }
                match op {
                    BinaryOp::Add if l.is_zero() => r,
                    BinaryOp::Add if r.is_zero() => l,
                    BinaryOp::Sub if r.is_zero() => l,
                    BinaryOp::Sub if l.is_zero() => negate(r),
                    BinaryOp::Mul if l.is_zero() || r.is_zero() => zero(),
                    BinaryOp::Mul if l.is_one() => r,
                    BinaryOp::Mul if r.is_one() => l,
                    BinaryOp::Div if r.is_one() => l,
                    BinaryOp::Div if l.is_zero() && !r.is_zero() => zero(),
                    BinaryOp::Pow if r.is_zero() && !l.is_zero() => one(),
                    BinaryOp::Pow if r.is_one() => l,
                    _ => Expr::binary(*op, l, r),
                }
            }
        }
    }

    /// Exact partial derivative with respect to `v`, simplified.
    ///
    /// Powers with a variable-free exponent use the power rule. Any other
    /// `u^w` is differentiated as `exp(w*log(u))`, so the result is only
    /// meaningful where `u > 0`.
    pub fn differentiate(&self, v: Var) -> Expr {
        self.derivative_raw(v).simplify()
    }

    fn derivative_raw(&self, v: Var) -> Expr {
        match self {
            Expr::Constant(_) => zero(),
            Expr::Variable(u) => {
                if *u == v {
                    one()
                } else {
                    zero()
                }
            }
            Expr::Unary(op, a) => {
                let da = a.derivative_raw(v);
                let a = (**a).clone();
                match op {
                    UnaryOp::Neg => -da,
                    UnaryOp::Sin => a.cos() * da,
                    UnaryOp::Cos => -(a.sin()) * da,
                    UnaryOp::Tan => da / a.cos().pow(Expr::Constant(2.0)),
                    UnaryOp::Exp => a.exp() * da,
                    UnaryOp::Log => da / a,
                    UnaryOp::Sqrt => da / (Expr::Constant(2.0) * a.sqrt()),
                }
            }
            Expr::Binary(op, l, r) => {
                let dl = l.derivative_raw(v);
                let dr = r.derivative_raw(v);
                let (l, r) = ((**l).clone(), (**r).clone());
                match op {
                    BinaryOp::Add => dl + dr,
                    BinaryOp::Sub => dl - dr,
                    BinaryOp::Mul => dl * r.clone() + l * dr,
                    BinaryOp::Div => {
                        (dl * r.clone() - l * dr) / r.pow(Expr::Constant(2.0))
                    }
                    BinaryOp::Pow if r.is_closed() => {
                        let reduced = (r.clone() - one()).simplify();
                        r * l.pow(reduced) * dl
                    }
                    BinaryOp::Pow => {
                        let log_l = l.clone().log();
                        let rewritten = (r.clone() * log_l.clone()).exp();
                        rewritten * (dr * log_l + r * dl / l)
                    }
                }
            }
        }
    }
}
