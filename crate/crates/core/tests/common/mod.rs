#![allow(dead_code)]

use proptest::prelude::*;
use tripint_core::expr::{BinaryOp, Expr, UnaryOp, Var};

pub const EXACT_W5: f64 = 0.193_269_109_326_694_5;

pub fn arb_var() -> impl Strategy<Value = Var> {
    prop_oneof![Just(Var::X), Just(Var::Y), Just(Var::Z)]
}

fn arb_leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        3 => arb_var().prop_map(Expr::Variable),
        1 => (-8i32..=8).prop_map(|k| Expr::Constant(k as f64)),
        1 => (-1.0e3..1.0e3f64).prop_map(Expr::Constant),
    ]
}

pub fn arb_unary() -> impl Strategy<Value = UnaryOp> {
    prop_oneof![
        Just(UnaryOp::Neg),
        Just(UnaryOp::Sin),
        Just(UnaryOp::Cos),
        Just(UnaryOp::Tan),
        Just(UnaryOp::Exp),
        Just(UnaryOp::Log),
        Just(UnaryOp::Sqrt),
    ]
}

pub fn arb_binary() -> impl Strategy<Value = BinaryOp> {
    prop_oneof![
        Just(BinaryOp::Add),
        Just(BinaryOp::Sub),
        Just(BinaryOp::Mul),
        Just(BinaryOp::Div),
        Just(BinaryOp::Pow),
    ]
}

/// Random trees of depth at most `depth` (a lone leaf has depth 1).
pub fn arb_expr(depth: u32) -> impl Strategy<Value = Expr> {
    arb_leaf().prop_recursive(depth.saturating_sub(1), 64, 2, |inner| {
        prop_oneof![
            (arb_unary(), inner.clone()).prop_map(|(op, e)| Expr::Unary(op, Box::new(e))),
            (arb_binary(), inner.clone(), inner)
                .prop_map(|(op, a, b)| Expr::Binary(op, Box::new(a), Box::new(b))),
        ]
    })
}

pub fn central_diff(g: impl Fn(f64) -> Option<f64>, t: f64, h: f64) -> Option<f64> {
    Some((g(t + h)? - g(t - h)?) / (2.0 * h))
}

pub fn ulps_apart(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    let key = |v: f64| {
        let bits = v.to_bits() as i64;
        if bits < 0 { i64::MIN - bits } else { bits }
    };
    key(a).abs_diff(key(b))
}
