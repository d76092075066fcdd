use thiserror::Error;

use crate::expr::Var;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: expected {}, found {found}", .expected.join(" or "))]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
        found: String,
    },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("domain error: {what} (argument {value})")]
    Domain { what: &'static str, value: f64 },

    #[error("variable `{0}` is not bound")]
    UnboundVariable(Var),

    #[error("field `{field}` may not depend on `{var}`")]
    VariableScope { field: &'static str, var: Var },

    #[error("outer interval is reversed: x0 = {x0} > x_end = {x_end}")]
    Bounds { x0: f64, x_end: f64 },

    #[error("non-finite value in `{field}`")]
    NonFinite { field: &'static str },

    /// Recursion cap hit before the local error test passed. `estimate` is
    /// the best value available at that point.
    #[error("quadrature depth exceeded{} (best estimate {estimate})", level_suffix(.level))]
    DepthExceeded { estimate: f64, level: Option<Var> },

    #[error("integrand is not finite at {at}{}", level_suffix(.level))]
    NonFiniteSample { at: f64, level: Option<Var> },

    #[error("Euler state became non-finite at step {index}")]
    NonFiniteState { index: usize },

    #[error("extrapolation order {order} outside {min}..={max}")]
    OrderOutOfRange { order: usize, min: usize, max: usize },

    #[error("step {h} does not divide the interval into a whole number of steps")]
    NonIntegerStepCount { h: f64 },

    #[error("error estimate is roundoff-dominated: max |M4 - M5| = {max_diff:e} < {threshold:e}")]
    RoundoffFloor { max_diff: f64, threshold: f64 },

    #[error("tolerance must be positive, got {0}")]
    NonPositiveTolerance(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

fn level_suffix(level: &Option<Var>) -> String {
    match level {
        Some(v) => format!(" in the {v}-integral"),
        None => String::new(),
    }
}

impl Error {
    /// True for failures of the numerics themselves, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. }
                | Error::DepthExceeded { .. }
                | Error::NonFiniteSample { .. }
                | Error::NonFiniteState { .. }
                | Error::RoundoffFloor { .. }
        )
    }
}
