//! Problem instances: an integrand, its iterated limits, and the outer interval.
//!
//! The outer upper limit is the independent variable of `W`, so `x` inside the
//! expressions is the dummy outer integration variable and `x_end` is where
//! `W` is wanted. Integrand and limits are assumed twice continuously
//! differentiable on the domain; this is documented, not checked.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::expr::{parse, Expr, Var};

#[derive(Debug, Clone, PartialEq)]
pub struct TripleIntegralProblem {
    pub f: Expr,
    pub y0: Expr,
    pub y1: Expr,
    pub z0: Expr,
    pub z1: Expr,
    pub x0: f64,
    pub x_end: f64,
    /// Closed-form third derivative of `W`, when known.
    pub r_closed: Option<Expr>,
}

/// Symbolic partials of the integrand and the limit functions.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeBundle {
    pub fx: Expr,
    pub fy: Expr,
    pub fz: Expr,
    pub fxx: Expr,
    pub y0p: Expr,
    pub y1p: Expr,
    pub y0pp: Expr,
    pub y1pp: Expr,
    pub z0x: Expr,
    pub z1x: Expr,
    pub z0y: Expr,
    pub z1y: Expr,
    pub z0xx: Expr,
    pub z1xx: Expr,
}

fn check_scope(field: &'static str, e: &Expr, allowed: &[Var]) -> Result<()> {
    let allowed: BTreeSet<Var> = allowed.iter().copied().collect();
    match e.free_vars().difference(&allowed).next() {
        Some(&var) => Err(Error::VariableScope { field, var }),
        None => Ok(()),
    }
}

impl TripleIntegralProblem {
    /// Builds and validates a problem from already-parsed parts.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        f: Expr,
        y0: Expr,
        y1: Expr,
        z0: Expr,
        z1: Expr,
        x0: f64,
        x_end: f64,
        r_closed: Option<Expr>,
    ) -> Result<Self> {
        Self {
            f,
            y0,
            y1,
            z0,
            z1,
            x0,
            x_end,
            r_closed,
        }
        .validate()
    }

    /// Parses each expression field and validates the result.
    #[allow(clippy::too_many_arguments)]
    pub fn parse(
        f: &str,
        y0: &str,
        y1: &str,
        z0: &str,
        z1: &str,
        x0: f64,
        x_end: f64,
        r_closed: Option<&str>,
    ) -> Result<Self> {
        Self::new(
            parse(f)?,
            parse(y0)?,
            parse(y1)?,
            parse(z0)?,
            parse(z1)?,
            x0,
            x_end,
            r_closed.map(parse).transpose()?,
        )
    }

    /// `∫_1^5 ∫_0^x ∫_0^{x+y} sin(x+y+z) dz dy dx`, with its closed-form
    /// third derivative `8 sin 4x − 6 sin 2x + sin x`.
    pub fn sine_example() -> Self {
        Self::parse(
            "sin(x+y+z)",
            "0",
            "x",
            "0",
            "x+y",
            1.0,
            5.0,
            Some("8*sin(4*x) - 6*sin(2*x) + sin(x)"),
        )
        .expect("built-in example is valid")
    }

    pub fn validate(self) -> Result<Self> {
        check_scope("f", &self.f, &[Var::X, Var::Y, Var::Z])?;
        check_scope("y0", &self.y0, &[Var::X])?;
        check_scope("y1", &self.y1, &[Var::X])?;
        check_scope("z0", &self.z0, &[Var::X, Var::Y])?;
        check_scope("z1", &self.z1, &[Var::X, Var::Y])?;
        if let Some(r) = &self.r_closed {
            check_scope("R", r, &[Var::X])?;
        }
        if !self.x0.is_finite() {
            return Err(Error::NonFinite { field: "x0" });
        }
        if !self.x_end.is_finite() {
            return Err(Error::NonFinite { field: "x_end" });
        }
        if self.x_end < self.x0 {
            return Err(Error::Bounds {
                x0: self.x0,
                x_end: self.x_end,
            });
        }
        Ok(self)
    }

    pub fn span(&self) -> f64 {
        self.x_end - self.x0
    }

    /// The same problem without its closed-form `R`.
    pub fn without_closed_form(&self) -> Self {
        Self {
            r_closed: None,
            ..self.clone()
        }
    }

    pub fn derivatives(&self) -> DerivativeBundle {
        let fx = self.f.differentiate(Var::X);
        let fxx = fx.differentiate(Var::X);
        let y0p = self.y0.differentiate(Var::X);
        let y1p = self.y1.differentiate(Var::X);
        let z0x = self.z0.differentiate(Var::X);
        let z1x = self.z1.differentiate(Var::X);
        DerivativeBundle {
            fy: self.f.differentiate(Var::Y),
            fz: self.f.differentiate(Var::Z),
            y0pp: y0p.differentiate(Var::X),
            y1pp: y1p.differentiate(Var::X),
            z0y: self.z0.differentiate(Var::Y),
            z1y: self.z1.differentiate(Var::Y),
            z0xx: z0x.differentiate(Var::X),
            z1xx: z1x.differentiate(Var::X),
            fx,
            fxx,
            y0p,
            y1p,
            z0x,
            z1x,
        }
    }
}
