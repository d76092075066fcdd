//! Derivatives of `W` by differentiating under the integral sign.
//!
//! With `F(x, y) = ∫_{z0(x,y)}^{z1(x,y)} f dz`:
//!
//! ```text
//! W'   = ∫ F dy
//! W''  = ∫ Fx dy + F(x,y1) y1' - F(x,y0) y0'
//! W''' = ∫ Fxx dy + 2 Fx(x,y1) y1' + Fy(x,y1) y1'^2 + F(x,y1) y1''
//!                 - 2 Fx(x,y0) y0' - Fy(x,y0) y0'^2 - F(x,y0) y0''
//! ```
//!
//! and the `F` partials follow the same pattern one level in, e.g.
//! `Fxx = ∫ fxx dz + [2 fx z_x + fz z_x^2 + f z_xx]` evaluated between the
//! z-limits. Every term is a quadrature of an exact symbolic partial or a
//! point evaluation; nothing here uses finite differences.

use crate::error::Result;
use crate::expr::{Bindings, Expr, Var};
use crate::ivp::Forcing;
use crate::problem::{DerivativeBundle, TripleIntegralProblem};
use crate::quad::{integrate_axis, z_integral, QuadConfig};

/// `(W, P, Q)` at the left end of the outer interval. `w0` is always zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialConditions {
    pub w0: f64,
    pub p0: f64,
    pub q0: f64,
}

impl InitialConditions {
    pub fn new(p0: f64, q0: f64) -> Self {
        Self { w0: 0.0, p0, q0 }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FPartials {
    pub fx: f64,
    pub fy: f64,
    pub fxx: f64,
}

#[derive(Debug, Clone)]
pub struct LeibnizEvaluator {
    problem: TripleIntegralProblem,
    bundle: DerivativeBundle,
    cfg: QuadConfig,
}

struct Boundary {
    f: f64,
    fx: f64,
    fz: f64,
}

impl LeibnizEvaluator {
    pub fn new(problem: TripleIntegralProblem) -> Self {
        Self::with_config(problem, QuadConfig::default())
    }

    pub fn with_config(problem: TripleIntegralProblem, cfg: QuadConfig) -> Self {
        let bundle = problem.derivatives();
        Self {
            problem,
            bundle,
            cfg,
        }
    }

    pub fn problem(&self) -> &TripleIntegralProblem {
        &self.problem
    }

    pub fn bundle(&self) -> &DerivativeBundle {
        &self.bundle
    }

    pub fn config(&self) -> &QuadConfig {
        &self.cfg
    }

    fn z_limits(&self, at: &Bindings) -> Result<(f64, f64)> {
        Ok((self.problem.z0.eval(at)?, self.problem.z1.eval(at)?))
    }

    fn y_limits(&self, x: f64) -> Result<(f64, f64)> {
        let at = Bindings::x(x);
        Ok((self.problem.y0.eval(&at)?, self.problem.y1.eval(&at)?))
    }

    fn z_quad(&self, g: &Expr, x: f64, y: f64, lo: f64, hi: f64) -> Result<f64> {
        let at = Bindings::xy(x, y);
        integrate_axis(Var::Z, |z| g.eval(&at.with(Var::Z, z)), lo, hi, &self.cfg)
    }

    fn boundary(&self, x: f64, y: f64, z: f64) -> Result<Boundary> {
        let at = Bindings::xyz(x, y, z);
        Ok(Boundary {
            f: self.problem.f.eval(&at)?,
            fx: self.bundle.fx.eval(&at)?,
            fz: self.bundle.fz.eval(&at)?,
        })
    }

    /// `F(x, y) = ∫ f dz` between the z-limits.
    pub fn eval_f(&self, x: f64, y: f64) -> Result<f64> {
        z_integral(&self.problem, x, y, &self.cfg)
    }

    /// `∂F/∂x`.
    pub fn eval_fx(&self, x: f64, y: f64) -> Result<f64> {
        let at = Bindings::xy(x, y);
        let (z0, z1) = self.z_limits(&at)?;
        let b = &self.bundle;
        let inner = self.z_quad(&b.fx, x, y, z0, z1)?;
        let top = self.problem.f.eval(&at.with(Var::Z, z1))? * b.z1x.eval(&at)?;
        let bottom = self.problem.f.eval(&at.with(Var::Z, z0))? * b.z0x.eval(&at)?;
        Ok(inner + top - bottom)
    }

    /// `∂F/∂y`.
    pub fn eval_fy(&self, x: f64, y: f64) -> Result<f64> {
        let at = Bindings::xy(x, y);
        let (z0, z1) = self.z_limits(&at)?;
        let b = &self.bundle;
        let inner = self.z_quad(&b.fy, x, y, z0, z1)?;
        let top = self.problem.f.eval(&at.with(Var::Z, z1))? * b.z1y.eval(&at)?;
        let bottom = self.problem.f.eval(&at.with(Var::Z, z0))? * b.z0y.eval(&at)?;
        Ok(inner + top - bottom)
    }

    /// `∂²F/∂x²`.
    pub fn eval_fxx(&self, x: f64, y: f64) -> Result<f64> {
        let at = Bindings::xy(x, y);
        let (z0, z1) = self.z_limits(&at)?;
        let b = &self.bundle;
        let inner = self.z_quad(&b.fxx, x, y, z0, z1)?;
        let edge = |z: f64, zx: &Expr, zxx: &Expr| -> Result<f64> {
            let zx = zx.eval(&at)?;
            let zxx = zxx.eval(&at)?;
            let v = self.boundary(x, y, z)?;
            Ok(2.0 * v.fx * zx + v.fz * zx * zx + v.f * zxx)
        };
        Ok(inner + edge(z1, &b.z1x, &b.z1xx)? - edge(z0, &b.z0x, &b.z0xx)?)
    }

    pub fn eval_f_partials(&self, x: f64, y: f64) -> Result<FPartials> {
        Ok(FPartials {
            fx: self.eval_fx(x, y)?,
            fy: self.eval_fy(x, y)?,
            fxx: self.eval_fxx(x, y)?,
        })
    }

    /// `W'(x) = P(x)`.
    pub fn eval_w1(&self, x: f64) -> Result<f64> {
        let (y0, y1) = self.y_limits(x)?;
        integrate_axis(Var::Y, |y| self.eval_f(x, y), y0, y1, &self.cfg)
    }

    /// `W''(x) = Q(x)`.
    pub fn eval_w2(&self, x: f64) -> Result<f64> {
        let (y0, y1) = self.y_limits(x)?;
        let at = Bindings::x(x);
        let inner = integrate_axis(Var::Y, |y| self.eval_fx(x, y), y0, y1, &self.cfg)?;
        let top = self.eval_f(x, y1)? * self.bundle.y1p.eval(&at)?;
        let bottom = self.eval_f(x, y0)? * self.bundle.y0p.eval(&at)?;
        Ok(inner + top - bottom)
    }

    /// `W'''(x) = R(x)`: the closed form when the problem carries one,
    /// otherwise [`Self::eval_r_expanded`].
    pub fn eval_r(&self, x: f64) -> Result<f64> {
        match &self.problem.r_closed {
            Some(r) => r.eval(&Bindings::x(x)),
            None => self.eval_r_expanded(x),
        }
    }

    /// `W'''(x)` from the full expansion, ignoring any closed form.
    pub fn eval_r_expanded(&self, x: f64) -> Result<f64> {
        let (y0, y1) = self.y_limits(x)?;
        let at = Bindings::x(x);
        let b = &self.bundle;
        let inner = integrate_axis(Var::Y, |y| self.eval_fxx(x, y), y0, y1, &self.cfg)?;
        let edge = |y: f64, yp: &Expr, ypp: &Expr| -> Result<f64> {
            let yp = yp.eval(&at)?;
            let ypp = ypp.eval(&at)?;
            let mut acc = 0.0;
            if yp != 0.0 {
                acc += 2.0 * self.eval_fx(x, y)? * yp + self.eval_fy(x, y)? * yp * yp;
            }
            if ypp != 0.0 {
                acc += self.eval_f(x, y)? * ypp;
            }
            Ok(acc)
        };
        Ok(inner + edge(y1, &b.y1p, &b.y1pp)? - edge(y0, &b.y0p, &b.y0pp)?)
    }

    pub fn initial_conditions(&self) -> Result<InitialConditions> {
        let x0 = self.problem.x0;
        Ok(InitialConditions::new(self.eval_w1(x0)?, self.eval_w2(x0)?))
    }
}

impl Forcing for LeibnizEvaluator {
    fn r(&self, x: f64) -> Result<f64> {
        self.eval_r(x)
    }
}
