//! Adaptive Simpson quadrature in one, two and three dimensions.
//!
//! Nested integrals split the tolerance by a factor of ten per level, so the
//! innermost integral is always the most accurate. The three-dimensional
//! routine is the reference the Euler/Richardson pipeline is checked against;
//! it shares nothing with that pipeline beyond expression evaluation.

use crate::error::{Error, Result};
use crate::expr::{Bindings, Var};
use crate::problem::TripleIntegralProblem;

pub const ORACLE_TOL: f64 = 1e-6;

/// Per-call settings. Subintervals narrower than
/// `min_interval * (1 + |b - a|)` are not split further.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub tol: f64,
    pub max_depth: u32,
    pub min_interval: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_depth: 40,
            min_interval: 1e-13,
        }
    }
}

impl QuadConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    /// Default for [`integrate3d_oracle`]. Nesting multiplies the work of
    /// each level, and the local Simpson test is conservative: on smooth
    /// integrands this setting is already accurate to about `1e-8`, where
    /// the `1e-10` default would take minutes.
    pub fn oracle() -> Self {
        Self::with_tol(ORACLE_TOL)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig("quadrature tolerance must be positive"));
        }
        if self.max_depth < 1 {
            return Err(Error::InvalidConfig("max_depth must be at least 1"));
        }
        if !(self.min_interval > 0.0) {
            return Err(Error::InvalidConfig("min_interval must be positive"));
        }
        Ok(())
    }

    /// The configuration one nesting level further in.
    pub fn inner(&self) -> Self {
        Self {
            tol: self.tol / 10.0,
            ..*self
        }
    }
}

struct Simpson<'a, G> {
    g: &'a mut G,
    level: Option<Var>,
    min_width: f64,
    exhausted: bool,
}

impl<G> Simpson<'_, G>
where
    G: FnMut(f64) -> Result<f64>,
{
    fn sample(&mut self, t: f64) -> Result<f64> {
        let v = (self.g)(t)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteSample {
                at: t,
                level: self.level,
            })
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        a: f64,
        fa: f64,
        m: f64,
        fm: f64,
        b: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.sample(lm)?;
        let frm = self.sample(rm)?;
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        let estimate = left + right + delta / 15.0;
        if delta.abs() <= 15.0 * tol {
            return Ok(estimate);
        }
        if depth == 0 || (b - a) < self.min_width {
            self.exhausted = true;
            return Ok(estimate);
        }
        let l = self.refine(a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1)?;
        let r = self.refine(m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1)?;
        Ok(l + r)
    }
}

fn integrate_at<G>(level: Option<Var>, g: &mut G, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    cfg.validate()?;
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate_at(level, g, b, a, cfg).map(|v| -v).map_err(|e| match e {
            Error::DepthExceeded { estimate, level } => Error::DepthExceeded {
                estimate: -estimate,
                level,
            },
            other => other,
        });
    }
    let mut s = Simpson {
        g,
        level,
        min_width: cfg.min_interval * (1.0 + (b - a)),
        exhausted: false,
    };
    let m = 0.5 * (a + b);
    let fa = s.sample(a)?;
    let fm = s.sample(m)?;
    let fb = s.sample(b)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let value = s.refine(a, fa, m, fm, b, fb, whole, cfg.tol, cfg.max_depth)?;
    if s.exhausted {
        Err(Error::DepthExceeded {
            estimate: value,
            level,
        })
    } else {
        Ok(value)
    }
}

/// `∫_a^b g`. Returns exactly 0 for `a == b`; reversed bounds flip the sign.
pub fn integrate1d<G>(mut g: G, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64>
where
    G: FnMut(f64) -> f64,
{
    integrate_at(None, &mut |t| Ok(g(t)), a, b, cfg)
}

/// As [`integrate1d`] for integrands that can fail; their errors pass
/// through unchanged.
pub fn try_integrate1d<G>(mut g: G, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    integrate_at(None, &mut g, a, b, cfg)
}

pub(crate) fn integrate_axis<G>(axis: Var, mut g: G, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    integrate_at(Some(axis), &mut g, a, b, cfg)
}

/// `∫_{z0(x,y)}^{z1(x,y)} f(x, y, z) dz`.
pub(crate) fn z_integral(p: &TripleIntegralProblem, x: f64, y: f64, cfg: &QuadConfig) -> Result<f64> {
    let at = Bindings::xy(x, y);
    let lo = p.z0.eval(&at)?;
    let hi = p.z1.eval(&at)?;
    integrate_axis(Var::Z, |z| p.f.eval(&at.with(Var::Z, z)), lo, hi, cfg)
}

/// `W'(x) = ∫_{y0(x)}^{y1(x)} ∫_{z0}^{z1} f dz dy`, with the inner integral at
/// a tenth of `cfg.tol`.
pub fn integrate2d(p: &TripleIntegralProblem, x: f64, cfg: &QuadConfig) -> Result<f64> {
    let at = Bindings::x(x);
    let lo = p.y0.eval(&at)?;
    let hi = p.y1.eval(&at)?;
    let inner = cfg.inner();
    integrate_axis(Var::Y, |y| z_integral(p, x, y, &inner), lo, hi, cfg)
}

/// The full triple integral by nested quadrature, x outermost, with
/// tolerances `tol`, `tol/10`, `tol/100` from the outside in.
pub fn integrate3d_oracle(p: &TripleIntegralProblem, cfg: &QuadConfig) -> Result<f64> {
    let inner = cfg.inner();
    integrate_axis(Var::X, |x| integrate2d(p, x, &inner), p.x0, p.x_end, cfg)
}
