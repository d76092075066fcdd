//! Explicit Euler for `W' = P, P' = Q, Q' = R(x)`.
//!
//! Nodes are always `x_i = x0 + i*h` with `h = (x_end - x0)/n`; halving the
//! step keeps every coarse node bit-identical in the finer grid, so runs at
//! `h, h/2, h/4, ...` can be combined node by node. `R` is sampled once on
//! the finest grid into an [`RTable`] and shared by all coarser runs.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::{Bindings, Expr};

pub use crate::leibniz::InitialConditions;

/// Source of `R(x) = W'''(x)`.
pub trait Forcing: Sync {
    fn r(&self, x: f64) -> Result<f64>;
}

impl<F> Forcing for F
where
    F: Fn(f64) -> f64 + Sync,
{
    fn r(&self, x: f64) -> Result<f64> {
        Ok(self(x))
    }
}

/// A closed-form `R` over `x`.
impl Forcing for Expr {
    fn r(&self, x: f64) -> Result<f64> {
        self.eval(&Bindings::x(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpState {
    pub w: f64,
    pub p: f64,
    pub q: f64,
}

impl IvpState {
    fn is_finite(&self) -> bool {
        self.w.is_finite() && self.p.is_finite() && self.q.is_finite()
    }
}

impl From<InitialConditions> for IvpState {
    fn from(ic: InitialConditions) -> Self {
        Self {
            w: ic.w0,
            p: ic.p0,
            q: ic.q0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub x: f64,
    pub state: IvpState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub x0: f64,
    pub h: f64,
    pub nodes: Vec<Node>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn last(&self) -> &Node {
        self.nodes.last().expect("trajectory has at least one node")
    }

    pub fn w(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(|n| n.state.w)
    }
}

pub(crate) fn node_x(x0: f64, h: f64, i: usize) -> f64 {
    x0 + i as f64 * h
}

fn check_grid(x0: f64, x_end: f64, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidConfig("step count must be at least 1"));
    }
    if !(x0.is_finite() && x_end.is_finite()) {
        return Err(Error::NonFinite { field: "interval" });
    }
    if x_end < x0 {
        return Err(Error::Bounds { x0, x_end });
    }
    Ok(())
}

/// `R` sampled at the left nodes `x_0 .. x_{n-1}` of an `n`-step grid.
/// Built once, then read-only.
#[derive(Debug, Clone, PartialEq)]
pub struct RTable {
    x0: f64,
    x_end: f64,
    values: Vec<f64>,
}

impl RTable {
    pub fn build<F: Forcing + ?Sized>(forcing: &F, x0: f64, x_end: f64, n: usize) -> Result<Self> {
        check_grid(x0, x_end, n)?;
        let h = (x_end - x0) / n as f64;
        let values = (0..n)
            .into_par_iter()
            .map(|i| forcing.r(node_x(x0, h, i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { x0, x_end, values })
    }

    pub fn steps(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Runs Euler with `n` steps, where `n` must divide the table's step count.
    pub fn solve(&self, ic: InitialConditions, n: usize) -> Result<Trajectory> {
        check_grid(self.x0, self.x_end, n)?;
        if self.steps() % n != 0 {
            return Err(Error::InvalidConfig("step count must divide the R-table grid"));
        }
        let stride = self.steps() / n;
        let h = (self.x_end - self.x0) / n as f64;
        let mut state = IvpState::from(ic);
        if !state.is_finite() {
            return Err(Error::NonFiniteState { index: 0 });
        }
        let mut nodes = Vec::with_capacity(n + 1);
        nodes.push(Node { x: self.x0, state });
        for i in 0..n {
            let r = self.values[i * stride];
            state = IvpState {
                w: state.w + h * state.p,
                p: state.p + h * state.q,
                q: state.q + h * r,
            };
            if !state.is_finite() {
                return Err(Error::NonFiniteState { index: i + 1 });
            }
            nodes.push(Node {
                x: node_x(self.x0, h, i + 1),
                state,
            });
        }
        Ok(Trajectory {
            x0: self.x0,
            h,
            nodes,
        })
    }
}

/// `n` Euler steps over `[x0, x_end]`, with `R` taken at the left node of
/// each step.
pub fn euler_solve<F: Forcing + ?Sized>(
    forcing: &F,
    ic: InitialConditions,
    x0: f64,
    x_end: f64,
    n: usize,
) -> Result<Trajectory> {
    RTable::build(forcing, x0, x_end, n)?.solve(ic, n)
}

pub(crate) fn level_steps(n_base: usize, level: u32) -> Result<usize> {
    2usize
        .checked_pow(level)
        .and_then(|m| m.checked_mul(n_base))
        .ok_or(Error::InvalidConfig("step count overflows"))
}

/// Euler with `n_base * 2^level` steps.
pub fn run_halved<F: Forcing + ?Sized>(
    forcing: &F,
    ic: InitialConditions,
    x0: f64,
    x_end: f64,
    n_base: usize,
    level: u32,
) -> Result<Trajectory> {
    euler_solve(forcing, ic, x0, x_end, level_steps(n_base, level)?)
}

/// Levels `0..count` of [`run_halved`], sharing one R-table sampled on the
/// finest grid.
pub fn run_levels<F: Forcing + ?Sized>(
    forcing: &F,
    ic: InitialConditions,
    x0: f64,
    x_end: f64,
    n_base: usize,
    count: u32,
) -> Result<Vec<Trajectory>> {
    if count == 0 {
        return Err(Error::InvalidConfig("need at least one level"));
    }
    check_grid(x0, x_end, n_base)?;
    let table = RTable::build(forcing, x0, x_end, level_steps(n_base, count - 1)?)?;
    (0..count)
        .into_par_iter()
        .map(|level| table.solve(ic, level_steps(n_base, level)?))
        .collect()
}
