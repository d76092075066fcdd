//! Triple integrals with variable limits, evaluated as a third-order
//! initial value problem.
//!
//! The integral
//!
//! ```text
//! W(t) = ∫_{x0}^{t} ∫_{y0(x)}^{y1(x)} ∫_{z0(x,y)}^{z1(x,y)} f(x, y, z) dz dy dx
//! ```
//!
//! satisfies `W' = P`, `P' = Q`, `Q' = R(t)` with `W(x0) = 0`. The pieces are:
//!
//! - [`expr`]: the expression language for integrands and limits, with
//!   symbolic differentiation.
//! - [`problem`]: a validated problem instance and its symbolic partials.
//! - [`quad`]: adaptive Simpson quadrature in one to three dimensions; the
//!   independent oracle.
//! - [`leibniz`]: `W'`, `W''` and `R = W'''` through differentiation under the
//!   integral sign.
//! - [`ivp`]: explicit Euler on nested equidistant grids.
//! - [`richardson`]: exact extrapolation weights and the combined estimates.
//! - [`control`]: tolerance-driven step-size selection.

pub mod control;
pub mod error;
pub mod expr;
pub mod ivp;
pub mod leibniz;
pub mod problem;
pub mod quad;
pub mod richardson;

pub use control::{
    estimate_a4_bar, select_stepsize, solve_with_tolerance, ErrorEstimate, SolveOptions,
    StepSelection, ToleranceReport,
};
pub use error::{Error, Result};
pub use expr::{Bindings, Expr, Var};
pub use ivp::{euler_solve, run_halved, run_levels, Forcing, InitialConditions, IvpState, RTable, Trajectory};
pub use leibniz::LeibnizEvaluator;
pub use problem::{DerivativeBundle, TripleIntegralProblem};
pub use quad::QuadConfig;
pub use richardson::{coefficients, convergence_table, extrapolate, ExtrapolationResult, Rational};
