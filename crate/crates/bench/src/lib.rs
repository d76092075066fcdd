//! Shared fixtures for the criterion benches.

use tripint_core::{Expr, InitialConditions, LeibnizEvaluator, TripleIntegralProblem};

/// The sine example with its closed-form `R` and initial conditions.
pub struct SineFixture {
    pub problem: TripleIntegralProblem,
    pub r: Expr,
    pub ic: InitialConditions,
}

impl SineFixture {
    pub fn new() -> Self {
        let problem = TripleIntegralProblem::sine_example();
        let r = problem.r_closed.clone().expect("sine example has a closed-form R");
        let ic = LeibnizEvaluator::new(problem.clone())
            .initial_conditions()
            .expect("initial conditions");
        Self { problem, r, ic }
    }

    /// Step count for step size `h` on `[x0, x_end]`.
    pub fn steps(&self, h: f64) -> usize {
        (self.problem.span() / h).round() as usize
    }
}

impl Default for SineFixture {
    fn default() -> Self {
        Self::new()
    }
}

/// Step sizes swept by the Euler and extrapolation benches.
pub const H_LIST: [f64; 3] = [0.01, 0.005, 0.0025];
