//! Step-size selection for a target tolerance.
//!
//! A pilot run at step `h` gives `M_4` and `M_5` at every node. Their
//! difference is dominated by the `h^4` term of `M_4`, so
//! `ā4(x_i) = (M_4 - M_5)/h^4` estimates that coefficient node by node. For a
//! tolerance `δ` the new step is
//!
//! ```text
//! H = (δ / max|ā4|)^(1/4),   n = ceil((x_end - x0)/H),   h = (x_end - x0)/n
//! ```
//!
//! and the order-4 combination is rerun on that grid.

use crate::error::{Error, Result};
use crate::ivp::{run_levels, Forcing, InitialConditions};
use crate::leibniz::LeibnizEvaluator;
use crate::problem::TripleIntegralProblem;
use crate::quad::{integrate3d_oracle, QuadConfig};
use crate::richardson::{extrapolate, ExtrapolatedNode, ExtrapolationResult};

/// Relative size, in machine epsilons, below which `M_4 - M_5` is treated
/// as rounding noise.
pub const ROUNDOFF_FLOOR_ULPS: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorEstimate {
    pub h: f64,
    pub per_node_a4bar: Vec<(f64, f64)>,
    pub max_abs_a4bar: f64,
    /// `64 * ā4` at the node attaining `max_abs_a4bar`.
    pub a4: f64,
    pub max_abs_diff: f64,
    /// `max|M_4 - M_5|` fell below the roundoff floor.
    pub roundoff_floor: bool,
}

impl ErrorEstimate {
    /// `ā4` at every node of two combinations over the same grid.
    pub fn from_pair(m4: &ExtrapolationResult, m5: &ExtrapolationResult) -> Self {
        let h = m4.base_h;
        let h4 = h.powi(4);
        let mut per_node_a4bar = Vec::with_capacity(m4.nodes.len());
        let mut max_abs_diff = 0.0f64;
        let mut max_abs_m4 = 0.0f64;
        let mut best = (0.0f64, 0.0f64);
        for (a, b) in m4.nodes.iter().zip(&m5.nodes) {
            let diff = a.m - b.m;
            let bar = if diff == 0.0 { 0.0 } else { diff / h4 };
            per_node_a4bar.push((a.x, bar));
            max_abs_diff = max_abs_diff.max(diff.abs());
            max_abs_m4 = max_abs_m4.max(a.m.abs());
            if bar.abs() > best.1.abs() {
                best = (a.x, bar);
            }
        }
        let threshold = roundoff_threshold(max_abs_m4);
        Self {
            h,
            per_node_a4bar,
            max_abs_a4bar: best.1.abs(),
            a4: 64.0 * best.1,
            max_abs_diff,
            roundoff_floor: max_abs_diff < threshold,
        }
    }
}

fn roundoff_threshold(max_abs_m4: f64) -> f64 {
    ROUNDOFF_FLOOR_ULPS * f64::EPSILON * max_abs_m4.max(1.0)
}

fn max_abs_m(r: &ExtrapolationResult) -> f64 {
    r.nodes.iter().map(|n| n.m.abs()).fold(0.0, f64::max)
}

fn pilot<F: Forcing + ?Sized>(
    forcing: &F,
    ic: InitialConditions,
    x0: f64,
    x_end: f64,
    n_base: usize,
) -> Result<(ExtrapolationResult, ErrorEstimate)> {
    let levels = run_levels(forcing, ic, x0, x_end, n_base, 5)?;
    let m4 = ExtrapolationResult::from_levels(&levels, 4)?;
    let m5 = ExtrapolationResult::from_levels(&levels, 5)?;
    let estimate = ErrorEstimate::from_pair(&m4, &m5);
    Ok((m4, estimate))
}

/// `ā4` over the `n_base`-step grid; fails with [`Error::RoundoffFloor`]
/// when the estimate would be noise.
pub fn estimate_a4_bar<F: Forcing + ?Sized>(
    forcing: &F,
    ic: InitialConditions,
    x0: f64,
    x_end: f64,
    n_base: usize,
) -> Result<ErrorEstimate> {
    let (m4, estimate) = pilot(forcing, ic, x0, x_end, n_base)?;
    if estimate.roundoff_floor {
        return Err(Error::RoundoffFloor {
            max_diff: estimate.max_abs_diff,
            threshold: roundoff_threshold(max_abs_m(&m4)),
        });
    }
    Ok(estimate)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSelection {
    pub big_h: f64,
    pub n: usize,
    pub h: f64,
}

/// `ceil(span / big_h)`, treating quotients within a few ulps of an integer
/// as that integer so that `H = span/n` maps back to `n`.
pub fn step_count(span: f64, big_h: f64) -> usize {
    let q = span / big_h;
    let r = q.round();
    let n = if r >= 1.0 && (q - r).abs() <= 8.0 * f64::EPSILON * r {
        r
    } else {
        q.ceil()
    };
    (n.max(1.0)) as usize
}

pub fn select_stepsize(delta: f64, max_abs_a4bar: f64, x0: f64, x_end: f64) -> Result<StepSelection> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::NonPositiveTolerance(delta));
    }
    if !(max_abs_a4bar >= 0.0) || !max_abs_a4bar.is_finite() {
        return Err(Error::InvalidConfig("max |a4bar| must be finite and non-negative"));
    }
    if !(x_end > x0) {
        return Err(Error::Bounds { x0, x_end });
    }
    let span = x_end - x0;
    let big_h = if max_abs_a4bar == 0.0 {
        span
    } else {
        (delta / max_abs_a4bar).sqrt().sqrt().min(span)
    };
    let n = step_count(span, big_h);
    Ok(StepSelection {
        big_h,
        n,
        h: span / n as f64,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub n_pilot: usize,
    /// Repeat pilot and selection until two successive steps agree within 5%.
    pub iterate: bool,
    pub max_iterations: usize,
    /// Quadrature settings for the Leibniz evaluators.
    pub quad: QuadConfig,
    /// Cross-check against nested quadrature with these settings.
    pub oracle: Option<QuadConfig>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            n_pilot: 400,
            iterate: false,
            max_iterations: 8,
            quad: QuadConfig::default(),
            oracle: None,
        }
    }
}

impl SolveOptions {
    pub fn with_pilot(n_pilot: usize) -> Self {
        Self {
            n_pilot,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToleranceReport {
    pub delta: f64,
    pub x0: f64,
    pub x_end: f64,
    pub h_pilot: f64,
    pub estimate: ErrorEstimate,
    pub big_h: f64,
    pub n: usize,
    pub h_final: f64,
    pub w_final: f64,
    pub iterations: usize,
    /// The pilot estimate was roundoff-dominated and the pilot `M_4` was kept.
    pub roundoff_floor: bool,
    pub oracle_value: Option<f64>,
    pub error_vs_oracle: Option<f64>,
    pub result: ExtrapolationResult,
}

impl ToleranceReport {
    /// `n` and `h_final` agree with `big_h` and the interval.
    pub fn is_consistent(&self) -> bool {
        let span = self.x_end - self.x0;
        if span == 0.0 {
            return self.n == 1 && self.h_final == 0.0;
        }
        self.n == step_count(span, self.big_h) && self.h_final == span / self.n as f64
    }
}

fn degenerate_report(problem: &TripleIntegralProblem, delta: f64, result: ExtrapolationResult) -> ToleranceReport {
    ToleranceReport {
        delta,
        x0: problem.x0,
        x_end: problem.x_end,
        h_pilot: 0.0,
        estimate: ErrorEstimate {
            h: 0.0,
            per_node_a4bar: vec![(problem.x0, 0.0)],
            max_abs_a4bar: 0.0,
            a4: 0.0,
            max_abs_diff: 0.0,
            roundoff_floor: false,
        },
        big_h: 0.0,
        n: 1,
        h_final: 0.0,
        w_final: result.last().m,
        iterations: 0,
        roundoff_floor: false,
        oracle_value: None,
        error_vs_oracle: None,
        result,
    }
}

/// Pilot run, step selection, and a final order-4 run on the selected grid.
///
/// If the pilot estimate is roundoff-dominated the pilot `M_4` is returned
/// as the answer and `roundoff_floor` is set.
pub fn solve_with_tolerance(
    problem: &TripleIntegralProblem,
    delta: f64,
    opts: &SolveOptions,
) -> Result<ToleranceReport> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::NonPositiveTolerance(delta));
    }
    if opts.n_pilot == 0 {
        return Err(Error::InvalidConfig("pilot step count must be at least 1"));
    }
    let ev = LeibnizEvaluator::with_config(problem.clone(), opts.quad);
    let ic = ev.initial_conditions()?;
    let (x0, x_end) = (problem.x0, problem.x_end);

    let mut report = if x_end == x0 {
        degenerate_report(problem, delta, extrapolate(&ev, ic, x0, x_end, 1, 4)?)
    } else {
        solve_interval(&ev, ic, delta, opts)?
    };

    if let Some(cfg) = &opts.oracle {
        let exact = integrate3d_oracle(problem, cfg)?;
        report.oracle_value = Some(exact);
        report.error_vs_oracle = Some((report.w_final - exact).abs());
    }
    Ok(report)
}

fn solve_interval(
    ev: &LeibnizEvaluator,
    ic: InitialConditions,
    delta: f64,
    opts: &SolveOptions,
) -> Result<ToleranceReport> {
    let (x0, x_end) = (ev.problem().x0, ev.problem().x_end);
    let span = x_end - x0;

    let mut n_pilot = opts.n_pilot;
    let (mut pilot_m4, mut estimate) = pilot(ev, ic, x0, x_end, n_pilot)?;
    let mut iterations = 1;
    let mut selection = None;

    while !estimate.roundoff_floor {
        let sel = select_stepsize(delta, estimate.max_abs_a4bar, x0, x_end)?;
        let settled = selection
            .map(|prev: StepSelection| (sel.h - prev.h).abs() <= 0.05 * prev.h)
            .unwrap_or(false);
        selection = Some(sel);
        if !opts.iterate || settled || iterations >= opts.max_iterations {
            break;
        }
        n_pilot = sel.n;
        (pilot_m4, estimate) = pilot(ev, ic, x0, x_end, n_pilot)?;
        iterations += 1;
    }
    let h_pilot = span / n_pilot as f64;

    let (big_h, n, h_final, result, floor) = match selection {
        Some(sel) if !estimate.roundoff_floor => {
            let result = extrapolate(ev, ic, x0, x_end, sel.n, 4)?;
            (sel.big_h, sel.n, sel.h, result, false)
        }
        _ => (h_pilot, n_pilot, h_pilot, pilot_m4, true),
    };
    let w_final = result.last().m;
    Ok(ToleranceReport {
        delta,
        x0,
        x_end,
        h_pilot,
        estimate,
        big_h,
        n,
        h_final,
        w_final,
        iterations,
        roundoff_floor: floor,
        oracle_value: None,
        error_vs_oracle: None,
        result,
    })
}

impl ToleranceReport {
    pub fn final_node(&self) -> &ExtrapolatedNode {
        self.result.last()
    }
}
