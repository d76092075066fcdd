//! Richardson extrapolation of Euler runs at steps `h, h/2, ..., h/2^(s-1)`.
//!
//! With `K_n` the Euler value at step `h/2^n`, the weights `d_n` of
//! `M_s = Σ d_n K_n` solve `A d = e_1` where `A[i][j] = (2^-i)^j`. That makes
//! `Σ d_n = 1` and cancels the `h, h^2, ..., h^(s-1)` error terms, so `M_s`
//! is accurate to `O(h^s)`. The weights are solved exactly over the
//! rationals and rounded to `f64` once, at combination time.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::ivp::{run_levels, Forcing, InitialConditions, Trajectory};

/// Exact weight, always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

pub const MIN_ORDER: usize = 2;
pub const MAX_ORDER: usize = 12;

fn check_order(s: usize) -> Result<()> {
    if (MIN_ORDER..=MAX_ORDER).contains(&s) {
        Ok(())
    } else {
        Err(Error::OrderOutOfRange {
            order: s,
            min: MIN_ORDER,
            max: MAX_ORDER,
        })
    }
}

/// `(2^-row)^col` as an exact rational.
fn halving_power(row: usize, col: usize) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << (row * col))
}

/// Weights `d_0..d_{s-1}` for an order-`s` combination.
pub fn coefficients(s: usize) -> Result<Vec<Rational>> {
    check_order(s)?;
    let mut a: Vec<Vec<Rational>> = (0..s)
        .map(|i| (0..s).map(|j| halving_power(i, j)).collect())
        .collect();
    let mut rhs: Vec<Rational> = (0..s)
        .map(|i| if i == 0 { Rational::one() } else { Rational::zero() })
        .collect();

    for col in 0..s {
        let pivot = (col..s)
            .find(|&r| !a[r][col].is_zero())
            .expect("halving matrix is nonsingular");
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..s {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = &a[row][col] / &a[col][col];
            for k in col..s {
                let delta = &factor * &a[col][k];
                a[row][k] -= delta;
            }
            let delta = &factor * &rhs[col];
            rhs[row] -= delta;
        }
    }

    let mut d = vec![Rational::zero(); s];
    for row in (0..s).rev() {
        let mut acc = rhs[row].clone();
        for k in row + 1..s {
            acc -= &a[row][k] * &d[k];
        }
        d[row] = acc / &a[row][row];
    }
    Ok(d)
}

fn to_f64(r: &Rational) -> f64 {
    r.to_f64().expect("weights are small enough for f64")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolatedNode {
    pub x: f64,
    /// Euler `W` at this node for levels `0..s`.
    pub k_values: Vec<f64>,
    pub m: f64,
}

impl ExtrapolatedNode {
    pub fn euler(&self) -> f64 {
        self.k_values[0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolationResult {
    pub order: usize,
    pub coefficients: Vec<Rational>,
    pub base_h: f64,
    pub nodes: Vec<ExtrapolatedNode>,
}

impl ExtrapolationResult {
    /// Combines the first `s` of a set of halved-step runs (as produced by
    /// [`run_levels`]) at every level-0 node.
    pub fn from_levels(levels: &[Trajectory], s: usize) -> Result<Self> {
        let coefficients = coefficients(s)?;
        if levels.len() < s {
            return Err(Error::InvalidConfig("fewer level runs than the extrapolation order"));
        }
        let weights: Vec<f64> = coefficients.iter().map(to_f64).collect();
        let base = &levels[0];
        let n = base.steps();
        let nodes = base
            .nodes
            .iter()
            .enumerate()
            .map(|(i, node)| {
                let k_values: Vec<f64> = levels[..s]
                    .iter()
                    .map(|t| {
                        let stride = t.steps() / n;
                        t.nodes[i * stride].state.w
                    })
                    .collect();
                let m = weights.iter().zip(&k_values).map(|(d, k)| d * k).sum();
                ExtrapolatedNode {
                    x: node.x,
                    k_values,
                    m,
                }
            })
            .collect();
        Ok(Self {
            order: s,
            coefficients,
            base_h: base.h,
            nodes,
        })
    }

    pub fn last(&self) -> &ExtrapolatedNode {
        self.nodes.last().expect("at least one node")
    }
}

/// `M_s` at every node of the `n_base`-step grid.
pub fn extrapolate<F: Forcing + ?Sized>(
    forcing: &F,
    ic: InitialConditions,
    x0: f64,
    x_end: f64,
    n_base: usize,
    s: usize,
) -> Result<ExtrapolationResult> {
    check_order(s)?;
    let levels = run_levels(forcing, ic, x0, x_end, n_base, s as u32)?;
    ExtrapolationResult::from_levels(&levels, s)
}

/// Step count for a requested step size; the step must divide the interval.
pub fn exact_step_count(x0: f64, x_end: f64, h: f64) -> Result<usize> {
    let span = x_end - x0;
    if !(h > 0.0) || !h.is_finite() || !(span > 0.0) {
        return Err(Error::NonIntegerStepCount { h });
    }
    let q = span / h;
    let n = q.round();
    if n < 1.0 || (n * h - span).abs() > 1e-9 * span {
        return Err(Error::NonIntegerStepCount { h });
    }
    Ok(n as usize)
}

/// Least-squares slope of `log err` against `log h`.
pub fn loglog_slope(h: &[f64], err: &[f64]) -> f64 {
    let n = h.len().min(err.len()) as f64;
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub n: usize,
    pub euler: f64,
    /// `M_s` at the end of the interval, in the order of
    /// [`ConvergenceTable::orders`].
    pub extrapolated: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSlopes {
    pub euler: f64,
    pub extrapolated: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub orders: Vec<usize>,
    pub reference: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Present when there are at least two rows.
    pub slopes: Option<ConvergenceSlopes>,
}

impl ConvergenceRow {
    pub fn euler_error(&self, reference: f64) -> f64 {
        (self.euler - reference).abs()
    }

    pub fn errors(&self, reference: f64) -> Vec<f64> {
        self.extrapolated.iter().map(|m| (m - reference).abs()).collect()
    }
}

/// End-of-interval Euler and `M_s` values for each step in `h_list`, with
/// errors measured against `reference` and fitted log-log slopes.
pub fn convergence_table<F: Forcing + ?Sized>(
    forcing: &F,
    ic: InitialConditions,
    x0: f64,
    x_end: f64,
    h_list: &[f64],
    orders: &[usize],
    reference: f64,
) -> Result<ConvergenceTable> {
    if h_list.is_empty() {
        return Err(Error::InvalidConfig("empty step list"));
    }
    for &s in orders {
        check_order(s)?;
    }
    let counts = h_list
        .iter()
        .map(|&h| exact_step_count(x0, x_end, h))
        .collect::<Result<Vec<_>>>()?;
    let levels_needed = orders.iter().copied().max().unwrap_or(1) as u32;

    let mut rows = Vec::with_capacity(h_list.len());
    for (&h, &n) in h_list.iter().zip(&counts) {
        let levels = run_levels(forcing, ic, x0, x_end, n, levels_needed)?;
        let euler = levels[0].last().state.w;
        let extrapolated = orders
            .iter()
            .map(|&s| ExtrapolationResult::from_levels(&levels, s).map(|r| r.last().m))
            .collect::<Result<Vec<_>>>()?;
        rows.push(ConvergenceRow {
            h,
            n,
            euler,
            extrapolated,
        });
    }

    let slopes = (rows.len() >= 2).then(|| {
        let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
        let euler_err: Vec<f64> = rows.iter().map(|r| r.euler_error(reference)).collect();
        let extrapolated = (0..orders.len())
            .map(|k| {
                let errs: Vec<f64> = rows.iter().map(|r| (r.extrapolated[k] - reference).abs()).collect();
                loglog_slope(&hs, &errs)
            })
            .collect();
        ConvergenceSlopes {
            euler: loglog_slope(&hs, &euler_err),
            extrapolated,
        }
    });

    Ok(ConvergenceTable {
        orders: orders.to_vec(),
        reference,
        rows,
        slopes,
    })
}
