//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.
//!
//! Run with `cargo test -p tripint-cli --test acceptance -- --nocapture`.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, TestRunner};
use tripint_core::expr::{BinaryOp, Bindings, Expr, UnaryOp, Var};
use tripint_core::quad::{integrate1d, integrate3d_oracle};
use tripint_core::{euler_solve, run_levels, select_stepsize, InitialConditions, LeibnizEvaluator, QuadConfig, TripleIntegralProblem};

/// `-(3/4)cos 2x + cos x + (1/8)cos 4x` from 1 to 5.
const EXACT_W5: f64 = 0.193_269_109_326_694_5;
const ROUNDED_W5: f64 = 0.193269;

type Outcome = Result<String, String>;

fn problem() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../problems/sine.ini")
        .display()
        .to_string()
}

fn tripint(args: &[&str]) -> Result<(String, Duration), String> {
    let start = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_tripint"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    if !o.status.success() {
        return Err(format!(
            "tripint {args:?} exited with {:?}: {}",
            o.status.code(),
            String::from_utf8_lossy(&o.stderr)
        ));
    }
    Ok((String::from_utf8_lossy(&o.stdout).into_owned(), elapsed))
}

fn summary_value(text: &str, key: &str) -> Result<f64, String> {
    text.lines()
        .find_map(|l| {
            let (k, v) = l.split_once('=')?;
            (k.trim() == key).then(|| v.trim().parse::<f64>().ok())?
        })
        .ok_or_else(|| format!("no `{key}` in output"))
}

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_1() -> Outcome {
    let (out, t) = tripint(&["oracle", "--problem", &problem()])?;
    let v = summary_value(&out, "oracle")?;
    check(
        (v - ROUNDED_W5).abs() <= 1e-5 && t <= Duration::from_secs(10),
        format!("oracle = {v:.10}, |diff| = {:.2e}, {:.2} s", (v - ROUNDED_W5).abs(), t.as_secs_f64()),
    )
}

fn criterion_2() -> Outcome {
    let (out, t) = tripint(&["solve", "--problem", &problem(), "--steps", "400", "--order", "4"])?;
    let m4 = summary_value(&out, "w_final")?;
    let err = (m4 - EXACT_W5).abs();
    check(
        err <= 1e-4 && t <= Duration::from_secs(5),
        format!("M4(5) = {m4:.12}, error {err:.2e}, {:.2} s", t.as_secs_f64()),
    )
}

fn criterion_3() -> Outcome {
    let want = [
        (2, "-1 2"),
        (3, "1/3 -2 8/3"),
        (4, "-1/21 2/3 -8/3 64/21"),
        (5, "1/315 -2/21 8/9 -64/21 1024/315"),
        (6, "-1/9765 2/315 -8/63 64/63 -1024/315 32768/9765"),
    ];
    for (s, expected) in want {
        let (out, _) = tripint(&["coeffs", "--order", &s.to_string()])?;
        let got = out.lines().collect::<Vec<_>>().join(" ");
        if got != expected {
            return Err(format!("order {s}: got `{got}`, want `{expected}`"));
        }
    }
    Ok("orders 2-6 match exactly".into())
}

fn criterion_4() -> Outcome {
    let (out, _) = tripint(&[
        "table", "--problem", &problem(), "--h-list", "0.04,0.02,0.01,0.005",
        "--reference", &EXACT_W5.to_string(),
    ])?;
    let slope_row = out.lines().find(|l| l.starts_with("slope,")).ok_or("no slope row")?;
    let s: Vec<f64> = slope_row
        .split(',')
        .skip(1)
        .take(4)
        .map(|v| v.parse().map_err(|_| format!("bad slope `{v}`")))
        .collect::<Result<_, _>>()?;
    let (euler, m2, m4) = (s[0], s[1], s[3]);
    check(
        (0.85..=1.15).contains(&euler) && (1.75..=2.25).contains(&m2) && (3.5..=4.5).contains(&m4),
        format!("slopes Euler {euler:.3}, M2 {m2:.3}, M3 {:.3}, M4 {m4:.3}", s[2]),
    )
}

fn criterion_5() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for delta in [1e-4, 1e-6] {
        let (out, _) = tripint(&["solve", "--problem", &problem(), "--delta", &delta.to_string()])?;
        let w = summary_value(&out, "w_final")?;
        let n = summary_value(&out, "n")?;
        let err = (w - EXACT_W5).abs();
        pass &= err <= 10.0 * delta;
        parts.push(format!("delta {delta:e}: n = {n}, error {err:.2e} (bound {:.0e})", 10.0 * delta));
    }
    check(pass, parts.join("; "))
}

fn ulps(a: f64, b: f64) -> u64 {
    (a.to_bits() as i64).abs_diff(b.to_bits() as i64)
}

fn criterion_6() -> Outcome {
    let mut worst = 0;
    for a4 in [0.091_725_921_302_909_8, 1.0, 8.0e15, 3.7e-3] {
        for delta in [1e-4, 1e-6, 1e-8, 1e-10] {
            let fine = select_stepsize(delta / 1e4, a4, 0.0, 1e12).map_err(|e| e.to_string())?;
            let coarse = select_stepsize(delta, a4, 0.0, 1e12).map_err(|e| e.to_string())?;
            worst = worst.max(ulps(coarse.big_h / fine.big_h, 10.0));
        }
    }
    check(worst <= 2, format!("H(delta)/H(delta/1e4) within {worst} ulp(s) of 10"))
}

fn criterion_7() -> Outcome {
    let closed = LeibnizEvaluator::new(TripleIntegralProblem::sine_example());
    let numeric = LeibnizEvaluator::new(TripleIntegralProblem::sine_example().without_closed_form());
    let e = |r: tripint_core::Result<f64>| r.map_err(|e| e.to_string());
    let p1 = e(numeric.eval_w1(1.0))?;
    let q1 = e(numeric.eval_w2(1.0))?;
    let r1 = e(closed.eval_r(1.0))?;
    let r1_numeric = e(numeric.eval_r(1.0))?;
    let mut pass = (p1 - 0.900_876_403_1).abs() <= 1e-7
        && (q1 + 0.481_455_573_6).abs() <= 1e-7
        && (r1 + 10.668_733_538_3).abs() <= 1e-7
        && (r1_numeric + 10.668_733_538_3).abs() <= 1e-7;
    let mut worst: f64 = 0.0;
    for i in 0..=20 {
        let x = 1.0 + 0.2 * i as f64;
        worst = worst.max((e(closed.eval_r(x))? - e(numeric.eval_r(x))?).abs());
    }
    pass &= worst <= 1e-6;
    check(
        pass,
        format!("P(1) = {p1:.10}, Q(1) = {q1:.10}, R(1) = {r1:.10}; max |R closed - R Leibniz| on 21 nodes = {worst:.1e}"),
    )
}

fn criterion_8() -> Outcome {
    let (out, _) = tripint(&[
        "bench", "--problem", &problem(), "--h-list", "0.01,0.005,0.0025",
        "--reference", &EXACT_W5.to_string(),
    ])?;
    let mut parts = Vec::new();
    let mut pass = true;
    for line in out.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap_or(f64::NAN)).collect();
        pass &= v[4] < v[2];
        parts.push(format!("h {}: euler {:.1e} vs M4 {:.1e}", v[0], v[2], v[4]));
    }
    check(pass && parts.len() == 3, parts.join("; "))
}

// --- criterion 9: property suites ---

fn arb_expr(depth: u32) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        3 => prop_oneof![Just(Var::X), Just(Var::Y), Just(Var::Z)].prop_map(Expr::Variable),
        1 => (-8i32..=8).prop_map(|k| Expr::Constant(k as f64)),
        1 => (-10.0..10.0f64).prop_map(Expr::Constant),
    ];
    let unary = prop_oneof![
        Just(UnaryOp::Neg), Just(UnaryOp::Sin), Just(UnaryOp::Cos), Just(UnaryOp::Tan),
        Just(UnaryOp::Exp), Just(UnaryOp::Log), Just(UnaryOp::Sqrt),
    ];
    let binary = prop_oneof![
        Just(BinaryOp::Add), Just(BinaryOp::Sub), Just(BinaryOp::Mul), Just(BinaryOp::Div), Just(BinaryOp::Pow),
    ];
    leaf.prop_recursive(depth - 1, 32, 2, move |inner| {
        prop_oneof![
            (unary.clone(), inner.clone()).prop_map(|(op, e)| Expr::Unary(op, Box::new(e))),
            (binary.clone(), inner.clone(), inner).prop_map(|(op, a, b)| Expr::Binary(op, Box::new(a), Box::new(b))),
        ]
    })
}

fn derivative_cases() -> Result<usize, String> {
    let mut runner = TestRunner::deterministic();
    let strategy = (arb_expr(4), prop_oneof![Just(Var::X), Just(Var::Y), Just(Var::Z)], 0.2..1.8f64, 0.2..1.8f64, 0.2..1.8f64);
    let h = 1e-5;
    let mut checked = 0;
    for _ in 0..200_000 {
        if checked == 100 {
            return Ok(checked);
        }
        let (e, v, x, y, z) = strategy.new_tree(&mut runner).unwrap().current();
        let b = Bindings::xyz(x, y, z);
        let t = b.get(v).unwrap();
        let g = |s: f64| e.eval(&b.with(v, s)).ok().filter(|w| w.is_finite() && w.abs() < 1e4);
        let fd = |step: f64| Some((g(t + step)? - g(t - step)?) / (2.0 * step));
        let Some(exact) = e.differentiate(v).eval(&b).ok().filter(|d| d.is_finite()) else { continue };
        let (Some(d1), Some(d4), Some(_)) = (fd(h), fd(4.0 * h), g(t)) else { continue };
        if (d1 - d4).abs() > 1e-6 * (1.0 + d1.abs()) {
            continue; // too close to a singularity for a difference quotient
        }
        checked += 1;
        if (exact - d1).abs() > 1e-5 * (1.0 + exact.abs()) {
            return Err(format!("d/d{v} {e} at {b:?}: {exact} vs {d1}"));
        }
    }
    Err(format!("only {checked} well-conditioned cases drawn"))
}

fn run_prop<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<u32, String> {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| e.to_string())?;
    Ok(cases)
}

fn quad_problem(f: &str, x0: f64, x_end: f64) -> TripleIntegralProblem {
    TripleIntegralProblem::parse(f, "0", "x/2", "-y", "x+y", x0, x_end, None).unwrap()
}

fn criterion_9() -> Outcome {
    let tol = 1e-6;
    let cfg = QuadConfig::with_tol(tol);
    let oracle = |p: &TripleIntegralProblem| integrate3d_oracle(p, &cfg).unwrap();
    let coef = || (1..=16i32).prop_map(|k| k as f64 / 8.0);

    let derivative = derivative_cases()?;
    let linearity = run_prop(6, (coef(), coef(), -2.0..2.0f64, -2.0..2.0f64), |(a, b, alpha, beta)| {
        let f = format!("sin({a}*x + y - {b}*z)");
        let g = format!("exp({b}*x*z/4) + {a}*y");
        let lhs = oracle(&quad_problem(&format!("({alpha})*({f}) + ({beta})*({g})"), 0.5, 1.5));
        let rhs = alpha * oracle(&quad_problem(&f, 0.5, 1.5)) + beta * oracle(&quad_problem(&g, 0.5, 1.5));
        prop_assert!((lhs - rhs).abs() <= 10.0 * tol);
        Ok(())
    })?;
    let additivity = run_prop(6, (coef(), 0.05..0.95f64), |(a, t)| {
        let f = format!("cos({a}*y) * (1 + z*x)");
        let m = 0.5 + t * 1.25;
        let whole = oracle(&quad_problem(&f, 0.5, 1.75));
        let parts = oracle(&quad_problem(&f, 0.5, m)) + oracle(&quad_problem(&f, m, 1.75));
        prop_assert!((whole - parts).abs() <= 10.0 * tol);
        Ok(())
    })?;
    let orientation = run_prop(256, (-5.0..5.0f64, -5.0..5.0f64, 0.1..6.0f64), |(a, b, w)| {
        let g = |t: f64| (w * t).sin() + t * t;
        let c = QuadConfig::with_tol(1e-8);
        prop_assert_eq!(integrate1d(g, a, b, &c).unwrap().to_bits(), (-integrate1d(g, b, a, &c).unwrap()).to_bits());
        Ok(())
    })?;
    let nesting = run_prop(256, (-10.0..10.0f64, 1e-3..50.0f64, 1..40usize, 2..7u32), |(x0, span, n, count)| {
        let zero = |_: f64| 0.0;
        let levels = run_levels(&zero, InitialConditions::zero(), x0, x0 + span, n, count).unwrap();
        for a in 0..levels.len() {
            for b in a + 1..levels.len() {
                for (i, node) in levels[a].nodes.iter().enumerate() {
                    prop_assert_eq!(node.x.to_bits(), levels[b].nodes[i << (b - a)].x.to_bits());
                }
            }
        }
        Ok(())
    })?;
    let determinism = run_prop(256, (-3.0..3.0f64, -1.0..1.0f64, 1..500usize), |(a, p0, n)| {
        let r = move |x: f64| a * (3.0 * x).sin() + x;
        let ic = InitialConditions::new(p0, -p0);
        let u = euler_solve(&r, ic, 0.0, 3.0, n).unwrap();
        let v = euler_solve(&r, ic, 0.0, 3.0, n).unwrap();
        for (s, t) in u.nodes.iter().zip(&v.nodes) {
            prop_assert_eq!(
                [s.x, s.state.w, s.state.p, s.state.q].map(f64::to_bits),
                [t.x, t.state.w, t.state.p, t.state.q].map(f64::to_bits)
            );
        }
        Ok(())
    })?;
    Ok(format!(
        "derivative/FD {derivative}, linearity {linearity}, additivity {additivity}, orientation {orientation}, \
         grid nesting {nesting}, determinism {determinism} cases; 0 failures"
    ))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("oracle check", criterion_1),
        ("pipeline accuracy", criterion_2),
        ("coefficient exactness", criterion_3),
        ("convergence orders", criterion_4),
        ("error control", criterion_5),
        ("quarter-power step law", criterion_6),
        ("Leibniz evaluators", criterion_7),
        ("benchmark trend", criterion_8),
        ("property suites", criterion_9),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
