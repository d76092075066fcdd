use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use tripint_core::control::estimate_a4_bar;
use tripint_core::quad::{integrate3d_oracle, ORACLE_TOL};
use tripint_core::richardson::exact_step_count;
use tripint_core::{
    coefficients, convergence_table, euler_solve, extrapolate, select_stepsize, solve_with_tolerance,
    InitialConditions, LeibnizEvaluator, QuadConfig, SolveOptions,
};

use crate::args::{Cli, Command};
use crate::error::CliError;
use crate::output::{csv_bytes, line_chart, num, Series};
use crate::problem_file::ProblemFile;

pub const DEFAULT_ORDER: usize = 4;
pub const DEFAULT_PILOT_STEPS: usize = 400;
/// Orders reported by the convergence table.
pub const TABLE_ORDERS: [usize; 3] = [2, 3, 4];

pub const TABLE_HEADER: [&str; 7] = ["h", "euler", "m2", "m3", "m4", "err_euler", "err_m4"];
pub const DELTA_TABLE_HEADER: [&str; 5] = ["delta", "max_abs_a4bar", "H", "n", "h"];
pub const BENCH_HEADER: [&str; 5] = ["h", "euler_sec", "euler_err", "rich_sec", "rich_err"];
pub const PLOT_HEADER: [&str; 3] = ["x", "euler_w", "richardson_m4"];
pub const A4BAR_HEADER: [&str; 2] = ["x", "a4bar"];

/// Runs one command; results go to `out`, notes to `err`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let mut ctx = Ctx { cli, out, err };
    match cli.command {
        Command::Solve => ctx.solve(),
        Command::Oracle => ctx.oracle(),
        Command::Coeffs => ctx.coeffs(),
        Command::Table => ctx.table(),
        Command::Bench => ctx.bench(),
        Command::Plot => ctx.plot(),
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

fn parse_list(flag: &str, text: &str) -> Result<Vec<f64>, CliError> {
    let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(CliError::usage(format!("{flag} is empty")));
    }
    items
        .iter()
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::usage(format!("{flag}: `{s}` is not a number")))
        })
        .collect()
}

fn kv(key: &str, value: impl std::fmt::Display) -> String {
    format!("{key:<16}= {value}\n")
}

fn min_time<T>(mut kernel: impl FnMut() -> Result<T, CliError>) -> Result<(Duration, T), CliError> {
    // Repeat until a tenth of a second has been spent (at most 50 runs) and
    // keep the fastest, which is the least disturbed by the rest of the system.
    let mut best = Duration::MAX;
    let mut spent = Duration::ZERO;
    let mut runs = 0;
    loop {
        let start = Instant::now();
        let value = kernel()?;
        let t = start.elapsed();
        best = best.min(t);
        spent += t;
        runs += 1;
        if spent >= Duration::from_millis(100) || runs >= 50 {
            return Ok((best, value));
        }
    }
}

impl Ctx<'_> {
    fn note(&mut self, msg: &str) -> Result<(), CliError> {
        if !self.cli.quiet {
            writeln!(self.err, "{msg}").map_err(|source| CliError::Write {
                path: "<stderr>".into(),
                source,
            })?;
        }
        Ok(())
    }

    fn print(&mut self, text: &str) -> Result<(), CliError> {
        self.out.write_all(text.as_bytes()).map_err(|source| CliError::Write {
            path: "<stdout>".into(),
            source,
        })
    }

    fn problem_file(&self) -> Result<ProblemFile, CliError> {
        let path = self
            .cli
            .problem
            .as_deref()
            .ok_or_else(|| CliError::usage("this command needs --problem FILE"))?;
        ProblemFile::load(path)
    }

    fn quad(&self, pf: &ProblemFile) -> Result<QuadConfig, CliError> {
        let cfg = pf.run.quad_tol.map(QuadConfig::with_tol).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    fn oracle_config(&self) -> Result<QuadConfig, CliError> {
        let cfg = QuadConfig::with_tol(self.cli.oracle_tol.unwrap_or(ORACLE_TOL));
        cfg.validate()?;
        Ok(cfg)
    }

    fn evaluator(&self, pf: &ProblemFile) -> Result<(LeibnizEvaluator, InitialConditions), CliError> {
        let ev = LeibnizEvaluator::with_config(pf.problem.clone(), self.quad(pf)?);
        let ic = ev.initial_conditions()?;
        Ok((ev, ic))
    }

    /// Exact value for error columns: `--reference`, else the oracle.
    fn reference(&mut self, pf: &ProblemFile) -> Result<f64, CliError> {
        if let Some(v) = self.cli.reference {
            return Ok(v);
        }
        let cfg = self.oracle_config()?;
        let v = integrate3d_oracle(&pf.problem, &cfg)?;
        self.note(&format!("reference: oracle value {} (tol {:e})", num(v), cfg.tol))?;
        Ok(v)
    }

    /// Writes `name` under `--out`, or to stdout when `stdout_fallback`.
    fn emit(&mut self, name: &str, bytes: &[u8], stdout_fallback: bool) -> Result<(), CliError> {
        match &self.cli.out {
            Some(dir) => {
                let path = dir.join(name);
                write_file(dir, &path, bytes)?;
                self.note(&format!("wrote {}", path.display()))
            }
            None if stdout_fallback => self.out.write_all(bytes).map_err(|source| CliError::Write {
                path: "<stdout>".into(),
                source,
            }),
            None => Ok(()),
        }
    }

    fn order(&self, pf: Option<&ProblemFile>) -> usize {
        self.cli
            .order
            .or(pf.and_then(|p| p.run.order))
            .unwrap_or(DEFAULT_ORDER)
    }

    fn pilot_steps(&self, pf: &ProblemFile) -> Result<usize, CliError> {
        match pf.run.h0 {
            Some(h0) => Ok(exact_step_count(pf.problem.x0, pf.problem.x_end, h0)?),
            None => Ok(DEFAULT_PILOT_STEPS),
        }
    }

    fn solve(&mut self) -> Result<(), CliError> {
        let pf = self.problem_file()?;
        let delta = self.cli.delta.or(pf.run.delta);
        match (self.cli.steps, delta) {
            (Some(n), _) => self.solve_fixed(&pf, n),
            (None, Some(d)) => self.solve_tolerance(&pf, d),
            (None, None) => Err(CliError::usage(
                "solve needs --steps N, --delta D, or `delta` in [run]",
            )),
        }
    }

    fn solve_fixed(&mut self, pf: &ProblemFile, n: usize) -> Result<(), CliError> {
        let order = self.order(Some(pf));
        let (ev, ic) = self.evaluator(pf)?;
        let p = &pf.problem;
        let res = extrapolate(&ev, ic, p.x0, p.x_end, n, order)?;
        let last = res.last();
        let mut summary = String::new();
        summary += &kv("mode", "fixed-step");
        summary += &kv("order", order);
        summary += &kv("n", n);
        summary += &kv("h", num(res.base_h));
        summary += &kv("euler", num(last.euler()));
        summary += &kv("w_final", num(last.m));
        if self.cli.oracle {
            let cfg = self.oracle_config()?;
            let exact = integrate3d_oracle(p, &cfg)?;
            summary += &kv("oracle", num(exact));
            summary += &kv("oracle_tol", format!("{:e}", cfg.tol));
            summary += &kv("error_vs_oracle", num((last.m - exact).abs()));
        }
        self.print(&summary)?;

        let m_col = format!("m{order}");
        let mut header: Vec<String> = vec!["x".into()];
        header.extend((0..order).map(|k| format!("k{k}")));
        header.push(m_col);
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = res.nodes.iter().map(|node| {
            std::iter::once(num(node.x))
                .chain(node.k_values.iter().map(|&k| num(k)))
                .chain(std::iter::once(num(node.m)))
                .collect::<Vec<_>>()
        });
        let bytes = csv_bytes(&header, rows)?;
        self.emit("nodes.csv", &bytes, false)
    }

    fn solve_tolerance(&mut self, pf: &ProblemFile, delta: f64) -> Result<(), CliError> {
        if let Some(order) = self.cli.order.or(pf.run.order) {
            if order != DEFAULT_ORDER {
                self.note(&format!(
                    "note: tolerance control always combines to order 4; order {order} ignored"
                ))?;
            }
        }
        let opts = SolveOptions {
            n_pilot: self.pilot_steps(pf)?,
            iterate: self.cli.iterate,
            quad: self.quad(pf)?,
            oracle: if self.cli.oracle { Some(self.oracle_config()?) } else { None },
            ..SolveOptions::default()
        };
        let r = solve_with_tolerance(&pf.problem, delta, &opts)?;
        if r.roundoff_floor {
            self.note("note: pilot estimate is roundoff-dominated; the pilot M4 is reported")?;
        }
        let mut summary = String::new();
        summary += &kv("mode", "tolerance");
        summary += &kv("delta", format!("{delta:e}"));
        summary += &kv("h_pilot", num(r.h_pilot));
        summary += &kv("max_abs_a4bar", num(r.estimate.max_abs_a4bar));
        summary += &kv("a4", num(r.estimate.a4));
        summary += &kv("H", num(r.big_h));
        summary += &kv("n", r.n);
        summary += &kv("h_final", num(r.h_final));
        summary += &kv("iterations", r.iterations);
        summary += &kv("roundoff_floor", r.roundoff_floor);
        summary += &kv("w_final", num(r.w_final));
        if let (Some(v), Some(e)) = (r.oracle_value, r.error_vs_oracle) {
            summary += &kv("oracle", num(v));
            summary += &kv("oracle_tol", format!("{:e}", opts.oracle.map_or(0.0, |c| c.tol)));
            summary += &kv("error_vs_oracle", num(e));
        }
        self.print(&summary)?;

        let rows = r
            .result
            .nodes
            .iter()
            .map(|node| [num(node.x), num(node.euler()), num(node.m)]);
        let bytes = csv_bytes(&["x", "euler_w", "m4"], rows)?;
        self.emit("nodes.csv", &bytes, false)?;
        let rows = r.estimate.per_node_a4bar.iter().map(|&(x, a)| [num(x), num(a)]);
        let bytes = csv_bytes(&A4BAR_HEADER, rows)?;
        self.emit("a4bar.csv", &bytes, false)
    }

    fn oracle(&mut self) -> Result<(), CliError> {
        let pf = self.problem_file()?;
        let cfg = self.oracle_config()?;
        let v = integrate3d_oracle(&pf.problem, &cfg)?;
        let text = kv("oracle", num(v)) + &kv("tol", format!("{:e}", cfg.tol));
        self.print(&text)
    }

    fn coeffs(&mut self) -> Result<(), CliError> {
        let order = self.order(None);
        let mut text = String::new();
        for d in coefficients(order)? {
            text += &format!("{d}\n");
        }
        self.print(&text)
    }

    fn table(&mut self) -> Result<(), CliError> {
        match (&self.cli.h_list, &self.cli.delta_list) {
            (Some(h), None) => {
                let hs = parse_list("--h-list", h)?;
                self.convergence(&hs)
            }
            (None, Some(d)) => {
                let ds = parse_list("--delta-list", d)?;
                self.delta_table(&ds)
            }
            (Some(_), Some(_)) => Err(CliError::usage("give either --h-list or --delta-list, not both")),
            (None, None) => Err(CliError::usage("table needs --h-list or --delta-list")),
        }
    }

    fn convergence(&mut self, hs: &[f64]) -> Result<(), CliError> {
        let pf = self.problem_file()?;
        let p = &pf.problem;
        for &h in hs {
            exact_step_count(p.x0, p.x_end, h)?;
        }
        let (ev, ic) = self.evaluator(&pf)?;
        let reference = self.reference(&pf)?;
        let t = convergence_table(&ev, ic, p.x0, p.x_end, hs, &TABLE_ORDERS, reference)?;
        let mut rows: Vec<Vec<String>> = t
            .rows
            .iter()
            .map(|r| {
                let errs = r.errors(reference);
                let mut row = vec![num(r.h), num(r.euler)];
                row.extend(r.extrapolated.iter().map(|&m| num(m)));
                row.push(num(r.euler_error(reference)));
                row.push(num(errs[2]));
                row
            })
            .collect();
        if let Some(s) = &t.slopes {
            let mut row = vec!["slope".to_string(), num(s.euler)];
            row.extend(s.extrapolated.iter().map(|&v| num(v)));
            row.extend([String::new(), String::new()]);
            rows.push(row);
        }
        let bytes = csv_bytes(&TABLE_HEADER, rows)?;
        self.emit("table.csv", &bytes, true)
    }

    fn delta_table(&mut self, deltas: &[f64]) -> Result<(), CliError> {
        let pf = self.problem_file()?;
        let p = &pf.problem;
        let (ev, ic) = self.evaluator(&pf)?;
        let est = estimate_a4_bar(&ev, ic, p.x0, p.x_end, self.pilot_steps(&pf)?)?;
        let rows = deltas
            .iter()
            .map(|&d| {
                let s = select_stepsize(d, est.max_abs_a4bar, p.x0, p.x_end)?;
                Ok([
                    num(d),
                    num(est.max_abs_a4bar),
                    num(s.big_h),
                    s.n.to_string(),
                    num(s.h),
                ])
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let bytes = csv_bytes(&DELTA_TABLE_HEADER, rows)?;
        self.emit("delta_table.csv", &bytes, true)
    }

    fn bench(&mut self) -> Result<(), CliError> {
        let h_text = self
            .cli
            .h_list
            .as_deref()
            .ok_or_else(|| CliError::usage("bench needs --h-list"))?;
        let hs = parse_list("--h-list", h_text)?;
        let pf = self.problem_file()?;
        let p = pf.problem.clone();
        let counts = hs
            .iter()
            .map(|&h| exact_step_count(p.x0, p.x_end, h))
            .collect::<Result<Vec<_>, _>>()?;
        let (ev, ic) = self.evaluator(&pf)?;
        let reference = self.reference(&pf)?;

        let mut rows = Vec::with_capacity(hs.len());
        for (&h, &n) in hs.iter().zip(&counts) {
            let (euler_t, euler) =
                min_time(|| Ok(euler_solve(&ev, ic, p.x0, p.x_end, n)?.last().state.w))?;
            let (rich_t, rich) = min_time(|| Ok(extrapolate(&ev, ic, p.x0, p.x_end, n, 4)?.last().m))?;
            rows.push([
                num(h),
                num(euler_t.as_secs_f64()),
                num((euler - reference).abs()),
                num(rich_t.as_secs_f64()),
                num((rich - reference).abs()),
            ]);
        }
        let bytes = csv_bytes(&BENCH_HEADER, rows)?;
        self.emit("bench.csv", &bytes, true)
    }

    fn plot(&mut self) -> Result<(), CliError> {
        let n = self
            .cli
            .steps
            .ok_or_else(|| CliError::usage("plot needs --steps N"))?;
        if self.cli.out.is_none() {
            return Err(CliError::usage("plot needs --out DIR for plot.csv and plot.svg"));
        }
        let pf = self.problem_file()?;
        let p = &pf.problem;
        let (ev, ic) = self.evaluator(&pf)?;
        let res = extrapolate(&ev, ic, p.x0, p.x_end, n, 4)?;
        let xs: Vec<f64> = res.nodes.iter().map(|n| n.x).collect();
        let euler: Vec<f64> = res.nodes.iter().map(|n| n.euler()).collect();
        let m4: Vec<f64> = res.nodes.iter().map(|n| n.m).collect();

        let rows = (0..xs.len()).map(|i| [num(xs[i]), num(euler[i]), num(m4[i])]);
        let bytes = csv_bytes(&PLOT_HEADER, rows)?;
        self.emit("plot.csv", &bytes, false)?;

        let title = format!("W(x): Euler vs Richardson M4, h = {}", num(res.base_h));
        let svg = line_chart(
            &title,
            "x",
            &xs,
            &[
                Series { label: "Euler", color: "#1f77b4", dash: None, y: &euler },
                Series { label: "Richardson M4", color: "#d62728", dash: Some("6 3"), y: &m4 },
            ],
        );
        self.emit("plot.svg", svg.as_bytes(), false)?;
        let gap = euler
            .iter()
            .zip(&m4)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        self.print(&(kv("h", num(res.base_h)) + &kv("max_gap", num(gap))))
    }
}

fn write_file(dir: &Path, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    std::fs::write(path, bytes).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}
