//! INI problem files.
//!
//! ```text
//! [problem]
//! f     = sin(x+y+z)
//! y0    = 0
//! y1    = x
//! z0    = 0
//! z1    = x+y
//! x0    = 1
//! x_end = 5
//! R     = 8*sin(4*x) - 6*sin(2*x) + sin(x)   # optional
//!
//! [run]
//! delta    = 1e-6   # optional
//! h0       = 0.01   # optional pilot step
//! order    = 4      # optional
//! quad_tol = 1e-10  # optional
//! ```
//!
//! `#` and `;` start a comment anywhere on a line. Unknown sections or keys
//! and repeated keys are rejected. `x0` and `x_end` may be any closed
//! expression, e.g. `2*pi`.

use std::collections::BTreeMap;
use std::path::Path;

use ini::Ini;
use tripint_core::expr::{parse, Bindings, Expr};
use tripint_core::TripleIntegralProblem;

use crate::error::CliError;

const PROBLEM_KEYS: [&str; 8] = ["f", "y0", "y1", "z0", "z1", "x0", "x_end", "R"];
const RUN_KEYS: [&str; 4] = ["delta", "h0", "order", "quad_tol"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub delta: Option<f64>,
    pub h0: Option<f64>,
    pub order: Option<usize>,
    pub quad_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub problem: TripleIntegralProblem,
    pub run: RunOptions,
}

struct Reader<'a> {
    origin: &'a str,
}

impl Reader<'_> {
    fn err(&self, message: impl Into<String>) -> CliError {
        CliError::ProblemFile {
            origin: self.origin.to_string(),
            message: message.into(),
        }
    }

    fn section<'s>(
        &self,
        ini: &'s Ini,
        name: &str,
        allowed: &[&str],
    ) -> Result<BTreeMap<&'s str, &'s str>, CliError> {
        let mut out = BTreeMap::new();
        let Some(props) = ini.section(Some(name)) else {
            return Ok(out);
        };
        for (key, value) in props.iter() {
            if !allowed.contains(&key) {
                return Err(self.err(format!(
                    "unknown key `{key}` in [{name}] (expected one of: {})",
                    allowed.join(", ")
                )));
            }
            if out.insert(key, value.trim()).is_some() {
                return Err(self.err(format!("key `{key}` given twice in [{name}]")));
            }
        }
        Ok(out)
    }

    fn expr(&self, field: &str, text: &str) -> Result<Expr, CliError> {
        parse(text).map_err(|e| self.err(format!("`{field}`: {e}")))
    }

    fn real_expr(&self, field: &str, text: &str) -> Result<f64, CliError> {
        let e = self.expr(field, text)?;
        if !e.is_closed() {
            return Err(self.err(format!("`{field}` must be a number, got `{text}`")));
        }
        e.eval(&Bindings::none())
            .map_err(|err| self.err(format!("`{field}`: {err}")))
    }

    fn number<T: std::str::FromStr>(&self, field: &str, text: Option<&&str>) -> Result<Option<T>, CliError> {
        text.map(|t| {
            t.parse::<T>()
                .map_err(|_| self.err(format!("`{field}` is not a valid number: `{t}`")))
        })
        .transpose()
    }
}

fn strip_comments(text: &str) -> String {
    text.lines()
        .map(|line| line.split(['#', ';']).next().unwrap_or(""))
        .collect::<Vec<_>>()
        .join("\n")
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_str(&text, &path.display().to_string())
    }

    /// `origin` names the source in error messages.
    pub fn parse_str(text: &str, origin: &str) -> Result<Self, CliError> {
        let r = Reader { origin };
        let ini = Ini::load_from_str(&strip_comments(text)).map_err(|e| r.err(e.to_string()))?;

        for (name, props) in ini.iter() {
            match name {
                Some("problem") | Some("run") => {}
                Some(other) => return Err(r.err(format!("unknown section [{other}]"))),
                None if props.is_empty() => {}
                None => return Err(r.err("keys must appear under [problem] or [run]")),
            }
        }

        let p = r.section(&ini, "problem", &PROBLEM_KEYS)?;
        let required = |key: &str| {
            p.get(key)
                .copied()
                .ok_or_else(|| r.err(format!("missing required key `{key}` in [problem]")))
        };
        let fields = ["f", "y0", "y1", "z0", "z1", "x0", "x_end"].map(required);
        let [f, y0, y1, z0, z1, x0, x_end] = fields;
        let problem = TripleIntegralProblem::new(
            r.expr("f", f?)?,
            r.expr("y0", y0?)?,
            r.expr("y1", y1?)?,
            r.expr("z0", z0?)?,
            r.expr("z1", z1?)?,
            r.real_expr("x0", x0?)?,
            r.real_expr("x_end", x_end?)?,
            p.get("R").map(|t| r.expr("R", t)).transpose()?,
        )
        .map_err(|e| r.err(e.to_string()))?;

        let run = r.section(&ini, "run", &RUN_KEYS)?;
        let run = RunOptions {
            delta: r.number("delta", run.get("delta"))?,
            h0: r.number("h0", run.get("h0"))?,
            order: r.number("order", run.get("order"))?,
            quad_tol: r.number("quad_tol", run.get("quad_tol"))?,
        };
        Ok(Self { problem, run })
    }
}
