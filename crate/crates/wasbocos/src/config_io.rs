//! Config files: a small TOML schema for [`SystemConfig`], parsed and
//! rendered losslessly.
//!
//! All numbers are exact rationals written as strings (`"3/4"`, `"0"`,
//! `"17"`); decimal literals are rejected so nothing silently rounds. The
//! shape:
//!
//! ```toml
//! n = 2
//! truth = "1/4"
//! epsilon = "1/4"
//! alpha_floor = "1/2"
//! beta_floor = "1/2"
//! mode = "strict"            # optional, "strict" (default) or "relaxed"
//! x0 = ["1/2", "1/64"]
//!
//! [[alphas]]                 # one entry per agent, in order
//! constant = "1/2"
//!
//! [[alphas]]
//! constant = "0"
//!
//! [weights]
//! kind = "uniform"           # or "matrix", "table", "geometric_fade"
//! ```
//!
//! `matrix` weights add `matrix = [["1/2", ...], ...]`; `table` weights add
//! `steps` (a list of matrices) and `tail` (one matrix). Alpha entries may
//! instead give `table = [...]` with `tail = "..."`, or `cycle = [...]`.

use crate::model::{AlphaRule, BetaRule, BoundsMode, SystemConfig};
use crate::rational::{parse_rational, render_rational, Rational, RationalParseError};
use serde::Deserialize;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    /// Syntax or schema errors; the message carries line/column context.
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("{field}: {source}")]
    BadNumber { field: String, source: RationalParseError },
    #[error("{0}")]
    Shape(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n: usize,
    truth: String,
    epsilon: String,
    alpha_floor: String,
    beta_floor: String,
    mode: Option<String>,
    x0: Vec<String>,
    alphas: Vec<RawAlpha>,
    weights: RawWeights,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlpha {
    constant: Option<String>,
    table: Option<Vec<String>>,
    tail: Option<String>,
    cycle: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeights {
    kind: String,
    matrix: Option<Vec<Vec<String>>>,
    steps: Option<Vec<Vec<Vec<String>>>>,
    tail: Option<Vec<Vec<String>>>,
}

fn number(field: impl Into<String>, s: &str) -> Result<Rational, ConfigError> {
    parse_rational(s).map_err(|source| ConfigError::BadNumber { field: field.into(), source })
}

fn number_list(field: &str, items: &[String]) -> Result<Vec<Rational>, ConfigError> {
    items
        .iter()
        .enumerate()
        .map(|(i, s)| number(format!("{field}[{i}]"), s))
        .collect()
}

fn number_matrix(field: &str, rows: &[Vec<String>]) -> Result<Vec<Vec<Rational>>, ConfigError> {
    rows.iter()
        .enumerate()
        .map(|(i, row)| number_list(&format!("{field}[{i}]"), row))
        .collect()
}

fn convert_alpha(agent: usize, raw: &RawAlpha) -> Result<AlphaRule, ConfigError> {
    let here = format!("alphas[{agent}]");
    let picked =
        [raw.constant.is_some(), raw.table.is_some(), raw.cycle.is_some()].iter().filter(|b| **b).count();
    if picked != 1 {
        return Err(ConfigError::Shape(format!(
            "{here}: give exactly one of `constant`, `table` (with `tail`), or `cycle`"
        )));
    }
    if let Some(c) = &raw.constant {
        if raw.tail.is_some() {
            return Err(ConfigError::Shape(format!("{here}: `tail` only goes with `table`")));
        }
        return Ok(AlphaRule::Constant(number(format!("{here}.constant"), c)?));
    }
    if let Some(values) = &raw.table {
        let Some(tail) = &raw.tail else {
            return Err(ConfigError::Shape(format!("{here}: `table` needs a `tail` value")));
        };
        return Ok(AlphaRule::Table {
            values: number_list(&format!("{here}.table"), values)?,
            tail: number(format!("{here}.tail"), tail)?,
        });
    }
    let cycle = raw.cycle.as_ref().unwrap();
    if raw.tail.is_some() {
        return Err(ConfigError::Shape(format!("{here}: `tail` only goes with `table`")));
    }
    if cycle.is_empty() {
        return Err(ConfigError::Shape(format!("{here}: `cycle` must not be empty")));
    }
    Ok(AlphaRule::Cycle(number_list(&format!("{here}.cycle"), cycle)?))
}

fn convert_weights(raw: &RawWeights) -> Result<BetaRule, ConfigError> {
    let reject = |field: &str, present: bool| -> Result<(), ConfigError> {
        if present {
            Err(ConfigError::Shape(format!(
                "weights: `{field}` does not belong to kind \"{}\"",
                raw.kind
            )))
        } else {
            Ok(())
        }
    };
    match raw.kind.as_str() {
        "uniform" | "geometric_fade" => {
            reject("matrix", raw.matrix.is_some())?;
            reject("steps", raw.steps.is_some())?;
            reject("tail", raw.tail.is_some())?;
            Ok(if raw.kind == "uniform" { BetaRule::Uniform } else { BetaRule::GeometricFade })
        }
        "matrix" => {
            reject("steps", raw.steps.is_some())?;
            reject("tail", raw.tail.is_some())?;
            let Some(m) = &raw.matrix else {
                return Err(ConfigError::Shape("weights: kind \"matrix\" needs `matrix`".into()));
            };
            Ok(BetaRule::Matrix(number_matrix("weights.matrix", m)?))
        }
        "table" => {
            reject("matrix", raw.matrix.is_some())?;
            let (Some(steps), Some(tail)) = (&raw.steps, &raw.tail) else {
                return Err(ConfigError::Shape(
                    "weights: kind \"table\" needs `steps` and `tail`".into(),
                ));
            };
            let steps = steps
                .iter()
                .enumerate()
                .map(|(t, m)| number_matrix(&format!("weights.steps[{t}]"), m))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(BetaRule::Table { steps, tail: number_matrix("weights.tail", tail)? })
        }
        other => Err(ConfigError::Shape(format!(
            "weights: unknown kind \"{other}\" (expected uniform, matrix, table, or geometric_fade)"
        ))),
    }
}

pub fn parse_config_str(text: &str) -> Result<SystemConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text)?;
    let mode = match raw.mode.as_deref() {
        None | Some("strict") => BoundsMode::Strict,
        Some("relaxed") => BoundsMode::Relaxed,
        Some(other) => {
            return Err(ConfigError::Shape(format!(
                "mode: unknown value \"{other}\" (expected \"strict\" or \"relaxed\")"
            )))
        }
    };
    let alphas = raw
        .alphas
        .iter()
        .enumerate()
        .map(|(i, a)| convert_alpha(i, a))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SystemConfig {
        n: raw.n,
        truth: number("truth", &raw.truth)?,
        epsilon: number("epsilon", &raw.epsilon)?,
        alpha_floor: number("alpha_floor", &raw.alpha_floor)?,
        beta_floor: number("beta_floor", &raw.beta_floor)?,
        alphas,
        weights: convert_weights(&raw.weights)?,
        x0: number_list("x0", &raw.x0)?,
        mode,
    })
}

pub fn read_config(path: &Path) -> Result<SystemConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_config_str(&text)
}

fn quoted(r: &Rational) -> String {
    format!("\"{}\"", render_rational(r))
}

fn quoted_list(values: &[Rational]) -> String {
    let inner: Vec<String> = values.iter().map(quoted).collect();
    format!("[{}]", inner.join(", "))
}

fn matrix_lines(out: &mut String, field: &str, m: &[Vec<Rational>], indent: &str) {
    out.push_str(&format!("{field} = [\n"));
    for row in m {
        out.push_str(&format!("{indent}  {},\n", quoted_list(row)));
    }
    out.push_str(&format!("{indent}]\n"));
}

/// Deterministic text form; `parse_config_str` of the result reproduces the
/// config exactly.
pub fn render_config(cfg: &SystemConfig) -> String {
    let mut out = String::new();
    out.push_str(&format!("n = {}\n", cfg.n));
    out.push_str(&format!("truth = {}\n", quoted(&cfg.truth)));
    out.push_str(&format!("epsilon = {}\n", quoted(&cfg.epsilon)));
    out.push_str(&format!("alpha_floor = {}\n", quoted(&cfg.alpha_floor)));
    out.push_str(&format!("beta_floor = {}\n", quoted(&cfg.beta_floor)));
    out.push_str(&format!(
        "mode = \"{}\"\n",
        match cfg.mode {
            BoundsMode::Strict => "strict",
            BoundsMode::Relaxed => "relaxed",
        }
    ));
    out.push_str(&format!("x0 = {}\n", quoted_list(&cfg.x0)));
    for rule in &cfg.alphas {
        out.push_str("\n[[alphas]]\n");
        match rule {
            AlphaRule::Constant(a) => out.push_str(&format!("constant = {}\n", quoted(a))),
            AlphaRule::Table { values, tail } => {
                out.push_str(&format!("table = {}\n", quoted_list(values)));
                out.push_str(&format!("tail = {}\n", quoted(tail)));
            }
            AlphaRule::Cycle(values) => out.push_str(&format!("cycle = {}\n", quoted_list(values))),
        }
    }
    out.push_str("\n[weights]\n");
    match &cfg.weights {
        BetaRule::Uniform => out.push_str("kind = \"uniform\"\n"),
        BetaRule::GeometricFade => out.push_str("kind = \"geometric_fade\"\n"),
        BetaRule::Matrix(m) => {
            out.push_str("kind = \"matrix\"\n");
            matrix_lines(&mut out, "matrix", m, "");
        }
        BetaRule::Table { steps, tail } => {
            out.push_str("kind = \"table\"\n");
            out.push_str("steps = [\n");
            for m in steps {
                let rows: Vec<String> = m.iter().map(|row| quoted_list(row)).collect();
                out.push_str(&format!("  [{}],\n", rows.join(", ")));
            }
            out.push_str("]\n");
            matrix_lines(&mut out, "tail", tail, "");
        }
    }
    out
}
