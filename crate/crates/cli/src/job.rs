//! Job files.
//!
//! A job is a line-oriented list of `key = value` pairs followed by zero or
//! more `[step]` sections. Blank lines and lines starting with `#` are
//! ignored. The first setting must be `version = 1`.
//!
//! ```text
//! version = 1
//! p = 3
//! e = 1
//! vars = x1..x5
//! gen = x1*x2*x3*x4*x5
//! lambda =
//! L = 1
//! query = origin
//!
//! [step]
//! center = x1, x2, x3, x4, x5
//! chart = x1
//! a = auto
//! ```
//!
//! Header keys: `p`, `e`, `vars`, `gen` (repeatable), `lambda`, `L`, `box`,
//! `codim`, `query` (repeatable), `output` (`text` or `json`). Step keys:
//! `center`, `chart`, `a` (`auto` or a positive integer).

use std::collections::BTreeSet;

use qsing_core::qdiff::{AValue, SequenceJob, Step};
use qsing_core::qmod::CandidateSpec;
use qsing_core::Error;

pub const JOB_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown output format `{other}` (expected text or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobFile {
    pub job: SequenceJob,
    pub output: OutputFormat,
}

/// Expand `x1..x5` or a comma list into variable names.
pub fn parse_var_list(text: &str) -> Result<Vec<String>, String> {
    let text = text.trim();
    if let Some((lo, hi)) = text.split_once("..") {
        let split = |s: &str| -> Option<(String, u32)> {
            let digits = s.trim_start_matches(|c: char| !c.is_ascii_digit());
            let stem = &s[..s.len() - digits.len()];
            if stem.is_empty() || digits.is_empty() {
                return None;
            }
            digits.parse().ok().map(|n| (stem.to_string(), n))
        };
        let (Some((s0, a)), Some((s1, b))) = (split(lo.trim()), split(hi.trim())) else {
            return Err(format!("bad variable range `{text}`"));
        };
        if s0 != s1 || a > b {
            return Err(format!("bad variable range `{text}`"));
        }
        return Ok((a..=b).map(|i| format!("{s0}{i}")).collect());
    }
    let names: Vec<String> = split_list(text);
    if names.is_empty() {
        return Err("empty variable list".into());
    }
    let mut seen = BTreeSet::new();
    for n in &names {
        if !n.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            || !n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            return Err(format!("invalid variable name `{n}`"));
        }
        if !seen.insert(n.as_str()) {
            return Err(format!("variable `{n}` declared twice"));
        }
    }
    Ok(names)
}

/// Comma-separated names, empty entries dropped.
pub fn split_list(text: &str) -> Vec<String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn err(line: usize, column: usize, message: impl Into<String>, expected: &[&str]) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
        expected: expected.iter().map(|s| s.to_string()).collect(),
    }
}

const HEADER_KEYS: [&str; 11] = [
    "version", "p", "e", "vars", "gen", "lambda", "L", "box", "codim", "query", "output",
];
const STEP_KEYS: [&str; 3] = ["center", "chart", "a"];

#[derive(Default)]
struct PendingStep {
    line: usize,
    center: Option<Vec<String>>,
    chart: Option<String>,
    a: Option<AValue>,
}

impl PendingStep {
    fn finish(self) -> Result<Step, Error> {
        let missing = |k: &str| err(self.line, 1, format!("step is missing `{k}`"), &[k]);
        let center = self.center.ok_or_else(|| missing("center"))?;
        let chart = self.chart.clone().ok_or_else(|| missing("chart"))?;
        Ok(Step {
            center,
            chart,
            a: self.a.unwrap_or(AValue::Auto),
        })
    }
}

fn number<T: std::str::FromStr>(value: &str, line: usize, column: usize) -> Result<T, Error> {
    value
        .parse()
        .map_err(|_| err(line, column, format!("expected an integer, found `{value}`"), &["NAT"]))
}

/// Parse a job file.
pub fn parse_job(src: &str) -> Result<JobFile, Error> {
    let mut version = None;
    let mut p = None;
    let mut e = None;
    let mut vars = None;
    let mut gens = Vec::new();
    let mut lambda = Vec::new();
    let mut l = None;
    let mut candidates = CandidateSpec::default();
    let mut queries = Vec::new();
    let mut output = OutputFormat::Text;
    let mut steps = Vec::new();
    let mut current: Option<PendingStep> = None;

    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let indent = raw.len() - raw.trim_start().len();
        if text.starts_with('[') {
            if text != "[step]" {
                return Err(err(line, indent + 1, format!("unknown section `{text}`"), &["[step]"]));
            }
            if version.is_none() {
                return Err(err(line, 1, "`version` must come first", &["version"]));
            }
            if let Some(s) = current.take() {
                steps.push(s.finish()?);
            }
            current = Some(PendingStep { line, ..Default::default() });
            continue;
        }
        let Some(eq) = raw.find('=') else {
            return Err(err(line, raw.len() + 1, "expected `key = value`", &["="]));
        };
        let key = raw[..eq].trim();
        let value = raw[eq + 1..].trim();
        let vcol = eq + 2 + (raw[eq + 1..].len() - raw[eq + 1..].trim_start().len());
        let kcol = indent + 1;

        if version.is_none() && key != "version" {
            return Err(err(line, kcol, "`version` must come first", &["version"]));
        }

        if let Some(step) = current.as_mut() {
            match key {
                "center" => step.center = Some(split_list(value)),
                "chart" => step.chart = Some(value.to_string()),
                "a" => {
                    step.a = Some(if value == "auto" {
                        AValue::Auto
                    } else {
                        AValue::Explicit(number(value, line, vcol)?)
                    })
                }
                _ => return Err(err(line, kcol, format!("unknown step key `{key}`"), &STEP_KEYS)),
            }
            continue;
        }

        match key {
            "version" => {
                let v: u32 = number(value, line, vcol)?;
                if v != JOB_VERSION {
                    return Err(err(line, vcol, format!("unsupported job version {v}"), &["1"]));
                }
                version = Some(v);
            }
            "p" => p = Some(number(value, line, vcol)?),
            "e" => e = Some(number(value, line, vcol)?),
            "vars" => vars = Some(parse_var_list(value).map_err(|m| err(line, vcol, m, &[]))?),
            "gen" => gens.push(value.to_string()),
            "lambda" => lambda = split_list(value),
            "L" => l = Some(value.to_string()),
            "box" => candidates.box_size = number(value, line, vcol)?,
            "codim" => candidates.codim = number(value, line, vcol)?,
            "query" => queries.push(value.to_string()),
            "output" => {
                output = value.parse().map_err(|m: String| err(line, vcol, m, &["text", "json"]))?
            }
            _ => return Err(err(line, kcol, format!("unknown key `{key}`"), &HEADER_KEYS)),
        }
    }
    if let Some(s) = current.take() {
        steps.push(s.finish()?);
    }
    let end = src.lines().count().max(1);
    if version.is_none() {
        return Err(err(end, 1, "missing `version`", &["version"]));
    }
    let missing = |k: &str| err(end, 1, format!("missing `{k}`"), &[k]);
    Ok(JobFile {
        job: SequenceJob {
            p: p.ok_or_else(|| missing("p"))?,
            e: e.unwrap_or(1),
            vars: vars.ok_or_else(|| missing("vars"))?,
            gens,
            lambda,
            l,
            steps,
            candidates,
            queries,
        },
        output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIVE: &str = "version = 1\np = 3\nvars = x1..x5\ngen = x1*x2*x3*x4*x5\n\n[step]\ncenter = x1, x2\nchart = x2\na = 1\n[step]\ncenter = x1\nchart = x1\n";

    #[test]
    fn reads_header_and_steps() {
        let j = parse_job(FIVE).unwrap();
        assert_eq!(j.job.vars.len(), 5);
        assert_eq!(j.job.e, 1);
        assert_eq!(j.job.steps.len(), 2);
        assert_eq!(j.job.steps[0].a, AValue::Explicit(1));
        assert_eq!(j.job.steps[1].a, AValue::Auto);
        assert_eq!(j.job.steps[0].center, vec!["x1", "x2"]);
    }

    #[test]
    fn version_is_mandatory_and_first() {
        let e = parse_job("p = 3\nversion = 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, column: 1, .. }));
        let e = parse_job("version = 2\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, column: 11, .. }));
    }

    #[test]
    fn positioned_errors() {
        let e = parse_job("version = 1\np = three\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, column: 5, .. }), "{e:?}");
        let e = parse_job("version = 1\n  colour = red\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, column: 3, .. }), "{e:?}");
        let e = parse_job("version = 1\np = 3\nvars = x1\n[step]\nchart = x1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, .. }), "{e:?}");
    }

    #[test]
    fn variable_lists() {
        assert_eq!(parse_var_list("x1..x3").unwrap(), vec!["x1", "x2", "x3"]);
        assert_eq!(parse_var_list("X, Y").unwrap(), vec!["X", "Y"]);
        assert!(parse_var_list("x3..x1").is_err());
        assert!(parse_var_list("x, x").is_err());
        assert!(parse_var_list("x'").is_err());
    }
}
