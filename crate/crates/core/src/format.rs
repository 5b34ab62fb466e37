//! Line-oriented text format for problem files.
//!
//! ```text
//! physarum-lp v1
//! # name: fig1
//! n m
//! <n lines of m decimals: rows of A>
//! <b: n decimals>
//! <c: m decimals>
//! <d: m decimals>
//! ```
//!
//! `#` starts a comment that runs to the end of the line. A comment of the
//! form `# name: <label>` sets the instance name. Numbers are written with
//! the shortest decimal representation that parses back to the same `f64`,
//! so writing and re-reading is exact.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::problem::PositiveLP;

pub const MAGIC: &str = "physarum-lp v1";

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_numbers(line: usize, text: &str, expected: usize, what: &str) -> Result<Vec<f64>> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != expected {
        return Err(parse_err(
            line,
            format!("{what}: expected {expected} values, found {}", fields.len()),
        ));
    }
    fields
        .iter()
        .enumerate()
        .map(|(k, f)| {
            f.parse::<f64>().map_err(|_| {
                parse_err(
                    line,
                    format!("{what}, field {}: invalid number '{f}'", k + 1),
                )
            })
        })
        .collect()
}

/// Parses problem text; the result is validated like any constructed instance.
pub fn parse_problem(text: &str) -> Result<PositiveLP> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, first)) if first.trim_end() == MAGIC => {}
        Some((no, first)) => {
            return Err(parse_err(
                no,
                format!("expected header '{MAGIC}', found '{}'", first.trim_end()),
            ))
        }
        None => return Err(parse_err(1, "empty file")),
    }

    let mut name = String::from("unnamed");
    let mut content: Vec<(usize, &str)> = Vec::new();
    for (no, raw) in lines {
        let (body, comment) = match raw.find('#') {
            Some(pos) => (&raw[..pos], Some(&raw[pos + 1..])),
            None => (raw, None),
        };
        if let Some(label) = comment.and_then(|c| c.trim().strip_prefix("name:")) {
            name = label.trim().to_string();
        }
        if !body.trim().is_empty() {
            content.push((no, body));
        }
    }

    let mut it = content.into_iter();
    let (dim_line, dims) = it
        .next()
        .ok_or_else(|| parse_err(2, "missing 'n m' line"))?;
    let dims: Vec<&str> = dims.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(parse_err(dim_line, "expected 'n m'"));
    }
    let parse_dim = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|_| parse_err(dim_line, format!("{what}: invalid dimension '{s}'")))
    };
    let n = parse_dim(dims[0], "n")?;
    let m = parse_dim(dims[1], "m")?;

    let mut next = |what: &str, count: usize| -> Result<Vec<f64>> {
        let (no, body) = it
            .next()
            .ok_or_else(|| parse_err(0, format!("unexpected end of file: missing {what}")))?;
        parse_numbers(no, body, count, what)
    };
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        rows.push(next(&format!("row {} of A", i + 1), m)?);
    }
    let b = next("b", n)?;
    let c = next("c", m)?;
    let d = next("d", m)?;
    if let Some((no, _)) = it.next() {
        return Err(parse_err(no, "trailing content after d"));
    }
    let a = DMatrix::from_fn(n, m, |i, j| rows[i][j]);
    PositiveLP::new(name, a, b, c, d)
}

fn join(values: impl Iterator<Item = f64>) -> String {
    values.map(|v| format!("{v}")).collect::<Vec<_>>().join(" ")
}

pub fn format_problem(lp: &PositiveLP) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "# name: {}", lp.name());
    let _ = writeln!(out, "{} {}", lp.n(), lp.m());
    for row in lp.a().row_iter() {
        let _ = writeln!(out, "{}", join(row.iter().copied()));
    }
    let _ = writeln!(out, "{}", join(lp.b().iter().copied()));
    let _ = writeln!(out, "{}", join(lp.c().iter().copied()));
    let _ = writeln!(out, "{}", join(lp.d().iter().copied()));
    out
}

pub fn read_problem(path: impl AsRef<Path>) -> Result<PositiveLP> {
    parse_problem(&std::fs::read_to_string(path)?)
}

pub fn write_problem(lp: &PositiveLP, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_problem(lp))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::fig1;

    #[test]
    fn fig1_text() {
        let text = format_problem(&fig1([5.0, 1.0]));
        assert_eq!(
            text,
            "physarum-lp v1\n# name: fig1\n1 2\n1 1\n1\n1 2\n5 1\n"
        );
        assert_eq!(parse_problem(&text).unwrap(), fig1([5.0, 1.0]));
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "physarum-lp v1\n\n1 2 # dims\n# a row\n1 1\n1\n1 2\n1 1\n";
        let lp = parse_problem(text).unwrap();
        assert_eq!(lp.m(), 2);
        assert_eq!(lp.name(), "unnamed");
    }

    #[test]
    fn dimension_mismatch_reports_line() {
        let text = "physarum-lp v1\n1 3\n1 1 1\n1\n1 2\n1 1 1\n";
        match parse_problem(text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 5);
                assert!(
                    message.contains("c: expected 3 values, found 2"),
                    "{message}"
                );
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_number_reports_field() {
        let text = "physarum-lp v1\n1 2\n1 x\n1\n1 2\n1 1\n";
        match parse_problem(text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("field 2"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_reactivity_fails_validation() {
        let text = "physarum-lp v1\n1 2\n1 1\n1\n1 2\n1 -1\n";
        assert!(matches!(parse_problem(text), Err(Error::InvalidProblem(_))));
    }

    #[test]
    fn wrong_header() {
        assert!(matches!(
            parse_problem("physarum-lp v2\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
