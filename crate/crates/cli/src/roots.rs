//! Root lists on the command line: `"1, -0.5+0.866i, -0.5-0.866i"` or
//! `@file.json` holding `[[re, im], ...]`.

use std::fmt;

use csl_core::linalg::ComplexScalar;
use csl_core::scalar::RootList;

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    /// 1-based character column in the original string.
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

fn number(text: &str, column: usize) -> Result<f64, ParseError> {
    let v: f64 = text.parse().map_err(|_| ParseError {
        column,
        message: format!("`{text}` is not a number"),
    })?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ParseError {
            column,
            message: format!("`{text}` is not finite"),
        })
    }
}

fn unit(sign: &str) -> Option<f64> {
    match sign {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => None,
    }
}

/// One term with whitespace removed: `a`, `bi`, `a+bi`, `a-bi`.
fn term(t: &str, column: usize) -> Result<ComplexScalar, ParseError> {
    if t.is_empty() {
        return Err(ParseError {
            column,
            message: "empty root".into(),
        });
    }
    let Some(body) = t.strip_suffix('i') else {
        return Ok(ComplexScalar::new(number(t, column)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (number(&body[..k], column)?, &body[k..]),
        None => (0.0, body),
    };
    let im = match unit(im) {
        Some(v) => v,
        None => number(im, column)?,
    };
    Ok(ComplexScalar::new(re, im))
}

/// Parses a comma-separated list. Whitespace is ignored everywhere.
pub fn parse_root_string(s: &str) -> Result<Vec<ComplexScalar>, ParseError> {
    let mut roots = Vec::new();
    let mut column = 1;
    for piece in s.split(',') {
        let lead = piece.chars().take_while(|c| c.is_whitespace()).count();
        let compact: String = piece.chars().filter(|c| !c.is_whitespace()).collect();
        roots.push(term(&compact, column + lead)?);
        column += piece.chars().count() + 1;
    }
    Ok(roots)
}

/// `@path` reads JSON, anything else is a root string.
pub fn load_roots(arg: &str) -> Result<RootList, String> {
    let roots = match arg.strip_prefix('@') {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
            let list: RootList = serde_json::from_str(&text).map_err(|e| format!("{path}: {e}"))?;
            list.roots().to_vec()
        }
        None => parse_root_string(arg).map_err(|e| format!("--roots {e}"))?,
    };
    RootList::new(roots).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> ComplexScalar {
        ComplexScalar::new(re, im)
    }

    #[test]
    fn grammar() {
        assert_eq!(
            parse_root_string(" 1, -2.5 ,3+4i,3-4i, 2i,-i, i, 1e-3-2E+1i").unwrap(),
            vec![
                c(1.0, 0.0),
                c(-2.5, 0.0),
                c(3.0, 4.0),
                c(3.0, -4.0),
                c(0.0, 2.0),
                c(0.0, -1.0),
                c(0.0, 1.0),
                c(1e-3, -20.0)
            ]
        );
        assert_eq!(parse_root_string("1 + 2 i").unwrap(), vec![c(1.0, 2.0)]);
    }

    #[test]
    fn errors_carry_columns() {
        let e = parse_root_string("1, w, 2").unwrap_err();
        assert_eq!(e.column, 4);
        let e = parse_root_string("1,,2").unwrap_err();
        assert_eq!(e.column, 3);
        assert_eq!(e.message, "empty root");
        let e = parse_root_string("1, 2x+i").unwrap_err();
        assert_eq!(e.column, 4);
    }
}
