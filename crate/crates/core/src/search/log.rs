//! Experiment logs: JSON Lines, header first, one checksummed record per line.
//!
//! Lines are written in a canonical form: object keys sorted, floats printed
//! as `{:.16e}` (17 significant digits, exact round trip), no whitespace.
//! Each line ends with a `"crc32c"` field holding the CRC32C of the same line
//! with that field removed, so any altered byte is caught before parsing.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::SearchConfig;
use crate::error::{Error, Result};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

const CRC_KEY: &str = ",\"crc32c\":\"";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub kind: String,
    pub schema_version: u32,
    pub artifact_version: String,
    pub timestamp: String,
    pub config: SearchConfig,
}

impl LogHeader {
    pub fn new(config: &SearchConfig) -> Self {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            kind: "header".into(),
            schema_version: super::config::SCHEMA_VERSION,
            artifact_version: ARTIFACT_VERSION.into(),
            timestamp: format!("unix:{secs}"),
            config: config.clone(),
        }
    }
}

fn write_canonical(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_u64() {
                write!(out, "{i}").unwrap();
            } else if let Some(i) = n.as_i64() {
                write!(out, "{i}").unwrap();
            } else {
                let f = n.as_f64().expect("JSON numbers are finite");
                write!(out, "{f:.16e}").unwrap();
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_canonical(&map[k], out);
            }
            out.push('}');
        }
    }
}

/// Canonical serialization without checksum.
pub fn canonical_json<T: Serialize>(item: &T) -> Result<String> {
    let value = serde_json::to_value(item)?;
    if !matches!(value, Value::Object(_)) {
        return Err(Error::InvalidInput("log lines must be JSON objects".into()));
    }
    let mut out = String::new();
    write_canonical(&value, &mut out);
    Ok(out)
}

fn seal(canonical: &str) -> String {
    let crc = crc32c::crc32c(canonical.as_bytes());
    let body = &canonical[..canonical.len() - 1];
    let sep = if body.len() > 1 { "," } else { "" };
    format!("{body}{sep}\"crc32c\":\"{crc:08x}\"}}")
}

/// One complete log line (without newline).
pub fn checksummed_line<T: Serialize>(item: &T) -> Result<String> {
    canonical_json(item).map(|c| seal(&c))
}

/// Verifies the trailing checksum and returns the canonical body.
pub fn verify_line(line: &str, line_no: usize) -> Result<String> {
    let mismatch = || Error::ChecksumMismatch { line: line_no };
    let (body, tail) = match line.rfind(CRC_KEY) {
        Some(pos) => (&line[..pos], &line[pos + CRC_KEY.len()..]),
        None => match line.strip_prefix("{\"crc32c\":\"") {
            Some(tail) => ("{", tail),
            None => return Err(mismatch()),
        },
    };
    let hex = tail.strip_suffix("\"}").ok_or_else(mismatch)?;
    if hex.len() != 8 {
        return Err(mismatch());
    }
    let stored = u32::from_str_radix(hex, 16).map_err(|_| mismatch())?;
    let canonical = format!("{body}}}");
    if crc32c::crc32c(canonical.as_bytes()) != stored {
        return Err(mismatch());
    }
    Ok(canonical)
}

pub fn parse_line<T: DeserializeOwned>(line: &str, line_no: usize) -> Result<T> {
    let canonical = verify_line(line, line_no)?;
    serde_json::from_str(&canonical).map_err(|e| Error::MalformedLog {
        line: line_no,
        reason: e.to_string(),
    })
}

/// Appends checksummed lines.
pub struct LogWriter<W: Write> {
    out: W,
}

impl<W: Write> LogWriter<W> {
    pub fn new(out: W, header: &LogHeader) -> Result<Self> {
        let mut w = Self { out };
        w.write(header)?;
        Ok(w)
    }

    pub fn write<T: Serialize>(&mut self, item: &T) -> Result<()> {
        let line = checksummed_line(item)?;
        self.out.write_all(line.as_bytes())?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// A parsed log: header plus the canonical body of every following line.
#[derive(Debug, Clone)]
pub struct RawLog {
    pub header: LogHeader,
    /// `(line number, canonical body)`, in file order.
    pub records: Vec<(usize, String)>,
}

impl RawLog {
    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let first = lines.next().ok_or(Error::MalformedLog {
            line: 1,
            reason: "empty log".into(),
        })??;
        let header: LogHeader = parse_line(&first, 1)?;
        if header.kind != "header" {
            return Err(Error::MalformedLog {
                line: 1,
                reason: format!("expected a header, found kind `{}`", header.kind),
            });
        }
        let mut records = Vec::new();
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            records.push((line_no, verify_line(&line, line_no)?));
        }
        Ok(Self { header, records })
    }

    pub fn parse_records<T: DeserializeOwned>(&self) -> Result<Vec<T>> {
        self.records
            .iter()
            .map(|(line, body)| {
                serde_json::from_str(body).map_err(|e| Error::MalformedLog {
                    line: *line,
                    reason: e.to_string(),
                })
            })
            .collect()
    }
}
