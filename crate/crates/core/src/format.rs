//! Shared text-output helpers: float rendering and `key=value` metadata.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Environment variable selecting the number of significant digits in CSV output.
pub const PRECISION_ENV: &str = "PMULAB_PRECISION_DIGITS";
pub const DEFAULT_DIGITS: usize = 17;
pub const MIN_DIGITS: usize = 15;

/// Significant digits for CSV floats, read from [`PRECISION_ENV`] and clamped to `15..=17`.
pub fn precision_digits() -> usize {
    match std::env::var(PRECISION_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(d) if d < MIN_DIGITS => {
                log::warn!("{PRECISION_ENV}={d} raised to the minimum of {MIN_DIGITS}");
                MIN_DIGITS
            }
            Ok(d) => d.min(DEFAULT_DIGITS),
            Err(_) => {
                log::warn!("ignoring unparsable {PRECISION_ENV}={v:?}");
                DEFAULT_DIGITS
            }
        },
        Err(_) => DEFAULT_DIGITS,
    }
}

/// Renders `x` in scientific notation with `digits` significant digits.
pub fn fmt_float(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 {
        // avoid "-0e0"
        return format!("{:.*e}", digits - 1, 0.0);
    }
    format!("{:.*e}", digits - 1, x)
}

/// Ordered `key=value` provenance record.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces `key`, keeping first-insertion order.
    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key, value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(|v| v.parse().ok())
    }

    pub fn get_usize(&self, key: &str) -> Option<usize> {
        self.get(key).and_then(|v| v.parse().ok())
    }

    pub fn extend(&mut self, other: &Metadata) {
        for (k, v) in &other.entries {
            self.set(k.clone(), v);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::from("# pmulab metadata\n");
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut meta = Metadata::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("metadata line {}: expected key=value", lineno + 1)))?;
            meta.set(k.trim(), v.trim());
        }
        Ok(meta)
    }
}

/// Sidecar path for a data file: same basename with a `.meta` extension.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta")
}

/// Writes `contents` to `path`, or to stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, contents).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(contents.as_bytes())?;
            Ok(())
        }
    }
}

/// Splits a CSV body into rows of fields, checking the header matches `expected`.
pub(crate) fn parse_csv<'a>(text: &'a str, expected: &str) -> Result<Vec<Vec<&'a str>>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
    if header.trim() != expected {
        return Err(Error::Parse(format!(
            "unexpected CSV header {header:?}, wanted {expected:?}"
        )));
    }
    let width = expected.split(',').count();
    lines
        .enumerate()
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != width {
                Err(Error::Parse(format!(
                    "row {}: {} fields, expected {width}",
                    i + 2,
                    fields.len()
                )))
            } else {
                Ok(fields)
            }
        })
        .collect()
}

pub(crate) fn parse_field<T: std::str::FromStr>(field: &str, what: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what} value {field:?}")))
}
