//! Line-oriented text format shared by saved MLP and PCA models.
//!
//! Every line is a keyword followed by whitespace-separated tokens. Reals are
//! written with the shortest representation that parses back to the same
//! bits, so a save/load round trip is exact.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub(crate) fn push_line<T: std::fmt::Display>(out: &mut String, key: &str, values: &[T]) {
    out.push_str(key);
    for v in values {
        write!(out, " {v}").unwrap();
    }
    out.push('\n');
}

pub(crate) struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    kind: &'static str,
}

impl<'a> Lines<'a> {
    pub fn new(text: &'a str, kind: &'static str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
            kind,
        }
    }

    pub fn error(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            line,
            column: self.kind.to_string(),
            message: message.into(),
        }
    }

    /// Next non-empty line, which must start with `key`; returns its tokens.
    pub fn expect(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        loop {
            let (i, line) = self
                .inner
                .next()
                .ok_or_else(|| self.error(0, format!("unexpected end of input, wanted `{key}`")))?;
            let mut tokens = line.split_whitespace();
            match tokens.next() {
                None => continue,
                Some(k) if k == key => return Ok((i + 1, tokens.collect())),
                Some(k) => return Err(self.error(i + 1, format!("expected `{key}`, found `{k}`"))),
            }
        }
    }

    pub fn expect_values(&mut self, key: &str, count: usize) -> Result<Vec<f64>> {
        let (line, tokens) = self.expect(key)?;
        if tokens.len() != count {
            return Err(self.error(
                line,
                format!("`{key}` needs {count} values, found {}", tokens.len()),
            ));
        }
        tokens
            .iter()
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| self.error(line, format!("bad number `{t}`")))
            })
            .collect()
    }

    pub fn expect_usizes(&mut self, key: &str) -> Result<Vec<usize>> {
        let (line, tokens) = self.expect(key)?;
        tokens
            .iter()
            .map(|t| t.parse().map_err(|_| self.error(line, format!("bad count `{t}`"))))
            .collect()
    }
}
