//! Metadata headers carried by every text artifact the pipeline writes.
//!
//! A header is a block of `#` comment lines at the top of a file:
//!
//! ```text
//! # domainbal df v1
//! # seed=7
//! # vocab=3f9a0c12d4e5b6a7
//! ```
//!
//! The first line names the artifact kind and format version; the remaining
//! lines are `key=value` pairs kept in sorted order so headers are
//! byte-deterministic.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::{Error, Result};

pub const MAGIC: &str = "domainbal";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactHeader {
    pub kind: String,
    pub version: u32,
    pub fields: BTreeMap<String, String>,
}

impl ArtifactHeader {
    pub fn new(kind: &str, version: u32) -> Self {
        Self {
            kind: kind.to_string(),
            version,
            fields: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.fields.insert(key.to_string(), value.to_string());
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| {
            Error::InvalidArgument(format!("{} artifact header lacks `{key}`", self.kind))
        })
    }

    /// Fails unless the header's vocabulary hash equals `expected`.
    pub fn expect_vocab(&self, expected: &str, context: &str) -> Result<()> {
        let found = self.require("vocab")?;
        if found != expected {
            return Err(Error::VocabMismatch {
                expected: expected.to_string(),
                found: found.to_string(),
                context: context.to_string(),
            });
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut out = format!("# {MAGIC} {} v{}\n", self.kind, self.version);
        for (k, v) in &self.fields {
            let _ = writeln!(out, "# {k}={v}");
        }
        out
    }

    /// Parses the leading comment block of `text`. Returns `None` when the
    /// first line is not a header line.
    pub fn parse(text: &str) -> Option<Self> {
        let mut lines = text.lines();
        let first = lines.next()?.strip_prefix("# ")?;
        let mut parts = first.split_whitespace();
        if parts.next()? != MAGIC {
            return None;
        }
        let kind = parts.next()?.to_string();
        let version = parts.next()?.strip_prefix('v')?.parse().ok()?;
        let mut header = Self::new(&kind, version);
        for line in lines {
            let Some(body) = line.strip_prefix('#') else {
                break;
            };
            if let Some((k, v)) = body.trim().split_once('=') {
                header.fields.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Some(header)
    }

    pub fn expect_kind(&self, kind: &str, version: u32) -> Result<()> {
        if self.kind != kind || self.version != version {
            return Err(Error::InvalidArgument(format!(
                "expected {kind} v{version} artifact, found {} v{}",
                self.kind, self.version
            )));
        }
        Ok(())
    }
}
