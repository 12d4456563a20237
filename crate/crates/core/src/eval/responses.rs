//! Generated-response files: an artifact header followed by one JSON object
//! per line, `{"corpus": <test set>, "response": "<space-joined tokens>"}`.
//! Lines of one test set appear in the order of its test pairs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::artifact::ArtifactHeader;
use crate::{Error, Result};

pub const RESPONSES_KIND: &str = "responses";
pub const RESPONSES_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseSet {
    pub corpus: String,
    pub responses: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseFile {
    pub header: ArtifactHeader,
    pub sets: Vec<ResponseSet>,
}

impl ResponseFile {
    pub fn set(&self, corpus: &str) -> Option<&ResponseSet> {
        self.sets.iter().find(|s| s.corpus == corpus)
    }

    /// Perplexity recorded for `corpus`, if the producer could compute one.
    pub fn perplexity(&self, corpus: &str) -> Option<f64> {
        self.header
            .get(&format!("ppl.{corpus}"))
            .and_then(|v| v.parse().ok())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    corpus: String,
    response: String,
}

pub fn render_responses(file: &ResponseFile) -> String {
    let mut out = file.header.render();
    for set in &file.sets {
        for r in &set.responses {
            let line = Line {
                corpus: set.corpus.clone(),
                response: r.join(" "),
            };
            out.push_str(&serde_json::to_string(&line).expect("line serializes"));
            out.push('\n');
        }
    }
    out
}

pub fn write_responses(path: &Path, file: &ResponseFile) -> Result<()> {
    std::fs::write(path, render_responses(file)).map_err(|e| Error::io(path, e))
}

pub fn read_responses(path: &Path) -> Result<ResponseFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header = ArtifactHeader::parse(&text)
        .ok_or_else(|| Error::format(path, 1, "missing responses header"))?;
    if header.kind != RESPONSES_KIND || header.version != RESPONSES_VERSION {
        return Err(Error::format(
            path,
            1,
            format!("expected {RESPONSES_KIND} v{RESPONSES_VERSION}, found {} v{}", header.kind, header.version),
        ));
    }
    let mut sets: Vec<ResponseSet> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let rec: Line = serde_json::from_str(line).map_err(|e| Error::format(path, i + 1, e.to_string()))?;
        let tokens = rec.response.split_whitespace().map(str::to_string).collect();
        match sets.iter_mut().find(|s| s.corpus == rec.corpus) {
            Some(set) => set.responses.push(tokens),
            None => sets.push(ResponseSet {
                corpus: rec.corpus,
                responses: vec![tokens],
            }),
        }
    }
    Ok(ResponseFile { header, sets })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let file = ResponseFile {
            header: ArtifactHeader::new(RESPONSES_KIND, RESPONSES_VERSION)
                .with("ppl.a", 3.5)
                .with("vocab", "v"),
            sets: vec![
                ResponseSet {
                    corpus: "a".into(),
                    responses: vec![vec!["x".into(), "y".into()], vec![]],
                },
                ResponseSet {
                    corpus: "b".into(),
                    responses: vec![vec!["\"q\"".into()]],
                },
            ],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        write_responses(&path, &file).unwrap();
        let back = read_responses(&path).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.perplexity("a"), Some(3.5));
        assert_eq!(back.perplexity("b"), None);
    }
}
