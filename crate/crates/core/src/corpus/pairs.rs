use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{tokenize, CorpusId, TokenizerConfig};
use crate::artifact::ArtifactHeader;
use crate::{Error, Result};

/// One dialogue turn. Both sides are non-empty token sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextResponsePair {
    pub context: Vec<String>,
    pub response: Vec<String>,
    /// Dense corpus index into the registry.
    pub corpus: usize,
}

impl ContextResponsePair {
    pub fn new(context: Vec<String>, response: Vec<String>, corpus: usize) -> Self {
        Self {
            context,
            response,
            corpus,
        }
    }

    pub fn num_tokens(&self) -> usize {
        self.context.len() + self.response.len()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InRecord {
    context: String,
    response: String,
    #[serde(default)]
    #[allow(dead_code)]
    corpus: Option<String>,
}

#[derive(Serialize)]
struct OutRecord<'a> {
    context: &'a str,
    response: &'a str,
    corpus: &'a str,
}

#[derive(Debug)]
pub struct LoadedPairs {
    pub pairs: Vec<ContextResponsePair>,
    pub skipped: usize,
    pub header: Option<ArtifactHeader>,
}

/// Reads a line-delimited JSON pair file. Blank lines and `#` comment lines
/// are ignored; lines that fail to parse, carry unexpected keys, or tokenize
/// to an empty side are counted in `skipped`. The `corpus` key in the file is
/// ignored in favor of `corpus`.
pub fn load_pairs(path: &Path, corpus: &CorpusId, tokenizer: TokenizerConfig) -> Result<LoadedPairs> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header = ArtifactHeader::parse(&text);
    let mut pairs = Vec::new();
    let mut skipped = 0;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Ok(rec) = serde_json::from_str::<InRecord>(line) else {
            skipped += 1;
            continue;
        };
        let context = tokenize(&rec.context, tokenizer);
        let response = tokenize(&rec.response, tokenizer);
        if context.is_empty() || response.is_empty() {
            skipped += 1;
            continue;
        }
        pairs.push(ContextResponsePair::new(context, response, corpus.index));
    }
    if pairs.is_empty() {
        return Err(Error::EmptyCorpus {
            path: path.to_path_buf(),
            skipped,
        });
    }
    Ok(LoadedPairs {
        pairs,
        skipped,
        header,
    })
}

/// Writes pairs in the format [`load_pairs`] reads, preceded by `header`.
/// Tokens are joined by single spaces, so re-loading with the same tokenizer
/// reproduces the pairs exactly.
pub fn write_pairs(
    path: &Path,
    pairs: &[ContextResponsePair],
    corpus_name: &str,
    header: &ArtifactHeader,
) -> Result<()> {
    let mut buf = header.render().into_bytes();
    for p in pairs {
        let context = p.context.join(" ");
        let response = p.response.join(" ");
        let rec = OutRecord {
            context: &context,
            response: &response,
            corpus: corpus_name,
        };
        serde_json::to_writer(&mut buf, &rec).expect("record serializes");
        buf.push(b'\n');
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(&buf))
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cid() -> CorpusId {
        CorpusId {
            index: 2,
            name: "c".into(),
        }
    }

    fn load_str(text: &str) -> Result<LoadedPairs> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        std::fs::write(&path, text).unwrap();
        load_pairs(&path, &cid(), TokenizerConfig::default())
    }

    #[test]
    fn three_valid_lines() {
        let got = load_str(
            r#"{"context": "Hi!", "response": "Hello there."}
{"context": "a b", "response": "c", "corpus": "other"}
{"context": "x", "response": "y"}
"#,
        )
        .unwrap();
        assert_eq!(got.pairs.len(), 3);
        assert_eq!(got.skipped, 0);
        assert_eq!(got.pairs[0].context, ["hi"]);
        assert_eq!(got.pairs[0].response, ["hello", "there"]);
        assert!(got.pairs.iter().all(|p| p.corpus == 2));
    }

    #[test]
    fn malformed_lines_are_skipped() {
        let got = load_str(
            r#"{"context": "a", "response": "b"}
not json
{"context": "c", "response": "d"}
{"context": "c", "reply": "d"}
{"context": "c", "response": "d", "extra": 1}
{"context": "!!", "response": "d"}
{"context": 3, "response": "d"}
"#,
        )
        .unwrap();
        assert_eq!(got.pairs.len(), 2);
        assert_eq!(got.skipped, 5);
    }

    #[test]
    fn blank_file_is_empty_corpus() {
        assert!(matches!(load_str("\n\n   \n"), Err(Error::EmptyCorpus { skipped: 0, .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_pairs(Path::new("/nonexistent/x.jsonl"), &cid(), TokenizerConfig::default())
            .unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("/nonexistent/x.jsonl"));
    }

    proptest! {
        #[test]
        fn write_then_load_roundtrips(
            raw in prop::collection::vec(("[A-Za-z',.!? ]{1,30}", "[A-Za-z',.!? ]{1,30}"), 1..8)
        ) {
            let cfg = TokenizerConfig::default();
            let pairs: Vec<_> = raw
                .iter()
                .map(|(c, r)| ContextResponsePair::new(tokenize(c, cfg), tokenize(r, cfg), 2))
                .filter(|p| !p.context.is_empty() && !p.response.is_empty())
                .collect();
            prop_assume!(!pairs.is_empty());
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("p.jsonl");
            let header = ArtifactHeader::new("pairs", 1).with("corpus", "c");
            write_pairs(&path, &pairs, "c", &header).unwrap();
            let back = load_pairs(&path, &cid(), cfg).unwrap();
            prop_assert_eq!(back.skipped, 0);
            prop_assert_eq!(back.header, Some(header));
            prop_assert_eq!(back.pairs, pairs);
        }
    }
}
