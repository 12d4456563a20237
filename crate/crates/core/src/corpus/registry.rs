use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ContextResponsePair, Stopwords, TokenizerConfig};
use crate::{Error, Result};

pub const PAD: u32 = 0;
pub const UNK: u32 = 1;
pub const BOS: u32 = 2;
pub const EOS: u32 = 3;

/// Reserved tokens occupy ids 0..4 in this order.
pub const RESERVED: [&str; 4] = ["<pad>", "<unk>", "<s>", "</s>"];

pub fn is_reserved(token: &str) -> bool {
    RESERVED.contains(&token)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CorpusId {
    pub index: usize,
    pub name: String,
}

/// Token to id bijection. Ids 0..4 are [`RESERVED`]; real words follow in
/// descending corpus frequency, ties broken lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn from_tokens(words: impl IntoIterator<Item = String>) -> Result<Self> {
        let mut tokens: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        let mut index = HashMap::new();
        for (i, t) in tokens.iter().enumerate() {
            index.insert(t.clone(), i as u32);
        }
        for w in words {
            if index.contains_key(&w) {
                if is_reserved(&w) {
                    continue;
                }
                return Err(Error::Spec(format!("duplicate vocabulary token {w:?}")));
            }
            index.insert(w.clone(), tokens.len() as u32);
            tokens.push(w);
        }
        Ok(Self { tokens, index })
    }

    /// Builds a vocabulary from every token of `pairs`, keeping at most
    /// `max_words` real words (reserved tokens excluded from the cap).
    pub fn build<'a>(
        pairs: impl IntoIterator<Item = &'a ContextResponsePair>,
        max_words: Option<usize>,
    ) -> Self {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for p in pairs {
            for t in p.context.iter().chain(&p.response) {
                if !is_reserved(t) {
                    *counts.entry(t.as_str()).or_default() += 1;
                }
            }
        }
        let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        if let Some(cap) = max_words {
            ranked.truncate(cap);
        }
        Self::from_tokens(ranked.into_iter().map(|(t, _)| t.to_string()))
            .expect("ranked tokens are unique")
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<u32> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }

    pub fn decode(&self, ids: &[u32]) -> Vec<String> {
        ids.iter()
            .map(|&i| self.token(i).unwrap_or(RESERVED[UNK as usize]).to_string())
            .collect()
    }

    /// First 16 hex digits of SHA-256 over the newline-joined token list.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.tokens {
            h.update(t.as_bytes());
            h.update(b"\n");
        }
        let digest = h.finalize();
        let mut out = String::with_capacity(16);
        for b in &digest[..8] {
            let _ = write!(out, "{b:02x}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: CorpusId,
    pub train_pairs: usize,
    pub test_pairs: usize,
    /// Pair files, relative to the registry file's directory.
    pub train_file: Option<String>,
    pub test_file: Option<String>,
}

/// Everything the downstream commands need to agree on: corpus ids, the
/// vocabulary, stop words and tokenizer settings. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusRegistry {
    pub corpora: Vec<CorpusEntry>,
    pub vocabulary: Vocabulary,
    pub stopwords: Stopwords,
    pub tokenizer: TokenizerConfig,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct RegistryFile {
    format: String,
    version: u32,
    seed: u64,
    vocab_hash: String,
    tokenizer: TokenizerConfig,
    corpora: Vec<CorpusEntry>,
    stopwords: Vec<String>,
    vocabulary: Vec<String>,
}

const REGISTRY_FORMAT: &str = "domainbal-registry";
const REGISTRY_VERSION: u32 = 1;

impl CorpusRegistry {
    /// Assigns dense ids `0..names.len()` in the given order.
    pub fn corpus_ids(names: &[String]) -> Result<Vec<CorpusId>> {
        let mut seen = HashSet::new();
        names
            .iter()
            .enumerate()
            .map(|(index, name)| {
                if name.is_empty() || name.contains(char::is_whitespace) {
                    return Err(Error::Spec(format!("invalid corpus name {name:?}")));
                }
                if !seen.insert(name.as_str()) {
                    return Err(Error::Spec(format!("duplicate corpus name {name:?}")));
                }
                Ok(CorpusId {
                    index,
                    name: name.clone(),
                })
            })
            .collect()
    }

    pub fn num_corpora(&self) -> usize {
        self.corpora.len()
    }

    pub fn names(&self) -> Vec<String> {
        self.corpora.iter().map(|c| c.id.name.clone()).collect()
    }

    pub fn corpus(&self, name: &str) -> Option<&CorpusId> {
        self.corpora.iter().map(|c| &c.id).find(|c| c.name == name)
    }

    pub fn vocab_hash(&self) -> String {
        self.vocabulary.hash()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = RegistryFile {
            format: REGISTRY_FORMAT.into(),
            version: REGISTRY_VERSION,
            seed: self.seed,
            vocab_hash: self.vocab_hash(),
            tokenizer: self.tokenizer,
            corpora: self.corpora.clone(),
            stopwords: self.stopwords.iter().map(str::to_string).collect(),
            vocabulary: self.vocabulary.tokens()[RESERVED.len()..].to_vec(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("registry serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: RegistryFile = serde_json::from_str(&text)
            .map_err(|e| Error::format(path, e.line(), e.to_string()))?;
        if file.format != REGISTRY_FORMAT || file.version != REGISTRY_VERSION {
            return Err(Error::format(path, 1, "not a v1 registry file"));
        }
        let vocabulary = Vocabulary::from_tokens(file.vocabulary)?;
        if vocabulary.hash() != file.vocab_hash {
            return Err(Error::VocabMismatch {
                expected: file.vocab_hash,
                found: vocabulary.hash(),
                context: path.display().to_string(),
            });
        }
        for (i, c) in file.corpora.iter().enumerate() {
            if c.id.index != i {
                return Err(Error::format(path, 1, "corpus indices are not dense"));
            }
        }
        Ok(Self {
            corpora: file.corpora,
            vocabulary,
            stopwords: file.stopwords.into_iter().collect(),
            tokenizer: file.tokenizer,
            seed: file.seed,
        })
    }

    pub fn resolve(registry_path: &Path, file: &str) -> PathBuf {
        registry_path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join(file)
    }

    /// Token counts per corpus name; diagnostic helper for `ingest`.
    pub fn summary(&self) -> BTreeMap<String, (usize, usize)> {
        self.corpora
            .iter()
            .map(|c| (c.id.name.clone(), (c.train_pairs, c.test_pairs)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(c: &str, r: &str) -> ContextResponsePair {
        ContextResponsePair::new(
            c.split(' ').map(String::from).collect(),
            r.split(' ').map(String::from).collect(),
            0,
        )
    }

    #[test]
    fn reserved_ids_are_fixed() {
        let v = Vocabulary::build([&pair("b a", "a")], None);
        assert_eq!(v.id("<pad>"), PAD);
        assert_eq!(v.id("<unk>"), UNK);
        assert_eq!(v.id("<s>"), BOS);
        assert_eq!(v.id("</s>"), EOS);
        // "a" occurs twice, so it ranks first.
        assert_eq!(v.id("a"), 4);
        assert_eq!(v.id("b"), 5);
        assert_eq!(v.id("zzz"), UNK);
        assert_eq!(v.decode(&[4, 5, 99]), ["a", "b", "<unk>"]);
    }

    #[test]
    fn cap_keeps_most_frequent() {
        let v = Vocabulary::build([&pair("x x y", "z x")], Some(1));
        assert_eq!(v.len(), 5);
        assert!(v.contains("x"));
        assert!(!v.contains("y"));
    }

    #[test]
    fn hash_depends_on_order() {
        let a = Vocabulary::from_tokens(["a".into(), "b".into()]).unwrap();
        let b = Vocabulary::from_tokens(["b".into(), "a".into()]).unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn duplicate_names_rejected() {
        let names = vec!["a".to_string(), "b".into(), "a".into()];
        assert!(matches!(
            CorpusRegistry::corpus_ids(&names),
            Err(Error::Spec(_))
        ));
        let ids = CorpusRegistry::corpus_ids(&names[..2]).unwrap();
        assert_eq!(ids[1].index, 1);
    }

    #[test]
    fn registry_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("registry.json");
        let ids = CorpusRegistry::corpus_ids(&["x".into(), "y".into()]).unwrap();
        let reg = CorpusRegistry {
            corpora: ids
                .into_iter()
                .map(|id| CorpusEntry {
                    id,
                    train_pairs: 3,
                    test_pairs: 1,
                    train_file: Some("x.train.jsonl".into()),
                    test_file: None,
                })
                .collect(),
            vocabulary: Vocabulary::build([&pair("hi there", "hello")], None),
            stopwords: Stopwords::bundled(),
            tokenizer: TokenizerConfig::default(),
            seed: 9,
        };
        reg.save(&path).unwrap();
        assert_eq!(CorpusRegistry::load(&path).unwrap(), reg);
    }
}
