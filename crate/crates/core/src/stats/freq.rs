use std::collections::BTreeMap;

use crate::corpus::{is_reserved, ContextResponsePair};
use crate::{Error, Result};

/// Raw and relative word frequencies of one corpus, over context and response
/// tokens alike. Reserved tokens (`<unk>` etc.) are not counted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreqTable {
    pub corpus: usize,
    counts: BTreeMap<String, u64>,
    total: u64,
    min_count: u64,
}

impl FreqTable {
    pub fn build(corpus: usize, pairs: &[ContextResponsePair]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidArgument(format!("corpus {corpus} has no pairs")));
        }
        Self::from_tokens(
            corpus,
            pairs.iter().flat_map(|p| p.context.iter().chain(&p.response)),
        )
    }

    pub fn from_tokens<S: AsRef<str>>(corpus: usize, tokens: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for t in tokens {
            let t = t.as_ref();
            if !is_reserved(t) {
                *counts.entry(t.to_string()).or_insert(0u64) += 1;
            }
        }
        Self::from_counts(corpus, counts)
    }

    pub fn from_counts(corpus: usize, counts: BTreeMap<String, u64>) -> Result<Self> {
        let counts: BTreeMap<String, u64> = counts.into_iter().filter(|(_, c)| *c > 0).collect();
        let total = counts.values().sum();
        let Some(&min_count) = counts.values().min() else {
            return Err(Error::InvalidArgument(format!("corpus {corpus} has no tokens")));
        };
        Ok(Self {
            corpus,
            counts,
            total,
            min_count,
        })
    }

    pub fn total_tokens(&self) -> u64 {
        self.total
    }

    pub fn count(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    /// Relative frequency; 0 for absent words.
    pub fn freq(&self, word: &str) -> f64 {
        self.count(word) as f64 / self.total as f64
    }

    /// Minimum relative frequency over words present in the corpus.
    pub fn min_freq(&self) -> f64 {
        self.min_count as f64 / self.total as f64
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_min() {
        let t = FreqTable::from_tokens(0, ["x", "x", "x", "y"]).unwrap();
        assert_eq!(t.freq("x"), 0.75);
        assert_eq!(t.freq("y"), 0.25);
        assert_eq!(t.min_freq(), 0.25);
        assert_eq!(t.freq("z"), 0.0);
        let s: f64 = t.words().map(|w| t.freq(w)).sum();
        assert!((s - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_word() {
        let t = FreqTable::from_tokens(0, ["w"; 5]).unwrap();
        assert_eq!(t.freq("w"), 1.0);
        assert_eq!(t.min_freq(), 1.0);
    }

    #[test]
    fn counts_both_sides_of_pairs() {
        let pairs = [
            ContextResponsePair::new(vec!["a".into(), "b".into()], vec!["c".into()], 0),
            ContextResponsePair::new(vec!["a".into()], vec!["d".into(), "<unk>".into(), "e".into()], 0),
        ];
        let t = FreqTable::build(0, &pairs).unwrap();
        assert_eq!(t.total_tokens(), 6);
        assert_eq!(t.freq("a"), 2.0 / 6.0);
        assert_eq!(t.count("<unk>"), 0);
    }

    #[test]
    fn empty_is_error() {
        assert!(FreqTable::build(0, &[]).is_err());
        assert!(FreqTable::from_tokens(0, ["<unk>"]).is_err());
    }
}
