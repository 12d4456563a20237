use std::collections::BTreeMap;

use super::FreqTable;
use crate::{Error, Result};

/// Log-normalized TF-IDF per corpus, treating each corpus as one document.
#[derive(Debug, Clone, PartialEq)]
pub struct TfIdf {
    pub corpora: Vec<usize>,
    pub raw: Vec<BTreeMap<String, f64>>,
    /// Scores scaled so each corpus's top word is 100.
    pub percent: Vec<BTreeMap<String, f64>>,
}

impl TfIdf {
    pub fn percent(&self, word: &str, corpus: usize) -> f64 {
        self.corpora
            .iter()
            .position(|&c| c == corpus)
            .and_then(|r| self.percent[r].get(word).copied())
            .unwrap_or(0.0)
    }
}

/// `tf = 1 + ln(count)`, `idf = ln(|D| / corpora containing w)`.
pub fn compute_tfidf(tables: &[FreqTable]) -> Result<TfIdf> {
    if tables.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "TF-IDF needs at least 2 corpora, got {}",
            tables.len()
        )));
    }
    let n = tables.len() as f64;
    let mut doc_freq: BTreeMap<&str, usize> = BTreeMap::new();
    for t in tables {
        for w in t.words() {
            *doc_freq.entry(w).or_default() += 1;
        }
    }
    let raw: Vec<BTreeMap<String, f64>> = tables
        .iter()
        .map(|t| {
            t.counts()
                .iter()
                .map(|(w, &c)| {
                    let tf = 1.0 + (c as f64).ln();
                    let idf = (n / doc_freq[w.as_str()] as f64).ln();
                    (w.clone(), tf * idf)
                })
                .collect()
        })
        .collect();
    let percent = raw
        .iter()
        .map(|scores| {
            let max = scores.values().copied().fold(0.0, f64::max);
            scores
                .iter()
                .map(|(w, &s)| (w.clone(), if max > 0.0 { 100.0 * s / max } else { 0.0 }))
                .collect()
        })
        .collect();
    Ok(TfIdf {
        corpora: tables.iter().map(|t| t.corpus).collect(),
        raw,
        percent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_cases() {
        let tables = [
            FreqTable::from_tokens(0, ["the", "k", "k", "k"]).unwrap(),
            FreqTable::from_tokens(1, ["the", "b"]).unwrap(),
            FreqTable::from_tokens(2, ["the", "c"]).unwrap(),
            FreqTable::from_tokens(3, ["the", "d"]).unwrap(),
        ];
        let t = compute_tfidf(&tables).unwrap();
        assert_eq!(t.raw[0]["the"], 0.0);
        let expected = (1.0 + 3f64.ln()) * 4f64.ln();
        assert!((t.raw[0]["k"] - expected).abs() < 1e-12);
        assert_eq!(t.percent("k", 0), 100.0);
        assert_eq!(t.percent("b", 1), 100.0);
        assert_eq!(t.percent("the", 1), 0.0);
    }

    #[test]
    fn single_corpus_rejected() {
        let tables = [FreqTable::from_tokens(0, ["a"]).unwrap()];
        assert!(compute_tfidf(&tables).is_err());
    }
}
