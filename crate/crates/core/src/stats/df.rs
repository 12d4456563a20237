use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use super::FreqTable;
use crate::{Error, Result};

/// Sorted word list shared by the DF and αDF tables of one corpus collection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordIndex {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl WordIndex {
    pub fn new(words: BTreeSet<String>) -> Self {
        let words: Vec<String> = words.into_iter().collect();
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Self { words, index }
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Domain-specific frequency of every word for every corpus of a collection,
/// with the intermediate `f` and `df` values kept for inspection.
///
/// Rows are indexed by position in [`DfTable::corpora`], not by corpus id.
#[derive(Debug, Clone, PartialEq)]
pub struct DfTable {
    pub(crate) words: Arc<WordIndex>,
    pub(crate) corpora: Vec<usize>,
    pub(crate) f: Vec<Vec<f64>>,
    pub(crate) df: Vec<Vec<f64>>,
    pub(crate) weight: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfEntry {
    pub f: f64,
    pub df: f64,
    pub weight: f64,
}

impl DfTable {
    pub fn words(&self) -> &WordIndex {
        &self.words
    }

    /// Corpus ids covered, in row order.
    pub fn corpora(&self) -> &[usize] {
        &self.corpora
    }

    fn row(&self, corpus: usize) -> Option<usize> {
        self.corpora.iter().position(|&c| c == corpus)
    }

    pub fn entry(&self, word: &str, corpus: usize) -> Option<DfEntry> {
        let r = self.row(corpus)?;
        let w = self.words.get(word)?;
        Some(DfEntry {
            f: self.f[r][w],
            df: self.df[r][w],
            weight: self.weight[r][w],
        })
    }

    /// DF(word)_corpus; 0 for words or corpora outside the table.
    pub fn df(&self, word: &str, corpus: usize) -> f64 {
        self.entry(word, corpus).map_or(0.0, |e| e.weight)
    }

    /// DF row of one corpus, aligned with [`DfTable::words`].
    pub fn row_values(&self, corpus: usize) -> Option<&[f64]> {
        self.row(corpus).map(|r| self.weight[r].as_slice())
    }

    pub(crate) fn from_parts(
        words: Arc<WordIndex>,
        corpora: Vec<usize>,
        f: Vec<Vec<f64>>,
        df: Vec<Vec<f64>>,
        weight: Vec<Vec<f64>>,
    ) -> Self {
        Self {
            words,
            corpora,
            f,
            df,
            weight,
        }
    }
}

/// DF over a collection of at least two corpora.
///
/// For corpus `d` with relative frequencies `freq`:
/// `f(w) = max(0, freq(w) - min_v freq(v))`, the minimum taken over words
/// present in `d`; `df(w) = f(w) / sum over corpora of f(w)` (0 when `f` is
/// 0); `DF(w) = df(w) / max_v df(v)` (0 when the corpus has no positive `df`).
pub fn compute_df(tables: &[FreqTable]) -> Result<DfTable> {
    if tables.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "DF needs at least 2 corpora, got {}",
            tables.len()
        )));
    }
    let mut seen = HashSet::new();
    for t in tables {
        if !seen.insert(t.corpus) {
            return Err(Error::InvalidArgument(format!("corpus {} appears twice", t.corpus)));
        }
    }
    let words = Arc::new(WordIndex::new(
        tables.iter().flat_map(|t| t.words().map(str::to_string)).collect(),
    ));

    // (count - min_count) / total is exact zero at the minimum and avoids
    // subtracting two rounded ratios.
    let f: Vec<Vec<f64>> = tables
        .iter()
        .map(|t| {
            let total = t.total_tokens() as f64;
            words
                .words()
                .iter()
                .map(|w| {
                    let c = t.count(w);
                    if c > t.min_count() {
                        (c - t.min_count()) as f64 / total
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();

    let sums: Vec<f64> = (0..words.len())
        .map(|w| f.iter().map(|row| row[w]).sum())
        .collect();

    let df: Vec<Vec<f64>> = f
        .iter()
        .map(|row| {
            row.iter()
                .zip(&sums)
                .map(|(&fw, &s)| if fw == 0.0 { 0.0 } else { fw / s })
                .collect()
        })
        .collect();

    let weight = df
        .iter()
        .map(|row| {
            let max = row.iter().copied().fold(0.0, f64::max);
            row.iter()
                .map(|&v| if max > 0.0 { v / max } else { 0.0 })
                .collect()
        })
        .collect();

    Ok(DfTable {
        words,
        corpora: tables.iter().map(|t| t.corpus).collect(),
        f,
        df,
        weight,
    })
}

/// `alpha^DF` with zero preserved: values lie in `{0} ∪ (1, alpha]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaDfTable {
    pub alpha: f64,
    pub(crate) words: Arc<WordIndex>,
    pub(crate) corpora: Vec<usize>,
    pub(crate) values: Vec<Vec<f64>>,
}

pub fn alpha_transform(df: f64, alpha: f64) -> f64 {
    if df == 0.0 {
        0.0
    } else {
        alpha.powf(df)
    }
}

pub fn compute_alpha_df(table: &DfTable, alpha: f64) -> Result<AlphaDfTable> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha must be > 1, got {alpha}")));
    }
    Ok(AlphaDfTable {
        alpha,
        words: table.words.clone(),
        corpora: table.corpora.clone(),
        values: table
            .weight
            .iter()
            .map(|row| row.iter().map(|&v| alpha_transform(v, alpha)).collect())
            .collect(),
    })
}

impl AlphaDfTable {
    pub fn corpora(&self) -> &[usize] {
        &self.corpora
    }

    pub fn words(&self) -> &WordIndex {
        &self.words
    }

    /// αDF(word)_corpus; 0 for words outside the table.
    pub fn value(&self, word: &str, corpus: usize) -> f64 {
        let Some(r) = self.corpora.iter().position(|&c| c == corpus) else {
            return 0.0;
        };
        self.words.get(word).map_or(0.0, |w| self.values[r][w])
    }

    pub fn covers(&self, corpus: usize) -> bool {
        self.corpora.contains(&corpus)
    }
}
