use std::collections::HashMap;

use crate::corpus::{is_reserved, Stopwords};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RougeScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScores {
    pub fn from_counts(overlap: usize, candidate: usize, reference: usize) -> Self {
        if candidate == 0 || reference == 0 {
            return Self::default();
        }
        let precision = overlap as f64 / candidate as f64;
        let recall = overlap as f64 / reference as f64;
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f1,
        }
    }

    /// Component-wise mean; zeros for an empty input.
    pub fn mean(scores: &[RougeScores]) -> Self {
        if scores.is_empty() {
            return Self::default();
        }
        let n = scores.len() as f64;
        let sum = |f: fn(&RougeScores) -> f64| scores.iter().map(f).sum::<f64>() / n;
        Self {
            precision: sum(|s| s.precision),
            recall: sum(|s| s.recall),
            f1: sum(|s| s.f1),
        }
    }
}

fn content_words<'a, S: AsRef<str>>(tokens: &'a [S], stopwords: &Stopwords) -> Vec<&'a str> {
    tokens
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| !stopwords.contains(t) && !is_reserved(t))
        .collect()
}

/// Unigram overlap after removing stop words and reserved tokens. Each
/// reference occurrence matches at most one candidate occurrence. If either
/// side is empty after filtering, all scores are 0.
pub fn rouge1<S: AsRef<str>, R: AsRef<str>>(candidate: &[S], reference: &[R], stopwords: &Stopwords) -> RougeScores {
    let cand = content_words(candidate, stopwords);
    let refs = content_words(reference, stopwords);
    let mut available: HashMap<&str, usize> = HashMap::new();
    for w in &refs {
        *available.entry(w).or_default() += 1;
    }
    let mut overlap = 0;
    for w in &cand {
        if let Some(n) = available.get_mut(w) {
            if *n > 0 {
                *n -= 1;
                overlap += 1;
            }
        }
    }
    RougeScores::from_counts(overlap, cand.len(), refs.len())
}
