use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::model::{response_nll, Example, Method, ModelParams};
use crate::stats::AlphaDfTable;
use crate::{Error, Result};

/// What the αDF mean runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreUnit {
    /// Every token occurrence across all responses.
    #[default]
    Occurrence,
    /// Each distinct word of the response set once.
    Unique,
}

impl fmt::Display for ScoreUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoreUnit::Occurrence => "occurrence",
            ScoreUnit::Unique => "unique",
        })
    }
}

impl FromStr for ScoreUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "occurrence" => Ok(ScoreUnit::Occurrence),
            "unique" => Ok(ScoreUnit::Unique),
            _ => Err(Error::InvalidArgument(format!("unknown score unit {s:?}"))),
        }
    }
}

/// Mean αDF(w)_corpus over the words of `responses`. Words outside the table
/// score 0. A response set with no tokens at all scores 0.
pub fn alpha_df_score<S: AsRef<str>>(
    responses: &[Vec<S>],
    table: &AlphaDfTable,
    corpus: usize,
    unit: ScoreUnit,
) -> Result<f64> {
    if responses.is_empty() {
        return Err(Error::InvalidArgument("no responses to score".into()));
    }
    if !table.covers(corpus) {
        return Err(Error::OutOfRange {
            what: "scoring corpus",
            index: corpus,
            limit: table.corpora().len(),
        });
    }
    let words = responses.iter().flatten().map(AsRef::as_ref);
    let (sum, n) = match unit {
        ScoreUnit::Occurrence => words.fold((0.0, 0usize), |(s, n), w| (s + table.value(w, corpus), n + 1)),
        ScoreUnit::Unique => {
            let distinct: BTreeSet<&str> = words.collect();
            (distinct.iter().map(|w| table.value(w, corpus)).sum(), distinct.len())
        }
    };
    Ok(if n == 0 { 0.0 } else { sum / n as f64 })
}

/// `exp(total_nll / tokens)`.
pub fn perplexity_from_nll(total_nll: f64, tokens: usize) -> Result<f64> {
    if tokens == 0 {
        return Err(Error::InvalidArgument("perplexity over zero tokens".into()));
    }
    let ppl = (total_nll / tokens as f64).exp();
    if !ppl.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite perplexity (NLL {total_nll})")));
    }
    Ok(ppl)
}

/// Perplexity of the reference responses (end token included) under the
/// generation-time label policy of `method`.
pub fn perplexity(params: &ModelParams, examples: &[Example], method: Method) -> Result<f64> {
    if examples.is_empty() {
        return Err(Error::InvalidArgument("perplexity over an empty pair list".into()));
    }
    let mut total = 0.0;
    let mut tokens = 0;
    for ex in examples {
        let (nll, steps) = response_nll(params, *ex, method)?;
        total += nll;
        tokens += steps;
    }
    perplexity_from_nll(total, tokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{compute_alpha_df, compute_df, FreqTable};

    fn table() -> AlphaDfTable {
        let df = compute_df(&[
            FreqTable::from_tokens(0, ["x", "x", "x", "y"]).unwrap(),
            FreqTable::from_tokens(1, ["y", "y", "y", "z"]).unwrap(),
        ])
        .unwrap();
        compute_alpha_df(&df, 100.0).unwrap()
    }

    #[test]
    fn occurrence_and_unique_means() {
        let t = table();
        let r = vec![vec!["x"], vec!["x", "q"]];
        assert_eq!(alpha_df_score(&r, &t, 0, ScoreUnit::Occurrence).unwrap(), 200.0 / 3.0);
        assert_eq!(alpha_df_score(&r, &t, 0, ScoreUnit::Unique).unwrap(), 50.0);
        assert_eq!(alpha_df_score(&r, &t, 1, ScoreUnit::Occurrence).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        let t = table();
        let none: Vec<Vec<&str>> = vec![];
        assert!(alpha_df_score(&none, &t, 0, ScoreUnit::Occurrence).is_err());
        assert!(alpha_df_score(&[vec!["x"]], &t, 5, ScoreUnit::Occurrence).is_err());
        assert!(perplexity_from_nll(1.0, 0).is_err());
    }

    #[test]
    fn two_token_half_probability() {
        let ppl = perplexity_from_nll(4.0 * std::f64::consts::LN_2, 4).unwrap();
        assert!((ppl - 2.0).abs() < 1e-12);
    }
}
