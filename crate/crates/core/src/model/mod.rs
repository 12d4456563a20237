//! Desk-scale GRU encoder-decoder with dot-product attention and the five
//! training methods compared in this crate.
//!
//! | method              | decoder corpus embedding | extra loss      | labels at generation |
//! |---------------------|--------------------------|-----------------|----------------------|
//! | `concatenated`      | none                     | none            | none                 |
//! | `interleaved`       | none                     | none            | none                 |
//! | `labeled`           | gold corpus              | none            | required             |
//! | `multitask_labeled` | classifier prediction    | classifier CE   | none                 |
//! | `weighted`          | none                     | per-word DF     | none                 |
//!
//! `concatenated` and `interleaved` share one loss; they differ only in the
//! training order produced by [`crate::mixing`].

mod attention;
mod cell;
mod checkpoint;
mod generate;
mod gradcheck;
mod network;
mod params;
mod train;

use std::fmt;
use std::str::FromStr;

pub use attention::{attend, log_sum_exp, softmax};
pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Checkpoint, CheckpointMeta};
pub use generate::{generate, GENERATION_MASK};
pub use gradcheck::{gradient_check, GroupError};
pub use network::{
    argmax, backward, classifier_loss, classify, cross_entropy, decode_step, encode, forward,
    loss_and_gradient, response_nll, sequence_loss, step_weights, ClassifierOutput, DecoderState,
    Example, ForwardTrace, LossBreakdown,
};
pub use params::{CellKind, ModelDims, ModelParams};
pub use train::{encode_corpora, train, EncodedPair, TrainConfig, TrainLog, TrainOutput};

use crate::corpus::{Vocabulary, EOS};
use crate::stats::DfTable;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Concatenated,
    Interleaved,
    Labeled,
    MultitaskLabeled,
    Weighted,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Concatenated,
        Method::Interleaved,
        Method::Labeled,
        Method::MultitaskLabeled,
        Method::Weighted,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Concatenated => "concatenated",
            Method::Interleaved => "interleaved",
            Method::Labeled => "labeled",
            Method::MultitaskLabeled => "multitask_labeled",
            Method::Weighted => "weighted",
        }
    }

    pub fn uses_corpus_embedding(self) -> bool {
        matches!(self, Method::Labeled | Method::MultitaskLabeled)
    }

    pub fn has_classifier(self) -> bool {
        self == Method::MultitaskLabeled
    }

    /// Only labeled learning is told the corpus at generation time.
    pub fn needs_label_at_generation(self) -> bool {
        self == Method::Labeled
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

/// Dense per-corpus loss weights over vocabulary ids for weighted learning.
///
/// Word tokens get DF(word)_corpus (0 for words outside the DF table and for
/// reserved tokens). The end-of-response token is not a word and gets
/// `end_weight`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossWeights {
    per_corpus: Vec<Vec<f64>>,
    end_weight: f64,
}

impl LossWeights {
    pub fn new(per_corpus: Vec<Vec<f64>>, end_weight: f64) -> Self {
        Self {
            per_corpus,
            end_weight,
        }
    }

    pub fn from_df(df: &DfTable, vocab: &Vocabulary, num_corpora: usize, end_weight: f64) -> Result<Self> {
        let per_corpus = (0..num_corpora)
            .map(|c| {
                if !df.corpora().contains(&c) {
                    return Err(Error::InvalidArgument(format!("DF table does not cover corpus {c}")));
                }
                Ok(vocab
                    .tokens()
                    .iter()
                    .map(|t| if crate::corpus::is_reserved(t) { 0.0 } else { df.df(t, c) })
                    .collect())
            })
            .collect::<Result<_>>()?;
        Ok(Self::new(per_corpus, end_weight))
    }

    pub fn weight(&self, corpus: usize, token: u32) -> Result<f64> {
        if token == EOS {
            return Ok(self.end_weight);
        }
        let row = self.per_corpus.get(corpus).ok_or(Error::OutOfRange {
            what: "corpus",
            index: corpus,
            limit: self.per_corpus.len(),
        })?;
        row.get(token as usize).copied().ok_or(Error::OutOfRange {
            what: "token",
            index: token as usize,
            limit: row.len(),
        })
    }

    /// Every weight, end weight included, multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            per_corpus: self
                .per_corpus
                .iter()
                .map(|r| r.iter().map(|w| w * k).collect())
                .collect(),
            end_weight: self.end_weight * k,
        }
    }

    pub fn end_weight(&self) -> f64 {
        self.end_weight
    }
}
