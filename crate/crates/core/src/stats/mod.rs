//! Word statistics over a corpus collection: relative frequencies,
//! domain-specific frequency (DF), its exponential αDF rescaling and a
//! log-normalized TF-IDF for comparison.

mod df;
mod freq;
mod tfidf;
mod tsv;

pub use df::{alpha_transform, compute_alpha_df, compute_df, AlphaDfTable, DfEntry, DfTable, WordIndex};
pub use freq::FreqTable;
pub use tfidf::{compute_tfidf, TfIdf};
pub use tsv::{fmt_value, read_df_tsv, render_df_tsv, write_df_tsv, LoadedDf, TSV_COLUMNS};

use crate::corpus::ContextResponsePair;
use crate::Result;

/// One frequency table per corpus; `corpora[i]` gets corpus id `i`.
pub fn build_freq_tables(corpora: &[Vec<ContextResponsePair>]) -> Result<Vec<FreqTable>> {
    corpora
        .iter()
        .enumerate()
        .map(|(i, pairs)| FreqTable::build(i, pairs))
        .collect()
}
