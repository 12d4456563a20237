//! Corpus ingestion: tokenization, stop words, pair files, the vocabulary
//! registry and synthetic fixtures.

mod pairs;
mod registry;
mod synth;
mod tokenize;

pub use pairs::{load_pairs, write_pairs, ContextResponsePair, LoadedPairs};
pub use registry::{
    is_reserved, CorpusEntry, CorpusId, CorpusRegistry, Vocabulary, BOS, EOS, PAD, RESERVED, UNK,
};
pub use synth::{synthesize_corpora, DomainSpec, SyntheticSpec};
pub use tokenize::{strip_stopwords, tokenize, Stopwords, TokenizerConfig, DEFAULT_STOPWORDS};
