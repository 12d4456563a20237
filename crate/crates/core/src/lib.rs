//! Multi-domain corpus balancing for open-domain response generation.
//!
//! The crate covers the full desk-scale pipeline:
//!
//! - [`corpus`]: tokenization, stop words, pair files, vocabulary registry and
//!   synthetic multi-domain fixtures.
//! - [`mixing`]: concatenated and interleaved training orders.
//! - [`stats`]: per-corpus frequencies, domain-specific frequency (DF), the
//!   exponential αDF transform and a TF-IDF comparison table.
//! - [`model`]: a GRU encoder-decoder with dot-product attention, trained with
//!   hand-derived gradients under five methods (concatenated, interleaved,
//!   labeled, multi-task labeled, DF-weighted).
//! - [`eval`]: stop-word-stripped ROUGE-1, αDF scoring, perplexity and report
//!   matrices.
//! - [`cli`]: the `domainbal` command-line front end.

pub mod artifact;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod mixing;
pub mod model;
pub mod stats;

pub use error::{Error, Result};
