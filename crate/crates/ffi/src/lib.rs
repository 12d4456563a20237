//! C interface to `domainbal`.
//!
//! Every fallible function returns a [`DbStatus`]. On failure the message is
//! available from [`db_last_error`] on the same thread until the next call.
//! Strings handed out by the library must be released with
//! [`db_string_free`]; handles with their matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use domainbal::artifact::ArtifactHeader;
use domainbal::corpus::{tokenize, CorpusRegistry, Stopwords, TokenizerConfig};
use domainbal::eval::{alpha_df_score, rouge1, ScoreUnit};
use domainbal::model::{generate, load_checkpoint, Checkpoint, Method};
use domainbal::stats::{compute_alpha_df, compute_df, read_df_tsv, write_df_tsv, AlphaDfTable, DfTable, FreqTable};
use domainbal::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Format = 4,
    InvalidArgument = 5,
    OutOfRange = 6,
    /// A missing label, missing DF table or vocabulary mismatch.
    Precondition = 7,
    NonFinite = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DbRouge {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// DF and αDF tables with corpus names.
pub struct DbDfTable {
    df: DfTable,
    alpha: AlphaDfTable,
    names: Vec<String>,
    header: ArtifactHeader,
}

/// A trained model together with the vocabulary and tokenizer it was built on.
pub struct DbModel {
    checkpoint: Checkpoint,
    method: Method,
    registry: CorpusRegistry,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(DbStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => DbStatus::Io,
            Error::Format { .. } | Error::EmptyCorpus { .. } => DbStatus::Format,
            Error::Spec(_) | Error::InvalidArgument(_) => DbStatus::InvalidArgument,
            Error::OutOfRange { .. } => DbStatus::OutOfRange,
            Error::MissingCorpusEmbedding | Error::MissingDfTable | Error::VocabMismatch { .. } => {
                DbStatus::Precondition
            }
            Error::NonFinite { .. } => DbStatus::NonFinite,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DbStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DbStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            DbStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(DbStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(DbStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn texts<'a>(p: *const *const c_char, n: usize, what: &str) -> Result<Vec<&'a str>, Failure> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if p.is_null() {
        return Err(null(what));
    }
    std::slice::from_raw_parts(p, n).iter().map(|&s| text(s, what)).collect()
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn owned(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

fn words(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn db_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failure on this thread, or null. Valid until the next
/// library call on the same thread.
#[no_mangle]
pub extern "C" fn db_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn db_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Tokenizes `raw` and writes the tokens joined by single spaces to `*out`.
///
/// # Safety
/// `raw` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn db_tokenize(
    raw: *const c_char,
    lowercase: bool,
    strip_punctuation: bool,
    out: *mut *mut c_char,
) -> DbStatus {
    guard(|| {
        let raw = text(raw, "raw")?;
        let config = TokenizerConfig {
            lowercase,
            strip_punctuation,
        };
        put(out, owned(tokenize(raw, config).join(" ")))
    })
}

/// Builds DF tables from `n` corpora given as whitespace-separated token
/// text. `names` may be null, in which case corpora are named `c0`, `c1`, ...
///
/// # Safety
/// `corpora` (and `names` when non-null) must point to `n` NUL-terminated
/// strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn db_df_build(
    corpora: *const *const c_char,
    names: *const *const c_char,
    n: usize,
    alpha: f64,
    out: *mut *mut DbDfTable,
) -> DbStatus {
    guard(|| {
        let corpora = texts(corpora, n, "corpora")?;
        let names: Vec<String> = if names.is_null() {
            (0..n).map(|i| format!("c{i}")).collect()
        } else {
            texts(names, n, "names")?.into_iter().map(str::to_string).collect()
        };
        let tables = corpora
            .iter()
            .enumerate()
            .map(|(d, c)| FreqTable::from_tokens(d, words(c)))
            .collect::<domainbal::Result<Vec<_>>>()?;
        let df = compute_df(&tables)?;
        let alpha = compute_alpha_df(&df, alpha)?;
        let table = DbDfTable {
            df,
            alpha,
            names,
            header: ArtifactHeader::new("df", 1),
        };
        put(out, Box::into_raw(Box::new(table)))
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn db_df_load(path: *const c_char, out: *mut *mut DbDfTable) -> DbStatus {
    guard(|| {
        let loaded = read_df_tsv(&PathBuf::from(text(path, "path")?))?;
        let table = DbDfTable {
            df: loaded.df,
            alpha: loaded.alpha,
            names: loaded.names,
            header: loaded.header,
        };
        put(out, Box::into_raw(Box::new(table)))
    })
}

/// # Safety
/// `table` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn db_df_write(table: *const DbDfTable, path: *const c_char) -> DbStatus {
    guard(|| {
        let t = handle(table, "table")?;
        let path = PathBuf::from(text(path, "path")?);
        write_df_tsv(&path, &t.df, &t.alpha, &t.names, t.header.clone())?;
        Ok(())
    })
}

/// Number of corpora covered by `table`, 0 for a null handle.
///
/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn db_df_num_corpora(table: *const DbDfTable) -> usize {
    table.as_ref().map_or(0, |t| t.df.corpora().len())
}

/// DF and αDF of `word` in corpus `corpus`. Unknown words score 0.
///
/// # Safety
/// `table` must be a live handle, `word` a NUL-terminated string; either
/// output may be null.
#[no_mangle]
pub unsafe extern "C" fn db_df_lookup(
    table: *const DbDfTable,
    word: *const c_char,
    corpus: usize,
    df_out: *mut f64,
    alpha_df_out: *mut f64,
) -> DbStatus {
    guard(|| {
        let t = handle(table, "table")?;
        let word = text(word, "word")?;
        if !t.alpha.covers(corpus) {
            return Err(Error::OutOfRange {
                what: "corpus",
                index: corpus,
                limit: t.names.len(),
            }
            .into());
        }
        if !df_out.is_null() {
            df_out.write(t.df.df(word, corpus));
        }
        if !alpha_df_out.is_null() {
            alpha_df_out.write(t.alpha.value(word, corpus));
        }
        Ok(())
    })
}

/// # Safety
/// `table` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn db_df_free(table: *mut DbDfTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Stop-word-stripped ROUGE-1 of two whitespace-tokenized strings, using the
/// bundled stop-word list.
///
/// # Safety
/// Both strings must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn db_rouge1(candidate: *const c_char, reference: *const c_char, out: *mut DbRouge) -> DbStatus {
    guard(|| {
        let c = words(text(candidate, "candidate")?);
        let r = words(text(reference, "reference")?);
        let s = rouge1(&c, &r, &Stopwords::bundled());
        put(
            out,
            DbRouge {
                precision: s.precision,
                recall: s.recall,
                f1: s.f1,
            },
        )
    })
}

/// Mean αDF of `n` whitespace-tokenized responses against `corpus`, per token
/// occurrence or, with `unique`, per distinct word.
///
/// # Safety
/// `table` must be a live handle, `responses` must point to `n`
/// NUL-terminated strings and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn db_alpha_df_score(
    table: *const DbDfTable,
    responses: *const *const c_char,
    n: usize,
    corpus: usize,
    unique: bool,
    out: *mut f64,
) -> DbStatus {
    guard(|| {
        let t = handle(table, "table")?;
        let responses: Vec<Vec<&str>> = texts(responses, n, "responses")?.into_iter().map(words).collect();
        let unit = if unique { ScoreUnit::Unique } else { ScoreUnit::Occurrence };
        put(out, alpha_df_score(&responses, &t.alpha, corpus, unit)?)
    })
}

/// Loads a checkpoint and the registry it was trained against.
///
/// # Safety
/// Both paths must be NUL-terminated strings and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn db_model_load(
    checkpoint: *const c_char,
    registry: *const c_char,
    out: *mut *mut DbModel,
) -> DbStatus {
    guard(|| {
        let checkpoint = load_checkpoint(&PathBuf::from(text(checkpoint, "checkpoint")?))?;
        let registry = CorpusRegistry::load(&PathBuf::from(text(registry, "registry")?))?;
        let expected = registry.vocab_hash();
        if checkpoint.meta.vocab_hash != expected {
            return Err(Error::VocabMismatch {
                expected,
                found: checkpoint.meta.vocab_hash.clone(),
                context: "checkpoint".into(),
            }
            .into());
        }
        let method = checkpoint.meta.method()?;
        put(
            out,
            Box::into_raw(Box::new(DbModel {
                checkpoint,
                method,
                registry,
            })),
        )
    })
}

/// Greedy response to `context`. `corpus` selects the corpus embedding for
/// labeled models and must be negative for every other method.
///
/// # Safety
/// `model` must be a live handle, `context` a NUL-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn db_model_generate(
    model: *const DbModel,
    context: *const c_char,
    corpus: i64,
    max_len: usize,
    out: *mut *mut c_char,
) -> DbStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let tokens = tokenize(text(context, "context")?, m.registry.tokenizer);
        let ids = m.registry.vocabulary.encode(&tokens);
        let corpus = usize::try_from(corpus).ok();
        let response = generate(&m.checkpoint.params, &ids, m.method, corpus, max_len)?;
        put(out, owned(m.registry.vocabulary.decode(&response).join(" ")))
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn db_model_free(model: *mut DbModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
