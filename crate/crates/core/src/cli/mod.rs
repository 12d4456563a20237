//! The `domainbal` command line: `ingest → mix → df → train → generate → eval`.
//!
//! Exit codes: 0 on success, 1 on I/O errors, 2 on validation and usage
//! errors. `--config <path>` names a `key=value` file whose entries are used
//! for flags not given on the command line; `true`/`false` values toggle
//! switches.

mod commands;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "domainbal", version, about = "Multi-domain corpus balancing for response generation")]
pub struct Cli {
    /// key=value file supplying defaults for flags not given explicitly.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tokenize corpora (or synthesize them) and write a registry.
    Ingest(IngestArgs),
    /// Write a training order over the registry's training pairs.
    Mix(MixArgs),
    /// Compute DF and αDF tables.
    Df(DfArgs),
    /// Train a model and write a checkpoint.
    Train(TrainArgs),
    /// Greedily decode responses for test contexts.
    Generate(GenerateArgs),
    /// Score response files and write a report.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Synthetic fixture as DOMAINSxPAIRS, e.g. 3x200.
    #[arg(long, value_name = "NxP", conflicts_with = "corpus")]
    pub synthetic: Option<String>,
    /// Held-out pairs per synthetic domain (default: a quarter of PAIRS).
    #[arg(long, requires = "synthetic")]
    pub test_pairs: Option<usize>,
    /// Share of synthetic utterance tokens drawn from domain keywords.
    #[arg(long, requires = "synthetic", default_value_t = 0.5)]
    pub keyword_ratio: f64,
    /// Training pair file, as NAME=PATH. Repeat once per corpus.
    #[arg(long, value_name = "NAME=PATH")]
    pub corpus: Vec<String>,
    /// Test pair file, as NAME=PATH.
    #[arg(long, value_name = "NAME=PATH")]
    pub test: Vec<String>,
    /// Output directory for the registry and normalized pair files.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep only the N most frequent words.
    #[arg(long)]
    pub max_vocab: Option<usize>,
    /// Stop-word file (default: the bundled English list).
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long)]
    pub no_lowercase: bool,
    #[arg(long)]
    pub keep_punctuation: bool,
}

#[derive(Debug, Args)]
pub struct MixArgs {
    #[arg(long)]
    pub registry: PathBuf,
    #[arg(long, default_value = "interleaved")]
    pub mode: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Recycle shorter corpora instead of truncating to the shortest.
    #[arg(long)]
    pub cycle: bool,
    /// Corpus order for concatenation, comma-separated names.
    #[arg(long)]
    pub order: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DfArgs {
    #[arg(long)]
    pub registry: PathBuf,
    #[arg(long, default_value_t = 100.0)]
    pub alpha: f64,
    /// Which pair files to count: train or test.
    #[arg(long, default_value = "train")]
    pub scope: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the TF-IDF comparison table.
    #[arg(long)]
    pub tfidf_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub registry: PathBuf,
    #[arg(long)]
    pub method: String,
    /// Training order file (default: derived from the method and seed).
    #[arg(long)]
    pub mix: Option<PathBuf>,
    /// DF table; required by the weighted method.
    #[arg(long)]
    pub df_table: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    #[arg(long, default_value_t = 32)]
    pub dim: usize,
    #[arg(long)]
    pub corpus_dim: Option<usize>,
    #[arg(long, default_value_t = 0.3)]
    pub lr: f64,
    #[arg(long, default_value_t = 5.0)]
    pub clip: f64,
    #[arg(long, default_value_t = 1)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.08)]
    pub init_scale: f64,
    /// Loss weight of the end-of-response token in weighted mode.
    #[arg(long, default_value_t = 1.0)]
    pub end_weight: f64,
    /// Re-interleave the training order every epoch.
    #[arg(long)]
    pub reshuffle: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub registry: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Give the decoder the gold corpus of each test pair (labeled models).
    #[arg(long)]
    pub labels: bool,
    #[arg(long, default_value_t = 20)]
    pub max_len: usize,
    /// Pair files to answer: test or train.
    #[arg(long, default_value = "test")]
    pub split: String,
    /// System name in the report (default: the method).
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub registry: PathBuf,
    /// Response file. Repeat once per system.
    #[arg(long)]
    pub responses: Vec<PathBuf>,
    /// DF table file. Repeat for train and test provenance.
    #[arg(long = "df", required = true)]
    pub df: Vec<PathBuf>,
    /// Stop-word file (default: the registry's list).
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Add the references themselves as a system row.
    #[arg(long)]
    pub references: bool,
    /// αDF averaging unit: occurrence or unique.
    #[arg(long, default_value = "occurrence")]
    pub unit: String,
    #[arg(long, default_value = "test")]
    pub split: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `key=value` lines; blank lines and `#` comments are ignored.
pub fn parse_config(text: &str, path: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::format(path, i + 1, "expected key=value"))?;
        let k = k.trim().trim_start_matches("--").replace('_', "-");
        if k.is_empty() || k == "config" {
            return Err(Error::format(path, i + 1, format!("invalid key {k:?}")));
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

/// Removes `--config PATH` from `args` and appends the file's entries for
/// flags that `args` does not already set.
pub fn expand_config(mut args: Vec<String>) -> Result<Vec<String>> {
    let mut config = None;
    let mut i = 0;
    while i < args.len() {
        if args[i] == "--config" && i + 1 < args.len() {
            config = Some(args.remove(i + 1));
            args.remove(i);
        } else if let Some(p) = args[i].strip_prefix("--config=") {
            config = Some(p.to_string());
            args.remove(i);
        } else {
            i += 1;
        }
    }
    let Some(path) = config else {
        return Ok(args);
    };
    let path = PathBuf::from(path);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let given: Vec<String> = args
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    for (k, v) in parse_config(&text, &path)? {
        if given.contains(&k) {
            continue;
        }
        match v.as_str() {
            "true" => args.push(format!("--{k}")),
            "false" => {}
            _ => {
                args.push(format!("--{k}"));
                args.push(v);
            }
        }
    }
    Ok(args)
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Option<Vec<String>> = args.into_iter().map(|a| a.into().into_string().ok()).collect();
    let Some(args) = args else {
        eprintln!("error: arguments must be valid UTF-8");
        return 2;
    };
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn config_fills_missing_flags_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# defaults\nseed = 9\nmode=concatenated\ncycle=true\nmax_vocab=false\n").unwrap();
        let args = strings(&["domainbal", "mix", "--seed", "3", "--config", path.to_str().unwrap()]);
        let out = expand_config(args).unwrap();
        assert_eq!(
            out,
            strings(&["domainbal", "mix", "--seed", "3", "--mode", "concatenated", "--cycle"])
        );
    }

    #[test]
    fn config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.cfg");
        let err = expand_config(strings(&["x", "--config", missing.to_str().unwrap()])).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        let bad = dir.path().join("bad.cfg");
        std::fs::write(&bad, "no equals sign\n").unwrap();
        let err = expand_config(strings(&["x", "--config", bad.to_str().unwrap()])).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["domainbal", "frobnicate"]), 2);
        assert_eq!(run(["domainbal", "--help"]), 0);
    }
}
