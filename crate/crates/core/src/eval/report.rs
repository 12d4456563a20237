use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::rouge::{rouge1, RougeScores};
use super::score::{alpha_df_score, ScoreUnit};
use crate::artifact::ArtifactHeader;
use crate::corpus::Stopwords;
use crate::stats::AlphaDfTable;
use crate::{Error, Result};

pub const REPORT_KIND: &str = "report";
pub const REPORT_VERSION: u32 = 1;

/// Outputs of one system (a trained model, or the references themselves).
#[derive(Debug, Clone)]
pub struct SystemInput {
    pub name: String,
    pub method: Option<String>,
    pub vocab_hash: String,
    /// `responses[i]` answers the pairs of `test_sets[i]`, in order.
    pub responses: Vec<Vec<Vec<String>>>,
    pub perplexity: Vec<Option<f64>>,
}

#[derive(Debug, Clone)]
pub struct TestSetInput {
    pub name: String,
    pub references: Vec<Vec<String>>,
}

/// An αDF table and the data it was computed from (`train` or `test`).
#[derive(Debug, Clone, Copy)]
pub struct ScoringTable<'a> {
    pub provenance: &'a str,
    pub table: &'a AlphaDfTable,
    pub vocab_hash: &'a str,
}

#[derive(Debug, Clone)]
pub struct ReportInputs<'a> {
    pub vocab_hash: &'a str,
    pub systems: &'a [SystemInput],
    pub test_sets: &'a [TestSetInput],
    pub tables: &'a [ScoringTable<'a>],
    /// `(corpus id, name)` of every scoring corpus, in column order.
    pub scoring: &'a [(usize, String)],
    pub stopwords: &'a Stopwords,
    pub unit: ScoreUnit,
    /// Extra header fields (seed, alpha, ...).
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestSetScores {
    pub rouge: RougeScores,
    pub perplexity: Option<f64>,
    /// `alpha_df[p][d]`: provenance `p`, scoring corpus `d`.
    pub alpha_df: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub system: String,
    pub method: Option<String>,
    pub cells: Vec<TestSetScores>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub header: ArtifactHeader,
    pub test_sets: Vec<String>,
    pub scoring: Vec<String>,
    pub provenances: Vec<String>,
    pub rows: Vec<ReportRow>,
}

fn check_vocab(expected: &str, found: &str, context: String) -> Result<()> {
    if expected != found {
        return Err(Error::VocabMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
            context,
        });
    }
    Ok(())
}

pub fn build_report(inputs: &ReportInputs) -> Result<EvalReport> {
    if inputs.systems.is_empty() || inputs.test_sets.is_empty() {
        return Err(Error::InvalidArgument("report needs at least one system and one test set".into()));
    }
    if inputs.tables.is_empty() || inputs.scoring.is_empty() {
        return Err(Error::InvalidArgument("report needs at least one αDF table and scoring corpus".into()));
    }
    for t in inputs.tables {
        check_vocab(inputs.vocab_hash, t.vocab_hash, format!("{} αDF table", t.provenance))?;
    }
    for s in inputs.systems {
        check_vocab(inputs.vocab_hash, &s.vocab_hash, format!("responses of {}", s.name))?;
        if s.responses.len() != inputs.test_sets.len() || s.perplexity.len() != inputs.test_sets.len() {
            return Err(Error::InvalidArgument(format!("{} does not cover every test set", s.name)));
        }
    }

    let mut rows = Vec::with_capacity(inputs.systems.len());
    for s in inputs.systems {
        let mut cells = Vec::with_capacity(inputs.test_sets.len());
        for (t, test) in inputs.test_sets.iter().enumerate() {
            let responses = &s.responses[t];
            if responses.len() != test.references.len() {
                return Err(Error::InvalidArgument(format!(
                    "{} has {} responses for {}, expected {}",
                    s.name,
                    responses.len(),
                    test.name,
                    test.references.len()
                )));
            }
            let per_pair: Vec<RougeScores> = responses
                .iter()
                .zip(&test.references)
                .map(|(c, r)| rouge1(c, r, inputs.stopwords))
                .collect();
            let alpha_df = inputs
                .tables
                .iter()
                .map(|tab| {
                    inputs
                        .scoring
                        .iter()
                        .map(|&(d, _)| alpha_df_score(responses, tab.table, d, inputs.unit))
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            cells.push(TestSetScores {
                rouge: RougeScores::mean(&per_pair),
                perplexity: s.perplexity[t],
                alpha_df,
            });
        }
        rows.push(ReportRow {
            system: s.name.clone(),
            method: s.method.clone(),
            cells,
        });
    }

    let mut header = ArtifactHeader::new(REPORT_KIND, REPORT_VERSION)
        .with("vocab", inputs.vocab_hash)
        .with("unit", inputs.unit);
    for (k, v) in &inputs.metadata {
        header = header.with(k, v);
    }
    Ok(EvalReport {
        header,
        test_sets: inputs.test_sets.iter().map(|t| t.name.clone()).collect(),
        scoring: inputs.scoring.iter().map(|(_, n)| n.clone()).collect(),
        provenances: inputs.tables.iter().map(|t| t.provenance.to_string()).collect(),
        rows,
    })
}

fn num(v: f64) -> String {
    format!("{v:.6}")
}

impl EvalReport {
    pub fn columns(&self) -> Vec<String> {
        let mut cols = vec!["system".to_string(), "method".to_string()];
        for t in &self.test_sets {
            for m in ["rouge1_p", "rouge1_r", "rouge1_f1", "ppl"] {
                cols.push(format!("{t}:{m}"));
            }
            for p in &self.provenances {
                for d in &self.scoring {
                    cols.push(format!("{t}:alphaDF_{d}:{p}"));
                }
            }
        }
        cols
    }

    /// TSV with a metadata header; one row per system. Unavailable
    /// perplexities are written as `-`.
    pub fn render(&self) -> String {
        let mut out = self.header.render();
        out.push_str(&self.columns().join("\t"));
        out.push('\n');
        for row in &self.rows {
            let mut fields = vec![row.system.clone(), row.method.clone().unwrap_or_else(|| "-".into())];
            for cell in &row.cells {
                fields.push(num(cell.rouge.precision));
                fields.push(num(cell.rouge.recall));
                fields.push(num(cell.rouge.f1));
                fields.push(cell.perplexity.map_or_else(|| "-".to_string(), num));
                for by_corpus in &cell.alpha_df {
                    fields.extend(by_corpus.iter().map(|&v| num(v)));
                }
            }
            let _ = writeln!(out, "{}", fields.join("\t"));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }

    pub fn row(&self, system: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.system == system)
    }
}
