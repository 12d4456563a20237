//! Evaluation: stop-word-stripped ROUGE-1, αDF scoring of generated
//! responses, perplexity and the report matrix.

mod report;
mod responses;
mod rouge;
mod score;

pub use report::{
    build_report, EvalReport, ReportInputs, ReportRow, ScoringTable, SystemInput, TestSetInput, TestSetScores,
    REPORT_KIND, REPORT_VERSION,
};
pub use responses::{
    read_responses, render_responses, write_responses, ResponseFile, ResponseSet, RESPONSES_KIND,
    RESPONSES_VERSION,
};
pub use rouge::{rouge1, RougeScores};
pub use score::{alpha_df_score, perplexity, perplexity_from_nll, ScoreUnit};
