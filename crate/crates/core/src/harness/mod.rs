//! Experiment orchestration: human data in, per-word Hotelling verdicts out.

mod diagram;
mod experiment;
mod humans;
mod words;

use thiserror::Error;

use crate::providers::ProviderError;
use crate::stats::StatsError;

pub use diagram::{export_diagram, DiagramDataset, DiagramGroup, DiagramPoint, PointKind};
pub use experiment::{
    run_experiment, EvaluationReport, ExperimentConfig, ModelPick, ReportPoint, ReportSummary, WordReport,
    DEFAULT_CONCURRENCY,
};
pub use humans::{ingest_human_responses, HumanRecord, HumanResponse, HumanResponseSet};
pub use words::{WordList, REFERENCE_WORDS};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("line {line}: response at ({row}, {col}) is off the board")]
    OffBoardResponse { line: usize, row: usize, col: usize },
    #[error("line {line}: subject {subject:?} answered {word:?} twice")]
    DuplicateResponse { line: usize, subject: String, word: String },
    #[error("word list contains {0:?} twice")]
    DuplicateWord(String),
    #[error("word list is empty")]
    EmptyWordList,
    #[error("word {word:?} has {count} human response(s); at least 2 are needed")]
    InsufficientHumanData { word: String, count: usize },
    #[error("provider failed on {word:?}: {source}")]
    Provider {
        word: String,
        source: ProviderError,
        /// Words evaluated before the failure, flagged incomplete.
        partial: Box<EvaluationReport>,
    },
    #[error("statistics failed on {word:?}: {source}")]
    Stats { word: String, source: StatsError },
    #[error("report is empty or incomplete")]
    IncompleteReport,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub(crate) fn at_line(self, line: usize) -> Self {
        match self {
            HarnessError::MalformedRecord { reason, .. } => HarnessError::MalformedRecord { line, reason },
            HarnessError::OffBoardResponse { row, col, .. } => HarnessError::OffBoardResponse { line, row, col },
            HarnessError::DuplicateResponse { subject, word, .. } => {
                HarnessError::DuplicateResponse { line, subject, word }
            }
            other => other,
        }
    }
}
