//! Similarity providers: anything that can score a word against the 480
//! board stimuli.
//!
//! Scores are opaque reals, higher meaning more similar. [`score_word`]
//! validates what a provider returns and ranks it; ties go to the lower
//! linear cell index so rankings never depend on evaluation order.

mod mock;
mod remote;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::colorlab::{Board, CellPos, CELL_COUNT};

pub use mock::MockProvider;
pub use remote::{ColorEntry, HealthReply, RemoteProvider, ScoreEntry, ScoreReply, ScoreRequest};

pub const DEFAULT_TOP_K: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProviderError {
    #[error("provider failure after {attempts} attempt(s): {reason}")]
    Failure { attempts: u32, reason: String },
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("non-finite score for cell id {id}")]
    NonFiniteScore { id: usize },
    #[error("k must be in 1..=480, got {0}")]
    InvalidK(usize),
    #[error("word must not be empty")]
    EmptyWord,
    #[error("anchor for {word:?} at ({row}, {col}) is off the board")]
    InvalidAnchor { word: String, row: usize, col: usize },
    #[error("provider configuration: {0}")]
    Config(String),
}

impl ProviderError {
    pub(crate) fn failure(reason: impl Into<String>) -> Self {
        ProviderError::Failure { attempts: 1, reason: reason.into() }
    }
}

/// Something that maps (word, board) to one raw score per cell, in linear
/// cell order.
pub trait SimilarityProvider: Send + Sync {
    fn raw_scores(&self, word: &str, board: &Board) -> Result<Vec<f64>, ProviderError>;

    /// Human-readable identity for logs and reports.
    fn describe(&self) -> String;
}

impl<P: SimilarityProvider + ?Sized> SimilarityProvider for Box<P> {
    fn raw_scores(&self, word: &str, board: &Board) -> Result<Vec<f64>, ProviderError> {
        (**self).raw_scores(word, board)
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<P: SimilarityProvider + ?Sized> SimilarityProvider for std::sync::Arc<P> {
    fn raw_scores(&self, word: &str, board: &Board) -> Result<Vec<f64>, ProviderError> {
        (**self).raw_scores(word, board)
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

/// A validated score table for one word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityResult {
    pub word: String,
    pub scores: Vec<f64>,
    /// Cell indices by descending score, ties by ascending index.
    pub ranking: Vec<usize>,
}

impl SimilarityResult {
    pub fn from_scores(word: impl Into<String>, scores: Vec<f64>) -> Result<Self, ProviderError> {
        if scores.len() != CELL_COUNT {
            return Err(ProviderError::failure(format!("expected {CELL_COUNT} scores, got {}", scores.len())));
        }
        if let Some(id) = scores.iter().position(|s| !s.is_finite()) {
            return Err(ProviderError::NonFiniteScore { id });
        }
        let mut ranking: Vec<usize> = (0..CELL_COUNT).collect();
        ranking.sort_by(|&i, &j| scores[j].partial_cmp(&scores[i]).expect("finite").then(i.cmp(&j)));
        Ok(SimilarityResult { word: word.into(), scores, ranking })
    }

    pub fn best(&self) -> CellPos {
        CellPos::from_index(self.ranking[0]).expect("ranking holds cell indices")
    }

    /// Cells in rank order.
    pub fn ranked_cells(&self) -> impl Iterator<Item = CellPos> + '_ {
        self.ranking.iter().map(|&i| CellPos::from_index(i).expect("ranking holds cell indices"))
    }

    pub fn min_score(&self) -> f64 {
        self.scores.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PickEntry {
    pub row: usize,
    pub col: usize,
    pub score: f64,
    /// 1-based.
    pub rank: usize,
}

impl PickEntry {
    pub fn pos(&self) -> CellPos {
        CellPos { row: self.row, col: self.col }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopKPick {
    pub word: String,
    pub entries: Vec<PickEntry>,
}

pub fn score_word<P: SimilarityProvider + ?Sized>(
    provider: &P,
    word: &str,
    board: &Board,
) -> Result<SimilarityResult, ProviderError> {
    let word = word.trim();
    if word.is_empty() {
        return Err(ProviderError::EmptyWord);
    }
    SimilarityResult::from_scores(word, provider.raw_scores(word, board)?)
}

pub fn top_k(result: &SimilarityResult, k: usize) -> Result<TopKPick, ProviderError> {
    if k == 0 || k > CELL_COUNT {
        return Err(ProviderError::InvalidK(k));
    }
    let entries = result
        .ranked_cells()
        .take(k)
        .enumerate()
        .map(|(i, pos)| PickEntry { row: pos.row, col: pos.col, score: result.scores[pos.index()], rank: i + 1 })
        .collect();
    Ok(TopKPick { word: result.word.clone(), entries })
}

/// Builds a provider from a CLI-style descriptor: an `http(s)://` URL or
/// `mock:<anchors.json>`.
pub fn provider_from_spec(spec: &str, template: Option<String>) -> Result<Box<dyn SimilarityProvider>, ProviderError> {
    if let Some(path) = spec.strip_prefix("mock:") {
        Ok(Box::new(MockProvider::from_path(Path::new(path))?))
    } else if spec.starts_with("http://") || spec.starts_with("https://") {
        Ok(Box::new(RemoteProvider::new(spec)?.with_template(template)))
    } else {
        Err(ProviderError::Config(format!("provider must be a URL or mock:<anchors.json>, got {spec:?}")))
    }
}
