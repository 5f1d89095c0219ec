use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{HarnessError, HumanResponseSet, WordList};
use crate::colorlab::{Board, CellPos};
use crate::exec::{map_indices, Execution};
use crate::providers::{score_word, top_k, ProviderError, SimilarityProvider, DEFAULT_TOP_K};
use crate::stats::{
    self, hotelling_two_sample, hotelling_two_sample_weighted, rounded_percent, sample_mean, weighted_mean,
    ExperimentSummary, HotellingOutcome, Point, StatsError, Verdict, WordVerdict, DEFAULT_ALPHA,
};

/// Default bound on in-flight provider calls.
pub const DEFAULT_CONCURRENCY: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub top_k: usize,
    pub concurrency: usize,
    /// Use similarity weights inside the test, not just for the displayed mean.
    pub weighted_test: bool,
    /// Also compute a permutation p-value with this many shuffles.
    pub permutations: Option<usize>,
    pub permutation_seed: u64,
    pub execution: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            alpha: DEFAULT_ALPHA,
            top_k: DEFAULT_TOP_K,
            concurrency: DEFAULT_CONCURRENCY,
            weighted_test: false,
            permutations: None,
            permutation_seed: 0,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportPoint {
    pub subject: String,
    pub row: usize,
    pub col: usize,
    pub label: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPick {
    pub rank: usize,
    pub row: usize,
    pub col: usize,
    pub label: String,
    pub score: f64,
    /// Score shifted by the word's minimum score over the board; used for the weighted mean.
    pub weight: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordReport {
    pub word: String,
    pub t2: f64,
    pub f_stat: f64,
    pub df1: u32,
    pub df2: u32,
    pub p_value: f64,
    pub verdict: Verdict,
    pub human_mean: Point,
    pub model_mean: Point,
    pub humans: Vec<ReportPoint>,
    pub top_k: Vec<ModelPick>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation_p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub word_count: usize,
    pub mismatch_count: usize,
    pub error_rate: f64,
    pub error_rate_percent: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub provider: String,
    pub alpha: f64,
    pub top_k: usize,
    pub weighted_test: bool,
    pub complete: bool,
    pub words: Vec<WordReport>,
    pub summary: Option<ReportSummary>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    word: &'a str,
    p_value: f64,
    verdict: &'a str,
    human_mean_x: f64,
    human_mean_y: f64,
    model_mean_x: f64,
    model_mean_y: f64,
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        Ok(serde_json::from_str(text)?)
    }

    /// `word,p_value,verdict,human_mean_x,human_mean_y,model_mean_x,model_mean_y`
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        let mut wtr = csv::Writer::from_writer(out);
        for w in &self.words {
            wtr.serialize(CsvRow {
                word: &w.word,
                p_value: w.p_value,
                verdict: w.verdict.as_str(),
                human_mean_x: w.human_mean.x,
                human_mean_y: w.human_mean.y,
                model_mean_x: w.model_mean.x,
                model_mean_y: w.model_mean.y,
            })?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Words sorted by ascending p-value with their verdicts, then the error rate.
    pub fn render_table(&self) -> String {
        let mut rows: Vec<&WordReport> = self.words.iter().collect();
        rows.sort_by(|a, b| a.p_value.total_cmp(&b.p_value).then_with(|| a.word.cmp(&b.word)));
        let mut out = format!("{:<12} {:>12}  verdict\n", "word", "p-value");
        for w in rows {
            out.push_str(&format!("{:<12} {:>12.3e}  {}\n", w.word, w.p_value, w.verdict));
        }
        if let Some(s) = &self.summary {
            out.push_str(&format!(
                "mismatches: {}/{} (error rate {})\n",
                s.mismatch_count, s.word_count, s.error_rate_percent
            ));
        } else {
            out.push_str("INCOMPLETE: no summary\n");
        }
        out
    }

    pub fn verdicts(&self) -> Vec<WordVerdict> {
        self.words
            .iter()
            .map(|w| WordVerdict { word: w.word.clone(), p_value: w.p_value, verdict: w.verdict })
            .collect()
    }
}

/// Shifts scores so the word's worst cell gets weight 0; falls back to
/// equal weights when every picked score equals that minimum.
fn pick_weights(scores: &[f64], floor: f64) -> Vec<f64> {
    let w: Vec<f64> = scores.iter().map(|s| (s - floor).max(0.0)).collect();
    if w.iter().sum::<f64>() > 0.0 {
        w
    } else {
        vec![1.0; scores.len()]
    }
}

enum WordFailure {
    Provider(ProviderError),
    Stats(StatsError),
}

fn evaluate_word<P: SimilarityProvider + ?Sized>(
    board: &Board,
    word: &str,
    provider: &P,
    humans: &HumanResponseSet,
    cfg: &ExperimentConfig,
) -> Result<WordReport, WordFailure> {
    let result = score_word(provider, word, board).map_err(WordFailure::Provider)?;
    let picks = top_k(&result, cfg.top_k).map_err(WordFailure::Provider)?;
    let scores: Vec<f64> = picks.entries.iter().map(|e| e.score).collect();
    let weights = pick_weights(&scores, result.min_score());

    let chroma = |pos: CellPos| {
        let c = board.cell(pos).chroma;
        Point::new(c.x, c.y)
    };
    let humans: Vec<ReportPoint> = humans
        .responses(word)
        .iter()
        .map(|r| {
            let p = chroma(r.pos);
            ReportPoint {
                subject: r.subject.clone(),
                row: r.pos.row,
                col: r.pos.col,
                label: r.pos.label(),
                x: p.x,
                y: p.y,
            }
        })
        .collect();
    let top_k: Vec<ModelPick> = picks
        .entries
        .iter()
        .zip(&weights)
        .map(|(e, &weight)| {
            let p = chroma(e.pos());
            ModelPick {
                rank: e.rank,
                row: e.row,
                col: e.col,
                label: e.pos().label(),
                score: e.score,
                weight,
                x: p.x,
                y: p.y,
            }
        })
        .collect();

    let human_pts: Vec<Point> = humans.iter().map(|h| Point::new(h.x, h.y)).collect();
    let model_pts: Vec<Point> = top_k.iter().map(|m| Point::new(m.x, m.y)).collect();
    let outcome: HotellingOutcome = if cfg.weighted_test {
        hotelling_two_sample_weighted(&human_pts, &model_pts, &weights, cfg.alpha)
    } else {
        hotelling_two_sample(&human_pts, &model_pts, cfg.alpha)
    }
    .map_err(WordFailure::Stats)?;
    let permutation_p_value = match cfg.permutations {
        Some(n) => Some(
            stats::permutation_test(&human_pts, &model_pts, n, cfg.permutation_seed, Execution::Sequential)
                .map_err(WordFailure::Stats)?
                .p_value,
        ),
        None => None,
    };

    Ok(WordReport {
        word: word.to_string(),
        t2: outcome.t2,
        f_stat: outcome.f_stat,
        df1: outcome.df1,
        df2: outcome.df2,
        p_value: outcome.p_value,
        verdict: outcome.verdict,
        human_mean: sample_mean(&human_pts).map_err(WordFailure::Stats)?,
        model_mean: weighted_mean(&model_pts, &weights).map_err(WordFailure::Stats)?,
        humans,
        top_k,
        permutation_p_value,
    })
}

/// Evaluates every word: query the provider, take the top-k cells, and test
/// the human points against the model points in the xy plane.
///
/// Words are evaluated concurrently (at most `cfg.concurrency` provider
/// calls in flight); the report keeps word-list order either way.
pub fn run_experiment<P: SimilarityProvider + ?Sized>(
    board: &Board,
    words: &WordList,
    provider: &P,
    humans: &HumanResponseSet,
    cfg: &ExperimentConfig,
) -> Result<EvaluationReport, HarnessError> {
    for w in words.words() {
        let count = humans.responses(w).len();
        if count < 2 {
            return Err(HarnessError::InsufficientHumanData { word: w.clone(), count });
        }
    }

    let list = words.words();
    let results = map_indices(list.len(), cfg.execution, Some(cfg.concurrency.max(1)), |i| {
        evaluate_word(board, &list[i], provider, humans, cfg)
    });

    let mut report = EvaluationReport {
        provider: provider.describe(),
        alpha: cfg.alpha,
        top_k: cfg.top_k,
        weighted_test: cfg.weighted_test,
        complete: false,
        words: Vec::with_capacity(list.len()),
        summary: None,
    };
    let mut failure = None;
    for (word, res) in list.iter().zip(results) {
        match res {
            Ok(w) => report.words.push(w),
            Err(WordFailure::Stats(source)) => return Err(HarnessError::Stats { word: word.clone(), source }),
            Err(WordFailure::Provider(source)) => {
                failure.get_or_insert((word.clone(), source));
            }
        }
    }
    if let Some((word, source)) = failure {
        return Err(HarnessError::Provider { word, source, partial: Box::new(report) });
    }

    let summary = ExperimentSummary::from_verdicts(report.verdicts()).expect("word lists are non-empty");
    report.summary = Some(ReportSummary {
        word_count: summary.word_count,
        mismatch_count: summary.mismatch_count,
        error_rate: summary.error_rate,
        error_rate_percent: format!("{}%", rounded_percent(summary.mismatch_count, summary.word_count)),
    });
    report.complete = true;
    Ok(report)
}
