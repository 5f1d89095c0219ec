//! Plot-ready export: per word, the human points, the model's top-k, and
//! both means, each in board-grid and xy-chromaticity coordinates.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{EvaluationReport, HarnessError};
use crate::stats::{sample_mean, weighted_mean, Point, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Human,
    Model,
    HumanMean,
    ModelMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramPoint {
    pub kind: PointKind,
    /// Subject id, `rank N`, or `mean`.
    pub label: String,
    /// Board view; fractional for means.
    pub grid_row: f64,
    pub grid_col: f64,
    /// Chromatic diagram view.
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramGroup {
    pub word: String,
    pub p_value: f64,
    pub verdict: Verdict,
    pub points: Vec<DiagramPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramDataset {
    pub groups: Vec<DiagramGroup>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    word: &'a str,
    kind: PointKind,
    label: &'a str,
    grid_row: f64,
    grid_col: f64,
    x: f64,
    y: f64,
    weight: Option<f64>,
}

impl DiagramDataset {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("dataset serializes");
        s.push('\n');
        s
    }

    /// `word,kind,label,grid_row,grid_col,x,y,weight`
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        let mut wtr = csv::Writer::from_writer(out);
        for g in &self.groups {
            for p in &g.points {
                wtr.serialize(CsvRow {
                    word: &g.word,
                    kind: p.kind,
                    label: &p.label,
                    grid_row: p.grid_row,
                    grid_col: p.grid_col,
                    x: p.x,
                    y: p.y,
                    weight: p.weight,
                })?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn export_diagram(report: &EvaluationReport) -> Result<DiagramDataset, HarnessError> {
    if !report.complete || report.words.is_empty() {
        return Err(HarnessError::IncompleteReport);
    }
    let mut groups = Vec::with_capacity(report.words.len());
    for w in &report.words {
        let stats_err = |source| HarnessError::Stats { word: w.word.clone(), source };
        let mut points = Vec::with_capacity(w.humans.len() + w.top_k.len() + 2);
        for h in &w.humans {
            points.push(DiagramPoint {
                kind: PointKind::Human,
                label: h.subject.clone(),
                grid_row: h.row as f64,
                grid_col: h.col as f64,
                x: h.x,
                y: h.y,
                weight: None,
            });
        }
        for m in &w.top_k {
            points.push(DiagramPoint {
                kind: PointKind::Model,
                label: format!("rank {}", m.rank),
                grid_row: m.row as f64,
                grid_col: m.col as f64,
                x: m.x,
                y: m.y,
                weight: Some(m.weight),
            });
        }

        let human_grid: Vec<Point> = w.humans.iter().map(|h| Point::new(h.row as f64, h.col as f64)).collect();
        let hg = sample_mean(&human_grid).map_err(stats_err)?;
        points.push(DiagramPoint {
            kind: PointKind::HumanMean,
            label: "mean".into(),
            grid_row: hg.x,
            grid_col: hg.y,
            x: w.human_mean.x,
            y: w.human_mean.y,
            weight: None,
        });

        let model_grid: Vec<Point> = w.top_k.iter().map(|m| Point::new(m.row as f64, m.col as f64)).collect();
        let weights: Vec<f64> = w.top_k.iter().map(|m| m.weight).collect();
        let mg = weighted_mean(&model_grid, &weights).map_err(stats_err)?;
        points.push(DiagramPoint {
            kind: PointKind::ModelMean,
            label: "weighted mean".into(),
            grid_row: mg.x,
            grid_col: mg.y,
            x: w.model_mean.x,
            y: w.model_mean.y,
            weight: None,
        });

        groups.push(DiagramGroup { word: w.word.clone(), p_value: w.p_value, verdict: w.verdict, points });
    }
    Ok(DiagramDataset { groups })
}
