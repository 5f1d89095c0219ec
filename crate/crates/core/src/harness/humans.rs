use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::colorlab::CellPos;

/// One JSON-lines record: `{"subject": "h1", "word": "LEMON", "row": 2, "col": 13}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanRecord {
    pub subject: String,
    pub word: String,
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanResponse {
    pub subject: String,
    pub pos: CellPos,
}

/// Human choices grouped by (upper-cased) word, in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HumanResponseSet {
    by_word: BTreeMap<String, Vec<HumanResponse>>,
    subjects: BTreeSet<String>,
}

impl HumanResponseSet {
    pub fn insert(&mut self, record: HumanRecord) -> Result<(), HarnessError> {
        let pos = CellPos::new(record.row, record.col).map_err(|_| HarnessError::OffBoardResponse {
            line: 0,
            row: record.row,
            col: record.col,
        })?;
        let word = record.word.trim().to_uppercase();
        let subject = record.subject.trim().to_string();
        if word.is_empty() || subject.is_empty() {
            return Err(HarnessError::MalformedRecord { line: 0, reason: "empty subject or word".into() });
        }
        let group = self.by_word.entry(word.clone()).or_default();
        if group.iter().any(|r| r.subject == subject) {
            return Err(HarnessError::DuplicateResponse { line: 0, subject, word });
        }
        self.subjects.insert(subject.clone());
        group.push(HumanResponse { subject, pos });
        Ok(())
    }

    pub fn responses(&self, word: &str) -> &[HumanResponse] {
        self.by_word.get(&word.to_uppercase()).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.by_word.keys().map(String::as_str)
    }

    pub fn subjects(&self) -> &BTreeSet<String> {
        &self.subjects
    }

    pub fn sample_sizes(&self) -> BTreeMap<String, usize> {
        self.by_word.iter().map(|(w, r)| (w.clone(), r.len())).collect()
    }

    pub fn records(&self) -> impl Iterator<Item = HumanRecord> + '_ {
        self.by_word.iter().flat_map(|(word, rs)| {
            rs.iter().map(move |r| HumanRecord {
                subject: r.subject.clone(),
                word: word.clone(),
                row: r.pos.row,
                col: r.pos.col,
            })
        })
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for rec in self.records() {
            writeln!(out, "{}", serde_json::to_string(&rec).expect("record serializes"))?;
        }
        Ok(())
    }
}

/// Reads JSON-lines human responses. Blank lines are skipped; errors carry
/// 1-based line numbers.
pub fn ingest_human_responses<R: BufRead>(reader: R) -> Result<HumanResponseSet, HarnessError> {
    let mut set = HumanResponseSet::default();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: HumanRecord = serde_json::from_str(&line)
            .map_err(|e| HarnessError::MalformedRecord { line: line_no, reason: e.to_string() })?;
        set.insert(rec).map_err(|e| e.at_line(line_no))?;
    }
    Ok(set)
}
