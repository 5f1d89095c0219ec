use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use super::{ProviderError, SimilarityProvider};
use crate::colorlab::{Board, CellPos};

/// Deterministic test double: each word is anchored at a cell and scores
/// fall off with squared chromaticity distance from it. Unknown words
/// anchor at A1.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MockProvider {
    anchors: BTreeMap<String, CellPos>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AnchorSpec {
    Label(String),
    Cell { row: usize, col: usize },
}

fn normalize(word: &str) -> String {
    word.trim().to_uppercase()
}

impl MockProvider {
    pub fn new<I, S>(anchors: I) -> Self
    where
        I: IntoIterator<Item = (S, CellPos)>,
        S: AsRef<str>,
    {
        MockProvider { anchors: anchors.into_iter().map(|(w, p)| (normalize(w.as_ref()), p)).collect() }
    }

    /// Anchors JSON: `{"LEMON": {"row": 1, "col": 6}, "SEA": "H12"}`.
    pub fn from_json<R: Read>(reader: R) -> Result<Self, ProviderError> {
        let raw: BTreeMap<String, AnchorSpec> =
            serde_json::from_reader(reader).map_err(|e| ProviderError::Config(format!("anchors: {e}")))?;
        let mut anchors = BTreeMap::new();
        for (word, spec) in raw {
            let pos = match spec {
                AnchorSpec::Label(label) => {
                    label.parse::<CellPos>().map_err(|e| ProviderError::Config(format!("anchor for {word:?}: {e}")))?
                }
                AnchorSpec::Cell { row, col } => {
                    CellPos::new(row, col).map_err(|_| ProviderError::InvalidAnchor { word: word.clone(), row, col })?
                }
            };
            anchors.insert(normalize(&word), pos);
        }
        Ok(MockProvider { anchors })
    }

    pub fn from_path(path: &Path) -> Result<Self, ProviderError> {
        let file = std::fs::File::open(path).map_err(|e| ProviderError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(file)
    }

    pub fn anchor(&self, word: &str) -> CellPos {
        self.anchors.get(&normalize(word)).copied().unwrap_or(CellPos { row: 0, col: 0 })
    }

    pub fn anchors(&self) -> &BTreeMap<String, CellPos> {
        &self.anchors
    }
}

impl SimilarityProvider for MockProvider {
    fn raw_scores(&self, word: &str, board: &Board) -> Result<Vec<f64>, ProviderError> {
        let anchor = board.cell(self.anchor(word)).chroma;
        Ok(board.cells().iter().map(|c| -c.chroma.distance_sq(&anchor)).collect())
    }

    fn describe(&self) -> String {
        format!("mock ({} anchors)", self.anchors.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::{score_word, top_k};

    #[test]
    fn argmax_at_anchor() {
        let board = Board::synthetic();
        let mock = MockProvider::new([("lemon", CellPos { row: 3, col: 7 })]);
        let res = score_word(&mock, "LEMON", &board).unwrap();
        assert_eq!(res.best(), CellPos { row: 3, col: 7 });
        assert_eq!(top_k(&res, 1).unwrap().entries[0].pos(), CellPos { row: 3, col: 7 });
    }

    #[test]
    fn unknown_word_anchors_at_origin() {
        let board = Board::synthetic();
        let res = score_word(&MockProvider::default(), "ZEPPELIN", &board).unwrap();
        assert_eq!(res.best(), CellPos { row: 0, col: 0 });
    }

    #[test]
    fn equidistant_cells_rank_by_index() {
        // Two cells with identical chromaticity are exactly equidistant from any anchor.
        let mut ms: Vec<_> = Board::synthetic().measurements().collect();
        let twin = ms[200];
        ms[100].x = twin.x;
        ms[100].y = twin.y;
        let board = Board::from_measurements(ms).unwrap();
        let mock = MockProvider::new([("W", CellPos::from_index(5).unwrap())]);
        let res = score_word(&mock, "W", &board).unwrap();
        let r100 = res.ranking.iter().position(|&i| i == 100).unwrap();
        let r200 = res.ranking.iter().position(|&i| i == 200).unwrap();
        assert_eq!(r200, r100 + 1);
    }

    #[test]
    fn anchors_json_forms() {
        let mock = MockProvider::from_json(r#"{"lemon": {"row": 1, "col": 6}, "SEA": "H12"}"#.as_bytes()).unwrap();
        assert_eq!(mock.anchor("LEMON"), CellPos { row: 1, col: 6 });
        assert_eq!(mock.anchor("sea"), CellPos { row: 7, col: 11 });
        let off = MockProvider::from_json(r#"{"X": {"row": 16, "col": 0}}"#.as_bytes());
        assert!(matches!(off, Err(ProviderError::InvalidAnchor { .. })));
    }
}
