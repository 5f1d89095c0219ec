//! Hues & Cues rules engine.
//!
//! A game is one leader turn: the leader sees a target cell, gives a
//! one-word clue, the other players each place a marker, the leader gives a
//! clue of up to two words, everyone places a second marker, and the round
//! is scored against the target.
//!
//! Scoring: the leader earns one point per marker inside the square region
//! of Chebyshev radius `region_radius` (3 × 3 by default) around the target.
//! Each marker earns `ring_points[d]` for Chebyshev distance `d` from the
//! target (3/2/1 by default, 0 beyond).

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::colorlab::{Board, CellPos, CELL_COUNT, COLS, ROWS};
use crate::providers::{score_word, ProviderError, SimilarityProvider};

pub const MIN_PLAYERS: usize = 3;
pub const MAX_PLAYERS: usize = 10;
pub const MARKERS_PER_PLAYER: u8 = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("a game needs 3 to 10 players, got {0}")]
    PlayerCountOutOfRange(usize),
    #[error("leader {0:?} is not one of the players")]
    UnknownLeader(String),
    #[error("player id {0:?} is used twice")]
    DuplicatePlayer(String),
    #[error("unknown player {0:?}")]
    UnknownPlayer(String),
    #[error("action not allowed in phase {0:?}")]
    WrongPhase(Phase),
    #[error("round {round} clue allows at most {max} word(s), got {got}")]
    ClueLengthViolation { round: u8, max: usize, got: usize },
    #[error("clue word {0:?} is banned")]
    BannedWord(String),
    #[error("the leader cannot place markers")]
    LeaderCannotPlace,
    #[error("cell {0} is already occupied")]
    CellOccupied(CellPos),
    #[error("player {0:?} already placed a marker this round")]
    AlreadyPlaced(String),
    #[error("cell ({row}, {col}) is off the board")]
    OutOfBounds { row: usize, col: usize },
    #[error("no free cell among the top {0} ranked cells")]
    NoFreeCell(usize),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlayerKind {
    Human,
    Model,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerSpec {
    pub id: String,
    pub kind: PlayerKind,
}

impl PlayerSpec {
    pub fn human(id: impl Into<String>) -> Self {
        PlayerSpec { id: id.into(), kind: PlayerKind::Human }
    }

    pub fn model(id: impl Into<String>) -> Self {
        PlayerSpec { id: id.into(), kind: PlayerKind::Model }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Player {
    pub id: String,
    pub kind: PlayerKind,
    pub markers_remaining: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    #[serde(rename = "awaiting-clue-1")]
    AwaitingClue1,
    #[serde(rename = "placing-1")]
    Placing1,
    #[serde(rename = "awaiting-clue-2")]
    AwaitingClue2,
    #[serde(rename = "placing-2")]
    Placing2,
    Scored,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clue {
    pub round: u8,
    pub words: Vec<String>,
}

impl Clue {
    pub fn text(&self) -> String {
        self.words.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Marker {
    pub player: String,
    pub row: usize,
    pub col: usize,
    pub round: u8,
}

impl Marker {
    pub fn pos(&self) -> CellPos {
        CellPos { row: self.row, col: self.col }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub region_radius: usize,
    /// Points by Chebyshev distance; distances past the end score 0.
    pub ring_points: Vec<u32>,
    /// Forbid two markers on one cell.
    pub exclusive_cells: bool,
    /// Upper-cased words a clue may not contain. Empty disables the check.
    pub banned_words: BTreeSet<String>,
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig {
            region_radius: 1,
            ring_points: vec![3, 2, 1],
            exclusive_cells: true,
            banned_words: BTreeSet::new(),
        }
    }
}

/// Bare color terms, for the optional clue lexicon check.
pub const COLOR_TERMS: &[&str] = &[
    "RED",
    "GREEN",
    "BLUE",
    "YELLOW",
    "ORANGE",
    "PURPLE",
    "VIOLET",
    "PINK",
    "BROWN",
    "BLACK",
    "WHITE",
    "GREY",
    "GRAY",
    "CYAN",
    "MAGENTA",
    "TEAL",
    "TURQUOISE",
    "INDIGO",
    "BEIGE",
    "MAROON",
];

impl GameConfig {
    pub fn with_color_terms_banned(mut self) -> Self {
        self.banned_words = COLOR_TERMS.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn ring_score(&self, distance: usize) -> u32 {
        self.ring_points.get(distance).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreSheet {
    pub leader: String,
    pub leader_points: u32,
    /// Non-leader points, summed over both markers.
    pub players: BTreeMap<String, u32>,
}

/// Full game state; serializes to the JSON transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub seed: u64,
    pub config: GameConfig,
    pub players: Vec<Player>,
    pub leader: String,
    pub target: CellPos,
    pub phase: Phase,
    pub clues: Vec<Clue>,
    pub markers: Vec<Marker>,
    pub score: Option<ScoreSheet>,
}

pub fn new_game(players: &[PlayerSpec], leader: &str, seed: u64, config: GameConfig) -> Result<GameState, GameError> {
    if !(MIN_PLAYERS..=MAX_PLAYERS).contains(&players.len()) {
        return Err(GameError::PlayerCountOutOfRange(players.len()));
    }
    let mut seen = HashSet::new();
    for p in players {
        if !seen.insert(p.id.as_str()) {
            return Err(GameError::DuplicatePlayer(p.id.clone()));
        }
    }
    if !seen.contains(leader) {
        return Err(GameError::UnknownLeader(leader.to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = CellPos::from_index(rng.random_range(0..CELL_COUNT)).expect("in range");
    let players = players
        .iter()
        .map(|p| Player {
            id: p.id.clone(),
            kind: p.kind,
            markers_remaining: if p.id == leader { 0 } else { MARKERS_PER_PLAYER },
        })
        .collect();
    Ok(GameState {
        seed,
        config,
        players,
        leader: leader.to_string(),
        target,
        phase: Phase::AwaitingClue1,
        clues: Vec::new(),
        markers: Vec::new(),
        score: None,
    })
}

/// All cells within Chebyshev distance `radius` of `target`, clipped to the board.
pub fn scoring_region(target: CellPos, radius: usize) -> Result<Vec<CellPos>, GameError> {
    if target.row >= ROWS || target.col >= COLS {
        return Err(GameError::OutOfBounds { row: target.row, col: target.col });
    }
    let rows = target.row.saturating_sub(radius)..=(target.row + radius).min(ROWS - 1);
    let cols = target.col.saturating_sub(radius)..=(target.col + radius).min(COLS - 1);
    Ok(rows.flat_map(|row| cols.clone().map(move |col| CellPos { row, col })).collect())
}

impl GameState {
    /// Round currently being clued or placed, 1 or 2.
    pub fn round(&self) -> Option<u8> {
        match self.phase {
            Phase::AwaitingClue1 | Phase::Placing1 => Some(1),
            Phase::AwaitingClue2 | Phase::Placing2 => Some(2),
            Phase::Scored => None,
        }
    }

    pub fn current_clue(&self) -> Option<&Clue> {
        match self.phase {
            Phase::Placing1 | Phase::Placing2 => self.clues.last(),
            _ => None,
        }
    }

    pub fn player(&self, id: &str) -> Option<&Player> {
        self.players.iter().find(|p| p.id == id)
    }

    pub fn non_leaders(&self) -> impl Iterator<Item = &Player> {
        self.players.iter().filter(move |p| p.id != self.leader)
    }

    pub fn is_occupied(&self, pos: CellPos) -> bool {
        self.markers.iter().any(|m| m.pos() == pos)
    }

    fn has_placed(&self, player: &str, round: u8) -> bool {
        self.markers.iter().any(|m| m.player == player && m.round == round)
    }

    /// Non-leaders that still owe a marker in the current placing phase.
    pub fn pending_players(&self) -> Vec<&Player> {
        match (self.phase, self.round()) {
            (Phase::Placing1 | Phase::Placing2, Some(round)) => {
                self.non_leaders().filter(|p| !self.has_placed(&p.id, round)).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Both rounds placed, waiting for [`GameState::score_round`].
    pub fn ready_to_score(&self) -> bool {
        self.phase == Phase::Placing2 && self.pending_players().is_empty()
    }

    pub fn submit_clue(&mut self, text: &str) -> Result<(), GameError> {
        let (round, next) = match self.phase {
            Phase::AwaitingClue1 => (1u8, Phase::Placing1),
            Phase::AwaitingClue2 => (2u8, Phase::Placing2),
            other => return Err(GameError::WrongPhase(other)),
        };
        let words: Vec<String> = text.split_whitespace().map(str::to_string).collect();
        let max = if round == 1 { 1 } else { 2 };
        if words.is_empty() || words.len() > max {
            return Err(GameError::ClueLengthViolation { round, max, got: words.len() });
        }
        if let Some(w) = words.iter().find(|w| self.config.banned_words.contains(&w.to_uppercase())) {
            return Err(GameError::BannedWord(w.clone()));
        }
        self.clues.push(Clue { round, words });
        self.phase = next;
        Ok(())
    }

    pub fn place_marker(&mut self, player: &str, row: usize, col: usize) -> Result<(), GameError> {
        let round = match self.phase {
            Phase::Placing1 => 1,
            Phase::Placing2 => 2,
            other => return Err(GameError::WrongPhase(other)),
        };
        let idx = self
            .players
            .iter()
            .position(|p| p.id == player)
            .ok_or_else(|| GameError::UnknownPlayer(player.to_string()))?;
        if player == self.leader {
            return Err(GameError::LeaderCannotPlace);
        }
        let pos = CellPos::new(row, col).map_err(|_| GameError::OutOfBounds { row, col })?;
        if self.has_placed(player, round) {
            return Err(GameError::AlreadyPlaced(player.to_string()));
        }
        if self.config.exclusive_cells && self.is_occupied(pos) {
            return Err(GameError::CellOccupied(pos));
        }
        self.markers.push(Marker { player: player.to_string(), row, col, round });
        self.players[idx].markers_remaining -= 1;
        if round == 1 && self.pending_players().is_empty() {
            self.phase = Phase::AwaitingClue2;
        }
        Ok(())
    }

    /// Each pending model player places at its best-ranked free cell for the
    /// current clue, searching at most `k` ranks deep.
    pub fn play_model_round<P: SimilarityProvider + ?Sized>(
        &mut self,
        board: &Board,
        provider: &P,
        k: usize,
    ) -> Result<(), GameError> {
        if !matches!(self.phase, Phase::Placing1 | Phase::Placing2) {
            return Err(GameError::WrongPhase(self.phase));
        }
        let pending: Vec<String> =
            self.pending_players().into_iter().filter(|p| p.kind == PlayerKind::Model).map(|p| p.id.clone()).collect();
        if pending.is_empty() {
            return Ok(());
        }
        let clue = self.current_clue().expect("placing phase has a clue").text();
        let result = score_word(provider, &clue, board)?;
        for id in pending {
            let exclusive = self.config.exclusive_cells;
            let pos = result
                .ranked_cells()
                .take(k)
                .find(|p| !exclusive || !self.is_occupied(*p))
                .ok_or(GameError::NoFreeCell(k))?;
            self.place_marker(&id, pos.row, pos.col)?;
        }
        Ok(())
    }

    /// Scores the finished round and moves to [`Phase::Scored`].
    pub fn score_round(&mut self) -> Result<ScoreSheet, GameError> {
        if !self.ready_to_score() {
            return Err(GameError::WrongPhase(self.phase));
        }
        let region: HashSet<CellPos> = scoring_region(self.target, self.config.region_radius)?.into_iter().collect();
        let leader_points = self.markers.iter().filter(|m| region.contains(&m.pos())).count() as u32;
        let mut players: BTreeMap<String, u32> = self.non_leaders().map(|p| (p.id.clone(), 0)).collect();
        for m in &self.markers {
            *players.get_mut(&m.player).expect("markers belong to non-leaders") +=
                self.config.ring_score(m.pos().chebyshev(&self.target));
        }
        let sheet = ScoreSheet { leader: self.leader.clone(), leader_points, players };
        self.score = Some(sheet.clone());
        self.phase = Phase::Scored;
        Ok(sheet)
    }

    pub fn transcript_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("game state serializes")
    }
}
