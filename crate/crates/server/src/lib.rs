//! HTTP API for the player UI: board data, response-collection sessions,
//! and live games where a human leader clues model players.
//!
//! | route                          | purpose                                  |
//! |--------------------------------|------------------------------------------|
//! | `GET  /api/board`              | 480 cells with labels and hex colors     |
//! | `POST /api/session`            | start a collection session               |
//! | `GET  /api/session/{id}/current` | current word and progress              |
//! | `POST /api/session/{id}/response`| answer the current word                |
//! | `POST /api/play`               | start a game (human leader, model players) |
//! | `POST /api/play/{id}/clue`     | give a clue; models place markers        |
//! | `GET  /api/play/{id}/state`    | game state                               |

pub mod sessions;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use hues_core::colorlab::{Board, CellPos};
use hues_core::game::{
    new_game, Clue, GameConfig, GameError, GameState, Marker, Phase, Player, PlayerSpec, ScoreSheet,
};
use hues_core::harness::WordList;
use hues_core::providers::{SimilarityProvider, DEFAULT_TOP_K};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use sessions::{SessionError, SessionStore, SessionView};

pub const LEADER_ID: &str = "leader";
pub const DEFAULT_MODEL_PLAYERS: usize = 2;

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("port {0} is already in use")]
    PortInUse(u16),
    #[error(transparent)]
    Store(#[from] SessionError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub struct AppState {
    board: Arc<Board>,
    provider: Arc<dyn SimilarityProvider>,
    store: SessionStore,
    default_words: WordList,
    games: Mutex<HashMap<String, Arc<Mutex<GameState>>>>,
    next_game: AtomicU64,
}

impl AppState {
    pub fn new(board: Board, provider: Arc<dyn SimilarityProvider>, store: SessionStore) -> Self {
        AppState {
            board: Arc::new(board),
            provider,
            store,
            default_words: WordList::reference(),
            games: Mutex::new(HashMap::new()),
            next_game: AtomicU64::new(1),
        }
    }

    pub fn with_default_words(mut self, words: WordList) -> Self {
        self.default_words = words;
        self
    }

    fn game(&self, id: &str) -> Result<Arc<Mutex<GameState>>, ApiError> {
        self.games
            .lock()
            .expect("games lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown game {id:?}")))
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match e {
            SessionError::NotFound(_) => StatusCode::NOT_FOUND,
            SessionError::Complete(_) | SessionError::WrongWord { .. } => StatusCode::CONFLICT,
            SessionError::Invalid(_) => StatusCode::BAD_REQUEST,
            SessionError::StoreUnwritable { .. } | SessionError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<GameError> for ApiError {
    fn from(e: GameError) -> Self {
        let status = match e {
            GameError::Provider(_) => StatusCode::BAD_GATEWAY,
            GameError::WrongPhase(_) | GameError::CellOccupied(_) | GameError::AlreadyPlaced(_) => StatusCode::CONFLICT,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellView {
    pub row: usize,
    pub col: usize,
    pub label: String,
    pub hex: String,
    pub x: f64,
    pub y: f64,
    #[serde(rename = "Y")]
    pub luminance: f64,
    pub gamut_clipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoardView {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<CellView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayView {
    pub id: String,
    pub phase: Phase,
    /// The API user is the leader, so the target is visible.
    pub target: CellPos,
    pub target_label: String,
    pub players: Vec<Player>,
    pub clues: Vec<Clue>,
    pub markers: Vec<Marker>,
    pub score: Option<ScoreSheet>,
}

impl PlayView {
    fn new(id: &str, g: &GameState) -> Self {
        PlayView {
            id: id.to_string(),
            phase: g.phase,
            target: g.target,
            target_label: g.target.label(),
            players: g.players.clone(),
            clues: g.clues.clone(),
            markers: g.markers.clone(),
            score: g.score.clone(),
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct CreateSession {
    pub subject: String,
    #[serde(default)]
    pub words: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
pub struct SubmitResponse {
    pub row: usize,
    pub col: usize,
    #[serde(default)]
    pub word: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
pub struct CreateGame {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub models: Option<usize>,
}

#[derive(Debug, Deserialize)]
pub struct SubmitClue {
    pub text: String,
}

async fn board(State(st): State<Arc<AppState>>) -> Json<BoardView> {
    let cells = st
        .board
        .cells()
        .iter()
        .map(|c| CellView {
            row: c.row,
            col: c.col,
            label: c.label(),
            hex: c.srgb.hex(),
            x: c.chroma.x,
            y: c.chroma.y,
            luminance: c.luminance,
            gamut_clipped: c.gamut_clipped,
        })
        .collect();
    Json(BoardView { rows: hues_core::colorlab::ROWS, cols: hues_core::colorlab::COLS, cells })
}

async fn create_session(
    State(st): State<Arc<AppState>>,
    Json(req): Json<CreateSession>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let words = match req.words {
        Some(w) => WordList::new(w).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?,
        None => st.default_words.clone(),
    };
    Ok((StatusCode::CREATED, Json(st.store.create(&req.subject, words)?)))
}

async fn session_current(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<SessionView>, ApiError> {
    Ok(Json(st.store.current(&id)?))
}

async fn session_response(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<SubmitResponse>,
) -> Result<Json<SessionView>, ApiError> {
    let pos = CellPos::new(req.row, req.col).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
    Ok(Json(st.store.respond(&id, pos, req.word.as_deref())?))
}

async fn create_game(
    State(st): State<Arc<AppState>>,
    body: Option<Json<CreateGame>>,
) -> Result<(StatusCode, Json<PlayView>), ApiError> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    let n = st.next_game.fetch_add(1, Ordering::Relaxed);
    let seed = req.seed.unwrap_or(n);
    let mut players = vec![PlayerSpec::human(LEADER_ID)];
    players.extend((1..=req.models.unwrap_or(DEFAULT_MODEL_PLAYERS)).map(|i| PlayerSpec::model(format!("model-{i}"))));
    let game = new_game(&players, LEADER_ID, seed, GameConfig::default())?;
    let id = format!("g{n}");
    let view = PlayView::new(&id, &game);
    st.games.lock().expect("games lock").insert(id, Arc::new(Mutex::new(game)));
    Ok((StatusCode::CREATED, Json(view)))
}

async fn game_clue(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<SubmitClue>,
) -> Result<Json<PlayView>, ApiError> {
    let game = st.game(&id)?;
    let app = st.clone();
    // Provider calls may block on the network.
    let view = tokio::task::spawn_blocking(move || -> Result<PlayView, ApiError> {
        let mut g = game.lock().expect("game lock");
        let mut next = g.clone();
        next.submit_clue(&req.text)?;
        next.play_model_round(&app.board, &app.provider, DEFAULT_TOP_K)?;
        if next.ready_to_score() {
            next.score_round()?;
        }
        *g = next;
        Ok(PlayView::new(&id, &g))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(view))
}

async fn game_state(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<PlayView>, ApiError> {
    let game = st.game(&id)?;
    let g = game.lock().expect("game lock");
    Ok(Json(PlayView::new(&id, &g)))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/board", get(board))
        .route("/api/session", post(create_session))
        .route("/api/session/{id}/current", get(session_current))
        .route("/api/session/{id}/response", post(session_response))
        .route("/api/play", post(create_game))
        .route("/api/play/{id}/clue", post(game_clue))
        .route("/api/play/{id}/state", get(game_state))
        .with_state(state)
}

/// Binds `addr`, mapping an occupied port to [`ServeError::PortInUse`].
pub async fn bind(addr: SocketAddr) -> Result<tokio::net::TcpListener, ServeError> {
    tokio::net::TcpListener::bind(addr).await.map_err(|e| match e.kind() {
        std::io::ErrorKind::AddrInUse => ServeError::PortInUse(addr.port()),
        _ => ServeError::Io(e),
    })
}

pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> Result<(), ServeError> {
    axum::serve(listener, router(Arc::new(state))).await?;
    Ok(())
}
