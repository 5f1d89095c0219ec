//! HTTP/JSON client for a remote scoring server.
//!
//! `POST /score` carries all 480 colors and returns one score per id;
//! `GET /health` reports the loaded model.

use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{ProviderError, SimilarityProvider};
use crate::colorlab::{Board, CELL_COUNT};

const RETRIES: u32 = 2;
const BACKOFF_BASE: Duration = Duration::from_millis(100);
const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorEntry {
    pub id: usize,
    pub srgb_hex: String,
    pub x: f64,
    pub y: f64,
    #[serde(rename = "Y")]
    pub luminance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub word: String,
    pub template: Option<String>,
    pub colors: Vec<ColorEntry>,
}

impl ScoreRequest {
    pub fn new(word: &str, template: Option<&str>, board: &Board) -> Self {
        let colors = board
            .cells()
            .iter()
            .map(|c| ColorEntry {
                id: c.pos().index(),
                srgb_hex: c.srgb.hex(),
                x: c.chroma.x,
                y: c.chroma.y,
                luminance: c.luminance,
            })
            .collect();
        ScoreRequest { word: word.to_string(), template: template.map(str::to_string), colors }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub id: usize,
    /// `None` when the server sent `null`, `NaN` or an infinity. The key
    /// itself is required.
    #[serde(deserialize_with = "Option::deserialize")]
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReply {
    pub scores: Vec<ScoreEntry>,
}

impl ScoreReply {
    /// Parses a reply body. Bare `NaN`/`Infinity` tokens, which some JSON
    /// encoders emit, are read as non-finite scores instead of failing the
    /// whole parse.
    pub fn parse(body: &str) -> Result<Self, ProviderError> {
        serde_json::from_str(&nonfinite_to_null(body)).map_err(|e| ProviderError::ProtocolViolation(e.to_string()))
    }

    /// Scores in linear cell order.
    pub fn into_scores(self) -> Result<Vec<f64>, ProviderError> {
        if self.scores.len() != CELL_COUNT {
            return Err(ProviderError::failure(format!("expected {CELL_COUNT} scores, got {}", self.scores.len())));
        }
        let mut out = vec![None; CELL_COUNT];
        for entry in self.scores {
            let slot = out
                .get_mut(entry.id)
                .ok_or_else(|| ProviderError::ProtocolViolation(format!("score id {} out of range", entry.id)))?;
            if slot.is_some() {
                return Err(ProviderError::ProtocolViolation(format!("duplicate score id {}", entry.id)));
            }
            match entry.score {
                Some(s) if s.is_finite() => *slot = Some(s),
                _ => return Err(ProviderError::NonFiniteScore { id: entry.id }),
            }
        }
        // 480 entries, none duplicated, all in range: every slot is filled.
        Ok(out.into_iter().map(|s| s.expect("filled")).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthReply {
    pub status: String,
    pub model: String,
}

/// Replaces bare NaN / Infinity / -Infinity tokens outside strings with `null`.
fn nonfinite_to_null(body: &str) -> String {
    let mut out = String::with_capacity(body.len());
    let mut in_string = false;
    let mut escaped = false;
    let mut rest = body;
    while let Some(ch) = rest.chars().next() {
        if in_string {
            if escaped {
                escaped = false;
            } else if ch == '\\' {
                escaped = true;
            } else if ch == '"' {
                in_string = false;
            }
        } else if ch == '"' {
            in_string = true;
        } else if let Some(tok) = ["-Infinity", "Infinity", "NaN"].iter().find(|t| rest.starts_with(**t)) {
            out.push_str("null");
            rest = &rest[tok.len()..];
            continue;
        }
        out.push(ch);
        rest = &rest[ch.len_utf8()..];
    }
    out
}

#[derive(Debug, Clone)]
pub struct RemoteProvider {
    base_url: String,
    template: Option<String>,
    client: reqwest::blocking::Client,
    backoff: Duration,
}

enum Attempt<T> {
    Done(T),
    Retry(String),
}

impl RemoteProvider {
    pub fn new(base_url: &str) -> Result<Self, ProviderError> {
        Self::with_timeout(base_url, DEFAULT_TIMEOUT)
    }

    pub fn with_timeout(base_url: &str, timeout: Duration) -> Result<Self, ProviderError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ProviderError::Config(e.to_string()))?;
        Ok(RemoteProvider {
            base_url: base_url.trim_end_matches('/').to_string(),
            template: None,
            client,
            backoff: BACKOFF_BASE,
        })
    }

    pub fn with_template(mut self, template: Option<String>) -> Self {
        self.template = template;
        self
    }

    pub fn with_backoff(mut self, base: Duration) -> Self {
        self.backoff = base;
        self
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    pub fn health(&self) -> Result<HealthReply, ProviderError> {
        let url = format!("{}/health", self.base_url);
        let body = self.with_retries(|| match self.client.get(&url).send() {
            Err(e) => Ok(Attempt::Retry(e.to_string())),
            Ok(resp) => Self::read_body(resp),
        })?;
        serde_json::from_str(&body).map_err(|e| ProviderError::ProtocolViolation(format!("health: {e}")))
    }

    /// One request/response cycle with bounded retries on transport errors
    /// and 5xx replies.
    pub fn request(&self, req: &ScoreRequest) -> Result<ScoreReply, ProviderError> {
        let url = format!("{}/score", self.base_url);
        let body = self.with_retries(|| match self.client.post(&url).json(req).send() {
            Err(e) => Ok(Attempt::Retry(e.to_string())),
            Ok(resp) => Self::read_body(resp),
        })?;
        ScoreReply::parse(&body)
    }

    fn read_body(resp: reqwest::blocking::Response) -> Result<Attempt<String>, ProviderError> {
        let status = resp.status();
        if status.is_server_error() {
            return Ok(Attempt::Retry(format!("server returned {status}")));
        }
        if !status.is_success() {
            let text = resp.text().unwrap_or_default();
            return Err(ProviderError::failure(format!("server returned {status}: {}", text.trim())));
        }
        resp.text().map(Attempt::Done).map_err(|e| ProviderError::failure(e.to_string()))
    }

    fn with_retries<T>(&self, mut f: impl FnMut() -> Result<Attempt<T>, ProviderError>) -> Result<T, ProviderError> {
        let mut last = String::new();
        for attempt in 0..=RETRIES {
            if attempt > 0 {
                thread::sleep(self.backoff * 2u32.pow(attempt - 1));
            }
            match f()? {
                Attempt::Done(v) => return Ok(v),
                Attempt::Retry(reason) => last = reason,
            }
        }
        Err(ProviderError::Failure { attempts: RETRIES + 1, reason: last })
    }
}

impl SimilarityProvider for RemoteProvider {
    fn raw_scores(&self, word: &str, board: &Board) -> Result<Vec<f64>, ProviderError> {
        let req = ScoreRequest::new(word, self.template.as_deref(), board);
        self.request(&req)?.into_scores()
    }

    fn describe(&self) -> String {
        format!("remote {}", self.base_url)
    }
}
