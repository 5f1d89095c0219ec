//! File-backed collection sessions.
//!
//! Each session is two files in the store directory: `<id>.session.json`
//! (subject and word list, written once) and `<id>.jsonl`, an append-only
//! log of human-response records that `hues eval --humans` reads directly.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use hues_core::colorlab::CellPos;
use hues_core::harness::{HumanRecord, WordList};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("session store {path} is not writable: {source}")]
    StoreUnwritable { path: PathBuf, source: std::io::Error },
    #[error("unknown session {0:?}")]
    NotFound(String),
    #[error("session {0:?} is already complete")]
    Complete(String),
    #[error("response is for {got:?} but the current word is {expected:?}")]
    WrongWord { expected: String, got: String },
    #[error("invalid session: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SessionMeta {
    id: String,
    subject: String,
    words: WordList,
}

#[derive(Debug)]
struct Session {
    meta: SessionMeta,
    answered: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub subject: String,
    pub current_word: Option<String>,
    pub answered: usize,
    pub total: usize,
    pub done: bool,
}

impl Session {
    fn view(&self) -> SessionView {
        let words = self.meta.words.words();
        SessionView {
            id: self.meta.id.clone(),
            subject: self.meta.subject.clone(),
            current_word: words.get(self.answered).cloned(),
            answered: self.answered,
            total: words.len(),
            done: self.answered >= words.len(),
        }
    }
}

#[derive(Debug)]
pub struct SessionStore {
    dir: PathBuf,
    sessions: Mutex<HashMap<String, Session>>,
}

impl SessionStore {
    /// Opens (creating if needed) a store directory and resumes any
    /// sessions already in it.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, SessionError> {
        let dir = dir.as_ref().to_path_buf();
        let unwritable = |source| SessionError::StoreUnwritable { path: dir.clone(), source };
        fs::create_dir_all(&dir).map_err(unwritable)?;
        let probe = dir.join(".write-probe");
        File::create(&probe).and_then(|_| fs::remove_file(&probe)).map_err(unwritable)?;

        let mut sessions = HashMap::new();
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
            if !name.ends_with(".session.json") {
                continue;
            }
            let meta: SessionMeta = serde_json::from_reader(File::open(&path)?)
                .map_err(|e| SessionError::Invalid(format!("{}: {e}", path.display())))?;
            let log = dir.join(format!("{}.jsonl", meta.id));
            let answered = match File::open(&log) {
                Ok(f) => BufReader::new(f).lines().filter(|l| l.as_ref().is_ok_and(|l| !l.trim().is_empty())).count(),
                Err(_) => 0,
            };
            sessions.insert(meta.id.clone(), Session { meta, answered });
        }
        Ok(SessionStore { dir, sessions: Mutex::new(sessions) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn create(&self, subject: &str, words: WordList) -> Result<SessionView, SessionError> {
        let subject = subject.trim();
        if subject.is_empty() {
            return Err(SessionError::Invalid("subject id must not be empty".into()));
        }
        let id = uuid::Uuid::new_v4().simple().to_string();
        let meta = SessionMeta { id: id.clone(), subject: subject.to_string(), words };
        let mut f = File::create(self.dir.join(format!("{id}.session.json")))?;
        serde_json::to_writer_pretty(&mut f, &meta).map_err(std::io::Error::other)?;
        File::create(self.dir.join(format!("{id}.jsonl")))?;
        let session = Session { meta, answered: 0 };
        let view = session.view();
        self.sessions.lock().expect("session lock").insert(id, session);
        Ok(view)
    }

    pub fn current(&self, id: &str) -> Result<SessionView, SessionError> {
        let sessions = self.sessions.lock().expect("session lock");
        sessions.get(id).map(Session::view).ok_or_else(|| SessionError::NotFound(id.to_string()))
    }

    /// Appends the answer for the current word and advances.
    pub fn respond(&self, id: &str, pos: CellPos, word: Option<&str>) -> Result<SessionView, SessionError> {
        let mut sessions = self.sessions.lock().expect("session lock");
        let session = sessions.get_mut(id).ok_or_else(|| SessionError::NotFound(id.to_string()))?;
        let current = session.view().current_word.ok_or_else(|| SessionError::Complete(id.to_string()))?;
        if let Some(w) = word {
            if w.trim().to_uppercase() != current {
                return Err(SessionError::WrongWord { expected: current, got: w.to_string() });
            }
        }
        let record = HumanRecord { subject: session.meta.subject.clone(), word: current, row: pos.row, col: pos.col };
        let mut log = OpenOptions::new().append(true).create(true).open(self.dir.join(format!("{id}.jsonl")))?;
        writeln!(log, "{}", serde_json::to_string(&record).expect("record serializes"))?;
        log.flush()?;
        session.answered += 1;
        Ok(session.view())
    }
}
