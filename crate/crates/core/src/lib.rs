//! Core of the Hues & Cues alignment harness.
//!
//! - [`colorlab`]: board measurements, xyY → sRGB, flat stimuli
//! - [`game`]: the turn-based rules engine and round scoring
//! - [`stats`]: Hotelling T², F survival, verdicts, permutation test
//! - [`providers`]: similarity-model abstraction, mock and HTTP clients
//! - [`harness`]: human data ingestion, per-word evaluation, reports, diagram export

pub mod colorlab;
pub mod exec;
pub mod game;
pub mod harness;
pub mod providers;
pub mod stats;
