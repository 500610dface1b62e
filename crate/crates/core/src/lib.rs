//! Toolkit for commonsense story-rule corpora.
//!
//! * [`model`] parses annotated records (five-sentence story, selected
//!   sentence X, causal dimension, specific and general rules).
//! * [`tasks`] renders them into the original task and its diagnostic variants.
//! * [`cis2`] turns rules into sentence-selection labels `<s_a> REL <s_b>`.
//! * [`similarity`] supplies the sentence-matching backends.
//! * [`metrics`] scores generations (per-dimension BLEU) and labels (exact match).
//!
//! Batch operations run on rayon when the `parallel` feature is on and
//! always return results in input order.

pub mod cis2;
pub mod config;
pub mod error;
pub mod io;
pub mod metrics;
pub mod model;
pub mod parallel;
pub mod similarity;
pub mod synth;
pub mod tasks;
pub mod text;

pub use cis2::{Cis2Label, ConversionResult, Converter};
pub use error::{Error, Result};
pub use model::{Dimension, RelationToken, SpecificRule, StoryEntry};
pub use similarity::SimilarityBackend;
pub use tasks::{TaskBuilder, TaskKind, TaskSample};
