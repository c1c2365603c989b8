//! Multi-stage clarification engine for question-answering dialogue systems.
//!
//! A query is answered directly when the intent classifier is confident;
//! otherwise the user is asked to confirm the predicted intent, then offered
//! keyword-linked suggestions ranked by classifier confidence, and finally
//! a query-independent FAQ menu.
//!
//! The crate is `no_std` and only needs an allocator. File formats, the HTTP
//! service and the command line live in the `clarify` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod dialogue;
pub mod eval;
pub mod keywords;
pub mod nlu;
pub(crate) mod text;

pub use corpus::{CanonicalForm, CorpusError, Example, IntentId, Split, TrainingCorpus};
pub use dialogue::{
    ActionKind, BotAction, Engine, EngineConfig, ProtocolError, Route, Session, Stage, UserReply,
};
pub use eval::{EvalReport, EpisodeOutcome, TerminalStage, Verdict};
pub use keywords::{KeywordIndex, TfidfTable};
pub use nlu::{FeatureVector, Hyperparams, IntentModel, Prediction};
