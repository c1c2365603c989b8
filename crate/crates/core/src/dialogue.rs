//! The clarification state machine.
//!
//! ```text
//!             confidence ≥ τ_direct ──────────────▶ DirectAnswer
//! message ──▶ τ_fallback ≤ confidence < τ_direct ─▶ ConfirmPrompt
//!             confidence < τ_fallback ────────────▶ FaqTopicList
//!
//! ConfirmPrompt ─ yes ─▶ Answer
//!               ─ no ──▶ SuggestionList (keyword candidates, best first)
//!                        or FaqTopicList when there are none
//! SuggestionList ─ pick ─▶ Answer
//!                ─ none of the above ─▶ FaqTopicList
//! FaqTopicList ─ topic ─▶ FaqIntentList ─ pick ─▶ Answer
//!                                       ─ back ─▶ FaqTopicList
//! ```
//!
//! A free-text message is accepted in every stage and starts over.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};

use serde::{Deserialize, Serialize};

use crate::corpus::{IntentId, TrainingCorpus};
use crate::keywords::{build_keyword_index, compute_tfidf, extract_keywords, KeywordIndex};
use crate::nlu::{IntentModel, Prediction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub tau_direct: f64,
    pub tau_fallback: f64,
    pub max_suggestions: usize,
    pub faq_topic_count: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            tau_direct: 0.75,
            tau_fallback: 0.3,
            max_suggestions: 6,
            faq_topic_count: 6,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let ok = self.tau_direct > 0.0
            && self.tau_direct <= 1.0
            && self.tau_fallback >= 0.0
            && self.tau_fallback < self.tau_direct;
        if !ok {
            return Err(EngineError::Thresholds {
                tau_direct: self.tau_direct,
                tau_fallback: self.tau_fallback,
            });
        }
        Ok(())
    }
}

/// First-turn branch for a top confidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Direct,
    Confirm,
    Faq,
}

/// `c ≥ τ_direct` answers directly, `τ_fallback ≤ c < τ_direct` asks for
/// confirmation, anything lower goes to the FAQ.
pub fn route(confidence: f64, config: &EngineConfig) -> Route {
    if confidence >= config.tau_direct {
        Route::Direct
    } else if confidence >= config.tau_fallback {
        Route::Confirm
    } else {
        Route::Faq
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("thresholds must satisfy 0 ≤ τ_fallback < τ_direct ≤ 1 (got {tau_fallback}, {tau_direct})")]
    Thresholds { tau_direct: f64, tau_fallback: f64 },
    #[error("model intent {0} has no canonical form or answer in the corpus")]
    MissingIntent(IntentId),
    #[error(transparent)]
    Keywords(#[from] crate::keywords::KeywordError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Idle,
    AwaitingConfirmation,
    AwaitingSuggestionChoice,
    FaqTopics,
    FaqIntents,
}

/// Kinds of user input, used to report what a stage accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplyKind {
    Text,
    Confirm,
    Choose,
    NoneOfTheAbove,
    FaqTopic,
    FaqIntent,
    Back,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum UserReply {
    Text { text: String },
    Confirm { yes: bool },
    Choose { index: usize },
    NoneOfTheAbove,
    FaqTopic { index: usize },
    FaqIntent { index: usize },
    Back,
}

impl UserReply {
    pub fn text(text: impl Into<String>) -> Self {
        Self::Text { text: text.into() }
    }

    pub fn kind(&self) -> ReplyKind {
        match self {
            Self::Text { .. } => ReplyKind::Text,
            Self::Confirm { .. } => ReplyKind::Confirm,
            Self::Choose { .. } => ReplyKind::Choose,
            Self::NoneOfTheAbove => ReplyKind::NoneOfTheAbove,
            Self::FaqTopic { .. } => ReplyKind::FaqTopic,
            Self::FaqIntent { .. } => ReplyKind::FaqIntent,
            Self::Back => ReplyKind::Back,
        }
    }
}

impl Stage {
    /// Replies this stage accepts. Free text is always accepted.
    pub fn accepts(self) -> &'static [ReplyKind] {
        use ReplyKind::*;
        match self {
            Stage::Idle => &[Text],
            Stage::AwaitingConfirmation => &[Text, Confirm],
            Stage::AwaitingSuggestionChoice => &[Text, Choose, NoneOfTheAbove],
            Stage::FaqTopics => &[Text, FaqTopic, Back],
            Stage::FaqIntents => &[Text, FaqIntent, Back],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error("{got:?} is not accepted in stage {stage:?} (expected one of {expected:?})")]
    UnexpectedReply {
        stage: Stage,
        got: ReplyKind,
        expected: Vec<ReplyKind>,
    },
    #[error("option {index} is out of range ({len} offered)")]
    OutOfRange { index: usize, len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    DirectAnswer,
    ConfirmPrompt,
    SuggestionList,
    FaqTopicList,
    FaqIntentList,
    Answer,
    NoSuggestionsFallback,
}

/// What the bot says. `options` are the texts the user can pick from and
/// `intents` the intents behind them (for a confirmation prompt, the single
/// intent being confirmed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BotAction {
    pub kind: ActionKind,
    pub text: String,
    pub options: Vec<String>,
    pub intents: Vec<IntentId>,
    pub resolved_intent: Option<IntentId>,
}

impl BotAction {
    /// True for actions that end a question with an answer.
    pub fn is_answer(&self) -> bool {
        matches!(self.kind, ActionKind::DirectAnswer | ActionKind::Answer)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "actor", rename_all = "snake_case")]
pub enum TranscriptEntry {
    User { at: u64, reply: UserReply },
    Bot { at: u64, action: BotAction },
}

/// Per-conversation state. Only the [`Engine`] mutates it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Session {
    id: String,
    stage: Stage,
    pending_intent: Option<IntentId>,
    offered: Vec<IntentId>,
    query: Option<String>,
    last_prediction: Option<Prediction>,
    transcript: Vec<TranscriptEntry>,
}

impl Session {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            stage: Stage::Idle,
            pending_intent: None,
            offered: Vec::new(),
            query: None,
            last_prediction: None,
            transcript: Vec::new(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn pending_intent(&self) -> Option<&IntentId> {
        self.pending_intent.as_ref()
    }

    pub fn offered(&self) -> &[IntentId] {
        &self.offered
    }

    /// The free-text question currently being clarified.
    pub fn query(&self) -> Option<&str> {
        self.query.as_deref()
    }

    pub fn last_prediction(&self) -> Option<&Prediction> {
        self.last_prediction.as_ref()
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    fn enter(&mut self, stage: Stage, pending: Option<IntentId>, offered: Vec<IntentId>) {
        self.stage = stage;
        self.pending_intent = pending;
        self.offered = offered;
    }
}

/// The `n` index terms linked to the most intents, ties alphabetical.
pub fn faq_topics(index: &KeywordIndex, n: usize) -> Vec<String> {
    let mut terms: Vec<(&String, usize)> = index.terms().map(|(t, i)| (t, i.len())).collect();
    terms.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    terms.into_iter().take(n).map(|(t, _)| t.clone()).collect()
}

/// Model, corpus, keyword index and thresholds, shared read-only by any
/// number of sessions.
#[derive(Debug, Clone)]
pub struct Engine {
    model: IntentModel,
    corpus: TrainingCorpus,
    index: KeywordIndex,
    config: EngineConfig,
    topics: Vec<String>,
}

/// Keywords kept per intent when building an index from a corpus.
pub const KEYWORDS_PER_INTENT: usize = 5;

impl Engine {
    pub fn new(
        model: IntentModel,
        corpus: TrainingCorpus,
        index: KeywordIndex,
        config: EngineConfig,
    ) -> Result<Self, EngineError> {
        config.validate()?;
        if let Some(missing) = model
            .intents()
            .iter()
            .find(|i| corpus.canonical_form(i).is_none() || corpus.answer(i).is_none())
        {
            return Err(EngineError::MissingIntent(missing.clone()));
        }
        let topics = faq_topics(&index, config.faq_topic_count);
        Ok(Self {
            model,
            corpus,
            index,
            config,
            topics,
        })
    }

    /// Builds the keyword index from the corpus (top five TF-IDF terms per
    /// intent) and assembles an engine.
    pub fn from_corpus(
        model: IntentModel,
        corpus: TrainingCorpus,
        config: EngineConfig,
    ) -> Result<Self, EngineError> {
        let keywords = extract_keywords(&compute_tfidf(&corpus)?, KEYWORDS_PER_INTENT);
        let index = build_keyword_index(&keywords, &corpus);
        Self::new(model, corpus, index, config)
    }

    pub fn model(&self) -> &IntentModel {
        &self.model
    }

    pub fn corpus(&self) -> &TrainingCorpus {
        &self.corpus
    }

    pub fn index(&self) -> &KeywordIndex {
        &self.index
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn topics(&self) -> &[String] {
        &self.topics
    }

    /// Intents under a FAQ topic: most training examples first, ties by name.
    pub fn topic_intents(&self, topic: &str) -> Vec<IntentId> {
        let mut intents: Vec<IntentId> = self
            .index
            .intents_of(topic)
            .map(|set| set.iter().cloned().collect())
            .unwrap_or_default();
        intents.sort_by_cached_key(|i| (core::cmp::Reverse(self.corpus.train_count(i)), i.clone()));
        intents
    }

    /// Applies one user turn, `at` being the caller's clock (e.g. epoch
    /// milliseconds). A rejected reply leaves the session untouched.
    pub fn handle(
        &self,
        session: &mut Session,
        reply: UserReply,
        at: u64,
    ) -> Result<BotAction, ProtocolError> {
        let action = match &reply {
            UserReply::Text { text } => self.handle_message(session, text),
            UserReply::Confirm { yes } => self.handle_confirmation(session, *yes)?,
            UserReply::Choose { index } => self.handle_suggestion_choice(session, Some(*index))?,
            UserReply::NoneOfTheAbove => self.handle_suggestion_choice(session, None)?,
            UserReply::FaqTopic { .. } | UserReply::FaqIntent { .. } | UserReply::Back => {
                self.handle_faq_navigation(session, &reply)?
            }
        };
        session.transcript.push(TranscriptEntry::User { at, reply });
        session.transcript.push(TranscriptEntry::Bot {
            at,
            action: action.clone(),
        });
        Ok(action)
    }

    fn handle_message(&self, session: &mut Session, text: &str) -> BotAction {
        session.enter(Stage::Idle, None, Vec::new());
        let prediction = self.model.predict(text);
        let top = prediction.top().clone();
        session.query = Some(text.to_string());
        session.last_prediction = Some(prediction);

        match route(top.confidence, &self.config) {
            Route::Direct => self.answer(ActionKind::DirectAnswer, &top.intent),
            Route::Confirm => {
                let form = self.canonical(&top.intent).clone();
                session.enter(Stage::AwaitingConfirmation, Some(top.intent.clone()), Vec::new());
                BotAction {
                    kind: ActionKind::ConfirmPrompt,
                    text: form,
                    options: vec!["Yes".into(), "No".into()],
                    intents: vec![top.intent],
                    resolved_intent: None,
                }
            }
            Route::Faq => self.enter_faq(session),
        }
    }

    fn handle_confirmation(&self, session: &mut Session, yes: bool) -> Result<BotAction, ProtocolError> {
        expect_stage(session, ReplyKind::Confirm)?;
        let pending = session
            .pending_intent
            .clone()
            .expect("confirmation stage always has a pending intent");
        if yes {
            session.enter(Stage::Idle, None, Vec::new());
            return Ok(self.answer(ActionKind::Answer, &pending));
        }
        let exclude: BTreeSet<IntentId> = [pending].into_iter().collect();
        let suggestions = match (&session.last_prediction, &session.query) {
            (Some(prediction), Some(query)) => self.index.suggest_with_prediction(
                prediction,
                query,
                &exclude,
                self.config.max_suggestions,
            ),
            _ => Vec::new(),
        };
        if suggestions.is_empty() {
            return Ok(self.enter_faq(session));
        }
        let intents: Vec<IntentId> = suggestions.into_iter().map(|s| s.intent).collect();
        let options = intents.iter().map(|i| self.canonical(i).clone()).collect();
        session.enter(Stage::AwaitingSuggestionChoice, None, intents.clone());
        Ok(BotAction {
            kind: ActionKind::SuggestionList,
            text: "Did you mean one of these?".into(),
            options,
            intents,
            resolved_intent: None,
        })
    }

    fn handle_suggestion_choice(
        &self,
        session: &mut Session,
        choice: Option<usize>,
    ) -> Result<BotAction, ProtocolError> {
        let kind = match choice {
            Some(_) => ReplyKind::Choose,
            None => ReplyKind::NoneOfTheAbove,
        };
        expect_stage(session, kind)?;
        match choice {
            Some(index) => {
                let intent = pick(&session.offered, index)?;
                session.enter(Stage::Idle, None, Vec::new());
                Ok(self.answer(ActionKind::Answer, &intent))
            }
            None => Ok(self.enter_faq(session)),
        }
    }

    fn handle_faq_navigation(
        &self,
        session: &mut Session,
        reply: &UserReply,
    ) -> Result<BotAction, ProtocolError> {
        expect_stage(session, reply.kind())?;
        match *reply {
            UserReply::FaqTopic { index } => {
                let topic = self
                    .topics
                    .get(index)
                    .ok_or(ProtocolError::OutOfRange {
                        index,
                        len: self.topics.len(),
                    })?;
                let intents = self.topic_intents(topic);
                let options = intents.iter().map(|i| self.canonical(i).clone()).collect();
                session.enter(Stage::FaqIntents, None, intents.clone());
                Ok(BotAction {
                    kind: ActionKind::FaqIntentList,
                    text: format!("Questions about {topic}:"),
                    options,
                    intents,
                    resolved_intent: None,
                })
            }
            UserReply::FaqIntent { index } => {
                let intent = pick(&session.offered, index)?;
                session.enter(Stage::Idle, None, Vec::new());
                Ok(self.answer(ActionKind::Answer, &intent))
            }
            _ => Ok(self.enter_faq(session)),
        }
    }

    /// FAQ topic menu, or a plain apology when there are no topics at all.
    fn enter_faq(&self, session: &mut Session) -> BotAction {
        if self.topics.is_empty() {
            session.enter(Stage::Idle, None, Vec::new());
            return BotAction {
                kind: ActionKind::NoSuggestionsFallback,
                text: "Sorry, I could not find an answer to your question.".into(),
                options: Vec::new(),
                intents: Vec::new(),
                resolved_intent: None,
            };
        }
        session.enter(Stage::FaqTopics, None, Vec::new());
        BotAction {
            kind: ActionKind::FaqTopicList,
            text: "Here are some frequently asked topics:".into(),
            options: self.topics.clone(),
            intents: Vec::new(),
            resolved_intent: None,
        }
    }

    fn answer(&self, kind: ActionKind, intent: &IntentId) -> BotAction {
        BotAction {
            kind,
            text: self
                .corpus
                .answer(intent)
                .expect("engine intents have answers")
                .to_string(),
            options: Vec::new(),
            intents: Vec::new(),
            resolved_intent: Some(intent.clone()),
        }
    }

    fn canonical(&self, intent: &IntentId) -> &String {
        &self
            .corpus
            .canonical_form(intent)
            .expect("engine intents have canonical forms")
            .text
    }

    /// Feeds the user turns of a transcript to a fresh session and returns
    /// the bot's actions.
    pub fn replay(&self, transcript: &[TranscriptEntry]) -> Result<Vec<BotAction>, ProtocolError> {
        let mut session = Session::new("replay");
        transcript
            .iter()
            .filter_map(|entry| match entry {
                TranscriptEntry::User { at, reply } => Some((*at, reply.clone())),
                TranscriptEntry::Bot { .. } => None,
            })
            .map(|(at, reply)| self.handle(&mut session, reply, at))
            .collect()
    }
}

fn expect_stage(session: &Session, got: ReplyKind) -> Result<(), ProtocolError> {
    let expected = session.stage.accepts();
    if expected.contains(&got) {
        Ok(())
    } else {
        Err(ProtocolError::UnexpectedReply {
            stage: session.stage,
            got,
            expected: expected.to_vec(),
        })
    }
}

fn pick(offered: &[IntentId], index: usize) -> Result<IntentId, ProtocolError> {
    offered.get(index).cloned().ok_or(ProtocolError::OutOfRange {
        index,
        len: offered.len(),
    })
}
