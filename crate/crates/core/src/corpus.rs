//! Intent corpora: labeled utterances, canonical formulations, answers and
//! the train/validation/test split protocol.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("corpus contains no in-scope records")]
    Empty,
    #[error("invalid intent name {0:?}")]
    InvalidIntent(String),
    #[error("record {index}: utterance is empty")]
    EmptyUtterance { index: usize },
    #[error("intent {0} has no training examples")]
    NoTrainExamples(IntentId),
    #[error("unknown intent {0}")]
    UnknownIntent(IntentId),
    #[error("canonical form for {intent} is not a single non-empty sentence: {text:?}")]
    InvalidCanonicalForm { intent: IntentId, text: String },
    #[error("corpus has {available} intents, split needs {requested}")]
    TooFewIntents { requested: usize, available: usize },
    #[error("intent {intent} has {available} evaluation formulations, split needs {requested}")]
    InsufficientFormulations {
        intent: IntentId,
        requested: usize,
        available: usize,
    },
}

/// Name of an intent, e.g. `transfer` or `oil_change_how`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct IntentId(String);

impl IntentId {
    pub fn new(name: impl Into<String>) -> Result<Self, CorpusError> {
        let name = name.into();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(CorpusError::InvalidIntent(name));
        }
        Ok(Self(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The name with underscores read as spaces.
    pub fn human_readable(&self) -> String {
        self.0.replace('_', " ")
    }
}

impl TryFrom<String> for IntentId {
    type Error = CorpusError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<IntentId> for String {
    fn from(id: IntentId) -> Self {
        id.0
    }
}

impl fmt::Display for IntentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Validation,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub text: String,
    pub intent: IntentId,
    pub split: Split,
}

/// The one-sentence description of an intent shown during clarification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub intent: IntentId,
    pub text: String,
}

impl CanonicalForm {
    /// Template form used when no hand-written sentence exists.
    pub fn generate(intent: &IntentId) -> Self {
        Self {
            intent: intent.clone(),
            text: format!(
                "I understand that you want to talk about {}, is that correct?",
                intent.human_readable()
            ),
        }
    }

    /// A hand-written form, checked to be one non-empty sentence.
    pub fn custom(intent: IntentId, text: impl Into<String>) -> Result<Self, CorpusError> {
        let text = text.into().trim().to_owned();
        if !is_single_sentence(&text) {
            return Err(CorpusError::InvalidCanonicalForm { intent, text });
        }
        Ok(Self { intent, text })
    }
}

/// Non-empty, and no sentence terminator is followed by further text.
fn is_single_sentence(text: &str) -> bool {
    if text.trim().is_empty() {
        return false;
    }
    let chars: Vec<char> = text.chars().collect();
    for (i, c) in chars.iter().enumerate() {
        if matches!(c, '.' | '?' | '!') {
            let rest = &chars[i + 1..];
            let boundary = rest.first().is_some_and(|c| c.is_whitespace());
            if boundary && rest.iter().any(|c| !c.is_whitespace()) {
                return false;
            }
        }
    }
    true
}

/// One labeled utterance as it appears in a source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    pub text: String,
    pub label: String,
    pub split: Split,
}

impl RawRecord {
    pub fn new(text: impl Into<String>, label: impl Into<String>, split: Split) -> Self {
        Self {
            text: text.into(),
            label: label.into(),
            split,
        }
    }
}

/// Intents, their labeled examples, canonical forms and answers.
///
/// Intent order is the order of first appearance in the source records and
/// is what "the first n intents" refers to in [`TrainingCorpus::apply_evaluation_split`].
/// The corpus is immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingCorpus {
    intents: Vec<IntentId>,
    examples: Vec<Example>,
    canonical_forms: BTreeMap<IntentId, CanonicalForm>,
    answers: BTreeMap<IntentId, String>,
}

impl TrainingCorpus {
    /// Builds a corpus from labeled records, in record order.
    ///
    /// Utterances are trimmed. A (text, intent) pair is kept once: training
    /// occurrences win over evaluation ones, otherwise the first occurrence
    /// wins, so the splits are disjoint.
    pub fn from_records(
        records: impl IntoIterator<Item = RawRecord>,
    ) -> Result<Self, CorpusError> {
        let mut intents: Vec<IntentId> = Vec::new();
        let mut known: BTreeSet<IntentId> = BTreeSet::new();
        let mut parsed = Vec::new();
        for (index, record) in records.into_iter().enumerate() {
            let text = record.text.trim();
            if text.is_empty() {
                return Err(CorpusError::EmptyUtterance { index });
            }
            let intent = IntentId::new(record.label)?;
            if known.insert(intent.clone()) {
                intents.push(intent.clone());
            }
            parsed.push(Example {
                text: text.to_owned(),
                intent,
                split: record.split,
            });
        }
        if parsed.is_empty() {
            return Err(CorpusError::Empty);
        }

        // Training records claim their pairs first; any later repeat of a
        // pair, in any split, is dropped.
        let mut seen: BTreeSet<(String, IntentId)> = BTreeSet::new();
        let (train, eval): (Vec<Example>, Vec<Example>) =
            parsed.into_iter().partition(|e| e.split == Split::Train);
        let examples: Vec<Example> = train
            .into_iter()
            .chain(eval)
            .filter(|e| seen.insert((e.text.clone(), e.intent.clone())))
            .collect();

        for intent in &intents {
            if !examples
                .iter()
                .any(|e| e.split == Split::Train && &e.intent == intent)
            {
                return Err(CorpusError::NoTrainExamples(intent.clone()));
            }
        }

        let canonical_forms = intents
            .iter()
            .map(|i| (i.clone(), CanonicalForm::generate(i)))
            .collect();
        let answers = intents
            .iter()
            .map(|i| (i.clone(), format!("ANSWER({i})")))
            .collect();
        Ok(Self {
            intents,
            examples,
            canonical_forms,
            answers,
        })
    }

    /// Replaces template canonical forms with hand-written ones.
    pub fn with_canonical_overrides(
        mut self,
        overrides: impl IntoIterator<Item = CanonicalForm>,
    ) -> Result<Self, CorpusError> {
        for form in overrides {
            if !self.canonical_forms.contains_key(&form.intent) {
                return Err(CorpusError::UnknownIntent(form.intent));
            }
            let form = CanonicalForm::custom(form.intent, form.text)?;
            self.canonical_forms.insert(form.intent.clone(), form);
        }
        Ok(self)
    }

    /// Splits the evaluation formulations into test and validation sets.
    ///
    /// For each of the first `n_intents` intents, its first `n_test`
    /// evaluation formulations (the examples tagged [`Split::Test`], in
    /// order) stay test and the next `n_val` become validation. Every other
    /// non-training example is removed; all training examples are kept.
    pub fn apply_evaluation_split(
        &self,
        n_intents: usize,
        n_test: usize,
        n_val: usize,
    ) -> Result<Self, CorpusError> {
        if n_intents > self.intents.len() {
            return Err(CorpusError::TooFewIntents {
                requested: n_intents,
                available: self.intents.len(),
            });
        }
        let selected = &self.intents[..n_intents];
        let mut tags: BTreeMap<usize, Split> = BTreeMap::new();
        for intent in selected {
            let pool: Vec<usize> = self
                .examples
                .iter()
                .enumerate()
                .filter(|(_, e)| e.split == Split::Test && &e.intent == intent)
                .map(|(i, _)| i)
                .collect();
            if pool.len() < n_test + n_val {
                return Err(CorpusError::InsufficientFormulations {
                    intent: intent.clone(),
                    requested: n_test + n_val,
                    available: pool.len(),
                });
            }
            for (rank, &i) in pool.iter().take(n_test + n_val).enumerate() {
                let split = if rank < n_test {
                    Split::Test
                } else {
                    Split::Validation
                };
                tags.insert(i, split);
            }
        }
        let examples = self
            .examples
            .iter()
            .enumerate()
            .filter_map(|(i, e)| match e.split {
                Split::Train => Some(e.clone()),
                _ => tags.get(&i).map(|&split| Example {
                    split,
                    ..e.clone()
                }),
            })
            .collect();
        Ok(Self {
            examples,
            ..self.clone()
        })
    }

    pub fn intents(&self) -> &[IntentId] {
        &self.intents
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &Example> {
        self.examples.iter().filter(move |e| e.split == split)
    }

    pub fn count(&self, split: Split) -> usize {
        self.split(split).count()
    }

    pub fn train_count(&self, intent: &IntentId) -> usize {
        self.split(Split::Train)
            .filter(|e| &e.intent == intent)
            .count()
    }

    pub fn contains(&self, intent: &IntentId) -> bool {
        self.canonical_forms.contains_key(intent)
    }

    pub fn canonical_form(&self, intent: &IntentId) -> Option<&CanonicalForm> {
        self.canonical_forms.get(intent)
    }

    pub fn canonical_forms(&self) -> impl Iterator<Item = &CanonicalForm> {
        self.intents.iter().map(|i| &self.canonical_forms[i])
    }

    pub fn answer(&self, intent: &IntentId) -> Option<&str> {
        self.answers.get(intent).map(String::as_str)
    }

    /// FNV-1a over intents and training examples; identifies the data a
    /// model was trained on.
    pub fn fingerprint(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut hash = OFFSET;
        let mut feed = |bytes: &[u8]| {
            for &b in bytes.iter().chain(&[0xff]) {
                hash ^= u64::from(b);
                hash = hash.wrapping_mul(PRIME);
            }
        };
        for intent in &self.intents {
            feed(intent.as_str().as_bytes());
        }
        for e in self.split(Split::Train) {
            feed(e.intent.as_str().as_bytes());
            feed(e.text.as_bytes());
        }
        hash
    }
}
