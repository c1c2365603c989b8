//! Loader for the in-scope/out-of-scope intent dataset (`data_full.json`
//! and its variants) and for canonical-form sidecar files.
//!
//! The dataset is one JSON object whose values are arrays of
//! `[utterance, intent]` pairs, keyed by split: `train`, `val`, `test`, plus
//! `oos_*` arrays holding out-of-scope queries, which are skipped.

use std::fs;
use std::path::{Path, PathBuf};

use clarify_core::corpus::{CanonicalForm, IntentId, RawRecord, Split, TrainingCorpus};
use clarify_core::CorpusError;
use serde_json::Value;

/// Intent label the dataset uses for out-of-scope queries.
pub const OUT_OF_SCOPE_LABEL: &str = "oos";

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path} is not valid JSON: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("expected a JSON object of splits at the top level")]
    NotAnObject,
    #[error("split {split:?} is not an array")]
    SplitNotArray { split: String },
    #[error("split {split:?}, record {index}: expected [utterance, intent], got {record}")]
    BadRecord {
        split: String,
        index: usize,
        record: String,
    },
    #[error("sidecar line {line}: expected \"intent<TAB>sentence\", got {content:?}")]
    BadSidecarLine { line: usize, content: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

fn split_for_key(key: &str) -> Option<Split> {
    match key {
        "train" => Some(Split::Train),
        "val" => Some(Split::Validation),
        "test" => Some(Split::Test),
        _ => None,
    }
}

pub fn load_scope_corpus(path: impl AsRef<Path>) -> Result<TrainingCorpus, LoadError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_owned(),
        source,
    })?;
    let value: Value = serde_json::from_str(&text).map_err(|source| LoadError::Json {
        path: path.to_owned(),
        source,
    })?;
    parse_scope_value(&value)
}

/// In-scope records in file order; intents are numbered by first appearance.
pub fn parse_scope_value(value: &Value) -> Result<TrainingCorpus, LoadError> {
    let splits = value.as_object().ok_or(LoadError::NotAnObject)?;
    let mut records = Vec::new();
    for (key, entries) in splits {
        let Some(split) = split_for_key(key) else {
            continue;
        };
        let entries = entries.as_array().ok_or_else(|| LoadError::SplitNotArray {
            split: key.clone(),
        })?;
        for (index, entry) in entries.iter().enumerate() {
            let bad = || LoadError::BadRecord {
                split: key.clone(),
                index,
                record: entry.to_string(),
            };
            let [text, label] = entry.as_array().map(Vec::as_slice).ok_or_else(bad)? else {
                return Err(bad());
            };
            let (Some(text), Some(label)) = (text.as_str(), label.as_str()) else {
                return Err(bad());
            };
            if label == OUT_OF_SCOPE_LABEL {
                continue;
            }
            records.push(RawRecord::new(text, label, split));
        }
    }
    Ok(TrainingCorpus::from_records(records)?)
}

/// Parses `intent<TAB>sentence` lines. Blank lines and `#` comments are
/// skipped.
pub fn parse_sidecar(text: &str) -> Result<Vec<CanonicalForm>, LoadError> {
    let mut forms = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let bad = || LoadError::BadSidecarLine {
            line: n + 1,
            content: line.to_owned(),
        };
        let (intent, sentence) = line.split_once('\t').ok_or_else(bad)?;
        let intent = IntentId::new(intent.trim()).map_err(|_| bad())?;
        forms.push(CanonicalForm::custom(intent, sentence)?);
    }
    Ok(forms)
}

pub fn load_sidecar(path: impl AsRef<Path>) -> Result<Vec<CanonicalForm>, LoadError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_sidecar(&text)
}

/// Loads the dataset and applies sidecar overrides when a path is given.
pub fn load_corpus(
    data: impl AsRef<Path>,
    sidecar: Option<&Path>,
) -> Result<TrainingCorpus, LoadError> {
    let corpus = load_scope_corpus(data)?;
    match sidecar {
        Some(path) => Ok(corpus.with_canonical_overrides(load_sidecar(path)?)?),
        None => Ok(corpus),
    }
}
