//! Per-intent TF-IDF keywords and the keyword → intents index behind the
//! suggestion stage.
//!
//! Each intent is one document: the concatenation of its training
//! examples. For term `t` and intent `i`,
//!
//! ```text
//! tf(t, i)  = occurrences of t in i's document
//! idf(t)    = ln(N / df(t))      N = intents, df = documents containing t
//! score     = tf · idf
//! ```
//!
//! Terms are the classifier's lowercase word tokens, minus stop words and
//! single characters.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{CanonicalForm, IntentId, Split, TrainingCorpus};
use crate::nlu::{IntentModel, Prediction};
use crate::text::word_tokens;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KeywordError {
    #[error("cannot compute TF-IDF over an empty corpus")]
    EmptyCorpus,
}

/// Removed before counting.
pub const STOP_WORDS: &[&str] = &[
    "about", "above", "after", "again", "all", "am", "an", "and", "any", "are", "as", "at", "be",
    "because", "been", "before", "being", "below", "between", "both", "but", "by", "can", "could",
    "did", "do", "does", "doing", "down", "during", "each", "few", "for", "from", "further", "had",
    "has", "have", "having", "he", "her", "here", "hers", "him", "his", "how", "if", "in", "into",
    "is", "it", "its", "just", "let", "me", "more", "most", "my", "myself", "no", "nor", "not",
    "now", "of", "off", "on", "once", "only", "or", "other", "our", "ours", "out", "over", "own",
    "please", "same", "she", "should", "so", "some", "such", "than", "that", "the", "their",
    "them", "then", "there", "these", "they", "this", "those", "through", "to", "too", "under",
    "until", "up", "very", "was", "we", "were", "what", "when", "where", "which", "while", "who",
    "whom", "why", "will", "with", "would", "you", "your", "yours",
];

pub fn is_stop_word(term: &str) -> bool {
    STOP_WORDS.binary_search(&term).is_ok()
}

/// Tokens eligible as keywords, in text order.
pub fn keyword_terms(text: &str) -> impl Iterator<Item = String> {
    word_tokens(text)
        .into_iter()
        .filter(|t| t.chars().count() >= 2 && !is_stop_word(t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfTable {
    intents: Vec<IntentId>,
    scores: BTreeMap<IntentId, BTreeMap<String, f64>>,
    document_frequency: BTreeMap<String, usize>,
}

impl TfidfTable {
    pub fn intents(&self) -> &[IntentId] {
        &self.intents
    }

    /// Score of `term` for `intent`; 0 for terms absent from its document.
    pub fn score(&self, intent: &IntentId, term: &str) -> f64 {
        self.scores
            .get(intent)
            .and_then(|terms| terms.get(term))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn scores(&self, intent: &IntentId) -> Option<&BTreeMap<String, f64>> {
        self.scores.get(intent)
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.document_frequency.get(term).copied().unwrap_or(0)
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        let df = self.document_frequency(term);
        (df > 0).then(|| libm::log(self.intents.len() as f64 / df as f64))
    }

    /// Up to `k` terms with positive score, best first, ties in
    /// lexicographic order.
    pub fn top_terms(&self, intent: &IntentId, k: usize) -> Vec<(String, f64)> {
        let Some(terms) = self.scores.get(intent) else {
            return Vec::new();
        };
        let mut ranked: Vec<(String, f64)> = terms
            .iter()
            .filter(|(_, &s)| s > 0.0)
            .map(|(t, &s)| (t.clone(), s))
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(k);
        ranked
    }
}

pub fn compute_tfidf(corpus: &TrainingCorpus) -> Result<TfidfTable, KeywordError> {
    let intents = corpus.intents().to_vec();
    if intents.is_empty() {
        return Err(KeywordError::EmptyCorpus);
    }
    let mut counts: BTreeMap<IntentId, BTreeMap<String, usize>> =
        intents.iter().map(|i| (i.clone(), BTreeMap::new())).collect();
    for example in corpus.split(Split::Train) {
        let Some(tf) = counts.get_mut(&example.intent) else {
            continue;
        };
        for term in keyword_terms(&example.text) {
            *tf.entry(term).or_insert(0) += 1;
        }
    }
    let mut document_frequency: BTreeMap<String, usize> = BTreeMap::new();
    for tf in counts.values() {
        for term in tf.keys() {
            *document_frequency.entry(term.clone()).or_insert(0) += 1;
        }
    }
    let n = intents.len() as f64;
    let scores = counts
        .into_iter()
        .map(|(intent, tf)| {
            let scored = tf
                .into_iter()
                .map(|(term, count)| {
                    let idf = libm::log(n / document_frequency[&term] as f64);
                    (term, count as f64 * idf)
                })
                .collect();
            (intent, scored)
        })
        .collect();
    Ok(TfidfTable {
        intents,
        scores,
        document_frequency,
    })
}

/// The `k` best terms of every intent (possibly fewer, possibly none).
pub fn extract_keywords(table: &TfidfTable, k: usize) -> BTreeMap<IntentId, Vec<String>> {
    table
        .intents
        .iter()
        .map(|i| {
            let terms = table.top_terms(i, k).into_iter().map(|(t, _)| t).collect();
            (i.clone(), terms)
        })
        .collect()
}

/// Keyword lists per intent and the inverted term → intents links.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KeywordIndex {
    keywords_of: BTreeMap<IntentId, Vec<String>>,
    intents_of: BTreeMap<String, BTreeSet<IntentId>>,
}

/// Links every extracted keyword to the intents it was extracted for and to
/// every intent whose canonical form contains it as a whole word.
///
/// A template canonical form contributes only the words of its intent name;
/// the surrounding template sentence is shared by all intents.
pub fn build_keyword_index(
    keywords: &BTreeMap<IntentId, Vec<String>>,
    corpus: &TrainingCorpus,
) -> KeywordIndex {
    let keywords_of: BTreeMap<IntentId, Vec<String>> = keywords
        .iter()
        .map(|(intent, terms)| {
            let kept = terms
                .iter()
                .filter(|t| is_valid_keyword(t))
                .cloned()
                .collect();
            (intent.clone(), kept)
        })
        .collect();
    let mut intents_of: BTreeMap<String, BTreeSet<IntentId>> = BTreeMap::new();
    for (intent, terms) in &keywords_of {
        for term in terms {
            intents_of
                .entry(term.clone())
                .or_default()
                .insert(intent.clone());
        }
    }
    for form in corpus.canonical_forms() {
        let words: BTreeSet<String> = canonical_terms(form).collect();
        for (term, linked) in intents_of.iter_mut() {
            if words.contains(term) {
                linked.insert(form.intent.clone());
            }
        }
    }
    KeywordIndex {
        keywords_of,
        intents_of,
    }
}

fn is_valid_keyword(term: &str) -> bool {
    term.chars().count() >= 2 && word_tokens(term) == [term]
}

fn canonical_terms(form: &CanonicalForm) -> impl Iterator<Item = String> {
    let text = if form.text == CanonicalForm::generate(&form.intent).text {
        form.intent.human_readable()
    } else {
        form.text.clone()
    };
    word_tokens(&text).into_iter()
}

/// A suggestion candidate with the classifier's confidence in it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub intent: IntentId,
    pub confidence: f64,
}

impl KeywordIndex {
    pub fn keywords_of(&self, intent: &IntentId) -> &[String] {
        self.keywords_of.get(intent).map_or(&[], Vec::as_slice)
    }

    pub fn intents_of(&self, term: &str) -> Option<&BTreeSet<IntentId>> {
        self.intents_of.get(term)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&String, &BTreeSet<IntentId>)> {
        self.intents_of.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.intents_of.is_empty()
    }

    /// Intents sharing at least one index term with the utterance.
    pub fn candidates(&self, text: &str) -> BTreeSet<IntentId> {
        word_tokens(text)
            .iter()
            .filter_map(|w| self.intents_of.get(w))
            .flatten()
            .cloned()
            .collect()
    }

    /// Candidates minus `exclude`, ranked by classifier confidence for
    /// `text` and cut to `max`.
    pub fn suggest(
        &self,
        model: &IntentModel,
        text: &str,
        exclude: &BTreeSet<IntentId>,
        max: usize,
    ) -> Vec<Suggestion> {
        self.suggest_with_prediction(&model.predict(text), text, exclude, max)
    }

    /// As [`KeywordIndex::suggest`], reusing the prediction already made for
    /// `text`. Its ranking order breaks confidence ties.
    pub fn suggest_with_prediction(
        &self,
        prediction: &Prediction,
        text: &str,
        exclude: &BTreeSet<IntentId>,
        max: usize,
    ) -> Vec<Suggestion> {
        let candidates = self.candidates(text);
        prediction
            .ranked
            .iter()
            .filter(|s| candidates.contains(&s.intent) && !exclude.contains(&s.intent))
            .take(max)
            .map(|s| Suggestion {
                intent: s.intent.clone(),
                confidence: s.confidence,
            })
            .collect()
    }
}
