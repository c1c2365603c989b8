//! Sparse word and character n-gram features and a multinomial logistic
//! regression intent classifier.
//!
//! The dialogue engine only consumes the ranked confidence distribution a
//! [`Prediction`] carries, so any classifier with that contract would do.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{IntentId, Split, TrainingCorpus};
use crate::text::word_tokens;

/// Format tag stored in every serialized model.
pub const MODEL_FORMAT: &str = "clarify-intent-model/1";

const WORD: &str = "w:";
const BIGRAM: &str = "b:";
const CHAR: &str = "c:";
const BIGRAM_JOINER: char = '▸';
const CHAR_NGRAM_SIZES: core::ops::RangeInclusive<usize> = 3..=5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("cannot train on an empty corpus")]
    EmptyCorpus,
    #[error("intent {0} has no training examples")]
    NoTrainExamples(IntentId),
    #[error("intent {0} is not known to the model")]
    UnknownIntent(IntentId),
    #[error("model format {found:?} is not supported (expected {MODEL_FORMAT:?})")]
    FormatMismatch { found: String },
    #[error("model is inconsistent: {0}")]
    Inconsistent(String),
}

/// Named feature counts of one utterance, keyed `w:word`, `b:left▸right`
/// or `c:ngram`.
pub type FeatureCounts = BTreeMap<String, f64>;

/// Featurizes an utterance: lowercase word unigrams, word bigrams, and
/// character 3- to 5-grams taken inside each word. Counts accumulate.
pub fn featurize(text: &str) -> FeatureCounts {
    let words = word_tokens(text);
    let mut counts = FeatureCounts::new();
    let mut bump = |name: String| *counts.entry(name).or_insert(0.0) += 1.0;
    for word in &words {
        bump(format!("{WORD}{word}"));
        let chars: Vec<char> = word.chars().collect();
        for n in CHAR_NGRAM_SIZES {
            for gram in chars.windows(n) {
                let mut name = String::from(CHAR);
                name.extend(gram);
                bump(name);
            }
        }
    }
    for pair in words.windows(2) {
        bump(format!("{BIGRAM}{}{BIGRAM_JOINER}{}", pair[0], pair[1]));
    }
    counts
}

/// Sparse feature vector over a model vocabulary, sorted by feature id.
/// Zero entries are never stored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    entries: Vec<(u32, f64)>,
}

impl FeatureVector {
    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub epochs: u32,
    pub learning_rate: f64,
    pub l2: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            epochs: 200,
            learning_rate: 0.1,
            l2: 1e-4,
            batch_size: 32,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredIntent {
    pub intent: IntentId,
    pub confidence: f64,
}

/// Every model intent with its softmax confidence, most confident first.
/// Ties keep the model's intent order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub ranked: Vec<ScoredIntent>,
}

impl Prediction {
    pub fn top(&self) -> &ScoredIntent {
        &self.ranked[0]
    }

    pub fn confidence_of(&self, intent: &IntentId) -> Result<f64, ModelError> {
        self.ranked
            .iter()
            .find(|s| &s.intent == intent)
            .map(|s| s.confidence)
            .ok_or_else(|| ModelError::UnknownIntent(intent.clone()))
    }
}

/// A trained classifier.
///
/// `params` holds `|vocabulary| + 1` rows of `|intents|` weights each: row
/// `j` is feature `j`'s weight for every intent and the last row is the
/// per-intent bias. Logically this is the `|intents| × (|vocabulary|+1)`
/// weight matrix stored feature-major, which keeps sparse dot products
/// contiguous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentModel {
    format: String,
    intents: Vec<IntentId>,
    vocabulary: BTreeMap<String, u32>,
    params: Vec<f64>,
    hyperparams: Hyperparams,
    corpus_fingerprint: u64,
}

impl IntentModel {
    /// Reassembles a model from stored parts, checking format tag,
    /// dimensions and finiteness.
    pub fn from_parts(
        format: String,
        intents: Vec<IntentId>,
        vocabulary: BTreeMap<String, u32>,
        params: Vec<f64>,
        hyperparams: Hyperparams,
        corpus_fingerprint: u64,
    ) -> Result<Self, ModelError> {
        if format != MODEL_FORMAT {
            return Err(ModelError::FormatMismatch { found: format });
        }
        let model = Self {
            format,
            intents,
            vocabulary,
            params,
            hyperparams,
            corpus_fingerprint,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.intents.is_empty() {
            return Err(ModelError::Inconsistent("no intents".into()));
        }
        let expected = (self.vocabulary.len() + 1) * self.intents.len();
        if self.params.len() != expected {
            return Err(ModelError::Inconsistent(format!(
                "{} parameters for {} intents and {} features",
                self.params.len(),
                self.intents.len(),
                self.vocabulary.len()
            )));
        }
        let mut ids: Vec<u32> = self.vocabulary.values().copied().collect();
        ids.sort_unstable();
        if ids.iter().enumerate().any(|(i, &id)| id as usize != i) {
            return Err(ModelError::Inconsistent(
                "feature ids are not 0..|vocabulary|".into(),
            ));
        }
        if self.params.iter().any(|w| !w.is_finite()) {
            return Err(ModelError::Inconsistent("non-finite weight".into()));
        }
        Ok(())
    }

    pub fn format(&self) -> &str {
        &self.format
    }

    pub fn intents(&self) -> &[IntentId] {
        &self.intents
    }

    pub fn vocabulary(&self) -> &BTreeMap<String, u32> {
        &self.vocabulary
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hyperparams
    }

    pub fn corpus_fingerprint(&self) -> u64 {
        self.corpus_fingerprint
    }

    /// Feature-major weights followed by the bias row.
    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn weight(&self, intent: usize, feature: u32) -> f64 {
        self.params[feature as usize * self.intents.len() + intent]
    }

    pub fn bias(&self, intent: usize) -> f64 {
        self.params[self.vocabulary.len() * self.intents.len() + intent]
    }

    pub fn intent_index(&self, intent: &IntentId) -> Option<usize> {
        self.intents.iter().position(|i| i == intent)
    }

    /// Features outside the vocabulary are dropped.
    pub fn vectorize(&self, text: &str) -> FeatureVector {
        index_features(&self.vocabulary, featurize(text))
    }

    /// Training examples as (features, intent index) pairs, in corpus order.
    pub fn encode_training_set(&self, corpus: &TrainingCorpus) -> Vec<(FeatureVector, usize)> {
        corpus
            .split(Split::Train)
            .filter_map(|e| Some((self.vectorize(&e.text), self.intent_index(&e.intent)?)))
            .collect()
    }

    pub fn predict(&self, text: &str) -> Prediction {
        self.predict_features(&self.vectorize(text))
    }

    pub fn predict_features(&self, features: &FeatureVector) -> Prediction {
        let k = self.intents.len();
        let mut probs = vec![0.0; k];
        self.scores(1.0, features, &mut probs);
        softmax_in_place(&mut probs);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
        Prediction {
            ranked: order
                .into_iter()
                .map(|i| ScoredIntent {
                    intent: self.intents[i].clone(),
                    confidence: probs[i],
                })
                .collect(),
        }
    }

    /// Per-intent logits with feature weights multiplied by `scale`.
    fn scores(&self, scale: f64, features: &FeatureVector, out: &mut [f64]) {
        let k = self.intents.len();
        out.fill(0.0);
        for &(id, value) in &features.entries {
            let row = &self.params[id as usize * k..][..k];
            for (o, w) in out.iter_mut().zip(row) {
                *o += value * w;
            }
        }
        let bias = &self.params[self.vocabulary.len() * k..];
        for (o, b) in out.iter_mut().zip(bias) {
            *o = *o * scale + b;
        }
    }

    /// Softmax minus one-hot of `gold`, written into `error`.
    fn output_error(&self, scale: f64, features: &FeatureVector, gold: usize, error: &mut [f64]) {
        self.scores(scale, features, error);
        softmax_in_place(error);
        error[gold] -= 1.0;
    }

    /// Mean cross-entropy plus `l2 / 2 · ‖feature weights‖²`.
    pub fn objective(&self, data: &[(FeatureVector, usize)], l2: f64) -> f64 {
        let k = self.intents.len();
        let mut logits = vec![0.0; k];
        let mut loss = 0.0;
        for (x, gold) in data {
            self.scores(1.0, x, &mut logits);
            let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let log_norm = max + libm::log(logits.iter().map(|z| libm::exp(z - max)).sum());
            loss += log_norm - logits[*gold];
        }
        let squared: f64 = self.params[..self.vocabulary.len() * k]
            .iter()
            .map(|w| w * w)
            .sum();
        loss / data.len() as f64 + 0.5 * l2 * squared
    }

    /// Gradient of [`IntentModel::objective`] in `params` layout, computed
    /// with the same per-example update rule training applies.
    pub fn objective_gradient(&self, data: &[(FeatureVector, usize)], l2: f64) -> Vec<f64> {
        let k = self.intents.len();
        let bias_row = self.vocabulary.len() * k;
        let mut grad: Vec<f64> = self.params[..bias_row].iter().map(|w| l2 * w).collect();
        grad.resize(self.params.len(), 0.0);
        let mut error = vec![0.0; k];
        let coeff = 1.0 / data.len() as f64;
        for (x, gold) in data {
            self.output_error(1.0, x, *gold, &mut error);
            scatter(&mut grad, k, bias_row, x, &error, coeff, coeff);
        }
        grad
    }
}

/// `grad[row j] += coeff · x_j · error` for each stored feature and
/// `grad[bias] += bias_coeff · error`.
fn scatter(
    target: &mut [f64],
    k: usize,
    bias_row: usize,
    features: &FeatureVector,
    error: &[f64],
    coeff: f64,
    bias_coeff: f64,
) {
    for &(id, value) in &features.entries {
        let row = &mut target[id as usize * k..][..k];
        let c = coeff * value;
        for (w, e) in row.iter_mut().zip(error) {
            *w += c * e;
        }
    }
    for (b, e) in target[bias_row..].iter_mut().zip(error) {
        *b += bias_coeff * e;
    }
}

fn softmax_in_place(values: &mut [f64]) {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in values.iter_mut() {
        *v = libm::exp(*v - max);
        total += *v;
    }
    for v in values.iter_mut() {
        *v /= total;
    }
}

fn index_features(vocabulary: &BTreeMap<String, u32>, counts: FeatureCounts) -> FeatureVector {
    let mut entries: Vec<(u32, f64)> = counts
        .into_iter()
        .filter(|(_, v)| *v != 0.0)
        .filter_map(|(name, v)| vocabulary.get(&name).map(|&id| (id, v)))
        .collect();
    entries.sort_unstable_by_key(|&(id, _)| id);
    FeatureVector { entries }
}

/// Fits softmax regression on the corpus's training split with mini-batch
/// gradient descent and L2 weight decay.
///
/// Deterministic: the vocabulary is sorted, the shuffle is seeded, and all
/// arithmetic is sequential. The bias is not regularized.
pub fn train(corpus: &TrainingCorpus, hyperparams: Hyperparams) -> Result<IntentModel, ModelError> {
    let intents = corpus.intents().to_vec();
    if intents.is_empty() || corpus.count(Split::Train) == 0 {
        return Err(ModelError::EmptyCorpus);
    }
    if let Some(missing) = intents.iter().find(|i| corpus.train_count(i) == 0) {
        return Err(ModelError::NoTrainExamples(missing.clone()));
    }

    let named: Vec<(FeatureCounts, &IntentId)> = corpus
        .split(Split::Train)
        .map(|e| (featurize(&e.text), &e.intent))
        .collect();
    let mut vocabulary: BTreeMap<String, u32> = named
        .iter()
        .flat_map(|(counts, _)| counts.keys())
        .map(|name| (name.to_string(), 0))
        .collect();
    for (id, slot) in vocabulary.values_mut().enumerate() {
        *slot = id as u32;
    }

    let k = intents.len();
    let mut model = IntentModel {
        format: MODEL_FORMAT.to_string(),
        params: vec![0.0; (vocabulary.len() + 1) * k],
        vocabulary,
        hyperparams,
        corpus_fingerprint: corpus.fingerprint(),
        intents,
    };
    let data: Vec<(FeatureVector, usize)> = named
        .into_iter()
        .map(|(counts, intent)| {
            let gold = model.intent_index(intent).expect("intent from corpus");
            (index_features(&model.vocabulary, counts), gold)
        })
        .collect();

    let bias_row = model.vocabulary.len() * k;
    let batch_size = hyperparams.batch_size.max(1);
    let decay = 1.0 - hyperparams.learning_rate * hyperparams.l2;
    let mut rng = ChaCha8Rng::seed_from_u64(hyperparams.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut errors = vec![0.0; batch_size * k];
    // Feature weights are `scale · params`, so weight decay is O(1) per step.
    let mut scale = 1.0;

    for _ in 0..hyperparams.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(batch_size) {
            for (slot, &i) in batch.iter().enumerate() {
                let (x, gold) = &data[i];
                model.output_error(scale, x, *gold, &mut errors[slot * k..][..k]);
            }
            scale *= decay;
            let step = hyperparams.learning_rate / batch.len() as f64;
            for (slot, &i) in batch.iter().enumerate() {
                let error = &errors[slot * k..][..k];
                scatter(&mut model.params, k, bias_row, &data[i].0, error, -step / scale, -step);
            }
            if scale < 1e-100 {
                fold_scale(&mut model.params[..bias_row], &mut scale);
            }
        }
    }
    fold_scale(&mut model.params[..bias_row], &mut scale);
    model.validate()?;
    Ok(model)
}

fn fold_scale(weights: &mut [f64], scale: &mut f64) {
    if *scale != 1.0 {
        for w in weights {
            *w *= *scale;
        }
        *scale = 1.0;
    }
}
