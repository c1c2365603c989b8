//! Independent reimplementations used as test oracles. They share no code
//! with the library beyond its public data accessors and the stop-word list.

use std::collections::{BTreeMap, BTreeSet};

use clarify_core::corpus::{Example, IntentId, Split, TrainingCorpus};
use clarify_core::eval::{evaluate_baseline, SystemKind};
use clarify_core::keywords::{is_stop_word, KeywordIndex};
use clarify_core::nlu::{featurize, FeatureVector};
use clarify_core::{IntentModel, Verdict};

/// Lowercase alphanumeric runs, written out character by character.
pub fn tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            out.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

/// Brute-force TF-IDF: every (intent, term) pair is counted by a full scan
/// of the intent's concatenated training text.
pub fn naive_tfidf(corpus: &TrainingCorpus) -> BTreeMap<(IntentId, String), f64> {
    let docs: Vec<(IntentId, Vec<String>)> = corpus
        .intents()
        .iter()
        .map(|intent| {
            let text: Vec<&str> = corpus
                .examples()
                .iter()
                .filter(|e| e.split == Split::Train && &e.intent == intent)
                .map(|e| e.text.as_str())
                .collect();
            let terms = tokens(&text.join(" "))
                .into_iter()
                .filter(|t| t.chars().count() > 1 && !is_stop_word(t))
                .collect();
            (intent.clone(), terms)
        })
        .collect();
    let vocabulary: BTreeSet<&String> = docs.iter().flat_map(|(_, d)| d).collect();
    let n = docs.len() as f64;
    let mut table = BTreeMap::new();
    for term in vocabulary {
        let df = docs.iter().filter(|(_, d)| d.contains(term)).count() as f64;
        for (intent, doc) in &docs {
            let tf = doc.iter().filter(|t| *t == term).count() as f64;
            if tf > 0.0 {
                table.insert((intent.clone(), term.clone()), tf * (n / df).ln());
            }
        }
    }
    table
}

/// Candidates by scanning every index term against the query, then a full
/// sort by confidence (ties by the model's intent order).
pub fn full_sort_suggestions(
    model: &IntentModel,
    index: &KeywordIndex,
    text: &str,
    exclude: &BTreeSet<IntentId>,
    max: usize,
) -> Vec<IntentId> {
    let words = tokens(text);
    let mut candidates: BTreeSet<IntentId> = BTreeSet::new();
    for (term, intents) in index.terms() {
        if words.iter().any(|w| w == term) {
            candidates.extend(intents.iter().cloned());
        }
    }
    let probs = independent_softmax(model, text);
    let mut ranked: Vec<(f64, usize, IntentId)> = candidates
        .into_iter()
        .filter(|i| !exclude.contains(i))
        .map(|i| {
            let k = model.intent_index(&i).expect("candidate known to model");
            (probs[k], k, i)
        })
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    ranked.into_iter().take(max).map(|(_, _, i)| i).collect()
}

/// Softmax over logits recomputed from the named feature counts and the
/// model's individual weights, in the model's intent order.
pub fn independent_softmax(model: &IntentModel, text: &str) -> Vec<f64> {
    let k = model.intents().len();
    let mut logits: Vec<f64> = (0..k).map(|i| model.bias(i)).collect();
    for (name, value) in featurize(text) {
        if let Some(&id) = model.vocabulary().get(&name) {
            for (i, z) in logits.iter_mut().enumerate() {
                *z += value * model.weight(i, id);
            }
        }
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Good answers of a fallback baseline at every grid value, and the best
/// value with ties going to the lowest threshold.
pub fn exhaustive_threshold(model: &IntentModel, validation: &[Example], grid: &[f64]) -> (f64, Vec<(f64, usize)>) {
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let counts: Vec<(f64, usize)> = sorted
        .iter()
        .map(|&t| {
            let report = evaluate_baseline(model, validation, t, SystemKind::OptimizedFallback)
                .expect("non-empty validation set");
            let good = report.episodes.iter().filter(|e| e.verdict == Verdict::Good).count();
            (t, good)
        })
        .collect();
    let best_count = counts.iter().map(|c| c.1).max().expect("non-empty grid");
    let best = counts.iter().find(|c| c.1 == best_count).expect("maximum exists").0;
    (best, counts)
}

/// Central finite differences of the model objective in every parameter.
pub fn finite_difference_gradient(
    model: &IntentModel,
    data: &[(FeatureVector, usize)],
    l2: f64,
    h: f64,
) -> Vec<f64> {
    let mut probe = model.clone();
    (0..model.params().len())
        .map(|j| {
            let original = probe.params()[j];
            probe.params_mut()[j] = original + h;
            let up = probe.objective(data, l2);
            probe.params_mut()[j] = original - h;
            let down = probe.objective(data, l2);
            probe.params_mut()[j] = original;
            (up - down) / (2.0 * h)
        })
        .collect()
}
