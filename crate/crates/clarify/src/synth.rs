//! Seeded generator for synthetic datasets with the same JSON shape as the
//! real intent dataset. Used for smoke runs, timing and tests when the real
//! data is not at hand; its numbers say nothing about real-data quality.
//!
//! Intents are grouped into domains. An utterance mixes a generic opener,
//! words specific to its intent, words shared across its domain and, with
//! probability `noise`, a word borrowed from a sibling intent, so that
//! intents in a domain are genuinely confusable.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::scope::OUT_OF_SCOPE_LABEL;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub intents: usize,
    pub intents_per_domain: usize,
    pub train_per_intent: usize,
    pub val_per_intent: usize,
    pub test_per_intent: usize,
    pub oos_per_split: usize,
    /// Probability of each borrowed sibling word.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            intents: 150,
            intents_per_domain: 15,
            train_per_intent: 100,
            val_per_intent: 20,
            test_per_intent: 30,
            oos_per_split: 20,
            noise: 0.35,
            seed: 7,
        }
    }
}

const OPENERS: &[&str] = &[
    "", "", "please", "can you", "i need to", "how do i", "help me", "i want to", "could you",
    "tell me how to", "what about", "is it possible to", "i would like to", "quick question",
];

const FILLERS: &[&str] = &["now", "today", "for me", "again", "asap", "please", "thanks", "right away"];

const ONSETS: &[&str] = &["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "pl", "kr"];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ou"];

struct WordMaker {
    used: BTreeSet<String>,
}

impl WordMaker {
    fn word(&mut self, rng: &mut ChaCha8Rng) -> String {
        loop {
            let syllables = rng.gen_range(2..=3);
            let mut w = String::new();
            for _ in 0..syllables {
                w.push_str(ONSETS.choose(rng).expect("non-empty"));
                w.push_str(VOWELS.choose(rng).expect("non-empty"));
            }
            if self.used.insert(w.clone()) {
                return w;
            }
        }
    }

    fn words(&mut self, rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
        (0..n).map(|_| self.word(rng)).collect()
    }
}

struct IntentSpec {
    name: String,
    own: Vec<String>,
    domain: usize,
}

fn utterance(
    rng: &mut ChaCha8Rng,
    intent: &IntentSpec,
    domain_words: &[String],
    siblings: &[&IntentSpec],
    noise: f64,
) -> String {
    let mut parts: Vec<String> = Vec::new();
    let opener = *OPENERS.choose(rng).expect("non-empty");
    if !opener.is_empty() {
        parts.push(opener.to_owned());
    }
    let own = rng.gen_range(1..=3);
    parts.extend(intent.own.choose_multiple(rng, own).cloned());
    for _ in 0..rng.gen_range(0..=2) {
        parts.push(domain_words.choose(rng).expect("non-empty").clone());
    }
    if !siblings.is_empty() && rng.gen_bool(noise) {
        let sibling = siblings.choose(rng).expect("non-empty");
        parts.push(sibling.own.choose(rng).expect("non-empty").clone());
    }
    if rng.gen_bool(0.3) {
        parts.push((*FILLERS.choose(rng).expect("non-empty")).to_owned());
    }
    // Keep the opener first; shuffle the content words.
    let start = usize::from(!opener.is_empty());
    parts[start..].shuffle(rng);
    parts.join(" ")
}

/// A dataset object with `train`, `val`, `test` and `oos_*` arrays.
pub fn generate(config: &SynthConfig) -> Value {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut maker = WordMaker { used: BTreeSet::new() };
    let per_domain = config.intents_per_domain.max(1);
    let domains = config.intents.div_ceil(per_domain);
    let domain_words: Vec<Vec<String>> = (0..domains).map(|_| maker.words(&mut rng, 6)).collect();
    let domain_names: Vec<String> = (0..domains).map(|_| maker.word(&mut rng)).collect();
    let intents: Vec<IntentSpec> = (0..config.intents)
        .map(|i| {
            let domain = i / per_domain;
            let own = maker.words(&mut rng, 5);
            IntentSpec {
                name: format!("{}_{}", domain_names[domain], own[0]),
                own,
                domain,
            }
        })
        .collect();

    let counts = [
        ("train", config.train_per_intent),
        ("val", config.val_per_intent),
        ("test", config.test_per_intent),
    ];
    let mut splits: Vec<Vec<Value>> = vec![Vec::new(); counts.len()];
    for intent in &intents {
        let siblings: Vec<&IntentSpec> = intents
            .iter()
            .filter(|o| o.domain == intent.domain && o.name != intent.name)
            .collect();
        let mut seen = BTreeSet::new();
        for (split, &(_, n)) in counts.iter().enumerate() {
            let mut made = 0;
            let mut attempts = 0;
            while made < n && attempts < n * 50 {
                attempts += 1;
                let text = utterance(&mut rng, intent, &domain_words[intent.domain], &siblings, config.noise);
                if seen.insert(text.clone()) {
                    splits[split].push(json!([text, intent.name]));
                    made += 1;
                }
            }
        }
    }

    let oos_words = maker.words(&mut rng, 40);
    let mut oos = || -> Vec<Value> {
        (0..config.oos_per_split)
            .map(|_| {
                let n = rng.gen_range(2..=4);
                let words: Vec<&str> = oos_words.choose_multiple(&mut rng, n).map(String::as_str).collect();
                json!([words.join(" "), OUT_OF_SCOPE_LABEL])
            })
            .collect()
    };
    let (oos_train, oos_val, oos_test) = (oos(), oos(), oos());
    let [train, val, test]: [Vec<Value>; 3] = splits.try_into().expect("three splits");
    json!({
        "oos_val": oos_val,
        "val": val,
        "train": train,
        "oos_test": oos_test,
        "test": test,
        "oos_train": oos_train,
    })
}
