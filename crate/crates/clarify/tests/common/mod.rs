#![allow(dead_code)]

#[path = "../../../core/tests/support/mod.rs"]
pub mod support;

use std::path::Path;

use clarify::model_file::{load_model, save_model};
use clarify_core::IntentModel;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `n` probe queries: the given texts first, then seeded word salads drawn
/// from them.
pub fn probe_queries(texts: &[String], n: usize) -> Vec<String> {
    let words: Vec<&str> = texts.iter().flat_map(|t| t.split_whitespace()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut probes: Vec<String> = texts.iter().take(n).cloned().collect();
    while probes.len() < n {
        let len = 1 + probes.len() % 6;
        let salad: Vec<&str> = words.choose_multiple(&mut rng, len).copied().collect();
        probes.push(salad.join(" "));
    }
    probes
}

/// Saves, reloads and compares every confidence bit for bit.
pub fn persistence_round_trip(model: &IntentModel, probes: &[String], dir: &Path) -> Result<String, String> {
    let path = dir.join("model.bin");
    save_model(model, &path).map_err(|e| e.to_string())?;
    let loaded = load_model(&path).map_err(|e| e.to_string())?;
    if &loaded != model {
        return Err("reloaded model differs structurally".into());
    }
    for query in probes {
        let (a, b) = (model.predict(query), loaded.predict(query));
        let bits = |p: &clarify_core::Prediction| {
            p.ranked
                .iter()
                .map(|s| (s.intent.clone(), s.confidence.to_bits()))
                .collect::<Vec<_>>()
        };
        if bits(&a) != bits(&b) {
            return Err(format!("prediction for {query:?} changed after reload"));
        }
    }
    let bytes = std::fs::metadata(&path).map_err(|e| e.to_string())?.len();
    Ok(format!(
        "{} probes bit-identical after reload ({} intents, {} features, {bytes} bytes)",
        probes.len(),
        model.intents().len(),
        model.vocabulary().len()
    ))
}
