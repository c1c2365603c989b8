//! The three-system comparison: simple fallback at the direct threshold,
//! fallback at a validation-tuned threshold, and the clarification pipeline.

use clarify_core::corpus::{Split, TrainingCorpus};
use clarify_core::eval::{
    default_grid, evaluate_baseline, evaluate_pipeline, optimize_threshold, EvalError, SystemKind,
    ThresholdSearch,
};
use clarify_core::{CorpusError, Engine, EngineConfig, EvalReport, Example, IntentModel};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub engine: EngineConfig,
    pub grid_step: f64,
    /// Intents whose evaluation formulations are used, in corpus order.
    pub eval_intents: usize,
    pub test_per_intent: usize,
    pub val_per_intent: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            engine: EngineConfig::default(),
            grid_step: 0.05,
            eval_intents: 30,
            test_per_intent: 10,
            val_per_intent: 20,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Engine(#[from] clarify_core::dialogue::EngineError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("the model was trained on a different corpus (fingerprint {model:016x}, corpus {corpus:016x})")]
    Fingerprint { model: u64, corpus: u64 },
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub threshold: ThresholdSearch,
    /// Simple fallback, optimized fallback, clarification pipeline.
    pub reports: [EvalReport; 3],
    pub notes: Vec<String>,
}

impl Experiment {
    pub fn report(&self, system: SystemKind) -> &EvalReport {
        self.reports
            .iter()
            .find(|r| r.system == system)
            .expect("one report per system")
    }
}

pub fn check_fingerprint(model: &IntentModel, corpus: &TrainingCorpus) -> Result<(), ExperimentError> {
    let expected = corpus.fingerprint();
    if model.corpus_fingerprint() == expected {
        Ok(())
    } else {
        Err(ExperimentError::Fingerprint {
            model: model.corpus_fingerprint(),
            corpus: expected,
        })
    }
}

pub fn run_experiment(
    model: &IntentModel,
    corpus: &TrainingCorpus,
    config: &ExperimentConfig,
) -> Result<Experiment, ExperimentError> {
    check_fingerprint(model, corpus)?;
    let split = corpus.apply_evaluation_split(config.eval_intents, config.test_per_intent, config.val_per_intent)?;
    let test: Vec<Example> = split.split(Split::Test).cloned().collect();
    let validation: Vec<Example> = split.split(Split::Validation).cloned().collect();

    let grid = default_grid(config.grid_step)?;
    let threshold = optimize_threshold(model, &validation, &grid)?;
    let simple = evaluate_baseline(model, &test, config.engine.tau_direct, SystemKind::SimpleFallback)?;
    let optimized = evaluate_baseline(model, &test, threshold.best, SystemKind::OptimizedFallback)?;
    let engine = Engine::from_corpus(model.clone(), split, config.engine)?;
    let pipeline = evaluate_pipeline(&engine, &test)?;

    let notes = vec![
        format!(
            "evaluation: first {} intents in file order, {} test and {} validation formulations each",
            config.eval_intents, config.test_per_intent, config.val_per_intent
        ),
        format!("macro-F1 averages over the {} test intents only", pipeline.per_intent.len()),
        format!(
            "optimized threshold {:.2} (grid step {}, ties to the lowest)",
            threshold.best, config.grid_step
        ),
    ];
    Ok(Experiment {
        threshold,
        reports: [simple, optimized, pipeline],
        notes,
    })
}
