//! Simulated-user evaluation of the clarification pipeline against
//! threshold-fallback baselines.
//!
//! The simulated user knows the gold intent of each query: it confirms only
//! the gold intent, picks the gold intent when it is suggested, and gives up
//! as soon as the FAQ menu appears.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{Example, IntentId};
use crate::dialogue::{ActionKind, BotAction, Engine, Session, Stage, UserReply};
use crate::nlu::IntentModel;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("the evaluation set is empty")]
    EmptyTestSet,
    #[error("the validation set is empty")]
    EmptyValidationSet,
    #[error("the threshold grid is empty")]
    EmptyGrid,
    #[error("grid step must lie in (0, 1), got {0}")]
    GridStep(f64),
    #[error("no episode outcomes to score")]
    NoOutcomes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Good,
    Bad,
    Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalStage {
    Direct,
    Confirmation,
    Suggestion,
    Faq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub query: String,
    pub gold: IntentId,
    pub predicted: IntentId,
    pub confidence: f64,
    pub delivered: Option<IntentId>,
    pub terminal_stage: TerminalStage,
    pub verdict: Verdict,
    /// Bot actions in order.
    pub path: Vec<ActionKind>,
}

fn verdict(gold: &IntentId, delivered: Option<&IntentId>) -> Verdict {
    match delivered {
        Some(d) if d == gold => Verdict::Good,
        Some(_) => Verdict::Bad,
        None => Verdict::Fallback,
    }
}

/// What the simulated user does after a bot action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimulatedReply {
    Reply(UserReply),
    /// The action answered the question.
    Satisfied,
    /// The user leaves without an answer.
    Abandon,
}

pub fn simulate_user(gold: &IntentId, action: &BotAction) -> SimulatedReply {
    match action.kind {
        ActionKind::DirectAnswer | ActionKind::Answer => SimulatedReply::Satisfied,
        ActionKind::ConfirmPrompt => SimulatedReply::Reply(UserReply::Confirm {
            yes: action.intents.first() == Some(gold),
        }),
        ActionKind::SuggestionList => SimulatedReply::Reply(
            match action.intents.iter().position(|i| i == gold) {
                Some(index) => UserReply::Choose { index },
                None => UserReply::NoneOfTheAbove,
            },
        ),
        ActionKind::FaqTopicList | ActionKind::FaqIntentList | ActionKind::NoSuggestionsFallback => {
            SimulatedReply::Abandon
        }
    }
}

/// Runs one query through the engine with the simulated user.
pub fn run_episode(engine: &Engine, query: &str, gold: &IntentId) -> EpisodeOutcome {
    let mut session = Session::new("episode");
    let mut path = Vec::new();
    let mut turn = 0u64;
    let mut action = engine
        .handle(&mut session, UserReply::text(query), turn)
        .expect("free text is accepted in every stage");
    path.push(action.kind);
    let prediction = session
        .last_prediction()
        .expect("a message always produces a prediction")
        .top()
        .clone();
    let mut stage_before = Stage::Idle;

    let (delivered, terminal_stage) = loop {
        match simulate_user(gold, &action) {
            SimulatedReply::Satisfied => {
                let stage = match (action.kind, stage_before) {
                    (ActionKind::DirectAnswer, _) => TerminalStage::Direct,
                    (_, Stage::AwaitingConfirmation) => TerminalStage::Confirmation,
                    (_, Stage::AwaitingSuggestionChoice) => TerminalStage::Suggestion,
                    _ => TerminalStage::Faq,
                };
                break (action.resolved_intent.clone(), stage);
            }
            SimulatedReply::Abandon => break (None, TerminalStage::Faq),
            SimulatedReply::Reply(reply) => {
                turn += 1;
                stage_before = session.stage();
                action = engine
                    .handle(&mut session, reply, turn)
                    .expect("simulated replies are legal for the current stage");
                path.push(action.kind);
            }
        }
    };
    EpisodeOutcome {
        query: query.into(),
        gold: gold.clone(),
        predicted: prediction.intent,
        confidence: prediction.confidence,
        verdict: verdict(gold, delivered.as_ref()),
        delivered,
        terminal_stage,
        path,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    SimpleFallback,
    OptimizedFallback,
    Clarification,
}

impl SystemKind {
    pub fn label(self) -> &'static str {
        match self {
            SystemKind::SimpleFallback => "Simple fallback mechanism",
            SystemKind::OptimizedFallback => "Optimized fallback mechanism",
            SystemKind::Clarification => "Clarification mechanism",
        }
    }
}

/// How many episodes reached and succeeded at each stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageFunnel {
    /// Answered directly (confidence at or above the direct threshold).
    pub direct_entered: usize,
    pub direct_correct: usize,
    pub confirmation_entered: usize,
    pub confirmed: usize,
    pub suggestion_entered: usize,
    pub suggestion_correct: usize,
    /// Confirmation refused and no keyword candidate existed.
    pub no_suggestions: usize,
    /// Routed to the FAQ straight away (confidence below the fallback threshold).
    pub low_confidence: usize,
    pub faq_entered: usize,
}

/// Thresholds and limits a report was produced with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub tau_direct: f64,
    pub tau_fallback: Option<f64>,
    pub max_suggestions: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentScore {
    pub intent: IntentId,
    pub support: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F1Scores {
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub per_intent: Vec<IntentScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub system: SystemKind,
    pub config: ReportConfig,
    pub total: usize,
    pub good: usize,
    pub bad: usize,
    pub fallback: usize,
    pub good_rate: f64,
    pub bad_rate: f64,
    pub fallback_rate: f64,
    pub funnel: StageFunnel,
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub per_intent: Vec<IntentScore>,
    pub episodes: Vec<EpisodeOutcome>,
}

impl EvalReport {
    fn from_episodes(
        system: SystemKind,
        config: ReportConfig,
        episodes: Vec<EpisodeOutcome>,
        funnel: StageFunnel,
    ) -> Result<Self, EvalError> {
        let count = |v: Verdict| episodes.iter().filter(|e| e.verdict == v).count();
        let (good, bad, fallback) = (
            count(Verdict::Good),
            count(Verdict::Bad),
            count(Verdict::Fallback),
        );
        let total = episodes.len();
        let intents = test_intents(&episodes);
        let scores = compute_f1(&episodes, &intents)?;
        Ok(Self {
            system,
            config,
            total,
            good,
            bad,
            fallback,
            good_rate: good as f64 / total as f64,
            bad_rate: bad as f64 / total as f64,
            fallback_rate: fallback as f64 / total as f64,
            funnel,
            macro_f1: scores.macro_f1,
            micro_f1: scores.micro_f1,
            per_intent: scores.per_intent,
            episodes,
        })
    }

    pub fn label(&self) -> &'static str {
        self.system.label()
    }
}

/// Gold intents of the episodes, in order of first appearance.
fn test_intents(episodes: &[EpisodeOutcome]) -> Vec<IntentId> {
    let mut seen = BTreeSet::new();
    episodes
        .iter()
        .filter(|e| seen.insert(e.gold.clone()))
        .map(|e| e.gold.clone())
        .collect()
}

/// The clarification pipeline with the simulated user on every query.
pub fn evaluate_pipeline(engine: &Engine, queries: &[Example]) -> Result<EvalReport, EvalError> {
    if queries.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    let episodes: Vec<EpisodeOutcome> = queries
        .iter()
        .map(|q| run_episode(engine, &q.text, &q.intent))
        .collect();
    let mut funnel = StageFunnel::default();
    for e in &episodes {
        let good = e.verdict == Verdict::Good;
        for kind in &e.path {
            match kind {
                ActionKind::DirectAnswer => {
                    funnel.direct_entered += 1;
                    funnel.direct_correct += usize::from(good);
                }
                ActionKind::ConfirmPrompt => funnel.confirmation_entered += 1,
                ActionKind::SuggestionList => funnel.suggestion_entered += 1,
                ActionKind::FaqTopicList | ActionKind::NoSuggestionsFallback => {
                    funnel.faq_entered += 1
                }
                _ => {}
            }
        }
        match e.terminal_stage {
            TerminalStage::Confirmation if good => funnel.confirmed += 1,
            TerminalStage::Suggestion if good => funnel.suggestion_correct += 1,
            _ => {}
        }
        match e.path.as_slice() {
            [ActionKind::FaqTopicList | ActionKind::NoSuggestionsFallback, ..] => {
                funnel.low_confidence += 1
            }
            [ActionKind::ConfirmPrompt, ActionKind::FaqTopicList | ActionKind::NoSuggestionsFallback, ..] => {
                funnel.no_suggestions += 1
            }
            _ => {}
        }
    }
    let config = engine.config();
    EvalReport::from_episodes(
        SystemKind::Clarification,
        ReportConfig {
            tau_direct: config.tau_direct,
            tau_fallback: Some(config.tau_fallback),
            max_suggestions: Some(config.max_suggestions),
        },
        episodes,
        funnel,
    )
}

/// Answers with the top intent when its confidence reaches `threshold`,
/// otherwise falls back. `system` only labels the report.
pub fn evaluate_baseline(
    model: &IntentModel,
    queries: &[Example],
    threshold: f64,
    system: SystemKind,
) -> Result<EvalReport, EvalError> {
    if queries.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    let mut funnel = StageFunnel::default();
    let episodes: Vec<EpisodeOutcome> = queries
        .iter()
        .map(|q| {
            let top = model.predict(&q.text).top().clone();
            let answered = top.confidence >= threshold;
            let delivered = answered.then(|| top.intent.clone());
            let verdict = verdict(&q.intent, delivered.as_ref());
            if answered {
                funnel.direct_entered += 1;
                funnel.direct_correct += usize::from(verdict == Verdict::Good);
            } else {
                funnel.low_confidence += 1;
            }
            EpisodeOutcome {
                query: q.text.clone(),
                gold: q.intent.clone(),
                predicted: top.intent,
                confidence: top.confidence,
                delivered,
                terminal_stage: if answered {
                    TerminalStage::Direct
                } else {
                    TerminalStage::Faq
                },
                verdict,
                path: Vec::from([if answered {
                    ActionKind::DirectAnswer
                } else {
                    ActionKind::NoSuggestionsFallback
                }]),
            }
        })
        .collect();
    EvalReport::from_episodes(
        system,
        ReportConfig {
            tau_direct: threshold,
            tau_fallback: None,
            max_suggestions: None,
        },
        episodes,
        funnel,
    )
}

/// `k/n` for `k = 1..n` with `n = round(1/step)`, e.g. 0.05, 0.10, …, 0.95.
pub fn default_grid(step: f64) -> Result<Vec<f64>, EvalError> {
    if !(step > 0.0 && step < 1.0) {
        return Err(EvalError::GridStep(step));
    }
    let n = libm::round(1.0 / step) as u32;
    Ok((1..n).map(|k| f64::from(k) / f64::from(n)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSearch {
    pub best: f64,
    /// Correct direct answers on the validation set at each grid value.
    pub correct_at: Vec<(f64, usize)>,
}

/// The grid threshold with the most correct direct answers on the
/// validation set; ties go to the lowest threshold.
pub fn optimize_threshold(
    model: &IntentModel,
    validation: &[Example],
    grid: &[f64],
) -> Result<ThresholdSearch, EvalError> {
    if grid.is_empty() {
        return Err(EvalError::EmptyGrid);
    }
    if validation.is_empty() {
        return Err(EvalError::EmptyValidationSet);
    }
    let scored: Vec<(bool, f64)> = validation
        .iter()
        .map(|q| {
            let top = model.predict(&q.text).top().clone();
            (top.intent == q.intent, top.confidence)
        })
        .collect();
    Ok(search_threshold(&scored, grid))
}

/// Threshold search over (top intent correct, top confidence) pairs.
pub fn search_threshold(scored: &[(bool, f64)], grid: &[f64]) -> ThresholdSearch {
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let correct_at: Vec<(f64, usize)> = sorted
        .iter()
        .map(|&t| {
            let n = scored.iter().filter(|&&(ok, c)| ok && c >= t).count();
            (t, n)
        })
        .collect();
    let mut best = correct_at[0];
    for &candidate in &correct_at[1..] {
        if candidate.1 > best.1 {
            best = candidate;
        }
    }
    ThresholdSearch {
        best: best.0,
        correct_at,
    }
}

/// Micro-F1 is accuracy with fallbacks counted as errors. Macro-F1 averages
/// per-intent F1 over `intents`: a Good episode is a true positive for its
/// gold intent, a Bad one a false negative for the gold intent and a false
/// positive for the delivered one, and a Fallback only a false negative.
pub fn compute_f1(outcomes: &[EpisodeOutcome], intents: &[IntentId]) -> Result<F1Scores, EvalError> {
    if outcomes.is_empty() {
        return Err(EvalError::NoOutcomes);
    }
    #[derive(Default)]
    struct Counts {
        tp: usize,
        fp: usize,
        fn_: usize,
        support: usize,
    }
    let mut counts: BTreeMap<&IntentId, Counts> = BTreeMap::new();
    for e in outcomes {
        let gold = counts.entry(&e.gold).or_default();
        gold.support += 1;
        match e.verdict {
            Verdict::Good => gold.tp += 1,
            _ => gold.fn_ += 1,
        }
        if let (Verdict::Bad, Some(delivered)) = (e.verdict, &e.delivered) {
            counts.entry(delivered).or_default().fp += 1;
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let per_intent: Vec<IntentScore> = intents
        .iter()
        .map(|intent| {
            let c = counts.get(intent);
            let (tp, fp, fn_, support) = c.map_or((0, 0, 0, 0), |c| (c.tp, c.fp, c.fn_, c.support));
            let precision = ratio(tp, tp + fp);
            let recall = ratio(tp, tp + fn_);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            IntentScore {
                intent: intent.clone(),
                support,
                precision,
                recall,
                f1,
            }
        })
        .collect();
    let macro_f1 = if per_intent.is_empty() {
        0.0
    } else {
        per_intent.iter().map(|s| s.f1).sum::<f64>() / per_intent.len() as f64
    };
    let good = outcomes.iter().filter(|e| e.verdict == Verdict::Good).count();
    Ok(F1Scores {
        macro_f1,
        micro_f1: good as f64 / outcomes.len() as f64,
        per_intent,
    })
}
