//! Property and oracle checks shared by the test suites. Each returns a
//! one-line summary on success and the first counterexample on failure.

use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use clarify_core::corpus::{IntentId, RawRecord, Split, TrainingCorpus};
use clarify_core::dialogue::{route, Route};
use clarify_core::eval::{default_grid, evaluate_baseline, optimize_threshold, search_threshold, SystemKind};
use clarify_core::keywords::{build_keyword_index, compute_tfidf};
use clarify_core::nlu::train;
use clarify_core::{
    ActionKind, BotAction, Engine, EngineConfig, EvalReport, Example, Hyperparams, IntentModel, Session, Stage,
    TerminalStage, UserReply, Verdict,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRng, TestRunner};

use super::fixtures;
use super::oracles;

pub type Check = Result<String, String>;

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = TestRng::deterministic_rng(config.rng_algorithm);
    TestRunner::new_with_rng(config, rng)
}

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn id(name: &str) -> IntentId {
    IntentId::new(name).expect("valid intent name")
}

/// Model, corpus and a way to build engines with other thresholds.
pub struct Fixture {
    pub model: IntentModel,
    pub corpus: TrainingCorpus,
}

impl Fixture {
    pub fn new() -> Self {
        Self {
            model: fixtures::model(),
            corpus: fixtures::corpus(),
        }
    }

    pub fn engine(&self, config: EngineConfig) -> Engine {
        Engine::from_corpus(self.model.clone(), self.corpus.clone(), config).expect("fixture engine")
    }

    pub fn eval_examples(&self) -> Vec<Example> {
        self.corpus.split(Split::Test).cloned().collect()
    }
}

impl Default for Fixture {
    fn default() -> Self {
        Self::new()
    }
}

// ---- oracle equivalence -------------------------------------------------

fn small_corpus() -> impl Strategy<Value = TrainingCorpus> {
    let words = prop::sample::select(vec![
        "oil", "Change", "the", "a", "Flight", "book!", "x", "car's", "now", "price", "rent", "B2B",
        "ünïcode", "hotel", "tire", "OIL", "to", "7", "42nd", "price-check",
    ]);
    let text = prop::collection::vec(words, 1..6).prop_map(|w| w.join(" "));
    let doc = prop::collection::btree_set(text, 1..4);
    prop::collection::vec(doc, 1..=5).prop_map(|docs| {
        let records: Vec<RawRecord> = docs
            .iter()
            .enumerate()
            .flat_map(|(i, texts)| {
                texts
                    .iter()
                    .map(move |t| RawRecord::new(t.clone(), format!("intent_{i}"), Split::Train))
            })
            .collect();
        TrainingCorpus::from_records(records).expect("generated corpus is valid")
    })
}

pub fn tfidf_matches_naive(cases: u32) -> Check {
    let compared = Cell::new(0usize);
    runner(cases)
        .run(&small_corpus(), |corpus| {
            let table = compute_tfidf(&corpus).expect("non-empty");
            let naive = oracles::naive_tfidf(&corpus);
            for ((intent, term), expected) in &naive {
                let got = table.score(intent, term);
                prop_assert!(
                    (got - expected).abs() <= 1e-9,
                    "{intent}/{term}: table {got}, oracle {expected}"
                );
            }
            for intent in corpus.intents() {
                let stored = table.scores(intent).map_or(0, |s| s.len());
                let expected = naive.keys().filter(|(i, _)| i == intent).count();
                prop_assert_eq!(stored, expected, "term count of {}", intent);
            }
            compared.set(compared.get() + naive.len());
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("{cases} random corpora of up to 5 intents, {} scores within 1e-9", compared.get()))
}

pub fn suggestions_match_full_sort(fixture: &Fixture, cases: u32) -> Check {
    // Eight intents share "card" as a keyword; six must survive, best first.
    let linked = [
        "card_lost", "card_activate", "card_limit", "card_declined", "pin_change", "freeze_account",
        "pay_bill", "transfer_money",
    ];
    let keywords: BTreeMap<IntentId, Vec<String>> = linked.iter().map(|n| (id(n), vec!["card".to_owned()])).collect();
    let index = build_keyword_index(&keywords, &fixture.corpus);
    let query = "help with my card";
    ensure(index.candidates(query).len() == 8, || {
        format!("expected 8 candidates, got {:?}", index.candidates(query))
    })?;
    let none = BTreeSet::new();
    let got: Vec<IntentId> = index.suggest(&fixture.model, query, &none, 6).into_iter().map(|s| s.intent).collect();
    let expected = oracles::full_sort_suggestions(&fixture.model, &index, query, &none, 6);
    ensure(got.len() == 6 && got == expected, || {
        format!("8 candidates: got {got:?}, oracle {expected:?}")
    })?;

    let engine = fixture.engine(EngineConfig::default());
    let words: Vec<String> = engine.index().terms().map(|(t, _)| t.clone()).chain(
        ["my", "the", "please", "hello", "money", "Card!"].map(String::from),
    )
    .collect();
    let intents = fixture.model.intents().to_vec();
    let strategy = (
        prop::collection::vec(prop::sample::select(words), 1..6),
        prop::collection::btree_set(prop::sample::select(intents), 0..4),
        0usize..9,
    );
    runner(cases)
        .run(&strategy, |(words, exclude, max)| {
            let text = words.join(" ");
            let got: Vec<IntentId> = engine
                .index()
                .suggest(&fixture.model, &text, &exclude, max)
                .into_iter()
                .map(|s| s.intent)
                .collect();
            let expected = oracles::full_sort_suggestions(&fixture.model, engine.index(), &text, &exclude, max);
            prop_assert_eq!(got, expected, "query {:?}", text);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("8-candidate cut to 6 plus {cases} random queries agree with the full-sort oracle"))
}

pub fn threshold_matches_exhaustive(fixture: &Fixture) -> Check {
    // Hand case: confidences 0.9 (correct), 0.5 (wrong), 0.4 (correct).
    // Every grid value up to 0.40 keeps both correct answers.
    let grid = default_grid(0.05).map_err(|e| e.to_string())?;
    let hand = search_threshold(&[(true, 0.9), (false, 0.5), (true, 0.4)], &grid);
    ensure(hand.best == 0.05, || format!("hand case picked {}", hand.best))?;
    for &(t, n) in &hand.correct_at {
        let expected = if t <= 0.4 { 2 } else if t <= 0.9 { 1 } else { 0 };
        ensure(n == expected, || format!("hand case at {t}: {n} correct, expected {expected}"))?;
    }

    let validation = fixture.eval_examples();
    let mut grids = 0;
    for step in [0.01, 0.05, 0.1, 0.25] {
        let grid = default_grid(step).map_err(|e| e.to_string())?;
        let search = optimize_threshold(&fixture.model, &validation, &grid).map_err(|e| e.to_string())?;
        let (best, counts) = oracles::exhaustive_threshold(&fixture.model, &validation, &grid);
        ensure(search.best == best, || format!("step {step}: optimizer {} vs exhaustive {best}", search.best))?;
        ensure(search.correct_at == counts, || format!("step {step}: per-threshold counts differ"))?;
        grids += 1;
    }
    Ok(format!("hand case and {grids} grids on the fixture agree with exhaustive evaluation"))
}

pub fn gradient_matches_finite_differences() -> Check {
    let corpus = fixtures::toy_corpus();
    let mut worst: f64 = 0.0;
    for (epochs, l2) in [(0, 0.0), (15, 0.0), (15, 0.01), (40, 0.1)] {
        let hyperparams = Hyperparams {
            epochs,
            batch_size: 4,
            ..Hyperparams::default()
        };
        let mut model = train(&corpus, hyperparams).map_err(|e| e.to_string())?;
        if epochs == 0 {
            // Away from the all-zero start, where every class ties.
            for (j, w) in model.params_mut().iter_mut().enumerate() {
                *w = ((j * 7919) % 13) as f64 / 13.0 - 0.5;
            }
        }
        let data = model.encode_training_set(&corpus);
        let analytic = model.objective_gradient(&data, l2);
        let numeric = oracles::finite_difference_gradient(&model, &data, l2, 1e-5);
        for (j, (a, n)) in analytic.iter().zip(&numeric).enumerate() {
            let diff = (a - n).abs();
            worst = worst.max(diff);
            ensure(diff <= 1e-4, || format!("parameter {j} (epochs {epochs}, l2 {l2}): analytic {a}, numeric {n}"))?;
        }
    }
    Ok(format!("3-intent toy, 4 parameter settings, max |analytic - numeric| = {worst:.2e}"))
}

pub fn confidences_match_softmax(fixture: &Fixture) -> Check {
    let mut worst: f64 = 0.0;
    for text in fixtures::PROBES {
        let prediction = fixture.model.predict(text);
        let probs = oracles::independent_softmax(&fixture.model, text);
        for (k, intent) in fixture.model.intents().iter().enumerate() {
            let c = prediction.confidence_of(intent).map_err(|e| e.to_string())?;
            worst = worst.max((c - probs[k]).abs());
            ensure((c - probs[k]).abs() <= 1e-12, || format!("{text:?}/{intent}: {c} vs {}", probs[k]))?;
        }
        let sum: f64 = prediction.ranked.iter().map(|s| s.confidence).sum();
        ensure((sum - 1.0).abs() <= 1e-9, || format!("{text:?}: confidences sum to {sum}"))?;
    }
    Ok(format!("{} probes, max deviation {worst:.1e}", fixtures::PROBES.len()))
}

// ---- state machine ------------------------------------------------------

fn is_faq_entry(action: &BotAction) -> bool {
    matches!(action.kind, ActionKind::FaqTopicList | ActionKind::NoSuggestionsFallback)
}

fn first_turn(engine: &Engine, text: &str) -> BotAction {
    let mut session = Session::new("probe");
    engine.handle(&mut session, UserReply::text(text), 0).expect("text is always accepted")
}

pub fn routing_boundaries(fixture: &Fixture) -> Check {
    let defaults = EngineConfig::default();
    for eps in [1e-9, 1e-12] {
        let (tf, td) = (defaults.tau_fallback, defaults.tau_direct);
        for (c, expected) in [
            (tf - eps, Route::Faq),
            (tf, Route::Confirm),
            (td - eps, Route::Confirm),
            (td, Route::Direct),
        ] {
            ensure(route(c, &defaults) == expected, || format!("route({c}) != {expected:?}"))?;
        }
    }
    ensure(route(defaults.tau_fallback.next_down(), &defaults) == Route::Faq, || "next_down(τf)".into())?;
    ensure(route(defaults.tau_direct.next_down(), &defaults) == Route::Confirm, || "next_down(τd)".into())?;

    // Engine level: thresholds placed exactly on, and one ulp above, each
    // probe's own top confidence.
    let mut probed = 0;
    for text in fixtures::PROBES {
        let c = fixture.model.predict(text).top().confidence;
        if !(c > 0.0 && c < 1.0) {
            continue;
        }
        let config = |tau_fallback: f64, tau_direct: f64| EngineConfig {
            tau_fallback,
            tau_direct,
            ..EngineConfig::default()
        };
        let cases = [
            (config(c / 2.0, c), "τd = c", ActionKind::DirectAnswer),
            (config(c / 2.0, c.next_up()), "τd = c + ulp", ActionKind::ConfirmPrompt),
            (config(c, 1.0), "τf = c", ActionKind::ConfirmPrompt),
        ];
        for (config, label, expected) in cases {
            let kind = first_turn(&fixture.engine(config), text).kind;
            ensure(kind == expected, || format!("{text:?} (c = {c}), {label}: {kind:?}"))?;
        }
        let action = first_turn(&fixture.engine(config(c.next_up(), 1.0)), text);
        ensure(is_faq_entry(&action), || format!("{text:?} (c = {c}), τf = c + ulp: {:?}", action.kind))?;
        probed += 1;
    }
    ensure(probed >= 10, || format!("only {probed} probes had an interior confidence"))?;
    Ok(format!("route() at τ±ε and {probed} probes with thresholds on their own confidence"))
}

fn reply_strategy(texts: Vec<String>) -> impl Strategy<Value = UserReply> {
    prop_oneof![
        prop::sample::select(texts).prop_map(UserReply::text),
        any::<bool>().prop_map(|yes| UserReply::Confirm { yes }),
        (0usize..8).prop_map(|index| UserReply::Choose { index }),
        Just(UserReply::NoneOfTheAbove),
        (0usize..8).prop_map(|index| UserReply::FaqTopic { index }),
        (0usize..8).prop_map(|index| UserReply::FaqIntent { index }),
        Just(UserReply::Back),
    ]
}

fn query_texts(fixture: &Fixture) -> Vec<String> {
    fixtures::PROBES
        .iter()
        .map(|s| s.to_string())
        .chain(fixture.eval_examples().into_iter().map(|e| e.text))
        .collect()
}

pub fn suggestions_bounded_and_exclusive(fixture: &Fixture, cases: u32) -> Check {
    // Every query lands in the confirmation stage, then is refused.
    let engine = fixture.engine(EngineConfig {
        tau_fallback: 0.0,
        tau_direct: 1.0,
        ..EngineConfig::default()
    });
    let max = engine.config().max_suggestions;
    let words: Vec<String> = engine.index().terms().map(|(t, _)| t.clone()).collect();
    let lists = Cell::new(0usize);
    let longest = Cell::new(0usize);
    let query = prop::collection::vec(prop::sample::select(words), 1..8).prop_map(|w| w.join(" "));
    let query = prop_oneof![query, prop::sample::select(query_texts(fixture))];
    runner(cases)
        .run(&query, |text| {
            let mut session = Session::new("s");
            let first = engine.handle(&mut session, UserReply::text(&text), 0).expect("text accepted");
            if first.kind != ActionKind::ConfirmPrompt {
                // Only a confidence of exactly 1.0 skips confirmation here.
                prop_assert_eq!(first.kind, ActionKind::DirectAnswer);
                return Ok(());
            }
            let rejected = first.intents[0].clone();
            let second = engine
                .handle(&mut session, UserReply::Confirm { yes: false }, 1)
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            match second.kind {
                ActionKind::SuggestionList => {
                    prop_assert!(second.intents.len() <= max, "{} suggestions", second.intents.len());
                    prop_assert!(!second.intents.is_empty());
                    prop_assert!(!second.intents.contains(&rejected), "rejected {} offered again", rejected);
                    let distinct: BTreeSet<_> = second.intents.iter().collect();
                    prop_assert_eq!(distinct.len(), second.intents.len());
                    prop_assert_eq!(second.options.len(), second.intents.len());
                    lists.set(lists.get() + 1);
                    longest.set(longest.get().max(second.intents.len()));
                }
                ActionKind::FaqTopicList | ActionKind::NoSuggestionsFallback => {}
                other => prop_assert!(false, "unexpected {:?} after refusal", other),
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let (lists, longest) = (lists.get(), longest.get());
    ensure(lists > 0 && longest == max, || {
        format!("suggestion lists never reached the cap ({lists} lists, longest {longest})")
    })?;
    Ok(format!("{cases} refusals, {lists} suggestion lists, longest {longest} of at most {max}"))
}

fn structured_replies(stage: Stage, action: &BotAction, topics: usize) -> Vec<UserReply> {
    let options = action.options.len();
    match stage {
        Stage::Idle => Vec::new(),
        Stage::AwaitingConfirmation => vec![UserReply::Confirm { yes: true }, UserReply::Confirm { yes: false }],
        Stage::AwaitingSuggestionChoice => (0..options)
            .map(|index| UserReply::Choose { index })
            .chain([UserReply::NoneOfTheAbove])
            .collect(),
        Stage::FaqTopics => (0..topics)
            .map(|index| UserReply::FaqTopic { index })
            .chain([UserReply::Back])
            .collect(),
        Stage::FaqIntents => (0..options)
            .map(|index| UserReply::FaqIntent { index })
            .chain([UserReply::Back])
            .collect(),
    }
}

/// Shortest number of structured replies from `session` back to Idle.
fn turns_to_idle(engine: &Engine, session: &Session, last: &BotAction, limit: usize) -> Option<usize> {
    let mut queue = VecDeque::from([(session.clone(), last.clone(), 0)]);
    while let Some((s, action, depth)) = queue.pop_front() {
        if s.stage() == Stage::Idle {
            return Some(depth);
        }
        if depth == limit {
            continue;
        }
        for reply in structured_replies(s.stage(), &action, engine.topics().len()) {
            let mut next = s.clone();
            if let Ok(a) = engine.handle(&mut next, reply, 0) {
                queue.push_back((next, a, depth + 1));
            }
        }
    }
    None
}

pub fn no_dead_ends(fixture: &Fixture) -> Check {
    let mut explored = 0usize;
    let mut by_stage: BTreeMap<String, usize> = BTreeMap::new();
    for config in [
        EngineConfig::default(),
        EngineConfig {
            tau_fallback: 0.0,
            tau_direct: 1.0,
            ..EngineConfig::default()
        },
        EngineConfig {
            tau_fallback: 0.99,
            tau_direct: 1.0,
            ..EngineConfig::default()
        },
    ] {
        let engine = fixture.engine(config);
        for text in query_texts(fixture) {
            let mut start = Session::new("s");
            let first = engine.handle(&mut start, UserReply::text(&text), 0).expect("text accepted");
            let mut seen = BTreeSet::new();
            let mut queue = VecDeque::from([(start, first)]);
            while let Some((session, action)) = queue.pop_front() {
                let key = (format!("{:?}", session.stage()), session.pending_intent().cloned(), session.offered().to_vec());
                if !seen.insert(key) {
                    continue;
                }
                explored += 1;
                *by_stage.entry(format!("{:?}", session.stage())).or_default() += 1;
                let stage = session.stage();
                let mut accepted = 0;
                for reply in structured_replies(stage, &action, engine.topics().len()) {
                    let mut next = session.clone();
                    if let Ok(a) = engine.handle(&mut next, reply, 0) {
                        accepted += 1;
                        queue.push_back((next, a));
                    }
                }
                ensure(stage == Stage::Idle || accepted > 0, || format!("{text:?}: no reply accepted in {stage:?}"))?;
                let mut reset = session.clone();
                ensure(engine.handle(&mut reset, UserReply::text("hello"), 0).is_ok(), || {
                    format!("{text:?}: free text refused in {stage:?}")
                })?;
                ensure(turns_to_idle(&engine, &session, &action, 3).is_some(), || {
                    format!("{text:?}: {stage:?} cannot reach an answer in 3 turns")
                })?;
            }
        }
    }
    for stage in ["AwaitingConfirmation", "AwaitingSuggestionChoice", "FaqTopics", "FaqIntents"] {
        ensure(by_stage.contains_key(stage), || format!("stage {stage} never reached"))?;
    }
    Ok(format!("{explored} reachable states ({by_stage:?}); each reaches Idle in at most 3 structured replies"))
}

pub fn replay_is_deterministic(fixture: &Fixture, cases: u32) -> Check {
    let engine = fixture.engine(EngineConfig::default());
    let strategy = prop::collection::vec(reply_strategy(query_texts(fixture)), 1..14);
    let turns = Cell::new(0usize);
    runner(cases)
        .run(&strategy, |replies| {
            let mut session = Session::new("live");
            let mut live = Vec::new();
            for (at, reply) in replies.into_iter().enumerate() {
                if let Ok(action) = engine.handle(&mut session, reply, at as u64) {
                    live.push(action);
                }
            }
            let first = engine.replay(session.transcript()).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let second = engine.replay(session.transcript()).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(&first, &live);
            prop_assert_eq!(&second, &live);
            turns.set(turns.get() + live.len());
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("{cases} random conversations ({} accepted turns) replay identically", turns.get()))
}

pub fn tau_direct_monotone(fixture: &Fixture) -> Check {
    let texts = query_texts(fixture);
    let examples = fixture.eval_examples();
    let mut previous: Option<(BTreeSet<String>, usize)> = None;
    let grid = default_grid(0.05).map_err(|e| e.to_string())?;
    for &tau_direct in &grid {
        let engine = fixture.engine(EngineConfig {
            tau_direct,
            tau_fallback: tau_direct / 2.0,
            ..EngineConfig::default()
        });
        let direct: BTreeSet<String> = texts
            .iter()
            .filter(|t| first_turn(&engine, t).kind == ActionKind::DirectAnswer)
            .cloned()
            .collect();
        let answered = evaluate_baseline(&fixture.model, &examples, tau_direct, SystemKind::SimpleFallback)
            .map_err(|e| e.to_string())
            .map(|r| r.good + r.bad)?;
        if let Some((prev_direct, prev_answered)) = &previous {
            ensure(direct.is_subset(prev_direct), || format!("τd = {tau_direct}: direct set grew"))?;
            ensure(answered <= *prev_answered, || format!("τd = {tau_direct}: baseline answered more"))?;
        }
        previous = Some((direct, answered));
    }
    Ok(format!("direct-answer sets shrink monotonically over {} thresholds", grid.len()))
}

// ---- evaluation identities ----------------------------------------------

/// Exact identities between a simple-fallback report and a pipeline report
/// at the same direct threshold, plus per-report invariants for all.
pub fn structural_identities(reports: &[EvalReport], expected_total: usize) -> Check {
    let find = |system| reports.iter().find(|r| r.system == system);
    let simple = find(SystemKind::SimpleFallback).ok_or("missing simple-fallback report")?;
    let pipeline = find(SystemKind::Clarification).ok_or("missing pipeline report")?;
    for r in reports {
        let label = r.label();
        ensure(r.micro_f1 == r.good_rate, || format!("{label}: micro-F1 {} != Good rate {}", r.micro_f1, r.good_rate))?;
        ensure(r.good + r.bad + r.fallback == expected_total && r.total == expected_total, || {
            format!("{label}: {} + {} + {} != {expected_total}", r.good, r.bad, r.fallback)
        })?;
        ensure(r.episodes.len() == expected_total, || format!("{label}: {} episodes", r.episodes.len()))?;
        let rates = r.good_rate + r.bad_rate + r.fallback_rate;
        ensure((rates - 1.0).abs() <= 1e-9, || format!("{label}: rates sum to {rates}"))?;
        for e in &r.episodes {
            let expected = match &e.delivered {
                Some(d) if *d == e.gold => Verdict::Good,
                Some(_) => Verdict::Bad,
                None => Verdict::Fallback,
            };
            ensure(e.verdict == expected, || format!("{label}: verdict of {:?} inconsistent", e.query))?;
        }
    }
    ensure(simple.config.tau_direct == pipeline.config.tau_direct, || "reports use different τd".into())?;
    ensure(pipeline.bad == simple.bad, || format!("pipeline Bad {} != simple Bad {}", pipeline.bad, simple.bad))?;
    ensure(pipeline.good >= simple.good, || format!("pipeline Good {} < simple Good {}", pipeline.good, simple.good))?;
    let f = &pipeline.funnel;
    ensure(pipeline.good == f.direct_correct + f.confirmed + f.suggestion_correct, || {
        format!(
            "funnel: Good {} != {} + {} + {}",
            pipeline.good, f.direct_correct, f.confirmed, f.suggestion_correct
        )
    })?;
    // Recount the funnel from the episode log.
    let count = |stage, verdict| {
        pipeline
            .episodes
            .iter()
            .filter(|e| e.terminal_stage == stage && e.verdict == verdict)
            .count()
    };
    ensure(
        count(TerminalStage::Direct, Verdict::Good) == f.direct_correct
            && count(TerminalStage::Confirmation, Verdict::Good) == f.confirmed
            && count(TerminalStage::Suggestion, Verdict::Good) == f.suggestion_correct,
        || "funnel disagrees with the episode log".into(),
    )?;
    let late_bad = pipeline
        .episodes
        .iter()
        .filter(|e| e.verdict == Verdict::Bad && e.terminal_stage != TerminalStage::Direct)
        .count();
    ensure(late_bad == 0, || format!("{late_bad} Bad verdicts after the direct stage"))?;
    Ok(format!(
        "n = {expected_total}; Good {}/{}; Bad {} = {}; funnel {} = {} + {} + {}",
        pipeline.good, simple.good, pipeline.bad, simple.bad, pipeline.good, f.direct_correct, f.confirmed,
        f.suggestion_correct
    ))
}
