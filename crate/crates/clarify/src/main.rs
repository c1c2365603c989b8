use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use clarify::experiment::{check_fingerprint, run_experiment, ExperimentConfig};
use clarify::model_file::{load_model, save_model};
use clarify::report::{emit_report, render_table};
use clarify::scope::load_corpus;
use clarify::service::{self, AppState, SessionStore};
use clarify::synth::{generate, SynthConfig};
use clarify_core::corpus::Split;
use clarify_core::keywords::{compute_tfidf, extract_keywords};
use clarify_core::nlu::train;
use clarify_core::{Engine, EngineConfig, Hyperparams, IntentModel, TrainingCorpus};
use serde_json::json;

#[derive(Parser)]
#[command(name = "clarify", version, about = "Intent classification with a clarification dialogue")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize a dataset file and its evaluation split.
    Corpus {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        split: SplitArgs,
    },
    /// Train a classifier and write the model file.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        hyper: HyperArgs,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Compare simple fallback, tuned fallback and the clarification pipeline.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        /// Trained model; when omitted a model is trained first.
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        hyper: HyperArgs,
        #[command(flatten)]
        engine: EngineArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[arg(long, default_value_t = 0.05)]
        grid_step: f64,
        #[arg(long, default_value = "report")]
        report_dir: PathBuf,
    },
    /// Print the TF-IDF keywords of every intent.
    Keywords {
        #[command(flatten)]
        data: DataArgs,
        #[arg(short, long, default_value_t = 5)]
        k: usize,
        /// Only this intent.
        #[arg(long)]
        intent: Option<String>,
    },
    /// Serve the chat API over HTTP.
    Serve {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, env = "CLARIFY_MODEL")]
        model: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long, env = "CLARIFY_ADDR", default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Idle session lifetime in seconds.
        #[arg(long, env = "CLARIFY_SESSION_TTL", default_value_t = 1800)]
        ttl_secs: u64,
        /// Append every turn to this JSONL file.
        #[arg(long, env = "CLARIFY_TRANSCRIPT_LOG")]
        transcript_log: Option<PathBuf>,
    },
    /// Chat in the terminal.
    Chat {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, env = "CLARIFY_MODEL")]
        model: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Write a synthetic dataset file with the same shape as the real one.
    Synth {
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, default_value_t = 150)]
        intents: usize,
        #[arg(long, default_value_t = 100)]
        train_per_intent: usize,
        #[arg(long, default_value_t = 30)]
        test_per_intent: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Args)]
struct DataArgs {
    /// Dataset JSON (`train`/`val`/`test` arrays of [utterance, intent]).
    #[arg(long, env = "CLARIFY_DATA")]
    data: PathBuf,
    /// `intent<TAB>sentence` lines overriding generated canonical forms.
    #[arg(long)]
    canonical_forms: Option<PathBuf>,
}

impl DataArgs {
    fn load(&self) -> Result<TrainingCorpus> {
        load_corpus(&self.data, self.canonical_forms.as_deref())
            .with_context(|| format!("loading {}", self.data.display()))
    }
}

#[derive(Args)]
struct HyperArgs {
    #[arg(long, default_value_t = Hyperparams::default().epochs)]
    epochs: u32,
    #[arg(long, default_value_t = Hyperparams::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = Hyperparams::default().learning_rate)]
    learning_rate: f64,
    #[arg(long, default_value_t = Hyperparams::default().l2)]
    l2: f64,
    #[arg(long, default_value_t = Hyperparams::default().batch_size)]
    batch_size: usize,
}

impl HyperArgs {
    fn hyperparams(&self) -> Hyperparams {
        Hyperparams {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            l2: self.l2,
            batch_size: self.batch_size,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long, env = "CLARIFY_TAU_DIRECT", default_value_t = EngineConfig::default().tau_direct)]
    tau_direct: f64,
    #[arg(long, env = "CLARIFY_TAU_FALLBACK", default_value_t = EngineConfig::default().tau_fallback)]
    tau_fallback: f64,
    #[arg(long, env = "CLARIFY_MAX_SUGGESTIONS", default_value_t = EngineConfig::default().max_suggestions)]
    max_suggestions: usize,
}

impl EngineArgs {
    fn config(&self) -> EngineConfig {
        EngineConfig {
            tau_direct: self.tau_direct,
            tau_fallback: self.tau_fallback,
            max_suggestions: self.max_suggestions,
            ..EngineConfig::default()
        }
    }
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long, default_value_t = 30)]
    eval_intents: usize,
    #[arg(long, default_value_t = 10)]
    test_per_intent: usize,
    #[arg(long, default_value_t = 20)]
    val_per_intent: usize,
}

fn print_config(command: &str, config: serde_json::Value) {
    println!("config {command}: {config}");
}

fn load_checked_model(path: &PathBuf, corpus: &TrainingCorpus) -> Result<IntentModel> {
    let model = load_model(path)?;
    check_fingerprint(&model, corpus).with_context(|| format!("checking {}", path.display()))?;
    Ok(model)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Corpus { data, split } => {
            print_config("corpus", json!({"data": data.data, "eval_intents": split.eval_intents,
                "test_per_intent": split.test_per_intent, "val_per_intent": split.val_per_intent}));
            let corpus = data.load()?;
            println!("intents: {}", corpus.intents().len());
            for s in [Split::Train, Split::Validation, Split::Test] {
                println!("{s:?} examples: {}", corpus.count(s));
            }
            println!("fingerprint: {:016x}", corpus.fingerprint());
            let split = corpus.apply_evaluation_split(split.eval_intents, split.test_per_intent, split.val_per_intent)?;
            println!(
                "evaluation split: {} test, {} validation",
                split.count(Split::Test),
                split.count(Split::Validation)
            );
        }
        Command::Train { data, hyper, out } => {
            let hyperparams = hyper.hyperparams();
            print_config("train", json!({"data": data.data, "hyperparams": hyperparams, "out": out}));
            let corpus = data.load()?;
            let started = Instant::now();
            let model = train(&corpus, hyperparams)?;
            save_model(&model, &out)?;
            println!(
                "trained {} intents, {} features in {:.1?}; wrote {}",
                model.intents().len(),
                model.vocabulary().len(),
                started.elapsed(),
                out.display()
            );
        }
        Command::Eval {
            data,
            model,
            hyper,
            engine,
            split,
            grid_step,
            report_dir,
        } => {
            let config = ExperimentConfig {
                engine: engine.config(),
                grid_step,
                eval_intents: split.eval_intents,
                test_per_intent: split.test_per_intent,
                val_per_intent: split.val_per_intent,
            };
            let hyperparams = hyper.hyperparams();
            print_config("eval", json!({"data": data.data, "model": model, "experiment": config,
                "hyperparams": if model.is_none() { json!(hyperparams) } else { json!("from model file") },
                "report_dir": report_dir}));
            let corpus = data.load()?;
            let started = Instant::now();
            let model = match model {
                Some(path) => load_checked_model(&path, &corpus)?,
                None => train(&corpus, hyperparams)?,
            };
            let experiment = run_experiment(&model, &corpus, &config)?;
            print!("{}", render_table(&experiment.reports));
            for note in &experiment.notes {
                println!("note: {note}");
            }
            let files = emit_report(&experiment.reports, &experiment.notes, &report_dir)?;
            println!("wrote {} and episode logs ({:.1?})", files.json.display(), started.elapsed());
        }
        Command::Keywords { data, k, intent } => {
            print_config("keywords", json!({"data": data.data, "k": k}));
            let corpus = data.load()?;
            let table = compute_tfidf(&corpus)?;
            let keywords = extract_keywords(&table, k);
            for id in corpus.intents() {
                if intent.as_deref().is_some_and(|name| name != id.as_str()) {
                    continue;
                }
                let terms: Vec<String> = keywords[id]
                    .iter()
                    .map(|t| format!("{t} ({:.3})", table.score(id, t)))
                    .collect();
                println!("{id}\t{}", terms.join(", "));
            }
        }
        Command::Serve {
            data,
            model,
            engine,
            addr,
            ttl_secs,
            transcript_log,
        } => {
            let config = engine.config();
            print_config("serve", json!({"data": data.data, "model": model, "engine": config,
                "addr": addr.to_string(), "ttl_secs": ttl_secs, "transcript_log": transcript_log}));
            let corpus = data.load()?;
            let model = load_checked_model(&model, &corpus)?;
            let engine = Engine::from_corpus(model, corpus, config)?;
            let mut store = SessionStore::new(Duration::from_secs(ttl_secs));
            if let Some(path) = &transcript_log {
                store = store
                    .with_transcript_log(path)
                    .with_context(|| format!("opening {}", path.display()))?;
            }
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(service::serve(addr, AppState::new(engine, store)))?;
        }
        Command::Chat { data, model, engine } => {
            let config = engine.config();
            print_config("chat", json!({"data": data.data, "model": model, "engine": config}));
            let corpus = data.load()?;
            let model = load_checked_model(&model, &corpus)?;
            let engine = Engine::from_corpus(model, corpus, config)?;
            clarify::chat::run_chat(&engine, io::stdin().lock(), io::stdout().lock())?;
        }
        Command::Synth {
            out,
            intents,
            train_per_intent,
            test_per_intent,
            seed,
        } => {
            let config = SynthConfig {
                intents,
                train_per_intent,
                test_per_intent,
                seed,
                ..SynthConfig::default()
            };
            print_config("synth", json!({"out": out, "intents": intents, "train_per_intent": train_per_intent,
                "test_per_intent": test_per_intent, "seed": seed}));
            if intents == 0 {
                bail!("--intents must be positive");
            }
            std::fs::write(&out, serde_json::to_string(&generate(&config))?)
                .with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
