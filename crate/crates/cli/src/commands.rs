//! The five subcommands. Each is a plain function over paths and values so
//! the integration tests can drive them without a terminal.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use dialogforge_core::belief::{extract_store, BeliefMode, DistanceMetric, StoreOptions};
use dialogforge_core::corpus::{
    generate_restaurant_corpus, generate_support_corpus, split_corpus, Dialog,
};
use dialogforge_core::metrics::{
    collect_predictions, report_from_records, ModelResponse, PredictionRecord, TurnHistory,
    TurnResponder,
};
use dialogforge_core::responders::{HybridResponder, NnbResponder, Seq2SeqResponder};
use dialogforge_core::seq2seq::{train, EncodedDialog, Seq2SeqParams};

use crate::config::{seed_from_env, RunConfig};
use crate::formats::{
    format_loss_log, load_checkpoint, load_corpus, load_store, save_checkpoint, save_corpus_jsonl,
    save_corpus_text, save_store, Checkpoint,
};
use crate::report::{render_predictions_jsonl, ReportJson};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Restaurant,
    Support,
}

/// Writes `<out>.txt` (line format) and `<out>.jsonl` (sidecar with ids).
pub fn cmd_gen_data(domain: Domain, n_dialogs: usize, seed: u64, out: &Path) -> Result<(), CliError> {
    if n_dialogs == 0 {
        return Err(CliError::Usage("--n must be at least 1".to_string()));
    }
    let dialogs = match domain {
        Domain::Restaurant => generate_restaurant_corpus(n_dialogs, seed),
        Domain::Support => generate_support_corpus(n_dialogs, seed),
    };
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))
                .map_err(CliError::Runtime)?;
        }
    }
    let text_path = with_suffix(out, ".txt");
    let jsonl_path = with_suffix(out, ".jsonl");
    save_corpus_text(&text_path, &dialogs)?;
    save_corpus_jsonl(&jsonl_path, &dialogs)?;
    let turns: usize = dialogs.iter().map(Dialog::len).sum();
    println!(
        "wrote {} dialogs ({turns} turns) to {} and {}",
        dialogs.len(),
        text_path.display(),
        jsonl_path.display()
    );
    Ok(())
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{}{suffix}", base.display()))
}

/// Trains per the run configuration and writes the checkpoint plus a
/// `<checkpoint>.losses.tsv` log.
pub fn cmd_train(config_path: &Path) -> Result<(), CliError> {
    let config = RunConfig::load(config_path)?;
    let model_config = config.model_config();
    model_config
        .validate()
        .map_err(|e| CliError::Usage(format!("invalid model section: {e}")))?;

    let dialogs = load_corpus(&config.paths.corpus)?;
    let split = split_corpus(dialogs, config.seed)
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("splitting corpus: {e}")))?;
    let vocab = dialogforge_core::corpus::build_vocabulary(&split.train, config.vocab_min_count);
    let train_data = EncodedDialog::encode_all(&vocab, &split.train);
    let validation_data = EncodedDialog::encode_all(&vocab, &split.validation);

    println!(
        "training on {} dialogs (validation {}, test {}), vocabulary {}",
        split.train.len(),
        split.validation.len(),
        split.test.len(),
        vocab.len()
    );

    let params = Seq2SeqParams::init(&model_config, vocab.len(), config.seed);
    let outcome = train(params, &model_config, &config.train_config(), &train_data, &validation_data)
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("training failed: {e}")))?;

    for stats in &outcome.history {
        println!(
            "epoch {:>3}: train {:.4} validation {:.4} best {:.4}",
            stats.epoch, stats.train_loss, stats.validation_loss, stats.best_validation
        );
    }

    let checkpoint = Checkpoint {
        config: model_config,
        split_seed: config.seed,
        vocab,
        params: outcome.params,
    };
    if let Some(parent) = config.paths.checkpoint.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))
                .map_err(CliError::Runtime)?;
        }
    }
    save_checkpoint(&config.paths.checkpoint, &checkpoint)?;
    let log_path = with_suffix(&config.paths.checkpoint, ".losses.tsv");
    fs::write(&log_path, format_loss_log(&outcome.history))
        .with_context(|| format!("writing {}", log_path.display()))
        .map_err(CliError::Runtime)?;
    println!(
        "checkpoint written to {} (loss log {})",
        config.paths.checkpoint.display(),
        log_path.display()
    );
    Ok(())
}

fn resolve_seed(flag: Option<u64>, fallback: u64) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    if let Some(seed) = seed_from_env().map_err(CliError::Runtime)? {
        return Ok(seed);
    }
    Ok(fallback)
}

pub struct IndexArgs {
    pub checkpoint: PathBuf,
    pub corpus: PathBuf,
    pub mode: BeliefMode,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub leaf_size: usize,
    pub metric: DistanceMetric,
}

/// Harvests the state-action store from the training split and writes the
/// snapshot.
pub fn cmd_index(args: &IndexArgs) -> Result<(), CliError> {
    let checkpoint = load_checkpoint(&args.checkpoint)?;
    let dialogs = load_corpus(&args.corpus)?;
    let seed = resolve_seed(args.seed, checkpoint.split_seed)?;
    let split = split_corpus(dialogs, seed)
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("splitting corpus: {e}")))?;

    let store = extract_store(
        &checkpoint.params,
        &checkpoint.config,
        &checkpoint.vocab,
        &split.train,
        args.mode,
        StoreOptions { leaf_size: args.leaf_size, metric: args.metric },
    )
    .map_err(|e| CliError::Runtime(anyhow::anyhow!("extracting store: {e}")))?;

    save_store(&args.out, &store)?;
    println!(
        "indexed {} state-action pairs ({}, dimension {}) into {}",
        store.len(),
        store.mode().as_str(),
        store.dimension(),
        args.out.display()
    );
    Ok(())
}

/// The evaluated model variants, as one dispatchable value so evaluation
/// fan-out can share it across threads.
pub enum AnyResponder<'a> {
    Seq2Seq(Seq2SeqResponder<'a>),
    Nnb(NnbResponder<'a>),
    Hybrid(HybridResponder<'a>),
}

impl TurnResponder for AnyResponder<'_> {
    fn respond(&self, history: &TurnHistory<'_>) -> ModelResponse {
        match self {
            AnyResponder::Seq2Seq(r) => r.respond(history),
            AnyResponder::Nnb(r) => r.respond(history),
            AnyResponder::Hybrid(r) => r.respond(history),
        }
    }
}

pub struct EvalArgs {
    pub checkpoint: PathBuf,
    pub corpus: PathBuf,
    pub model: u8,
    pub store: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: usize,
}

/// Splits the corpus with the training seed, runs the selected model over
/// the test split, and writes the report JSON (and optionally the
/// predictions JSONL).
pub fn cmd_eval(args: &EvalArgs) -> Result<ReportJson, CliError> {
    let checkpoint = load_checkpoint(&args.checkpoint)?;
    let store = match args.model {
        1 | 2 => None,
        3 | 4 | 5 => {
            let path = args.store.as_ref().ok_or_else(|| {
                CliError::Usage(format!("model {} requires --store", args.model))
            })?;
            Some(load_store(path)?)
        }
        other => return Err(CliError::Usage(format!("unknown model {other}, expected 1-5"))),
    };

    match (args.model, checkpoint.config.use_context) {
        (1, true) => {
            return Err(CliError::Usage(
                "model 1 needs a checkpoint trained without context (use_context=false)".to_string(),
            ))
        }
        (2..=5, false) => {
            return Err(CliError::Usage(
                "models 2-5 need a checkpoint trained with context (use_context=true)".to_string(),
            ))
        }
        _ => {}
    }
    if let Some(store) = &store {
        let expected = match args.model {
            3 => BeliefMode::EncoderFinal,
            _ => BeliefMode::DecoderFinal,
        };
        if store.mode() != expected {
            return Err(CliError::Usage(format!(
                "model {} needs a {} store, found {}",
                args.model,
                expected.as_str(),
                store.mode().as_str()
            )));
        }
    }

    let dialogs = load_corpus(&args.corpus)?;
    let seed = resolve_seed(args.seed, checkpoint.split_seed)?;
    let split = split_corpus(dialogs, seed)
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("splitting corpus: {e}")))?;

    let responder = match args.model {
        1 | 2 => AnyResponder::Seq2Seq(Seq2SeqResponder {
            params: &checkpoint.params,
            config: &checkpoint.config,
            vocab: &checkpoint.vocab,
        }),
        3 | 4 => AnyResponder::Nnb(NnbResponder {
            params: &checkpoint.params,
            config: &checkpoint.config,
            vocab: &checkpoint.vocab,
            store: store.as_ref().expect("store checked above"),
        }),
        _ => AnyResponder::Hybrid(HybridResponder {
            params: &checkpoint.params,
            config: &checkpoint.config,
            vocab: &checkpoint.vocab,
            store: store.as_ref().expect("store checked above"),
        }),
    };

    let records = evaluate_with_threads(&responder, &split.test, args.threads);
    let report = report_from_records(&records)
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("aggregating report: {e}")))?;
    let report_json = ReportJson::new(&format!("model{}", args.model), &report);

    let rendered = report_json.to_pretty_string();
    match &args.report {
        Some(path) => {
            fs::write(path, &rendered)
                .with_context(|| format!("writing report {}", path.display()))
                .map_err(CliError::Runtime)?;
            println!("report written to {}", path.display());
        }
        None => print!("{rendered}"),
    }
    if let Some(path) = &args.predictions {
        fs::write(path, render_predictions_jsonl(&records))
            .with_context(|| format!("writing predictions {}", path.display()))
            .map_err(CliError::Runtime)?;
        println!("predictions written to {}", path.display());
    }
    Ok(report_json)
}

/// Fans evaluation out over contiguous dialog chunks and reassembles the
/// records in dialog order, so any thread count produces identical output.
pub fn evaluate_with_threads(
    responder: &AnyResponder<'_>,
    test: &[Dialog],
    threads: usize,
) -> Vec<PredictionRecord> {
    let threads = threads.max(1).min(test.len().max(1));
    if threads == 1 {
        return collect_predictions(responder, test);
    }
    let chunk_size = test.len().div_ceil(threads);
    let mut chunks: Vec<Vec<PredictionRecord>> = Vec::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = test
            .chunks(chunk_size)
            .map(|chunk| scope.spawn(move || collect_predictions(responder, chunk)))
            .collect();
        for handle in handles {
            chunks.push(handle.join().expect("evaluation thread panicked"));
        }
    });
    chunks.into_iter().flatten().collect()
}
