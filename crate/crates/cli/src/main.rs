use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use dialogforge::chat::{cmd_chat, ChatArgs};
use dialogforge::commands::{cmd_eval, cmd_gen_data, cmd_index, cmd_train, Domain, EvalArgs, IndexArgs};
use dialogforge_core::belief::{BeliefMode, DistanceMetric};

#[derive(Parser)]
#[command(name = "dialogforge", version, about = "Task-oriented dialog workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DomainArg {
    Restaurant,
    Support,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    EncoderFinal,
    DecoderFinal,
    Concat,
}

impl From<ModeArg> for BeliefMode {
    fn from(value: ModeArg) -> Self {
        match value {
            ModeArg::EncoderFinal => BeliefMode::EncoderFinal,
            ModeArg::DecoderFinal => BeliefMode::DecoderFinal,
            ModeArg::Concat => BeliefMode::Concat,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Euclidean,
    Cosine,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus (text format plus JSONL sidecar).
    GenData {
        #[arg(long, value_enum)]
        domain: DomainArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Output basename; writes <out>.txt and <out>.jsonl.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model per a JSON run configuration.
    Train {
        #[arg(long)]
        config: PathBuf,
    },
    /// Build a state-action store from a checkpoint and its training split.
    Index {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        out: PathBuf,
        /// Corpus split seed; defaults to the seed recorded in the checkpoint.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 32)]
        leaf_size: usize,
        #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
        metric: MetricArg,
    },
    /// Evaluate model 1-5 on the test split and emit the report JSON.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        /// 1 contextless, 2 context-threaded, 3 retrieval (encoder),
        /// 4 retrieval (decoder), 5 hybrid of 2 and 4.
        #[arg(long)]
        model: u8,
        #[arg(long)]
        store: Option<PathBuf>,
        /// Report JSON path; stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Predictions JSONL path; skipped when omitted.
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// Corpus split seed; defaults to the seed recorded in the checkpoint.
        #[arg(long)]
        seed: Option<u64>,
        /// Evaluation fan-out; any value produces identical output.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Chat with a trained model interactively.
    Chat {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        model: u8,
        #[arg(long)]
        store: Option<PathBuf>,
        /// Lingo lexicon file: one shortform<TAB>expansion per line.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Person-name list for de-identification, one per line.
        #[arg(long)]
        person_names: Option<PathBuf>,
        /// Brand terms to mask, one per line.
        #[arg(long)]
        brand_terms: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenData { domain, n, seed, out } => {
            let domain = match domain {
                DomainArg::Restaurant => Domain::Restaurant,
                DomainArg::Support => Domain::Support,
            };
            cmd_gen_data(domain, n, seed, &out)
        }
        Command::Train { config } => cmd_train(&config),
        Command::Index { checkpoint, corpus, mode, out, seed, leaf_size, metric } => {
            cmd_index(&IndexArgs {
                checkpoint,
                corpus,
                mode: mode.into(),
                out,
                seed,
                leaf_size,
                metric: match metric {
                    MetricArg::Euclidean => DistanceMetric::Euclidean,
                    MetricArg::Cosine => DistanceMetric::Cosine,
                },
            })
        }
        Command::Eval { checkpoint, corpus, model, store, report, predictions, seed, threads } => {
            cmd_eval(&EvalArgs { checkpoint, corpus, model, store, report, predictions, seed, threads })
                .map(|_| ())
        }
        Command::Chat { checkpoint, model, store, lexicon, person_names, brand_terms } => {
            cmd_chat(&ChatArgs { checkpoint, model, store, lexicon, person_names, brand_terms })
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
