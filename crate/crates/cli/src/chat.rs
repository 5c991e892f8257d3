//! Interactive chat over trained artifacts. Unlike batch evaluation, the
//! session has no ground-truth agent turns, so the history carries the
//! system's own prior responses; both paths share the same core
//! history-encoding function.

use std::io::{BufRead, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};

use dialogforge_core::corpus::{normalize_utterance, NormalizeRules, Utterance};
use dialogforge_core::metrics::{TurnHistory, TurnResponder};
use dialogforge_core::responders::{HybridResponder, NnbResponder, Seq2SeqResponder};

use crate::commands::AnyResponder;
use crate::formats::{load_checkpoint, load_normalize_rules, load_store};
use crate::CliError;

pub struct ChatArgs {
    pub checkpoint: PathBuf,
    pub model: u8,
    pub store: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub person_names: Option<PathBuf>,
    pub brand_terms: Option<PathBuf>,
}

/// Runs one chat session: reads user lines, answers each, and feeds the
/// system's own responses back as the agent side of the history. An empty
/// line sends `<SILENCE>`; `/reset` starts a fresh dialog.
pub fn run_chat<R: BufRead, W: Write>(
    input: R,
    mut output: W,
    responder: &dyn TurnResponder,
    vocab: &dialogforge_core::corpus::Vocabulary,
    rules: &NormalizeRules,
) -> Result<()> {
    let mut users: Vec<Utterance> = Vec::new();
    let mut agents: Vec<Utterance> = Vec::new();

    writeln!(output, "dialogforge chat; empty line sends <SILENCE>, /reset clears, ctrl-d exits")?;
    write!(output, "you> ")?;
    output.flush()?;
    for line in input.lines() {
        let line = line.context("reading input line")?;
        let trimmed = line.trim();
        if trimmed == "/reset" {
            users.clear();
            agents.clear();
            writeln!(output, "(history cleared)")?;
            write!(output, "you> ")?;
            output.flush()?;
            continue;
        }
        let user = if trimmed.is_empty() {
            Utterance::silence()
        } else {
            match normalize_utterance(trimmed, rules, Some(vocab)) {
                Ok(utterance) => utterance,
                Err(e) => {
                    writeln!(output, "(could not read that: {e})")?;
                    write!(output, "you> ")?;
                    output.flush()?;
                    continue;
                }
            }
        };

        users.push(user);
        let response = responder.respond(&TurnHistory { users: &users, agents: &agents });
        writeln!(output, "agent[{}]> {}", response.source.as_str(), response.utterance.text())?;
        agents.push(response.utterance);
        write!(output, "you> ")?;
        output.flush()?;
    }
    writeln!(output)?;
    Ok(())
}

pub fn cmd_chat(args: &ChatArgs) -> Result<(), CliError> {
    let checkpoint = load_checkpoint(&args.checkpoint)?;
    let store = match args.model {
        1 | 2 => None,
        3 | 4 | 5 => {
            let path = args
                .store
                .as_ref()
                .ok_or_else(|| CliError::Usage(format!("model {} requires --store", args.model)))?;
            Some(load_store(path)?)
        }
        other => return Err(CliError::Usage(format!("unknown model {other}, expected 1-5"))),
    };
    let rules = load_normalize_rules(
        args.lexicon.as_deref(),
        args.person_names.as_deref(),
        args.brand_terms.as_deref(),
    )?;

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

    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    run_chat(stdin.lock(), stdout.lock(), &responder, &checkpoint.vocab, &rules)
        .map_err(CliError::Runtime)
}
