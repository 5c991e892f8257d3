//! Evaluation metrics: corpus BLEU, exact query match, api-call timing
//! precision/recall/accuracy, length and unigram diagnostics, and the
//! turn-by-turn evaluation harness shared by every model variant.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::{Dialog, Utterance};
use crate::hybrid::{is_api_call, ResponseSource};

const MAX_ORDER: usize = 4;
const SMOOTHING_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricsError {
    EmptyInput,
    LengthMismatch { candidates: usize, references: usize },
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::EmptyInput => write!(f, "candidate/reference lists are empty"),
            MetricsError::LengthMismatch { candidates, references } => {
                write!(f, "{candidates} candidates vs {references} references")
            }
        }
    }
}

impl core::error::Error for MetricsError {}

/// Clipped n-gram counts pooled over a corpus: numerator and denominator of
/// the modified n-gram precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NgramPrecision {
    pub clipped: u64,
    pub total: u64,
}

impl NgramPrecision {
    pub fn ratio(self) -> Option<f64> {
        (self.total > 0).then(|| self.clipped as f64 / self.total as f64)
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> BTreeMap<&[String], u64> {
    let mut counts = BTreeMap::new();
    if n > 0 && tokens.len() >= n {
        for window in tokens.windows(n) {
            *counts.entry(window).or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus-level modified n-gram precision: per candidate, each n-gram count
/// is clipped at its count in the aligned reference; numerator and
/// denominator are summed over all pairs.
pub fn modified_ngram_precision(
    candidates: &[Utterance],
    references: &[Utterance],
    n: usize,
) -> Result<NgramPrecision, MetricsError> {
    check_aligned(candidates, references)?;
    let mut clipped = 0;
    let mut total = 0;
    for (candidate, reference) in candidates.iter().zip(references) {
        let cand = ngram_counts(candidate.tokens(), n);
        let reference = ngram_counts(reference.tokens(), n);
        for (gram, count) in cand {
            clipped += count.min(reference.get(gram).copied().unwrap_or(0));
            total += count;
        }
    }
    Ok(NgramPrecision { clipped, total })
}

fn check_aligned(candidates: &[Utterance], references: &[Utterance]) -> Result<(), MetricsError> {
    if candidates.len() != references.len() {
        return Err(MetricsError::LengthMismatch {
            candidates: candidates.len(),
            references: references.len(),
        });
    }
    if candidates.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    Ok(())
}

/// Corpus BLEU-4 in [0, 100]: geometric mean of modified n-gram precisions
/// with uniform weights, brevity penalty `exp(1 - r/c)` when the pooled
/// candidate length `c` does not exceed the pooled reference length `r`.
/// Orders with no candidate n-grams are dropped from the mean; orders with
/// candidate n-grams but zero matches contribute an epsilon precision.
pub fn bleu(candidates: &[Utterance], references: &[Utterance]) -> Result<f64, MetricsError> {
    check_aligned(candidates, references)?;

    let mut log_sum = 0.0;
    let mut included = 0;
    for n in 1..=MAX_ORDER {
        let counts = modified_ngram_precision(candidates, references, n)?;
        if counts.total == 0 {
            continue;
        }
        let precision = if counts.clipped == 0 {
            SMOOTHING_EPSILON
        } else {
            counts.clipped as f64 / counts.total as f64
        };
        log_sum += libm::log(precision);
        included += 1;
    }
    if included == 0 {
        return Ok(0.0);
    }

    let cand_len: u64 = candidates.iter().map(|c| c.len() as u64).sum();
    let ref_len: u64 = references.iter().map(|r| r.len() as u64).sum();
    let brevity = if cand_len <= ref_len {
        libm::exp(1.0 - ref_len as f64 / cand_len as f64)
    } else {
        1.0
    };
    Ok(brevity * libm::exp(log_sum / included as f64) * 100.0)
}

/// Exact query match over the reference api_call turns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqmResult {
    pub value: f64,
    pub matched: u64,
    pub reference_api_turns: u64,
    /// True when the corpus contains no reference api_call turns.
    pub degenerate: bool,
}

/// Fraction of reference api_call turns whose prediction equals the
/// reference token-for-token; partial matches earn no credit. Returns 0
/// with the degenerate flag when no reference turn is an api_call.
pub fn eqm(predictions: &[Utterance], references: &[Utterance]) -> Result<EqmResult, MetricsError> {
    check_aligned(predictions, references)?;
    let mut matched = 0;
    let mut total = 0;
    for (prediction, reference) in predictions.iter().zip(references) {
        if is_api_call(reference) {
            total += 1;
            if prediction == reference {
                matched += 1;
            }
        }
    }
    Ok(EqmResult {
        value: if total == 0 { 0.0 } else { matched as f64 / total as f64 },
        matched,
        reference_api_turns: total,
        degenerate: total == 0,
    })
}

/// Binary confusion counts for the "emit an api_call this turn" decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub true_negatives: u64,
}

impl ConfusionCounts {
    pub fn scored_turns(&self) -> u64 {
        self.true_positives + self.false_positives + self.false_negatives + self.true_negatives
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApiTiming {
    pub counts: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    /// True when precision or recall hit a 0/0 and were reported as 1.0.
    pub degenerate: bool,
}

/// Precision/recall/accuracy of api_call timing; a 0/0 ratio is reported
/// as 1.0 and flagged.
pub fn api_timing(predictions: &[Utterance], references: &[Utterance]) -> Result<ApiTiming, MetricsError> {
    check_aligned(predictions, references)?;
    let mut counts = ConfusionCounts::default();
    for (prediction, reference) in predictions.iter().zip(references) {
        match (is_api_call(prediction), is_api_call(reference)) {
            (true, true) => counts.true_positives += 1,
            (true, false) => counts.false_positives += 1,
            (false, true) => counts.false_negatives += 1,
            (false, false) => counts.true_negatives += 1,
        }
    }
    let mut degenerate = false;
    let mut ratio = |num: u64, den: u64| {
        if den == 0 {
            degenerate = true;
            1.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(counts.true_positives, counts.true_positives + counts.false_positives);
    let recall = ratio(counts.true_positives, counts.true_positives + counts.false_negatives);
    let accuracy = (counts.true_positives + counts.true_negatives) as f64 / counts.scored_turns() as f64;
    Ok(ApiTiming { counts, precision, recall, accuracy, degenerate })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub avg_gen_len: f64,
    pub avg_ref_len: f64,
    /// Normalized unigram frequency of the generated text.
    pub unigram_dist: BTreeMap<String, f64>,
}

/// Mean surface lengths plus the unigram distribution of generated text;
/// placeholder tokens count like any other token.
pub fn length_and_unigram_diagnostics(
    generated: &[Utterance],
    references: &[Utterance],
) -> Result<Diagnostics, MetricsError> {
    check_aligned(generated, references)?;
    let gen_tokens: u64 = generated.iter().map(|u| u.len() as u64).sum();
    let ref_tokens: u64 = references.iter().map(|u| u.len() as u64).sum();

    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for utterance in generated {
        for token in utterance.tokens() {
            *counts.entry(token.clone()).or_insert(0) += 1;
        }
    }
    let unigram_dist = counts
        .into_iter()
        .map(|(token, count)| (token, count as f64 / gen_tokens as f64))
        .collect();

    Ok(Diagnostics {
        avg_gen_len: gen_tokens as f64 / generated.len() as f64,
        avg_ref_len: ref_tokens as f64 / references.len() as f64,
        unigram_dist,
    })
}

/// Dialog history visible to a model when predicting turn `t`: the user's
/// utterances through turn `t` and the true agent responses through turn
/// `t - 1`.
#[derive(Debug, Clone, Copy)]
pub struct TurnHistory<'a> {
    pub users: &'a [Utterance],
    pub agents: &'a [Utterance],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelResponse {
    pub utterance: Utterance,
    pub source: ResponseSource,
}

/// A model evaluated turn by turn under the offline protocol.
pub trait TurnResponder {
    fn respond(&self, history: &TurnHistory<'_>) -> ModelResponse;
}

/// One scored turn, as dumped to the predictions JSONL.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionRecord {
    pub dialog_id: String,
    pub turn: u32,
    pub reference: Utterance,
    pub prediction: Utterance,
    pub source: ResponseSource,
}

/// Full evaluation of one model on one test corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub bleu: f64,
    /// Mean of per-turn BLEU, reported alongside the corpus score.
    pub bleu_turn_mean: f64,
    pub eqm: EqmResult,
    pub timing: ApiTiming,
    pub avg_gen_len: f64,
    pub avg_ref_len: f64,
    pub unigram_dist: BTreeMap<String, f64>,
    pub scored_turns: u64,
}

/// Runs `model` over every turn of every test dialog, feeding it the user
/// utterances so far plus the true prior agent responses.
pub fn collect_predictions(model: &dyn TurnResponder, test: &[Dialog]) -> Vec<PredictionRecord> {
    let mut records = Vec::new();
    for dialog in test {
        let users: Vec<Utterance> = dialog.turns().iter().map(|t| t.user.clone()).collect();
        let agents: Vec<Utterance> = dialog.turns().iter().map(|t| t.agent.clone()).collect();
        for t in 0..dialog.len() {
            let history = TurnHistory { users: &users[..=t], agents: &agents[..t] };
            let response = model.respond(&history);
            records.push(PredictionRecord {
                dialog_id: dialog.id().to_string(),
                turn: t as u32 + 1,
                reference: agents[t].clone(),
                prediction: response.utterance,
                source: response.source,
            });
        }
    }
    records
}

/// Aggregates scored turns into a report. Pure fold: every metric is a sum
/// over turns, so record order does not affect any value.
pub fn report_from_records(records: &[PredictionRecord]) -> Result<EvalReport, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let predictions: Vec<Utterance> = records.iter().map(|r| r.prediction.clone()).collect();
    let references: Vec<Utterance> = records.iter().map(|r| r.reference.clone()).collect();

    let corpus_bleu = bleu(&predictions, &references)?;
    let mut turn_sum = 0.0;
    for (prediction, reference) in predictions.iter().zip(&references) {
        turn_sum += bleu(core::slice::from_ref(prediction), core::slice::from_ref(reference))?;
    }
    let eqm_result = eqm(&predictions, &references)?;
    let timing = api_timing(&predictions, &references)?;
    let diagnostics = length_and_unigram_diagnostics(&predictions, &references)?;

    Ok(EvalReport {
        bleu: corpus_bleu,
        bleu_turn_mean: turn_sum / records.len() as f64,
        eqm: eqm_result,
        timing,
        avg_gen_len: diagnostics.avg_gen_len,
        avg_ref_len: diagnostics.avg_ref_len,
        unigram_dist: diagnostics.unigram_dist,
        scored_turns: records.len() as u64,
    })
}

/// Evaluates a model on a test split under the offline protocol.
pub fn evaluate_model(
    model: &dyn TurnResponder,
    test: &[Dialog],
) -> Result<(EvalReport, Vec<PredictionRecord>), MetricsError> {
    let records = collect_predictions(model, test);
    let report = report_from_records(&records)?;
    Ok((report, records))
}
