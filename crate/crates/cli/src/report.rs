//! Evaluation report JSON (schema shipped in `schemas/eval_report.schema.json`)
//! and the predictions JSONL audit dump.

use std::collections::BTreeMap;

use serde::Serialize;

use dialogforge_core::metrics::{EvalReport, PredictionRecord};

/// Flat JSON shape of one evaluation run.
#[derive(Debug, Clone, Serialize)]
pub struct ReportJson {
    pub model: String,
    pub bleu: f64,
    pub bleu_turn_mean: f64,
    pub eqm: f64,
    pub eqm_matched: u64,
    pub eqm_reference_api_turns: u64,
    pub eqm_degenerate: bool,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub timing_degenerate: bool,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    pub scored_turns: u64,
    pub avg_gen_len: f64,
    pub avg_ref_len: f64,
    pub unigram_dist: BTreeMap<String, f64>,
}

impl ReportJson {
    pub fn new(model: &str, report: &EvalReport) -> Self {
        Self {
            model: model.to_string(),
            bleu: report.bleu,
            bleu_turn_mean: report.bleu_turn_mean,
            eqm: report.eqm.value,
            eqm_matched: report.eqm.matched,
            eqm_reference_api_turns: report.eqm.reference_api_turns,
            eqm_degenerate: report.eqm.degenerate,
            precision: report.timing.precision,
            recall: report.timing.recall,
            accuracy: report.timing.accuracy,
            timing_degenerate: report.timing.degenerate,
            tp: report.timing.counts.true_positives,
            fp: report.timing.counts.false_positives,
            fn_: report.timing.counts.false_negatives,
            tn: report.timing.counts.true_negatives,
            scored_turns: report.scored_turns,
            avg_gen_len: report.avg_gen_len,
            avg_ref_len: report.avg_ref_len,
            unigram_dist: report.unigram_dist.iter().map(|(k, v)| (k.clone(), *v)).collect(),
        }
    }

    pub fn to_pretty_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// One JSONL line per scored turn.
pub fn render_predictions_jsonl(records: &[PredictionRecord]) -> String {
    let mut out = String::new();
    for record in records {
        let line = serde_json::json!({
            "dialog": record.dialog_id,
            "turn": record.turn,
            "reference": record.reference.text(),
            "prediction": record.prediction.text(),
            "source": record.source.as_str(),
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}
