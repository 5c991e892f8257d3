use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::{BOS_ID, EOS_ID, PAD_ID};

use super::math::{sigmoid, softmax, tanh, Mat};
use super::params::LstmWeights;
use super::{EncodedDialog, ModelConfig, Seq2SeqError, Seq2SeqParams, TurnState};

/// Everything one LSTM step needs to replay itself backwards.
#[derive(Debug, Clone)]
pub(super) struct StepCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    /// Post-activation gates, stacked [input, forget, cell, output].
    pub gates: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

pub(super) fn lstm_step(w: &LstmWeights, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> StepCache {
    let hidden = w.hidden_dim();
    let mut gates = vec![0.0; 4 * hidden];
    w.wx.matvec(x, &mut gates);
    let mut recur = vec![0.0; 4 * hidden];
    w.wh.matvec(h_prev, &mut recur);
    for ((g, r), b) in gates.iter_mut().zip(&recur).zip(&w.b) {
        *g += r + b;
    }
    for g in gates[..2 * hidden].iter_mut() {
        *g = sigmoid(*g);
    }
    for g in gates[2 * hidden..3 * hidden].iter_mut() {
        *g = tanh(*g);
    }
    for g in gates[3 * hidden..].iter_mut() {
        *g = sigmoid(*g);
    }

    let mut c = vec![0.0; hidden];
    let mut tanh_c = vec![0.0; hidden];
    let mut h = vec![0.0; hidden];
    for j in 0..hidden {
        c[j] = gates[hidden + j] * c_prev[j] + gates[j] * gates[2 * hidden + j];
        tanh_c[j] = tanh(c[j]);
        h[j] = gates[3 * hidden + j] * tanh_c[j];
    }

    StepCache { x: x.to_vec(), h_prev: h_prev.to_vec(), c_prev: c_prev.to_vec(), gates, c, tanh_c, h }
}

fn embed(embedding: &Mat, token: u32) -> &[f64] {
    embedding.row(token as usize)
}

/// Final encoder state of one turn: both halves of the LSTM state. The
/// hidden part is the context vector and belief-state material; the cell
/// part seeds the decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderFinal {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

pub(super) struct EncoderRun {
    pub steps: Vec<StepCache>,
    pub tokens: Vec<u32>,
}

impl EncoderRun {
    pub fn final_state(&self) -> EncoderFinal {
        let last = self.steps.last().expect("encoder input is non-empty");
        EncoderFinal { h: last.h.clone(), c: last.c.clone() }
    }
}

fn check_context(
    config: &ModelConfig,
    prev_context: Option<&[f64]>,
) -> Result<Option<Vec<f64>>, Seq2SeqError> {
    match (config.use_context, prev_context) {
        (false, None) => Ok(None),
        (false, Some(ctx)) => Err(Seq2SeqError::ShapeMismatch { expected: 0, found: ctx.len() }),
        (true, None) => Ok(Some(vec![0.0; config.hidden_dim])),
        (true, Some(ctx)) => {
            if ctx.len() != config.hidden_dim {
                return Err(Seq2SeqError::ShapeMismatch {
                    expected: config.hidden_dim,
                    found: ctx.len(),
                });
            }
            Ok(Some(ctx.to_vec()))
        }
    }
}

pub(super) fn run_encoder(
    params: &Seq2SeqParams,
    config: &ModelConfig,
    user_tokens: &[u32],
    prev_context: Option<&[f64]>,
) -> Result<EncoderRun, Seq2SeqError> {
    if user_tokens.is_empty() {
        return Err(Seq2SeqError::EmptyInput);
    }
    let context = check_context(config, prev_context)?;

    let hidden = config.hidden_dim;
    let mut h = vec![0.0; hidden];
    let mut c = vec![0.0; hidden];
    let mut steps = Vec::with_capacity(user_tokens.len());
    let mut x = vec![0.0; config.encoder_input_dim()];
    for &token in user_tokens {
        let emb = embed(&params.embedding, token);
        x[..config.embed_dim].copy_from_slice(emb);
        if let Some(ctx) = &context {
            x[config.embed_dim..].copy_from_slice(ctx);
        }
        let step = lstm_step(&params.encoder, &x, &h, &c);
        h.copy_from_slice(&step.h);
        c.copy_from_slice(&step.c);
        steps.push(step);
    }
    Ok(EncoderRun { steps, tokens: user_tokens.to_vec() })
}

/// Runs the encoder over one user utterance. Turn 1 of a context-threaded
/// model passes `None` and gets the zero context; later turns pass the
/// previous turn's final encoder hidden state.
pub fn encode_turn(
    params: &Seq2SeqParams,
    config: &ModelConfig,
    user_tokens: &[u32],
    prev_context: Option<&[f64]>,
) -> Result<EncoderFinal, Seq2SeqError> {
    Ok(run_encoder(params, config, user_tokens, prev_context)?.final_state())
}

/// Teacher-forced decoder pass over one agent response.
pub(super) struct DecoderRun {
    pub steps: Vec<StepCache>,
    /// Decoder inputs: `<BOS>` followed by the agent tokens.
    pub inputs: Vec<u32>,
    /// Prediction targets: the agent tokens followed by `<EOS>`.
    pub targets: Vec<u32>,
    /// Softmax outputs, one distribution per target position.
    pub probs: Vec<Vec<f64>>,
}

/// Decoder step input: the token embedding with the encoded utterance
/// vector appended, so every step re-reads the encoder summary.
pub(super) fn decoder_input(params: &Seq2SeqParams, token: u32, summary: &[f64], buf: &mut [f64]) {
    let embed_dim = params.embedding.cols();
    buf[..embed_dim].copy_from_slice(embed(&params.embedding, token));
    buf[embed_dim..].copy_from_slice(summary);
}

pub(super) fn run_decoder_teacher_forced(
    params: &Seq2SeqParams,
    init: &EncoderFinal,
    agent_tokens: &[u32],
) -> DecoderRun {
    let mut inputs = Vec::with_capacity(agent_tokens.len() + 1);
    inputs.push(BOS_ID);
    inputs.extend_from_slice(agent_tokens);
    let mut targets = Vec::with_capacity(agent_tokens.len() + 1);
    targets.extend_from_slice(agent_tokens);
    targets.push(EOS_ID);

    let mut h = init.h.clone();
    let mut c = init.c.clone();
    let mut steps = Vec::with_capacity(inputs.len());
    let mut probs = Vec::with_capacity(inputs.len());
    let mut x = vec![0.0; params.decoder.input_dim()];
    for &token in &inputs {
        decoder_input(params, token, &init.h, &mut x);
        let step = lstm_step(&params.decoder, &x, &h, &c);
        h.copy_from_slice(&step.h);
        c.copy_from_slice(&step.c);
        let mut logits = vec![0.0; params.vocab_size()];
        params.out_w.matvec(&step.h, &mut logits);
        for (l, b) in logits.iter_mut().zip(&params.out_b) {
            *l += b;
        }
        softmax(&mut logits);
        probs.push(logits);
        steps.push(step);
    }
    DecoderRun { steps, inputs, targets, probs }
}

/// Forward pass over one turn, teacher-forced.
pub struct TurnForward {
    pub(super) encoder: EncoderRun,
    pub(super) decoder: DecoderRun,
}

impl TurnForward {
    /// Output distributions, one per agent-token position (including the
    /// final `<EOS>` position).
    pub fn distributions(&self) -> &[Vec<f64>] {
        &self.decoder.probs
    }

    pub fn targets(&self) -> &[u32] {
        &self.decoder.targets
    }

    pub fn state(&self) -> TurnState {
        let enc = self.encoder.final_state();
        let dec = self.decoder.steps.last().expect("decoder consumed at least <BOS>");
        TurnState { encoder_final: enc.h, decoder_final: dec.h.clone(), truncated: false }
    }
}

/// Teacher-forced forward pass over a whole dialog. The context passed to
/// turn `t + 1` is turn `t`'s final encoder hidden state.
pub struct DialogForward {
    pub turns: Vec<TurnForward>,
}

impl DialogForward {
    pub fn states(&self) -> Vec<TurnState> {
        self.turns.iter().map(TurnForward::state).collect()
    }

    /// Summed negative log likelihood and scored-position count.
    pub fn nll(&self) -> (f64, usize) {
        let mut sum = 0.0;
        let mut count = 0;
        for turn in &self.turns {
            let (s, c) = nll_sum(turn.distributions(), turn.targets());
            sum += s;
            count += c;
        }
        (sum, count)
    }
}

pub fn forward_dialog(
    params: &Seq2SeqParams,
    config: &ModelConfig,
    dialog: &EncodedDialog,
) -> Result<DialogForward, Seq2SeqError> {
    let mut turns = Vec::with_capacity(dialog.turns.len());
    let mut context: Option<Vec<f64>> = None;
    for turn in &dialog.turns {
        let encoder = run_encoder(params, config, &turn.user, context.as_deref())?;
        let final_state = encoder.final_state();
        if config.use_context {
            context = Some(final_state.h.clone());
        }
        let decoder = run_decoder_teacher_forced(params, &final_state, &turn.agent);
        turns.push(TurnForward { encoder, decoder });
    }
    Ok(DialogForward { turns })
}

/// Summed negative log probability of the targets, skipping `<PAD>`
/// positions; returns the sum and the number of scored positions.
pub fn nll_sum(distributions: &[Vec<f64>], targets: &[u32]) -> (f64, usize) {
    debug_assert_eq!(distributions.len(), targets.len());
    let mut sum = 0.0;
    let mut count = 0;
    for (dist, &target) in distributions.iter().zip(targets) {
        if target == PAD_ID {
            continue;
        }
        sum -= libm::log(dist[target as usize].max(f64::MIN_POSITIVE));
        count += 1;
    }
    (sum, count)
}

/// Mean negative log probability of the targets over all non-`<PAD>`
/// positions.
pub fn loss(distributions: &[Vec<f64>], targets: &[u32]) -> f64 {
    let (sum, count) = nll_sum(distributions, targets);
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Folds the encoder over the user utterances before the current turn and
/// returns the context vector the current turn should see: `None` for a
/// model without context threading, the zero vector for turn 1, and the
/// previous turn's final encoder hidden state otherwise.
///
/// Batch evaluation and the interactive session both encode history through
/// this one function.
pub fn history_context(
    params: &Seq2SeqParams,
    config: &ModelConfig,
    previous_users: &[Vec<u32>],
) -> Result<Option<Vec<f64>>, Seq2SeqError> {
    if !config.use_context {
        return Ok(None);
    }
    let mut context = vec![0.0; config.hidden_dim];
    for user in previous_users {
        context = encode_turn(params, config, user, Some(&context))?.h;
    }
    Ok(Some(context))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::UNK_ID;

    fn config(use_context: bool) -> ModelConfig {
        ModelConfig { embed_dim: 4, hidden_dim: 6, max_decode_len: 8, use_context }
    }

    fn dialog(turns: &[(&[u32], &[u32])]) -> EncodedDialog {
        EncodedDialog {
            id: alloc::string::String::from("d"),
            turns: turns
                .iter()
                .map(|(u, a)| super::super::EncodedTurn { user: u.to_vec(), agent: a.to_vec() })
                .collect(),
        }
    }

    #[test]
    fn context_to_contextless_model_is_shape_mismatch() {
        let cfg = config(false);
        let params = Seq2SeqParams::init(&cfg, 12, 0);
        let ctx = vec![0.0; 6];
        assert!(matches!(
            encode_turn(&params, &cfg, &[5], Some(&ctx)),
            Err(Seq2SeqError::ShapeMismatch { expected: 0, .. })
        ));
    }

    #[test]
    fn wrong_context_dimension_is_shape_mismatch() {
        let cfg = config(true);
        let params = Seq2SeqParams::init(&cfg, 12, 0);
        let ctx = vec![0.0; 5];
        assert!(matches!(
            encode_turn(&params, &cfg, &[5], Some(&ctx)),
            Err(Seq2SeqError::ShapeMismatch { expected: 6, found: 5 })
        ));
    }

    #[test]
    fn single_token_equals_one_step_from_zero_state() {
        let cfg = config(false);
        let params = Seq2SeqParams::init(&cfg, 12, 3);
        let out = encode_turn(&params, &cfg, &[7], None).unwrap();
        let step = lstm_step(&params.encoder, params.embedding.row(7), &[0.0; 6], &[0.0; 6]);
        assert_eq!(out.h, step.h);
        assert_eq!(out.c, step.c);
    }

    #[test]
    fn forward_is_deterministic() {
        let cfg = config(true);
        let params = Seq2SeqParams::init(&cfg, 12, 3);
        let a = encode_turn(&params, &cfg, &[5, 6, 7], None).unwrap();
        let b = encode_turn(&params, &cfg, &[5, 6, 7], None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn distributions_are_normalized() {
        let cfg = config(true);
        let params = Seq2SeqParams::init(&cfg, 12, 5);
        let fwd = forward_dialog(&params, &cfg, &dialog(&[(&[5, 6], &[7, 8]), (&[9], &[10])])).unwrap();
        for turn in &fwd.turns {
            for dist in turn.distributions() {
                let sum: f64 = dist.iter().sum();
                assert!((sum - 1.0).abs() < 1e-6);
                assert!(dist.iter().all(|&p| p >= 0.0));
            }
        }
    }

    #[test]
    fn contextless_turns_are_order_independent() {
        let cfg = config(false);
        let params = Seq2SeqParams::init(&cfg, 12, 5);
        let ab = forward_dialog(&params, &cfg, &dialog(&[(&[5, 6], &[7]), (&[9, 10], &[11])])).unwrap();
        let ba = forward_dialog(&params, &cfg, &dialog(&[(&[9, 10], &[11]), (&[5, 6], &[7])])).unwrap();
        assert_eq!(ab.turns[0].distributions(), ba.turns[1].distributions());
        assert_eq!(ab.turns[1].distributions(), ba.turns[0].distributions());
    }

    // Perturbation probe on a fixed random parameter set: with context
    // threading, changing turn 1 must change turn 2's outputs.
    #[test]
    fn context_model_turn_two_depends_on_turn_one()  {
        let cfg = config(true);
        let params = Seq2SeqParams::init(&cfg, 12, 5);
        let base = forward_dialog(&params, &cfg, &dialog(&[(&[5, 6], &[7]), (&[9], &[10])])).unwrap();
        let perturbed =
            forward_dialog(&params, &cfg, &dialog(&[(&[UNK_ID, UNK_ID], &[7]), (&[9], &[10])])).unwrap();
        let a = &base.turns[1].distributions()[0];
        let b = &perturbed.turns[1].distributions()[0];
        let max_diff = a
            .iter()
            .zip(b)
            .map(|(x, y)| libm::fabs(x - y))
            .fold(0.0_f64, f64::max);
        assert!(max_diff > 1e-9, "turn 2 ignored turn 1 (max diff {max_diff})");
    }

    #[test]
    fn loss_is_zero_on_certain_predictions_and_ln_v_on_uniform() {
        let v = 12;
        let mut certain = vec![vec![0.0; v]; 3];
        for (i, dist) in certain.iter_mut().enumerate() {
            dist[i + 1] = 1.0;
        }
        assert!(loss(&certain, &[1, 2, 3]) < 1e-12);

        let uniform = vec![vec![1.0 / v as f64; v]; 4];
        let expected = libm::log(v as f64);
        assert!((loss(&uniform, &[1, 2, 3, 4]) - expected).abs() < 1e-12);
    }

    // Scalar oracle computed by hand for a three-position case.
    #[test]
    fn loss_matches_hand_computed_value() {
        let dists = vec![
            vec![0.2, 0.5, 0.3],
            vec![0.1, 0.1, 0.8],
            vec![0.6, 0.3, 0.1],
        ];
        let targets = [1, 2, 1];
        let expected = -(libm::log(0.5) + libm::log(0.8) + libm::log(0.3)) / 3.0;
        assert!((loss(&dists, &targets) - expected).abs() < 1e-15);
    }

    #[test]
    fn pad_positions_are_excluded() {
        let dists = vec![vec![0.25, 0.25, 0.25, 0.25]; 2];
        let full = loss(&dists, &[1, 2]);
        let padded = loss(&dists, &[1, PAD_ID]);
        assert!((full - libm::log(4.0)).abs() < 1e-12);
        assert!((padded - libm::log(4.0)).abs() < 1e-12);
        let (_, count) = nll_sum(&dists, &[1, PAD_ID]);
        assert_eq!(count, 1);
    }
}
