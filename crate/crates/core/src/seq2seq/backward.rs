use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::PAD_ID;

use super::forward::StepCache;
use super::math::axpy;
use super::params::LstmWeights;
use super::{DialogForward, EncodedDialog, ModelConfig, Seq2SeqError, Seq2SeqParams};

/// Backward through one LSTM step. `d_h`/`d_c` are the incoming gradients
/// at this step's outputs; `d_x`, `d_h_prev`, `d_c_prev` are overwritten
/// with the gradients at its inputs, and the weight gradients accumulate
/// into `grads`.
fn lstm_backward_step(
    w: &LstmWeights,
    grads: &mut LstmWeights,
    cache: &StepCache,
    d_h: &[f64],
    d_c: &[f64],
    d_x: &mut [f64],
    d_h_prev: &mut [f64],
    d_c_prev: &mut [f64],
) {
    let hidden = w.hidden_dim();
    let (gate_i, rest) = cache.gates.split_at(hidden);
    let (gate_f, rest) = rest.split_at(hidden);
    let (gate_g, gate_o) = rest.split_at(hidden);

    let mut dz = vec![0.0; 4 * hidden];
    for j in 0..hidden {
        let d_out = d_h[j] * gate_o[j];
        let d_c_total = d_c[j] + d_out * (1.0 - cache.tanh_c[j] * cache.tanh_c[j]);

        let d_i = d_c_total * gate_g[j];
        let d_f = d_c_total * cache.c_prev[j];
        let d_g = d_c_total * gate_i[j];
        let d_o = d_h[j] * cache.tanh_c[j];
        d_c_prev[j] = d_c_total * gate_f[j];

        dz[j] = d_i * gate_i[j] * (1.0 - gate_i[j]);
        dz[hidden + j] = d_f * gate_f[j] * (1.0 - gate_f[j]);
        dz[2 * hidden + j] = d_g * (1.0 - gate_g[j] * gate_g[j]);
        dz[3 * hidden + j] = d_o * gate_o[j] * (1.0 - gate_o[j]);
    }

    grads.wx.add_outer(&dz, &cache.x);
    grads.wh.add_outer(&dz, &cache.h_prev);
    axpy(1.0, &dz, &mut grads.b);

    d_x.fill(0.0);
    w.wx.matvec_transpose_add(&dz, d_x);
    d_h_prev.fill(0.0);
    w.wh.matvec_transpose_add(&dz, d_h_prev);
}

/// Accumulates the gradients of this dialog's summed token NLL into
/// `grads`. Gradient flows through the cross-turn context links: the
/// context consumed by turn `t + 1`'s encoder propagates back into turn
/// `t`'s encoder final state.
pub fn backward_dialog(
    params: &Seq2SeqParams,
    config: &ModelConfig,
    forward: &DialogForward,
    grads: &mut Seq2SeqParams,
) {
    let hidden = config.hidden_dim;
    let embed = config.embed_dim;

    // Gradient wrt this turn's final encoder hidden state contributed by the
    // next turn's per-token context inputs.
    let mut d_context_next: Option<Vec<f64>> = None;

    for (t, turn) in forward.turns.iter().enumerate().rev() {
        let decoder = &turn.decoder;
        let mut d_h = vec![0.0; hidden];
        let mut d_c = vec![0.0; hidden];
        let mut d_h_prev = vec![0.0; hidden];
        let mut d_c_prev = vec![0.0; hidden];
        let mut d_x_dec = vec![0.0; embed + hidden];
        // Gradient wrt the encoder summary re-fed at every decoder step.
        let mut d_summary = vec![0.0; hidden];

        for i in (0..decoder.steps.len()).rev() {
            let target = decoder.targets[i];
            if target != PAD_ID {
                let mut d_logits = decoder.probs[i].clone();
                d_logits[target as usize] -= 1.0;
                grads.out_w.add_outer(&d_logits, &decoder.steps[i].h);
                axpy(1.0, &d_logits, &mut grads.out_b);
                params.out_w.matvec_transpose_add(&d_logits, &mut d_h);
            }

            lstm_backward_step(
                &params.decoder,
                &mut grads.decoder,
                &decoder.steps[i],
                &d_h,
                &d_c,
                &mut d_x_dec,
                &mut d_h_prev,
                &mut d_c_prev,
            );
            axpy(1.0, &d_x_dec[..embed], grads.embedding.row_mut(decoder.inputs[i] as usize));
            axpy(1.0, &d_x_dec[embed..], &mut d_summary);
            core::mem::swap(&mut d_h, &mut d_h_prev);
            core::mem::swap(&mut d_c, &mut d_c_prev);
        }

        // The decoder read the encoder's final state twice over: as its
        // initial state and as the per-step summary input; fold in both,
        // plus what the next turn's context inputs sent back.
        axpy(1.0, &d_summary, &mut d_h);
        if let Some(d_ctx) = d_context_next.take() {
            axpy(1.0, &d_ctx, &mut d_h);
        }

        let encoder = &turn.encoder;
        let mut d_ctx_accum = vec![0.0; if config.use_context { hidden } else { 0 }];
        let mut d_x_enc = vec![0.0; config.encoder_input_dim()];
        for i in (0..encoder.steps.len()).rev() {
            lstm_backward_step(
                &params.encoder,
                &mut grads.encoder,
                &encoder.steps[i],
                &d_h,
                &d_c,
                &mut d_x_enc,
                &mut d_h_prev,
                &mut d_c_prev,
            );
            axpy(1.0, &d_x_enc[..embed], grads.embedding.row_mut(encoder.tokens[i] as usize));
            if config.use_context {
                axpy(1.0, &d_x_enc[embed..], &mut d_ctx_accum);
            }
            core::mem::swap(&mut d_h, &mut d_h_prev);
            core::mem::swap(&mut d_c, &mut d_c_prev);
        }

        // Turn 1's context is the constant zero vector; its gradient stops.
        if config.use_context && t > 0 {
            d_context_next = Some(d_ctx_accum);
        }
    }
}

/// Sum of squares across every parameter tensor, square-rooted.
pub fn global_norm(grads: &Seq2SeqParams) -> f64 {
    let mut sum = 0.0;
    for (_, _, data) in grads.tensors() {
        for &v in data {
            sum += v * v;
        }
    }
    libm::sqrt(sum)
}

/// Scales all gradients so their global norm does not exceed `max_norm`;
/// returns the post-clip global norm.
pub fn clip_gradients(grads: &mut Seq2SeqParams, max_norm: f64) -> f64 {
    let norm = global_norm(grads);
    if norm <= max_norm || norm == 0.0 {
        return norm;
    }
    let scale = max_norm / norm;
    for (_, data) in grads.tensors_mut() {
        for v in data {
            *v *= scale;
        }
    }
    max_norm
}

/// Forward plus backward over one dialog: gradients of the mean token NLL,
/// along with the loss itself.
pub fn dialog_gradients(
    params: &Seq2SeqParams,
    config: &ModelConfig,
    dialog: &EncodedDialog,
) -> Result<(Seq2SeqParams, f64), Seq2SeqError> {
    let forward = super::forward_dialog(params, config, dialog)?;
    let (nll, count) = forward.nll();
    let mut grads = params.zeros_like();
    backward_dialog(params, config, &forward, &mut grads);
    if count > 0 {
        let scale = 1.0 / count as f64;
        for (_, data) in grads.tensors_mut() {
            for v in data {
                *v *= scale;
            }
        }
        Ok((grads, nll / count as f64))
    } else {
        Ok((grads, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::EOS_ID;
    use crate::seq2seq::EncodedTurn;
    use alloc::string::String;

    fn tiny_config(use_context: bool) -> ModelConfig {
        ModelConfig { embed_dim: 3, hidden_dim: 4, max_decode_len: 6, use_context }
    }

    fn tiny_dialog() -> EncodedDialog {
        EncodedDialog {
            id: String::from("d"),
            turns: alloc::vec![
                EncodedTurn { user: alloc::vec![5, 6], agent: alloc::vec![7, 8] },
                EncodedTurn { user: alloc::vec![9], agent: alloc::vec![6] },
            ],
        }
    }

    // Central finite differences over a few sampled coordinates; the full
    // sweep over every coordinate lives in the integration tests.
    #[test]
    fn analytic_gradient_matches_finite_differences_spot_check() {
        let cfg = tiny_config(true);
        let vocab_size = 10;
        let params = Seq2SeqParams::init(&cfg, vocab_size, 42);
        let dialog = tiny_dialog();
        let (grads, _) = dialog_gradients(&params, &cfg, &dialog).unwrap();

        let epsilon = 1e-5;
        for tensor_index in 0..grads.tensors().len() {
            for flat in [0usize, 3, 7] {
                if flat >= grads.tensors()[tensor_index].2.len() {
                    continue;
                }
                let mut plus = params.clone();
                let mut minus = params.clone();
                plus.tensors_mut()[tensor_index].1[flat] += epsilon;
                minus.tensors_mut()[tensor_index].1[flat] -= epsilon;
                let loss_plus = {
                    let f = super::super::forward_dialog(&plus, &cfg, &dialog).unwrap();
                    let (nll, count) = f.nll();
                    nll / count as f64
                };
                let loss_minus = {
                    let f = super::super::forward_dialog(&minus, &cfg, &dialog).unwrap();
                    let (nll, count) = f.nll();
                    nll / count as f64
                };
                let numeric = (loss_plus - loss_minus) / (2.0 * epsilon);
                let analytic = grads.tensors()[tensor_index].2[flat];
                let denom = libm::fabs(analytic).max(libm::fabs(numeric)).max(1e-6);
                let rel = libm::fabs(analytic - numeric) / denom;
                assert!(
                    rel < 1e-4,
                    "tensor {} [{flat}]: analytic {analytic} vs numeric {numeric}",
                    grads.tensors()[tensor_index].0
                );
            }
        }
    }

    #[test]
    fn perfect_predictions_have_zero_gradients() {
        let cfg = tiny_config(false);
        let mut params = Seq2SeqParams::zeros_with(&cfg, 10);
        // Saturate the projection toward <EOS>; exp(-1e5) underflows to zero,
        // so the softmax is exactly one-hot on the only target.
        params.out_b[EOS_ID as usize] = 1e5;
        let dialog = EncodedDialog {
            id: String::from("d"),
            turns: alloc::vec![EncodedTurn { user: alloc::vec![5], agent: alloc::vec![] }],
        };
        let (grads, loss) = dialog_gradients(&params, &cfg, &dialog).unwrap();
        assert_eq!(loss, 0.0);
        for (name, _, data) in grads.tensors() {
            assert!(data.iter().all(|&v| v == 0.0), "nonzero gradient in {name}");
        }
    }

    #[test]
    fn clipping_scales_to_the_requested_norm() {
        let cfg = tiny_config(true);
        let params = Seq2SeqParams::init(&cfg, 10, 1);
        let mut grads = params.zeros_like();
        // Rig a known norm: a single entry of 10.
        grads.tensors_mut()[0].1[0] = 10.0;
        assert!((global_norm(&grads) - 10.0).abs() < 1e-12);
        let clipped = clip_gradients(&mut grads, 1.0);
        assert!((clipped - 1.0).abs() < 1e-9);
        assert!((global_norm(&grads) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn clipping_below_threshold_is_identity() {
        let cfg = tiny_config(true);
        let params = Seq2SeqParams::init(&cfg, 10, 1);
        let mut grads = params.zeros_like();
        grads.tensors_mut()[0].1[0] = 0.5;
        let norm = clip_gradients(&mut grads, 1.0);
        assert!((norm - 0.5).abs() < 1e-12);
        assert_eq!(grads.tensors()[0].2[0], 0.5);
    }
}
