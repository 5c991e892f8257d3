use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::{Utterance, Vocabulary, BOS_ID, EOS_ID, PAD_ID};

use super::forward::{decoder_input, lstm_step, run_encoder, EncoderFinal};
use super::math::{argmax, softmax};
use super::{ModelConfig, Seq2SeqError, Seq2SeqParams, TurnState};

/// Result of greedy decoding one turn.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    /// Surface response with `<BOS>`/`<EOS>`/`<PAD>` stripped; an empty
    /// generation surfaces as `<SILENCE>`.
    pub utterance: Utterance,
    pub state: TurnState,
}

/// Argmax decoding from `<BOS>` until `<EOS>` or `max_decode_len` emitted
/// tokens; argmax ties resolve to the lowest token id. Returns the surface
/// utterance and the final hidden states for belief extraction.
pub fn decode_greedy(
    params: &Seq2SeqParams,
    config: &ModelConfig,
    vocab: &Vocabulary,
    user_tokens: &[u32],
    prev_context: Option<&[f64]>,
) -> Result<DecodeOutcome, Seq2SeqError> {
    let encoder = run_encoder(params, config, user_tokens, prev_context)?;
    let EncoderFinal { h: enc_h, c: enc_c } = encoder.final_state();

    let mut h = enc_h.clone();
    let mut c = enc_c.clone();
    let mut emitted: Vec<u32> = Vec::new();
    let mut input = BOS_ID;
    let mut truncated = false;
    let mut x = vec![0.0; params.decoder.input_dim()];
    loop {
        decoder_input(params, input, &enc_h, &mut x);
        let step = lstm_step(&params.decoder, &x, &h, &c);
        h.copy_from_slice(&step.h);
        c.copy_from_slice(&step.c);

        if emitted.len() == config.max_decode_len {
            // Length cap reached; the state above consumed the last emitted
            // token, mirroring the teacher-forced definition.
            truncated = true;
            break;
        }
        let mut logits = vec![0.0; params.vocab_size()];
        params.out_w.matvec(&step.h, &mut logits);
        for (l, b) in logits.iter_mut().zip(&params.out_b) {
            *l += b;
        }
        softmax(&mut logits);
        let token = argmax(&logits) as u32;
        if token == EOS_ID {
            break;
        }
        emitted.push(token);
        input = token;
    }

    let mut tokens = Vec::with_capacity(emitted.len());
    for &id in &emitted {
        if id == BOS_ID || id == EOS_ID || id == PAD_ID {
            continue;
        }
        tokens.push(
            vocab
                .token(id)
                .map_err(|_| Seq2SeqError::ShapeMismatch { expected: vocab.len(), found: id as usize })?
                .to_string(),
        );
    }
    let utterance = if tokens.is_empty() {
        Utterance::silence()
    } else {
        Utterance::new(tokens).expect("vocabulary tokens are well-formed")
    };

    Ok(DecodeOutcome {
        utterance,
        state: TurnState { encoder_final: enc_h, decoder_final: h, truncated },
    })
}
