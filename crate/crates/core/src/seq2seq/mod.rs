//! The turn-unrolled encoder-decoder model: a single-layer LSTM encoder over
//! the user's utterance (optionally carrying the previous turn's encoder
//! state as a per-token context input), and an LSTM decoder that starts from
//! the encoder's final state and receives the encoded utterance vector
//! alongside each token embedding, followed by a softmax projection over the
//! vocabulary. One parameter set is shared by all unrolled turn copies.

pub mod math;

mod backward;
mod decode;
mod forward;
mod params;
mod train;

pub use backward::{backward_dialog, clip_gradients, dialog_gradients, global_norm};
pub use decode::{decode_greedy, DecodeOutcome};
pub use forward::{encode_turn, forward_dialog, history_context, loss, nll_sum, DialogForward, EncoderFinal, TurnForward};
pub use params::{LstmWeights, Seq2SeqParams, GATE_BLOCKS};
pub use train::{train, AdamState, EpochStats, TrainOutcome};

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::{Dialog, Vocabulary};

/// Model hyperparameters. `use_context` distinguishes the plain model (each
/// turn independent) from the variant that appends the previous turn's
/// final encoder state to every token embedding of the current user
/// utterance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub max_decode_len: usize,
    pub use_context: bool,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), Seq2SeqError> {
        if self.embed_dim == 0 || self.hidden_dim == 0 || self.max_decode_len < 2 {
            return Err(Seq2SeqError::InvalidConfig);
        }
        Ok(())
    }

    /// Per-step encoder input width: the token embedding, plus the context
    /// vector when turns are threaded.
    pub fn encoder_input_dim(&self) -> usize {
        self.embed_dim + if self.use_context { self.hidden_dim } else { 0 }
    }

    /// Per-step decoder input width: the token embedding plus the encoded
    /// utterance vector, which is fed to the decoder at every step.
    pub fn decoder_input_dim(&self) -> usize {
        self.embed_dim + self.hidden_dim
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { embed_dim: 64, hidden_dim: 128, max_decode_len: 24, use_context: true }
    }
}

/// Optimization settings for [`train`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub gradient_clip_norm: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 20, batch_size: 16, learning_rate: 1e-3, gradient_clip_norm: 5.0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Seq2SeqError {
    /// A vector had the wrong dimension for this configuration, or a context
    /// was supplied to a model that does not use one.
    ShapeMismatch { expected: usize, found: usize },
    /// Training loss became non-finite.
    Diverged { epoch: usize },
    InvalidConfig,
    EmptyInput,
}

impl fmt::Display for Seq2SeqError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Seq2SeqError::ShapeMismatch { expected, found } => {
                write!(f, "shape mismatch: expected dimension {expected}, found {found}")
            }
            Seq2SeqError::Diverged { epoch } => write!(f, "loss diverged at epoch {epoch}"),
            Seq2SeqError::InvalidConfig => write!(f, "invalid model configuration"),
            Seq2SeqError::EmptyInput => write!(f, "empty input"),
        }
    }
}

impl core::error::Error for Seq2SeqError {}

/// Final hidden states of one turn; the raw material for belief states.
#[derive(Debug, Clone, PartialEq)]
pub struct TurnState {
    pub encoder_final: Vec<f64>,
    pub decoder_final: Vec<f64>,
    /// Set when greedy decoding hit the length cap before emitting the end
    /// token; teacher-forced states never truncate.
    pub truncated: bool,
}

/// A turn encoded against one vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedTurn {
    pub user: Vec<u32>,
    pub agent: Vec<u32>,
}

/// A dialog encoded against one vocabulary, keeping its id for bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedDialog {
    pub id: String,
    pub turns: Vec<EncodedTurn>,
}

impl EncodedDialog {
    pub fn from_dialog(vocab: &Vocabulary, dialog: &Dialog) -> Self {
        Self {
            id: String::from(dialog.id()),
            turns: dialog
                .turns()
                .iter()
                .map(|turn| EncodedTurn {
                    user: vocab.encode(&turn.user),
                    agent: vocab.encode(&turn.agent),
                })
                .collect(),
        }
    }

    pub fn encode_all(vocab: &Vocabulary, dialogs: &[Dialog]) -> Vec<Self> {
        dialogs.iter().map(|d| Self::from_dialog(vocab, d)).collect()
    }
}
