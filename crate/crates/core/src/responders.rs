//! Turn responders for the five evaluated model variants: greedy generation
//! without and with context threading, retrieval over encoder or decoder
//! belief states, and the hybrid dispatcher over generation plus retrieval.

use alloc::vec::Vec;

use crate::belief::{query_state, BeliefMode, StateActionStore};
use crate::corpus::{Utterance, Vocabulary};
use crate::hybrid::{hybrid_respond, ResponseSource};
use crate::metrics::{ModelResponse, TurnHistory, TurnResponder};
use crate::seq2seq::{decode_greedy, history_context, ModelConfig, Seq2SeqParams};

fn encode_users(vocab: &Vocabulary, users: &[Utterance]) -> Vec<Vec<u32>> {
    users.iter().map(|u| vocab.encode(u)).collect()
}

/// Greedy generation from the trained model; covers both the contextless
/// variant and the context-threaded one, depending on `config.use_context`.
pub struct Seq2SeqResponder<'a> {
    pub params: &'a Seq2SeqParams,
    pub config: &'a ModelConfig,
    pub vocab: &'a Vocabulary,
}

impl Seq2SeqResponder<'_> {
    fn decode_current(&self, users: &[Vec<u32>]) -> Utterance {
        let current = users.len() - 1;
        let context = history_context(self.params, self.config, &users[..current])
            .expect("user history encodes cleanly");
        decode_greedy(self.params, self.config, self.vocab, &users[current], context.as_deref())
            .expect("decoding a well-formed turn cannot fail")
            .utterance
    }
}

impl TurnResponder for Seq2SeqResponder<'_> {
    fn respond(&self, history: &TurnHistory<'_>) -> ModelResponse {
        let users = encode_users(self.vocab, history.users);
        ModelResponse {
            utterance: self.decode_current(&users),
            source: ResponseSource::Seq2Seq,
        }
    }
}

/// Nearest-neighbor retrieval over the store's belief mode.
pub struct NnbResponder<'a> {
    pub params: &'a Seq2SeqParams,
    pub config: &'a ModelConfig,
    pub vocab: &'a Vocabulary,
    pub store: &'a StateActionStore,
}

impl TurnResponder for NnbResponder<'_> {
    fn respond(&self, history: &TurnHistory<'_>) -> ModelResponse {
        let users = encode_users(self.vocab, history.users);
        let query = query_state(self.params, self.config, self.vocab, self.store.mode(), &users)
            .expect("belief state of a well-formed history");
        let (pair, _, _) = self.store.nearest(&query).expect("store is non-empty by construction");
        ModelResponse { utterance: pair.action.clone(), source: ResponseSource::NearestNeighbor }
    }
}

/// Runs generation and decoder-state retrieval side by side and dispatches:
/// a generated api_call is used verbatim, anything else defers to
/// retrieval. One decode pass supplies both the generated response and the
/// retrieval query state.
pub struct HybridResponder<'a> {
    pub params: &'a Seq2SeqParams,
    pub config: &'a ModelConfig,
    pub vocab: &'a Vocabulary,
    pub store: &'a StateActionStore,
}

impl TurnResponder for HybridResponder<'_> {
    fn respond(&self, history: &TurnHistory<'_>) -> ModelResponse {
        let users = encode_users(self.vocab, history.users);
        let current = users.len() - 1;
        let context = history_context(self.params, self.config, &users[..current])
            .expect("user history encodes cleanly");
        let decoded =
            decode_greedy(self.params, self.config, self.vocab, &users[current], context.as_deref())
                .expect("decoding a well-formed turn cannot fail");

        let query = match self.store.mode() {
            BeliefMode::EncoderFinal => decoded.state.encoder_final.clone(),
            BeliefMode::DecoderFinal => decoded.state.decoder_final.clone(),
            BeliefMode::Concat => {
                let mut v = decoded.state.encoder_final.clone();
                v.extend_from_slice(&decoded.state.decoder_final);
                v
            }
        };
        let (pair, _, _) = self.store.nearest(&query).expect("store is non-empty by construction");
        let decision = hybrid_respond(decoded.utterance, pair.action.clone());
        ModelResponse { utterance: decision.chosen, source: decision.source }
    }
}
