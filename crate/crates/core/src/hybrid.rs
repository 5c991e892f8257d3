//! Dispatcher combining the generative model with nearest-neighbor
//! retrieval: generated api_calls always win, retrieval answers everything
//! else.

use core::fmt;

use crate::corpus::{Utterance, API_CALL_TOKEN};

/// Which upstream produced a chosen response.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseSource {
    Seq2Seq,
    NearestNeighbor,
}

impl ResponseSource {
    pub fn as_str(self) -> &'static str {
        match self {
            ResponseSource::Seq2Seq => "seq2seq",
            ResponseSource::NearestNeighbor => "nearest_neighbor",
        }
    }
}

impl fmt::Display for ResponseSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// True iff the first token is exactly `api_call`.
pub fn is_api_call(utterance: &Utterance) -> bool {
    utterance.first_token() == API_CALL_TOKEN
}

/// Outcome of one hybrid dispatch; `chosen` is verbatim one of the inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HybridDecision {
    pub chosen: Utterance,
    pub source: ResponseSource,
    pub seq2seq_output: Utterance,
    pub nn_output: Utterance,
}

/// Picks the generated output when it is an api_call, the retrieved output
/// otherwise.
pub fn hybrid_respond(seq2seq_out: Utterance, nn_out: Utterance) -> HybridDecision {
    if is_api_call(&seq2seq_out) {
        HybridDecision {
            chosen: seq2seq_out.clone(),
            source: ResponseSource::Seq2Seq,
            seq2seq_output: seq2seq_out,
            nn_output: nn_out,
        }
    } else {
        HybridDecision {
            chosen: nn_out.clone(),
            source: ResponseSource::NearestNeighbor,
            seq2seq_output: seq2seq_out,
            nn_output: nn_out,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(text: &str) -> Utterance {
        Utterance::from_text(text).unwrap()
    }

    #[test]
    fn api_call_detection_is_first_token_only() {
        assert!(is_api_call(&u("api_call cancel_refund")));
        assert!(!is_api_call(&u("you 're most welcome")));
        assert!(!is_api_call(&u("the api_call failed")));
    }

    #[test]
    fn seq2seq_api_call_takes_precedence() {
        let decision = hybrid_respond(u("api_call cancel_refund"), u("you 're welcome"));
        assert_eq!(decision.chosen, u("api_call cancel_refund"));
        assert_eq!(decision.source, ResponseSource::Seq2Seq);
    }

    #[test]
    fn non_api_seq2seq_defers_to_retrieval() {
        let decision =
            hybrid_respond(u("thank you"), u("is there anything else i can help you with ?"));
        assert_eq!(decision.chosen, u("is there anything else i can help you with ?"));
        assert_eq!(decision.source, ResponseSource::NearestNeighbor);
    }

    #[test]
    fn both_api_calls_keeps_the_generated_one() {
        let decision = hybrid_respond(u("api_call a b"), u("api_call c d"));
        assert_eq!(decision.chosen, u("api_call a b"));
        assert_eq!(decision.source, ResponseSource::Seq2Seq);
    }

    #[test]
    fn chosen_always_equals_one_input() {
        for (a, b) in [("api_call x", "hello"), ("hello", "api_call x"), ("hi", "hey")] {
            let decision = hybrid_respond(u(a), u(b));
            assert!(decision.chosen == decision.seq2seq_output || decision.chosen == decision.nn_output);
        }
    }
}
