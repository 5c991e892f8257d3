use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{CorpusError, Dialog, Utterance};

pub const PAD_ID: u32 = 0;
pub const BOS_ID: u32 = 1;
pub const EOS_ID: u32 = 2;
pub const UNK_ID: u32 = 3;
pub const SILENCE_ID: u32 = 4;

/// Reserved tokens, in id order, occupying the five lowest ids.
pub const RESERVED_TOKENS: [&str; 5] = ["<PAD>", "<BOS>", "<EOS>", "<UNK>", "<SILENCE>"];

/// Bijective token/id map with the reserved tokens at fixed low ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: BTreeMap<String, u32>,
}

impl Vocabulary {
    /// Builds a vocabulary from an explicit token list. The list must start
    /// with the reserved tokens and contain no duplicates; this is the shape
    /// produced by [`build_vocabulary`] and by checkpoint loading.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self, CorpusError> {
        for (i, reserved) in RESERVED_TOKENS.iter().enumerate() {
            if tokens.get(i).map(String::as_str) != Some(*reserved) {
                return Err(CorpusError::Parse { line: 0, reason: "reserved tokens missing or out of order" });
            }
        }
        let mut index = BTreeMap::new();
        for (id, token) in tokens.iter().enumerate() {
            if index.insert(token.clone(), id as u32).is_some() {
                return Err(CorpusError::Parse { line: 0, reason: "duplicate token in vocabulary" });
            }
        }
        Ok(Self { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Tokens in id order.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Maps a token to its id, or [`UNK_ID`] when absent.
    pub fn id_or_unk(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn token(&self, id: u32) -> Result<&str, CorpusError> {
        self.tokens
            .get(id as usize)
            .map(String::as_str)
            .ok_or(CorpusError::InvalidTokenId { id })
    }

    pub fn encode(&self, utterance: &Utterance) -> Vec<u32> {
        utterance.tokens().iter().map(|t| self.id_or_unk(t)).collect()
    }

    /// Inverse of [`encode`](Self::encode); `<UNK>` decodes to its own
    /// surface form so that encode(decode(ids)) == ids.
    pub fn decode(&self, ids: &[u32]) -> Result<Utterance, CorpusError> {
        let mut tokens = Vec::with_capacity(ids.len());
        for &id in ids {
            tokens.push(self.token(id)?.to_string());
        }
        Utterance::new(tokens)
    }
}

/// Counts tokens over the training dialogs and keeps those with frequency
/// >= `min_count`. Ids are assigned by descending frequency, ties broken
/// lexicographically, after the reserved block.
pub fn build_vocabulary(train_dialogs: &[Dialog], min_count: u64) -> Vocabulary {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for dialog in train_dialogs {
        for turn in dialog.turns() {
            for token in turn.user.tokens().iter().chain(turn.agent.tokens()) {
                if !RESERVED_TOKENS.contains(&token.as_str()) {
                    *counts.entry(token).or_insert(0) += 1;
                }
            }
        }
    }

    let mut ranked: Vec<(&str, u64)> = counts
        .into_iter()
        .filter(|&(_, count)| count >= min_count.max(1))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let mut tokens: Vec<String> = RESERVED_TOKENS.iter().map(|t| t.to_string()).collect();
    tokens.extend(ranked.into_iter().map(|(token, _)| token.to_string()));
    Vocabulary::from_tokens(tokens).expect("constructed token list is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn mini_corpus() -> Vec<Dialog> {
        let pairs = vec![(
            Utterance::from_text("hi").unwrap(),
            Utterance::from_text("hello").unwrap(),
        )];
        vec![Dialog::from_pairs("d1".to_string(), pairs).unwrap()]
    }

    #[test]
    fn reserved_plus_observed_tokens() {
        let vocab = build_vocabulary(&mini_corpus(), 1);
        assert_eq!(vocab.len(), 7);
        assert_eq!(vocab.tokens()[..5], RESERVED_TOKENS.map(|t| t.to_string()));
        // Equal counts: lexicographic tie-break.
        assert_eq!(vocab.token(5).unwrap(), "hello");
        assert_eq!(vocab.token(6).unwrap(), "hi");
    }

    #[test]
    fn min_count_threshold_drops_rare_tokens() {
        let vocab = build_vocabulary(&mini_corpus(), 2);
        assert_eq!(vocab.len(), 5);
        assert_eq!(vocab.id_or_unk("hi"), UNK_ID);
    }

    #[test]
    fn construction_is_deterministic() {
        let a = build_vocabulary(&mini_corpus(), 1);
        let b = build_vocabulary(&mini_corpus(), 1);
        assert_eq!(a, b);
    }

    #[test]
    fn encode_decode_round_trip_with_unk_fixed_point() {
        let vocab = build_vocabulary(&mini_corpus(), 1);
        let ids = vec![UNK_ID, SILENCE_ID, 5, 6];
        let decoded = vocab.decode(&ids).unwrap();
        assert_eq!(decoded.tokens(), ["<UNK>", "<SILENCE>", "hello", "hi"]);
        assert_eq!(vocab.encode(&decoded), ids);
    }

    #[test]
    fn invalid_id_is_an_error() {
        let vocab = build_vocabulary(&mini_corpus(), 1);
        assert_eq!(vocab.decode(&[99]), Err(CorpusError::InvalidTokenId { id: 99 }));
    }
}
