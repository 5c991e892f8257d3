//! Belief-state extraction and nearest-neighbor response retrieval: harvest
//! (state, action) pairs from the training dialogs with the trained model,
//! index the states with a ball tree, and answer queries exactly.

mod balltree;

pub use balltree::{euclidean, BallTree, Node, NodeKind};

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::{Dialog, Utterance, Vocabulary};
use crate::seq2seq::{
    decode_greedy, forward_dialog, history_context, EncodedDialog, ModelConfig, Seq2SeqError,
    Seq2SeqParams,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BeliefError {
    EmptyStore,
    DimensionMismatch { expected: usize, found: usize },
    Model(Seq2SeqError),
}

impl fmt::Display for BeliefError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BeliefError::EmptyStore => write!(f, "state-action store is empty"),
            BeliefError::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            BeliefError::Model(e) => write!(f, "model error: {e}"),
        }
    }
}

impl core::error::Error for BeliefError {}

impl From<Seq2SeqError> for BeliefError {
    fn from(e: Seq2SeqError) -> Self {
        BeliefError::Model(e)
    }
}

/// Which final hidden state represents the dialog state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeliefMode {
    EncoderFinal,
    DecoderFinal,
    Concat,
}

impl BeliefMode {
    pub fn dimension(self, hidden_dim: usize) -> usize {
        match self {
            BeliefMode::EncoderFinal | BeliefMode::DecoderFinal => hidden_dim,
            BeliefMode::Concat => 2 * hidden_dim,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BeliefMode::EncoderFinal => "encoder_final",
            BeliefMode::DecoderFinal => "decoder_final",
            BeliefMode::Concat => "concat",
        }
    }
}

/// Distance used by the store. Cosine is implemented as Euclidean distance
/// between unit-normalized vectors, which orders candidates identically to
/// cosine similarity while keeping the ball-tree bounds exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMetric {
    Euclidean,
    Cosine,
}

impl DistanceMetric {
    pub fn as_str(self) -> &'static str {
        match self {
            DistanceMetric::Euclidean => "euclidean",
            DistanceMetric::Cosine => "cosine",
        }
    }
}

fn unit_normalize(v: &[f64]) -> Vec<f64> {
    let norm = libm::sqrt(v.iter().map(|x| x * x).sum());
    if norm == 0.0 {
        v.to_vec()
    } else {
        v.iter().map(|x| x / norm).collect()
    }
}

/// One harvested belief state with the action the agent took there.
#[derive(Debug, Clone, PartialEq)]
pub struct StateActionPair {
    pub state: Vec<f64>,
    pub action: Utterance,
    /// (dialog id, 1-based turn index) the pair came from.
    pub origin: (String, u32),
}

/// Options for store construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StoreOptions {
    pub leaf_size: usize,
    pub metric: DistanceMetric,
}

impl Default for StoreOptions {
    fn default() -> Self {
        Self { leaf_size: 32, metric: DistanceMetric::Euclidean }
    }
}

/// The set of (belief state, action) pairs from the training data, indexed
/// by a ball tree. Insertion order is preserved and breaks distance ties.
#[derive(Debug, Clone)]
pub struct StateActionStore {
    pairs: Vec<StateActionPair>,
    mode: BeliefMode,
    metric: DistanceMetric,
    tree: BallTree,
}

impl StateActionStore {
    pub fn build(
        pairs: Vec<StateActionPair>,
        mode: BeliefMode,
        options: StoreOptions,
    ) -> Result<Self, BeliefError> {
        if pairs.is_empty() {
            return Err(BeliefError::EmptyStore);
        }
        let dim = pairs[0].state.len();
        for pair in &pairs {
            if pair.state.len() != dim {
                return Err(BeliefError::DimensionMismatch { expected: dim, found: pair.state.len() });
            }
        }
        let points: Vec<Vec<f64>> = match options.metric {
            DistanceMetric::Euclidean => pairs.iter().map(|p| p.state.clone()).collect(),
            DistanceMetric::Cosine => pairs.iter().map(|p| unit_normalize(&p.state)).collect(),
        };
        let tree = BallTree::build(points, options.leaf_size)?;
        Ok(Self { pairs, mode, metric: options.metric, tree })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[StateActionPair] {
        &self.pairs
    }

    pub fn mode(&self) -> BeliefMode {
        self.mode
    }

    pub fn metric(&self) -> DistanceMetric {
        self.metric
    }

    pub fn dimension(&self) -> usize {
        self.tree.dim()
    }

    pub fn leaf_size(&self) -> usize {
        self.tree.leaf_size()
    }

    pub fn tree(&self) -> &BallTree {
        &self.tree
    }

    /// Exact nearest stored pair: minimal distance, ties broken by lowest
    /// insertion index.
    pub fn nearest(&self, query: &[f64]) -> Result<(&StateActionPair, f64, usize), BeliefError> {
        let (index, distance) = match self.metric {
            DistanceMetric::Euclidean => self.tree.nearest(query)?,
            DistanceMetric::Cosine => {
                if query.len() != self.tree.dim() {
                    return Err(BeliefError::DimensionMismatch {
                        expected: self.tree.dim(),
                        found: query.len(),
                    });
                }
                self.tree.nearest(&unit_normalize(query))?
            }
        };
        Ok((&self.pairs[index], distance, index))
    }
}

/// Convenience wrapper matching the store's public contract.
pub fn nearest_neighbor<'s>(
    store: &'s StateActionStore,
    query: &[f64],
) -> Result<(&'s StateActionPair, f64), BeliefError> {
    let (pair, distance, _) = store.nearest(query)?;
    Ok((pair, distance))
}

/// Builds a ball tree over raw vectors; part of the store's public surface
/// so the index can be exercised and inspected on its own.
pub fn build_ball_tree(points: Vec<Vec<f64>>, leaf_size: usize) -> Result<BallTree, BeliefError> {
    BallTree::build(points, leaf_size)
}

/// Runs the trained model over every training dialog with teacher forcing
/// and harvests one (belief state, ground-truth action) pair per turn.
pub fn extract_store(
    params: &Seq2SeqParams,
    config: &ModelConfig,
    vocab: &Vocabulary,
    train_dialogs: &[Dialog],
    mode: BeliefMode,
    options: StoreOptions,
) -> Result<StateActionStore, BeliefError> {
    let mut pairs = Vec::new();
    for dialog in train_dialogs {
        let encoded = EncodedDialog::from_dialog(vocab, dialog);
        let forward = forward_dialog(params, config, &encoded)?;
        for (turn, state) in dialog.turns().iter().zip(forward.states()) {
            let belief = match mode {
                BeliefMode::EncoderFinal => state.encoder_final,
                BeliefMode::DecoderFinal => state.decoder_final,
                BeliefMode::Concat => {
                    let mut v = state.encoder_final;
                    v.extend_from_slice(&state.decoder_final);
                    v
                }
            };
            pairs.push(StateActionPair {
                state: belief,
                action: turn.agent.clone(),
                origin: (String::from(dialog.id()), turn.index),
            });
        }
    }
    StateActionStore::build(pairs, mode, options)
}

/// Computes the query-time belief state for the current turn: the user
/// history threads through the encoder, and when the mode needs the decoder
/// state the current turn is decoded greedily (no ground-truth response
/// exists at query time).
pub fn query_state(
    params: &Seq2SeqParams,
    config: &ModelConfig,
    vocab: &Vocabulary,
    mode: BeliefMode,
    users: &[Vec<u32>],
) -> Result<Vec<f64>, BeliefError> {
    if users.is_empty() {
        return Err(BeliefError::Model(Seq2SeqError::EmptyInput));
    }
    let current = users.len() - 1;
    let context = history_context(params, config, &users[..current])?;
    let state = match mode {
        BeliefMode::EncoderFinal => {
            crate::seq2seq::encode_turn(params, config, &users[current], context.as_deref())?.h
        }
        BeliefMode::DecoderFinal => {
            decode_greedy(params, config, vocab, &users[current], context.as_deref())?
                .state
                .decoder_final
        }
        BeliefMode::Concat => {
            let outcome = decode_greedy(params, config, vocab, &users[current], context.as_deref())?;
            let mut v = outcome.state.encoder_final;
            v.extend_from_slice(&outcome.state.decoder_final);
            v
        }
    };
    Ok(state)
}

/// Predicts the agent response for the current turn by nearest-neighbor
/// retrieval: the belief state of the history is matched against the store
/// and the stored action is returned verbatim.
///
/// `agents` carries the true prior responses per the offline protocol; with
/// context threaded through the encoder chain they do not influence the
/// belief state, but the interface keeps the full history so other context
/// sources stay possible.
pub fn nnb_predict(
    params: &Seq2SeqParams,
    config: &ModelConfig,
    vocab: &Vocabulary,
    store: &StateActionStore,
    users: &[Vec<u32>],
    _agents: &[Vec<u32>],
) -> Result<Utterance, BeliefError> {
    let query = query_state(params, config, vocab, store.mode(), users)?;
    let (pair, _, _) = store.nearest(&query)?;
    Ok(pair.action.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocabulary, generate_support_corpus, split_corpus};
    use alloc::vec;

    fn trained_fixture() -> (Seq2SeqParams, ModelConfig, Vocabulary, Vec<Dialog>) {
        let dialogs = generate_support_corpus(12, 3);
        let split = split_corpus(dialogs, 1).unwrap();
        let vocab = build_vocabulary(&split.train, 1);
        let config = ModelConfig { embed_dim: 6, hidden_dim: 8, max_decode_len: 10, use_context: true };
        let params = Seq2SeqParams::init(&config, vocab.len(), 5);
        (params, config, vocab, split.train)
    }

    #[test]
    fn store_has_one_pair_per_agent_turn() {
        let (params, config, vocab, train) = trained_fixture();
        let total_turns: usize = train.iter().map(Dialog::len).sum();
        let store = extract_store(
            &params,
            &config,
            &vocab,
            &train,
            BeliefMode::EncoderFinal,
            StoreOptions::default(),
        )
        .unwrap();
        assert_eq!(store.len(), total_turns);
        assert_eq!(store.dimension(), 8);
    }

    #[test]
    fn concat_mode_doubles_the_dimension() {
        let (params, config, vocab, train) = trained_fixture();
        let store = extract_store(
            &params,
            &config,
            &vocab,
            &train,
            BeliefMode::Concat,
            StoreOptions::default(),
        )
        .unwrap();
        assert_eq!(store.dimension(), 16);
    }

    #[test]
    fn scripted_duplicates_share_one_action_string() {
        let (params, config, vocab, train) = trained_fixture();
        let store = extract_store(
            &params,
            &config,
            &vocab,
            &train,
            BeliefMode::EncoderFinal,
            StoreOptions::default(),
        )
        .unwrap();
        // The api_call action recurs across dialogs with distinct states.
        let api_pairs: Vec<&StateActionPair> = store
            .pairs()
            .iter()
            .filter(|p| p.action.text() == "api_call cancel_refund")
            .collect();
        assert!(api_pairs.len() > 1);
        assert_ne!(api_pairs[0].origin, api_pairs[1].origin);
    }

    #[test]
    fn nearest_on_a_stored_state_returns_that_pair() {
        let (params, config, vocab, train) = trained_fixture();
        let store = extract_store(
            &params,
            &config,
            &vocab,
            &train,
            BeliefMode::EncoderFinal,
            StoreOptions::default(),
        )
        .unwrap();
        let (pair, distance, index) = store.nearest(&store.pairs()[5].state.clone()).unwrap();
        assert_eq!(distance, 0.0);
        // Identical scripted turns can collide exactly; the tie rule then
        // demands the lowest index, which must still carry the same action.
        assert!(index <= 5);
        assert_eq!(pair.action, store.pairs()[5].action);
    }

    #[test]
    fn wrong_dimension_query_errors() {
        let (params, config, vocab, train) = trained_fixture();
        let store = extract_store(
            &params,
            &config,
            &vocab,
            &train,
            BeliefMode::EncoderFinal,
            StoreOptions::default(),
        )
        .unwrap();
        assert!(matches!(
            store.nearest(&vec![0.0; 16]),
            Err(BeliefError::DimensionMismatch { expected: 8, found: 16 })
        ));
    }

    #[test]
    fn empty_store_is_rejected() {
        assert!(matches!(
            StateActionStore::build(vec![], BeliefMode::EncoderFinal, StoreOptions::default()),
            Err(BeliefError::EmptyStore)
        ));
    }

    #[test]
    fn nnb_returns_actions_from_the_store_only() {
        let (params, config, vocab, train) = trained_fixture();
        let store = extract_store(
            &params,
            &config,
            &vocab,
            &train,
            BeliefMode::DecoderFinal,
            StoreOptions::default(),
        )
        .unwrap();
        let users: Vec<Vec<u32>> = train[0]
            .turns()
            .iter()
            .map(|t| vocab.encode(&t.user))
            .collect();
        for t in 1..=users.len() {
            let prediction =
                nnb_predict(&params, &config, &vocab, &store, &users[..t], &[]).unwrap();
            assert!(store.pairs().iter().any(|p| p.action == prediction));
        }
    }

    #[test]
    fn cosine_metric_matches_normalized_linear_scan() {
        let (params, config, vocab, train) = trained_fixture();
        let store = extract_store(
            &params,
            &config,
            &vocab,
            &train,
            BeliefMode::EncoderFinal,
            StoreOptions { leaf_size: 4, metric: DistanceMetric::Cosine },
        )
        .unwrap();
        let query = store.pairs()[3].state.clone();
        let (_, _, index) = store.nearest(&query).unwrap();
        let qn = unit_normalize(&query);
        let mut best = (usize::MAX, f64::INFINITY);
        for (i, pair) in store.pairs().iter().enumerate() {
            let d = euclidean(&qn, &unit_normalize(&pair.state));
            if d < best.1 {
                best = (i, d);
            }
        }
        assert_eq!(index, best.0);
    }
}
