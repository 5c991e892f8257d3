//! Dialog corpora: domain types, synthetic generators, the line-oriented
//! text format, normalization, vocabulary construction, and splitting.

mod generate;
mod normalize;
mod text;
mod vocab;

pub use generate::{generate_restaurant_corpus, generate_support_corpus};
pub use normalize::{normalize_utterance, NormalizeRules};
pub use text::{parse_babi_text, render_babi_text};
pub use vocab::{build_vocabulary, Vocabulary, BOS_ID, EOS_ID, PAD_ID, RESERVED_TOKENS, SILENCE_ID, UNK_ID};

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Placeholder token for a party that says nothing in a turn.
pub const SILENCE_TOKEN: &str = "<SILENCE>";
/// First token of an agent action that triggers an external call.
pub const API_CALL_TOKEN: &str = "api_call";
/// Dialogs are capped at this many turns.
pub const MAX_TURNS: u32 = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusError {
    /// Raw text was empty or whitespace-only.
    EmptyUtterance,
    /// A token contains embedded whitespace.
    WhitespaceInToken { token: String },
    /// A line of the text format could not be parsed.
    Parse { line: usize, reason: &'static str },
    /// Turn ids in a dialog block are not contiguous from 1.
    OutOfOrderTurn { line: usize, expected: u32, found: u32 },
    /// A dialog exceeds [`MAX_TURNS`].
    TooManyTurns { dialog: String, turns: usize },
    /// Fewer dialogs than a split requires.
    TooFewDialogs { have: usize, need: usize },
    /// A token id outside the vocabulary was decoded.
    InvalidTokenId { id: u32 },
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::EmptyUtterance => write!(f, "utterance is empty"),
            CorpusError::WhitespaceInToken { token } => {
                write!(f, "token {token:?} contains whitespace")
            }
            CorpusError::Parse { line, reason } => write!(f, "line {line}: {reason}"),
            CorpusError::OutOfOrderTurn { line, expected, found } => write!(
                f,
                "line {line}: expected turn id {expected}, found {found}"
            ),
            CorpusError::TooManyTurns { dialog, turns } => {
                write!(f, "dialog {dialog} has {turns} turns (cap is {MAX_TURNS})")
            }
            CorpusError::TooFewDialogs { have, need } => {
                write!(f, "need at least {need} dialogs to split, have {have}")
            }
            CorpusError::InvalidTokenId { id } => write!(f, "token id {id} is out of range"),
        }
    }
}

impl core::error::Error for CorpusError {}

/// A single utterance: a non-empty list of whitespace-free tokens.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Utterance {
    tokens: Vec<String>,
}

impl Utterance {
    pub fn new(tokens: Vec<String>) -> Result<Self, CorpusError> {
        if tokens.is_empty() {
            return Err(CorpusError::EmptyUtterance);
        }
        for token in &tokens {
            if token.is_empty() {
                return Err(CorpusError::EmptyUtterance);
            }
            if token.chars().any(char::is_whitespace) {
                return Err(CorpusError::WhitespaceInToken { token: token.clone() });
            }
        }
        Ok(Self { tokens })
    }

    /// Splits pre-tokenized text on whitespace.
    pub fn from_text(text: &str) -> Result<Self, CorpusError> {
        Self::new(text.split_whitespace().map(ToString::to_string).collect())
    }

    /// The `<SILENCE>` placeholder utterance.
    pub fn silence() -> Self {
        Self { tokens: alloc::vec![SILENCE_TOKEN.to_string()] }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn first_token(&self) -> &str {
        &self.tokens[0]
    }

    /// Space-joined surface form.
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.tokens
    }
}

impl fmt::Display for Utterance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text())
    }
}

/// One user/agent exchange. `index` is 1-based within its dialog.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Turn {
    pub user: Utterance,
    pub agent: Utterance,
    pub index: u32,
}

/// An entire session of exchanges between a user and an agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dialog {
    id: String,
    turns: Vec<Turn>,
}

impl Dialog {
    /// Validates that turn indices are contiguous from 1 and within the cap.
    pub fn new(id: String, turns: Vec<Turn>) -> Result<Self, CorpusError> {
        if turns.len() > MAX_TURNS as usize {
            return Err(CorpusError::TooManyTurns { dialog: id, turns: turns.len() });
        }
        for (i, turn) in turns.iter().enumerate() {
            let expected = i as u32 + 1;
            if turn.index != expected {
                return Err(CorpusError::OutOfOrderTurn {
                    line: 0,
                    expected,
                    found: turn.index,
                });
            }
        }
        Ok(Self { id, turns })
    }

    /// Builds a dialog from (user, agent) pairs, assigning indices 1..=n.
    pub fn from_pairs(id: String, pairs: Vec<(Utterance, Utterance)>) -> Result<Self, CorpusError> {
        let turns = pairs
            .into_iter()
            .enumerate()
            .map(|(i, (user, agent))| Turn { user, agent, index: i as u32 + 1 })
            .collect();
        Self::new(id, turns)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn turns(&self) -> &[Turn] {
        &self.turns
    }

    pub fn len(&self) -> usize {
        self.turns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }
}

/// An external action: the `api_call` marker plus its arguments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiCall {
    pub args: Vec<String>,
}

impl ApiCall {
    /// Serialized form: the marker followed by the args, space-separated.
    pub fn to_utterance(&self) -> Utterance {
        let mut tokens = Vec::with_capacity(self.args.len() + 1);
        tokens.push(API_CALL_TOKEN.to_string());
        tokens.extend(self.args.iter().cloned());
        Utterance { tokens }
    }

    /// Parses an utterance whose first token is the `api_call` marker.
    pub fn from_utterance(utterance: &Utterance) -> Option<Self> {
        if utterance.first_token() != API_CALL_TOKEN {
            return None;
        }
        Some(Self { args: utterance.tokens()[1..].to_vec() })
    }
}

/// Train/validation/test partition of a corpus, disjoint by dialog id.
#[derive(Debug, Clone)]
pub struct CorpusSplit {
    pub train: Vec<Dialog>,
    pub validation: Vec<Dialog>,
    pub test: Vec<Dialog>,
}

/// Deterministically shuffles `dialogs` by `seed` and partitions them
/// 72/8/20: test = round(20% of n), validation = round(8% of n), train =
/// remainder.
pub fn split_corpus(dialogs: Vec<Dialog>, seed: u64) -> Result<CorpusSplit, CorpusError> {
    let n = dialogs.len();
    if n < 10 {
        return Err(CorpusError::TooFewDialogs { have: n, need: 10 });
    }
    // Integer rounding; 2n/10 and 8n/100 never land exactly on .5.
    let n_test = (2 * n + 5) / 10;
    let n_val = (8 * n + 50) / 100;

    let mut shuffled = dialogs;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);

    let mut iter = shuffled.into_iter();
    let test: Vec<Dialog> = iter.by_ref().take(n_test).collect();
    let validation: Vec<Dialog> = iter.by_ref().take(n_val).collect();
    let train: Vec<Dialog> = iter.collect();
    Ok(CorpusSplit { train, validation, test })
}
