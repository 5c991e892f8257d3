//! On-disk formats.
//!
//! Checkpoint (`.ckpt`), all integers and floats little-endian:
//!
//! ```text
//! magic            4 bytes  "S2SD"
//! version          u32      1
//! embed_dim        u32
//! hidden_dim       u32
//! max_decode_len   u32
//! use_context      u8       0 or 1
//! context_source   u8       0 = previous turn's final encoder hidden state
//! split_seed       u64      corpus split seed used at training time
//! vocab            u32 token count, then per token: u32 byte length + UTF-8
//! tensors          u32 count, then per tensor:
//!                    u32 name length + UTF-8 name
//!                    u32 ndim, ndim x u32 dims
//!                    row-major f64 values
//! ```
//!
//! Store snapshot (`.store`):
//!
//! ```text
//! magic            4 bytes  "BSNN"
//! version          u32      1
//! mode             u8       0 encoder_final, 1 decoder_final, 2 concat
//! metric           u8       0 euclidean, 1 cosine
//! leaf_size        u32
//! dimension        u32
//! pair_count       u32
//! pairs            per pair: dimension x f64 state,
//!                    u32 length + UTF-8 action (space-joined tokens),
//!                    u32 length + UTF-8 origin dialog id, u32 origin turn
//! ```
//!
//! The ball tree is rebuilt on load; construction is deterministic, so a
//! snapshot round-trips to identical query results.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

use dialogforge_core::belief::{
    BeliefMode, DistanceMetric, StateActionPair, StateActionStore, StoreOptions,
};
use dialogforge_core::corpus::{
    parse_babi_text, render_babi_text, Dialog, NormalizeRules, Utterance, Vocabulary,
};
use dialogforge_core::seq2seq::{ModelConfig, Seq2SeqParams};

const CHECKPOINT_MAGIC: &[u8; 4] = b"S2SD";
const CHECKPOINT_VERSION: u32 = 1;
const STORE_MAGIC: &[u8; 4] = b"BSNN";
const STORE_VERSION: u32 = 1;

struct Reader<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, offset: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.offset + n > self.bytes.len() {
            bail!("truncated file at offset {}", self.offset);
        }
        let slice = &self.bytes[self.offset..self.offset + n];
        self.offset += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        Ok(String::from_utf8(bytes.to_vec()).context("invalid UTF-8 in file")?)
    }

    fn done(&self) -> bool {
        self.offset == self.bytes.len()
    }
}

fn push_string(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

/// Everything a checkpoint carries.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: ModelConfig,
    pub split_seed: u64,
    pub vocab: Vocabulary,
    pub params: Seq2SeqParams,
}

pub fn encode_checkpoint(checkpoint: &Checkpoint) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(checkpoint.config.embed_dim as u32).to_le_bytes());
    out.extend_from_slice(&(checkpoint.config.hidden_dim as u32).to_le_bytes());
    out.extend_from_slice(&(checkpoint.config.max_decode_len as u32).to_le_bytes());
    out.push(u8::from(checkpoint.config.use_context));
    out.push(0); // context source: previous turn's final encoder hidden state
    out.extend_from_slice(&checkpoint.split_seed.to_le_bytes());

    out.extend_from_slice(&(checkpoint.vocab.len() as u32).to_le_bytes());
    for token in checkpoint.vocab.tokens() {
        push_string(&mut out, token);
    }

    let tensors = checkpoint.params.tensors();
    out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for (name, shape, data) in tensors {
        push_string(&mut out, name);
        out.extend_from_slice(&(shape.len() as u32).to_le_bytes());
        for dim in &shape {
            out.extend_from_slice(&(*dim as u32).to_le_bytes());
        }
        for value in data {
            out.extend_from_slice(&value.to_le_bytes());
        }
    }
    out
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    let mut r = Reader::new(bytes);
    if r.take(4)? != CHECKPOINT_MAGIC {
        bail!("not a checkpoint file (bad magic)");
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        bail!("unsupported checkpoint version {version}");
    }
    let embed_dim = r.u32()? as usize;
    let hidden_dim = r.u32()? as usize;
    let max_decode_len = r.u32()? as usize;
    let use_context = match r.u8()? {
        0 => false,
        1 => true,
        v => bail!("invalid use_context flag {v}"),
    };
    let context_source = r.u8()?;
    if context_source != 0 {
        bail!("unsupported context source {context_source}");
    }
    let split_seed = r.u64()?;
    let config = ModelConfig { embed_dim, hidden_dim, max_decode_len, use_context };

    let vocab_len = r.u32()? as usize;
    let mut tokens = Vec::with_capacity(vocab_len);
    for _ in 0..vocab_len {
        tokens.push(r.string()?);
    }
    let vocab = Vocabulary::from_tokens(tokens).map_err(|e| anyhow::anyhow!("bad vocabulary: {e}"))?;

    let mut params = Seq2SeqParams::zeros_with(&config, vocab.len());
    let tensor_count = r.u32()? as usize;
    let expected = params.tensors();
    if tensor_count != expected.len() {
        bail!("expected {} tensors, found {tensor_count}", expected.len());
    }
    let expected_shapes: Vec<(String, Vec<usize>)> =
        expected.iter().map(|(n, s, _)| (n.to_string(), s.clone())).collect();
    for (name, shape) in &expected_shapes {
        let found_name = r.string()?;
        if &found_name != name {
            bail!("expected tensor {name}, found {found_name}");
        }
        let ndim = r.u32()? as usize;
        let mut dims = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            dims.push(r.u32()? as usize);
        }
        if &dims != shape {
            bail!("tensor {name}: expected shape {shape:?}, found {dims:?}");
        }
        let len: usize = dims.iter().product();
        let mut values = Vec::with_capacity(len);
        for _ in 0..len {
            values.push(r.f64()?);
        }
        let mut tensors = params.tensors_mut();
        let slot = tensors.iter_mut().find(|(n, _)| n == name).expect("known name");
        slot.1.copy_from_slice(&values);
    }
    if !r.done() {
        bail!("trailing bytes after checkpoint payload");
    }
    Ok(Checkpoint { config, split_seed, vocab, params })
}

pub fn save_checkpoint(path: &Path, checkpoint: &Checkpoint) -> Result<()> {
    fs::write(path, encode_checkpoint(checkpoint))
        .with_context(|| format!("writing checkpoint {}", path.display()))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = fs::read(path).with_context(|| format!("reading checkpoint {}", path.display()))?;
    decode_checkpoint(&bytes).with_context(|| format!("decoding checkpoint {}", path.display()))
}

fn mode_to_u8(mode: BeliefMode) -> u8 {
    match mode {
        BeliefMode::EncoderFinal => 0,
        BeliefMode::DecoderFinal => 1,
        BeliefMode::Concat => 2,
    }
}

fn mode_from_u8(v: u8) -> Result<BeliefMode> {
    Ok(match v {
        0 => BeliefMode::EncoderFinal,
        1 => BeliefMode::DecoderFinal,
        2 => BeliefMode::Concat,
        _ => bail!("invalid belief mode {v}"),
    })
}

pub fn encode_store(store: &StateActionStore) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(STORE_MAGIC);
    out.extend_from_slice(&STORE_VERSION.to_le_bytes());
    out.push(mode_to_u8(store.mode()));
    out.push(match store.metric() {
        DistanceMetric::Euclidean => 0,
        DistanceMetric::Cosine => 1,
    });
    out.extend_from_slice(&(store.leaf_size() as u32).to_le_bytes());
    out.extend_from_slice(&(store.dimension() as u32).to_le_bytes());
    out.extend_from_slice(&(store.len() as u32).to_le_bytes());
    for pair in store.pairs() {
        for value in &pair.state {
            out.extend_from_slice(&value.to_le_bytes());
        }
        push_string(&mut out, &pair.action.text());
        push_string(&mut out, &pair.origin.0);
        out.extend_from_slice(&pair.origin.1.to_le_bytes());
    }
    out
}

pub fn decode_store(bytes: &[u8]) -> Result<StateActionStore> {
    let mut r = Reader::new(bytes);
    if r.take(4)? != STORE_MAGIC {
        bail!("not a store snapshot (bad magic)");
    }
    let version = r.u32()?;
    if version != STORE_VERSION {
        bail!("unsupported store version {version}");
    }
    let mode = mode_from_u8(r.u8()?)?;
    let metric = match r.u8()? {
        0 => DistanceMetric::Euclidean,
        1 => DistanceMetric::Cosine,
        v => bail!("invalid distance metric {v}"),
    };
    let leaf_size = r.u32()? as usize;
    let dimension = r.u32()? as usize;
    let pair_count = r.u32()? as usize;
    let mut pairs = Vec::with_capacity(pair_count);
    for _ in 0..pair_count {
        let mut state = Vec::with_capacity(dimension);
        for _ in 0..dimension {
            state.push(r.f64()?);
        }
        let action = Utterance::from_text(&r.string()?)
            .map_err(|e| anyhow::anyhow!("bad action in store: {e}"))?;
        let dialog_id = r.string()?;
        let turn = r.u32()?;
        pairs.push(StateActionPair { state, action, origin: (dialog_id, turn) });
    }
    if !r.done() {
        bail!("trailing bytes after store payload");
    }
    StateActionStore::build(pairs, mode, StoreOptions { leaf_size, metric })
        .map_err(|e| anyhow::anyhow!("rebuilding store index: {e}"))
}

pub fn save_store(path: &Path, store: &StateActionStore) -> Result<()> {
    fs::write(path, encode_store(store)).with_context(|| format!("writing store {}", path.display()))
}

pub fn load_store(path: &Path) -> Result<StateActionStore> {
    let bytes = fs::read(path).with_context(|| format!("reading store {}", path.display()))?;
    decode_store(&bytes).with_context(|| format!("decoding store {}", path.display()))
}

/// One dialog per JSONL line: `{"id": ..., "turns": [{"user": ..., "agent": ...}]}`
/// with utterances as space-joined token strings.
pub fn render_jsonl(dialogs: &[Dialog]) -> String {
    let mut out = String::new();
    for dialog in dialogs {
        let turns: Vec<serde_json::Value> = dialog
            .turns()
            .iter()
            .map(|t| serde_json::json!({ "user": t.user.text(), "agent": t.agent.text() }))
            .collect();
        let line = serde_json::json!({ "id": dialog.id(), "turns": turns });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}

pub fn parse_jsonl(text: &str) -> Result<Vec<Dialog>> {
    let mut dialogs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(line).with_context(|| format!("line {}: invalid JSON", i + 1))?;
        let id = value["id"].as_str().with_context(|| format!("line {}: missing id", i + 1))?;
        let turns = value["turns"].as_array().with_context(|| format!("line {}: missing turns", i + 1))?;
        let mut pairs = Vec::with_capacity(turns.len());
        for turn in turns {
            let user = turn["user"].as_str().with_context(|| format!("line {}: missing user", i + 1))?;
            let agent =
                turn["agent"].as_str().with_context(|| format!("line {}: missing agent", i + 1))?;
            pairs.push((
                Utterance::from_text(user).map_err(|e| anyhow::anyhow!("line {}: {e}", i + 1))?,
                Utterance::from_text(agent).map_err(|e| anyhow::anyhow!("line {}: {e}", i + 1))?,
            ));
        }
        dialogs.push(
            Dialog::from_pairs(id.to_string(), pairs)
                .map_err(|e| anyhow::anyhow!("line {}: {e}", i + 1))?,
        );
    }
    Ok(dialogs)
}

/// Loads a corpus by extension: `.jsonl` as JSONL, anything else as the
/// line-oriented text format.
pub fn load_corpus(path: &Path) -> Result<Vec<Dialog>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading corpus {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "jsonl") {
        parse_jsonl(&text)
    } else {
        parse_babi_text(&text).map_err(|e| anyhow::anyhow!("parsing {}: {e}", path.display()))
    }
}

pub fn save_corpus_text(path: &Path, dialogs: &[Dialog]) -> Result<()> {
    fs::write(path, render_babi_text(dialogs))
        .with_context(|| format!("writing corpus {}", path.display()))
}

pub fn save_corpus_jsonl(path: &Path, dialogs: &[Dialog]) -> Result<()> {
    fs::write(path, render_jsonl(dialogs))
        .with_context(|| format!("writing corpus {}", path.display()))
}

/// Lexicon file: one `shortform<TAB>expansion` pair per line; `#` comments
/// and blank lines are skipped.
pub fn parse_lexicon(text: &str) -> Result<Vec<(String, Vec<String>)>> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (short, long) = line
            .split_once('\t')
            .with_context(|| format!("lexicon line {}: missing tab separator", i + 1))?;
        entries.push((
            short.trim().to_string(),
            long.split_whitespace().map(str::to_string).collect(),
        ));
    }
    Ok(entries)
}

/// One term per line; `#` comments and blank lines are skipped.
pub fn parse_term_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

/// Builds normalization rules from the built-in defaults plus optional
/// override files.
pub fn load_normalize_rules(
    lexicon: Option<&Path>,
    person_names: Option<&Path>,
    brand_terms: Option<&Path>,
) -> Result<NormalizeRules> {
    let mut rules = NormalizeRules::builtin();
    if let Some(path) = lexicon {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        for (short, long) in parse_lexicon(&text)? {
            rules.lingo.insert(short, long);
        }
    }
    if let Some(path) = person_names {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        rules.person_names.extend(parse_term_list(&text));
    }
    if let Some(path) = brand_terms {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        rules.brand_terms.extend(parse_term_list(&text));
    }
    Ok(rules)
}

/// Loss log line formatting shared by training and its tests.
pub fn format_loss_log(history: &[dialogforge_core::seq2seq::EpochStats]) -> String {
    let mut out = String::from("epoch\ttrain_loss\tvalidation_loss\tbest_validation\n");
    for stats in history {
        out.push_str(&format!(
            "{}\t{:.6}\t{:.6}\t{:.6}\n",
            stats.epoch, stats.train_loss, stats.validation_loss, stats.best_validation
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use dialogforge_core::corpus::generate_restaurant_corpus;

    #[test]
    fn jsonl_round_trips_dialogs_with_ids() {
        let dialogs = generate_restaurant_corpus(4, 9);
        let text = render_jsonl(&dialogs);
        let parsed = parse_jsonl(&text).unwrap();
        assert_eq!(parsed, dialogs);
    }

    #[test]
    fn lexicon_parses_tab_pairs() {
        let entries = parse_lexicon("# comment\nty\tthank you\n\nbrb\tbe right back\n").unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].0, "ty");
        assert_eq!(entries[0].1, ["thank", "you"]);
        assert!(parse_lexicon("missing separator\n").is_err());
    }

    #[test]
    fn checkpoint_round_trips_bit_exactly() {
        let config = ModelConfig { embed_dim: 4, hidden_dim: 6, max_decode_len: 8, use_context: true };
        let dialogs = generate_restaurant_corpus(3, 1);
        let vocab = dialogforge_core::corpus::build_vocabulary(&dialogs, 1);
        let params = Seq2SeqParams::init(&config, vocab.len(), 3);
        let checkpoint = Checkpoint { config, split_seed: 99, vocab, params };
        let bytes = encode_checkpoint(&checkpoint);
        let decoded = decode_checkpoint(&bytes).unwrap();
        assert_eq!(decoded, checkpoint);
        // Byte-stable: encoding the decoded checkpoint reproduces the bytes.
        assert_eq!(encode_checkpoint(&decoded), bytes);
    }

    #[test]
    fn corrupted_checkpoint_is_rejected() {
        let config = ModelConfig { embed_dim: 4, hidden_dim: 6, max_decode_len: 8, use_context: false };
        let dialogs = generate_restaurant_corpus(2, 1);
        let vocab = dialogforge_core::corpus::build_vocabulary(&dialogs, 1);
        let params = Seq2SeqParams::init(&config, vocab.len(), 3);
        let bytes = encode_checkpoint(&Checkpoint { config, split_seed: 0, vocab, params });

        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(decode_checkpoint(&bad_magic).is_err());

        let truncated = &bytes[..bytes.len() - 1];
        assert!(decode_checkpoint(truncated).is_err());
    }
}
