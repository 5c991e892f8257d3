use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{CorpusError, Utterance, Vocabulary};

/// Configuration for [`normalize_utterance`]: lingo expansions, person names
/// to de-identify, and brand terms to mask. All entries are lowercase.
#[derive(Debug, Clone, Default)]
pub struct NormalizeRules {
    pub lingo: BTreeMap<String, Vec<String>>,
    pub person_names: BTreeSet<String>,
    pub brand_terms: BTreeSet<String>,
}

impl NormalizeRules {
    /// The rules shipped with the workbench; the same entries live in the
    /// repository's `config/` directory as editable plain-text files.
    pub fn builtin() -> Self {
        let mut lingo = BTreeMap::new();
        for (short, long) in [
            ("ty", "thank you"),
            ("thx", "thanks"),
            ("pls", "please"),
            ("plz", "please"),
            ("u", "you"),
            ("ur", "your"),
            ("im", "i 'm"),
            ("dont", "do not"),
            ("lol", "laughing out loud"),
            ("omg", "oh my god"),
            ("asap", "as soon as possible"),
        ] {
            lingo.insert(
                short.to_string(),
                long.split_whitespace().map(ToString::to_string).collect(),
            );
        }
        let person_names = ["john", "mary", "alice", "bob", "james", "sarah", "michael", "linda"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let brand_terms = ["acme", "globex", "initech"].iter().map(|s| s.to_string()).collect();
        Self { lingo, person_names, brand_terms }
    }
}

/// Tokens shaped like `<PERSON>` pass through every stage untouched; this is
/// what makes normalization idempotent for already-masked text.
fn is_placeholder(token: &str) -> bool {
    token.len() > 2
        && token.starts_with('<')
        && token.ends_with('>')
        && token[1..token.len() - 1].chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_money(token: &str) -> bool {
    let mut chars = token.chars();
    chars.next() == Some('$') && {
        let rest = chars.as_str();
        !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit())
    }
}

/// Splits `. , ? !` into standalone tokens and breaks a word before an
/// embedded apostrophe, keeping the apostrophe with the suffix ("you're" ->
/// "you", "'re").
fn split_punctuation(token: &str, out: &mut Vec<String>) {
    let mut current = String::new();
    for c in token.chars() {
        match c {
            '.' | ',' | '?' | '!' => {
                if !current.is_empty() {
                    out.push(core::mem::take(&mut current));
                }
                out.push(c.to_string());
            }
            '\'' => {
                if !current.is_empty() {
                    out.push(core::mem::take(&mut current));
                }
                current.push(c);
            }
            _ => current.push(c),
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
}

fn edit_distance_at_most_one(a: &str, b: &str) -> bool {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (short, long) = if a.len() <= b.len() { (&a, &b) } else { (&b, &a) };
    match long.len() - short.len() {
        0 => short.iter().zip(long.iter()).filter(|(x, y)| x != y).count() <= 1,
        1 => {
            // One insertion: skip the first mismatch in the longer string.
            let mut i = 0;
            while i < short.len() && short[i] == long[i] {
                i += 1;
            }
            short[i..] == long[i + 1..]
        }
        _ => false,
    }
}

/// Replaces an out-of-vocabulary token by the unique vocabulary token at
/// edit distance 1, when exactly one exists.
fn spell_correct(token: &str, vocab: &Vocabulary) -> Option<String> {
    let mut found: Option<&str> = None;
    for candidate in vocab.tokens().iter().skip(super::vocab::RESERVED_TOKENS.len()) {
        if is_placeholder(candidate) {
            continue;
        }
        if edit_distance_at_most_one(token, candidate) && token != candidate {
            if found.is_some() {
                return None;
            }
            found = Some(candidate);
        }
    }
    found.map(ToString::to_string)
}

/// Normalizes raw text into an utterance. Pipeline order is fixed:
/// lowercase, punctuation split, entity masking (person names ->
/// `<PERSON>`, currency -> `<MONEY>`, brand terms -> `<masked>`), lingo
/// expansion, then spell correction against `vocab_hint` when present.
pub fn normalize_utterance(
    raw: &str,
    rules: &NormalizeRules,
    vocab_hint: Option<&Vocabulary>,
) -> Result<Utterance, CorpusError> {
    if raw.trim().is_empty() {
        return Err(CorpusError::EmptyUtterance);
    }

    let mut tokens: Vec<String> = Vec::new();
    for piece in raw.split_whitespace() {
        if is_placeholder(piece) {
            tokens.push(piece.to_string());
            continue;
        }
        split_punctuation(&piece.to_lowercase(), &mut tokens);
    }

    let mut masked: Vec<String> = Vec::with_capacity(tokens.len());
    for token in tokens {
        if is_placeholder(&token) {
            masked.push(token);
        } else if rules.person_names.contains(&token) {
            masked.push("<PERSON>".to_string());
        } else if is_money(&token) {
            masked.push("<MONEY>".to_string());
        } else if rules.brand_terms.contains(&token) {
            masked.push("<masked>".to_string());
        } else {
            masked.push(token);
        }
    }

    let mut expanded: Vec<String> = Vec::with_capacity(masked.len());
    for token in masked {
        match rules.lingo.get(&token) {
            Some(expansion) => expanded.extend(expansion.iter().cloned()),
            None => expanded.push(token),
        }
    }

    let corrected = match vocab_hint {
        Some(vocab) => expanded
            .into_iter()
            .map(|token| {
                if is_placeholder(&token) || vocab.contains(&token) {
                    token
                } else {
                    spell_correct(&token, vocab).unwrap_or(token)
                }
            })
            .collect(),
        None => expanded,
    };

    Utterance::new(corrected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rules() -> NormalizeRules {
        NormalizeRules::builtin()
    }

    #[test]
    fn lingo_expansion() {
        let out = normalize_utterance("ty", &rules(), None).unwrap();
        assert_eq!(out.tokens(), ["thank", "you"]);
    }

    #[test]
    fn currency_is_masked() {
        let out = normalize_utterance("you charged me $30", &rules(), None).unwrap();
        assert_eq!(out.tokens(), ["you", "charged", "me", "<MONEY>"]);
    }

    #[test]
    fn person_and_brand_masking() {
        let out = normalize_utterance("John from Acme called", &rules(), None).unwrap();
        assert_eq!(out.tokens(), ["<PERSON>", "from", "<masked>", "called"]);
    }

    #[test]
    fn punctuation_and_contractions_split() {
        let out = normalize_utterance("You're welcome!", &rules(), None).unwrap();
        assert_eq!(out.tokens(), ["you", "'re", "welcome", "!"]);
    }

    #[test]
    fn in_vocabulary_token_passes_through() {
        let vocab = super::super::vocab::build_vocabulary(
            &[super::super::Dialog::from_pairs(
                "d".to_string(),
                vec![(
                    Utterance::from_text("hello").unwrap(),
                    Utterance::from_text("hello there").unwrap(),
                )],
            )
            .unwrap()],
            1,
        );
        let out = normalize_utterance("hello", &rules(), Some(&vocab)).unwrap();
        assert_eq!(out.tokens(), ["hello"]);
    }

    #[test]
    fn unique_edit_distance_one_correction() {
        let vocab = super::super::vocab::build_vocabulary(
            &[super::super::Dialog::from_pairs(
                "d".to_string(),
                vec![(
                    Utterance::from_text("hello world").unwrap(),
                    Utterance::from_text("sure").unwrap(),
                )],
            )
            .unwrap()],
            1,
        );
        let out = normalize_utterance("helo", &rules(), Some(&vocab)).unwrap();
        assert_eq!(out.tokens(), ["hello"]);
        // Ambiguous (matches nothing at distance 1): left unchanged.
        let out = normalize_utterance("zzzz", &rules(), Some(&vocab)).unwrap();
        assert_eq!(out.tokens(), ["zzzz"]);
    }

    #[test]
    fn ambiguous_correction_is_left_alone() {
        let vocab = super::super::vocab::build_vocabulary(
            &[super::super::Dialog::from_pairs(
                "d".to_string(),
                vec![(
                    Utterance::from_text("cat car").unwrap(),
                    Utterance::from_text("ok").unwrap(),
                )],
            )
            .unwrap()],
            1,
        );
        // "cas" is distance 1 from both "cat" and "car".
        let out = normalize_utterance("cas", &rules(), Some(&vocab)).unwrap();
        assert_eq!(out.tokens(), ["cas"]);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert_eq!(normalize_utterance("   ", &rules(), None), Err(CorpusError::EmptyUtterance));
    }

    #[test]
    fn idempotent_on_own_output() {
        for raw in ["Ty for the help!", "John charged me $30, lol", "<SILENCE>", "you're great"] {
            let once = normalize_utterance(raw, &rules(), None).unwrap();
            let twice = normalize_utterance(&once.text(), &rules(), None).unwrap();
            assert_eq!(once, twice, "not idempotent for {raw:?}");
        }
    }
}
