use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{CorpusError, Dialog, Turn, Utterance};

/// Renders dialogs in the line-oriented text format:
/// `<turn-id> <user utterance>\t<agent response>`, one blank line after each
/// dialog. Dialog ids are not carried by this format; the JSONL sidecar
/// preserves them.
pub fn render_babi_text(dialogs: &[Dialog]) -> String {
    let mut out = String::new();
    for dialog in dialogs {
        for turn in dialog.turns() {
            out.push_str(&format!("{} {}\t{}\n", turn.index, turn.user.text(), turn.agent.text()));
        }
        out.push('\n');
    }
    out
}

/// Parses the line-oriented text format. Dialog blocks are delimited by
/// blank lines; parsed dialogs get sequential ids `dialog-00001`, ...
pub fn parse_babi_text(text: &str) -> Result<Vec<Dialog>, CorpusError> {
    let mut dialogs = Vec::new();
    let mut turns: Vec<Turn> = Vec::new();

    let close_block = |turns: &mut Vec<Turn>, dialogs: &mut Vec<Dialog>| -> Result<(), CorpusError> {
        if turns.is_empty() {
            return Ok(());
        }
        let id = format!("dialog-{:05}", dialogs.len() + 1);
        let dialog = Dialog::new(id, core::mem::take(turns))?;
        dialogs.push(dialog);
        Ok(())
    };

    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            close_block(&mut turns, &mut dialogs)?;
            continue;
        }
        let (id_part, rest) = line
            .split_once(' ')
            .ok_or(CorpusError::Parse { line: line_no, reason: "missing turn id" })?;
        let found: u32 = id_part
            .parse()
            .map_err(|_| CorpusError::Parse { line: line_no, reason: "turn id is not an integer" })?;
        let expected = turns.len() as u32 + 1;
        if found != expected {
            return Err(CorpusError::OutOfOrderTurn { line: line_no, expected, found });
        }
        let (user_part, agent_part) = rest
            .split_once('\t')
            .ok_or(CorpusError::Parse { line: line_no, reason: "missing tab separator" })?;
        let user = Utterance::from_text(user_part)
            .map_err(|_| CorpusError::Parse { line: line_no, reason: "empty user utterance" })?;
        let agent = Utterance::from_text(agent_part)
            .map_err(|_| CorpusError::Parse { line: line_no, reason: "empty agent response" })?;
        turns.push(Turn { user, agent, index: found });
    }
    close_block(&mut turns, &mut dialogs)?;
    Ok(dialogs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_block_single_turn() {
        let text = "1 hi\thello what can i help you with today\n\n";
        let dialogs = parse_babi_text(text).unwrap();
        assert_eq!(dialogs.len(), 1);
        assert_eq!(dialogs[0].turns().len(), 1);
        assert_eq!(dialogs[0].turns()[0].user.text(), "hi");
        assert_eq!(
            dialogs[0].turns()[0].agent.text(),
            "hello what can i help you with today"
        );
    }

    #[test]
    fn blank_line_separates_dialogs() {
        let text = "1 hi\thello\n\n1 hey\thi there\n2 bye\tgoodbye\n";
        let dialogs = parse_babi_text(text).unwrap();
        assert_eq!(dialogs.len(), 2);
        assert_eq!(dialogs[0].id(), "dialog-00001");
        assert_eq!(dialogs[1].id(), "dialog-00002");
        assert_eq!(dialogs[1].turns().len(), 2);
    }

    #[test]
    fn missing_tab_is_a_parse_error() {
        let text = "1 hi hello\n";
        assert_eq!(
            parse_babi_text(text),
            Err(CorpusError::Parse { line: 1, reason: "missing tab separator" })
        );
    }

    #[test]
    fn out_of_order_turn_ids_are_rejected() {
        let text = "1 hi\thello\n3 bye\tgoodbye\n";
        assert_eq!(
            parse_babi_text(text),
            Err(CorpusError::OutOfOrderTurn { line: 2, expected: 2, found: 3 })
        );
    }

    #[test]
    fn render_then_parse_preserves_turns() {
        let dialogs = super::super::generate_restaurant_corpus(3, 11);
        let text = render_babi_text(&dialogs);
        let reparsed = parse_babi_text(&text).unwrap();
        assert_eq!(reparsed.len(), dialogs.len());
        for (a, b) in dialogs.iter().zip(&reparsed) {
            assert_eq!(a.turns(), b.turns());
        }
    }
}
