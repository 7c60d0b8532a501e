//! Parsing model output into modality-tagged traces and computing the binary
//! reward.
//!
//! A trace is valid for modality `t` when the first well-nested pair of `t`'s
//! structural tags encloses a nonempty rationale, and — for the code modality
//! — that rationale contains both a `def` and a `class` token as whole words.
//! The answer is read only from inside `<answer> ... <end_of_answer>`. The
//! reward is 1 exactly when the trace is valid and the answer matches the
//! gold label; a tag/modality mismatch therefore zeroes the reward even if
//! the answer happens to be right.

use crate::types::{Answer, Modality};
use serde::{Deserialize, Serialize};

pub const ANSWER_OPEN: &str = "<answer>";
pub const ANSWER_CLOSE: &str = "<end_of_answer>";

/// A model output parsed against one modality's format rules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub problem_id: String,
    pub modality: Modality,
    pub raw_text: String,
    /// Content of the first well-nested pair of the modality's tags.
    pub rationale: Option<String>,
    pub answer: Option<Answer>,
    pub valid: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardReason {
    Correct,
    WrongAnswer,
    InvalidFormat,
    NoAnswer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RewardResult {
    pub value: u8,
    pub reason: RewardReason,
}

/// Content of the first `open ... close` pair, or None when either tag is
/// missing or they appear out of order. Later pairs are ignored.
fn find_block<'a>(text: &'a str, open: &str, close: &str) -> Option<&'a str> {
    let start = text.find(open)? + open.len();
    let rel_end = text[start..].find(close)?;
    Some(&text[start..start + rel_end])
}

fn has_word(text: &str, word: &str) -> bool {
    let bytes = text.as_bytes();
    let is_word_char = |b: u8| b.is_ascii_alphanumeric() || b == b'_';
    let mut from = 0;
    while let Some(rel) = text[from..].find(word) {
        let at = from + rel;
        let before_ok = at == 0 || !is_word_char(bytes[at - 1]);
        let after = at + word.len();
        let after_ok = after == bytes.len() || !is_word_char(bytes[after]);
        if before_ok && after_ok {
            return true;
        }
        from = at + 1;
    }
    false
}

/// Format-consistency check for a trace text against modality `t`:
/// (a) `t`'s structural tags are present and correctly paired around a
/// nonempty rationale, and (b) for code traces, both a function definition
/// token (`def`) and a class definition token (`class`) occur as whole words.
pub fn is_valid(text: &str, t: Modality) -> bool {
    let Some(z) = find_block(text, &t.open_tag(), &t.close_tag()) else {
        return false;
    };
    if z.trim().is_empty() {
        return false;
    }
    match t {
        Modality::Code => has_word(z, "def") && has_word(z, "class"),
        _ => true,
    }
}

/// First option letter inside the answer block, per the documented answer
/// grammar: a parenthesized `(X)` or a standalone letter `X`, X in {A, B, C}.
fn parse_answer(block: &str) -> Option<Answer> {
    let bytes = block.as_bytes();
    let is_word_char = |b: u8| b.is_ascii_alphanumeric() || b == b'_';
    let as_answer = |b: u8| match b {
        b'A' => Some(Answer::A),
        b'B' => Some(Answer::B),
        b'C' => Some(Answer::C),
        _ => None,
    };
    for i in 0..bytes.len() {
        if bytes[i] == b'(' && i + 2 < bytes.len() && bytes[i + 2] == b')' {
            if let Some(a) = as_answer(bytes[i + 1]) {
                return Some(a);
            }
        }
        if let Some(a) = as_answer(bytes[i]) {
            let before_ok = i == 0 || !is_word_char(bytes[i - 1]);
            let after_ok = i + 1 == bytes.len() || !is_word_char(bytes[i + 1]);
            if before_ok && after_ok {
                return Some(a);
            }
        }
    }
    None
}

/// Parse arbitrary model text into a trace for modality `t`. Never fails:
/// missing pieces degrade to `None`/`valid = false`, and filtering happens
/// through the reward.
pub fn extract_trace(raw: &str, t: Modality, problem_id: &str) -> Trace {
    let rationale = find_block(raw, &t.open_tag(), &t.close_tag()).map(str::to_string);
    let answer = find_block(raw, ANSWER_OPEN, ANSWER_CLOSE).and_then(parse_answer);
    Trace {
        problem_id: problem_id.to_string(),
        modality: t,
        raw_text: raw.to_string(),
        rationale,
        answer,
        valid: is_valid(raw, t),
    }
}

impl Trace {
    /// Canonical rendering: tagged rationale followed by the answer block.
    /// Extraction is idempotent on this rendering.
    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(z) = &self.rationale {
            out.push_str(&self.modality.open_tag());
            out.push_str(z);
            out.push_str(&self.modality.close_tag());
        }
        if let Some(a) = self.answer {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&format!(
                "{ANSWER_OPEN}\nThe final answer is ({}).\n{ANSWER_CLOSE}",
                a.letter()
            ));
        }
        out
    }
}

/// The binary reward: 1 iff the trace is format-valid and its answer equals
/// the gold label. The reason pinpoints the first failed condition.
pub fn reward(tr: &Trace, gold: Answer) -> RewardResult {
    if !tr.valid {
        return RewardResult { value: 0, reason: RewardReason::InvalidFormat };
    }
    match tr.answer {
        None => RewardResult { value: 0, reason: RewardReason::NoAnswer },
        Some(a) if a == gold => RewardResult { value: 1, reason: RewardReason::Correct },
        Some(_) => RewardResult { value: 0, reason: RewardReason::WrongAnswer },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::{trace_text, valid_code_body};

    #[test]
    fn nl_trace_with_steps_extracts_cleanly() {
        let raw = trace_text(
            Modality::Nl,
            "Step 1: unpack the premises.\nStep 2: chain them.",
            Some(Answer::A),
        );
        let tr = extract_trace(&raw, Modality::Nl, "p1");
        assert!(tr.valid);
        assert_eq!(tr.answer, Some(Answer::A));
        assert_eq!(
            tr.rationale.as_deref(),
            Some("\nStep 1: unpack the premises.\nStep 2: chain them.\n")
        );
    }

    #[test]
    fn missing_close_tag_invalidates() {
        let raw = "<nl_cot>\nStep 1: reason.\n<answer>\n(A)\n<end_of_answer>";
        let tr = extract_trace(raw, Modality::Nl, "p1");
        assert!(!tr.valid);
        assert_eq!(tr.rationale, None);
        // The answer is still read; the reward handles the failure.
        assert_eq!(tr.answer, Some(Answer::A));
    }

    #[test]
    fn tag_modality_mismatch_invalidates() {
        let raw = trace_text(Modality::Code, valid_code_body(), Some(Answer::A));
        let tr = extract_trace(&raw, Modality::Nl, "p1");
        assert!(!tr.valid);
        assert_eq!(tr.rationale, None);
    }

    #[test]
    fn code_requires_both_def_and_class_as_whole_words() {
        assert!(is_valid(&trace_text(Modality::Code, valid_code_body(), None), Modality::Code));

        let defs_only = "def check():\n    return defer_class_name";
        assert!(!is_valid(&trace_text(Modality::Code, defs_only, None), Modality::Code));

        // Tokens inside identifiers do not count.
        let embedded = "classes = {}\nundefined = 1";
        assert!(!is_valid(&trace_text(Modality::Code, embedded, None), Modality::Code));
    }

    #[test]
    fn empty_rationale_is_invalid() {
        assert!(!is_valid("<nl_cot>   \n <end_of_nl_cot>", Modality::Nl));
        assert!(!is_valid("", Modality::Nl));
    }

    #[test]
    fn first_well_nested_pair_wins() {
        let raw = "<nl_cot>first<end_of_nl_cot>\n<nl_cot>second<end_of_nl_cot>\n\
                   <answer>(B)<end_of_answer>\n<answer>(C)<end_of_answer>";
        let tr = extract_trace(raw, Modality::Nl, "p1");
        assert_eq!(tr.rationale.as_deref(), Some("first"));
        assert_eq!(tr.answer, Some(Answer::B));
    }

    #[test]
    fn answer_grammar_accepts_documented_renderings() {
        for (block, expected) in [
            ("<answer>The final answer is (A).<end_of_answer>", Some(Answer::A)),
            ("<answer>Answer: (B)<end_of_answer>", Some(Answer::B)),
            ("<answer> C <end_of_answer>", Some(Answer::C)),
            ("<answer>I pick option B here<end_of_answer>", Some(Answer::B)),
            ("<answer>no option letter<end_of_answer>", None),
            ("The final answer is (A).", None), // outside the answer block
        ] {
            let tr = extract_trace(block, Modality::Nl, "p");
            assert_eq!(tr.answer, expected, "{block:?}");
        }
    }

    #[test]
    fn answer_is_not_read_from_prose_words() {
        // "Answer" contains no standalone option letter, and `(D)` is not an option.
        let raw = "<answer>Answers vary (D) unclear\nfinal: (B)<end_of_answer>";
        assert_eq!(extract_trace(raw, Modality::Nl, "p").answer, Some(Answer::B));
    }

    #[test]
    fn extraction_is_idempotent_on_renderings() {
        let cases = [
            trace_text(Modality::Nl, "Step 1: so on.", Some(Answer::A)),
            trace_text(Modality::Code, valid_code_body(), Some(Answer::B)),
            trace_text(Modality::TruthTable, "| T | F |", None),
        ];
        for raw in cases {
            for t in Modality::ALL {
                let once = extract_trace(&raw, t, "p");
                let twice = extract_trace(&once.render(), t, "p");
                assert_eq!(once.rationale, twice.rationale);
                assert_eq!(once.answer, twice.answer);
                assert_eq!(once.valid, twice.valid);
            }
        }
    }

    #[test]
    fn reward_checks_format_before_answer() {
        let valid = extract_trace(
            &trace_text(Modality::Nl, "Step 1.", Some(Answer::A)),
            Modality::Nl,
            "p",
        );
        assert_eq!(
            reward(&valid, Answer::A),
            RewardResult { value: 1, reason: RewardReason::Correct }
        );
        assert_eq!(
            reward(&valid, Answer::B),
            RewardResult { value: 0, reason: RewardReason::WrongAnswer }
        );

        // Correct answer but broken format: format failure dominates.
        let broken = extract_trace(
            "<nl_cot>Step 1.\n<answer>(A)<end_of_answer>",
            Modality::Nl,
            "p",
        );
        assert_eq!(
            reward(&broken, Answer::A),
            RewardResult { value: 0, reason: RewardReason::InvalidFormat }
        );

        let no_answer =
            extract_trace(&trace_text(Modality::Nl, "Step 1.", None), Modality::Nl, "p");
        assert_eq!(
            reward(&no_answer, Answer::A),
            RewardResult { value: 0, reason: RewardReason::NoAnswer }
        );
    }

    #[test]
    fn surrounding_text_never_changes_the_reward() {
        let core = trace_text(Modality::TruthTable, "| A | B |\n| T | F |", Some(Answer::C));
        let wrapped = format!("Sure! Here is my reasoning.\n{core}\nHope that helps.");
        let a = reward(&extract_trace(&core, Modality::TruthTable, "p"), Answer::C);
        let b = reward(&extract_trace(&wrapped, Modality::TruthTable, "p"), Answer::C);
        assert_eq!(a, b);
        assert_eq!(a.value, 1);
    }

    #[test]
    fn trace_serde_round_trips() {
        let tr = extract_trace(
            &trace_text(Modality::Code, valid_code_body(), Some(Answer::B)),
            Modality::Code,
            "p7",
        );
        let json = serde_json::to_string(&tr).unwrap();
        assert!(json.contains("\"modality\":\"code\""));
        let back: Trace = serde_json::from_str(&json).unwrap();
        assert_eq!(back, tr);
    }
}
