//! Shared fixtures for integration tests: the shipped trace files and their
//! expected extraction/reward outcomes.

use mot_core::rationale::RewardReason;
use mot_core::{Answer, Modality};

pub struct TraceCase {
    pub file: &'static str,
    /// Modality the trace is extracted against (which may mismatch the tags).
    pub modality: Modality,
    pub valid: bool,
    pub answer: Option<Answer>,
    pub gold: Answer,
    pub reward_value: u8,
    pub reason: RewardReason,
}

impl TraceCase {
    const fn new(
        file: &'static str,
        modality: Modality,
        valid: bool,
        answer: Option<Answer>,
        gold: Answer,
        reward_value: u8,
        reason: RewardReason,
    ) -> TraceCase {
        TraceCase { file, modality, valid, answer, gold, reward_value, reason }
    }
}

/// Every shipped trace fixture with its expected (valid, answer, reward).
pub fn trace_cases() -> Vec<TraceCase> {
    use Answer::*;
    use Modality::*;
    use RewardReason::*;
    vec![
        TraceCase::new("rockie_nl.txt", Nl, true, Some(A), A, 1, Correct),
        TraceCase::new("djokovic_code.txt", Code, true, Some(B), B, 1, Correct),
        TraceCase::new("bonnie_tt.txt", TruthTable, true, Some(C), C, 1, Correct),
        TraceCase::new("firtrees_tt.txt", TruthTable, true, Some(C), C, 1, Correct),
        TraceCase::new("james_nl.txt", Nl, true, Some(A), C, 0, WrongAnswer),
        TraceCase::new("bonnie_nl.txt", Nl, true, Some(A), C, 0, WrongAnswer),
        TraceCase::new("max_designs_nl.txt", Nl, true, Some(B), A, 0, WrongAnswer),
        TraceCase::new("blackmirror_nl.txt", Nl, true, Some(C), B, 0, WrongAnswer),
        TraceCase::new("blackmirror_tt.txt", TruthTable, true, Some(B), B, 1, Correct),
        TraceCase::new("blackmirror_code.txt", Code, true, Some(C), B, 0, WrongAnswer),
        TraceCase::new("rock_nl.txt", Nl, true, Some(B), C, 0, WrongAnswer),
        TraceCase::new("rock_tt.txt", TruthTable, true, Some(C), C, 1, Correct),
        // A function-only code trace fails the class-token rule even though
        // its answer matches gold.
        TraceCase::new("synth_code_no_class.txt", Code, false, Some(B), B, 0, InvalidFormat),
        TraceCase::new("synth_nl_unclosed.txt", Nl, false, Some(A), A, 0, InvalidFormat),
        // Code-tagged output read as an NL trace: tag/modality mismatch.
        TraceCase::new("djokovic_code.txt", Nl, false, Some(B), B, 0, InvalidFormat),
    ]
}

pub fn load_trace(file: &str) -> String {
    let path = format!("{}/tests/fixtures/traces/{file}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn theory_path(name: &str) -> String {
    format!("{}/tests/fixtures/theories/{name}", env!("CARGO_MANIFEST_DIR"))
}
