//! Rationale faithfulness judging and the four-category error distribution.
//!
//! A judge model receives the premises, conclusion, rationale, gold label,
//! and prediction, and returns a structured verdict naming which error
//! categories apply. Categories are not exclusive, so the aggregated
//! percentages may sum to more than 100.

use crate::data::Problem;
use crate::llm::{Backend, GenRequest, LlmError};
use crate::rationale::Trace;
use crate::types::{Answer, Modality};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JudgeError {
    #[error("judge response unparseable: {message}")]
    Unparseable { message: String },

    #[error(transparent)]
    Backend(#[from] LlmError),

    #[error("no verdicts to aggregate")]
    EmptyInput,

    #[error("judging requires an NL trace, found {0}")]
    WrongModality(Modality),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCategory {
    MissingBranch,
    InvalidConverse,
    CommonsenseInjection,
    FactualMisquote,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 4] = [
        ErrorCategory::MissingBranch,
        ErrorCategory::InvalidConverse,
        ErrorCategory::CommonsenseInjection,
        ErrorCategory::FactualMisquote,
    ];

    fn parse(s: &str) -> Option<ErrorCategory> {
        match s.trim().to_ascii_lowercase().replace('_', " ").as_str() {
            "missing branch" | "missing branches" => Some(ErrorCategory::MissingBranch),
            "invalid converse" => Some(ErrorCategory::InvalidConverse),
            "commonsense injection" => Some(ErrorCategory::CommonsenseInjection),
            "factual misquote" => Some(ErrorCategory::FactualMisquote),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ErrorCategory::MissingBranch => "missing branch",
            ErrorCategory::InvalidConverse => "invalid converse",
            ErrorCategory::CommonsenseInjection => "commonsense injection",
            ErrorCategory::FactualMisquote => "factual misquote",
        }
    }
}

/// The judge's structured verdict on one rationale.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorVerdict {
    pub problem_id: String,
    pub faithful: bool,
    pub error_types: Vec<ErrorCategory>,
    pub error_location: String,
    #[serde(rename = "override")]
    pub override_flag: bool,
    pub analysis: String,
}

/// Percent of judged cases exhibiting each category. Categories overlap, so
/// the percents may sum past 100; no normalization is applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorDistribution {
    pub percents: BTreeMap<ErrorCategory, f64>,
    pub cases: usize,
}

pub const JUDGE_PROMPT: &str = "\
You must determine whether a rationale faithfully justifies the truth value of a conclusion given a set of premises.

Faithful means all and only the steps actually used in deriving the conclusion:
- are grounded in the given premises or prior derived steps,
- apply valid inference rules (no illicit converse or contraposition),
- cover every disjunction branch or quantifier case,
- use no unstated assumptions, external knowledge, or background commonsense,
- and correctly assess whether the conclusion is supported or contradicted by the premises.

You must also diagnose where and how the rationale fails when it is unfaithful, allowing trivial unused remarks to be overridden.

Error Types:
- Missing Branch: Failing to exhaustively consider all branches of a disjunction, conditionals, or quantified cases.
- Invalid Converse: Illicitly reversing the direction of a conditional (e.g., mistaking 'A -> B' for 'B -> A').
- Commonsense Injection: Using external background knowledge or commonsense not entailed or implied by the premises.
- Factual Misquote: Misrepresenting, distorting, or misquoting the explicit content of the premises.

Input (JSON):
{
  \"premises\":   \"<string>\",
  \"conclusion\": \"<string>\",
  \"rationale\":  \"<string>\",
  \"label\":      \"<string>\",
  \"predict\":    \"<string>\"
}

Output (JSON):
{
  \"faithful\":         true | false,
  \"error_type\":       \"<missing branch | invalid converse | commonsense injection | factual misquote>\",
  \"error_location\":   \"<e.g., Step 3, Clause 2>\",
  \"override\":         true | false,
  \"analysis\":         \"<brief summary explaining why the reasoning is faithful or unfaithful, citing specific logical failures>\"
}

Notes:
- If multiple error types apply, list them all separated by commas.
- Always identify the first point in the rationale where the faithfulness failure occurs.
- Be concise, precise, and consistent in your labeling.

Input:
";

#[derive(Serialize)]
struct JudgeInput<'a> {
    premises: &'a str,
    conclusion: &'a str,
    rationale: &'a str,
    label: String,
    predict: String,
}

fn option_label(a: Answer) -> String {
    format!("({}) {}", a.letter(), a.word())
}

/// Render the full judge prompt for one problem/trace pair.
pub fn judge_prompt(p: &Problem, tr: &Trace) -> String {
    let input = JudgeInput {
        premises: &p.premises,
        conclusion: &p.conclusion,
        rationale: tr.rationale.as_deref().unwrap_or(""),
        label: option_label(p.gold),
        predict: tr.answer.map(option_label).unwrap_or_else(|| "(none)".into()),
    };
    format!("{JUDGE_PROMPT}{}", serde_json::to_string_pretty(&input).expect("input serializes"))
}

/// First balanced `{ ... }` object in the response text.
fn first_json_object(text: &str) -> Option<&str> {
    let start = text.find('{')?;
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, c) in text[start..].char_indices() {
        if in_string {
            match c {
                '\\' if !escaped => escaped = true,
                '"' if !escaped => in_string = false,
                _ => escaped = false,
            }
            continue;
        }
        match c {
            '"' => in_string = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[start..start + i + 1]);
                }
            }
            _ => {}
        }
    }
    None
}

#[derive(Deserialize)]
struct RawVerdict {
    faithful: bool,
    #[serde(default)]
    error_type: Option<String>,
    #[serde(default)]
    error_location: Option<String>,
    #[serde(default, rename = "override")]
    override_flag: Option<bool>,
    #[serde(default)]
    analysis: Option<String>,
}

fn parse_verdict(text: &str, problem_id: &str) -> Result<ErrorVerdict, JudgeError> {
    let object = first_json_object(text)
        .ok_or_else(|| JudgeError::Unparseable { message: "no JSON object found".into() })?;
    let raw: RawVerdict = serde_json::from_str(object)
        .map_err(|e| JudgeError::Unparseable { message: e.to_string() })?;

    let mut error_types = Vec::new();
    let type_field = raw.error_type.unwrap_or_default();
    for part in type_field.split(',') {
        let part = part.trim();
        if part.is_empty() || part.eq_ignore_ascii_case("none") {
            continue;
        }
        match ErrorCategory::parse(part) {
            Some(cat) => {
                if !error_types.contains(&cat) {
                    error_types.push(cat);
                }
            }
            None => {
                return Err(JudgeError::Unparseable {
                    message: format!("unknown error type {part:?}"),
                });
            }
        }
    }
    if raw.faithful && !error_types.is_empty() {
        return Err(JudgeError::Unparseable {
            message: "faithful verdict lists error types".into(),
        });
    }
    Ok(ErrorVerdict {
        problem_id: problem_id.to_string(),
        faithful: raw.faithful,
        error_types,
        error_location: raw.error_location.unwrap_or_default(),
        override_flag: raw.override_flag.unwrap_or(false),
        analysis: raw.analysis.unwrap_or_default(),
    })
}

/// Send one NL rationale to the judge backend and parse the verdict.
/// A malformed response is retried once before failing.
pub fn judge_rationale(
    p: &Problem,
    tr: &Trace,
    judge: &Backend,
) -> Result<ErrorVerdict, JudgeError> {
    if tr.modality != Modality::Nl {
        return Err(JudgeError::WrongModality(tr.modality));
    }
    let mut req = GenRequest::evaluation(judge_prompt(p, tr), &p.id, Modality::Nl);
    req.temperature = 0.0;
    let mut last_err = None;
    for _attempt in 0..2 {
        let texts = judge.generate(&req)?;
        match parse_verdict(&texts[0], &p.id) {
            Ok(verdict) => return Ok(verdict),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("two attempts made"))
}

/// Aggregate verdicts from failed cases into per-category percents.
pub fn aggregate_distribution(verdicts: &[ErrorVerdict]) -> Result<ErrorDistribution, JudgeError> {
    if verdicts.is_empty() {
        return Err(JudgeError::EmptyInput);
    }
    let mut percents = BTreeMap::new();
    for cat in ErrorCategory::ALL {
        let count = verdicts.iter().filter(|v| v.error_types.contains(&cat)).count();
        percents.insert(cat, 100.0 * count as f64 / verdicts.len() as f64);
    }
    Ok(ErrorDistribution { percents, cases: verdicts.len() })
}
