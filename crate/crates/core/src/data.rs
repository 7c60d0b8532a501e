//! Benchmark problem ingestion, keep-first trace filtering, and the
//! per-round curated training datasets.

use crate::artifact::{self, ArtifactHeader};
use crate::rationale::{reward, Trace};
use crate::rng::derive_rng;
use crate::types::{Answer, Modality};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },

    #[error("duplicate problem id: {id}")]
    DuplicateId { id: String },

    #[error("overlapping curated example for ({problem_id}, {modality})")]
    Overlap { problem_id: String, modality: Modality },

    #[error("invalid dataset: {0}")]
    Invalid(String),

    #[error("checksum mismatch: header says {expected}, body hashes to {found}")]
    ChecksumMismatch { expected: String, found: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn schema(line: usize, message: impl Into<String>) -> DataError {
    DataError::Schema { line, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Folio,
    Proofwriter,
    Proverqa,
    Custom,
}

/// One benchmark item: natural-language premises and conclusion, the gold
/// option, and optionally a formalization for the symbolic engine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub id: String,
    pub premises: String,
    pub conclusion: String,
    pub gold: Answer,
    pub depth: Option<u32>,
    pub source: Source,
    pub theory_file: Option<String>,
}

/// Gold labels as written by the benchmarks: FOLIO uses "Uncertain",
/// ProofWriter uses "Unknown"; both map to option C.
pub fn map_label(label: &str) -> Option<Answer> {
    match label.trim().to_ascii_lowercase().as_str() {
        "true" => Some(Answer::A),
        "false" => Some(Answer::B),
        "uncertain" | "unknown" => Some(Answer::C),
        _ => None,
    }
}

pub fn canonical_label(a: Answer) -> &'static str {
    a.word()
}

pub const PROBLEM_OPTIONS: [&str; 3] = ["True", "False", "Uncertain"];

#[derive(Deserialize)]
struct RawProblem {
    id: String,
    premises: String,
    conclusion: String,
    options: Vec<String>,
    label: String,
    #[serde(default)]
    depth: Option<u32>,
    #[serde(default)]
    source: Option<Source>,
    #[serde(default)]
    theory_file: Option<String>,
}

/// Load problems from a JSONL file, validating the schema and rejecting
/// duplicate ids. Records may carry their own `source`; otherwise
/// `default_source` applies.
pub fn load_problems(path: &Path, default_source: Source) -> Result<Vec<Problem>, DataError> {
    let (_, lines) = artifact::read_jsonl(path)?;
    let mut seen = HashSet::new();
    let mut problems = Vec::with_capacity(lines.len());
    for (line_no, line) in lines {
        let raw: RawProblem = serde_json::from_str(&line)
            .map_err(|e| schema(line_no, format!("malformed problem record: {e}")))?;
        if raw.options != PROBLEM_OPTIONS {
            return Err(schema(
                line_no,
                format!("options must be {PROBLEM_OPTIONS:?}, found {:?}", raw.options),
            ));
        }
        let gold = map_label(&raw.label)
            .ok_or_else(|| schema(line_no, format!("unmappable label {:?}", raw.label)))?;
        if !seen.insert(raw.id.clone()) {
            return Err(DataError::DuplicateId { id: raw.id });
        }
        problems.push(Problem {
            id: raw.id,
            premises: raw.premises,
            conclusion: raw.conclusion,
            gold,
            depth: raw.depth,
            source: raw.source.unwrap_or(default_source),
            theory_file: raw.theory_file,
        });
    }
    Ok(problems)
}

/// The keep-first rule: of all samples generated for a (problem, modality),
/// only the earliest one passing the reward check is retained.
pub fn keep_first_passing<'a>(traces: &'a [Trace], gold: Answer) -> Option<&'a Trace> {
    traces.iter().find(|tr| reward(tr, gold).value == 1)
}

/// One curated training record. The prompt is stored fully rendered so the
/// trainer consuming the export needs no prompt builder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuratedExample {
    pub problem_id: String,
    pub modality: Modality,
    pub prompt: String,
    pub target: String,
    pub round: u32,
}

/// A round's mixed training set: the concatenated per-modality examples in a
/// seeded shuffle order, with per-modality counts recorded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundDataset {
    pub round: u32,
    pub seed: u64,
    pub examples: Vec<CuratedExample>,
    pub counts: BTreeMap<Modality, usize>,
}

/// Mix per-modality example lists into one shuffled round dataset.
/// Deterministic for a fixed seed; rejects duplicate (problem, modality)
/// pairs and examples from another round.
pub fn mix_datasets(
    parts: &[Vec<CuratedExample>],
    seed: u64,
    round: u32,
) -> Result<RoundDataset, DataError> {
    let mut seen = HashSet::new();
    let mut counts: BTreeMap<Modality, usize> =
        Modality::ALL.iter().map(|&m| (m, 0)).collect();
    let mut examples = Vec::new();
    for part in parts {
        for ex in part {
            if ex.round != round {
                return Err(DataError::Invalid(format!(
                    "example for ({}, {}) belongs to round {}, not {round}",
                    ex.problem_id, ex.modality, ex.round
                )));
            }
            if !seen.insert((ex.problem_id.clone(), ex.modality)) {
                return Err(DataError::Overlap {
                    problem_id: ex.problem_id.clone(),
                    modality: ex.modality,
                });
            }
            *counts.get_mut(&ex.modality).unwrap() += 1;
            examples.push(ex.clone());
        }
    }
    let mut rng = derive_rng("mix", seed, &round.to_string());
    examples.shuffle(&mut rng);
    Ok(RoundDataset { round, seed, examples, counts })
}

fn counts_by_key(counts: &BTreeMap<Modality, usize>) -> BTreeMap<String, usize> {
    counts.iter().map(|(m, &c)| (m.key().to_string(), c)).collect()
}

/// Export a round dataset as JSONL with a checksummed header.
pub fn export_round(ds: &RoundDataset, path: &Path) -> Result<(), DataError> {
    export_round_with(ds, path, &BTreeMap::new())
}

/// [`export_round`] with input checksums recorded in the header.
pub fn export_round_with(
    ds: &RoundDataset,
    path: &Path,
    inputs: &BTreeMap<String, String>,
) -> Result<(), DataError> {
    let body: Vec<String> = ds
        .examples
        .iter()
        .map(|ex| serde_json::to_string(ex).expect("curated example serializes"))
        .collect();
    let mut header = ArtifactHeader::new("round_dataset", ds.seed);
    header.round = Some(ds.round);
    header.counts = Some(counts_by_key(&ds.counts));
    header.inputs = inputs.clone();
    artifact::write_jsonl(path, header, &body)?;
    Ok(())
}

/// Import a round dataset, verifying the body checksum and the recorded
/// per-modality counts. Lossless inverse of [`export_round`].
pub fn import_round(path: &Path) -> Result<RoundDataset, DataError> {
    let (header, lines) = artifact::read_jsonl(path)?;
    let header = header
        .ok_or_else(|| DataError::Invalid(format!("{} has no artifact header", path.display())))?;
    if header.kind != "round_dataset" {
        return Err(DataError::Invalid(format!("expected a round_dataset, found {}", header.kind)));
    }
    let body: Vec<String> = lines.iter().map(|(_, l)| l.clone()).collect();
    let found = artifact::body_checksum(&body);
    let expected = header
        .checksum
        .ok_or_else(|| DataError::Invalid("header lacks a checksum".into()))?;
    if found != expected {
        return Err(DataError::ChecksumMismatch { expected, found });
    }
    let round = header.round.ok_or_else(|| DataError::Invalid("header lacks a round".into()))?;

    let mut examples = Vec::with_capacity(lines.len());
    for (line_no, line) in &lines {
        let ex: CuratedExample = serde_json::from_str(line)
            .map_err(|e| schema(*line_no, format!("malformed curated example: {e}")))?;
        examples.push(ex);
    }
    let mut counts: BTreeMap<Modality, usize> =
        Modality::ALL.iter().map(|&m| (m, 0)).collect();
    for ex in &examples {
        *counts.get_mut(&ex.modality).unwrap() += 1;
    }
    if let Some(recorded) = &header.counts {
        if *recorded != counts_by_key(&counts) {
            return Err(DataError::Invalid("recorded counts do not match the body".into()));
        }
    }
    Ok(RoundDataset { round, seed: header.seed, examples, counts })
}
