//! The self-evolving training loop and voting inference.
//!
//! Each round samples S rationales per (problem, modality) from the current
//! model, keeps the first one per pair that passes the reward check, mixes
//! the three per-modality sets with the seed, exports the round dataset, and
//! optionally hands it to an external trainer hook whose stdout names the
//! model for the next round (on-policy continuation). Few-shot exemplars are
//! used in round 1 only; all later rounds run zero-shot.
//!
//! Inference generates one output per modality and majority-votes the
//! answers; ties are broken by a seeded uniform pick among the modalities
//! that produced an answer, keyed by (seed, problem id) so outcomes are
//! reproducible and independent of processing order.

use crate::data::{
    export_round_with, keep_first_passing, mix_datasets, CuratedExample, DataError, Problem,
    RoundDataset,
};
use crate::llm::{build_prompt, Backend, FewShotSet, GenRequest, LlmError};
use crate::rationale::{extract_trace, Trace};
use crate::rng::derive_rng;
use crate::types::{Answer, Modality};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Backend(#[from] LlmError),

    #[error(transparent)]
    Data(#[from] DataError),

    #[error("trainer hook failed: {message}")]
    TrainerHookFailed { message: String },

    #[error("no modality produced an answer for problem {problem_id}")]
    NoAnswerProduced { problem_id: String },
}

/// Configuration for the self-evolving loop.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundConfig {
    /// Total rounds N.
    pub rounds: u32,
    /// Samples S per (problem, modality).
    pub samples: u32,
    pub seed: u64,
    /// Few-shot prompting in round 1; later rounds are always zero-shot.
    pub fewshot_round1: bool,
    /// Command template receiving `{round}` and `{dataset_path}`; must print
    /// the next model identifier on stdout.
    pub trainer_hook: Option<String>,
    pub collect_temperature: f64,
    pub eval_temperature: f64,
    pub max_tokens: u32,
    /// When set, each round's export also carries every earlier round's kept
    /// examples. Off by default: a round trains on its own traces only.
    pub accumulate_rounds: bool,
}

impl Default for RoundConfig {
    fn default() -> Self {
        RoundConfig {
            rounds: 2,
            samples: crate::llm::DEFAULT_SAMPLE_COUNT,
            seed: crate::DEFAULT_SEED,
            fewshot_round1: true,
            trainer_hook: None,
            collect_temperature: crate::llm::COLLECT_TEMPERATURE,
            eval_temperature: crate::llm::EVAL_TEMPERATURE,
            max_tokens: crate::llm::DEFAULT_MAX_TOKENS,
            accumulate_rounds: false,
        }
    }
}

/// What one round produced.
#[derive(Debug, Clone)]
pub struct RoundReport {
    pub round: u32,
    pub dataset: RoundDataset,
    pub export_path: PathBuf,
    pub next_model: Option<String>,
}

fn fewshot_for(sets: &[FewShotSet; 3], t: Modality) -> &FewShotSet {
    &sets[Modality::ALL.iter().position(|&m| m == t).unwrap()]
}

/// Run one collection round: sample, filter keep-first, mix, export, and —
/// when a trainer hook is configured — hand the export off for fine-tuning.
pub fn run_round(
    n: u32,
    cfg: &RoundConfig,
    problems: &[Problem],
    backend: &Backend,
    out_dir: &Path,
    inputs: &BTreeMap<String, String>,
) -> Result<RoundReport, PipelineError> {
    let fewshot_sets = [
        FewShotSet::builtin(Modality::Nl),
        FewShotSet::builtin(Modality::Code),
        FewShotSet::builtin(Modality::TruthTable),
    ];
    let use_fewshot = n == 1 && cfg.fewshot_round1;

    let tasks: Vec<(usize, Modality)> = problems
        .iter()
        .enumerate()
        .flat_map(|(i, _)| Modality::ALL.iter().map(move |&t| (i, t)))
        .collect();

    let results: Vec<Result<Option<CuratedExample>, PipelineError>> = tasks
        .par_iter()
        .map(|&(pi, t)| {
            let p = &problems[pi];
            let fewshot = use_fewshot.then(|| fewshot_for(&fewshot_sets, t));
            let prompt = build_prompt(p, t, fewshot);
            let mut req = GenRequest::collection(prompt.clone(), &p.id, t);
            req.temperature = cfg.collect_temperature;
            req.max_tokens = cfg.max_tokens;
            req.n_samples = cfg.samples;
            req.seed = Some(cfg.seed);
            let texts = backend.generate(&req)?;
            let traces: Vec<Trace> =
                texts.iter().map(|raw| extract_trace(raw, t, &p.id)).collect();
            Ok(keep_first_passing(&traces, p.gold).map(|tr| CuratedExample {
                problem_id: p.id.clone(),
                modality: t,
                prompt,
                target: tr.render(),
                round: n,
            }))
        })
        .collect();

    let mut parts: Vec<Vec<CuratedExample>> = vec![Vec::new(); Modality::ALL.len()];
    for result in results {
        if let Some(ex) = result? {
            let slot = Modality::ALL.iter().position(|&m| m == ex.modality).unwrap();
            parts[slot].push(ex);
        }
    }

    let dataset = mix_datasets(&parts, cfg.seed, n)?;
    let export_path = out_dir.join(format!("round_{n}.jsonl"));
    export_round_with(&dataset, &export_path, inputs)?;

    let next_model = match &cfg.trainer_hook {
        Some(template) => Some(run_trainer_hook(template, n, &export_path)?),
        None => None,
    };
    Ok(RoundReport { round: n, dataset, export_path, next_model })
}

fn run_trainer_hook(template: &str, round: u32, dataset_path: &Path) -> Result<String, PipelineError> {
    let command = template
        .replace("{round}", &round.to_string())
        .replace("{dataset_path}", &dataset_path.display().to_string());
    let output = std::process::Command::new("sh")
        .arg("-c")
        .arg(&command)
        .output()
        .map_err(|e| PipelineError::TrainerHookFailed { message: format!("{command:?}: {e}") })?;
    if !output.status.success() {
        return Err(PipelineError::TrainerHookFailed {
            message: format!(
                "{command:?} exited with {}: {}",
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            ),
        });
    }
    let stdout = String::from_utf8_lossy(&output.stdout);
    stdout
        .lines()
        .rev()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .map(str::to_string)
        .ok_or_else(|| PipelineError::TrainerHookFailed {
            message: format!("{command:?} printed no model identifier"),
        })
}

/// Run the full loop for `cfg.rounds` rounds. Round n samples from the model
/// named by round n-1's trainer hook (on-policy); without a hook the backend
/// is reused unchanged.
pub fn evolve(
    cfg: &RoundConfig,
    problems: &[Problem],
    backend: &Backend,
    out_dir: &Path,
    inputs: &BTreeMap<String, String>,
) -> Result<Vec<RoundReport>, PipelineError> {
    std::fs::create_dir_all(out_dir).map_err(DataError::from)?;
    let mut current = backend.clone();
    let mut reports = Vec::with_capacity(cfg.rounds as usize);
    let mut accumulated: Vec<CuratedExample> = Vec::new();
    for n in 1..=cfg.rounds {
        let mut report = run_round(n, cfg, problems, &current, out_dir, inputs)?;
        if cfg.accumulate_rounds {
            accumulated.extend(report.dataset.examples.iter().cloned());
            let combined = accumulate_dataset(&accumulated, cfg.seed, n);
            export_round_with(&combined, &report.export_path, inputs)?;
            report.dataset = combined;
        }
        if let Some(model) = &report.next_model {
            current = current.with_model(model);
        }
        reports.push(report);
    }
    Ok(reports)
}

/// A cumulative dataset over all rounds so far: examples keep their origin
/// round; the shuffle is reseeded per round.
fn accumulate_dataset(examples: &[CuratedExample], seed: u64, round: u32) -> RoundDataset {
    let mut shuffled = examples.to_vec();
    let mut rng = derive_rng("accumulate", seed, &round.to_string());
    shuffled.shuffle(&mut rng);
    let mut counts: BTreeMap<Modality, usize> = Modality::ALL.iter().map(|&m| (m, 0)).collect();
    for ex in &shuffled {
        *counts.get_mut(&ex.modality).unwrap() += 1;
    }
    RoundDataset { round, seed, examples: shuffled, counts }
}

/// Per-problem inference outcome: each modality's answer and the voted final.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VoteOutcome {
    pub answers: BTreeMap<Modality, Option<Answer>>,
    #[serde(rename = "final")]
    pub final_answer: Answer,
    pub tie_broken: bool,
    pub tie_source: Option<Modality>,
}

/// Majority vote over per-modality answers. A strict majority among the
/// non-None votes wins outright; otherwise one of the modalities that
/// produced an answer is picked uniformly and its answer is final. Votes of
/// None are excluded from the count: an absent answer is not evidence.
pub fn vote<R: Rng>(
    answers: &[(Modality, Option<Answer>)],
    problem_id: &str,
    rng: &mut R,
) -> Result<VoteOutcome, PipelineError> {
    let produced: Vec<(Modality, Answer)> =
        answers.iter().filter_map(|&(m, a)| a.map(|a| (m, a))).collect();
    if produced.is_empty() {
        return Err(PipelineError::NoAnswerProduced { problem_id: problem_id.to_string() });
    }
    let mut counts: BTreeMap<Answer, usize> = BTreeMap::new();
    for &(_, a) in &produced {
        *counts.entry(a).or_insert(0) += 1;
    }
    let answer_map: BTreeMap<Modality, Option<Answer>> = answers.iter().cloned().collect();
    let majority = counts.iter().find(|(_, &c)| c * 2 > produced.len()).map(|(&a, _)| a);
    if let Some(final_answer) = majority {
        return Ok(VoteOutcome { answers: answer_map, final_answer, tie_broken: false, tie_source: None });
    }
    let (tie_source, final_answer) = produced[rng.gen_range(0..produced.len())];
    Ok(VoteOutcome {
        answers: answer_map,
        final_answer,
        tie_broken: true,
        tie_source: Some(tie_source),
    })
}

/// One generation per modality at evaluation temperature, then the majority
/// vote. Also returns the three traces for logging.
pub fn mot_infer_full(
    p: &Problem,
    backend: &Backend,
    seed: u64,
) -> Result<(VoteOutcome, Vec<Trace>), PipelineError> {
    let mut traces = Vec::with_capacity(Modality::ALL.len());
    let mut answers = Vec::with_capacity(Modality::ALL.len());
    for t in Modality::ALL {
        let prompt = build_prompt(p, t, None);
        let req = GenRequest::evaluation(prompt, &p.id, t);
        let texts = backend.generate(&req)?;
        let tr = extract_trace(&texts[0], t, &p.id);
        answers.push((t, tr.answer));
        traces.push(tr);
    }
    let mut rng = derive_rng("tiebreak", seed, &p.id);
    let outcome = vote(&answers, &p.id, &mut rng)?;
    Ok((outcome, traces))
}

pub fn mot_infer(p: &Problem, backend: &Backend, seed: u64) -> Result<VoteOutcome, PipelineError> {
    mot_infer_full(p, backend, seed).map(|(outcome, _)| outcome)
}

/// Plurality answer with a seeded uniform tie-break among the tied options.
pub fn plurality<R: Rng>(answers: &[Answer], rng: &mut R) -> Answer {
    let mut counts: BTreeMap<Answer, usize> = BTreeMap::new();
    for &a in answers {
        *counts.entry(a).or_insert(0) += 1;
    }
    let top = counts.values().copied().max().expect("nonempty answers");
    let tied: Vec<Answer> =
        counts.iter().filter(|(_, &c)| c == top).map(|(&a, _)| a).collect();
    if tied.len() == 1 {
        tied[0]
    } else {
        tied[rng.gen_range(0..tied.len())]
    }
}

/// Self-consistency in one modality: k samples, plurality answer.
pub fn self_consistency(
    p: &Problem,
    t: Modality,
    k: u32,
    backend: &Backend,
    seed: u64,
) -> Result<Answer, PipelineError> {
    let (answer, _) = self_consistency_full(p, t, k, backend, seed)?;
    Ok(answer)
}

/// Like [`self_consistency`] but also returns the k traces for logging.
pub fn self_consistency_full(
    p: &Problem,
    t: Modality,
    k: u32,
    backend: &Backend,
    seed: u64,
) -> Result<(Answer, Vec<Trace>), PipelineError> {
    let prompt = build_prompt(p, t, None);
    let mut req = GenRequest::evaluation(prompt, &p.id, t);
    req.n_samples = k;
    let texts = backend.generate(&req)?;
    let traces: Vec<Trace> = texts.iter().map(|raw| extract_trace(raw, t, &p.id)).collect();
    let answers: Vec<Answer> = traces.iter().filter_map(|tr| tr.answer).collect();
    if answers.is_empty() {
        return Err(PipelineError::NoAnswerProduced { problem_id: p.id.clone() });
    }
    let mut rng = derive_rng("sc", seed, &p.id);
    Ok((plurality(&answers, &mut rng), traces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Source;
    use crate::rationale::reward;
    use crate::testkit::{trace_text, valid_code_body};
    use crate::types::Answer;

    fn problem(id: &str, gold: Answer) -> Problem {
        Problem {
            id: id.to_string(),
            premises: format!("Premises of {id}."),
            conclusion: format!("Conclusion of {id}."),
            gold,
            depth: None,
            source: Source::Custom,
            theory_file: None,
        }
    }

    fn body_for(t: Modality) -> String {
        match t {
            Modality::Code => valid_code_body().to_string(),
            _ => "Step 1: reason.".to_string(),
        }
    }

    /// Stub table where `passes_at` names the first passing sample per
    /// (problem, modality); earlier samples are invalid, later ones pass too.
    fn write_stub(
        path: &std::path::Path,
        problems: &[Problem],
        samples: u32,
        passes_at: impl Fn(&str, Modality) -> Option<u32>,
    ) {
        let mut lines = Vec::new();
        for p in problems {
            for t in Modality::ALL {
                let first_pass = passes_at(&p.id, t);
                for i in 0..samples {
                    let text = match first_pass {
                        Some(at) if i >= at => trace_text(t, &body_for(t), Some(p.gold)),
                        _ => format!("{} unfinished sample {i}", t.open_tag()),
                    };
                    lines.push(format!(
                        "{{\"problem_id\":\"{}\",\"modality\":\"{}\",\"sample_index\":{i},\"text\":{}}}",
                        p.id,
                        t.key(),
                        serde_json::to_string(&text).unwrap()
                    ));
                }
            }
        }
        std::fs::write(path, lines.join("\n")).unwrap();
    }

    fn stub_backend(
        dir: &std::path::Path,
        problems: &[Problem],
        samples: u32,
        passes_at: impl Fn(&str, Modality) -> Option<u32>,
    ) -> Backend {
        let table = dir.join("stub.jsonl");
        write_stub(&table, problems, samples, passes_at);
        Backend::from_spec(&crate::llm::BackendSpec::Stub { table }).unwrap()
    }

    #[test]
    fn keep_first_filter_keeps_exactly_the_passing_modalities() {
        let dir = tempfile::tempdir().unwrap();
        let problems = vec![problem("p1", Answer::A)];
        // p1 passes only in NL, at sample 3.
        let backend = stub_backend(dir.path(), &problems, 5, |_, t| {
            (t == Modality::Nl).then_some(3)
        });
        let cfg = RoundConfig { samples: 5, rounds: 1, ..RoundConfig::default() };
        let report =
            run_round(1, &cfg, &problems, &backend, dir.path(), &BTreeMap::new()).unwrap();
        assert_eq!(report.dataset.examples.len(), 1);
        let ex = &report.dataset.examples[0];
        assert_eq!(ex.modality, Modality::Nl);
        assert_eq!(ex.problem_id, "p1");
        assert_eq!(report.dataset.counts[&Modality::Code], 0);
        assert_eq!(report.dataset.counts[&Modality::TruthTable], 0);
    }

    #[test]
    fn all_passing_at_sample_zero_yields_one_example_per_pair() {
        let dir = tempfile::tempdir().unwrap();
        let problems: Vec<Problem> =
            (0..5).map(|i| problem(&format!("p{i}"), Answer::B)).collect();
        let backend = stub_backend(dir.path(), &problems, 2, |_, _| Some(0));
        let cfg = RoundConfig { samples: 2, rounds: 1, ..RoundConfig::default() };
        let report =
            run_round(1, &cfg, &problems, &backend, dir.path(), &BTreeMap::new()).unwrap();
        assert_eq!(report.dataset.examples.len(), 15);
        for t in Modality::ALL {
            assert_eq!(report.dataset.counts[&t], 5);
        }
    }

    #[test]
    fn round_two_prompts_are_zero_shot() {
        let dir = tempfile::tempdir().unwrap();
        let problems = vec![problem("p1", Answer::A)];
        let backend = stub_backend(dir.path(), &problems, 1, |_, _| Some(0));
        let cfg = RoundConfig { samples: 1, rounds: 2, ..RoundConfig::default() };

        let r1 = run_round(1, &cfg, &problems, &backend, dir.path(), &BTreeMap::new()).unwrap();
        let r2 = run_round(2, &cfg, &problems, &backend, dir.path(), &BTreeMap::new()).unwrap();
        assert!(r1.dataset.examples[0].prompt.contains("example problems with solutions"));
        assert!(!r2.dataset.examples[0].prompt.contains("example problems with solutions"));
    }

    #[test]
    fn curated_targets_repass_the_reward() {
        let dir = tempfile::tempdir().unwrap();
        let problems: Vec<Problem> =
            (0..4).map(|i| problem(&format!("p{i}"), Answer::C)).collect();
        let backend = stub_backend(dir.path(), &problems, 3, |id, t| {
            (id != "p2" || t != Modality::Code).then_some(1)
        });
        let cfg = RoundConfig { samples: 3, rounds: 1, ..RoundConfig::default() };
        let report =
            run_round(1, &cfg, &problems, &backend, dir.path(), &BTreeMap::new()).unwrap();
        assert_eq!(report.dataset.examples.len(), 11);
        for ex in &report.dataset.examples {
            let tr = extract_trace(&ex.target, ex.modality, &ex.problem_id);
            assert_eq!(reward(&tr, Answer::C).value, 1, "curated target must re-pass");
        }
    }

    #[test]
    fn trainer_hook_output_becomes_the_next_model() {
        let dir = tempfile::tempdir().unwrap();
        let problems = vec![problem("p1", Answer::A)];
        let backend = stub_backend(dir.path(), &problems, 1, |_, _| Some(0));
        let cfg = RoundConfig {
            samples: 1,
            rounds: 2,
            trainer_hook: Some("echo training round {round} >&2; echo model-r{round}".into()),
            ..RoundConfig::default()
        };
        let reports = evolve(&cfg, &problems, &backend, dir.path(), &BTreeMap::new()).unwrap();
        assert_eq!(reports[0].next_model.as_deref(), Some("model-r1"));
        assert_eq!(reports[1].next_model.as_deref(), Some("model-r2"));
    }

    #[test]
    fn failing_trainer_hook_aborts_the_round() {
        let dir = tempfile::tempdir().unwrap();
        let problems = vec![problem("p1", Answer::A)];
        let backend = stub_backend(dir.path(), &problems, 1, |_, _| Some(0));
        let cfg = RoundConfig {
            samples: 1,
            rounds: 1,
            trainer_hook: Some("exit 3".into()),
            ..RoundConfig::default()
        };
        assert!(matches!(
            evolve(&cfg, &problems, &backend, dir.path(), &BTreeMap::new()).unwrap_err(),
            PipelineError::TrainerHookFailed { .. }
        ));
    }

    #[test]
    fn majority_cases_follow_the_rule_table() {
        let mut rng = derive_rng("vote-test", 42, "p");
        let nl = Modality::Nl;
        let code = Modality::Code;
        let tt = Modality::TruthTable;

        let o = vote(
            &[(nl, Some(Answer::A)), (code, Some(Answer::A)), (tt, Some(Answer::B))],
            "p",
            &mut rng,
        )
        .unwrap();
        assert_eq!(o.final_answer, Answer::A);
        assert!(!o.tie_broken);
        assert_eq!(o.tie_source, None);

        // None votes are excluded: (A, None, A) is a majority, not a tie.
        let o = vote(&[(nl, Some(Answer::A)), (code, None), (tt, Some(Answer::A))], "p", &mut rng)
            .unwrap();
        assert_eq!(o.final_answer, Answer::A);
        assert!(!o.tie_broken);

        // A single answer is a strict majority of one.
        let o = vote(&[(nl, None), (code, Some(Answer::C)), (tt, None)], "p", &mut rng).unwrap();
        assert_eq!(o.final_answer, Answer::C);
        assert!(!o.tie_broken);

        let err = vote(&[(nl, None), (code, None), (tt, None)], "p", &mut rng).unwrap_err();
        assert!(matches!(err, PipelineError::NoAnswerProduced { .. }));
    }

    #[test]
    fn all_distinct_votes_tie_break_deterministically_per_seed() {
        let answers =
            [(Modality::Nl, Some(Answer::A)), (Modality::Code, Some(Answer::B)), (Modality::TruthTable, Some(Answer::C))];
        let pick = |seed: u64| {
            let mut rng = derive_rng("tiebreak", seed, "p1");
            vote(&answers, "p1", &mut rng).unwrap()
        };
        let first = pick(42);
        assert_eq!(first, pick(42), "same seed, same outcome");
        assert!(first.tie_broken);
        assert_eq!(first.answers[&first.tie_source.unwrap()], Some(first.final_answer));
    }

    #[test]
    fn plurality_follows_counts_then_seeded_tie_break() {
        let mut rng = derive_rng("sc", 42, "p");
        assert_eq!(plurality(&[Answer::B, Answer::B, Answer::C], &mut rng), Answer::B);
        assert_eq!(plurality(&[Answer::A], &mut rng), Answer::A);

        // (A, A, B, B): uniform over the tied options across seeds.
        let mut hits = [0u32; 3];
        for seed in 0..4000u64 {
            let mut rng = derive_rng("sc", seed, "p");
            let pick = plurality(&[Answer::A, Answer::A, Answer::B, Answer::B], &mut rng);
            hits[pick as usize] += 1;
        }
        assert_eq!(hits[Answer::C as usize], 0);
        let frac_a = hits[Answer::A as usize] as f64 / 4000.0;
        assert!((frac_a - 0.5).abs() < 0.03, "tie split was {frac_a}");
    }

    #[test]
    fn mot_infer_votes_across_the_three_modalities() {
        let dir = tempfile::tempdir().unwrap();
        let problems = vec![problem("p1", Answer::A)];
        // NL and TT answer A; Code produces an invalid sample with no answer block.
        let backend = stub_backend(dir.path(), &problems, 1, |_, t| {
            (t != Modality::Code).then_some(0)
        });
        let (outcome, traces) = mot_infer_full(&problems[0], &backend, 42).unwrap();
        assert_eq!(outcome.final_answer, Answer::A);
        assert!(!outcome.tie_broken);
        assert_eq!(outcome.answers[&Modality::Code], None);
        assert_eq!(traces.len(), 3);
    }

    #[test]
    fn self_consistency_takes_the_plurality_of_k_samples() {
        let dir = tempfile::tempdir().unwrap();
        let p = problem("p1", Answer::B);
        // All three samples answer B.
        let backend = stub_backend(dir.path(), std::slice::from_ref(&p), 3, |_, _| Some(0));
        let answer = self_consistency(&p, Modality::Nl, 3, &backend, 42).unwrap();
        assert_eq!(answer, Answer::B);

        let one_shot = self_consistency(&p, Modality::Nl, 1, &backend, 42).unwrap();
        assert_eq!(one_shot, Answer::B);
    }
}
