//! Evaluation metrics over prediction logs: accuracy, pass@k, budgeted
//! sampling curves, modality coverage/overlap, and depth-stratified accuracy.

use crate::artifact::{self, ArtifactHeader};
use crate::data::Problem;
use crate::pipeline::plurality;
use crate::rng::derive_rng;
use crate::types::{Answer, Modality};
use rand::seq::index::sample as sample_indices;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("empty selection")]
    EmptySelection,

    #[error("{0}")]
    DomainError(String),

    #[error("problem {problem_id} has no records for modality {modality}")]
    MissingModality { problem_id: String, modality: Modality },

    #[error("problem {problem_id} carries no depth")]
    MissingDepth { problem_id: String },

    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One logged prediction: which sample of which (problem, modality) pool
/// answered what, and whether that answer matches the gold label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredRecord {
    pub problem_id: String,
    pub modality: Modality,
    pub sample_index: u32,
    pub answer: Option<Answer>,
    pub correct: bool,
}

/// An indexed, validated collection of prediction records. Every
/// (problem, modality) pool is dense in sample index, a missing answer is
/// never marked correct, and equal answers to the same problem agree on
/// correctness.
#[derive(Debug, Clone)]
pub struct PredictionLog {
    records: Vec<PredRecord>,
    pools: BTreeMap<(String, Modality), Vec<usize>>,
    problem_ids: Vec<String>,
}

impl PredictionLog {
    pub fn new(records: Vec<PredRecord>) -> Result<PredictionLog, EvalError> {
        let mut pools: BTreeMap<(String, Modality), Vec<usize>> = BTreeMap::new();
        let mut answer_correctness: HashMap<(String, Answer), bool> = HashMap::new();
        for (i, r) in records.iter().enumerate() {
            if r.answer.is_none() && r.correct {
                return Err(EvalError::DomainError(format!(
                    "record ({}, {}, {}) has no answer yet is marked correct",
                    r.problem_id, r.modality, r.sample_index
                )));
            }
            if let Some(a) = r.answer {
                if let Some(&prev) =
                    answer_correctness.get(&(r.problem_id.clone(), a))
                {
                    if prev != r.correct {
                        return Err(EvalError::DomainError(format!(
                            "problem {} marks answer {a} both correct and incorrect",
                            r.problem_id
                        )));
                    }
                } else {
                    answer_correctness.insert((r.problem_id.clone(), a), r.correct);
                }
            }
            pools.entry((r.problem_id.clone(), r.modality)).or_default().push(i);
        }
        for ((pid, m), pool) in &mut pools {
            pool.sort_by_key(|&i| records[i].sample_index);
            for (expected, &i) in pool.iter().enumerate() {
                if records[i].sample_index as usize != expected {
                    return Err(EvalError::DomainError(format!(
                        "pool ({pid}, {m}) has non-contiguous sample indices"
                    )));
                }
            }
        }
        let mut problem_ids: Vec<String> = pools.keys().map(|(p, _)| p.clone()).collect();
        problem_ids.dedup();
        Ok(PredictionLog { records, pools, problem_ids })
    }

    pub fn from_file(path: &Path) -> Result<PredictionLog, EvalError> {
        let (_, lines) = artifact::read_jsonl(path)?;
        let mut records = Vec::with_capacity(lines.len());
        for (line_no, line) in lines {
            let r: PredRecord = serde_json::from_str(&line).map_err(|e| EvalError::Schema {
                line: line_no,
                message: format!("malformed prediction record: {e}"),
            })?;
            records.push(r);
        }
        PredictionLog::new(records)
    }

    pub fn records(&self) -> &[PredRecord] {
        &self.records
    }

    /// Sorted distinct problem ids.
    pub fn problem_ids(&self) -> &[String] {
        &self.problem_ids
    }

    /// Modalities with at least one record, in canonical order.
    pub fn modalities(&self) -> Vec<Modality> {
        Modality::ALL
            .into_iter()
            .filter(|&m| self.pools.keys().any(|(_, pm)| *pm == m))
            .collect()
    }

    /// Record indices of a pool, ordered by sample index.
    pub fn pool(&self, problem_id: &str, m: Modality) -> Option<&[usize]> {
        self.pools.get(&(problem_id.to_string(), m)).map(|v| v.as_slice())
    }

    /// Require every record's correctness flag to match the gold labels.
    pub fn validate_against(&self, problems: &[Problem]) -> Result<(), EvalError> {
        let gold: HashMap<&str, Answer> =
            problems.iter().map(|p| (p.id.as_str(), p.gold)).collect();
        for r in &self.records {
            let Some(&g) = gold.get(r.problem_id.as_str()) else {
                return Err(EvalError::DomainError(format!(
                    "log references unknown problem {}",
                    r.problem_id
                )));
            };
            if r.correct != (r.answer == Some(g)) {
                return Err(EvalError::DomainError(format!(
                    "record ({}, {}, {}) has correct={} inconsistent with gold {g}",
                    r.problem_id, r.modality, r.sample_index, r.correct
                )));
            }
        }
        Ok(())
    }
}

/// Write a prediction log with an artifact header.
pub fn write_prediction_log(
    path: &Path,
    records: &[PredRecord],
    seed: u64,
    inputs: &BTreeMap<String, String>,
) -> Result<(), EvalError> {
    let body: Vec<String> =
        records.iter().map(|r| serde_json::to_string(r).expect("record serializes")).collect();
    let mut header = ArtifactHeader::new("prediction_log", seed);
    header.inputs = inputs.clone();
    artifact::write_jsonl(path, header, &body)?;
    Ok(())
}

/// Record selection for [`accuracy`]: optionally one modality, optionally an
/// inclusive depth range (which requires problems with depths).
#[derive(Debug, Clone, Copy, Default)]
pub struct Filter {
    pub modality: Option<Modality>,
    pub depth: Option<(u32, u32)>,
}

/// Percent of correct first samples (sample index 0) among records matching
/// the filter.
pub fn accuracy(
    log: &PredictionLog,
    problems: Option<&[Problem]>,
    filter: &Filter,
) -> Result<f64, EvalError> {
    let depth_of: Option<HashMap<&str, Option<u32>>> =
        problems.map(|ps| ps.iter().map(|p| (p.id.as_str(), p.depth)).collect());
    if filter.depth.is_some() && depth_of.is_none() {
        return Err(EvalError::DomainError(
            "depth filtering requires the problems file".into(),
        ));
    }
    let mut total = 0usize;
    let mut correct = 0usize;
    for r in log.records() {
        if r.sample_index != 0 {
            continue;
        }
        if let Some(m) = filter.modality {
            if r.modality != m {
                continue;
            }
        }
        if let Some((lo, hi)) = filter.depth {
            let depths = depth_of.as_ref().unwrap();
            let depth = depths
                .get(r.problem_id.as_str())
                .copied()
                .ok_or_else(|| EvalError::DomainError(format!(
                    "log references unknown problem {}",
                    r.problem_id
                )))?
                .ok_or_else(|| EvalError::MissingDepth { problem_id: r.problem_id.clone() })?;
            if depth < lo || depth > hi {
                continue;
            }
        }
        total += 1;
        if r.correct {
            correct += 1;
        }
    }
    if total == 0 {
        return Err(EvalError::EmptySelection);
    }
    Ok(100.0 * correct as f64 / total as f64)
}

/// Unbiased pass@k: the probability that a uniformly drawn size-k subset of
/// an n-sample pool with c correct samples contains at least one correct
/// sample, computed as `1 - C(n-c, k) / C(n, k)`.
pub fn pass_at_k(n: u64, c: u64, k: u64) -> Result<f64, EvalError> {
    if c > n {
        return Err(EvalError::DomainError(format!("c={c} exceeds n={n}")));
    }
    if k < 1 || k > n {
        return Err(EvalError::DomainError(format!("k={k} out of range 1..={n}")));
    }
    if c == 0 {
        return Ok(0.0);
    }
    if n - c < k {
        return Ok(1.0);
    }
    let mut miss = 1.0f64;
    for i in 0..k {
        miss *= (n - c - i) as f64 / (n - i) as f64;
    }
    Ok(1.0 - miss)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetCurvePoint {
    pub k: u32,
    /// Mean solve rate in percent over the runs.
    pub mean: f64,
    /// Population standard deviation over the runs.
    pub stddev: f64,
    pub runs: u32,
}

/// How a drawn set of responses scores a problem: solved if any draw is
/// correct (pass@k style), or solved if the majority answer is correct.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreMode {
    Pass,
    Vote,
}

impl std::str::FromStr for ScoreMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pass" => Ok(ScoreMode::Pass),
            "vote" => Ok(ScoreMode::Vote),
            other => Err(format!("unknown score mode {other:?} (use pass or vote)")),
        }
    }
}

fn score_drawn<R: rand::Rng>(
    log: &PredictionLog,
    drawn: &[usize],
    mode: ScoreMode,
    rng: &mut R,
) -> bool {
    match mode {
        ScoreMode::Pass => drawn.iter().any(|&i| log.records()[i].correct),
        ScoreMode::Vote => {
            let answers: Vec<Answer> =
                drawn.iter().filter_map(|&i| log.records()[i].answer).collect();
            if answers.is_empty() {
                return false;
            }
            let majority = plurality(&answers, rng);
            // The majority answer is correct iff some record carrying it is.
            drawn.iter().any(|&i| {
                log.records()[i].answer == Some(majority) && log.records()[i].correct
            })
        }
    }
}

fn summarize(k: u32, runs: u32, per_run: &[f64]) -> BudgetCurvePoint {
    let mean = per_run.iter().sum::<f64>() / per_run.len() as f64;
    let variance =
        per_run.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / per_run.len() as f64;
    BudgetCurvePoint { k, mean, stddev: variance.sqrt(), runs }
}

/// Single-modality budget curve point: per run, draw k responses from each
/// problem's pool in modality `t` and score them.
pub fn sot_budget_eval(
    log: &PredictionLog,
    t: Modality,
    k: u32,
    runs: u32,
    seed: u64,
    mode: ScoreMode,
) -> Result<BudgetCurvePoint, EvalError> {
    if runs < 1 {
        return Err(EvalError::DomainError("runs must be at least 1".into()));
    }
    for pid in log.problem_ids() {
        let pool = log
            .pool(pid, t)
            .ok_or_else(|| EvalError::MissingModality { problem_id: pid.clone(), modality: t })?;
        if pool.len() < k as usize {
            return Err(EvalError::DomainError(format!(
                "pool ({pid}, {t}) holds {} samples, fewer than k={k}",
                pool.len()
            )));
        }
    }
    let mut per_run = Vec::with_capacity(runs as usize);
    for r in 0..runs {
        let mut solved = 0usize;
        for pid in log.problem_ids() {
            let pool = log.pool(pid, t).unwrap();
            let mut rng = derive_rng("budget", seed, &format!("{r}/{t}/{pid}"));
            let drawn: Vec<usize> = sample_indices(&mut rng, pool.len(), k as usize)
                .into_iter()
                .map(|j| pool[j])
                .collect();
            if score_drawn(log, &drawn, mode, &mut rng) {
                solved += 1;
            }
        }
        per_run.push(100.0 * solved as f64 / log.problem_ids().len() as f64);
    }
    Ok(summarize(k, runs, &per_run))
}

/// Mixed-modality budget curve point: k must divide evenly across the
/// modalities present; each contributes k/N_T draws per problem.
pub fn mot_budget_eval(
    log: &PredictionLog,
    k: u32,
    runs: u32,
    seed: u64,
    mode: ScoreMode,
) -> Result<BudgetCurvePoint, EvalError> {
    if runs < 1 {
        return Err(EvalError::DomainError("runs must be at least 1".into()));
    }
    let modalities = log.modalities();
    let n_t = modalities.len() as u32;
    if n_t == 0 {
        return Err(EvalError::EmptySelection);
    }
    if k % n_t != 0 {
        return Err(EvalError::DomainError(format!(
            "budget k={k} is not divisible by the {n_t} modalities present"
        )));
    }
    let per_modality = (k / n_t) as usize;
    for pid in log.problem_ids() {
        for &m in &modalities {
            let pool = log.pool(pid, m).ok_or_else(|| EvalError::MissingModality {
                problem_id: pid.clone(),
                modality: m,
            })?;
            if pool.len() < per_modality {
                return Err(EvalError::DomainError(format!(
                    "pool ({pid}, {m}) holds {} samples, fewer than k/N_T={per_modality}",
                    pool.len()
                )));
            }
        }
    }
    let mut per_run = Vec::with_capacity(runs as usize);
    for r in 0..runs {
        let mut solved = 0usize;
        for pid in log.problem_ids() {
            let mut rng = derive_rng("budget", seed, &format!("{r}/mot/{pid}"));
            let mut drawn = Vec::with_capacity(k as usize);
            for &m in &modalities {
                let pool = log.pool(pid, m).unwrap();
                drawn.extend(
                    sample_indices(&mut rng, pool.len(), per_modality)
                        .into_iter()
                        .map(|j| pool[j]),
                );
            }
            if score_drawn(log, &drawn, mode, &mut rng) {
                solved += 1;
            }
        }
        per_run.push(100.0 * solved as f64 / log.problem_ids().len() as f64);
    }
    Ok(summarize(k, runs, &per_run))
}

/// Whether "solved by a modality" means the single evaluation-time
/// prediction (the first sample) or any sample in the pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolvedSemantics {
    FirstSample,
    AnyOfPool,
}

/// Per-modality coverage partition: which problems are solved by exactly one
/// modality, by exactly one pair, and by the unions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OverlapStats {
    pub only_nl: usize,
    pub only_code: usize,
    pub only_tt: usize,
    pub pair_nl_code: usize,
    pub pair_nl_tt: usize,
    pub pair_code_tt: usize,
    pub union_code_nl: usize,
    pub union_all: usize,
}

pub fn overlap_stats(
    log: &PredictionLog,
    semantics: SolvedSemantics,
) -> Result<OverlapStats, EvalError> {
    let mut stats = OverlapStats {
        only_nl: 0,
        only_code: 0,
        only_tt: 0,
        pair_nl_code: 0,
        pair_nl_tt: 0,
        pair_code_tt: 0,
        union_code_nl: 0,
        union_all: 0,
    };
    for pid in log.problem_ids() {
        let mut solved = [false; 3];
        for (slot, &m) in Modality::ALL.iter().enumerate() {
            let pool = log.pool(pid, m).ok_or_else(|| EvalError::MissingModality {
                problem_id: pid.clone(),
                modality: m,
            })?;
            solved[slot] = match semantics {
                SolvedSemantics::FirstSample => log.records()[pool[0]].correct,
                SolvedSemantics::AnyOfPool => pool.iter().any(|&i| log.records()[i].correct),
            };
        }
        let [nl, code, tt] = solved;
        match (nl, code, tt) {
            (true, false, false) => stats.only_nl += 1,
            (false, true, false) => stats.only_code += 1,
            (false, false, true) => stats.only_tt += 1,
            (true, true, false) => stats.pair_nl_code += 1,
            (true, false, true) => stats.pair_nl_tt += 1,
            (false, true, true) => stats.pair_code_tt += 1,
            _ => {}
        }
        if nl || code {
            stats.union_code_nl += 1;
        }
        if nl || code || tt {
            stats.union_all += 1;
        }
    }
    Ok(stats)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BucketAccuracy {
    pub lo: u32,
    pub hi: u32,
    pub accuracy: f64,
    /// Distinct problems contributing to the bucket.
    pub problems: usize,
}

/// Accuracy per inclusive depth bucket. Buckets no problem falls into are
/// reported as absent rather than zero.
pub fn depth_stratified(
    log: &PredictionLog,
    problems: &[Problem],
    buckets: &[(u32, u32)],
) -> Result<Vec<BucketAccuracy>, EvalError> {
    let mut out = Vec::new();
    for &(lo, hi) in buckets {
        let filter = Filter { modality: None, depth: Some((lo, hi)) };
        match accuracy(log, Some(problems), &filter) {
            Ok(acc) => {
                let depth_of: HashMap<&str, Option<u32>> =
                    problems.iter().map(|p| (p.id.as_str(), p.depth)).collect();
                let count = log
                    .problem_ids()
                    .iter()
                    .filter(|pid| {
                        matches!(depth_of.get(pid.as_str()), Some(Some(d)) if *d >= lo && *d <= hi)
                    })
                    .count();
                out.push(BucketAccuracy { lo, hi, accuracy: acc, problems: count });
            }
            Err(EvalError::EmptySelection) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Write budget-curve points as whitespace-separated `k mean stddev` columns
/// behind a `#` header line.
pub fn write_curve(
    path: &Path,
    points: &[BudgetCurvePoint],
    seed: u64,
    inputs: &BTreeMap<String, String>,
) -> std::io::Result<()> {
    use std::io::Write;
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    let inputs_desc: Vec<String> =
        inputs.iter().map(|(name, sum)| format!("{name}:{sum}")).collect();
    writeln!(
        file,
        "# mot v{} kind=budget_curve seed={seed} inputs={}",
        crate::VERSION,
        inputs_desc.join(",")
    )?;
    for p in points {
        writeln!(file, "{} {:.4} {:.4}", p.k, p.mean, p.stddev)?;
    }
    file.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Source;

    fn rec(pid: &str, m: Modality, i: u32, answer: Option<Answer>, correct: bool) -> PredRecord {
        PredRecord {
            problem_id: pid.to_string(),
            modality: m,
            sample_index: i,
            answer,
            correct,
        }
    }

    /// Pool of `n` samples for (pid, m) with the first `c` correct (answer A)
    /// and the rest wrong (answer B).
    fn pool(pid: &str, m: Modality, n: u32, c: u32) -> Vec<PredRecord> {
        (0..n)
            .map(|i| {
                if i < c {
                    rec(pid, m, i, Some(Answer::A), true)
                } else {
                    rec(pid, m, i, Some(Answer::B), false)
                }
            })
            .collect()
    }

    fn problem(id: &str, depth: Option<u32>) -> Problem {
        Problem {
            id: id.to_string(),
            premises: "p".into(),
            conclusion: "c".into(),
            gold: Answer::A,
            depth,
            source: Source::Custom,
            theory_file: None,
        }
    }

    #[test]
    fn accuracy_counts_first_samples_only() {
        let log = PredictionLog::new(vec![
            rec("p1", Modality::Nl, 0, Some(Answer::A), true),
            rec("p1", Modality::Nl, 1, Some(Answer::B), false), // later sample ignored
            rec("p2", Modality::Nl, 0, Some(Answer::A), true),
            rec("p3", Modality::Nl, 0, Some(Answer::B), false),
        ])
        .unwrap();
        let acc = accuracy(&log, None, &Filter::default()).unwrap();
        assert!((acc - 66.666_666).abs() < 1e-3);

        let all_correct = PredictionLog::new(pool("p", Modality::Code, 4, 4)).unwrap();
        assert_eq!(accuracy(&all_correct, None, &Filter::default()).unwrap(), 100.0);
    }

    #[test]
    fn accuracy_honors_modality_and_depth_filters() {
        let log = PredictionLog::new(vec![
            rec("p1", Modality::Nl, 0, Some(Answer::A), true),
            rec("p1", Modality::Code, 0, Some(Answer::B), false),
            rec("p2", Modality::Nl, 0, Some(Answer::B), false),
            rec("p3", Modality::Nl, 0, Some(Answer::A), true),
        ])
        .unwrap();
        let problems =
            vec![problem("p1", Some(2)), problem("p2", Some(6)), problem("p3", Some(7))];

        let nl_only =
            accuracy(&log, None, &Filter { modality: Some(Modality::Nl), depth: None }).unwrap();
        assert!((nl_only - 200.0 / 3.0).abs() < 1e-9);

        let deep = accuracy(
            &log,
            Some(&problems),
            &Filter { modality: Some(Modality::Nl), depth: Some((5, 8)) },
        )
        .unwrap();
        assert_eq!(deep, 50.0, "hand count: p2 wrong, p3 right");

        assert!(matches!(
            accuracy(&log, None, &Filter { modality: Some(Modality::TruthTable), depth: None }),
            Err(EvalError::EmptySelection)
        ));
    }

    #[test]
    fn log_validation_rejects_inconsistencies() {
        assert!(matches!(
            PredictionLog::new(vec![rec("p", Modality::Nl, 0, None, true)]),
            Err(EvalError::DomainError(_))
        ));
        assert!(matches!(
            PredictionLog::new(vec![rec("p", Modality::Nl, 1, Some(Answer::A), true)]),
            Err(EvalError::DomainError(_))
        ));
        assert!(matches!(
            PredictionLog::new(vec![
                rec("p", Modality::Nl, 0, Some(Answer::A), true),
                rec("p", Modality::Code, 0, Some(Answer::A), false),
            ]),
            Err(EvalError::DomainError(_))
        ));
    }

    #[test]
    fn pass_at_k_closed_form_cases() {
        assert_eq!(pass_at_k(10, 10, 3).unwrap(), 1.0);
        assert_eq!(pass_at_k(10, 0, 3).unwrap(), 0.0);
        // n=4, c=2, k=2: of the C(4,2)=6 subsets, 5 contain a correct sample.
        assert!((pass_at_k(4, 2, 2).unwrap() - 5.0 / 6.0).abs() < 1e-12);
        assert!(pass_at_k(4, 5, 1).is_err());
        assert!(pass_at_k(4, 2, 0).is_err());
        assert!(pass_at_k(4, 2, 5).is_err());
    }

    #[test]
    fn pass_at_k_is_monotone_in_k_and_c() {
        for n in [4u64, 10, 32] {
            for c in 0..=n {
                let mut prev = 0.0;
                for k in 1..=n {
                    let p = pass_at_k(n, c, k).unwrap();
                    assert!(p >= prev - 1e-12, "not monotone in k at n={n} c={c} k={k}");
                    prev = p;
                }
            }
            for k in 1..=n {
                let mut prev = 0.0;
                for c in 0..=n {
                    let p = pass_at_k(n, c, k).unwrap();
                    assert!(p >= prev - 1e-12, "not monotone in c at n={n} c={c} k={k}");
                    prev = p;
                }
            }
        }
    }

    #[test]
    fn degenerate_budget_pools_have_no_variance() {
        let log = PredictionLog::new(pool("p1", Modality::Nl, 1, 1)).unwrap();
        let point = sot_budget_eval(&log, Modality::Nl, 1, 10, 42, ScoreMode::Pass).unwrap();
        assert_eq!(point.mean, 100.0);
        assert_eq!(point.stddev, 0.0);

        // k equal to the pool size draws the whole pool every run.
        let mut records = pool("p1", Modality::Nl, 8, 2);
        records.extend(pool("p2", Modality::Nl, 8, 0));
        let log = PredictionLog::new(records).unwrap();
        let point = sot_budget_eval(&log, Modality::Nl, 8, 10, 42, ScoreMode::Pass).unwrap();
        assert_eq!(point.mean, 50.0);
        assert_eq!(point.stddev, 0.0);
    }

    #[test]
    fn budget_points_are_reproducible_bit_for_bit() {
        let mut records = Vec::new();
        for i in 0..12 {
            records.extend(pool(&format!("p{i:02}"), Modality::Nl, 8, i % 5));
        }
        let log = PredictionLog::new(records).unwrap();
        let a = sot_budget_eval(&log, Modality::Nl, 3, 10, 42, ScoreMode::Pass).unwrap();
        let b = sot_budget_eval(&log, Modality::Nl, 3, 10, 42, ScoreMode::Pass).unwrap();
        assert_eq!(a, b);
        let c = sot_budget_eval(&log, Modality::Nl, 3, 10, 43, ScoreMode::Pass).unwrap();
        assert!(a != c || a.stddev == 0.0);
    }

    #[test]
    fn sot_budget_mean_matches_the_closed_form_expectation() {
        // 40 problems with 8-sample pools and varying correct counts: the
        // expected pass rate is the mean of per-problem pass@3.
        let mut records = Vec::new();
        let mut expected = 0.0;
        for i in 0..40 {
            let c = i % 5; // 0..4 correct of 8
            records.extend(pool(&format!("p{i:02}"), Modality::Nl, 8, c));
            expected += pass_at_k(8, c as u64, 3).unwrap() * 100.0;
        }
        expected /= 40.0;
        let log = PredictionLog::new(records).unwrap();
        let point = sot_budget_eval(&log, Modality::Nl, 3, 10, 42, ScoreMode::Pass).unwrap();
        assert!(
            (point.mean - expected).abs() < 1.5,
            "mean {} vs expectation {expected}",
            point.mean
        );
    }

    fn three_modality_log(tt_only_problem: &str, n_problems: usize) -> PredictionLog {
        let mut records = Vec::new();
        for i in 0..n_problems {
            let pid = format!("p{i:02}");
            for m in Modality::ALL {
                let all_correct = pid != tt_only_problem || m == Modality::TruthTable;
                records.extend(pool(&pid, m, 8, if all_correct { 8 } else { 0 }));
            }
        }
        PredictionLog::new(records).unwrap()
    }

    #[test]
    fn mot_budget_divides_the_budget_or_rejects_it() {
        let log = three_modality_log("p00", 4);
        let point = mot_budget_eval(&log, 3, 5, 42, ScoreMode::Pass).unwrap();
        assert_eq!(point.mean, 100.0, "one draw per modality always finds TT");

        assert!(matches!(
            mot_budget_eval(&log, 5, 5, 42, ScoreMode::Pass),
            Err(EvalError::DomainError(_))
        ));
    }

    #[test]
    fn mixed_sampling_dominates_single_modality_when_coverage_differs() {
        let log = three_modality_log("p00", 4);
        let mot = mot_budget_eval(&log, 3, 10, 42, ScoreMode::Pass).unwrap();
        let nl = sot_budget_eval(&log, Modality::Nl, 3, 10, 42, ScoreMode::Pass).unwrap();
        assert!(mot.mean > nl.mean, "mot {} should beat nl-only {}", mot.mean, nl.mean);
        assert_eq!(nl.mean, 75.0, "the TT-only problem is never solved by NL");
    }

    #[test]
    fn vote_mode_scores_majorities() {
        // Pool where the majority answer is wrong even though one sample is right.
        let records = vec![
            rec("p1", Modality::Nl, 0, Some(Answer::B), false),
            rec("p1", Modality::Nl, 1, Some(Answer::B), false),
            rec("p1", Modality::Nl, 2, Some(Answer::A), true),
        ];
        let log = PredictionLog::new(records).unwrap();
        let vote = sot_budget_eval(&log, Modality::Nl, 3, 4, 42, ScoreMode::Vote).unwrap();
        assert_eq!(vote.mean, 0.0);
        let pass = sot_budget_eval(&log, Modality::Nl, 3, 4, 42, ScoreMode::Pass).unwrap();
        assert_eq!(pass.mean, 100.0);
    }

    #[test]
    fn overlap_matches_the_hand_example() {
        // p1 solved only by NL, p2 by NL and TT, p3 unsolved.
        let mut records = Vec::new();
        records.extend(pool("p1", Modality::Nl, 2, 2));
        records.extend(pool("p1", Modality::Code, 2, 0));
        records.extend(pool("p1", Modality::TruthTable, 2, 0));
        records.extend(pool("p2", Modality::Nl, 2, 2));
        records.extend(pool("p2", Modality::Code, 2, 0));
        records.extend(pool("p2", Modality::TruthTable, 2, 2));
        records.extend(pool("p3", Modality::Nl, 2, 0));
        records.extend(pool("p3", Modality::Code, 2, 0));
        records.extend(pool("p3", Modality::TruthTable, 2, 0));
        let log = PredictionLog::new(records).unwrap();
        let stats = overlap_stats(&log, SolvedSemantics::FirstSample).unwrap();
        assert_eq!(stats.only_nl, 1);
        assert_eq!(stats.pair_nl_tt, 1);
        assert_eq!(stats.union_all, 2);
        assert_eq!(stats.union_code_nl, 2);
        assert!(stats.union_all >= stats.union_code_nl);
    }

    #[test]
    fn overlap_requires_every_modality() {
        let log = PredictionLog::new(pool("p1", Modality::Nl, 2, 1)).unwrap();
        assert!(matches!(
            overlap_stats(&log, SolvedSemantics::AnyOfPool),
            Err(EvalError::MissingModality { .. })
        ));
    }

    #[test]
    fn first_sample_and_any_of_pool_semantics_differ() {
        let mut records = Vec::new();
        for m in Modality::ALL {
            // First sample wrong, a later one right.
            records.push(rec("p1", m, 0, Some(Answer::B), false));
            records.push(rec("p1", m, 1, Some(Answer::A), true));
        }
        let log = PredictionLog::new(records).unwrap();
        let first = overlap_stats(&log, SolvedSemantics::FirstSample).unwrap();
        let any = overlap_stats(&log, SolvedSemantics::AnyOfPool).unwrap();
        assert_eq!(first.union_all, 0);
        assert_eq!(any.union_all, 1);
    }

    #[test]
    fn depth_buckets_report_exact_tallies_and_skip_empty_ones() {
        let log = PredictionLog::new(vec![
            rec("p1", Modality::Nl, 0, Some(Answer::A), true),
            rec("p2", Modality::Nl, 0, Some(Answer::B), false),
            rec("p3", Modality::Nl, 0, Some(Answer::A), true),
            rec("p4", Modality::Nl, 0, Some(Answer::A), true),
        ])
        .unwrap();
        let problems = vec![
            problem("p1", Some(1)),
            problem("p2", Some(5)),
            problem("p3", Some(5)),
            problem("p4", Some(8)),
        ];
        let buckets = depth_stratified(&log, &problems, &[(1, 5), (5, 8), (9, 12)]).unwrap();
        assert_eq!(buckets.len(), 2, "the 9-12 bucket is absent, not zero");
        assert!((buckets[0].accuracy - 200.0 / 3.0).abs() < 1e-9);
        assert_eq!(buckets[0].problems, 3);
        assert!((buckets[1].accuracy - 200.0 / 3.0).abs() < 1e-9);

        let single = depth_stratified(&log, &problems, &[(0, 100)]).unwrap();
        assert_eq!(single[0].accuracy, accuracy(&log, None, &Filter::default()).unwrap());

        let undepthed = vec![problem("p1", None)];
        let log1 =
            PredictionLog::new(vec![rec("p1", Modality::Nl, 0, Some(Answer::A), true)]).unwrap();
        assert!(matches!(
            depth_stratified(&log1, &undepthed, &[(1, 5)]),
            Err(EvalError::MissingDepth { .. })
        ));
    }

    #[test]
    fn validate_against_checks_gold_consistency() {
        let log = PredictionLog::new(vec![rec("p1", Modality::Nl, 0, Some(Answer::A), true)])
            .unwrap();
        assert!(log.validate_against(&[problem("p1", None)]).is_ok());

        let bad = PredictionLog::new(vec![rec("p1", Modality::Nl, 0, Some(Answer::B), true)])
            .unwrap();
        assert!(bad.validate_against(&[problem("p1", None)]).is_err());
    }
}
