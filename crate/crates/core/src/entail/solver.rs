//! Pruned truth-table search and its brute-force oracle.
//!
//! The solver walks the assignment tree in variable-id order and abandons any
//! partial assignment under which some premise is already determined false
//! (Kleene three-valued evaluation of the partial row). Surviving leaves are
//! exactly the full assignments satisfying every premise; the verdict is read
//! off the surviving set: True when every surviving row satisfies the
//! conclusion, False when none does, Uncertain otherwise, and Inconsistent
//! when nothing survives at all.

use super::ground::{GroundTheory, PropFormula};
use super::EntailError;
use crate::types::Answer;

/// One complete truth-table row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub values: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    True,
    False,
    Uncertain,
    Inconsistent,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::True => "True",
            Verdict::False => "False",
            Verdict::Uncertain => "Uncertain",
            Verdict::Inconsistent => "Inconsistent",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntailmentResult {
    pub verdict: Verdict,
    pub surviving_count: u64,
    pub satisfying_count: u64,
    /// First surviving rows in exploration order, capped at the row sample cap.
    pub sample_rows: Vec<Assignment>,
    pub vars_count: usize,
    /// Partial assignments abandoned because a premise was already false.
    pub pruned_partial_count: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub var_cap: usize,
    pub row_sample_cap: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { var_cap: super::ground::DEFAULT_VAR_CAP, row_sample_cap: 64 }
    }
}

/// Classical two-valued evaluation under a total assignment.
pub fn eval_formula(f: &PropFormula, a: &Assignment) -> bool {
    match f {
        PropFormula::Var(i) => a.values[*i],
        PropFormula::Not(x) => !eval_formula(x, a),
        PropFormula::And(l, r) => eval_formula(l, a) && eval_formula(r, a),
        PropFormula::Or(l, r) => eval_formula(l, a) || eval_formula(r, a),
        PropFormula::Implies(l, r) => !eval_formula(l, a) || eval_formula(r, a),
        PropFormula::Iff(l, r) => eval_formula(l, a) == eval_formula(r, a),
    }
}

/// Kleene three-valued evaluation under a partial assignment: `None` means
/// the value is not yet determined by the assigned variables.
pub fn eval_partial(f: &PropFormula, values: &[Option<bool>]) -> Option<bool> {
    match f {
        PropFormula::Var(i) => values[*i],
        PropFormula::Not(x) => eval_partial(x, values).map(|v| !v),
        PropFormula::And(l, r) => match (eval_partial(l, values), eval_partial(r, values)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        PropFormula::Or(l, r) => match (eval_partial(l, values), eval_partial(r, values)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
        PropFormula::Implies(l, r) => match (eval_partial(l, values), eval_partial(r, values)) {
            (Some(false), _) | (_, Some(true)) => Some(true),
            (Some(true), Some(false)) => Some(false),
            _ => None,
        },
        PropFormula::Iff(l, r) => match (eval_partial(l, values), eval_partial(r, values)) {
            (Some(a), Some(b)) => Some(a == b),
            _ => None,
        },
    }
}

fn verdict_from(surviving: u64, satisfying: u64) -> Verdict {
    if surviving == 0 {
        Verdict::Inconsistent
    } else if satisfying == surviving {
        Verdict::True
    } else if satisfying == 0 {
        Verdict::False
    } else {
        Verdict::Uncertain
    }
}

#[derive(Debug, Clone)]
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) struct PrunedNode {
    pub values: Vec<Option<bool>>,
    pub violated_premise: usize,
}

struct Search<'a> {
    g: &'a GroundTheory,
    row_sample_cap: usize,
    values: Vec<Option<bool>>,
    surviving: u64,
    satisfying: u64,
    pruned: u64,
    samples: Vec<Assignment>,
    trace: Option<Vec<PrunedNode>>,
}

impl Search<'_> {
    fn materialize(&mut self, depth: usize, completion: u64) -> Assignment {
        let n = self.g.vars.len();
        let free = n - depth;
        let mut row = Vec::with_capacity(n);
        for i in 0..n {
            if i < depth {
                row.push(self.values[i].expect("assigned prefix"));
            } else {
                let bit = (completion >> (free - 1 - (i - depth))) & 1;
                row.push(bit == 1);
            }
        }
        Assignment { values: row }
    }

    fn explore(&mut self, depth: usize) {
        let n = self.g.vars.len();
        let mut premises_decided = true;
        for (i, p) in self.g.premises.iter().enumerate() {
            match eval_partial(p, &self.values) {
                Some(false) => {
                    if depth < n {
                        self.pruned += 1;
                        if let Some(trace) = &mut self.trace {
                            trace.push(PrunedNode {
                                values: self.values.clone(),
                                violated_premise: i,
                            });
                        }
                    }
                    return;
                }
                Some(true) => {}
                None => premises_decided = false,
            }
        }

        if depth == n {
            self.surviving += 1;
            let row = Assignment { values: self.values.iter().map(|v| v.unwrap()).collect() };
            if eval_formula(&self.g.conclusion, &row) {
                self.satisfying += 1;
            }
            if self.samples.len() < self.row_sample_cap {
                self.samples.push(row);
            }
            return;
        }

        // Once every premise and the conclusion are decided, all completions
        // of this prefix behave identically: count them in bulk.
        if premises_decided {
            if let Some(concl) = eval_partial(&self.g.conclusion, &self.values) {
                let completions = 1u64 << (n - depth);
                self.surviving += completions;
                if concl {
                    self.satisfying += completions;
                }
                let want = (self.row_sample_cap - self.samples.len()) as u64;
                for j in 0..completions.min(want) {
                    let row = self.materialize(depth, j);
                    self.samples.push(row);
                }
                return;
            }
        }

        self.values[depth] = Some(false);
        self.explore(depth + 1);
        self.values[depth] = Some(true);
        self.explore(depth + 1);
        self.values[depth] = None;
    }
}

fn solve_impl(g: &GroundTheory, limits: Limits, traced: bool) -> (EntailmentResult, Vec<PrunedNode>) {
    let n = g.vars.len();
    let mut search = Search {
        g,
        row_sample_cap: limits.row_sample_cap,
        values: vec![None; n],
        surviving: 0,
        satisfying: 0,
        pruned: 0,
        samples: Vec::new(),
        trace: if traced { Some(Vec::new()) } else { None },
    };
    search.explore(0);
    let result = EntailmentResult {
        verdict: verdict_from(search.surviving, search.satisfying),
        surviving_count: search.surviving,
        satisfying_count: search.satisfying,
        sample_rows: search.samples,
        vars_count: n,
        pruned_partial_count: search.pruned,
    };
    (result, search.trace.unwrap_or_default())
}

pub fn solve_truth_table(g: &GroundTheory, limits: Limits) -> Result<EntailmentResult, EntailError> {
    if g.vars.len() > limits.var_cap {
        return Err(EntailError::VarCapExceeded { count: g.vars.len(), cap: limits.var_cap });
    }
    Ok(solve_impl(g, limits, false).0)
}

/// Like [`solve_truth_table`] but also returns every pruned partial
/// assignment together with the premise it violated. Test support.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn solve_truth_table_traced(
    g: &GroundTheory,
    limits: Limits,
) -> Result<(EntailmentResult, Vec<PrunedNode>), EntailError> {
    if g.vars.len() > limits.var_cap {
        return Err(EntailError::VarCapExceeded { count: g.vars.len(), cap: limits.var_cap });
    }
    Ok(solve_impl(g, limits, true))
}

pub const ORACLE_VAR_CAP: usize = 20;

/// Exhaustive enumeration of all `2^n` rows with no pruning. Same result
/// contract as [`solve_truth_table`]; serves as its independent check.
pub fn brute_force_oracle(g: &GroundTheory) -> Result<EntailmentResult, EntailError> {
    let n = g.vars.len();
    if n > ORACLE_VAR_CAP {
        return Err(EntailError::VarCapExceeded { count: n, cap: ORACLE_VAR_CAP });
    }
    let row_sample_cap = Limits::default().row_sample_cap;
    let mut surviving = 0u64;
    let mut satisfying = 0u64;
    let mut samples = Vec::new();
    for mask in 0..(1u64 << n) {
        // Bit layout mirrors the solver's exploration order: variable 0 is
        // the most significant bit and false sorts before true.
        let row = Assignment {
            values: (0..n).map(|j| (mask >> (n - 1 - j)) & 1 == 1).collect(),
        };
        if g.premises.iter().all(|p| eval_formula(p, &row)) {
            surviving += 1;
            if eval_formula(&g.conclusion, &row) {
                satisfying += 1;
            }
            if samples.len() < row_sample_cap {
                samples.push(row);
            }
        }
    }
    Ok(EntailmentResult {
        verdict: verdict_from(surviving, satisfying),
        surviving_count: surviving,
        satisfying_count: satisfying,
        sample_rows: samples,
        vars_count: n,
        pruned_partial_count: 0,
    })
}

/// Map a verdict to the option letter used in prompts. Inconsistent premises
/// also map to (C) but raise a warning flag, since "vacuously True" would be
/// misleading for benchmark scoring.
pub fn verdict_to_option(v: Verdict) -> (Answer, bool) {
    match v {
        Verdict::True => (Answer::A, false),
        Verdict::False => (Answer::B, false),
        Verdict::Uncertain => (Answer::C, false),
        Verdict::Inconsistent => (Answer::C, true),
    }
}
