//! Grounding and three-valued truth-table entailment.

mod ground;
mod solver;

pub use ground::{
    format_prop, ground, ground_with_cap, GroundTheory, PropFormula, PropVar, DEFAULT_VAR_CAP,
};
pub use solver::{
    brute_force_oracle, eval_formula, eval_partial, solve_truth_table, verdict_to_option,
    Assignment, EntailmentResult, Limits, Verdict, ORACLE_VAR_CAP,
};

#[cfg(test)]
pub(crate) use solver::solve_truth_table_traced;

use crate::logic::Theory;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EntailError {
    #[error("ground atom count {count} exceeds variable cap {cap}")]
    VarCapExceeded { count: usize, cap: usize },

    #[error("a quantifier appears but the constant domain is empty")]
    EmptyDomainWithQuantifier,
}

/// Ground a theory and decide it in one step.
pub fn solve_theory(
    t: &Theory,
    limits: Limits,
) -> Result<(GroundTheory, EntailmentResult), EntailError> {
    let g = ground_with_cap(t, limits.var_cap)?;
    let result = solve_truth_table(&g, limits)?;
    Ok((g, result))
}
