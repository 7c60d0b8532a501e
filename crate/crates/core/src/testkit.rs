//! Deterministic generators and builders shared by tests and benchmarks.

use crate::entail::{GroundTheory, PropFormula};
use crate::logic::{Declarations, Formula, Term};
use crate::types::{Answer, Modality};
use rand::Rng;

/// Random well-formed first-order formula over the given declarations.
/// Quantified variables are fresh (`q0`, `q1`, ...) and atoms draw arguments
/// from constants and in-scope bound variables.
pub fn random_formula<R: Rng>(rng: &mut R, decls: &Declarations, depth: usize) -> Formula {
    let mut fresh = 0usize;
    let mut bound: Vec<String> = Vec::new();
    gen_formula(rng, decls, depth, &mut bound, &mut fresh)
}

fn gen_formula<R: Rng>(
    rng: &mut R,
    decls: &Declarations,
    depth: usize,
    bound: &mut Vec<String>,
    fresh: &mut usize,
) -> Formula {
    let can_apply = !decls.constants.is_empty() || !bound.is_empty();
    let atom = |rng: &mut R, bound: &Vec<String>| {
        let candidates: Vec<&(String, usize)> = decls
            .predicates
            .iter()
            .filter(|(_, arity)| *arity == 0 || can_apply)
            .collect();
        let (name, arity) = candidates[rng.gen_range(0..candidates.len())].clone();
        let args = (0..arity)
            .map(|_| {
                let pool = bound.len() + decls.constants.len();
                let pick = rng.gen_range(0..pool);
                if pick < bound.len() {
                    Term::Variable(bound[pick].clone())
                } else {
                    Term::Constant(decls.constants[pick - bound.len()].clone())
                }
            })
            .collect();
        Formula::Atom { predicate: name, args }
    };
    if depth == 0 {
        return atom(rng, bound);
    }
    match rng.gen_range(0..8) {
        0 => atom(rng, bound),
        1 => Formula::not(gen_formula(rng, decls, depth - 1, bound, fresh)),
        2 => Formula::and(
            gen_formula(rng, decls, depth - 1, bound, fresh),
            gen_formula(rng, decls, depth - 1, bound, fresh),
        ),
        3 => Formula::or(
            gen_formula(rng, decls, depth - 1, bound, fresh),
            gen_formula(rng, decls, depth - 1, bound, fresh),
        ),
        4 => Formula::implies(
            gen_formula(rng, decls, depth - 1, bound, fresh),
            gen_formula(rng, decls, depth - 1, bound, fresh),
        ),
        5 => Formula::iff(
            gen_formula(rng, decls, depth - 1, bound, fresh),
            gen_formula(rng, decls, depth - 1, bound, fresh),
        ),
        _ => {
            let var = format!("q{}", *fresh);
            *fresh += 1;
            bound.push(var.clone());
            let body = gen_formula(rng, decls, depth - 1, bound, fresh);
            bound.pop();
            if rng.gen_bool(0.5) {
                Formula::forall(var, body)
            } else {
                Formula::exists(var, body)
            }
        }
    }
}

/// Random quantifier-free formula over `n_vars` variables.
pub fn random_prop_formula<R: Rng>(rng: &mut R, n_vars: usize, depth: usize) -> PropFormula {
    if depth == 0 || rng.gen_range(0..6) == 0 {
        return PropFormula::Var(rng.gen_range(0..n_vars));
    }
    let sub = |rng: &mut R| Box::new(random_prop_formula(rng, n_vars, depth - 1));
    match rng.gen_range(0..5) {
        0 => PropFormula::Not(sub(rng)),
        1 => PropFormula::And(sub(rng), sub(rng)),
        2 => PropFormula::Or(sub(rng), sub(rng)),
        3 => PropFormula::Implies(sub(rng), sub(rng)),
        _ => PropFormula::Iff(sub(rng), sub(rng)),
    }
}

/// Random ground theory with up to `max_vars` variables and `max_premises`
/// premises. Every variable id below the drawn count is mentioned somewhere,
/// so the theory's variable table has no gaps.
pub fn random_ground_theory<R: Rng>(
    rng: &mut R,
    max_vars: usize,
    max_premises: usize,
) -> GroundTheory {
    let n_vars = rng.gen_range(1..=max_vars);
    let n_premises = rng.gen_range(0..=max_premises);
    let premises = (0..n_premises).map(|_| random_prop_formula(rng, n_vars, 3)).collect();
    let conclusion = random_prop_formula(rng, n_vars, 3);
    GroundTheory::from_parts(n_vars, premises, conclusion)
}

/// Canonical trace text for a modality: tagged rationale plus answer block.
pub fn trace_text(modality: Modality, body: &str, answer: Option<Answer>) -> String {
    let mut out = format!("{}\n{}\n{}", modality.open_tag(), body, modality.close_tag());
    if let Some(a) = answer {
        out.push_str(&format!(
            "\n<answer>\nThe final answer is ({}).\n<end_of_answer>",
            a.letter()
        ));
    }
    out
}

/// A rationale body that passes the code-modality content checks.
pub fn valid_code_body() -> &'static str {
    "class World:\n    def __init__(self):\n        self.facts = {}\n\ndef check(world):\n    return world.facts"
}
