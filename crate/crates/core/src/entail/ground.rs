//! Lowering a first-order theory to propositional form.
//!
//! Universal quantifiers expand to conjunctions over the declared constants,
//! existentials to disjunctions. Each distinct ground atom (e.g. `E(a)`) is
//! interned as one propositional variable; ids follow first occurrence across
//! the premises (in order), then the conclusion.

use super::EntailError;
use crate::logic::{Formula, Term, Theory};
use std::collections::HashMap;

pub const DEFAULT_VAR_CAP: usize = 24;

/// One propositional variable of a ground theory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropVar {
    pub id: usize,
    pub label: String,
}

/// Quantifier-free formula over interned variable ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropFormula {
    Var(usize),
    Not(Box<PropFormula>),
    And(Box<PropFormula>, Box<PropFormula>),
    Or(Box<PropFormula>, Box<PropFormula>),
    Implies(Box<PropFormula>, Box<PropFormula>),
    Iff(Box<PropFormula>, Box<PropFormula>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTheory {
    pub vars: Vec<PropVar>,
    pub premises: Vec<PropFormula>,
    pub conclusion: PropFormula,
}

impl GroundTheory {
    /// Build a ground theory directly from propositional parts; labels are
    /// `v0..v{n-1}` unless provided.
    pub fn from_parts(
        n_vars: usize,
        premises: Vec<PropFormula>,
        conclusion: PropFormula,
    ) -> GroundTheory {
        let vars = (0..n_vars).map(|id| PropVar { id, label: format!("v{id}") }).collect();
        GroundTheory { vars, premises, conclusion }
    }

    /// The same theory with the conclusion negated.
    pub fn negated_conclusion(&self) -> GroundTheory {
        GroundTheory {
            vars: self.vars.clone(),
            premises: self.premises.clone(),
            conclusion: PropFormula::Not(Box::new(self.conclusion.clone())),
        }
    }
}

struct Interner {
    vars: Vec<PropVar>,
    by_label: HashMap<String, usize>,
}

impl Interner {
    fn intern(&mut self, label: String) -> usize {
        if let Some(&id) = self.by_label.get(&label) {
            return id;
        }
        let id = self.vars.len();
        self.by_label.insert(label.clone(), id);
        self.vars.push(PropVar { id, label });
        id
    }
}

fn atom_label(predicate: &str, args: &[String]) -> String {
    if args.is_empty() {
        predicate.to_string()
    } else {
        format!("{predicate}({})", args.join(", "))
    }
}

fn instantiate(
    f: &Formula,
    constants: &[String],
    env: &mut HashMap<String, String>,
    interner: &mut Interner,
) -> Result<PropFormula, EntailError> {
    match f {
        Formula::Atom { predicate, args } => {
            let ground_args: Vec<String> = args
                .iter()
                .map(|t| match t {
                    Term::Constant(c) => c.clone(),
                    // Top-level formulas are closed, so every variable is in env.
                    Term::Variable(v) => env.get(v).cloned().unwrap_or_else(|| v.clone()),
                })
                .collect();
            Ok(PropFormula::Var(interner.intern(atom_label(predicate, &ground_args))))
        }
        Formula::Not(inner) => {
            Ok(PropFormula::Not(Box::new(instantiate(inner, constants, env, interner)?)))
        }
        Formula::And(l, r) => Ok(PropFormula::And(
            Box::new(instantiate(l, constants, env, interner)?),
            Box::new(instantiate(r, constants, env, interner)?),
        )),
        Formula::Or(l, r) => Ok(PropFormula::Or(
            Box::new(instantiate(l, constants, env, interner)?),
            Box::new(instantiate(r, constants, env, interner)?),
        )),
        Formula::Implies(l, r) => Ok(PropFormula::Implies(
            Box::new(instantiate(l, constants, env, interner)?),
            Box::new(instantiate(r, constants, env, interner)?),
        )),
        Formula::Iff(l, r) => Ok(PropFormula::Iff(
            Box::new(instantiate(l, constants, env, interner)?),
            Box::new(instantiate(r, constants, env, interner)?),
        )),
        Formula::ForAll(var, body) => {
            expand_quantifier(var, body, true, constants, env, interner)
        }
        Formula::Exists(var, body) => {
            expand_quantifier(var, body, false, constants, env, interner)
        }
    }
}

fn expand_quantifier(
    var: &str,
    body: &Formula,
    universal: bool,
    constants: &[String],
    env: &mut HashMap<String, String>,
    interner: &mut Interner,
) -> Result<PropFormula, EntailError> {
    if constants.is_empty() {
        return Err(EntailError::EmptyDomainWithQuantifier);
    }
    let shadowed = env.get(var).cloned();
    let mut acc: Option<PropFormula> = None;
    for c in constants {
        env.insert(var.to_string(), c.clone());
        let inst = instantiate(body, constants, env, interner)?;
        acc = Some(match acc {
            None => inst,
            Some(prev) if universal => PropFormula::And(Box::new(prev), Box::new(inst)),
            Some(prev) => PropFormula::Or(Box::new(prev), Box::new(inst)),
        });
    }
    match shadowed {
        Some(old) => {
            env.insert(var.to_string(), old);
        }
        None => {
            env.remove(var);
        }
    }
    Ok(acc.expect("nonempty constant list"))
}

/// Ground with the default variable cap of 24.
pub fn ground(t: &Theory) -> Result<GroundTheory, EntailError> {
    ground_with_cap(t, DEFAULT_VAR_CAP)
}

pub fn ground_with_cap(t: &Theory, var_cap: usize) -> Result<GroundTheory, EntailError> {
    let mut interner = Interner { vars: Vec::new(), by_label: HashMap::new() };
    let constants = &t.declarations.constants;
    let mut env = HashMap::new();
    let mut premises = Vec::with_capacity(t.premises.len());
    for p in &t.premises {
        premises.push(instantiate(p, constants, &mut env, &mut interner)?);
    }
    let conclusion = instantiate(&t.conclusion, constants, &mut env, &mut interner)?;
    if interner.vars.len() > var_cap {
        return Err(EntailError::VarCapExceeded { count: interner.vars.len(), cap: var_cap });
    }
    Ok(GroundTheory { vars: interner.vars, premises, conclusion })
}

/// Render a propositional formula using the theory's variable labels,
/// following the same precedence conventions as the first-order printer.
pub fn format_prop(f: &PropFormula, vars: &[PropVar]) -> String {
    fn level(f: &PropFormula) -> u8 {
        match f {
            PropFormula::Var(_) | PropFormula::Not(_) => 5,
            PropFormula::And(..) => 4,
            PropFormula::Or(..) => 3,
            PropFormula::Implies(..) => 2,
            PropFormula::Iff(..) => 1,
        }
    }
    fn go(f: &PropFormula, min_level: u8, vars: &[PropVar], out: &mut String) {
        let paren = level(f) < min_level;
        if paren {
            out.push('(');
        }
        match f {
            PropFormula::Var(i) => out.push_str(&vars[*i].label),
            PropFormula::Not(x) => {
                out.push('~');
                go(x, 5, vars, out);
            }
            PropFormula::And(l, r) => {
                go(l, 4, vars, out);
                out.push_str(" & ");
                go(r, 5, vars, out);
            }
            PropFormula::Or(l, r) => {
                go(l, 3, vars, out);
                out.push_str(" | ");
                go(r, 4, vars, out);
            }
            PropFormula::Implies(l, r) => {
                go(l, 3, vars, out);
                out.push_str(" -> ");
                go(r, 2, vars, out);
            }
            PropFormula::Iff(l, r) => {
                go(l, 2, vars, out);
                out.push_str(" <-> ");
                go(r, 1, vars, out);
            }
        }
        if paren {
            out.push(')');
        }
    }
    let mut out = String::new();
    go(f, 1, vars, &mut out);
    out
}
