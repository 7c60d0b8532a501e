//! First-order formulas over finite constant domains.
//!
//! The language has predicates of fixed arity (nullary predicates double as
//! propositional letters), the connectives `~ & | -> <->`, and the
//! quantifiers `forall`/`exists`. There are no functions and no equality.

use std::collections::HashMap;

/// A term is either a declared constant or a quantifier-bound variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Constant(String),
    Variable(String),
}

impl Term {
    pub fn name(&self) -> &str {
        match self {
            Term::Constant(n) | Term::Variable(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Atom { predicate: String, args: Vec<Term> },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    ForAll(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn atom(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Atom { predicate: predicate.into(), args }
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Self {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    pub fn iff(l: Formula, r: Formula) -> Self {
        Formula::Iff(Box::new(l), Box::new(r))
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Self {
        Formula::ForAll(var.into(), Box::new(body))
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Self {
        Formula::Exists(var.into(), Box::new(body))
    }

    /// True when the formula contains a quantifier anywhere.
    pub fn has_quantifier(&self) -> bool {
        match self {
            Formula::Atom { .. } => false,
            Formula::Not(f) => f.has_quantifier(),
            Formula::And(l, r)
            | Formula::Or(l, r)
            | Formula::Implies(l, r)
            | Formula::Iff(l, r) => l.has_quantifier() || r.has_quantifier(),
            Formula::ForAll(..) | Formula::Exists(..) => true,
        }
    }
}

/// Symbol declarations a formula is checked against: the constant domain and
/// the predicate signature. Constants and predicates share a namespace-wide
/// uniqueness requirement, and quantified variables must not shadow constants.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Declarations {
    pub constants: Vec<String>,
    pub predicates: Vec<(String, usize)>,
    arity: HashMap<String, usize>,
    const_set: HashMap<String, ()>,
}

impl Declarations {
    pub fn new(constants: Vec<String>, predicates: Vec<(String, usize)>) -> Self {
        let arity = predicates.iter().cloned().collect();
        let const_set = constants.iter().map(|c| (c.clone(), ())).collect();
        Declarations { constants, predicates, arity, const_set }
    }

    pub fn arity_of(&self, predicate: &str) -> Option<usize> {
        self.arity.get(predicate).copied()
    }

    pub fn is_constant(&self, name: &str) -> bool {
        self.const_set.contains_key(name)
    }
}

/// A reasoning problem in formal dress: premises plus a single closed
/// conclusion, over declared constants and predicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theory {
    pub declarations: Declarations,
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
}

impl Theory {
    pub fn has_quantifier(&self) -> bool {
        self.premises.iter().any(Formula::has_quantifier) || self.conclusion.has_quantifier()
    }
}
