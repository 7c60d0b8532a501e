//! Pretty-printer for formulas. Output re-parses to a structurally equal
//! formula (round-trip law), inserting parentheses only where precedence or
//! associativity requires them.

use super::ast::{Formula, Term};
use std::fmt::Write;

// Binding strength, highest first: atoms/negation/quantifiers, &, |, ->, <->.
fn level(f: &Formula) -> u8 {
    match f {
        Formula::Atom { .. } | Formula::Not(_) | Formula::ForAll(..) | Formula::Exists(..) => 5,
        Formula::And(..) => 4,
        Formula::Or(..) => 3,
        Formula::Implies(..) => 2,
        Formula::Iff(..) => 1,
    }
}

fn write_formula(f: &Formula, min_level: u8, out: &mut String) {
    let paren = level(f) < min_level;
    if paren {
        out.push('(');
    }
    match f {
        Formula::Atom { predicate, args } => {
            out.push_str(predicate);
            if !args.is_empty() {
                out.push('(');
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(arg.name());
                }
                out.push(')');
            }
        }
        Formula::Not(inner) => {
            out.push('~');
            // Quantifiers are unary-level, but `~(forall x (..))` reads better
            // and still round-trips.
            if matches!(**inner, Formula::ForAll(..) | Formula::Exists(..)) {
                out.push('(');
                write_formula(inner, 1, out);
                out.push(')');
            } else {
                write_formula(inner, 5, out);
            }
        }
        Formula::And(l, r) => {
            write_formula(l, 4, out);
            out.push_str(" & ");
            write_formula(r, 5, out);
        }
        Formula::Or(l, r) => {
            write_formula(l, 3, out);
            out.push_str(" | ");
            write_formula(r, 4, out);
        }
        Formula::Implies(l, r) => {
            write_formula(l, 3, out);
            out.push_str(" -> ");
            write_formula(r, 2, out);
        }
        Formula::Iff(l, r) => {
            write_formula(l, 2, out);
            out.push_str(" <-> ");
            write_formula(r, 1, out);
        }
        Formula::ForAll(var, body) => {
            let _ = write!(out, "forall {var} (");
            write_formula(body, 1, out);
            out.push(')');
        }
        Formula::Exists(var, body) => {
            let _ = write!(out, "exists {var} (");
            write_formula(body, 1, out);
            out.push(')');
        }
    }
    if paren {
        out.push(')');
    }
}

pub fn format_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, 1, &mut out);
    out
}

impl std::fmt::Display for Formula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&format_formula(self))
    }
}

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
