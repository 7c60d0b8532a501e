//! The formal input language: first-order formulas over finite constant
//! domains, a parser for them, a pretty-printer, and the theory file format.

mod ast;
mod error;
mod parser;
mod printer;

pub use ast::{Declarations, Formula, Term, Theory};
pub use error::LogicError;
pub use parser::{parse_formula, parse_theory};
pub use printer::format_formula;
