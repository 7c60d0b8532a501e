//! Recursive-descent parser for the formula and theory-file grammars.
//!
//! Formula grammar (precedence low to high, `->` and `<->` right-associative):
//!
//! ```text
//! formula := iff
//! iff     := implies ("<->" iff)?
//! implies := or ("->" implies)?
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "~" unary | quant | primary
//! quant   := ("forall" | "exists") IDENT "(" formula ")"
//! primary := IDENT ("(" IDENT ("," IDENT)* ")")? | "(" formula ")"
//! IDENT   := [A-Za-z_][A-Za-z0-9_]*
//! ```
//!
//! Theory files are line-oriented: `consts: a, b;`, `preds: P/1, T/0;`,
//! one `premise: <formula>` per line, and a single `conclusion: <formula>`.
//! `#` starts a comment that runs to end of line.

use super::ast::{Declarations, Formula, Term, Theory};
use super::error::LogicError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Not,
    And,
    Or,
    Arrow,
    Iff,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::Not => "'~'".into(),
            Tok::And => "'&'".into(),
            Tok::Or => "'|'".into(),
            Tok::Arrow => "'->'".into(),
            Tok::Iff => "'<->'".into(),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if is_ident_start(c)) && chars.all(is_ident_continue)
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, LogicError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            ',' => {
                toks.push((Tok::Comma, i));
                i += 1;
            }
            '~' => {
                toks.push((Tok::Not, i));
                i += 1;
            }
            '&' => {
                toks.push((Tok::And, i));
                i += 1;
            }
            '|' => {
                toks.push((Tok::Or, i));
                i += 1;
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((Tok::Arrow, i));
                    i += 2;
                } else {
                    return Err(LogicError::syntax(i, "expected '->'"));
                }
            }
            '<' => {
                if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') {
                    toks.push((Tok::Iff, i));
                    i += 3;
                } else {
                    return Err(LogicError::syntax(i, "expected '<->'"));
                }
            }
            c if is_ident_start(c) => {
                let start = i;
                while i < bytes.len() && is_ident_continue(bytes[i] as char) {
                    i += 1;
                }
                toks.push((Tok::Ident(text[start..i].to_string()), start));
            }
            other => {
                return Err(LogicError::syntax(i, format!("unexpected character {other:?}")));
            }
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    decls: &'a Declarations,
    bound: Vec<String>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), LogicError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(LogicError::syntax(
                self.here(),
                format!("expected {}, found {}", want.describe(), t.describe()),
            )),
            None => Err(LogicError::syntax(
                self.end,
                format!("expected {}, found end of input", want.describe()),
            )),
        }
    }

    fn formula(&mut self) -> Result<Formula, LogicError> {
        self.iff()
    }

    fn iff(&mut self) -> Result<Formula, LogicError> {
        let left = self.implies()?;
        if self.peek() == Some(&Tok::Iff) {
            self.pos += 1;
            let right = self.iff()?;
            Ok(Formula::iff(left, right))
        } else {
            Ok(left)
        }
    }

    fn implies(&mut self) -> Result<Formula, LogicError> {
        let left = self.or()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let right = self.implies()?;
            Ok(Formula::implies(left, right))
        } else {
            Ok(left)
        }
    }

    fn or(&mut self) -> Result<Formula, LogicError> {
        let mut f = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            f = Formula::or(f, self.and()?);
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<Formula, LogicError> {
        let mut f = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, LogicError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Ident(name)) if name == "forall" || name == "exists" => self.quantifier(),
            _ => self.primary(),
        }
    }

    fn quantifier(&mut self) -> Result<Formula, LogicError> {
        let universal = matches!(self.bump(), Some(Tok::Ident(k)) if k == "forall");
        let var_pos = self.here();
        let var = match self.bump() {
            Some(Tok::Ident(v)) => v,
            other => {
                return Err(LogicError::syntax(
                    var_pos,
                    format!(
                        "expected quantified variable, found {}",
                        other.map(|t| t.describe()).unwrap_or_else(|| "end of input".into())
                    ),
                ));
            }
        };
        if self.decls.is_constant(&var) {
            return Err(LogicError::syntax(
                var_pos,
                format!("quantified variable {var:?} shadows a declared constant"),
            ));
        }
        self.expect(Tok::LParen)?;
        self.bound.push(var.clone());
        let body = self.formula();
        self.bound.pop();
        let body = body?;
        self.expect(Tok::RParen)?;
        Ok(if universal { Formula::forall(var, body) } else { Formula::exists(var, body) })
    }

    fn primary(&mut self) -> Result<Formula, LogicError> {
        match self.bump() {
            Some(Tok::LParen) => {
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::Ident(name)) => self.atom(name),
            Some(t) => Err(LogicError::syntax(
                self.toks[self.pos - 1].1,
                format!("expected a formula, found {}", t.describe()),
            )),
            None => Err(LogicError::syntax(self.end, "expected a formula, found end of input")),
        }
    }

    fn atom(&mut self, predicate: String) -> Result<Formula, LogicError> {
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            loop {
                let pos = self.here();
                match self.bump() {
                    Some(Tok::Ident(arg)) => args.push(self.resolve_term(arg)?),
                    other => {
                        return Err(LogicError::syntax(
                            pos,
                            format!(
                                "expected argument identifier, found {}",
                                other.map(|t| t.describe()).unwrap_or_else(|| "end of input".into())
                            ),
                        ));
                    }
                }
                match self.bump() {
                    Some(Tok::Comma) => continue,
                    Some(Tok::RParen) => break,
                    Some(t) => {
                        return Err(LogicError::syntax(
                            self.toks[self.pos - 1].1,
                            format!("expected ',' or ')', found {}", t.describe()),
                        ));
                    }
                    None => {
                        return Err(LogicError::syntax(
                            self.end,
                            "unclosed argument list: expected ',' or ')'",
                        ));
                    }
                }
            }
        }
        match self.decls.arity_of(&predicate) {
            None => Err(LogicError::UndeclaredSymbol { name: predicate }),
            Some(expected) if expected != args.len() => Err(LogicError::ArityMismatch {
                predicate,
                expected,
                found: args.len(),
            }),
            Some(_) => Ok(Formula::Atom { predicate, args }),
        }
    }

    fn resolve_term(&self, name: String) -> Result<Term, LogicError> {
        if self.bound.iter().rev().any(|v| *v == name) {
            Ok(Term::Variable(name))
        } else if self.decls.is_constant(&name) {
            Ok(Term::Constant(name))
        } else {
            Err(LogicError::UnboundVariable { name })
        }
    }
}

/// Parse a single formula against the given declarations. The result is
/// closed: every variable is bound by an enclosing quantifier.
pub fn parse_formula(text: &str, decls: &Declarations) -> Result<Formula, LogicError> {
    let toks = lex(text)?;
    let mut parser =
        Parser { toks, pos: 0, end: text.len(), decls, bound: Vec::new() };
    let f = parser.formula()?;
    if let Some(t) = parser.peek() {
        return Err(LogicError::syntax(
            parser.here(),
            format!("trailing input after formula: {}", t.describe()),
        ));
    }
    Ok(f)
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(idx) => &line[..idx],
        None => line,
    }
}

fn parse_symbol_list(body: &str, line_no: usize) -> Result<Vec<String>, LogicError> {
    let body = body.trim();
    let body = body
        .strip_suffix(';')
        .ok_or_else(|| LogicError::syntax(0, "declaration must end with ';'").at_line(line_no))?;
    let mut out = Vec::new();
    for part in body.split(',') {
        let name = part.trim();
        if name.is_empty() {
            continue;
        }
        if !is_identifier(name) {
            return Err(
                LogicError::syntax(0, format!("invalid identifier {name:?}")).at_line(line_no)
            );
        }
        out.push(name.to_string());
    }
    Ok(out)
}

fn parse_pred_list(body: &str, line_no: usize) -> Result<Vec<(String, usize)>, LogicError> {
    let body = body.trim();
    let body = body
        .strip_suffix(';')
        .ok_or_else(|| LogicError::syntax(0, "declaration must end with ';'").at_line(line_no))?;
    let mut out = Vec::new();
    for part in body.split(',') {
        let entry = part.trim();
        if entry.is_empty() {
            continue;
        }
        let (name, arity) = entry.split_once('/').ok_or_else(|| {
            LogicError::syntax(0, format!("predicate entry {entry:?} must be name/arity"))
                .at_line(line_no)
        })?;
        let name = name.trim();
        if !is_identifier(name) {
            return Err(
                LogicError::syntax(0, format!("invalid identifier {name:?}")).at_line(line_no)
            );
        }
        let arity: usize = arity.trim().parse().map_err(|_| {
            LogicError::syntax(0, format!("invalid arity in {entry:?}")).at_line(line_no)
        })?;
        out.push((name.to_string(), arity));
    }
    Ok(out)
}

/// Parse a theory file. See the module docs for the line format.
pub fn parse_theory(text: &str) -> Result<Theory, LogicError> {
    let mut constants: Option<(usize, Vec<String>)> = None;
    let mut predicates: Option<(usize, Vec<(String, usize)>)> = None;
    let mut premises: Vec<(usize, String)> = Vec::new();
    let mut conclusion: Option<(usize, String)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(body) = line.strip_prefix("consts:") {
            if constants.is_some() {
                return Err(LogicError::syntax(0, "duplicate consts section").at_line(line_no));
            }
            constants = Some((line_no, parse_symbol_list(body, line_no)?));
        } else if let Some(body) = line.strip_prefix("preds:") {
            if predicates.is_some() {
                return Err(LogicError::syntax(0, "duplicate preds section").at_line(line_no));
            }
            predicates = Some((line_no, parse_pred_list(body, line_no)?));
        } else if let Some(body) = line.strip_prefix("premise:") {
            premises.push((line_no, body.trim().to_string()));
        } else if let Some(body) = line.strip_prefix("conclusion:") {
            if conclusion.is_some() {
                return Err(LogicError::syntax(0, "duplicate conclusion").at_line(line_no));
            }
            conclusion = Some((line_no, body.trim().to_string()));
        } else {
            return Err(LogicError::syntax(
                0,
                format!("unrecognized line {line:?} (expected consts:/preds:/premise:/conclusion:)"),
            )
            .at_line(line_no));
        }
    }

    let constants = constants.map(|(_, c)| c).unwrap_or_default();
    let (preds_line, predicates) = predicates
        .ok_or_else(|| LogicError::MissingSection { section: "preds".into() })?;
    let (conclusion_line, conclusion_text) = conclusion
        .ok_or_else(|| LogicError::MissingSection { section: "conclusion".into() })?;

    let mut seen = std::collections::HashSet::new();
    for name in constants.iter().chain(predicates.iter().map(|(n, _)| n)) {
        if name == "forall" || name == "exists" {
            return Err(LogicError::syntax(0, format!("{name:?} is a reserved keyword"))
                .at_line(preds_line));
        }
        if !seen.insert(name.clone()) {
            return Err(LogicError::syntax(0, format!("duplicate symbol {name:?}"))
                .at_line(preds_line));
        }
    }

    let decls = Declarations::new(constants, predicates);
    let mut parsed_premises = Vec::with_capacity(premises.len());
    for (line_no, text) in premises {
        let f = parse_formula(&text, &decls).map_err(|e| e.at_line(line_no))?;
        parsed_premises.push(f);
    }
    let parsed_conclusion =
        parse_formula(&conclusion_text, &decls).map_err(|e| e.at_line(conclusion_line))?;

    let theory =
        Theory { declarations: decls, premises: parsed_premises, conclusion: parsed_conclusion };
    if theory.has_quantifier() && theory.declarations.constants.is_empty() {
        return Err(LogicError::EmptyDomainWithQuantifier);
    }
    Ok(theory)
}
