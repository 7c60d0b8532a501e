use thiserror::Error;

#[derive(Debug, Error)]
pub enum LogicError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("predicate {predicate} expects {expected} argument(s), found {found}")]
    ArityMismatch { predicate: String, expected: usize, found: usize },

    #[error("unbound variable: {name}")]
    UnboundVariable { name: String },

    #[error("undeclared symbol: {name}")]
    UndeclaredSymbol { name: String },

    #[error("missing section: {section}")]
    MissingSection { section: String },

    #[error("a quantifier appears but no constants are declared")]
    EmptyDomainWithQuantifier,

    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<LogicError>,
    },
}

impl LogicError {
    pub fn syntax(position: usize, message: impl Into<String>) -> Self {
        LogicError::Syntax { position, message: message.into() }
    }

    pub fn at_line(self, line: usize) -> Self {
        LogicError::AtLine { line, source: Box::new(self) }
    }

    /// The underlying error with any line wrapper peeled off.
    pub fn root(&self) -> &LogicError {
        match self {
            LogicError::AtLine { source, .. } => source.root(),
            other => other,
        }
    }
}
