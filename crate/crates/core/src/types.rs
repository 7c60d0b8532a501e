//! Shared domain vocabulary: answer options and reasoning modalities.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// One of the three answer options offered to the model:
/// (A) True, (B) False, (C) Uncertain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Answer {
    A,
    B,
    C,
}

impl Answer {
    pub const ALL: [Answer; 3] = [Answer::A, Answer::B, Answer::C];

    /// The option's canonical word as shown in the options block.
    pub fn word(self) -> &'static str {
        match self {
            Answer::A => "True",
            Answer::B => "False",
            Answer::C => "Uncertain",
        }
    }

    pub fn letter(self) -> char {
        match self {
            Answer::A => 'A',
            Answer::B => 'B',
            Answer::C => 'C',
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Answer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(Answer::A),
            "B" | "b" => Ok(Answer::B),
            "C" | "c" => Ok(Answer::C),
            other => Err(format!("not an answer option: {other:?}")),
        }
    }
}

/// A reasoning modality (thought paradigm): the representational format a
/// rationale is written in. Exactly three are supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Modality {
    #[serde(rename = "nl")]
    Nl,
    #[serde(rename = "code")]
    Code,
    #[serde(rename = "truth_table")]
    TruthTable,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Nl, Modality::Code, Modality::TruthTable];

    /// Tag name used both in prompts (the elicitor slot) and in trace markup.
    pub fn tag_name(self) -> &'static str {
        match self {
            Modality::Nl => "nl_cot",
            Modality::Code => "code",
            Modality::TruthTable => "truth_table",
        }
    }

    pub fn open_tag(self) -> String {
        format!("<{}>", self.tag_name())
    }

    pub fn close_tag(self) -> String {
        format!("<end_of_{}>", self.tag_name())
    }

    /// Stable key used in file formats and CLI flags.
    pub fn key(self) -> &'static str {
        match self {
            Modality::Nl => "nl",
            Modality::Code => "code",
            Modality::TruthTable => "truth_table",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.key())
    }
}

impl FromStr for Modality {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nl" | "nl_cot" | "natural_language" => Ok(Modality::Nl),
            "code" => Ok(Modality::Code),
            "tt" | "truth_table" | "truthtable" => Ok(Modality::TruthTable),
            other => Err(format!("unknown modality: {other:?}")),
        }
    }
}
