//! The `.arg` theory language and the `.scn` scenario language.
//!
//! ```text
//! % attribution defaults
//! sort country = {c1, c2}.
//! abducible avoid/2.
//! fact sourceIP(a,ip1).
//! rule a1: neg perform(A,Country).
//! rule a2: perform(A,C) <- sourceIP(A,IP), geoloc(IP,C).
//! layer a2: tactical.
//! prefer b1: a2 > a1.
//! prefer c1: b4 > b2 when motive(C,A).
//! conflict access(D,U,permitted) ~ access(D,U,denied).
//! ```
//!
//! Lowercase-initial words are constants, predicates and labels;
//! uppercase-initial words are variables. Priority levels are inferred from
//! the labels they rank, which must be defined earlier in the file.

mod lexer;
mod parser;
mod printer;

use alloc::string::String;
use core::fmt;

pub use parser::{parse, parse_literal, parse_scenario, Parsed, Scenario, ScenarioExpect};
pub use printer::{normalize, print};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

/// A 1-based, inclusive source range.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub file: String,
    pub start: Pos,
    pub end: Pos,
}

impl SourceSpan {
    pub fn new(file: &str, start: Pos, end: Pos) -> Self {
        SourceSpan {
            file: file.into(),
            start,
            end,
        }
    }

    pub fn to(&self, other: &SourceSpan) -> SourceSpan {
        SourceSpan::new(&self.file, self.start, other.end)
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.start.line, self.start.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    /// What the parser would have accepted at `span`.
    pub expected: Option<String>,
}

impl ParseError {
    pub fn new(span: SourceSpan, message: impl Into<String>, expected: Option<String>) -> Self {
        ParseError {
            span,
            message: message.into(),
            expected,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)?;
        if let Some(e) = &self.expected {
            write!(f, " (expected {e})")?;
        }
        Ok(())
    }
}

impl core::error::Error for ParseError {}
