//! A live analysis session: a theory, an append-only evidence log and a
//! revision counter. The HTTP service and the REPL both drive this type,
//! so the two front ends give identical answers.

use std::fmt;
use std::time::{SystemTime, UNIX_EPOCH};

use argora_core::abduction::{abduce, Tier, DEFAULT_CANDIDATE_CAP};
use argora_core::conflicts::detect_conflicts;
use argora_core::dsl::{self, parse_literal, ParseError, SourceSpan};
use argora_core::explain::explain_verdict;
use argora_core::solver::{Analysis, SolveError};
use argora_core::{Config, KernelError, Literal, PriorityRule, Theory};
use serde::{Deserialize, Serialize};

use crate::wire::{
    AbductionDoc, ConflictReportDoc, ErrorDoc, ExplanationDoc, PriorityDoc, SpanDoc, VerdictDoc,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    BadRequest,
    NotFound,
    Conflict,
    Unprocessable,
    Engine,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionError {
    pub kind: ErrorKind,
    pub code: &'static str,
    pub message: String,
    pub span: Option<SourceSpan>,
}

impl SessionError {
    pub fn new(kind: ErrorKind, code: &'static str, message: impl Into<String>) -> Self {
        SessionError {
            kind,
            code,
            message: message.into(),
            span: None,
        }
    }

    pub fn doc(&self, revision: Option<u64>) -> ErrorDoc {
        ErrorDoc {
            code: self.code.into(),
            message: self.message.clone(),
            span: self.span.as_ref().map(SpanDoc::from),
            revision,
        }
    }
}

impl fmt::Display for SessionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for SessionError {}

impl From<ParseError> for SessionError {
    fn from(e: ParseError) -> Self {
        SessionError {
            kind: ErrorKind::BadRequest,
            code: "parse-error",
            message: e.to_string(),
            span: Some(e.span),
        }
    }
}

impl From<SolveError> for SessionError {
    fn from(e: SolveError) -> Self {
        let kind = match e {
            SolveError::InconsistentEvidence(..) => ErrorKind::Conflict,
            _ => ErrorKind::Unprocessable,
        };
        SessionError::new(kind, "engine", e.to_string())
    }
}

impl From<KernelError> for SessionError {
    fn from(e: KernelError) -> Self {
        let code = match e {
            KernelError::DuplicateLabel(_) => "duplicate-label",
            KernelError::DanglingLabel(_) => "dangling-label",
            _ => "invalid-priority",
        };
        SessionError::new(ErrorKind::Unprocessable, code, e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, SessionError>;

/// Parse a DSL literal, reporting spans against the literal text.
pub fn literal(text: &str) -> Result<Literal> {
    Ok(parse_literal(text)?)
}

pub fn ground_literal(text: &str) -> Result<Literal> {
    let l = literal(text)?;
    if !l.is_ground() {
        return Err(SessionError::new(
            ErrorKind::BadRequest,
            "not-ground",
            format!("{l} contains variables"),
        ));
    }
    Ok(l)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Assert,
    Retract,
}

impl Op {
    fn as_str(self) -> &'static str {
        match self {
            Op::Assert => "assert",
            Op::Retract => "retract",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogEntry {
    pub op: Op,
    pub literal: Literal,
    pub revision: u64,
    /// Milliseconds since the Unix epoch.
    pub at: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntryDoc {
    pub op: Op,
    pub literal: String,
    pub revision: u64,
    pub at: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionRuleDoc {
    pub label: String,
    pub head: String,
    pub body: Vec<String>,
    pub layer: Option<String>,
}

/// Everything a client needs to render a session.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionDoc {
    pub session_id: String,
    pub pack: String,
    pub revision: u64,
    pub theory: String,
    pub rules: Vec<SessionRuleDoc>,
    pub priorities: Vec<PriorityDoc>,
    pub abducibles: Vec<String>,
    pub domain: Vec<String>,
    pub evidence: Vec<LogEntryDoc>,
    pub active: Vec<String>,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

#[derive(Clone, Debug)]
pub struct Session {
    pub id: String,
    pub pack: String,
    pub theory: Theory,
    pub log: Vec<LogEntry>,
    pub revision: u64,
    pub config: Config,
    active: Vec<Literal>,
}

impl Session {
    pub fn new(id: impl Into<String>, pack: impl Into<String>, theory: Theory) -> Self {
        Session {
            id: id.into(),
            pack: pack.into(),
            theory,
            log: Vec::new(),
            revision: 0,
            config: Config::default(),
            active: Vec::new(),
        }
    }

    /// Currently asserted evidence, in assertion order.
    pub fn active(&self) -> &[Literal] {
        &self.active
    }

    /// Apply retractions then assertions as one mutation. Nothing changes
    /// if any literal is rejected.
    pub fn evidence(&mut self, assert: &[Literal], retract: &[Literal]) -> Result<u64> {
        for l in assert.iter().chain(retract) {
            if !l.is_ground() {
                return Err(SessionError::new(
                    ErrorKind::BadRequest,
                    "not-ground",
                    format!("{l} contains variables"),
                ));
            }
        }
        if let Some(l) = retract.iter().find(|l| !self.active.contains(l)) {
            return Err(SessionError::new(
                ErrorKind::Conflict,
                "not-active",
                format!("{l} is not active evidence"),
            ));
        }
        let mut next: Vec<Literal> = self
            .active
            .iter()
            .filter(|l| !retract.contains(l))
            .cloned()
            .collect();
        for l in assert {
            let clash = next
                .iter()
                .chain(&self.theory.facts)
                .find(|o| self.theory.incompatible(o, l));
            if let Some(o) = clash {
                return Err(SessionError::new(
                    ErrorKind::Conflict,
                    "contradiction",
                    format!("{l} contradicts {o}"),
                ));
            }
            if !next.contains(l) {
                next.push(l.clone());
            }
        }
        if assert.is_empty() && retract.is_empty() {
            return Ok(self.revision);
        }
        self.revision += 1;
        let at = now_ms();
        let ops = retract
            .iter()
            .map(|l| (Op::Retract, l))
            .chain(assert.iter().map(|l| (Op::Assert, l)));
        for (op, l) in ops {
            self.log.push(LogEntry {
                op,
                literal: l.clone(),
                revision: self.revision,
                at,
            });
        }
        self.active = next;
        Ok(self.revision)
    }

    /// Add a level-inferred priority rule.
    pub fn add_priority(
        &mut self,
        label: &str,
        higher: &str,
        lower: &str,
        when: Vec<Literal>,
    ) -> Result<u64> {
        let level = self.theory.infer_level(higher, lower)?;
        self.theory
            .add_priority(PriorityRule::new(label, higher, lower, when, level))?;
        self.revision += 1;
        Ok(self.revision)
    }

    pub fn query(&self, pattern: &Literal) -> Result<Vec<VerdictDoc>> {
        let an = Analysis::new(
            &self.theory,
            &self.active,
            std::slice::from_ref(pattern),
            self.config,
        )?;
        let verdicts = an.query(pattern)?;
        Ok(verdicts.iter().map(|v| VerdictDoc::new(&an, v)).collect())
    }

    pub fn explain(&self, goal: &Literal, hint_size: usize) -> Result<ExplanationDoc> {
        if !goal.is_ground() {
            return Err(SessionError::new(
                ErrorKind::BadRequest,
                "not-ground",
                format!("{goal} contains variables"),
            ));
        }
        let e = explain_verdict(&self.theory, &self.active, goal, self.config, hint_size)?;
        Ok(ExplanationDoc::from(&e))
    }

    pub fn conflicts(&self) -> Vec<ConflictReportDoc> {
        detect_conflicts(&self.theory)
            .iter()
            .map(ConflictReportDoc::from)
            .collect()
    }

    pub fn abduce(&self, goal: &Literal, tier: Tier, max_size: usize) -> Result<AbductionDoc> {
        let found = abduce(
            &self.theory,
            &self.active,
            goal,
            tier,
            max_size,
            self.config,
            DEFAULT_CANDIDATE_CAP,
        )?;
        Ok(AbductionDoc::new(goal, tier, &found))
    }

    pub fn doc(&self) -> SessionDoc {
        SessionDoc {
            session_id: self.id.clone(),
            pack: self.pack.clone(),
            revision: self.revision,
            theory: dsl::print(&self.theory),
            rules: self
                .theory
                .rules
                .iter()
                .map(|r| SessionRuleDoc {
                    label: r.label.clone(),
                    head: r.head.to_string(),
                    body: r.body.iter().map(ToString::to_string).collect(),
                    layer: r.layer.map(|l| l.as_str().to_string()),
                })
                .collect(),
            priorities: {
                let mut ps: Vec<&PriorityRule> = self.theory.priorities.iter().collect();
                ps.sort_by(|a, b| (a.level, &a.label).cmp(&(b.level, &b.label)));
                ps.into_iter().map(PriorityDoc::from).collect()
            },
            abducibles: self
                .theory
                .abducibles
                .iter()
                .map(|a| {
                    let neg = if a.negated { "neg " } else { "" };
                    format!("{neg}{}/{}", a.predicate, a.arity)
                })
                .collect(),
            domain: self.theory.domain.iter().cloned().collect(),
            evidence: self
                .log
                .iter()
                .map(|e| LogEntryDoc {
                    op: e.op,
                    literal: e.literal.to_string(),
                    revision: e.revision,
                    at: e.at,
                })
                .collect(),
            active: self.active.iter().map(ToString::to_string).collect(),
        }
    }

    /// The theory as DSL text followed by the evidence log as `%@` comment
    /// lines, so the file still parses as a plain theory.
    pub fn snapshot(&self) -> String {
        let mut out = dsl::print(&self.theory);
        if !out.ends_with('\n') {
            out.push('\n');
        }
        out.push_str(&format!(
            "%@ session {} {} {}\n",
            self.id, self.pack, self.revision
        ));
        for e in &self.log {
            out.push_str(&format!(
                "%@ {} {} {} {}\n",
                e.op.as_str(),
                e.revision,
                e.at,
                e.literal
            ));
        }
        out
    }

    /// Rebuild a session from [`Session::snapshot`] output.
    pub fn restore(text: &str, file: &str) -> Result<Session> {
        let parsed = dsl::parse(text, file)?;
        let bad = |line: &str| {
            SessionError::new(
                ErrorKind::BadRequest,
                "bad-snapshot",
                format!("{file}: malformed snapshot line: {line}"),
            )
        };
        let mut session = Session::new("", "", parsed.theory);
        for line in text.lines() {
            let Some(rest) = line.strip_prefix("%@ ") else {
                continue;
            };
            let mut parts = rest.splitn(4, ' ');
            let (a, b, c, d) = (parts.next(), parts.next(), parts.next(), parts.next());
            match (a, b, c, d) {
                (Some("session"), Some(id), Some(pack), Some(rev)) => {
                    session.id = id.into();
                    session.pack = pack.into();
                    session.revision = rev.parse().map_err(|_| bad(line))?;
                }
                (Some(op), Some(rev), Some(at), Some(lit)) => {
                    let op = match op {
                        "assert" => Op::Assert,
                        "retract" => Op::Retract,
                        _ => return Err(bad(line)),
                    };
                    let literal = ground_literal(lit)?;
                    match op {
                        Op::Assert => session.active.push(literal.clone()),
                        Op::Retract => session.active.retain(|l| l != &literal),
                    }
                    session.log.push(LogEntry {
                        op,
                        literal,
                        revision: rev.parse().map_err(|_| bad(line))?,
                        at: at.parse().map_err(|_| bad(line))?,
                    });
                }
                _ => return Err(bad(line)),
            }
        }
        Ok(session)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packs::load_pack;

    fn l(s: &str) -> Literal {
        parse_literal(s).unwrap()
    }

    fn ssh() -> Session {
        Session::new("s1", "attribution-text", load_pack("attribution-text").unwrap())
    }

    fn status(s: &Session, goal: &str) -> String {
        s.query(&l(goal)).unwrap()[0].status.clone()
    }

    #[test]
    fn assert_then_retract_reverts() {
        let mut s = ssh();
        s.evidence(&[l("sourceIP(a,ip1)"), l("geoloc(ip1,c1)")], &[])
            .unwrap();
        let before = status(&s, "perform(a,c1)");
        let r0 = s.revision;
        s.evidence(&[l("spoofed(ip1)")], &[]).unwrap();
        assert_eq!(status(&s, "perform(a,c1)"), "rejected");
        s.evidence(&[], &[l("spoofed(ip1)")]).unwrap();
        assert_eq!(s.revision, r0 + 2);
        assert_eq!(status(&s, "perform(a,c1)"), before);
    }

    #[test]
    fn contradictions_are_refused_without_a_revision() {
        let mut s = ssh();
        s.evidence(&[l("spoofed(ip1)")], &[]).unwrap();
        let e = s.evidence(&[l("neg spoofed(ip1)")], &[]).unwrap_err();
        assert_eq!(e.kind, ErrorKind::Conflict);
        assert_eq!(s.revision, 1);
        assert_eq!(s.active().len(), 1);
    }

    #[test]
    fn dangling_priority_is_unprocessable() {
        let mut s = ssh();
        let e = s.add_priority("px", "r9", "r1", vec![]).unwrap_err();
        assert_eq!(e.kind, ErrorKind::Unprocessable);
        assert_eq!(s.revision, 0);
    }

    #[test]
    fn snapshot_round_trips() {
        let mut s = ssh();
        s.evidence(&[l("sourceIP(a,ip1)"), l("spoofed(ip1)")], &[])
            .unwrap();
        s.evidence(&[], &[l("spoofed(ip1)")]).unwrap();
        s.add_priority("p4_3", "r4", "r3", vec![]).unwrap();
        let back = Session::restore(&s.snapshot(), "snap.arg").unwrap();
        assert_eq!(back.doc(), s.doc());
    }
}
