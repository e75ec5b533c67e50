//! JSON documents shared by the service and `--json` CLI output.
//!
//! Literals travel as DSL text. Keys are normalized by round-tripping
//! through `serde_json::Value`, whose maps are ordered, so equal documents
//! serialize to equal bytes.

use std::collections::BTreeMap;

use argora_core::abduction::{AbductiveAnswer, Abduction, Tier};
use argora_core::conflicts::{ConflictReport, Resolution};
use argora_core::dsl::SourceSpan;
use argora_core::explain::{ArgumentView, Counter, Explanation, Outcome, RuleUse};
use argora_core::solver::Analysis;
use argora_core::{Literal, PriorityRule, Verdict};
use serde::{Deserialize, Serialize};

fn texts(lits: &[Literal]) -> Vec<String> {
    lits.iter().map(ToString::to_string).collect()
}

/// Serialize with sorted keys, pretty-printed.
pub fn to_json<T: Serialize>(doc: &T) -> String {
    let value = serde_json::to_value(doc).expect("wire documents always serialize");
    serde_json::to_string_pretty(&value).expect("values always serialize")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictDoc {
    pub goal: String,
    pub status: String,
    /// Rule labels of each argument backing the status.
    pub support: Vec<Vec<String>>,
}

impl VerdictDoc {
    pub fn new(an: &Analysis, v: &Verdict) -> Self {
        let support = v
            .witnesses
            .iter()
            .map(|id| {
                an.arguments()[*id]
                    .labels(&an.ground)
                    .into_iter()
                    .map(ToString::to_string)
                    .collect()
            })
            .collect();
        VerdictDoc {
            goal: v.goal.to_string(),
            status: v.status.to_string(),
            support,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleDoc {
    pub label: String,
    pub head: String,
    pub body: Vec<String>,
}

impl From<&RuleUse> for RuleDoc {
    fn from(r: &RuleUse) -> Self {
        RuleDoc {
            label: r.label.clone(),
            head: r.head.to_string(),
            body: texts(&r.body),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgumentDoc {
    /// Top rule label, or `fact`.
    pub rule: String,
    pub conclusion: String,
    pub rules: Vec<RuleDoc>,
    pub premises: Vec<String>,
}

impl From<&ArgumentView> for ArgumentDoc {
    fn from(a: &ArgumentView) -> Self {
        ArgumentDoc {
            rule: a.top_label().to_string(),
            conclusion: a.conclusion.to_string(),
            rules: a.rules.iter().map(RuleDoc::from).collect(),
            premises: texts(&a.premises),
        }
    }
}

/// A priority chain, or the string `undecided`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DecidedBy {
    Chain(Vec<String>),
    Undecided(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConflictDoc {
    pub against: ArgumentDoc,
    pub at: String,
    pub at_rule: String,
    /// `argument` when the explained argument prevails, `counter` when the
    /// counter-argument does, `neither` when undecided.
    pub prevails: String,
    pub decided_by: DecidedBy,
}

impl From<&Counter> for ConflictDoc {
    fn from(c: &Counter) -> Self {
        let prevails = match c.outcome {
            Outcome::Repelled(_) => "argument",
            Outcome::Defeats(_) => "counter",
            Outcome::Undecided => "neither",
        };
        let decided_by = match c.outcome.chain() {
            Some(chain) => DecidedBy::Chain(chain.to_vec()),
            None => DecidedBy::Undecided("undecided".into()),
        };
        ConflictDoc {
            against: (&c.argument).into(),
            at: c.at.to_string(),
            at_rule: c.at_rule.clone(),
            prevails: prevails.into(),
            decided_by,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerDoc {
    pub assume: Vec<String>,
    pub status: String,
}

impl From<&AbductiveAnswer> for AnswerDoc {
    fn from(a: &AbductiveAnswer) -> Self {
        AnswerDoc {
            assume: texts(&a.delta),
            status: a.status.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExplanationDoc {
    pub goal: String,
    pub status: String,
    pub evidence: Vec<String>,
    pub winner: Option<ArgumentDoc>,
    pub conflicts: Vec<ConflictDoc>,
    pub pivotal: Vec<String>,
    pub hints_for: Option<String>,
    pub hints: Vec<AnswerDoc>,
}

impl From<&Explanation> for ExplanationDoc {
    fn from(e: &Explanation) -> Self {
        ExplanationDoc {
            goal: e.verdict.goal.to_string(),
            status: e.verdict.status.to_string(),
            evidence: texts(&e.evidence),
            winner: e.winner.as_ref().map(ArgumentDoc::from),
            conflicts: e.counters.iter().map(ConflictDoc::from).collect(),
            pivotal: texts(&e.pivotal),
            hints_for: e.hints_for.as_ref().map(ToString::to_string),
            hints: e.hints.iter().map(AnswerDoc::from).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorityDoc {
    pub label: String,
    pub higher: String,
    pub lower: String,
    pub when: Vec<String>,
    pub level: u32,
}

impl From<&PriorityRule> for PriorityDoc {
    fn from(p: &PriorityRule) -> Self {
        PriorityDoc {
            label: p.label.clone(),
            higher: p.higher.clone(),
            lower: p.lower.clone(),
            when: texts(&p.body),
            level: p.level,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnifierDoc {
    pub a: BTreeMap<String, String>,
    pub b: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResolutionDoc {
    pub decided: bool,
    pub winner: Option<String>,
    pub decided_by: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConflictReportDoc {
    pub rule_a: String,
    pub rule_b: String,
    pub head_a: String,
    pub head_b: String,
    pub unifier: UnifierDoc,
    pub witness: Vec<String>,
    pub resolution: ResolutionDoc,
    pub suggestion: Option<PriorityDoc>,
}

impl From<&ConflictReport> for ConflictReportDoc {
    fn from(r: &ConflictReport) -> Self {
        let resolution = match &r.resolution {
            Resolution::Decided { winner, chain } => ResolutionDoc {
                decided: true,
                winner: Some(winner.clone()),
                decided_by: chain.clone(),
            },
            Resolution::Unresolved => ResolutionDoc {
                decided: false,
                winner: None,
                decided_by: Vec::new(),
            },
        };
        ConflictReportDoc {
            rule_a: r.rule_a.clone(),
            rule_b: r.rule_b.clone(),
            head_a: r.head_a.to_string(),
            head_b: r.head_b.to_string(),
            unifier: UnifierDoc {
                a: r.bindings_a.clone().into_iter().collect(),
                b: r.bindings_b.clone().into_iter().collect(),
            },
            witness: texts(&r.witness),
            resolution,
            suggestion: r.suggestion.as_ref().map(PriorityDoc::from),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbductionDoc {
    pub goal: String,
    pub tier: String,
    pub answers: Vec<AnswerDoc>,
    pub explored: usize,
    pub truncated: bool,
}

impl AbductionDoc {
    pub fn new(goal: &Literal, tier: Tier, a: &Abduction) -> Self {
        AbductionDoc {
            goal: goal.to_string(),
            tier: tier.as_str().into(),
            answers: a.answers.iter().map(AnswerDoc::from).collect(),
            explored: a.explored,
            truncated: a.truncated,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosDoc {
    pub line: u32,
    pub col: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanDoc {
    pub file: String,
    pub start: PosDoc,
    pub end: PosDoc,
}

impl From<&SourceSpan> for SpanDoc {
    fn from(s: &SourceSpan) -> Self {
        SpanDoc {
            file: s.file.clone(),
            start: PosDoc {
                line: s.start.line,
                col: s.start.col,
            },
            end: PosDoc {
                line: s.end.line,
                col: s.end.col,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorDoc {
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub span: Option<SpanDoc>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub revision: Option<u64>,
}
