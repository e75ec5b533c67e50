//! Core vocabulary: terms, literals, rules, priorities and theories.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Variable bindings, always variable name to constant.
pub type Subst = BTreeMap<String, String>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(String),
    Var(String),
}

impl Term {
    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Const(n) | Term::Var(n) => n,
        }
    }

    pub fn apply(&self, subst: &Subst) -> Term {
        match self {
            Term::Var(v) => match subst.get(v) {
                Some(c) => Term::Const(c.clone()),
                None => self.clone(),
            },
            Term::Const(_) => self.clone(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A predicate applied to terms, optionally under explicit negation.
///
/// Negation here is strong negation: `neg p(a)` holds only when asserted or
/// derived, never by failure to derive `p(a)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub predicate: String,
    pub args: Vec<Term>,
    pub negated: bool,
}

impl Literal {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Literal {
            predicate: predicate.into(),
            args,
            negated: false,
        }
    }

    /// Ground positive literal from constant names.
    pub fn ground(predicate: &str, args: &[&str]) -> Self {
        Literal::new(predicate, args.iter().map(|a| Term::constant(*a)).collect())
    }

    pub fn negate(mut self) -> Self {
        self.negated = !self.negated;
        self
    }

    pub fn complement(&self) -> Literal {
        self.clone().negate()
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }

    pub fn constants(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Const(c) => Some(c.as_str()),
            Term::Var(_) => None,
        })
    }

    pub fn apply(&self, subst: &Subst) -> Literal {
        Literal {
            predicate: self.predicate.clone(),
            args: self.args.iter().map(|t| t.apply(subst)).collect(),
            negated: self.negated,
        }
    }

    /// One-way match of this pattern against a ground literal, extending
    /// `subst`. On failure `subst` is left untouched.
    pub fn match_ground(&self, ground: &Literal, subst: &mut Subst) -> bool {
        if self.predicate != ground.predicate
            || self.negated != ground.negated
            || self.args.len() != ground.args.len()
        {
            return false;
        }
        let mut added: Vec<String> = Vec::new();
        for (p, g) in self.args.iter().zip(&ground.args) {
            let g = g.name();
            let ok = match p {
                Term::Const(c) => c == g,
                Term::Var(v) => match subst.get(v) {
                    Some(bound) => bound == g,
                    None => {
                        subst.insert(v.clone(), g.to_string());
                        added.push(v.clone());
                        true
                    }
                },
            };
            if !ok {
                for v in added {
                    subst.remove(&v);
                }
                return false;
            }
        }
        true
    }

    pub fn signature(&self) -> (&str, usize) {
        (&self.predicate, self.args.len())
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("neg ")?;
        }
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Evidence layer of the three-layer attribution model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Layer {
    Tactical,
    Operational,
    Strategic,
}

impl Layer {
    pub fn as_str(self) -> &'static str {
        match self {
            Layer::Tactical => "tactical",
            Layer::Operational => "operational",
            Layer::Strategic => "strategic",
        }
    }

    pub fn parse(s: &str) -> Option<Layer> {
        match s {
            "tactical" => Some(Layer::Tactical),
            "operational" => Some(Layer::Operational),
            "strategic" => Some(Layer::Strategic),
            _ => None,
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArgumentRule {
    pub label: String,
    pub head: Literal,
    pub body: Vec<Literal>,
    pub layer: Option<Layer>,
}

impl ArgumentRule {
    pub fn new(label: impl Into<String>, head: Literal, body: Vec<Literal>) -> Self {
        ArgumentRule {
            label: label.into(),
            head,
            body,
            layer: None,
        }
    }

    pub fn vars(&self) -> BTreeSet<&str> {
        core::iter::once(&self.head)
            .chain(&self.body)
            .flat_map(|l| l.vars())
            .collect()
    }
}

/// `label: higher > lower when body`. Level 1 ranks argument rules, level
/// `k` ranks level `k-1` priority rules.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PriorityRule {
    pub label: String,
    pub higher: String,
    pub lower: String,
    pub body: Vec<Literal>,
    pub level: u32,
}

impl PriorityRule {
    pub fn new(
        label: impl Into<String>,
        higher: impl Into<String>,
        lower: impl Into<String>,
        body: Vec<Literal>,
        level: u32,
    ) -> Self {
        PriorityRule {
            label: label.into(),
            higher: higher.into(),
            lower: lower.into(),
            body,
            level,
        }
    }
}

/// Two literal patterns that may not hold together. Variables are shared
/// between the sides, so `access(D,U,permitted) ~ access(D,U,denied)` only
/// relates literals about the same `D` and `U`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IncompatibilityDecl {
    pub left: Literal,
    pub right: Literal,
}

impl IncompatibilityDecl {
    fn matches(&self, a: &Literal, b: &Literal) -> bool {
        let mut s = Subst::new();
        if self.left.match_ground(a, &mut s) && self.right.match_ground(b, &mut s) {
            return true;
        }
        let mut s = Subst::new();
        self.right.match_ground(a, &mut s) && self.left.match_ground(b, &mut s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Abducible {
    pub predicate: String,
    pub arity: usize,
    pub negated: bool,
}

impl Abducible {
    pub fn admits(&self, lit: &Literal) -> bool {
        lit.predicate == self.predicate && lit.arity() == self.arity && lit.negated == self.negated
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Theory {
    pub facts: BTreeSet<Literal>,
    pub rules: Vec<ArgumentRule>,
    pub priorities: Vec<PriorityRule>,
    pub incompatibilities: Vec<IncompatibilityDecl>,
    pub abducibles: BTreeSet<Abducible>,
    /// Named constant sorts. A variable whose lowercased name equals a sort
    /// name ranges over that sort during grounding.
    pub sorts: BTreeMap<String, BTreeSet<String>>,
    pub domain: BTreeSet<String>,
}

impl Theory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Re-collect every constant mentioned anywhere into `domain`.
    pub fn extend_domain(&mut self) {
        let mut found: BTreeSet<String> = BTreeSet::new();
        let mut take = |l: &Literal| {
            for c in l.constants() {
                found.insert(c.to_string());
            }
        };
        self.facts.iter().for_each(&mut take);
        for r in &self.rules {
            take(&r.head);
            r.body.iter().for_each(&mut take);
        }
        for p in &self.priorities {
            p.body.iter().for_each(&mut take);
        }
        for d in &self.incompatibilities {
            take(&d.left);
            take(&d.right);
        }
        for s in self.sorts.values() {
            found.extend(s.iter().cloned());
        }
        self.domain.extend(found);
    }

    pub fn rule(&self, label: &str) -> Option<&ArgumentRule> {
        self.rules.iter().find(|r| r.label == label)
    }

    pub fn priority(&self, label: &str) -> Option<&PriorityRule> {
        self.priorities.iter().find(|p| p.label == label)
    }

    /// 0 for argument rules, the priority level otherwise.
    pub fn label_level(&self, label: &str) -> Option<u32> {
        if self.rule(label).is_some() {
            Some(0)
        } else {
            self.priority(label).map(|p| p.level)
        }
    }

    pub fn max_level(&self) -> u32 {
        self.priorities.iter().map(|p| p.level).max().unwrap_or(0)
    }

    /// True iff `b` is the complement of `a` or the pair matches a declared
    /// incompatibility. A literal is never incompatible with itself.
    pub fn incompatible(&self, a: &Literal, b: &Literal) -> bool {
        if a == b {
            return false;
        }
        if a.predicate == b.predicate && a.args == b.args && a.negated != b.negated {
            return true;
        }
        self.incompatibilities.iter().any(|d| d.matches(a, b))
    }

    /// Adds a fact, rejecting it if it contradicts an existing one.
    pub fn add_fact(&mut self, fact: Literal) -> Result<(), KernelError> {
        if !fact.is_ground() {
            return Err(KernelError::NonGroundFact(fact.to_string()));
        }
        if let Some(other) = self.facts.iter().find(|f| self.incompatible(f, &fact)) {
            return Err(KernelError::Contradiction(other.to_string(), fact.to_string()));
        }
        for c in fact.constants() {
            self.domain.insert(c.to_string());
        }
        self.facts.insert(fact);
        Ok(())
    }

    /// Appends a priority rule after checking its label and references.
    pub fn add_priority(&mut self, priority: PriorityRule) -> Result<(), KernelError> {
        if self.label_level(&priority.label).is_some() {
            return Err(KernelError::DuplicateLabel(priority.label));
        }
        if priority.higher == priority.lower {
            return Err(KernelError::Irreflexive(priority.label));
        }
        for target in [&priority.higher, &priority.lower] {
            match self.label_level(target) {
                None => return Err(KernelError::DanglingLabel(target.clone())),
                Some(l) if l + 1 != priority.level => {
                    return Err(KernelError::LevelMismatch(priority.label.clone()))
                }
                Some(_) => {}
            }
        }
        self.priorities.push(priority);
        self.extend_domain();
        Ok(())
    }

    /// Level a new priority over `higher` and `lower` would get, if both
    /// labels exist and share a level.
    pub fn infer_level(&self, higher: &str, lower: &str) -> Result<u32, KernelError> {
        let h = self
            .label_level(higher)
            .ok_or_else(|| KernelError::DanglingLabel(higher.to_string()))?;
        let l = self
            .label_level(lower)
            .ok_or_else(|| KernelError::DanglingLabel(lower.to_string()))?;
        if h != l {
            return Err(KernelError::LevelMismatch(format!("{higher} > {lower}")));
        }
        Ok(h + 1)
    }

    /// Every violated invariant, one diagnostic each. Empty means valid.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let labels = self
            .rules
            .iter()
            .map(|r| r.label.as_str())
            .chain(self.priorities.iter().map(|p| p.label.as_str()));
        for label in labels {
            if label.is_empty() {
                out.push(Diagnostic::new(None, "empty label"));
            } else if !seen.insert(label) {
                out.push(Diagnostic::new(Some(label), format!("duplicate label {label}")));
            }
        }

        for p in &self.priorities {
            let label = Some(p.label.as_str());
            if p.higher == p.lower {
                out.push(Diagnostic::new(label, "irreflexivity violated"));
            }
            if p.level == 0 {
                out.push(Diagnostic::new(label, "priority level must be positive"));
            }
            for target in [&p.higher, &p.lower] {
                match self.label_level(target) {
                    None => out.push(Diagnostic::new(label, format!("unknown label {target}"))),
                    Some(l) if l + 1 != p.level => out.push(Diagnostic::new(
                        label,
                        format!(
                            "level {} priority references {target} at level {l}",
                            p.level
                        ),
                    )),
                    Some(_) => {}
                }
            }
        }

        for f in &self.facts {
            if !f.is_ground() {
                out.push(Diagnostic::new(None, format!("fact {f} contains variables")));
            }
        }
        let facts: Vec<&Literal> = self.facts.iter().collect();
        for (i, a) in facts.iter().enumerate() {
            for b in &facts[i + 1..] {
                if self.incompatible(a, b) {
                    out.push(Diagnostic::new(None, format!("contradictory facts {a} and {b}")));
                }
            }
        }

        let mut arity: BTreeMap<String, usize> = BTreeMap::new();
        let mut check_arity = |l: &Literal, owner: Option<&str>, out: &mut Vec<Diagnostic>| {
            match arity.get(&l.predicate) {
                Some(n) if *n != l.arity() => out.push(Diagnostic::new(
                    owner,
                    format!(
                        "predicate {} used with arity {} but declared with arity {n}",
                        l.predicate,
                        l.arity()
                    ),
                )),
                Some(_) => {}
                None => {
                    arity.insert(l.predicate.clone(), l.arity());
                }
            }
        };
        for f in &self.facts {
            check_arity(f, None, &mut out);
        }
        for r in &self.rules {
            check_arity(&r.head, Some(&r.label), &mut out);
            for b in &r.body {
                check_arity(b, Some(&r.label), &mut out);
            }
        }
        for p in &self.priorities {
            for b in &p.body {
                check_arity(b, Some(&p.label), &mut out);
            }
        }
        for d in &self.incompatibilities {
            check_arity(&d.left, None, &mut out);
            check_arity(&d.right, None, &mut out);
        }

        for r in &self.rules {
            for l in core::iter::once(&r.head).chain(&r.body) {
                for c in l.constants() {
                    if !self.domain.contains(c) {
                        out.push(Diagnostic::new(
                            Some(&r.label),
                            format!("constant {c} missing from domain"),
                        ));
                    }
                }
            }
        }
        for f in &self.facts {
            for c in f.constants() {
                if !self.domain.contains(c) {
                    out.push(Diagnostic::new(None, format!("constant {c} missing from domain")));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    pub label: Option<String>,
    pub message: String,
}

impl Diagnostic {
    pub fn new(label: Option<&str>, message: impl Into<String>) -> Self {
        Diagnostic {
            label: label.map(ToString::to_string),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Some(l) => write!(f, "{l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelError {
    DuplicateLabel(String),
    DanglingLabel(String),
    Irreflexive(String),
    LevelMismatch(String),
    NonGroundFact(String),
    Contradiction(String, String),
}

impl fmt::Display for KernelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelError::DuplicateLabel(l) => write!(f, "duplicate label {l}"),
            KernelError::DanglingLabel(l) => write!(f, "unknown label {l}"),
            KernelError::Irreflexive(l) => write!(f, "{l}: irreflexivity violated"),
            KernelError::LevelMismatch(l) => write!(f, "{l}: priority levels do not line up"),
            KernelError::NonGroundFact(l) => write!(f, "fact {l} contains variables"),
            KernelError::Contradiction(a, b) => write!(f, "{b} contradicts {a}"),
        }
    }
}

impl core::error::Error for KernelError {}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn lit(p: &str, args: &[&str]) -> Literal {
        Literal::new(
            p,
            args.iter()
                .map(|a| {
                    if a.starts_with(|c: char| c.is_ascii_uppercase()) {
                        Term::var(*a)
                    } else {
                        Term::constant(*a)
                    }
                })
                .collect(),
        )
    }

    fn ehealth_decl() -> Theory {
        let mut t = Theory::new();
        t.incompatibilities.push(IncompatibilityDecl {
            left: lit("access", &["D", "U", "permitted"]),
            right: lit("access", &["D", "U", "denied"]),
        });
        t
    }

    #[test]
    fn complement_is_an_involution() {
        let l = lit("perform", &["a", "c1"]);
        assert!(l.complement().negated);
        assert_eq!(l.complement().complement(), l);
        assert_eq!(l.complement().to_string(), "neg perform(a,c1)");
    }

    #[test]
    fn declared_contraries() {
        let t = ehealth_decl();
        let p = lit("access", &["x", "d", "permitted"]);
        let d = lit("access", &["x", "d", "denied"]);
        let other = lit("access", &["y", "d", "denied"]);
        assert!(t.incompatible(&p, &d));
        assert!(t.incompatible(&d, &p));
        assert!(!t.incompatible(&p, &other));
        assert!(!t.incompatible(&p, &p));
        let q = lit("perform", &["a", "c1"]);
        assert!(t.incompatible(&q, &q.complement()));
        // complement alone never consults declarations
        assert_eq!(p.complement().predicate, "access");
        assert!(p.complement().negated);
    }

    #[test]
    fn duplicate_and_reflexive_labels() {
        let mut t = Theory::new();
        t.rules.push(ArgumentRule::new("a1", lit("p", &["X"]), vec![]));
        t.rules.push(ArgumentRule::new("a1", lit("q", &["X"]), vec![]));
        t.rules.push(ArgumentRule::new("a2", lit("q", &["X"]), vec![]));
        t.priorities.push(PriorityRule::new("b1", "a2", "a2", vec![], 1));
        let d = t.validate();
        assert!(d.iter().any(|d| d.message == "duplicate label a1"));
        assert!(d.iter().any(|d| d.message == "irreflexivity violated"));
        assert_eq!(d, t.validate());
    }

    #[test]
    fn level_and_reference_checks() {
        let mut t = Theory::new();
        t.rules.push(ArgumentRule::new("a1", lit("p", &[]), vec![]));
        t.rules.push(ArgumentRule::new("a2", lit("p", &[]).negate(), vec![]));
        t.priorities.push(PriorityRule::new("b1", "a1", "a2", vec![], 2));
        t.priorities.push(PriorityRule::new("b2", "a1", "zz", vec![], 1));
        let d = t.validate();
        assert!(d.iter().any(|d| d.message.contains("level 2 priority references a1")));
        assert!(d.iter().any(|d| d.message == "unknown label zz"));
    }

    #[test]
    fn contradictory_facts_and_arity() {
        let mut t = Theory::new();
        t.facts.insert(lit("p", &["a"]));
        t.facts.insert(lit("p", &["a"]).negate());
        t.facts.insert(lit("p", &["a", "b"]));
        t.extend_domain();
        let d = t.validate();
        assert!(d.iter().any(|d| d.message.starts_with("contradictory facts")));
        assert!(d.iter().any(|d| d.message.contains("arity")));
    }

    #[test]
    fn add_fact_rejects_contradiction() {
        let mut t = ehealth_decl();
        t.add_fact(lit("access", &["x", "d", "permitted"])).unwrap();
        assert!(matches!(
            t.add_fact(lit("access", &["x", "d", "denied"])),
            Err(KernelError::Contradiction(..))
        ));
        assert!(t.domain.contains("x"));
    }

    #[test]
    fn add_priority_checks() {
        let mut t = Theory::new();
        t.rules.push(ArgumentRule::new("a1", lit("p", &[]), vec![]));
        t.rules.push(ArgumentRule::new("a2", lit("p", &[]).negate(), vec![]));
        assert_eq!(
            t.add_priority(PriorityRule::new("b1", "a1", "nope", vec![], 1)),
            Err(KernelError::DanglingLabel("nope".into()))
        );
        t.add_priority(PriorityRule::new("b1", "a1", "a2", vec![], 1)).unwrap();
        assert_eq!(
            t.add_priority(PriorityRule::new("b1", "a2", "a1", vec![], 1)),
            Err(KernelError::DuplicateLabel("b1".into()))
        );
        assert_eq!(t.infer_level("b1", "b1"), Ok(2));
    }
}
