//! Finite ground instantiation of a theory over its constant domain.
//!
//! Every variable ranges over the whole domain unless its lowercased name
//! (trailing digits ignored) names a declared sort, in which case it ranges
//! over that sort. Sorts are first closed over argument positions: if a
//! sorted variable occurs at `geoloc/2#1`, every constant seen at that
//! position in facts, rules or hint literals joins the sort. This keeps the
//! pruning from ever dropping an instance whose body is derivable.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::kernel::{ArgumentRule, Literal, Subst, Term, Theory};

pub const DEFAULT_INSTANCE_CAP: usize = 200_000;

/// One instance of a schema rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundRule {
    /// Index of the schema in `Theory::rules`.
    pub schema: usize,
    pub label: String,
    pub subst: Subst,
    pub head: Literal,
    pub body: Vec<Literal>,
}

#[derive(Clone, Debug)]
pub struct GroundTheory {
    /// The source theory, facts included. Priorities stay schematic and are
    /// instantiated against each comparison context by the solver.
    pub theory: Theory,
    pub instances: Vec<GroundRule>,
    pub domain: BTreeSet<String>,
}

impl GroundTheory {
    pub fn facts(&self) -> &BTreeSet<Literal> {
        &self.theory.facts
    }

    /// Instances as a variable-free theory, labeled `label@n`.
    pub fn as_theory(&self) -> Theory {
        let mut t = Theory::new();
        t.facts = self.theory.facts.clone();
        t.incompatibilities = self.theory.incompatibilities.clone();
        t.domain = self.domain.clone();
        for (i, g) in self.instances.iter().enumerate() {
            t.rules.push(ArgumentRule {
                label: format!("{}@{i}", g.label),
                head: g.head.clone(),
                body: g.body.clone(),
                layer: self.theory.rules[g.schema].layer,
            });
        }
        t
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroundError {
    TooManyInstances { label: String, cap: usize },
}

impl fmt::Display for GroundError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundError::TooManyInstances { label, cap } => {
                write!(f, "grounding rule {label} exceeds the instance cap of {cap}")
            }
        }
    }
}

impl core::error::Error for GroundError {}

/// Sort a variable name refers to, if any.
pub fn sort_of<'a>(theory: &'a Theory, var: &str) -> Option<&'a str> {
    let lower = var.to_ascii_lowercase();
    let base = lower.trim_end_matches(|c: char| c.is_ascii_digit());
    theory
        .sorts
        .get_key_value(base)
        .or_else(|| theory.sorts.get_key_value(lower.as_str()))
        .map(|(k, _)| k.as_str())
}

type Position = (String, usize, usize);

fn position(l: &Literal, i: usize) -> Position {
    (l.predicate.clone(), l.arity(), i)
}

/// Sorts closed over positions, given extra literals whose constants
/// should be visible to sorted variables.
pub fn closed_sorts(theory: &Theory, hints: &[Literal]) -> BTreeMap<String, BTreeSet<String>> {
    let mut sorts = theory.sorts.clone();
    if sorts.is_empty() {
        return sorts;
    }
    let mut sort_positions: BTreeMap<String, BTreeSet<Position>> = BTreeMap::new();
    let mut pos_values: BTreeMap<Position, BTreeSet<String>> = BTreeMap::new();

    let mut visit = |l: &Literal, sort_positions: &mut BTreeMap<String, BTreeSet<Position>>| {
        for (i, t) in l.args.iter().enumerate() {
            match t {
                Term::Var(v) => {
                    if let Some(s) = sort_of(theory, v) {
                        sort_positions
                            .entry(s.to_string())
                            .or_default()
                            .insert(position(l, i));
                    }
                }
                Term::Const(c) => {
                    pos_values
                        .entry(position(l, i))
                        .or_default()
                        .insert(c.clone());
                }
            }
        }
    };
    for r in &theory.rules {
        for l in core::iter::once(&r.head).chain(&r.body) {
            visit(l, &mut sort_positions);
        }
    }
    for p in &theory.priorities {
        for l in &p.body {
            visit(l, &mut sort_positions);
        }
    }
    for l in theory.facts.iter().chain(hints) {
        visit(l, &mut sort_positions);
    }

    loop {
        let mut changed = false;
        for (sort, positions) in &sort_positions {
            for pos in positions {
                let from_pos: Vec<String> = pos_values
                    .get(pos)
                    .map(|s| s.iter().cloned().collect())
                    .unwrap_or_default();
                let members = sorts.entry(sort.clone()).or_default();
                for c in from_pos {
                    changed |= members.insert(c);
                }
                let snapshot: Vec<String> = members.iter().cloned().collect();
                let at = pos_values.entry(pos.clone()).or_default();
                for c in snapshot {
                    changed |= at.insert(c);
                }
            }
        }
        if !changed {
            break;
        }
    }
    sorts
}

/// Ground every rule of `theory` over `domain ∪ extra`.
pub fn ground(
    theory: &Theory,
    extra: &BTreeSet<String>,
    cap: usize,
) -> Result<GroundTheory, GroundError> {
    ground_with_hints(theory, extra, &[], cap)
}

/// As [`ground`], with `hints` feeding the sort closure (query goals,
/// evidence not yet asserted).
pub fn ground_with_hints(
    theory: &Theory,
    extra: &BTreeSet<String>,
    hints: &[Literal],
    cap: usize,
) -> Result<GroundTheory, GroundError> {
    let mut theory = theory.clone();
    theory.extend_domain();
    let mut domain = theory.domain.clone();
    domain.extend(extra.iter().cloned());
    for h in hints {
        domain.extend(h.constants().map(ToString::to_string));
    }
    let sorts = closed_sorts(&theory, hints);

    let mut order: Vec<usize> = (0..theory.rules.len()).collect();
    order.sort_by(|a, b| theory.rules[*a].label.cmp(&theory.rules[*b].label));

    let mut instances = Vec::new();
    for schema in order {
        let rule = &theory.rules[schema];
        let vars: Vec<&str> = rule.vars().into_iter().collect();
        let ranges: Vec<Vec<&String>> = vars
            .iter()
            .map(|v| match sort_of(&theory, v).and_then(|s| sorts.get(s)) {
                Some(members) => members.iter().collect(),
                None => domain.iter().collect(),
            })
            .collect();
        let count = ranges
            .iter()
            .try_fold(1usize, |acc, r| acc.checked_mul(r.len()))
            .unwrap_or(usize::MAX);
        if count.saturating_add(instances.len()) > cap {
            return Err(GroundError::TooManyInstances {
                label: rule.label.clone(),
                cap,
            });
        }
        if count == 0 {
            continue;
        }
        let mut idx = alloc::vec![0usize; vars.len()];
        loop {
            let subst: Subst = vars
                .iter()
                .zip(&idx)
                .zip(&ranges)
                .map(|((v, i), r)| (v.to_string(), r[*i].clone()))
                .collect();
            instances.push(GroundRule {
                schema,
                label: rule.label.clone(),
                head: rule.head.apply(&subst),
                body: rule.body.iter().map(|b| b.apply(&subst)).collect(),
                subst,
            });
            // odometer, rightmost variable fastest
            let mut k = vars.len();
            let exhausted = loop {
                if k == 0 {
                    break true;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < ranges[k].len() {
                    break false;
                }
                idx[k] = 0;
            };
            if exhausted {
                break;
            }
        }
    }

    Ok(GroundTheory {
        theory,
        instances,
        domain,
    })
}

/// Extend each partial binding by matching `lit` against `known`.
fn join(bindings: Vec<Subst>, lit: &Literal, known: &BTreeMap<(&str, bool, usize), Vec<&Literal>>) -> Vec<Subst> {
    let Some(cands) = known.get(&(lit.predicate.as_str(), lit.negated, lit.arity())) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for b in bindings {
        let pattern = lit.apply(&b);
        for c in cands {
            let mut s = b.clone();
            if pattern.match_ground(c, &mut s) {
                out.push(s);
            }
        }
    }
    out
}

/// Only the instances whose bodies are derivable from the facts, found
/// bottom-up by joining rule bodies against what has been derived so far.
/// Head variables left unbound by the body range over their sort (or the
/// domain) as in [`ground_with_hints`]. Every argument of the full
/// grounding is built from these instances alone, so the solver uses this
/// form; the cap counts the instances kept.
pub fn ground_derivable(
    theory: &Theory,
    extra: &BTreeSet<String>,
    hints: &[Literal],
    cap: usize,
) -> Result<GroundTheory, GroundError> {
    let mut theory = theory.clone();
    theory.extend_domain();
    let mut domain = theory.domain.clone();
    domain.extend(extra.iter().cloned());
    for h in hints {
        domain.extend(h.constants().map(ToString::to_string));
    }
    let sorts = closed_sorts(&theory, hints);
    let range = |var: &str| -> Vec<&String> {
        match sort_of(&theory, var).and_then(|s| sorts.get(s)) {
            Some(members) => members.iter().collect(),
            None => domain.iter().collect(),
        }
    };

    let mut order: Vec<usize> = (0..theory.rules.len()).collect();
    order.sort_by(|a, b| theory.rules[*a].label.cmp(&theory.rules[*b].label));

    let mut derived: BTreeSet<Literal> = theory.facts.clone();
    let mut seen: BTreeSet<(usize, Subst)> = BTreeSet::new();
    let mut instances = Vec::new();
    loop {
        let mut known: BTreeMap<(&str, bool, usize), Vec<&Literal>> = BTreeMap::new();
        for l in &derived {
            known
                .entry((l.predicate.as_str(), l.negated, l.arity()))
                .or_default()
                .push(l);
        }
        let mut fresh: Vec<GroundRule> = Vec::new();
        for &schema in &order {
            let rule = &theory.rules[schema];
            let mut bindings = alloc::vec![Subst::new()];
            for b in &rule.body {
                bindings = join(bindings, b, &known);
                if bindings.is_empty() {
                    break;
                }
            }
            for b in bindings {
                let unbound: Vec<&str> = rule
                    .vars()
                    .into_iter()
                    .filter(|v| !b.contains_key(*v))
                    .collect();
                let ranges: Vec<Vec<&String>> = unbound.iter().map(|v| range(v)).collect();
                if ranges.iter().any(Vec::is_empty) {
                    continue;
                }
                let mut idx = alloc::vec![0usize; unbound.len()];
                loop {
                    let mut subst = b.clone();
                    for ((v, i), r) in unbound.iter().zip(&idx).zip(&ranges) {
                        subst.insert(v.to_string(), r[*i].clone());
                    }
                    let in_sort = subst.iter().all(|(v, c)| match sort_of(&theory, v) {
                        Some(s) => sorts.get(s).is_none_or(|m| m.contains(c)),
                        None => true,
                    });
                    if in_sort && !seen.contains(&(schema, subst.clone())) {
                        if seen.len() >= cap {
                            return Err(GroundError::TooManyInstances {
                                label: rule.label.clone(),
                                cap,
                            });
                        }
                        seen.insert((schema, subst.clone()));
                        fresh.push(GroundRule {
                            schema,
                            label: rule.label.clone(),
                            head: rule.head.apply(&subst),
                            body: rule.body.iter().map(|l| l.apply(&subst)).collect(),
                            subst,
                        });
                    }
                    let mut k = idx.len();
                    let exhausted = loop {
                        if k == 0 {
                            break true;
                        }
                        k -= 1;
                        idx[k] += 1;
                        if idx[k] < ranges[k].len() {
                            break false;
                        }
                        idx[k] = 0;
                    };
                    if exhausted {
                        break;
                    }
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        for g in &fresh {
            derived.insert(g.head.clone());
        }
        instances.extend(fresh);
    }
    instances.sort_by(|a, b| (&a.label, &a.subst).cmp(&(&b.label, &b.subst)));

    Ok(GroundTheory {
        theory,
        instances,
        domain,
    })
}
