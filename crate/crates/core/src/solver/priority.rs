//! Preference between two conflicting rule instances.
//!
//! Level-1 priority rules whose bodies hold in the comparison context decide
//! the pair. When level-1 rules point both ways, each is challenged by the
//! opposing ones through level-2 priorities, and so on upward. Whatever is
//! left standing on one side only wins; anything else is undecided.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::grounder::{GroundRule, GroundTheory};
use crate::kernel::{Literal, PriorityRule, Subst};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Preference {
    First,
    Second,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub preference: Preference,
    /// Priority labels that decided the outcome, lowest level first.
    pub chain: Vec<String>,
}

impl Comparison {
    fn undecided() -> Self {
        Comparison {
            preference: Preference::Undecided,
            chain: Vec::new(),
        }
    }
}

/// A priority rule instantiated for a concrete comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Applied<'t> {
    rule: &'t PriorityRule,
    binding: Subst,
}

/// Merge two bindings, failing if they disagree on a shared variable.
pub fn merge(a: &Subst, b: &Subst) -> Option<Subst> {
    let mut out = a.clone();
    for (k, v) in b {
        match out.get(k) {
            Some(existing) if existing != v => return None,
            Some(_) => {}
            None => {
                out.insert(k.clone(), v.clone());
            }
        }
    }
    Some(out)
}

/// All extensions of `init` under which every literal of `body` is in
/// `context`.
pub fn match_body(body: &[Literal], context: &BTreeSet<Literal>, init: &Subst) -> Vec<Subst> {
    let mut out = Vec::new();
    let mut s = init.clone();
    match_rec(body, context, &mut s, &mut out);
    out.sort();
    out.dedup();
    out
}

fn match_rec(body: &[Literal], context: &BTreeSet<Literal>, s: &mut Subst, out: &mut Vec<Subst>) {
    let Some((first, rest)) = body.split_first() else {
        out.push(s.clone());
        return;
    };
    let pattern = first.apply(s);
    if pattern.is_ground() {
        if context.contains(&pattern) {
            match_rec(rest, context, s, out);
        }
        return;
    }
    for cand in context {
        let mut ext = s.clone();
        if pattern.match_ground(cand, &mut ext) {
            match_rec(rest, context, &mut ext, out);
        }
    }
}

fn applicable<'t>(
    gt: &'t GroundTheory,
    level: u32,
    higher: &str,
    lower: &str,
    init: &Subst,
    context: &BTreeSet<Literal>,
) -> Vec<Applied<'t>> {
    let mut out = Vec::new();
    for p in &gt.theory.priorities {
        if p.level != level || p.higher != higher || p.lower != lower {
            continue;
        }
        for binding in match_body(&p.body, context, init) {
            out.push(Applied { rule: p, binding });
        }
    }
    out
}

/// Compare two rule instances; `None` stands for a fact, which is strict and
/// outranks every defeasible rule.
pub fn compare_instances(
    gt: &GroundTheory,
    first: Option<&GroundRule>,
    second: Option<&GroundRule>,
    context: &BTreeSet<Literal>,
) -> Comparison {
    let (a, b) = match (first, second) {
        (None, None) => return Comparison::undecided(),
        (None, Some(_)) => {
            return Comparison {
                preference: Preference::First,
                chain: Vec::new(),
            }
        }
        (Some(_), None) => {
            return Comparison {
                preference: Preference::Second,
                chain: Vec::new(),
            }
        }
        (Some(a), Some(b)) => (a, b),
    };
    let Some(init) = merge(&a.subst, &b.subst) else {
        return Comparison::undecided();
    };
    let for_a = applicable(gt, 1, &a.label, &b.label, &init, context);
    let for_b = applicable(gt, 1, &b.label, &a.label, &init, context);
    decide(gt, &for_a, &for_b, 1, context)
}

fn decide(
    gt: &GroundTheory,
    for_a: &[Applied<'_>],
    for_b: &[Applied<'_>],
    level: u32,
    context: &BTreeSet<Literal>,
) -> Comparison {
    match (for_a.is_empty(), for_b.is_empty()) {
        (true, true) => return Comparison::undecided(),
        (false, true) => {
            return Comparison {
                preference: Preference::First,
                chain: labels(for_a),
            }
        }
        (true, false) => {
            return Comparison {
                preference: Preference::Second,
                chain: labels(for_b),
            }
        }
        (false, false) => {}
    }

    let mut chain_a = Vec::new();
    let mut chain_b = Vec::new();
    let survivors_a: Vec<Applied<'_>> = for_a
        .iter()
        .filter(|x| {
            !for_b.iter().any(|y| match beats(gt, y, x, level, context) {
                Some(ch) => {
                    chain_b.extend(ch);
                    true
                }
                None => false,
            })
        })
        .cloned()
        .collect();
    let survivors_b: Vec<Applied<'_>> = for_b
        .iter()
        .filter(|y| {
            !for_a.iter().any(|x| match beats(gt, x, y, level, context) {
                Some(ch) => {
                    chain_a.extend(ch);
                    true
                }
                None => false,
            })
        })
        .cloned()
        .collect();

    match (survivors_a.is_empty(), survivors_b.is_empty()) {
        (false, true) => {
            let mut chain = labels(&survivors_a);
            push_unique(&mut chain, chain_a);
            Comparison {
                preference: Preference::First,
                chain,
            }
        }
        (true, false) => {
            let mut chain = labels(&survivors_b);
            push_unique(&mut chain, chain_b);
            Comparison {
                preference: Preference::Second,
                chain,
            }
        }
        _ => Comparison::undecided(),
    }
}

/// Chain of higher-level priorities by which `x` outranks `y`, if it does.
fn beats(
    gt: &GroundTheory,
    x: &Applied<'_>,
    y: &Applied<'_>,
    level: u32,
    context: &BTreeSet<Literal>,
) -> Option<Vec<String>> {
    let init = merge(&x.binding, &y.binding)?;
    let up = level + 1;
    let for_x = applicable(gt, up, &x.rule.label, &y.rule.label, &init, context);
    let for_y = applicable(gt, up, &y.rule.label, &x.rule.label, &init, context);
    let c = decide(gt, &for_x, &for_y, up, context);
    (c.preference == Preference::First).then_some(c.chain)
}

fn labels(applied: &[Applied<'_>]) -> Vec<String> {
    let mut out = Vec::new();
    for a in applied {
        if !out.contains(&a.rule.label) {
            out.push(a.rule.label.clone());
        }
    }
    out
}

fn push_unique(chain: &mut Vec<String>, more: Vec<String>) {
    for l in more {
        if !chain.contains(&l) {
            chain.push(l);
        }
    }
}
