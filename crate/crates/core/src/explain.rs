//! Justifications for verdicts: the argument that carries (or fails to
//! carry) the goal, every argument attacking it and the priorities that
//! settled each clash.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::abduction::{abduce, AbductiveAnswer, Tier, DEFAULT_CANDIDATE_CAP};
use crate::kernel::{Literal, Theory};
use crate::solver::{Analysis, Argument, Config, Preference, SolveError, Status, Verdict};

/// A ground rule instance used by an argument.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleUse {
    pub label: String,
    pub head: Literal,
    pub body: Vec<Literal>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArgumentView {
    pub conclusion: Literal,
    /// The top rule first, the rest by label. Empty for a bare fact.
    pub rules: Vec<RuleUse>,
    pub premises: Vec<Literal>,
}

impl ArgumentView {
    /// Label of the top rule, or `fact`.
    pub fn top_label(&self) -> &str {
        self.rules.first().map_or("fact", |r| r.label.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// The explained argument is stronger at the conflict point.
    Repelled(Vec<String>),
    /// The counter-argument is stronger.
    Defeats(Vec<String>),
    Undecided,
}

impl Outcome {
    pub fn chain(&self) -> Option<&[String]> {
        match self {
            Outcome::Repelled(c) | Outcome::Defeats(c) => Some(c),
            Outcome::Undecided => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counter {
    pub argument: ArgumentView,
    /// Sub-conclusion of the explained argument under attack.
    pub at: Literal,
    /// Label of the explained argument's rule concluding `at`, or `fact`.
    pub at_rule: String,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Explanation {
    pub verdict: Verdict,
    pub evidence: Vec<Literal>,
    /// The accepted argument, or the strongest rejected attempt. `None`
    /// when nothing concludes the goal.
    pub winner: Option<ArgumentView>,
    pub counters: Vec<Counter>,
    /// Premises that tip the outcome: for a rejected goal those of the
    /// counters that the attempt lacks, otherwise the winner's premises no
    /// counter shares.
    pub pivotal: Vec<Literal>,
    /// The literal the hints would make sceptically accepted: the
    /// complement of an accepted goal, the goal itself otherwise.
    pub hints_for: Option<Literal>,
    pub hints: Vec<AbductiveAnswer>,
}

fn view(an: &Analysis, arg: &Argument) -> ArgumentView {
    let gt = &an.ground;
    let use_of = |i: usize| {
        let g = &gt.instances[i];
        RuleUse {
            label: g.label.clone(),
            head: g.head.clone(),
            body: g.body.clone(),
        }
    };
    let mut rest: Vec<RuleUse> = arg
        .support
        .iter()
        .filter(|i| Some(**i) != arg.top)
        .map(|i| use_of(*i))
        .collect();
    rest.sort_by(|a, b| (&a.label, &a.head).cmp(&(&b.label, &b.head)));
    let mut rules: Vec<RuleUse> = arg.top.map(use_of).into_iter().collect();
    rules.extend(rest);
    ArgumentView {
        conclusion: arg.conclusion.clone(),
        rules,
        premises: arg.premises.iter().cloned().collect(),
    }
}

/// Deterministic choice among `candidates`: fewest defeaters, then
/// smallest support, then sorted rule labels.
fn pick(an: &Analysis, candidates: &[usize]) -> Option<usize> {
    candidates.iter().copied().min_by(|&x, &y| {
        let key = |i: usize| {
            let a = &an.arguments()[i];
            (an.defeaters[i].len(), a.support.len(), a.labels(&an.ground))
        };
        key(x).cmp(&key(y)).then(x.cmp(&y))
    })
}

/// Explain `verdict` using an existing analysis. Hints are left empty.
pub fn explain_in(an: &Analysis, verdict: Verdict, evidence: &[Literal]) -> Explanation {
    let candidates = if verdict.status.is_accepted() {
        verdict.witnesses.clone()
    } else {
        an.arguments_for(&verdict.goal)
    };
    let mut evidence: Vec<Literal> = evidence.to_vec();
    evidence.sort();
    evidence.dedup();
    let Some(w) = pick(an, &candidates) else {
        return Explanation {
            verdict,
            evidence,
            winner: None,
            counters: Vec::new(),
            pivotal: Vec::new(),
            hints_for: None,
            hints: Vec::new(),
        };
    };
    let warg = &an.arguments()[w];
    let winner = view(an, warg);

    let mut counters = Vec::new();
    for att in an.graph.attacks_on(w) {
        let attacker = &an.arguments()[att.attacker];
        let at_rule = match warg.justification.get(&att.at).copied().flatten() {
            Some(i) => an.ground.instances[i].label.clone(),
            None => String::from("fact"),
        };
        let outcome = match att.outcome.preference {
            Preference::First => Outcome::Defeats(att.outcome.chain.clone()),
            Preference::Second => Outcome::Repelled(att.outcome.chain.clone()),
            Preference::Undecided => Outcome::Undecided,
        };
        counters.push(Counter {
            argument: view(an, attacker),
            at: att.at.clone(),
            at_rule,
            outcome,
        });
    }

    let own: BTreeSet<&Literal> = winner.premises.iter().collect();
    let pivotal: BTreeSet<Literal> = if verdict.status.is_accepted() {
        let theirs: BTreeSet<&Literal> = counters
            .iter()
            .flat_map(|c| c.argument.premises.iter())
            .collect();
        own.difference(&theirs).map(|l| (*l).clone()).collect()
    } else {
        counters
            .iter()
            .filter(|c| !matches!(c.outcome, Outcome::Repelled(_)))
            .flat_map(|c| c.argument.premises.iter())
            .filter(|l| !own.contains(l))
            .cloned()
            .collect()
    };

    Explanation {
        verdict,
        evidence,
        winner: Some(winner),
        counters,
        pivotal: pivotal.into_iter().collect(),
        hints_for: None,
        hints: Vec::new(),
    }
}

/// Query `goal` (ground) and explain the result. With `hint_size > 0`,
/// attaches minimal abducible assumption sets of at most that size which
/// would make the opposite verdict sceptical.
pub fn explain_verdict(
    theory: &Theory,
    evidence: &[Literal],
    goal: &Literal,
    config: Config,
    hint_size: usize,
) -> Result<Explanation, SolveError> {
    let an = Analysis::new(theory, evidence, core::slice::from_ref(goal), config)?;
    let verdict = an.verdict(goal)?;
    let mut e = explain_in(&an, verdict, evidence);
    if hint_size > 0 {
        let target = if e.verdict.status == Status::AcceptedSceptically {
            goal.complement()
        } else {
            goal.clone()
        };
        let found = abduce(
            theory,
            evidence,
            &target,
            Tier::Sceptical,
            hint_size,
            config,
            DEFAULT_CANDIDATE_CAP,
        )?;
        e.hints = found
            .answers
            .into_iter()
            .filter(|a| !a.delta.is_empty())
            .collect();
        e.hints_for = Some(target);
    }
    Ok(e)
}

fn join(out: &mut String, lits: &[Literal]) {
    for (i, l) in lits.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{l}");
    }
}

fn chain_text(chain: &[String]) -> String {
    if chain.is_empty() {
        String::from("strict premise")
    } else {
        chain.join(", ")
    }
}

/// Plain-text report. Every decided conflict yields exactly one line with
/// the word `defeats`.
pub fn render_text(e: &Explanation) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "goal: {}", e.verdict.goal);
    let _ = writeln!(out, "status: {}", e.verdict.status);
    if !e.evidence.is_empty() {
        out.push_str("evidence: ");
        join(&mut out, &e.evidence);
        out.push('\n');
    }
    let Some(w) = &e.winner else {
        let _ = writeln!(out, "no rule concludes {}", e.verdict.goal);
        return out;
    };
    let heading = if e.verdict.status.is_accepted() {
        "argument"
    } else {
        "strongest attempt"
    };
    let _ = writeln!(out, "{heading}: {}", w.conclusion);
    if w.rules.is_empty() {
        let _ = writeln!(out, "  given as a fact");
    }
    for r in &w.rules {
        let _ = write!(out, "  {}: {}", r.label, r.head);
        if !r.body.is_empty() {
            out.push_str(" <- ");
            join(&mut out, &r.body);
        }
        out.push('\n');
    }
    if !w.premises.is_empty() {
        out.push_str("  premises: ");
        join(&mut out, &w.premises);
        out.push('\n');
    }
    if !e.counters.is_empty() {
        out.push_str("conflicts:\n");
    }
    for c in &e.counters {
        let them = c.argument.top_label();
        let concl = &c.argument.conclusion;
        let _ = match &c.outcome {
            Outcome::Defeats(chain) => writeln!(
                out,
                "  {them} [{concl}] defeats {} at {}, decided by {}",
                c.at_rule,
                c.at,
                chain_text(chain)
            ),
            Outcome::Repelled(chain) => writeln!(
                out,
                "  {} defeats {them} [{concl}] at {}, decided by {}",
                c.at_rule,
                c.at,
                chain_text(chain)
            ),
            Outcome::Undecided => writeln!(
                out,
                "  {them} [{concl}] and {} clash at {}, undecided",
                c.at_rule, c.at
            ),
        };
    }
    if !e.pivotal.is_empty() {
        out.push_str("pivotal: ");
        join(&mut out, &e.pivotal);
        out.push('\n');
    }
    if let Some(target) = &e.hints_for {
        if e.hints.is_empty() {
            let _ = writeln!(out, "no assumptions found for {target}");
        } else {
            let _ = writeln!(out, "assumptions for {target}:");
        }
        for h in &e.hints {
            out.push_str("  assume ");
            join(&mut out, &h.delta);
            out.push('\n');
        }
    }
    out
}
