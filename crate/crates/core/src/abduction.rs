//! Minimal abducible assumptions under which a goal becomes accepted.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::grounder::{closed_sorts, sort_of};
use crate::kernel::{Literal, Subst, Term, Theory};
use crate::solver::{Analysis, Config, SolveError, Status};

pub const DEFAULT_CANDIDATE_CAP: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tier {
    Sceptical,
    Credulous,
}

impl Tier {
    pub fn parse(s: &str) -> Option<Tier> {
        match s {
            "sceptical" | "skeptical" => Some(Tier::Sceptical),
            "credulous" => Some(Tier::Credulous),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Sceptical => "sceptical",
            Tier::Credulous => "credulous",
        }
    }

    pub fn admits(self, status: Status) -> bool {
        match self {
            Tier::Sceptical => status == Status::AcceptedSceptically,
            Tier::Credulous => status.is_accepted(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbductiveAnswer {
    /// Sorted assumptions.
    pub delta: Vec<Literal>,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Abduction {
    pub answers: Vec<AbductiveAnswer>,
    /// Candidate sets checked, the empty set included.
    pub explored: usize,
    /// The candidate cap stopped the search before `max_size` was exhausted.
    pub truncated: bool,
}

/// Every ground literal admitted by an abducible declaration over the
/// domain, consistent with `evidence` and the theory's facts, not already
/// asserted.
pub fn abducible_space(theory: &Theory, evidence: &[Literal], goal: &Literal) -> Vec<Literal> {
    let mut domain: BTreeSet<String> = theory.domain.clone();
    for l in evidence.iter().chain(core::iter::once(goal)) {
        domain.extend(l.constants().map(ToString::to_string));
    }
    let domain: Vec<String> = domain.into_iter().collect();
    let known: BTreeSet<&Literal> = theory.facts.iter().chain(evidence).collect();

    let mut out = Vec::new();
    for decl in &theory.abducibles {
        let mut idx = alloc::vec![0usize; decl.arity];
        if decl.arity > 0 && domain.is_empty() {
            continue;
        }
        loop {
            let args = idx.iter().map(|i| Term::constant(domain[*i].clone())).collect();
            let mut lit = Literal::new(decl.predicate.clone(), args);
            if decl.negated {
                lit = lit.negate();
            }
            if !known.contains(&lit) && !known.iter().any(|k| theory.incompatible(k, &lit)) {
                out.push(lit);
            }
            let mut k = idx.len();
            let exhausted = loop {
                if k == 0 {
                    break true;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < domain.len() {
                    break false;
                }
                idx[k] = 0;
            };
            if exhausted {
                break;
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Whether assuming `lit` can change any argument or comparison: it matches
/// a rule or priority body literal (respecting sorts), can contradict a
/// rule head, or is the goal itself.
fn relevant(theory: &Theory, sorts: &BTreeMap<String, BTreeSet<String>>, lit: &Literal, goal: &Literal) -> bool {
    if lit == goal {
        return true;
    }
    let sorted_match = |pattern: &Literal| {
        let mut s = Subst::new();
        pattern.match_ground(lit, &mut s)
            && s.iter().all(|(var, c)| match sort_of(theory, var) {
                Some(sort) => sorts.get(sort).is_some_and(|m| m.contains(c)),
                None => true,
            })
    };
    let bodies = theory
        .rules
        .iter()
        .flat_map(|r| r.body.iter())
        .chain(theory.priorities.iter().flat_map(|p| p.body.iter()));
    for b in bodies {
        if sorted_match(b) {
            return true;
        }
    }
    let complement = lit.complement();
    for r in &theory.rules {
        let mut s = Subst::new();
        if r.head.match_ground(&complement, &mut s) {
            return true;
        }
    }
    theory.incompatibilities.iter().any(|d| {
        let (mut s1, mut s2) = (Subst::new(), Subst::new());
        d.left.match_ground(lit, &mut s1) || d.right.match_ground(lit, &mut s2)
    })
}

/// The candidates the search actually branches on.
pub fn candidates(theory: &Theory, evidence: &[Literal], goal: &Literal) -> Vec<Literal> {
    let hints: Vec<Literal> = evidence.iter().cloned().chain([goal.clone()]).collect();
    let sorts = closed_sorts(theory, &hints);
    abducible_space(theory, evidence, goal)
        .into_iter()
        .filter(|l| relevant(theory, &sorts, l, goal))
        .collect()
}

fn status_with(
    theory: &Theory,
    evidence: &[Literal],
    delta: &[Literal],
    goal: &Literal,
    config: Config,
) -> Result<Status, SolveError> {
    let mut all: Vec<Literal> = evidence.to_vec();
    all.extend(delta.iter().cloned());
    let analysis = Analysis::new(theory, &all, core::slice::from_ref(goal), config)?;
    Ok(analysis.verdict(goal)?.status)
}

fn consistent(theory: &Theory, delta: &[Literal]) -> bool {
    delta
        .iter()
        .enumerate()
        .all(|(i, a)| delta[i + 1..].iter().all(|b| !theory.incompatible(a, b)))
}

/// Breadth-first search by delta size: every consistent, subset-minimal
/// delta of at most `max_size` assumptions under which `goal` reaches
/// `tier`, ordered by size then lexicographically.
pub fn abduce(
    theory: &Theory,
    evidence: &[Literal],
    goal: &Literal,
    tier: Tier,
    max_size: usize,
    config: Config,
    cap: usize,
) -> Result<Abduction, SolveError> {
    let status = status_with(theory, evidence, &[], goal, config)?;
    if tier.admits(status) {
        return Ok(Abduction {
            answers: alloc::vec![AbductiveAnswer {
                delta: Vec::new(),
                status
            }],
            explored: 1,
            truncated: false,
        });
    }
    let pool = candidates(theory, evidence, goal);
    let mut answers: Vec<AbductiveAnswer> = Vec::new();
    let mut explored = 1usize;

    for size in 1..=max_size.min(pool.len()) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let delta: Vec<Literal> = idx.iter().map(|i| pool[*i].clone()).collect();
            let covered = answers
                .iter()
                .any(|a| a.delta.iter().all(|l| delta.contains(l)));
            if !covered && consistent(theory, &delta) {
                if explored >= cap {
                    return Ok(Abduction {
                        answers,
                        explored,
                        truncated: true,
                    });
                }
                explored += 1;
                let status = status_with(theory, evidence, &delta, goal, config)?;
                if tier.admits(status) {
                    answers.push(AbductiveAnswer { delta, status });
                }
            }
            // next combination in lexicographic order
            let n = pool.len();
            let mut k = size;
            while k > 0 && idx[k - 1] == n - size + k - 1 {
                k -= 1;
            }
            if k == 0 {
                break;
            }
            idx[k - 1] += 1;
            for j in k..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    Ok(Abduction {
        answers,
        explored,
        truncated: false,
    })
}
