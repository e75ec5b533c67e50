//! Brute-force reference semantics for small ground theories.
//!
//! Everything is recomputed from definitions without touching the solver:
//! derivation trees by recursive expansion, attacks on sub-conclusions,
//! rule comparison through applicable priorities with level-2 arbitration,
//! and extensions by enumerating every subset of arguments.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use argora_core::solver::Analysis;
use argora_core::{ArgumentRule, Config, Literal, PriorityRule, Semantics, Status, Theory};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest argument count handed to subset enumeration.
pub const MAX_ARGS: usize = 14;

/// A ground theory with at most 12 rules, 6 constants and 4 priorities
/// over at most 2 levels.
pub fn random_theory(rng: &mut ChaCha8Rng) -> Theory {
    let n_consts = rng.gen_range(1..=6);
    let preds = ["p", "q", "r"];
    let mut atoms: Vec<Literal> = Vec::new();
    for c in 0..n_consts {
        for p in preds {
            atoms.push(Literal::ground(p, &[&format!("c{c}")]));
        }
    }
    atoms.shuffle(rng);
    atoms.truncate(rng.gen_range(2..=5));
    let lit = |rng: &mut ChaCha8Rng| {
        let a = atoms[rng.gen_range(0..atoms.len())].clone();
        if rng.gen_bool(0.4) {
            a.negate()
        } else {
            a
        }
    };

    let mut t = Theory::new();
    for _ in 0..rng.gen_range(0..=3) {
        let f = lit(rng);
        let _ = t.add_fact(f);
    }
    let n_rules = rng.gen_range(2..=12);
    for i in 0..n_rules {
        let head = lit(rng);
        let body: Vec<Literal> = (0..rng.gen_range(0..=2)).map(|_| lit(rng)).collect();
        t.rules.push(ArgumentRule::new(format!("r{i}"), head, body));
    }
    let budget = rng.gen_range(0..=4);
    let mut level1: Vec<String> = Vec::new();
    for k in 0..budget {
        let want_l2 = level1.len() >= 2 && rng.gen_bool(0.35);
        let (h, l, level) = if want_l2 {
            let mut pair = level1.clone();
            pair.shuffle(rng);
            (pair[0].clone(), pair[1].clone(), 2)
        } else {
            let h = rng.gen_range(0..n_rules);
            let mut l = rng.gen_range(0..n_rules);
            if l == h {
                l = (h + 1) % n_rules;
            }
            (format!("r{h}"), format!("r{l}"), 1)
        };
        let body = if rng.gen_bool(0.3) {
            vec![lit(rng)]
        } else {
            Vec::new()
        };
        let label = format!("pr{k}");
        if t
            .add_priority(PriorityRule::new(label.clone(), h, l, body, level))
            .is_ok()
            && level == 1
        {
            level1.push(label);
        }
    }
    t.extend_domain();
    t
}

/// One derivation tree: each sub-conclusion with the index of the rule
/// deriving it, or `None` for a fact.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Arg {
    pub conclusion: Literal,
    pub justification: BTreeMap<Literal, Option<usize>>,
}

impl Arg {
    fn top(&self) -> Option<usize> {
        self.justification[&self.conclusion]
    }

    fn support(&self) -> BTreeSet<usize> {
        self.justification.values().flatten().copied().collect()
    }
}

fn complementary(a: &Literal, b: &Literal) -> bool {
    a.predicate == b.predicate && a.args == b.args && a.negated != b.negated
}

/// Every derivation tree for `goal` not passing through `visiting`.
fn trees(t: &Theory, goal: &Literal, visiting: &mut Vec<Literal>) -> Vec<BTreeMap<Literal, Option<usize>>> {
    let mut out = Vec::new();
    if t.facts.contains(goal) {
        out.push([(goal.clone(), None)].into());
    }
    visiting.push(goal.clone());
    for (i, r) in t.rules.iter().enumerate() {
        if &r.head != goal {
            continue;
        }
        let mut partial: Vec<BTreeMap<Literal, Option<usize>>> = vec![[(goal.clone(), Some(i))].into()];
        for b in &r.body {
            if visiting.contains(b) {
                partial.clear();
                break;
            }
            let subs = trees(t, b, visiting);
            let mut next = Vec::new();
            for p in &partial {
                'sub: for s in &subs {
                    let mut m = p.clone();
                    for (k, v) in s {
                        match m.get(k) {
                            Some(e) if e != v => continue 'sub,
                            _ => {
                                m.insert(k.clone(), *v);
                            }
                        }
                    }
                    next.push(m);
                }
            }
            partial = next;
        }
        out.extend(partial);
    }
    visiting.pop();
    out
}

/// Minimal arguments for every literal, or `None` past `MAX_ARGS`.
pub fn arguments(t: &Theory) -> Option<Vec<Arg>> {
    let mut lits: BTreeSet<Literal> = t.facts.clone();
    for r in &t.rules {
        lits.insert(r.head.clone());
    }
    let mut out: Vec<Arg> = Vec::new();
    for l in &lits {
        let mut found: Vec<Arg> = trees(t, l, &mut Vec::new())
            .into_iter()
            .map(|justification| Arg {
                conclusion: l.clone(),
                justification,
            })
            .collect();
        found.sort();
        found.dedup_by(|a, b| a.support() == b.support());
        let minimal: Vec<Arg> = found
            .iter()
            .filter(|a| {
                let s = a.support();
                !found.iter().any(|b| {
                    let sb = b.support();
                    sb.len() < s.len() && sb.is_subset(&s)
                })
            })
            .cloned()
            .collect();
        out.extend(minimal);
        if out.len() > MAX_ARGS {
            return None;
        }
    }
    Some(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pref {
    First,
    Second,
    Neither,
}

fn applicable<'t>(t: &'t Theory, level: u32, hi: &str, lo: &str, ctx: &BTreeSet<Literal>) -> Vec<&'t PriorityRule> {
    t.priorities
        .iter()
        .filter(|p| p.level == level && p.higher == hi && p.lower == lo)
        .filter(|p| p.body.iter().all(|b| ctx.contains(b)))
        .collect()
}

/// Decide between priority sets pointing each way at `level`.
fn decide(t: &Theory, for_a: &[&PriorityRule], for_b: &[&PriorityRule], level: u32, ctx: &BTreeSet<Literal>) -> Pref {
    if for_a.is_empty() && for_b.is_empty() {
        return Pref::Neither;
    }
    if for_b.is_empty() {
        return Pref::First;
    }
    if for_a.is_empty() {
        return Pref::Second;
    }
    let beats = |x: &PriorityRule, y: &PriorityRule| {
        let up_x = applicable(t, level + 1, &x.label, &y.label, ctx);
        let up_y = applicable(t, level + 1, &y.label, &x.label, ctx);
        decide(t, &up_x, &up_y, level + 1, ctx) == Pref::First
    };
    let a_left = for_a.iter().any(|x| !for_b.iter().any(|y| beats(y, x)));
    let b_left = for_b.iter().any(|y| !for_a.iter().any(|x| beats(x, y)));
    match (a_left, b_left) {
        (true, false) => Pref::First,
        (false, true) => Pref::Second,
        _ => Pref::Neither,
    }
}

/// Does `a` defeat `b`? It must attack some sub-conclusion of `b` and not
/// be strictly weaker there.
fn defeats(t: &Theory, a: &Arg, b: &Arg) -> bool {
    let mut ctx = t.facts.clone();
    ctx.extend(a.justification.keys().cloned());
    ctx.extend(b.justification.keys().cloned());
    b.justification.iter().any(|(lit, target_rule)| {
        if !complementary(&a.conclusion, lit) {
            return false;
        }
        let pref = match (a.top(), *target_rule) {
            (None, _) => Pref::First,
            (Some(_), None) => Pref::Second,
            (Some(x), Some(y)) => {
                let (lx, ly) = (&t.rules[x].label, &t.rules[y].label);
                decide(
                    t,
                    &applicable(t, 1, lx, ly, &ctx),
                    &applicable(t, 1, ly, lx, &ctx),
                    1,
                    &ctx,
                )
            }
        };
        pref != Pref::Second
    })
}

pub struct Framework {
    pub args: Vec<Arg>,
    /// `defeat[i]` has bit `j` set when `j` defeats `i`.
    pub defeat: Vec<u32>,
}

pub fn framework(t: &Theory) -> Option<Framework> {
    let args = arguments(t)?;
    let defeat = args
        .iter()
        .map(|b| {
            args.iter()
                .enumerate()
                .filter(|(_, a)| defeats(t, a, b))
                .fold(0u32, |m, (j, _)| m | (1 << j))
        })
        .collect();
    Some(Framework { args, defeat })
}

impl Framework {
    fn conflict_free(&self, s: u32) -> bool {
        (0..self.args.len()).all(|i| s & (1 << i) == 0 || self.defeat[i] & s == 0)
    }

    fn defends(&self, s: u32, i: usize) -> bool {
        (0..self.args.len())
            .filter(|d| self.defeat[i] & (1 << d) != 0)
            .all(|d| self.defeat[d] & s != 0)
    }

    fn admissible(&self, s: u32) -> bool {
        self.conflict_free(s)
            && (0..self.args.len()).all(|i| s & (1 << i) == 0 || self.defends(s, i))
    }

    fn complete(&self, s: u32) -> bool {
        self.admissible(s) && (0..self.args.len()).all(|i| !self.defends(s, i) || s & (1 << i) != 0)
    }

    /// The least complete extension.
    pub fn grounded(&self) -> u32 {
        let all = 1u32 << self.args.len();
        (0..all)
            .filter(|s| self.complete(*s))
            .min_by_key(|s| s.count_ones())
            .expect("a complete extension always exists")
    }

    /// Admissible sets with no admissible strict superset.
    pub fn preferred(&self) -> Vec<u32> {
        let all = 1u32 << self.args.len();
        let adm: Vec<u32> = (0..all).filter(|s| self.admissible(*s)).collect();
        adm.iter()
            .copied()
            .filter(|s| !adm.iter().any(|o| o != s && o & s == *s))
            .collect()
    }
}

/// Status of every literal of the theory (both signs) under `semantics`.
pub fn oracle_statuses(t: &Theory, semantics: Semantics) -> Option<BTreeMap<Literal, Status>> {
    let f = framework(t)?;
    let grounded = f.grounded();
    let preferred = f.preferred();
    let mut out = BTreeMap::new();
    for goal in goals(t) {
        let mask = f
            .args
            .iter()
            .enumerate()
            .filter(|(_, a)| a.conclusion == goal)
            .fold(0u32, |m, (i, _)| m | (1 << i));
        let status = if mask == 0 {
            Status::NoArgument
        } else if grounded & mask != 0 {
            Status::AcceptedSceptically
        } else if preferred.iter().any(|e| e & mask != 0) {
            if semantics == Semantics::Preferred && preferred.iter().all(|e| e & mask != 0) {
                Status::AcceptedSceptically
            } else {
                Status::AcceptedCredulously
            }
        } else {
            Status::Rejected
        };
        out.insert(goal, status);
    }
    Some(out)
}

pub fn goals(t: &Theory) -> BTreeSet<Literal> {
    let mut out = BTreeSet::new();
    let mentioned = t
        .facts
        .iter()
        .chain(t.rules.iter().flat_map(|r| std::iter::once(&r.head).chain(&r.body)));
    for l in mentioned {
        out.insert(l.clone());
        out.insert(l.complement());
    }
    out
}

pub fn engine_statuses(
    t: &Theory,
    semantics: Semantics,
) -> Result<BTreeMap<Literal, Status>, argora_core::solver::SolveError> {
    let goals: Vec<Literal> = goals(t).into_iter().collect();
    let config = Config {
        semantics,
        ..Config::default()
    };
    let an = Analysis::new(t, &[], &goals, config)?;
    goals
        .into_iter()
        .map(|g| Ok((g.clone(), an.verdict(&g)?.status)))
        .collect()
}

#[derive(Debug, Default)]
pub struct OracleSummary {
    pub theories: usize,
    pub comparisons: usize,
    pub skipped: usize,
    /// Theories where some attack was resolved by a priority.
    pub with_priorities: usize,
    pub mismatches: Vec<String>,
}

/// Compare engine and oracle on `n` theories drawn from `seed`, under both
/// semantics. Theories with more than `MAX_ARGS` arguments are redrawn.
pub fn run_suite(n: usize, seed: u64) -> OracleSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = OracleSummary::default();
    while sum.theories < n {
        let t = random_theory(&mut rng);
        let Some(f) = framework(&t) else {
            sum.skipped += 1;
            continue;
        };
        sum.theories += 1;
        if !t.priorities.is_empty() && f.defeat.iter().any(|d| *d != 0) {
            sum.with_priorities += 1;
        }
        for sem in [Semantics::Grounded, Semantics::Preferred] {
            let want = oracle_statuses(&t, sem).expect("already sized");
            let got = engine_statuses(&t, sem).expect("sized theories solve");
            for (goal, w) in &want {
                sum.comparisons += 1;
                let g = got.get(goal).copied().unwrap_or(Status::NoArgument);
                if g != *w {
                    sum.mismatches.push(format!(
                        "theory #{} {sem:?} {goal}: engine {g}, oracle {w}\n{}",
                        sum.theories,
                        argora_core::dsl::print(&t)
                    ));
                }
            }
        }
    }
    sum
}
