//! Exhaustive reference for abduction: every consistent subset of the
//! abducible space up to a size bound, re-queried from scratch.

#![allow(dead_code)]

use std::collections::BTreeSet;

use argora_core::abduction::{abducible_space, abduce, Tier, DEFAULT_CANDIDATE_CAP};
use argora_core::solver::Analysis;
use argora_core::{Config, Literal, Status, Theory};

fn status(t: &Theory, evidence: &[Literal], delta: &[Literal], goal: &Literal) -> Status {
    let mut all = evidence.to_vec();
    all.extend(delta.iter().cloned());
    Analysis::new(t, &all, std::slice::from_ref(goal), Config::default())
        .and_then(|an| an.verdict(goal))
        .map(|v| v.status)
        .expect("small cases solve")
}

fn consistent(t: &Theory, evidence: &[Literal], delta: &[Literal]) -> bool {
    let known: Vec<&Literal> = t.facts.iter().chain(evidence).chain(delta).collect();
    known
        .iter()
        .all(|a| known.iter().all(|b| !t.incompatible(a, b)))
}

fn subsets(pool: &[Literal], max: usize) -> Vec<Vec<Literal>> {
    let mut out: Vec<Vec<Literal>> = vec![Vec::new()];
    for l in pool {
        let grown: Vec<Vec<Literal>> = out
            .iter()
            .filter(|s| s.len() < max)
            .map(|s| {
                let mut s = s.clone();
                s.push(l.clone());
                s
            })
            .collect();
        out.extend(grown);
    }
    out
}

/// Every subset-minimal consistent delta of size at most `max` reaching
/// `tier`, each sorted.
pub fn brute_force(t: &Theory, evidence: &[Literal], goal: &Literal, tier: Tier, max: usize) -> BTreeSet<Vec<Literal>> {
    let pool = abducible_space(t, evidence, goal);
    let mut admitted: Vec<Vec<Literal>> = subsets(&pool, max)
        .into_iter()
        .filter(|d| consistent(t, evidence, d))
        .filter(|d| tier.admits(status(t, evidence, d, goal)))
        .map(|mut d| {
            d.sort();
            d
        })
        .collect();
    admitted.sort_by_key(Vec::len);
    let mut minimal: BTreeSet<Vec<Literal>> = BTreeSet::new();
    for d in admitted {
        if !minimal.iter().any(|m| m.iter().all(|l| d.contains(l))) {
            minimal.insert(d);
        }
    }
    minimal
}

/// Run the engine and check its answers against the brute-force set:
/// same deltas, each re-verified and each minimal.
pub fn check(t: &Theory, evidence: &[Literal], goal: &Literal, tier: Tier, max: usize) -> Result<usize, String> {
    let found = abduce(t, evidence, goal, tier, max, Config::default(), DEFAULT_CANDIDATE_CAP)
        .map_err(|e| e.to_string())?;
    if found.truncated {
        return Err(format!("{goal}: search truncated"));
    }
    let mut got: BTreeSet<Vec<Literal>> = BTreeSet::new();
    for a in &found.answers {
        let mut d = a.delta.clone();
        d.sort();
        let s = status(t, evidence, &d, goal);
        if s != a.status || !tier.admits(s) {
            return Err(format!("{goal}: {d:?} claims {} but re-query gives {s}", a.status));
        }
        // acceptance is not monotone, so every proper subset is tried
        for mask in 0..(1u32 << d.len()) - 1 {
            let smaller: Vec<Literal> = d
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, l)| l.clone())
                .collect();
            if consistent(t, evidence, &smaller) && tier.admits(status(t, evidence, &smaller, goal)) {
                return Err(format!("{goal}: {d:?} is not minimal"));
            }
        }
        got.insert(d);
    }
    let want = brute_force(t, evidence, goal, tier, max);
    if got != want {
        return Err(format!("{goal} ({}): engine {got:?}, exhaustive {want:?}", tier.as_str()));
    }
    Ok(got.len())
}
