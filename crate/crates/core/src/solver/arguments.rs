use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::SolveError;
use crate::grounder::{GroundRule, GroundTheory};
use crate::kernel::Literal;

/// Least fixpoint of forward application of `instances` over `facts`.
pub fn derive_closure(facts: &BTreeSet<Literal>, instances: &[GroundRule]) -> BTreeSet<Literal> {
    let mut closure = facts.clone();
    let mut pending: Vec<&GroundRule> = instances.iter().collect();
    loop {
        let before = pending.len();
        pending.retain(|inst| {
            if inst.body.iter().all(|b| closure.contains(b)) {
                closure.insert(inst.head.clone());
                false
            } else {
                true
            }
        });
        if pending.len() == before {
            return closure;
        }
    }
}

/// A minimal derivation tree for one conclusion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Argument {
    pub id: usize,
    pub conclusion: Literal,
    /// Instance concluding `conclusion`; `None` when the argument is a fact.
    pub top: Option<usize>,
    /// Rule instances used, as indices into `GroundTheory::instances`.
    pub support: BTreeSet<usize>,
    /// Facts at the leaves.
    pub premises: BTreeSet<Literal>,
    /// Every sub-conclusion with the instance that derives it (`None` for a
    /// fact leaf). Contains `conclusion` itself.
    pub justification: BTreeMap<Literal, Option<usize>>,
}

impl Argument {
    pub fn is_fact(&self) -> bool {
        self.top.is_none()
    }

    /// Labels of the rules in the support, sorted.
    pub fn labels<'g>(&self, gt: &'g GroundTheory) -> Vec<&'g str> {
        let mut v: Vec<&str> = self
            .support
            .iter()
            .map(|i| gt.instances[*i].label.as_str())
            .collect();
        v.sort_unstable();
        v
    }

    pub fn sub_conclusions(&self) -> impl Iterator<Item = (&Literal, Option<usize>)> {
        self.justification.iter().map(|(l, j)| (l, *j))
    }
}

struct Proto {
    conclusion: Literal,
    top: Option<usize>,
    support: BTreeSet<usize>,
    premises: BTreeSet<Literal>,
    justification: BTreeMap<Literal, Option<usize>>,
}

/// All subset-minimal arguments of `gt`, in a deterministic order.
pub fn build_arguments(gt: &GroundTheory, cap: usize) -> Result<Vec<Argument>, SolveError> {
    let facts = gt.facts();
    let closure = derive_closure(facts, &gt.instances);
    let relevant: Vec<usize> = (0..gt.instances.len())
        .filter(|i| gt.instances[*i].body.iter().all(|b| closure.contains(b)))
        .collect();

    let mut protos: Vec<Proto> = Vec::new();
    let mut by_lit: BTreeMap<Literal, Vec<usize>> = BTreeMap::new();
    let mut seen: BTreeSet<(Literal, BTreeSet<usize>)> = BTreeSet::new();

    for f in facts {
        by_lit.entry(f.clone()).or_default().push(protos.len());
        seen.insert((f.clone(), BTreeSet::new()));
        protos.push(Proto {
            conclusion: f.clone(),
            top: None,
            support: BTreeSet::new(),
            premises: [f.clone()].into(),
            justification: [(f.clone(), None)].into(),
        });
    }

    // Each round combines sub-arguments; `fresh_from` marks protos created
    // in the previous round so only new combinations are tried.
    let mut fresh_from = 0usize;
    loop {
        let round_start = protos.len();
        for &inst_idx in &relevant {
            let inst = &gt.instances[inst_idx];
            let lists: Vec<Vec<usize>> = inst
                .body
                .iter()
                .map(|b| by_lit.get(b).cloned().unwrap_or_default())
                .collect();
            if lists.iter().any(Vec::is_empty) {
                continue;
            }
            let mut idx = alloc::vec![0usize; lists.len()];
            loop {
                let combo: Vec<usize> = idx.iter().zip(&lists).map(|(i, l)| l[*i]).collect();
                let has_fresh = fresh_from == 0 || combo.iter().any(|p| *p >= fresh_from);
                if has_fresh {
                    if let Some(p) = combine(&protos, &combo, inst_idx, &inst.head) {
                        let key = (p.conclusion.clone(), p.support.clone());
                        if seen.insert(key) {
                            if protos.len() >= cap {
                                return Err(SolveError::TooManyArguments { cap });
                            }
                            by_lit.entry(p.conclusion.clone()).or_default().push(protos.len());
                            protos.push(p);
                        }
                    }
                }
                let mut k = idx.len();
                let exhausted = loop {
                    if k == 0 {
                        break true;
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < lists[k].len() {
                        break false;
                    }
                    idx[k] = 0;
                };
                if exhausted {
                    break;
                }
            }
        }
        if protos.len() == round_start {
            break;
        }
        fresh_from = round_start;
    }

    // Keep only subset-minimal supports per conclusion.
    let mut keep = alloc::vec![true; protos.len()];
    for idxs in by_lit.values() {
        for &i in idxs {
            for &j in idxs {
                if i != j
                    && protos[j].support.len() < protos[i].support.len()
                    && protos[j].support.is_subset(&protos[i].support)
                {
                    keep[i] = false;
                    break;
                }
            }
        }
    }

    let mut out: Vec<Argument> = protos
        .into_iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(p, _)| Argument {
            id: 0,
            conclusion: p.conclusion,
            top: p.top,
            support: p.support,
            premises: p.premises,
            justification: p.justification,
        })
        .collect();
    out.sort_by(|a, b| {
        (&a.conclusion, a.support.len(), &a.support, &a.premises).cmp(&(
            &b.conclusion,
            b.support.len(),
            &b.support,
            &b.premises,
        ))
    });
    for (i, a) in out.iter_mut().enumerate() {
        a.id = i;
    }
    Ok(out)
}

fn combine(protos: &[Proto], combo: &[usize], inst: usize, head: &Literal) -> Option<Proto> {
    let mut justification: BTreeMap<Literal, Option<usize>> = BTreeMap::new();
    justification.insert(head.clone(), Some(inst));
    let mut support: BTreeSet<usize> = [inst].into();
    let mut premises = BTreeSet::new();
    for &p in combo {
        let sub = &protos[p];
        if sub.justification.contains_key(head) {
            return None;
        }
        for (lit, j) in &sub.justification {
            // one justification per literal inside a tree
            match justification.get(lit) {
                Some(existing) if existing != j => return None,
                _ => {
                    justification.insert(lit.clone(), *j);
                }
            }
        }
        support.extend(sub.support.iter().copied());
        premises.extend(sub.premises.iter().cloned());
    }
    Some(Proto {
        conclusion: head.clone(),
        top: Some(inst),
        support,
        premises,
        justification,
    })
}
