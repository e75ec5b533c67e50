use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::arguments::Argument;
use super::priority::{compare_instances, Comparison, Preference};
use crate::grounder::GroundTheory;
use crate::kernel::Literal;

/// `attacker` contradicts `target` at the sub-conclusion `at`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Attack {
    pub attacker: usize,
    pub target: usize,
    pub at: Literal,
    /// `First` means the attacker is stronger, `Second` the target.
    pub outcome: Comparison,
}

impl Attack {
    /// The attack survives preference filtering.
    pub fn is_defeat(&self) -> bool {
        self.outcome.preference != Preference::Second
    }
}

#[derive(Clone, Debug)]
pub struct DefeatGraph {
    pub arguments: Vec<Argument>,
    pub attacks: Vec<Attack>,
}

impl DefeatGraph {
    pub fn defeats(&self) -> impl Iterator<Item = &Attack> {
        self.attacks.iter().filter(|a| a.is_defeat())
    }

    /// Defeaters of each argument, indexed by argument id.
    pub fn defeaters(&self) -> Vec<Vec<usize>> {
        let mut out = alloc::vec![Vec::new(); self.arguments.len()];
        for d in self.defeats() {
            if !out[d.target].contains(&d.attacker) {
                out[d.target].push(d.attacker);
            }
        }
        for v in &mut out {
            v.sort_unstable();
        }
        out
    }

    pub fn attacks_on(&self, target: usize) -> impl Iterator<Item = &Attack> {
        self.attacks.iter().filter(move |a| a.target == target)
    }
}

/// Comparison context: every fact plus both arguments' sub-conclusions.
pub fn context_for(gt: &GroundTheory, a: &Argument, b: &Argument) -> BTreeSet<Literal> {
    let mut ctx = gt.facts().clone();
    ctx.extend(a.justification.keys().cloned());
    ctx.extend(b.justification.keys().cloned());
    ctx
}

/// Compare attacker `a` with target `b` at `b`'s sub-conclusion `at`.
pub fn compare_at_conflict(
    gt: &GroundTheory,
    a: &Argument,
    b: &Argument,
    at: &Literal,
    context: &BTreeSet<Literal>,
) -> Comparison {
    let target_inst = b.justification.get(at).copied().flatten();
    compare_instances(
        gt,
        a.top.map(|i| &gt.instances[i]),
        target_inst.map(|i| &gt.instances[i]),
        context,
    )
}

pub fn build_defeat_graph(gt: &GroundTheory, arguments: Vec<Argument>) -> DefeatGraph {
    let theory = &gt.theory;
    // conclusions that can be attacked, with the arguments containing them
    let mut holders: BTreeMap<&Literal, Vec<usize>> = BTreeMap::new();
    for arg in &arguments {
        for lit in arg.justification.keys() {
            holders.entry(lit).or_default().push(arg.id);
        }
    }
    let mut by_conclusion: BTreeMap<&Literal, Vec<usize>> = BTreeMap::new();
    for arg in &arguments {
        by_conclusion.entry(&arg.conclusion).or_default().push(arg.id);
    }

    let mut attacks = Vec::new();
    for (concl, attackers) in &by_conclusion {
        for (lit, targets) in &holders {
            if !theory.incompatible(concl, lit) {
                continue;
            }
            for &a in attackers {
                for &t in targets {
                    let (aa, ta) = (&arguments[a], &arguments[t]);
                    let ctx = context_for(gt, aa, ta);
                    let outcome = compare_at_conflict(gt, aa, ta, lit, &ctx);
                    attacks.push(Attack {
                        attacker: a,
                        target: t,
                        at: (*lit).clone(),
                        outcome,
                    });
                }
            }
        }
    }
    attacks.sort_by(|x, y| (x.attacker, x.target, &x.at).cmp(&(y.attacker, y.target, &y.at)));
    DefeatGraph { arguments, attacks }
}
