//! Static detection of rule pairs that can reach incompatible conclusions
//! in the same situation, and whether a priority decides them.
//!
//! Each pair of rule schemas is renamed apart and the heads are unified
//! into an incompatible pair, either as complements or through a declared
//! incompatibility. Body literals of the same predicate are then aligned
//! greedily so both rules describe one case. Asserting the aligned bodies,
//! with a fresh constant per remaining variable, gives a witness; a pair
//! whose witness contradicts itself is not a conflict.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::grounder::{GroundRule, GroundTheory};
use crate::kernel::{ArgumentRule, KernelError, Literal, PriorityRule, Subst, Term, Theory};
use crate::solver::{compare_instances, Preference};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Resolution {
    /// `winner` prevails in the witness context through `chain`.
    Decided { winner: String, chain: Vec<String> },
    Unresolved,
}

impl Resolution {
    pub fn is_decided(&self) -> bool {
        matches!(self, Resolution::Decided { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictReport {
    pub rule_a: String,
    pub rule_b: String,
    /// The unifier, expressed per rule as a binding of its own variables to
    /// witness constants.
    pub bindings_a: Subst,
    pub bindings_b: Subst,
    pub head_a: Literal,
    pub head_b: Literal,
    /// Sorted facts under which both rules fire.
    pub witness: Vec<Literal>,
    pub resolution: Resolution,
    pub suggestion: Option<PriorityRule>,
}

/// A variable tagged with the side it comes from: 0 and 1 for the two
/// rules, 2 for a declaration pattern.
type Var = (u8, String);

#[derive(Clone, Debug, PartialEq, Eq)]
enum T {
    Var(Var),
    Const(String),
}

#[derive(Clone, Debug, Default)]
struct Unifier {
    bound: BTreeMap<Var, T>,
}

impl Unifier {
    fn resolve(&self, t: &T) -> T {
        let mut t = t.clone();
        while let T::Var(v) = &t {
            match self.bound.get(v) {
                Some(next) => t = next.clone(),
                None => break,
            }
        }
        t
    }

    fn unify_terms(&mut self, a: &T, b: &T) -> bool {
        let (a, b) = (self.resolve(a), self.resolve(b));
        match (a, b) {
            (T::Const(x), T::Const(y)) => x == y,
            (T::Var(x), T::Var(y)) if x == y => true,
            (T::Var(x), t) | (t, T::Var(x)) => {
                self.bound.insert(x, t);
                true
            }
        }
    }

    /// Unify argument lists, leaving `self` untouched on failure.
    fn unify(&mut self, a: &[T], b: &[T]) -> bool {
        if a.len() != b.len() {
            return false;
        }
        let mut trial = self.clone();
        for (x, y) in a.iter().zip(b) {
            if !trial.unify_terms(x, y) {
                return false;
            }
        }
        *self = trial;
        true
    }
}

fn tag(side: u8, l: &Literal) -> Vec<T> {
    l.args
        .iter()
        .map(|t| match t {
            Term::Var(v) => T::Var((side, v.clone())),
            Term::Const(c) => T::Const(c.clone()),
        })
        .collect()
}

fn same_shape(a: &Literal, b: &Literal) -> bool {
    a.predicate == b.predicate && a.negated == b.negated && a.arity() == b.arity()
}

/// Ways of unifying two heads into an incompatible pair, in a fixed order:
/// complements first, then each declaration in both orientations.
fn head_unifiers(theory: &Theory, ha: &Literal, hb: &Literal) -> Vec<Unifier> {
    let (ta, tb) = (tag(0, ha), tag(1, hb));
    let mut out = Vec::new();
    if ha.predicate == hb.predicate && ha.negated != hb.negated {
        let mut u = Unifier::default();
        if u.unify(&ta, &tb) {
            out.push(u);
        }
    }
    for d in &theory.incompatibilities {
        for (l, r) in [(&d.left, &d.right), (&d.right, &d.left)] {
            if !same_shape(l, ha) || !same_shape(r, hb) {
                continue;
            }
            let mut u = Unifier::default();
            if u.unify(&tag(2, l), &ta) && u.unify(&tag(2, r), &tb) {
                out.push(u);
            }
        }
    }
    out
}

/// Align every body literal of `a` with the first unused, unifiable body
/// literal of `b` of the same shape.
fn align(u: &mut Unifier, a: &ArgumentRule, b: &ArgumentRule) {
    let mut used = alloc::vec![false; b.body.len()];
    for la in &a.body {
        let ta = tag(0, la);
        for (j, lb) in b.body.iter().enumerate() {
            if !used[j] && same_shape(la, lb) && u.unify(&ta, &tag(1, lb)) {
                used[j] = true;
                break;
            }
        }
    }
}

/// Fresh constant names for the remaining variable classes, derived from
/// the variable names and kept clear of the theory's constants.
struct Naming<'t> {
    theory: &'t Theory,
    names: BTreeMap<Var, String>,
    taken: BTreeSet<String>,
}

impl<'t> Naming<'t> {
    fn new(theory: &'t Theory) -> Self {
        Naming {
            theory,
            names: BTreeMap::new(),
            taken: BTreeSet::new(),
        }
    }

    fn fresh(&mut self, var: &str) -> String {
        let stem: String = var
            .trim_start_matches('_')
            .trim_end_matches(|c: char| c.is_ascii_digit())
            .to_lowercase();
        let stem = if stem.is_empty() || !stem.starts_with(char::is_alphabetic) {
            String::from("w")
        } else {
            stem
        };
        let mut name = stem.clone();
        let mut n = 2;
        while self.theory.domain.contains(&name) || self.taken.contains(&name) {
            name = format!("{stem}{n}");
            n += 1;
        }
        self.taken.insert(name.clone());
        name
    }

    fn ground(&mut self, u: &Unifier, side: u8, l: &Literal) -> (Literal, Subst) {
        let mut binding = Subst::new();
        let mut args = Vec::with_capacity(l.args.len());
        for t in &l.args {
            let c = match t {
                Term::Const(c) => c.clone(),
                Term::Var(v) => {
                    let c = match u.resolve(&T::Var((side, v.clone()))) {
                        T::Const(c) => c,
                        T::Var(root) => match self.names.get(&root) {
                            Some(c) => c.clone(),
                            None => {
                                let c = self.fresh(v);
                                self.names.insert(root, c.clone());
                                c
                            }
                        },
                    };
                    binding.insert(v.clone(), c.clone());
                    c
                }
            };
            args.push(Term::Const(c));
        }
        let mut g = Literal::new(l.predicate.clone(), args);
        g.negated = l.negated;
        (g, binding)
    }

    fn instance(&mut self, u: &Unifier, side: u8, schema: usize, r: &ArgumentRule) -> GroundRule {
        let mut subst = Subst::new();
        let (head, b) = self.ground(u, side, &r.head);
        subst.extend(b);
        let body = r
            .body
            .iter()
            .map(|l| {
                let (g, b) = self.ground(u, side, l);
                subst.extend(b);
                g
            })
            .collect();
        GroundRule {
            schema,
            label: r.label.clone(),
            subst,
            head,
            body,
        }
    }
}

fn self_consistent(theory: &Theory, lits: &[Literal]) -> bool {
    lits.iter()
        .enumerate()
        .all(|(i, a)| lits[i + 1..].iter().all(|b| !theory.incompatible(a, b)))
}

fn fresh_label(theory: &Theory, higher: &str, lower: &str) -> String {
    let stem = format!("{higher}_over_{lower}");
    let mut label = stem.clone();
    let mut n = 2;
    while theory.label_level(&label).is_some() {
        label = format!("{stem}_{n}");
        n += 1;
    }
    label
}

fn specificity(theory: &Theory, a: &GroundRule, b: &GroundRule) -> Option<PriorityRule> {
    let ba: BTreeSet<&Literal> = a.body.iter().collect();
    let bb: BTreeSet<&Literal> = b.body.iter().collect();
    let (higher, lower) = if ba.len() > bb.len() && ba.is_superset(&bb) {
        (&a.label, &b.label)
    } else if bb.len() > ba.len() && bb.is_superset(&ba) {
        (&b.label, &a.label)
    } else {
        return None;
    };
    let level = theory.infer_level(higher, lower).ok()?;
    Some(PriorityRule::new(
        fresh_label(theory, higher, lower),
        higher.clone(),
        lower.clone(),
        Vec::new(),
        level,
    ))
}

fn check_pair(theory: &Theory, i: usize, j: usize) -> Option<ConflictReport> {
    let (a, b) = (&theory.rules[i], &theory.rules[j]);
    for mut u in head_unifiers(theory, &a.head, &b.head) {
        align(&mut u, a, b);
        let mut naming = Naming::new(theory);
        let ga = naming.instance(&u, 0, i, a);
        let gb = naming.instance(&u, 1, j, b);
        if !theory.incompatible(&ga.head, &gb.head) {
            continue;
        }
        let witness: BTreeSet<Literal> = ga.body.iter().chain(&gb.body).cloned().collect();
        let witness: Vec<Literal> = witness.into_iter().collect();
        if !self_consistent(theory, &witness) {
            continue;
        }

        let mut context: BTreeSet<Literal> = theory.facts.clone();
        context.extend(witness.iter().cloned());
        context.insert(ga.head.clone());
        context.insert(gb.head.clone());
        let mut domain = theory.domain.clone();
        domain.extend(context.iter().flat_map(|l| l.constants().map(ToString::to_string)));
        let gt = GroundTheory {
            theory: theory.clone(),
            instances: alloc::vec![ga.clone(), gb.clone()],
            domain,
        };
        let cmp = compare_instances(&gt, Some(&ga), Some(&gb), &context);
        let resolution = match cmp.preference {
            Preference::First => Resolution::Decided {
                winner: a.label.clone(),
                chain: cmp.chain,
            },
            Preference::Second => Resolution::Decided {
                winner: b.label.clone(),
                chain: cmp.chain,
            },
            Preference::Undecided => Resolution::Unresolved,
        };
        let suggestion = match resolution {
            Resolution::Unresolved => specificity(theory, &ga, &gb),
            Resolution::Decided { .. } => None,
        };
        return Some(ConflictReport {
            rule_a: a.label.clone(),
            rule_b: b.label.clone(),
            bindings_a: ga.subst,
            bindings_b: gb.subst,
            head_a: ga.head,
            head_b: gb.head,
            witness,
            resolution,
            suggestion,
        });
    }
    None
}

/// One report per pair of rule schemas that can conclude incompatible
/// literals from a consistent witness, ordered by label pair.
pub fn detect_conflicts(theory: &Theory) -> Vec<ConflictReport> {
    let mut order: Vec<usize> = (0..theory.rules.len()).collect();
    order.sort_by(|x, y| theory.rules[*x].label.cmp(&theory.rules[*y].label));
    let mut out = Vec::new();
    for (n, &i) in order.iter().enumerate() {
        for &j in &order[n + 1..] {
            if let Some(r) = check_pair(theory, i, j) {
                out.push(r);
            }
        }
    }
    out
}

/// The specificity-based priority proposed for an unresolved report: the
/// rule whose aligned body strictly contains the other's wins,
/// unconditionally.
pub fn suggest_priority(report: &ConflictReport) -> Option<PriorityRule> {
    match report.resolution {
        Resolution::Unresolved => report.suggestion.clone(),
        Resolution::Decided { .. } => None,
    }
}

/// The theory with `decision` appended. Argument rules are untouched.
pub fn apply_resolution(theory: &Theory, decision: PriorityRule) -> Result<Theory, KernelError> {
    let mut t = theory.clone();
    t.add_priority(decision)?;
    Ok(t)
}

pub fn unresolved(reports: &[ConflictReport]) -> impl Iterator<Item = &ConflictReport> {
    reports.iter().filter(|r| !r.resolution.is_decided())
}
