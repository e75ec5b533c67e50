//! Random well-formed theories with variables, declarations and leveled
//! priorities, for exercising the DSL.

#![allow(dead_code)]

use argora_core::dsl::{self, parse, ParseError};
use argora_core::{
    Abducible, ArgumentRule, IncompatibilityDecl, Layer, Literal, PriorityRule, Term, Theory,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PREDS: &[&str] = &["p", "q", "owner", "geoLoc", "sourceIP"];
const CONSTS: &[&str] = &["a", "b", "c1", "ip2", "pData", "x"];
const VARS: &[&str] = &["X", "Y", "Attack", "Country", "IP2"];

fn term(rng: &mut ChaCha8Rng, ground: bool) -> Term {
    if !ground && rng.gen_bool(0.5) {
        Term::var(*VARS.choose(rng).unwrap())
    } else {
        Term::constant(*CONSTS.choose(rng).unwrap())
    }
}

fn literal(rng: &mut ChaCha8Rng, ground: bool) -> Literal {
    let p = rng.gen_range(0..PREDS.len());
    // fixed arity per predicate keeps signatures consistent
    let arity = p % 3;
    let l = Literal::new(PREDS[p], (0..arity).map(|_| term(rng, ground)).collect());
    if rng.gen_bool(0.3) {
        l.negate()
    } else {
        l
    }
}

pub fn random_theory(rng: &mut ChaCha8Rng) -> Theory {
    let mut t = Theory::new();
    for name in ["country", "ip"] {
        if rng.gen_bool(0.5) {
            let members = CONSTS
                .iter()
                .filter(|_| rng.gen_bool(0.4))
                .map(|c| c.to_string())
                .collect();
            t.sorts.insert(name.to_string(), members);
        }
    }
    for _ in 0..rng.gen_range(0..3) {
        let p = rng.gen_range(0..PREDS.len());
        t.abducibles.insert(Abducible {
            predicate: PREDS[p].into(),
            arity: p % 3,
            negated: rng.gen_bool(0.3),
        });
    }
    if rng.gen_bool(0.4) {
        let left = literal(rng, false);
        let mut right = left.clone();
        right.negated = !right.negated;
        if let Some(Term::Const(_)) = right.args.last() {
            let n = right.args.len();
            right.args[n - 1] = Term::constant("other");
        }
        t.incompatibilities.push(IncompatibilityDecl { left, right });
    }
    for _ in 0..rng.gen_range(0..5) {
        let _ = t.add_fact(literal(rng, true));
    }
    let n_rules = rng.gen_range(1..=8);
    let mut labels = Vec::new();
    for i in 0..n_rules {
        let label = if rng.gen_bool(0.3) {
            format!("eh.r{i}a")
        } else {
            format!("r{i}")
        };
        let body = (0..rng.gen_range(0..4)).map(|_| literal(rng, false)).collect();
        let mut r = ArgumentRule::new(label.clone(), literal(rng, false), body);
        r.layer = match rng.gen_range(0..5) {
            0 => Some(Layer::Tactical),
            1 => Some(Layer::Operational),
            2 => Some(Layer::Strategic),
            _ => None,
        };
        t.rules.push(r);
        labels.push(label);
    }
    let mut by_level: Vec<Vec<String>> = vec![labels];
    for k in 0..rng.gen_range(0..6) {
        let level = rng.gen_range(0..by_level.len());
        let pool = &by_level[level];
        if pool.len() < 2 {
            continue;
        }
        let mut pair = pool.clone();
        pair.shuffle(rng);
        let body = (0..rng.gen_range(0..3)).map(|_| literal(rng, false)).collect();
        let label = format!("pr{k}");
        let p = PriorityRule::new(label.clone(), pair[0].clone(), pair[1].clone(), body, level as u32 + 1);
        if t.add_priority(p).is_ok() {
            if by_level.len() == level + 1 {
                by_level.push(Vec::new());
            }
            by_level[level + 1].push(label);
        }
    }
    t.extend_domain();
    t
}

pub fn theories(n: usize, seed: u64) -> Vec<Theory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_theory(&mut rng)).collect()
}

/// `parse(print(t))` equals the canonical form of `t`, and printing is a
/// fixpoint. Returns a description of the first difference.
pub fn round_trip(t: &Theory) -> Result<(), String> {
    let text = dsl::print(t);
    let back = parse(&text, "gen.arg")
        .map_err(|e| format!("printed text does not parse: {e}\n{text}"))?
        .theory;
    if back != dsl::normalize(t) {
        return Err(format!("structure differs after round trip\n{text}"));
    }
    if dsl::print(&back) != text {
        return Err(format!("printing is not a fixpoint\n{text}"));
    }
    Ok(())
}

/// The span of `e` lies inside `text`: the line exists and the columns do
/// not run past its end (one past the end is allowed for end of input).
pub fn span_in_bounds(text: &str, e: &ParseError) -> bool {
    let lines: Vec<&str> = text.split('\n').collect();
    let ok = |line: u32, col: u32| {
        line >= 1
            && (line as usize) <= lines.len()
            && col >= 1
            && (col as usize) <= lines[line as usize - 1].chars().count() + 1
    };
    ok(e.span.start.line, e.span.start.col)
        && ok(e.span.end.line, e.span.end.col)
        && e.span.start <= e.span.end
}

/// Damage `text` in one random place.
pub fn mutate(rng: &mut ChaCha8Rng, text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    if chars.is_empty() {
        return "rule".into();
    }
    let at = rng.gen_range(0..chars.len());
    let junk = ['(', ')', ',', '.', ':', '>', '<', '-', '~', '{', 'X', '%', '\n', '#', ' '];
    let mut out = chars.clone();
    match rng.gen_range(0..3) {
        0 => {
            out.remove(at);
        }
        1 => out.insert(at, *junk.choose(rng).unwrap()),
        _ => out.truncate(at),
    }
    out.into_iter().collect()
}
