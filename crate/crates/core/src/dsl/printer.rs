use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::kernel::{Literal, Theory};

fn list(out: &mut String, lits: &[Literal]) {
    for (i, l) in lits.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{l}");
    }
}

/// Canonical text: sorts, abducibles, conflicts, facts, rules by label (each
/// followed by its layer), then priorities by level and label.
pub fn print(theory: &Theory) -> String {
    let t = normalize(theory);
    let mut out = String::new();
    for (name, members) in &t.sorts {
        let members: Vec<&str> = members.iter().map(String::as_str).collect();
        let _ = writeln!(out, "sort {name} = {{{}}}.", members.join(", "));
    }
    for a in &t.abducibles {
        let neg = if a.negated { " neg" } else { "" };
        let _ = writeln!(out, "abducible {}/{}{neg}.", a.predicate, a.arity);
    }
    for d in &t.incompatibilities {
        let _ = writeln!(out, "conflict {} ~ {}.", d.left, d.right);
    }
    for f in &t.facts {
        let _ = writeln!(out, "fact {f}.");
    }
    for r in &t.rules {
        let _ = write!(out, "rule {}: {}", r.label, r.head);
        if !r.body.is_empty() {
            out.push_str(" <- ");
            list(&mut out, &r.body);
        }
        out.push_str(".\n");
        if let Some(layer) = r.layer {
            let _ = writeln!(out, "layer {}: {layer}.", r.label);
        }
    }
    for p in &t.priorities {
        let _ = write!(out, "prefer {}: {} > {}", p.label, p.higher, p.lower);
        if !p.body.is_empty() {
            out.push_str(" when ");
            list(&mut out, &p.body);
        }
        out.push_str(".\n");
    }
    out
}

/// The canonical form `print` emits and `parse` reads back: rules sorted by
/// label, priorities by level then label, declarations sorted, and the
/// domain recomputed from the constants in use.
pub fn normalize(theory: &Theory) -> Theory {
    let mut t = theory.clone();
    t.rules.sort_by(|a, b| a.label.cmp(&b.label));
    t.priorities
        .sort_by(|a, b| (a.level, &a.label).cmp(&(b.level, &b.label)));
    t.incompatibilities.sort();
    t.domain.clear();
    t.extend_domain();
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    #[test]
    fn empty_theory_prints_nothing() {
        assert_eq!(print(&Theory::new()), "");
    }

    #[test]
    fn single_fact() {
        let mut t = Theory::new();
        t.add_fact(Literal::ground("p", &["a"])).unwrap();
        assert_eq!(print(&t), "fact p(a).\n");
    }

    #[test]
    fn round_trip_of_mixed_theory() {
        let src = "% out of canonical order\n\
                   prefer b1: a2 > a1.\n";
        assert!(parse(src, "t").is_err());
        let src = "rule a2: perform(A,C) <- sourceIP(A,IP), geoloc(IP,C).\n\
                   layer a2: tactical.\n\
                   rule a1: neg perform(A,Country).\n\
                   prefer b1: a2 > a1 when geoloc(IP,C).\n\
                   sort country = {c1, c2}.\n\
                   abducible fperm/2 neg.\n\
                   conflict q(X,yes) ~ q(X,no).\n\
                   fact sourceIP(a,ip1).\n";
        let t = parse(src, "t").unwrap().theory;
        let text = print(&t);
        let back = parse(&text, "t").unwrap().theory;
        assert_eq!(back, normalize(&t));
        assert_eq!(print(&back), text);
    }
}
