use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::lexer::{lex, Tok, Token};
use super::{ParseError, SourceSpan};
use crate::kernel::{
    Abducible, ArgumentRule, IncompatibilityDecl, KernelError, Layer, Literal, PriorityRule, Term,
    Theory,
};
use crate::solver::{Semantics, Status};

/// A parsed theory with the source location of every labeled statement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Parsed {
    pub theory: Theory,
    pub spans: BTreeMap<String, SourceSpan>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioExpect {
    pub stage: usize,
    pub goal: Literal,
    pub status: Status,
    pub span: SourceSpan,
}

/// Staged evidence against a named pack. Stages are cumulative and
/// numbered from 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub name: String,
    pub pack: String,
    pub semantics: Semantics,
    pub stages: Vec<Vec<Literal>>,
    pub expects: Vec<ScenarioExpect>,
}

impl Scenario {
    /// Distinct goals in order of first appearance.
    pub fn goals(&self) -> Vec<&Literal> {
        let mut out: Vec<&Literal> = Vec::new();
        for e in &self.expects {
            if !out.contains(&&e.goal) {
                out.push(&e.goal);
            }
        }
        out
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(text: &str, file: &str) -> PResult<Self> {
        Ok(Parser {
            toks: lex(text, file)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn at(&self, tok: &Tok) -> bool {
        &self.peek().tok == tok
    }

    fn at_word(&self, word: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(w) if w == word)
    }

    fn unexpected<T>(&self, expected: &str) -> PResult<T> {
        let t = self.peek();
        Err(ParseError::new(
            t.span.clone(),
            format!("unexpected {}", t.tok.describe()),
            Some(expected.into()),
        ))
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if self.at(&tok) {
            Ok(self.bump())
        } else {
            self.unexpected(&tok.describe())
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                Ok((s, self.bump().span))
            }
            _ => self.unexpected(what),
        }
    }

    fn int(&mut self, what: &str) -> PResult<(usize, SourceSpan)> {
        match &self.peek().tok {
            Tok::Int(s) => match s.parse() {
                Ok(n) => Ok((n, self.bump().span)),
                Err(_) => Err(ParseError::new(
                    self.peek().span.clone(),
                    "number out of range",
                    None,
                )),
            },
            _ => self.unexpected(what),
        }
    }

    fn term(&mut self) -> PResult<Term> {
        match &self.peek().tok {
            Tok::Ident(s) | Tok::Int(s) => {
                let t = Term::constant(s.clone());
                self.bump();
                Ok(t)
            }
            Tok::Var(s) => {
                let t = Term::var(s.clone());
                self.bump();
                Ok(t)
            }
            _ => self.unexpected("a constant or variable"),
        }
    }

    fn literal(&mut self) -> PResult<(Literal, SourceSpan)> {
        let start = self.peek().span.clone();
        let negated = if self.at_word("neg") {
            self.bump();
            true
        } else {
            false
        };
        let (pred, mut end) = self.ident("a literal")?;
        let mut args = Vec::new();
        if self.at(&Tok::LParen) {
            self.bump();
            loop {
                args.push(self.term()?);
                if self.at(&Tok::Comma) {
                    self.bump();
                    continue;
                }
                end = self.expect(Tok::RParen)?.span;
                break;
            }
        }
        let mut lit = Literal::new(pred, args);
        if negated {
            lit = lit.negate();
        }
        Ok((lit, start.to(&end)))
    }

    fn literal_list(&mut self) -> PResult<Vec<Literal>> {
        let mut out = alloc::vec![self.literal()?.0];
        while self.at(&Tok::Comma) {
            self.bump();
            out.push(self.literal()?.0);
        }
        Ok(out)
    }

    fn end(&mut self) -> PResult<()> {
        self.expect(Tok::Dot).map(|_| ())
    }
}

fn kernel_error(span: SourceSpan, e: KernelError) -> ParseError {
    ParseError::new(span, e.to_string(), None)
}

/// Parse a `.arg` theory. The first error wins.
pub fn parse(text: &str, file: &str) -> Result<Parsed, ParseError> {
    let mut p = Parser::new(text, file)?;
    let mut theory = Theory::new();
    let mut spans: BTreeMap<String, SourceSpan> = BTreeMap::new();
    let mut layered: BTreeSet<String> = BTreeSet::new();

    loop {
        let kw = p.peek().clone();
        let word = match &kw.tok {
            Tok::Eof => break,
            Tok::Ident(w) => w.clone(),
            _ => return p.unexpected("a statement keyword"),
        };
        p.bump();
        match word.as_str() {
            "fact" => {
                let (lit, span) = p.literal()?;
                p.end()?;
                if !lit.is_ground() {
                    return Err(ParseError::new(span, "facts must be ground", None));
                }
                theory.add_fact(lit).map_err(|e| kernel_error(span, e))?;
            }
            "rule" => {
                let (label, lspan) = p.ident("a rule label")?;
                claim_label(&theory, &label, &lspan)?;
                p.expect(Tok::Colon)?;
                let (head, _) = p.literal()?;
                let mut body = Vec::new();
                if p.at(&Tok::Arrow) {
                    let arrow = p.bump();
                    if p.at(&Tok::Dot) || p.at(&Tok::Eof) {
                        return Err(ParseError::new(
                            arrow.span,
                            "rule body missing after `<-`",
                            Some("a literal".into()),
                        ));
                    }
                    body = p.literal_list()?;
                }
                p.end()?;
                theory.rules.push(ArgumentRule::new(label.clone(), head, body));
                spans.insert(label, lspan);
            }
            "prefer" => {
                let (label, lspan) = p.ident("a priority label")?;
                claim_label(&theory, &label, &lspan)?;
                p.expect(Tok::Colon)?;
                let (higher, hspan) = p.ident("a rule label")?;
                p.expect(Tok::Gt)?;
                let (lower, lowspan) = p.ident("a rule label")?;
                let mut body = Vec::new();
                if p.at_word("when") {
                    p.bump();
                    body = p.literal_list()?;
                }
                p.end()?;
                if higher == lower {
                    return Err(kernel_error(lspan, KernelError::Irreflexive(label)));
                }
                for (l, s) in [(&higher, &hspan), (&lower, &lowspan)] {
                    if theory.label_level(l).is_none() {
                        return Err(ParseError::new(
                            s.clone(),
                            format!("unknown label {l}; labels must be defined before use"),
                            None,
                        ));
                    }
                }
                let level = theory
                    .infer_level(&higher, &lower)
                    .map_err(|e| kernel_error(hspan.to(&lowspan), e))?;
                theory
                    .priorities
                    .push(PriorityRule::new(label.clone(), higher, lower, body, level));
                spans.insert(label, lspan);
            }
            "conflict" => {
                let (left, _) = p.literal()?;
                p.expect(Tok::Tilde)?;
                let (right, _) = p.literal()?;
                p.end()?;
                theory.incompatibilities.push(IncompatibilityDecl { left, right });
            }
            "abducible" => {
                let (predicate, _) = p.ident("a predicate name")?;
                p.expect(Tok::Slash)?;
                let (arity, _) = p.int("an arity")?;
                let negated = if p.at_word("neg") {
                    p.bump();
                    true
                } else {
                    false
                };
                p.end()?;
                theory.abducibles.insert(Abducible {
                    predicate,
                    arity,
                    negated,
                });
            }
            "sort" => {
                let (name, nspan) = p.ident("a sort name")?;
                p.expect(Tok::Eq)?;
                p.expect(Tok::LBrace)?;
                let mut members = BTreeSet::new();
                if !p.at(&Tok::RBrace) {
                    loop {
                        members.insert(p.ident("a constant")?.0);
                        if p.at(&Tok::Comma) {
                            p.bump();
                        } else {
                            break;
                        }
                    }
                }
                p.expect(Tok::RBrace)?;
                p.end()?;
                if theory.sorts.insert(name.clone(), members).is_some() {
                    return Err(ParseError::new(nspan, format!("duplicate sort {name}"), None));
                }
            }
            "layer" => {
                let (label, lspan) = p.ident("a rule label")?;
                p.expect(Tok::Colon)?;
                let (name, vspan) = p.ident("tactical, operational or strategic")?;
                p.end()?;
                let layer = Layer::parse(&name).ok_or_else(|| {
                    ParseError::new(
                        vspan,
                        format!("unknown layer {name}"),
                        Some("tactical, operational or strategic".into()),
                    )
                })?;
                let Some(rule) = theory.rules.iter_mut().find(|r| r.label == label) else {
                    return Err(ParseError::new(
                        lspan,
                        format!("unknown rule {label}; rules must be defined before use"),
                        None,
                    ));
                };
                if !layered.insert(label.clone()) {
                    return Err(ParseError::new(lspan, format!("layer of {label} already set"), None));
                }
                rule.layer = Some(layer);
            }
            _ => {
                return Err(ParseError::new(
                    kw.span,
                    format!("unknown statement `{word}`"),
                    Some("fact, rule, prefer, conflict, abducible, sort or layer".into()),
                ))
            }
        }
    }
    theory.extend_domain();
    Ok(Parsed { theory, spans })
}

fn claim_label(theory: &Theory, label: &str, span: &SourceSpan) -> PResult<()> {
    if theory.label_level(label).is_some() {
        Err(ParseError::new(span.clone(), format!("duplicate label {label}"), None))
    } else {
        Ok(())
    }
}

/// Parse a single literal, as used on the command line and on the wire.
pub fn parse_literal(text: &str) -> Result<Literal, ParseError> {
    let mut p = Parser::new(text, "<literal>")?;
    let (lit, _) = p.literal()?;
    if !p.at(&Tok::Eof) {
        return p.unexpected("end of literal");
    }
    Ok(lit)
}

/// Parse a `.scn` scenario file.
pub fn parse_scenario(text: &str, file: &str) -> Result<Scenario, ParseError> {
    let mut p = Parser::new(text, file)?;
    let mut name = None;
    let mut pack = None;
    let mut semantics = Semantics::Grounded;
    let mut stages: Vec<Vec<Literal>> = Vec::new();
    let mut expects = Vec::new();

    loop {
        let kw = p.peek().clone();
        let word = match &kw.tok {
            Tok::Eof => break,
            Tok::Ident(w) => w.clone(),
            _ => return p.unexpected("a scenario statement"),
        };
        p.bump();
        match word.as_str() {
            "scenario" => {
                name = Some(p.ident("a scenario name")?.0);
                p.end()?;
            }
            "pack" => {
                pack = Some(p.ident("a pack name")?.0);
                p.end()?;
            }
            "semantics" => {
                let (s, span) = p.ident("grounded or preferred")?;
                p.end()?;
                semantics = Semantics::parse(&s).ok_or_else(|| {
                    ParseError::new(span, format!("unknown semantics {s}"), None)
                })?;
            }
            "stage" => {
                let (n, span) = p.int("a stage number")?;
                p.expect(Tok::Colon)?;
                let lits = p.literal_list()?;
                p.end()?;
                if n != stages.len() + 1 {
                    return Err(ParseError::new(
                        span,
                        format!("stage {n} out of sequence"),
                        Some(format!("stage {}", stages.len() + 1)),
                    ));
                }
                stages.push(lits);
            }
            "expect" => {
                let (stage, sspan) = p.int("a stage number")?;
                p.expect(Tok::Colon)?;
                let (goal, _) = p.literal()?;
                p.expect(Tok::FatArrow)?;
                let (status, vspan) = p.ident("a status")?;
                p.end()?;
                let status = Status::parse(&status).ok_or_else(|| {
                    ParseError::new(
                        vspan,
                        format!("unknown status {status}"),
                        Some("accepted, accepted-credulous, rejected or no-argument".into()),
                    )
                })?;
                expects.push(ScenarioExpect {
                    stage,
                    goal,
                    status,
                    span: sspan,
                });
            }
            _ => {
                return Err(ParseError::new(
                    kw.span,
                    format!("unknown statement `{word}`"),
                    Some("scenario, pack, semantics, stage or expect".into()),
                ))
            }
        }
    }

    let eof = p.peek().span.clone();
    let pack = pack.ok_or_else(|| ParseError::new(eof.clone(), "missing pack statement", None))?;
    for e in &expects {
        if e.stage == 0 || e.stage > stages.len() {
            return Err(ParseError::new(
                e.span.clone(),
                format!("expectation for undefined stage {}", e.stage),
                None,
            ));
        }
    }
    let scenario = Scenario {
        name: name.unwrap_or_else(|| file.to_string()),
        pack,
        semantics,
        stages,
        expects,
    };
    for goal in scenario.goals() {
        for stage in 1..=scenario.stages.len() {
            if !scenario.expects.iter().any(|e| &e.goal == goal && e.stage == stage) {
                return Err(ParseError::new(
                    eof,
                    format!("no expectation for {goal} at stage {stage}"),
                    None,
                ));
            }
        }
    }
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::Pos;

    #[test]
    fn rule_with_body() {
        let p = parse("rule a2: perform(A,C) <- sourceIP(A,IP), geoloc(IP,C).", "t").unwrap();
        let r = &p.theory.rules[0];
        assert_eq!(r.label, "a2");
        assert_eq!(r.body.len(), 2);
        assert_eq!(r.head, Literal::new("perform", alloc::vec![Term::var("A"), Term::var("C")]));
    }

    #[test]
    fn priority_levels_are_inferred() {
        let src = "rule a1: p. rule a2: neg p. rule a3: neg p.\n\
                   prefer b1: a2 > a1. prefer b2: a1 > a3.\n\
                   prefer c1: b2 > b1.";
        let t = parse(src, "t").unwrap().theory;
        assert_eq!(t.priority("b1").unwrap().level, 1);
        assert_eq!(t.priority("c1").unwrap().level, 2);
    }

    #[test]
    fn dangling_arrow_is_reported_at_the_arrow() {
        let e = parse("rule x: p(A) <-", "t").unwrap_err();
        assert_eq!(e.span.start, Pos { line: 1, col: 14 });
        assert_eq!(e.span.end, Pos { line: 1, col: 15 });
    }

    #[test]
    fn forward_reference_rejected() {
        let e = parse("prefer b1: a2 > a1.\nrule a1: p.\nrule a2: q.", "t").unwrap_err();
        assert!(e.message.contains("unknown label a2"), "{e}");
        assert_eq!(e.span.start.line, 1);
    }

    #[test]
    fn duplicate_label_rejected() {
        let e = parse("rule a1: p.\nrule a1: q.", "t").unwrap_err();
        assert_eq!(e.message, "duplicate label a1");
        assert_eq!(e.span.start, Pos { line: 2, col: 6 });
    }

    #[test]
    fn facts_must_be_ground_and_consistent() {
        assert!(parse("fact p(X).", "t").is_err());
        assert!(parse("fact p(a). fact neg p(a).", "t").is_err());
    }

    #[test]
    fn scenario_requires_full_expectations() {
        let ok = "scenario s. pack demo.\nstage 1: p(a).\nstage 2: q(a).\n\
                  expect 1: r(a) => accepted.\nexpect 2: r(a) => rejected.";
        let s = parse_scenario(ok, "s").unwrap();
        assert_eq!(s.stages.len(), 2);
        assert_eq!(s.expects[1].status, Status::Rejected);
        let missing = "pack demo. stage 1: p(a). stage 2: q(a). expect 1: r(a) => accepted.";
        assert!(parse_scenario(missing, "s").is_err());
    }

    #[test]
    fn literal_round_trip() {
        let l = parse_literal("neg access(x,d,permitted)").unwrap();
        assert!(l.negated);
        assert_eq!(parse_literal(&l.to_string()).unwrap(), l);
        assert!(parse_literal("p(a) q").is_err());
    }
}
