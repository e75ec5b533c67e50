//! Command-line front end. Output goes to injected writers so commands can
//! be exercised in tests; `main` only parses arguments and exits.
//!
//! Exit codes: 0 ok, 1 scenario failure, 2 usage or parse error,
//! 3 unresolved conflicts.

use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::sync::Arc;

use argora_core::abduction::{abduce, Tier, DEFAULT_CANDIDATE_CAP};
use argora_core::conflicts::{detect_conflicts, Resolution};
use argora_core::dsl::{self, parse_literal, ParseError, SourceSpan};
use argora_core::explain::{explain_verdict, render_text};
use argora_core::solver::Analysis;
use argora_core::{Config, Literal, Semantics, Theory};
use clap::{Parser, Subcommand, ValueEnum};

use crate::packs::{self, LoadError};
use crate::scenario::{self, ScenarioError};
use crate::service::{self, AppState};
use crate::session::{self, Session};
use crate::wire::{to_json, AbductionDoc, ConflictReportDoc, ExplanationDoc, VerdictDoc};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SCENARIO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFLICTS: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "argora", version, about = "Preference-based argumentation engine")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SemanticsArg {
    Grounded,
    Preferred,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TierArg {
    Sceptical,
    Credulous,
}

#[derive(clap::Args, Debug)]
pub struct Input {
    /// Theory file (`.arg`) or shipped pack name
    pub theory: String,
    /// Evidence literal, repeatable, e.g. --assert 'sourceIP(a,ip1)'
    #[arg(long = "assert", value_name = "LIT")]
    pub assert: Vec<String>,
    #[arg(long, value_enum, default_value = "grounded")]
    pub semantics: SemanticsArg,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse and validate a theory
    Check { theory: String },
    /// Decide a goal pattern
    Query {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        goal: String,
        #[arg(long)]
        json: bool,
    },
    /// Explain the verdict on a ground goal
    Explain {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        goal: String,
        #[arg(long)]
        json: bool,
        /// Attach assumption hints of at most this size
        #[arg(long, default_value_t = 0)]
        hints: usize,
    },
    /// Report rule pairs with incompatible conclusions
    Conflicts {
        theory: String,
        /// Show priority suggestions for unresolved pairs
        #[arg(long)]
        suggest: bool,
        #[arg(long)]
        json: bool,
    },
    /// Minimal abducible assumptions that would accept a goal
    Abduce {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        goal: String,
        #[arg(long, default_value_t = 2)]
        max: usize,
        #[arg(long, value_enum, default_value = "sceptical")]
        tier: TierArg,
        #[arg(long)]
        json: bool,
    },
    /// Run a staged scenario file
    Scenario {
        file: String,
        #[arg(long)]
        json: bool,
    },
    /// Interactive session
    Repl { theory: String },
    /// Run the HTTP service
    Serve {
        /// Theory file or pack offered as the default pack
        theory: Option<String>,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 7878)]
        port: u16,
        /// Origin allowed by CORS, or `*`
        #[arg(long)]
        allow_origin: Option<String>,
        /// Directory of per-session snapshot files
        #[arg(long)]
        snapshots: Option<PathBuf>,
        /// Serve static files from this directory
        #[arg(long)]
        serve_ui: Option<PathBuf>,
    },
}

/// Output styling. Colour is off when `NO_COLOR` is set or the stream is
/// not a terminal.
#[derive(Clone, Copy, Debug, Default)]
pub struct Style {
    pub color: bool,
}

impl Style {
    pub fn detect() -> Self {
        use std::io::IsTerminal;
        let no_color = std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty());
        Style {
            color: !no_color && std::io::stdout().is_terminal(),
        }
    }

    fn paint(&self, code: &str, text: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }

    fn error(&self) -> String {
        self.paint("1;31", "error")
    }

    fn status(&self, s: &str) -> String {
        match s {
            "accepted" => self.paint("32", s),
            "accepted-credulous" => self.paint("33", s),
            "rejected" => self.paint("31", s),
            _ => s.to_string(),
        }
    }
}

/// The offending source line with a caret run under `span`.
pub fn snippet(source: &str, span: &SourceSpan) -> String {
    let line_no = span.start.line.max(1) as usize;
    let line = source.lines().nth(line_no - 1).unwrap_or("");
    let start = (span.start.col.max(1) as usize).min(line.chars().count() + 1);
    let end = if span.end.line == span.start.line {
        (span.end.col as usize).max(start)
    } else {
        line.chars().count().max(start)
    };
    let gutter = line_no.to_string();
    let pad = " ".repeat(gutter.len());
    format!(
        "{pad} |\n{gutter} | {line}\n{pad} | {}{}\n",
        " ".repeat(start - 1),
        "^".repeat(end - start + 1)
    )
}

fn parse_error(err: &mut dyn Write, style: Style, source: &str, e: &ParseError) {
    let _ = writeln!(err, "{}: {e}", style.error());
    let _ = write!(err, "{}", snippet(source, &e.span));
}

fn load_error(err: &mut dyn Write, style: Style, e: &LoadError) {
    match e {
        LoadError::Parse { source, error } => parse_error(err, style, source, error),
        other => {
            let _ = writeln!(err, "{}: {other}", style.error());
        }
    }
}

fn literal_arg(err: &mut dyn Write, style: Style, text: &str) -> Option<Literal> {
    match parse_literal(text) {
        Ok(l) => Some(l),
        Err(e) => {
            parse_error(err, style, text, &e);
            None
        }
    }
}

struct Loaded {
    theory: Theory,
    evidence: Vec<Literal>,
    config: Config,
}

fn load_input(err: &mut dyn Write, style: Style, input: &Input) -> Result<Loaded, i32> {
    let (_, theory) = packs::load_theory(&input.theory).map_err(|e| {
        load_error(err, style, &e);
        EXIT_USAGE
    })?;
    let mut evidence = Vec::new();
    for a in &input.assert {
        let l = literal_arg(err, style, a).ok_or(EXIT_USAGE)?;
        if !l.is_ground() {
            let _ = writeln!(err, "{}: evidence {l} contains variables", style.error());
            return Err(EXIT_USAGE);
        }
        evidence.push(l);
    }
    let semantics = match input.semantics {
        SemanticsArg::Grounded => Semantics::Grounded,
        SemanticsArg::Preferred => Semantics::Preferred,
    };
    Ok(Loaded {
        theory,
        evidence,
        config: Config {
            semantics,
            ..Config::default()
        },
    })
}

macro_rules! tryx {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(code) => return code,
        }
    };
}

/// Execute one command. Returns the process exit code.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write, style: Style) -> i32 {
    match cli.command {
        Command::Check { theory } => check(&theory, out, err, style),
        Command::Query { input, goal, json } => {
            let l = tryx!(load_input(err, style, &input));
            let Some(goal) = literal_arg(err, style, &goal) else {
                return EXIT_USAGE;
            };
            let result = Analysis::new(&l.theory, &l.evidence, std::slice::from_ref(&goal), l.config)
                .and_then(|an| Ok((an.query(&goal)?, an)));
            let (verdicts, an) = match result {
                Ok(v) => v,
                Err(e) => return engine_error(err, style, &e),
            };
            let docs: Vec<VerdictDoc> = verdicts.iter().map(|v| VerdictDoc::new(&an, v)).collect();
            if json {
                let _ = writeln!(out, "{}", to_json(&docs));
            } else {
                let _ = write!(out, "{}", verdict_table(&docs, style));
            }
            EXIT_OK
        }
        Command::Explain {
            input,
            goal,
            json,
            hints,
        } => {
            let l = tryx!(load_input(err, style, &input));
            let Some(goal) = literal_arg(err, style, &goal) else {
                return EXIT_USAGE;
            };
            if !goal.is_ground() {
                let _ = writeln!(err, "{}: explain needs a ground goal, got {goal}", style.error());
                return EXIT_USAGE;
            }
            match explain_verdict(&l.theory, &l.evidence, &goal, l.config, hints) {
                Ok(e) if json => {
                    let _ = writeln!(out, "{}", to_json(&ExplanationDoc::from(&e)));
                    EXIT_OK
                }
                Ok(e) => {
                    let _ = write!(out, "{}", render_text(&e));
                    EXIT_OK
                }
                Err(e) => engine_error(err, style, &e),
            }
        }
        Command::Conflicts {
            theory,
            suggest,
            json,
        } => conflicts(&theory, suggest, json, out, err, style),
        Command::Abduce {
            input,
            goal,
            max,
            tier,
            json,
        } => {
            let l = tryx!(load_input(err, style, &input));
            let Some(goal) = literal_arg(err, style, &goal) else {
                return EXIT_USAGE;
            };
            let tier = match tier {
                TierArg::Sceptical => Tier::Sceptical,
                TierArg::Credulous => Tier::Credulous,
            };
            let found = match abduce(
                &l.theory,
                &l.evidence,
                &goal,
                tier,
                max,
                l.config,
                DEFAULT_CANDIDATE_CAP,
            ) {
                Ok(f) => f,
                Err(e) => return engine_error(err, style, &e),
            };
            let doc = AbductionDoc::new(&goal, tier, &found);
            if json {
                let _ = writeln!(out, "{}", to_json(&doc));
            } else {
                let _ = write!(out, "{}", abduction_text(&doc, max));
            }
            EXIT_OK
        }
        Command::Scenario { file, json } => run_scenario(&file, json, out, err, style),
        Command::Repl { theory } => {
            let (name, theory) = match packs::load_theory(&theory) {
                Ok(t) => t,
                Err(e) => {
                    load_error(err, style, &e);
                    return EXIT_USAGE;
                }
            };
            let mut s = Session::new("repl", name, theory);
            let stdin = std::io::stdin();
            repl(&mut s, stdin.lock(), out, true);
            EXIT_OK
        }
        Command::Serve {
            theory,
            host,
            port,
            allow_origin,
            snapshots,
            serve_ui,
        } => {
            let extra = match theory.as_deref().map(packs::load_theory).transpose() {
                Ok(t) => t,
                Err(e) => {
                    load_error(err, style, &e);
                    return EXIT_USAGE;
                }
            };
            let mut state = AppState::new(extra);
            if let Some(dir) = snapshots {
                state = match state.with_snapshots(dir) {
                    Ok(s) => s,
                    Err(e) => {
                        let _ = writeln!(err, "{}: snapshots: {e}", style.error());
                        return EXIT_USAGE;
                    }
                };
            }
            let app = service::router(Arc::new(state), allow_origin.as_deref(), serve_ui);
            let rt = tokio::runtime::Runtime::new().expect("tokio runtime");
            match rt.block_on(service::serve(app, &host, port)) {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    let _ = writeln!(err, "{}: {e}", style.error());
                    EXIT_USAGE
                }
            }
        }
    }
}

fn engine_error(err: &mut dyn Write, style: Style, e: &dyn std::fmt::Display) -> i32 {
    let _ = writeln!(err, "{}: {e}", style.error());
    EXIT_USAGE
}

fn check(theory: &str, out: &mut dyn Write, err: &mut dyn Write, style: Style) -> i32 {
    match packs::load_theory(theory) {
        Ok((name, t)) => {
            let _ = writeln!(
                out,
                "{name}: ok ({} rules, {} priorities, {} facts)",
                t.rules.len(),
                t.priorities.len(),
                t.facts.len()
            );
            EXIT_OK
        }
        Err(e) => {
            load_error(err, style, &e);
            EXIT_USAGE
        }
    }
}

pub fn verdict_table(docs: &[VerdictDoc], style: Style) -> String {
    if docs.is_empty() {
        return "no matching goals\n".into();
    }
    let gw = docs.iter().map(|d| d.goal.len()).max().unwrap_or(0).max(4);
    let sw = docs.iter().map(|d| d.status.len()).max().unwrap_or(0).max(6);
    let mut s = format!("{:gw$}  {:sw$}  support\n", "goal", "status");
    for d in docs {
        let support: Vec<String> = d.support.iter().map(|labels| labels.join("+")).collect();
        let pad = " ".repeat(sw - d.status.len());
        s.push_str(&format!(
            "{:gw$}  {}{pad}  {}\n",
            d.goal,
            style.status(&d.status),
            support.join(" | ")
        ));
    }
    s
}

fn abduction_text(doc: &AbductionDoc, max: usize) -> String {
    let mut s = format!("goal: {} ({} tier)\n", doc.goal, doc.tier);
    if doc.answers.is_empty() {
        s.push_str(&format!("no assumption set of size <= {max} suffices\n"));
    }
    for a in &doc.answers {
        if a.assume.is_empty() {
            s.push_str(&format!("already {} with no assumptions\n", a.status));
        } else {
            s.push_str(&format!("assume {} => {}\n", a.assume.join(", "), a.status));
        }
    }
    if doc.truncated {
        s.push_str(&format!("search stopped after {} candidates\n", doc.explored));
    }
    s
}

pub fn conflicts_text(reports: &[ConflictReportDoc], suggest: bool) -> String {
    let mut s = String::new();
    for r in reports {
        if r.resolution.decided {
            s.push_str(&format!(
                "{} vs {}: decided, {} prevails by {}\n",
                r.rule_a,
                r.rule_b,
                r.resolution.winner.as_deref().unwrap_or("?"),
                r.resolution.decided_by.join(", ")
            ));
        } else {
            s.push_str(&format!("{} vs {}: unresolved\n", r.rule_a, r.rule_b));
        }
        s.push_str(&format!("  heads: {} / {}\n", r.head_a, r.head_b));
        s.push_str(&format!("  witness: {}\n", r.witness.join(", ")));
        if let (true, Some(p)) = (suggest, &r.suggestion) {
            let when = if p.when.is_empty() {
                String::new()
            } else {
                format!(" when {}", p.when.join(", "))
            };
            s.push_str(&format!(
                "  suggest: prefer {}: {} > {}{when}.\n",
                p.label, p.higher, p.lower
            ));
        }
    }
    let open = reports.iter().filter(|r| !r.resolution.decided).count();
    s.push_str(&format!("{} conflicts, {open} unresolved\n", reports.len()));
    s
}

fn conflicts(
    theory: &str,
    suggest: bool,
    json: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
    style: Style,
) -> i32 {
    let t = match packs::load_theory(theory) {
        Ok((_, t)) => t,
        Err(e) => {
            load_error(err, style, &e);
            return EXIT_USAGE;
        }
    };
    let reports = detect_conflicts(&t);
    let docs: Vec<ConflictReportDoc> = reports.iter().map(ConflictReportDoc::from).collect();
    if json {
        let _ = writeln!(out, "{}", to_json(&docs));
    } else {
        let _ = write!(out, "{}", conflicts_text(&docs, suggest));
    }
    if reports.iter().any(|r| r.resolution == Resolution::Unresolved) {
        EXIT_CONFLICTS
    } else {
        EXIT_OK
    }
}

fn run_scenario(
    file: &str,
    json: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
    style: Style,
) -> i32 {
    let (text, path) = match std::fs::read_to_string(file) {
        Ok(t) => (t, file.to_string()),
        Err(e) => match packs::find_scenario(file) {
            Some(p) => (p.source.to_string(), format!("packs/{}", p.file)),
            None => {
                let _ = writeln!(err, "{}: {file}: {e}", style.error());
                return EXIT_USAGE;
            }
        },
    };
    let report = match scenario::run_text(&text, &path) {
        Ok(r) => r,
        Err(ScenarioError::Parse { source, error }) => {
            parse_error(err, style, &source, &error);
            return EXIT_USAGE;
        }
        Err(ScenarioError::Load(e)) => {
            load_error(err, style, &e);
            return EXIT_USAGE;
        }
        Err(e) => return engine_error(err, style, &e),
    };
    if json {
        let stages: Vec<serde_json::Value> = report
            .stages
            .iter()
            .map(|s| {
                serde_json::json!({
                    "stage": s.stage,
                    "passed": s.passed(),
                    "checks": s.checks.iter().map(|c| serde_json::json!({
                        "goal": c.goal.to_string(),
                        "expected": c.expected.as_str(),
                        "actual": c.actual.as_str(),
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        let doc = serde_json::json!({
            "scenario": report.name,
            "pack": report.pack,
            "passed": report.passed(),
            "stages": stages,
        });
        let _ = writeln!(out, "{}", to_json(&doc));
    } else {
        let _ = write!(out, "{}", scenario::render(&report));
    }
    if report.passed() {
        EXIT_OK
    } else {
        EXIT_SCENARIO
    }
}

const REPL_HELP: &str = "\
assert <lit>[; <lit>...]     add evidence
retract <lit>[; <lit>...]    remove evidence
query <pattern>              verdicts for matching goals
explain <goal>               explanation of a ground goal
conflicts                    conflict report with suggestions
prefer <label>: <higher> > <lower> [when <lits>]
abduce [k] <goal>            minimal assumptions, size <= k (default 2)
evidence                     active evidence
save <file>                  write a snapshot
quit
";

fn literals(text: &str) -> session::Result<Vec<Literal>> {
    text.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(session::literal)
        .collect()
}

/// Parse `label: higher > lower [when body]` against the session theory,
/// so it gets the same checks as a priority written in a pack.
fn priority_line(s: &Session, text: &str) -> session::Result<(String, String, String, Vec<Literal>)> {
    let src = format!("{}prefer {}.\n", dsl::print(&s.theory), text.trim_end_matches('.'));
    let parsed = dsl::parse(&src, "<prefer>")?;
    let p = parsed
        .theory
        .priorities
        .iter()
        .find(|p| s.theory.priority(&p.label).is_none())
        .ok_or_else(|| {
            session::SessionError::new(
                session::ErrorKind::Unprocessable,
                "duplicate-label",
                "priority label already in use",
            )
        })?;
    Ok((p.label.clone(), p.higher.clone(), p.lower.clone(), p.body.clone()))
}

/// One REPL command. Returns false on `quit`.
pub fn repl_command(s: &mut Session, line: &str, out: &mut dyn Write) -> bool {
    let line = line.trim();
    let (verb, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
    let rest = rest.trim();
    let result: session::Result<String> = match verb {
        "" => Ok(String::new()),
        "quit" | "exit" => return false,
        "help" => Ok(REPL_HELP.to_string()),
        "assert" => literals(rest)
            .and_then(|ls| s.evidence(&ls, &[]))
            .map(|r| format!("revision {r}\n")),
        "retract" => literals(rest)
            .and_then(|ls| s.evidence(&[], &ls))
            .map(|r| format!("revision {r}\n")),
        "evidence" => Ok(s
            .active()
            .iter()
            .map(|l| format!("{l}\n"))
            .collect::<String>()),
        "query" => session::literal(rest)
            .and_then(|g| s.query(&g))
            .map(|docs| verdict_table(&docs, Style::default())),
        "explain" => session::literal(rest).and_then(|g| {
            if !g.is_ground() {
                return Err(session::SessionError::new(
                    session::ErrorKind::BadRequest,
                    "not-ground",
                    format!("{g} contains variables"),
                ));
            }
            let e = explain_verdict(&s.theory, s.active(), &g, s.config, 0)?;
            Ok(render_text(&e))
        }),
        "conflicts" => Ok(conflicts_text(&s.conflicts(), true)),
        "prefer" => priority_line(s, rest).and_then(|(label, h, l, body)| {
            s.add_priority(&label, &h, &l, body)
                .map(|r| format!("revision {r}\n"))
        }),
        "abduce" => {
            let (max, goal) = match rest.split_once(char::is_whitespace) {
                Some((k, g)) if k.parse::<usize>().is_ok() => (k.parse().unwrap(), g),
                _ => (2, rest),
            };
            session::literal(goal)
                .and_then(|g| s.abduce(&g, Tier::Sceptical, max))
                .map(|d| abduction_text(&d, max))
        }
        "save" => std::fs::write(rest, s.snapshot())
            .map(|_| format!("saved {rest}\n"))
            .map_err(|e| {
                session::SessionError::new(session::ErrorKind::Engine, "io", e.to_string())
            }),
        other => Ok(format!("unknown command {other}; try help\n")),
    };
    let _ = match result {
        Ok(text) => write!(out, "{text}"),
        Err(e) => writeln!(out, "error [{}] {}", e.code, e.message),
    };
    true
}

pub fn repl(s: &mut Session, input: impl BufRead, out: &mut dyn Write, prompt: bool) {
    let mut lines = input.lines();
    loop {
        if prompt {
            let _ = write!(out, "argora[{}]> ", s.revision);
            let _ = out.flush();
        }
        let Some(Ok(line)) = lines.next() else { break };
        if !repl_command(s, &line, out) {
            break;
        }
    }
}
