//! Staged golden scenarios: evidence accumulates stage by stage and every
//! goal is checked against its expected status at every stage.

use std::path::Path;

use argora_core::dsl::{parse_scenario, ParseError, Scenario};
use argora_core::solver::{Analysis, SolveError};
use argora_core::{Config, Literal, Status, Theory};

use crate::packs::{self, LoadError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub goal: Literal,
    pub expected: Status,
    pub actual: Status,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.expected == self.actual
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageResult {
    pub stage: usize,
    pub evidence: Vec<Literal>,
    pub checks: Vec<Check>,
}

impl StageResult {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioReport {
    pub name: String,
    pub pack: String,
    pub stages: Vec<StageResult>,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.stages.iter().all(StageResult::passed)
    }
}

#[derive(Debug)]
pub enum ScenarioError {
    Parse { source: String, error: ParseError },
    Load(LoadError),
    Solve(SolveError),
}

impl std::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScenarioError::Parse { error, .. } => write!(f, "{error}"),
            ScenarioError::Load(e) => write!(f, "{e}"),
            ScenarioError::Solve(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

impl From<LoadError> for ScenarioError {
    fn from(e: LoadError) -> Self {
        ScenarioError::Load(e)
    }
}

impl From<SolveError> for ScenarioError {
    fn from(e: SolveError) -> Self {
        ScenarioError::Solve(e)
    }
}

/// Run `scenario` against `theory`, querying cumulatively per stage.
pub fn run(scenario: &Scenario, theory: &Theory) -> Result<ScenarioReport, SolveError> {
    let config = Config {
        semantics: scenario.semantics,
        ..Config::default()
    };
    let goals: Vec<Literal> = scenario.goals().into_iter().cloned().collect();
    let mut evidence: Vec<Literal> = Vec::new();
    let mut stages = Vec::new();
    for (i, added) in scenario.stages.iter().enumerate() {
        let stage = i + 1;
        evidence.extend(added.iter().cloned());
        let analysis = Analysis::new(theory, &evidence, &goals, config)?;
        let mut checks = Vec::new();
        for e in scenario.expects.iter().filter(|e| e.stage == stage) {
            checks.push(Check {
                goal: e.goal.clone(),
                expected: e.status,
                actual: analysis.verdict(&e.goal)?.status,
            });
        }
        stages.push(StageResult {
            stage,
            evidence: evidence.clone(),
            checks,
        });
    }
    Ok(ScenarioReport {
        name: scenario.name.clone(),
        pack: scenario.pack.clone(),
        stages,
    })
}

/// Resolve a scenario's `pack` line: a shipped pack name, or an `.arg`
/// path relative to the scenario file.
pub fn resolve_pack(pack: &str, base: Option<&Path>) -> Result<Theory, LoadError> {
    if let Some(dir) = base {
        let candidate = dir.join(pack);
        if candidate.is_file() {
            return packs::load_theory(&candidate.to_string_lossy()).map(|(_, t)| t);
        }
    }
    packs::load_pack(pack)
}

/// Parse and run scenario text. `path` locates packs given as paths.
pub fn run_text(text: &str, path: &str) -> Result<ScenarioReport, ScenarioError> {
    let scenario = parse_scenario(text, path).map_err(|error| ScenarioError::Parse {
        source: text.to_string(),
        error,
    })?;
    let base = Path::new(path).parent();
    let theory = resolve_pack(&scenario.pack, base)?;
    Ok(run(&scenario, &theory)?)
}

/// Human-readable per-stage summary.
pub fn render(report: &ScenarioReport) -> String {
    let mut out = format!("scenario {} (pack {})\n", report.name, report.pack);
    for s in &report.stages {
        let mark = if s.passed() { "pass" } else { "FAIL" };
        let ok = s.checks.iter().filter(|c| c.passed()).count();
        out.push_str(&format!(
            "  stage {}: {mark} ({ok}/{} checks)\n",
            s.stage,
            s.checks.len()
        ));
        for c in s.checks.iter().filter(|c| !c.passed()) {
            out.push_str(&format!(
                "    {}: expected {}, got {}\n",
                c.goal, c.expected, c.actual
            ));
        }
    }
    out
}
