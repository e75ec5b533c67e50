//! Argument construction, defeat filtering and acceptance.

mod arguments;
mod graph;
pub mod priority;
pub mod semantics;

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

pub use arguments::{build_arguments, derive_closure, Argument};
pub use graph::{build_defeat_graph, compare_at_conflict, context_for, Attack, DefeatGraph};
pub use priority::{compare_instances, Comparison, Preference};

use crate::grounder::{self, GroundError, GroundTheory, DEFAULT_INSTANCE_CAP};
use crate::kernel::{Literal, Subst, Theory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Semantics {
    #[default]
    Grounded,
    Preferred,
}

impl Semantics {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "grounded" => Some(Semantics::Grounded),
            "preferred" => Some(Semantics::Preferred),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Config {
    pub instance_cap: usize,
    pub argument_cap: usize,
    /// Largest reduced graph handed to exact preferred enumeration.
    pub preferred_cap: usize,
    pub semantics: Semantics,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            instance_cap: DEFAULT_INSTANCE_CAP,
            argument_cap: 50_000,
            preferred_cap: 20,
            semantics: Semantics::Grounded,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    AcceptedSceptically,
    AcceptedCredulously,
    Rejected,
    NoArgument,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::AcceptedSceptically => "accepted",
            Status::AcceptedCredulously => "accepted-credulous",
            Status::Rejected => "rejected",
            Status::NoArgument => "no-argument",
        }
    }

    pub fn parse(s: &str) -> Option<Status> {
        match s {
            "accepted" => Some(Status::AcceptedSceptically),
            "accepted-credulous" => Some(Status::AcceptedCredulously),
            "rejected" => Some(Status::Rejected),
            "no-argument" => Some(Status::NoArgument),
            _ => None,
        }
    }

    pub fn is_accepted(self) -> bool {
        matches!(self, Status::AcceptedSceptically | Status::AcceptedCredulously)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub goal: Literal,
    pub status: Status,
    /// Arguments for the goal backing the status: the accepted ones, or all
    /// of them when rejected.
    pub witnesses: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveError {
    Ground(GroundError),
    TooManyArguments { cap: usize },
    GraphTooLarge { nodes: usize, cap: usize },
    InconsistentEvidence(String, String),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::Ground(e) => write!(f, "{e}"),
            SolveError::TooManyArguments { cap } => {
                write!(f, "argument construction exceeds the cap of {cap}")
            }
            SolveError::GraphTooLarge { nodes, cap } => write!(
                f,
                "{nodes} arguments after reduction exceed the preferred-semantics cap of {cap}; use grounded semantics"
            ),
            SolveError::InconsistentEvidence(a, b) => write!(f, "evidence {b} contradicts {a}"),
        }
    }
}

impl core::error::Error for SolveError {}

impl From<GroundError> for SolveError {
    fn from(e: GroundError) -> Self {
        SolveError::Ground(e)
    }
}

/// Everything computed for one theory plus evidence: ground program,
/// arguments, defeat graph and grounded extension.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub ground: GroundTheory,
    pub graph: DefeatGraph,
    pub grounded: BTreeSet<usize>,
    pub defeaters: Vec<Vec<usize>>,
    pub config: Config,
}

impl Analysis {
    /// `hints` are literals (typically query goals) whose constants must be
    /// part of the grounding domain.
    pub fn new(
        theory: &Theory,
        evidence: &[Literal],
        hints: &[Literal],
        config: Config,
    ) -> Result<Self, SolveError> {
        let mut t = theory.clone();
        for e in evidence {
            if t.facts.contains(e) {
                continue;
            }
            t.add_fact(e.clone()).map_err(|err| match err {
                crate::kernel::KernelError::Contradiction(a, b) => {
                    SolveError::InconsistentEvidence(a, b)
                }
                other => SolveError::InconsistentEvidence(String::new(), other.to_string()),
            })?;
        }
        let extra: BTreeSet<String> = hints
            .iter()
            .flat_map(|h| h.constants().map(ToString::to_string))
            .collect();
        let ground = grounder::ground_derivable(&t, &extra, hints, config.instance_cap)?;
        let args = build_arguments(&ground, config.argument_cap)?;
        let graph = build_defeat_graph(&ground, args);
        let defeaters = graph.defeaters();
        let grounded = semantics::grounded(&defeaters);
        Ok(Analysis {
            ground,
            graph,
            grounded,
            defeaters,
            config,
        })
    }

    pub fn arguments(&self) -> &[Argument] {
        &self.graph.arguments
    }

    pub fn arguments_for(&self, goal: &Literal) -> Vec<usize> {
        self.graph
            .arguments
            .iter()
            .filter(|a| &a.conclusion == goal)
            .map(|a| a.id)
            .collect()
    }

    /// Ground instances of `pattern` among facts and rule-instance heads.
    pub fn ground_goals(&self, pattern: &Literal) -> Vec<Literal> {
        if pattern.is_ground() {
            return alloc::vec![pattern.clone()];
        }
        let mut out: BTreeSet<Literal> = BTreeSet::new();
        let heads = self.ground.instances.iter().map(|i| &i.head);
        for cand in self.ground.facts().iter().chain(heads) {
            if pattern.match_ground(cand, &mut Subst::new()) {
                out.insert(cand.clone());
            }
        }
        out.into_iter().collect()
    }

    /// Preferred extensions of the part of the graph that can reach `args`,
    /// in global argument ids.
    pub fn preferred_around(&self, args: &[usize]) -> Result<Vec<Vec<usize>>, SolveError> {
        let nodes = semantics::ancestors(&self.defeaters, args);
        let (sub, map) = semantics::restrict(&self.defeaters, &nodes);
        let exts = semantics::preferred(&sub, self.config.preferred_cap)?;
        Ok(exts
            .into_iter()
            .map(|e| e.into_iter().map(|i| map[i]).collect())
            .collect())
    }

    pub fn verdict(&self, goal: &Literal) -> Result<Verdict, SolveError> {
        let args = self.arguments_for(goal);
        let verdict = |status, witnesses| Verdict {
            goal: goal.clone(),
            status,
            witnesses,
        };
        if args.is_empty() {
            return Ok(verdict(Status::NoArgument, Vec::new()));
        }
        let in_grounded: Vec<usize> = args
            .iter()
            .copied()
            .filter(|a| self.grounded.contains(a))
            .collect();
        if !in_grounded.is_empty() {
            return Ok(verdict(Status::AcceptedSceptically, in_grounded));
        }
        let exts = match self.preferred_around(&args) {
            Ok(e) => e,
            Err(SolveError::GraphTooLarge { .. })
                if self.config.semantics == Semantics::Grounded =>
            {
                return Ok(verdict(Status::Rejected, args));
            }
            Err(e) => return Err(e),
        };
        let credulous: BTreeSet<usize> = exts
            .iter()
            .flat_map(|e| e.iter().copied().filter(|a| args.contains(a)))
            .collect();
        if credulous.is_empty() {
            return Ok(verdict(Status::Rejected, args));
        }
        let in_all = exts
            .iter()
            .all(|e| e.iter().any(|a| args.contains(a)));
        let status = if self.config.semantics == Semantics::Preferred && in_all {
            Status::AcceptedSceptically
        } else {
            Status::AcceptedCredulously
        };
        Ok(verdict(status, credulous.into_iter().collect()))
    }

    pub fn query(&self, pattern: &Literal) -> Result<Vec<Verdict>, SolveError> {
        self.ground_goals(pattern)
            .iter()
            .map(|g| self.verdict(g))
            .collect()
    }
}

/// Decide `goal` (possibly with variables) against `theory` plus `evidence`.
pub fn query(
    theory: &Theory,
    evidence: &[Literal],
    goal: &Literal,
    config: Config,
) -> Result<Vec<Verdict>, SolveError> {
    Analysis::new(theory, evidence, core::slice::from_ref(goal), config)?.query(goal)
}
