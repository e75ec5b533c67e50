//! The theories and scenarios shipped in `packs/`, embedded at build time.

use std::fmt;
use std::path::{Path, PathBuf};

use argora_core::dsl::{parse, ParseError, Parsed};
use argora_core::{Diagnostic, Theory};

pub struct Pack {
    pub name: &'static str,
    pub file: &'static str,
    pub source: &'static str,
}

macro_rules! pack {
    ($name:literal, $file:literal) => {
        Pack {
            name: $name,
            file: $file,
            source: include_str!(concat!("../../../packs/", $file)),
        }
    };
}

pub static PACKS: &[Pack] = &[
    pack!("attribution-text", "attribution_text.arg"),
    pack!("attribution-fig2", "attribution_fig2.arg"),
    pack!("attribution-ladder", "attribution_ladder.arg"),
    pack!("ehealth", "ehealth.arg"),
    pack!("ehealth-nopriorities", "ehealth_nopriorities.arg"),
];

pub static SCENARIOS: &[Pack] = &[
    pack!("ssh-attack", "ssh_attack.scn"),
    pack!("ssh-attack-fig2", "ssh_attack_fig2.scn"),
    pack!("c2-ladder", "c2_ladder.scn"),
    pack!("ehealth", "ehealth.scn"),
];

#[derive(Debug)]
pub enum LoadError {
    UnknownPack(String),
    Io(PathBuf, std::io::Error),
    Parse { source: String, error: ParseError },
    Invalid(Vec<Diagnostic>),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::UnknownPack(n) => write!(f, "unknown pack {n}"),
            LoadError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            LoadError::Parse { error, .. } => write!(f, "{error}"),
            LoadError::Invalid(ds) => {
                for (i, d) in ds.iter().enumerate() {
                    if i > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "{d}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for LoadError {}

pub fn find(name: &str) -> Option<&'static Pack> {
    PACKS.iter().find(|p| p.name == name || p.file == name)
}

pub fn find_scenario(name: &str) -> Option<&'static Pack> {
    SCENARIOS.iter().find(|p| p.name == name || p.file == name)
}

/// Parse and validate `text`.
pub fn load_source(text: &str, file: &str) -> Result<Parsed, LoadError> {
    let parsed = parse(text, file).map_err(|error| LoadError::Parse {
        source: text.to_string(),
        error,
    })?;
    let diags = parsed.theory.validate();
    if !diags.is_empty() {
        return Err(LoadError::Invalid(diags));
    }
    Ok(parsed)
}

/// A shipped pack by name, e.g. `ehealth` or `attribution-fig2`.
pub fn load_pack(name: &str) -> Result<Theory, LoadError> {
    let pack = find(name).ok_or_else(|| LoadError::UnknownPack(name.to_string()))?;
    Ok(load_source(pack.source, pack.file)?.theory)
}

/// A theory from a file path, falling back to a shipped pack name when no
/// such file exists.
pub fn load_theory(name: &str) -> Result<(String, Theory), LoadError> {
    let path = Path::new(name);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io(path.into(), e))?;
        return Ok((name.to_string(), load_source(&text, name)?.theory));
    }
    match find(name) {
        Some(p) => Ok((p.name.to_string(), load_source(p.source, p.file)?.theory)),
        None => Err(LoadError::Io(
            path.into(),
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or pack"),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_pack_loads() {
        for p in PACKS {
            load_pack(p.name).unwrap_or_else(|e| panic!("{}: {e}", p.name));
        }
    }

    #[test]
    fn pack_shapes() {
        let t = load_pack("ehealth").unwrap();
        let labels: Vec<&str> = t.rules.iter().map(|r| r.label.as_str()).collect();
        let expected: Vec<String> = [
            "1a", "1b", "1c", "2", "3", "4", "5", "6", "7a", "7b", "7c", "8", "9", "10a", "10b",
            "11", "12", "13", "14",
        ]
        .iter()
        .map(|n| format!("eh.r{n}"))
        .collect();
        assert_eq!(labels, expected);
        let fig2 = load_pack("attribution-fig2").unwrap();
        assert_eq!(fig2.rules.len(), 5);
        let levels: Vec<u32> = fig2.priorities.iter().map(|p| p.level).collect();
        assert_eq!(levels.iter().filter(|l| **l == 1).count(), 4);
        assert_eq!(levels.iter().filter(|l| **l == 2).count(), 1);
    }

    #[test]
    fn unknown_pack() {
        assert!(matches!(load_pack("nope"), Err(LoadError::UnknownPack(_))));
    }
}
