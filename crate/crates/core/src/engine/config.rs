//! Parser configuration and per-sentence results.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use crate::chart::Phase;
use crate::chart::EdgeKey;
use crate::grammar::Grammar;
use crate::treebank::ParseTree;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("unknown phase `{0}` (expected I, II or III)")]
    UnknownPhase(String),
    #[error("no phases enabled")]
    NoPhases,
    #[error("edge limit must be positive")]
    ZeroEdges,
    #[error("score floor {0} outside (0, 1]")]
    Floor(String),
    #[error("bad edge limit `{0}`")]
    EdgeLimit(String),
}

/// A subset of {I, II, III}, always run in that order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhaseSet(u8);

impl PhaseSet {
    pub const ALL: PhaseSet = PhaseSet(0b111);

    pub fn new(phases: &[Phase]) -> Self {
        PhaseSet(phases.iter().fold(0, |m, p| m | 1 << p.index()))
    }

    pub fn contains(self, p: Phase) -> bool {
        self.0 & (1 << p.index()) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Phase> {
        Phase::ALL.into_iter().filter(move |&p| self.contains(p))
    }

    /// Whether every phase in `self` is also in `other`.
    pub fn is_subset(self, other: PhaseSet) -> bool {
        self.0 & !other.0 == 0
    }
}

impl fmt::Display for PhaseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.iter().map(Phase::name).collect();
        f.write_str(&names.join(","))
    }
}

impl FromStr for PhaseSet {
    type Err = ConfigError;

    /// Comma-separated phase names, e.g. `I,III`.
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let mut phases = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            phases.push(match part {
                "I" | "1" => Phase::I,
                "II" | "2" => Phase::II,
                "III" | "3" => Phase::III,
                other => return Err(ConfigError::UnknownPhase(other.to_string())),
            });
        }
        if phases.is_empty() {
            return Err(ConfigError::NoPhases);
        }
        Ok(PhaseSet::new(&phases))
    }
}

/// Parses `N` or `unlimited`.
pub fn parse_edge_limit(s: &str) -> Result<Option<usize>, ConfigError> {
    match s.trim() {
        "unlimited" | "none" => Ok(None),
        n => match n.parse::<usize>() {
            Ok(0) => Err(ConfigError::ZeroEdges),
            Ok(v) => Ok(Some(v)),
            Err(_) => Err(ConfigError::EdgeLimit(n.to_string())),
        },
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParserConfig {
    pub phases: PhaseSet,
    /// `None` is unlimited.
    pub max_edges: Option<usize>,
    /// Give-up threshold on scores, in (0, 1].
    pub min_score: Option<f64>,
    /// Stop as soon as a spanning start-symbol edge exists. When false,
    /// every enabled phase runs until its agenda is empty.
    pub stop_on_first_span: bool,
    /// Keep a log of every edge insertion in the result.
    pub record_trace: bool,
}

impl Default for ParserConfig {
    fn default() -> Self {
        ParserConfig {
            phases: PhaseSet::ALL,
            max_edges: None,
            min_score: None,
            stop_on_first_span: true,
            record_trace: false,
        }
    }
}

impl ParserConfig {
    /// All phases, no limits, search to exhaustion.
    pub fn exhaustive() -> Self {
        ParserConfig {
            stop_on_first_span: false,
            ..Default::default()
        }
    }

    pub fn with_phases(mut self, phases: PhaseSet) -> Self {
        self.phases = phases;
        self
    }

    pub fn with_max_edges(mut self, max: Option<usize>) -> Self {
        self.max_edges = max;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.phases.is_empty() {
            return Err(ConfigError::NoPhases);
        }
        if self.max_edges == Some(0) {
            return Err(ConfigError::ZeroEdges);
        }
        if let Some(f) = self.min_score {
            if !(f > 0.0 && f <= 1.0) {
                return Err(ConfigError::Floor(f.to_string()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParseStatus {
    Parsed,
    Partial,
    NoParse,
    LexicalGap,
}

impl ParseStatus {
    pub fn name(self) -> &'static str {
        match self {
            ParseStatus::Parsed => "parsed",
            ParseStatus::Partial => "partial",
            ParseStatus::NoParse => "no_parse",
            ParseStatus::LexicalGap => "lexical_gap",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParseStats {
    pub predictions: usize,
    pub predictions_by_phase: [usize; 3],
    pub completions: usize,
    pub edges_created: usize,
    /// Internal nodes of the gold tree, filled in by evaluation.
    pub needed_constituents: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceOutcome {
    Added,
    Improved,
    Duplicate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub phase: Phase,
    pub key: EdgeKey,
    pub predicted: bool,
    pub outcome: TraceOutcome,
}

impl TraceEntry {
    /// One line such as `I predict [0,1) NP -> det n 1..1`; edges that did
    /// not add a new key get a trailing `(improved)` or `(duplicate)`.
    pub fn render(&self, grammar: &Grammar) -> String {
        let k = &self.key;
        let mut s = format!(
            "{} {} [{},{}) {} {}..{}",
            self.phase.name(),
            if self.predicted { "predict" } else { "extend" },
            k.start,
            k.end,
            grammar.display_rule(k.rule),
            k.lo,
            k.hi
        );
        match self.outcome {
            TraceOutcome::Added => {}
            TraceOutcome::Improved => s.push_str(" (improved)"),
            TraceOutcome::Duplicate => s.push_str(" (duplicate)"),
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParseResult {
    pub status: ParseStatus,
    pub tree: Option<ParseTree>,
    /// Natural-log probability of `tree` under the rule model.
    pub log_prob: Option<f64>,
    /// Last phase started; `None` when no phase ran.
    pub phase_reached: Option<Phase>,
    /// The edge budget stopped the search.
    pub budget_exhausted: bool,
    pub stats: ParseStats,
    pub trace: Vec<TraceEntry>,
}

impl ParseResult {
    pub fn is_parsed(&self) -> bool {
        self.status == ParseStatus::Parsed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_set_text() {
        let s: PhaseSet = "I,III".parse().unwrap();
        assert!(s.contains(Phase::I) && !s.contains(Phase::II) && s.contains(Phase::III));
        assert_eq!(s.to_string(), "I,III");
        assert_eq!("III,I".parse::<PhaseSet>().unwrap(), s);
        assert_eq!(PhaseSet::ALL.to_string(), "I,II,III");
        assert_eq!("IV".parse::<PhaseSet>(), Err(ConfigError::UnknownPhase("IV".into())));
        assert_eq!("".parse::<PhaseSet>(), Err(ConfigError::NoPhases));
        assert!(PhaseSet::new(&[Phase::I]).is_subset(PhaseSet::ALL));
        assert!(!PhaseSet::ALL.is_subset(PhaseSet::new(&[Phase::II])));
    }

    #[test]
    fn edge_limits() {
        assert_eq!(parse_edge_limit("unlimited"), Ok(None));
        assert_eq!(parse_edge_limit("300"), Ok(Some(300)));
        assert_eq!(parse_edge_limit("0"), Err(ConfigError::ZeroEdges));
        assert!(parse_edge_limit("lots").is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ParserConfig::default().validate().is_ok());
        let mut c = ParserConfig::default();
        c.min_score = Some(1.5);
        assert!(c.validate().is_err());
        c.min_score = Some(0.0);
        assert!(c.validate().is_err());
        c.min_score = Some(1.0);
        assert!(c.validate().is_ok());
        assert_eq!(
            ParserConfig::default().with_phases(PhaseSet::new(&[])).validate(),
            Err(ConfigError::NoPhases)
        );
    }
}
