//! Corpus evaluation: exact-match accuracy, prediction and completion
//! ratios, and the phase and edge-limit sweeps.

mod report;

use std::collections::HashMap;

use thiserror::Error;

use crate::engine::{ConfigError, ParseResult, ParseStatus, Parser, ParserConfig, Phase, PhaseSet};
use crate::grammar::Grammar;
use crate::model::Models;
use crate::par::Execution;
use crate::treebank::{yield_sentence, ParseTree, TreebankError};

pub use report::{
    edge_limit_label, group_thousands, render_csv, render_phase_table, render_text, phase_sweep_row, by_phase_row, edge_sweep_row, TableKind,
    CSV_HEADER,
};

/// The standard phase subsets, in table order.
pub const DEFAULT_PHASE_SWEEP: [&str; 7] = ["I", "I,II", "II", "I,III", "III", "I,II,III", "II,III"];

/// Edge limits of the budget sweep, largest first.
pub const DEFAULT_EDGE_GRID: [usize; 6] = [15_000, 1_000, 500, 300, 150, 100];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("test corpus is empty")]
    EmptyCorpus,
    #[error("gold tree {index}: {source}")]
    Gold {
        index: usize,
        #[source]
        source: TreebankError,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("overrides line {line}: {message}")]
    Overrides { line: usize, message: String },
}

/// Manual verdicts for individual sentences (1-based), applied to
/// sentences that parsed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Overrides(HashMap<usize, bool>);

impl Overrides {
    /// Lines of `<index> correct|incorrect`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, EvalError> {
        let mut map = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| EvalError::Overrides {
                line: i + 1,
                message: message.to_string(),
            };
            let mut it = line.split_whitespace();
            let idx: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .filter(|&n| n > 0)
                .ok_or_else(|| err("expected a sentence number"))?;
            let verdict = match it.next() {
                Some("correct") => true,
                Some("incorrect") => false,
                _ => return Err(err("expected `correct` or `incorrect`")),
            };
            if it.next().is_some() {
                return Err(err("trailing text"));
            }
            map.insert(idx, verdict);
        }
        Ok(Overrides(map))
    }

    pub fn get(&self, index: usize) -> Option<bool> {
        self.0.get(&index).copied()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SentenceOutcome {
    pub gold: ParseTree,
    pub result: ParseResult,
    pub correct: bool,
    /// Internal nodes of the gold tree.
    pub needed: usize,
}

impl SentenceOutcome {
    pub fn parsed_wrong(&self) -> bool {
        self.result.status == ParseStatus::Parsed && !self.correct
    }
}

/// Raw sums over a corpus; every reported figure derives from these.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EvalRow {
    pub config: String,
    pub n: usize,
    pub predictions: usize,
    pub completions: usize,
    pub needed: usize,
    pub correct: usize,
    pub parsed_wrong: usize,
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

impl EvalRow {
    pub fn from_outcomes(config: impl Into<String>, outcomes: &[SentenceOutcome]) -> Self {
        let mut row = EvalRow {
            config: config.into(),
            ..Default::default()
        };
        for o in outcomes {
            row.n += 1;
            row.predictions += o.result.stats.predictions;
            row.completions += o.result.stats.completions;
            row.needed += o.needed;
            row.correct += o.correct as usize;
            row.parsed_wrong += o.parsed_wrong() as usize;
        }
        row
    }

    /// Predictions per constituent of the correct parses.
    pub fn pred_ratio(&self) -> f64 {
        if self.needed == 0 {
            0.0
        } else {
            self.predictions as f64 / self.needed as f64
        }
    }

    /// Completed edges per prediction.
    pub fn comp_ratio(&self) -> f64 {
        if self.predictions == 0 {
            0.0
        } else {
            self.completions as f64 / self.predictions as f64
        }
    }

    pub fn coverage(&self) -> f64 {
        pct(self.correct, self.n)
    }

    pub fn pct_error(&self) -> f64 {
        pct(self.parsed_wrong, self.n)
    }

    pub fn pct_no_parse(&self) -> f64 {
        pct(self.n - self.correct - self.parsed_wrong, self.n)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub row: EvalRow,
    pub outcomes: Vec<SentenceOutcome>,
}

pub struct EvalSetup<'a> {
    pub grammar: &'a Grammar,
    pub models: &'a Models,
    pub execution: Execution,
    pub overrides: Option<&'a Overrides>,
}

impl<'a> EvalSetup<'a> {
    pub fn new(grammar: &'a Grammar, models: &'a Models) -> Self {
        EvalSetup {
            grammar,
            models,
            execution: Execution::default(),
            overrides: None,
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    /// Parses every gold yield and compares the result with the gold tree.
    pub fn evaluate(&self, test: &[ParseTree], config: &ParserConfig, label: &str) -> Result<Evaluation, EvalError> {
        if test.is_empty() {
            return Err(EvalError::EmptyCorpus);
        }
        let mut sentences = Vec::with_capacity(test.len());
        for (i, gold) in test.iter().enumerate() {
            let fail = |source| EvalError::Gold { index: i + 1, source };
            gold.check(self.grammar).map_err(fail)?;
            sentences.push(yield_sentence(gold, self.grammar).map_err(fail)?);
        }
        let parser = Parser::new(self.grammar, self.models, config.clone())?;
        let results = self.execution.map(&sentences, |_, s| parser.parse(s));
        let outcomes: Vec<SentenceOutcome> = results
            .into_iter()
            .zip(test)
            .enumerate()
            .map(|(i, (mut result, gold))| {
                let needed = gold.internal_count();
                result.stats.needed_constituents = Some(needed);
                let parsed = result.status == ParseStatus::Parsed;
                let exact = parsed && result.tree.as_ref() == Some(gold);
                let correct = match self.overrides.and_then(|o| o.get(i + 1)) {
                    Some(v) if parsed => v,
                    _ => exact,
                };
                SentenceOutcome {
                    gold: gold.clone(),
                    result,
                    correct,
                    needed,
                }
            })
            .collect();
        Ok(Evaluation {
            row: EvalRow::from_outcomes(label, &outcomes),
            outcomes,
        })
    }

    /// One evaluation per phase subset, labelled like `I,II`.
    pub fn sweep_phases(
        &self,
        test: &[ParseTree],
        base: &ParserConfig,
        subsets: &[PhaseSet],
    ) -> Result<Vec<Evaluation>, EvalError> {
        subsets
            .iter()
            .map(|&p| {
                let cfg = base.clone().with_phases(p);
                self.evaluate(test, &cfg, &p.to_string())
            })
            .collect()
    }

    /// One evaluation per edge limit, labelled with the limit.
    pub fn sweep_edge_limit(
        &self,
        test: &[ParseTree],
        base: &ParserConfig,
        limits: &[Option<usize>],
    ) -> Result<Vec<Evaluation>, EvalError> {
        limits
            .iter()
            .map(|&l| {
                let cfg = base.clone().with_max_edges(l);
                self.evaluate(test, &cfg, &edge_limit_label(l))
            })
            .collect()
    }
}

/// The default phase subsets, parsed.
pub fn default_phase_sweep() -> Vec<PhaseSet> {
    DEFAULT_PHASE_SWEEP.iter().map(|s| s.parse().expect("valid phase list")).collect()
}

/// One row of the by-phase accuracy table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseRow {
    pub label: &'static str,
    /// Sentences in this group.
    pub n: usize,
    pub correct: usize,
    pub parsed_wrong: usize,
    /// Size of the whole test set.
    pub total: usize,
}

impl PhaseRow {
    /// Correct among the sentences in this group.
    pub fn accuracy(&self) -> f64 {
        pct(self.correct, self.n)
    }

    /// Correct in this group, over the whole test set.
    pub fn coverage(&self) -> f64 {
        pct(self.correct, self.total)
    }

    /// Parsed but wrong, among the sentences in this group.
    pub fn pct_error(&self) -> f64 {
        pct(self.parsed_wrong, self.n)
    }
}

/// Groups sentences by the last phase the parser started: I or II, and
/// III; plus the overall row.
pub fn accuracy_by_phase(outcomes: &[SentenceOutcome]) -> [PhaseRow; 3] {
    let total = outcomes.len();
    let row = |label, pick: &dyn Fn(&SentenceOutcome) -> bool| {
        let group: Vec<&SentenceOutcome> = outcomes.iter().filter(|o| pick(o)).collect();
        PhaseRow {
            label,
            n: group.len(),
            correct: group.iter().filter(|o| o.correct).count(),
            parsed_wrong: group.iter().filter(|o| o.parsed_wrong()).count(),
            total,
        }
    };
    let reached3 = |o: &SentenceOutcome| o.result.phase_reached == Some(Phase::III);
    [
        row("I + II", &|o| !reached3(o)),
        row("III", &reached3),
        row("Overall", &|_| true),
    ]
}

/// Whether each group's accuracy times its share of the corpus matches its
/// coverage contribution to within one sentence.
pub fn phase_table_consistent(rows: &[PhaseRow; 3]) -> bool {
    rows.iter().all(|r| {
        if r.total == 0 {
            return r.n == 0;
        }
        let implied = r.accuracy() / 100.0 * r.n as f64;
        let actual = r.coverage() / 100.0 * r.total as f64;
        (implied - actual).abs() <= 1.0
    }) && rows[0].n + rows[1].n == rows[2].n
        && rows[0].correct + rows[1].correct == rows[2].correct
}
