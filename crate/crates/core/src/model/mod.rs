//! Trained probability models and tree scoring.

mod csp;
mod io;
mod prediction;
mod score;

use thiserror::Error;

use crate::grammar::Grammar;
use crate::treebank::{extract_events, ParentContext, ParseTree, Sentence, TrainingEvent, TreeBody, TreebankError};

pub use csp::{parent_label, CspKey, CspModel, RuleCounts};
pub use io::{load_models, save_models};
pub use prediction::{PredictionModel, TrigramCounts};
pub use score::{combine_scores, Score};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("non-finite log-probability {0}")]
    NonFinite(f64),
    #[error("child index {index} out of range for `{rule}`")]
    ChildIndex { rule: String, index: usize },
    #[error("`{rule}` cannot fill a slot labelled `{expected}`")]
    LhsMismatch { rule: String, expected: String },
    #[error("tree yield does not match the sentence")]
    YieldMismatch,
    #[error(transparent)]
    Tree(#[from] TreebankError),
    #[error("unsupported model version `{0}`")]
    Version(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("model file truncated after record {records}")]
    Truncated { records: usize },
    #[error("model does not match the grammar: {0}")]
    GrammarMismatch(String),
}

/// The two trained models. Immutable once built.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Models {
    pub prediction: PredictionModel,
    pub csp: CspModel,
}

impl Models {
    /// Relative-frequency training. Every event counts once in the
    /// prediction model; the rule model counts one emission per node,
    /// taken from the node's first-child event.
    pub fn train<'e>(grammar: &Grammar, events: impl IntoIterator<Item = &'e TrainingEvent>) -> Models {
        let mut m = Models::default();
        for ev in events {
            m.prediction.observe(ev.trigram, ev.rule, ev.child_index, 1);
            if ev.child_index == 1 {
                let parent = parent_label(grammar, ev.parent);
                m.csp.observe(grammar.rule(ev.rule), ev.parent, parent, ev.trigram, 1);
            }
        }
        m
    }

    pub fn train_trees(grammar: &Grammar, trees: &[ParseTree]) -> Result<Models, ModelError> {
        let mut events = Vec::new();
        for (i, t) in trees.iter().enumerate() {
            let ev = extract_events(t, grammar).map_err(|e| TreebankError::InTree {
                index: i + 1,
                source: Box::new(e),
            })?;
            events.extend(ev);
        }
        Ok(Models::train(grammar, &events))
    }
}

/// Natural log of the tree's probability: the sum over internal nodes of
/// `ln P(rule | parent slot, left-corner trigram)`.
pub fn tree_log_prob(grammar: &Grammar, csp: &CspModel, tree: &ParseTree, sentence: &Sentence) -> Result<f64, ModelError> {
    let leaves = tree.leaves();
    if leaves.len() != sentence.len() {
        return Err(ModelError::YieldMismatch);
    }
    for (i, (tag, word)) in leaves.iter().enumerate() {
        let tag_ok = grammar.lookup(tag).is_some_and(|t| sentence.tags[i].contains(&t));
        if *word != sentence.words[i] || !tag_ok {
            return Err(ModelError::YieldMismatch);
        }
    }
    let mut sum = 0.0;
    node_log_prob(grammar, csp, tree, sentence, ParentContext::Root, &mut sum)?;
    Ok(sum)
}

fn node_log_prob(
    grammar: &Grammar,
    csp: &CspModel,
    node: &ParseTree,
    sentence: &Sentence,
    ctx: ParentContext,
    sum: &mut f64,
) -> Result<(), ModelError> {
    let Some(rule) = node.resolve_rule(grammar)? else {
        return Ok(());
    };
    let lc = node.left_corner_index();
    let tag = left_corner_tag(node, grammar)?;
    *sum += csp.rule_prob(grammar, rule, ctx, sentence.trigram(lc, tag))?.ln();
    for (i, child) in node.children().iter().enumerate() {
        let ctx = ParentContext::Child {
            rule,
            position: (i + 1) as u8,
        };
        node_log_prob(grammar, csp, child, sentence, ctx, sum)?;
    }
    Ok(())
}

fn left_corner_tag(node: &ParseTree, grammar: &Grammar) -> Result<crate::grammar::SymbolId, ModelError> {
    let mut n = node;
    while let TreeBody::Node(children) = &n.body {
        n = &children[0];
    }
    grammar
        .lookup(&n.label)
        .ok_or_else(|| TreebankError::UnknownTag(n.label.clone()).into())
}

/// Probability of the tree: `exp` of [`tree_log_prob`].
pub fn tree_prob(grammar: &Grammar, csp: &CspModel, tree: &ParseTree, sentence: &Sentence) -> Result<f64, ModelError> {
    tree_log_prob(grammar, csp, tree, sentence).map(f64::exp)
}

/// Geometric-mean score of a whole tree, root factor included.
pub fn tree_score(grammar: &Grammar, csp: &CspModel, tree: &ParseTree, sentence: &Sentence) -> Result<Score, ModelError> {
    let lp = tree_log_prob(grammar, csp, tree, sentence)?;
    Score::from_log(lp, tree.internal_count() as u32)
}
