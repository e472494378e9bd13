//! Trigram prediction model: how likely a `(rule, child)` pair is to sit
//! over a word, given the part-of-speech trigram centred on its left
//! corner.

use std::collections::{BTreeMap, HashMap};

use crate::grammar::{Grammar, RuleId, Trigram};

use super::ModelError;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrigramCounts {
    pub total: u64,
    pub pairs: BTreeMap<(RuleId, u8), u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PredictionModel {
    by_trigram: HashMap<Trigram, TrigramCounts>,
}

impl PredictionModel {
    pub fn observe(&mut self, t: Trigram, rule: RuleId, child_index: u8, count: u64) {
        let entry = self.by_trigram.entry(t).or_default();
        entry.total += count;
        *entry.pairs.entry((rule, child_index)).or_insert(0) += count;
    }

    pub fn count(&self, rule: RuleId, child_index: u8, t: &Trigram) -> u64 {
        self.by_trigram
            .get(t)
            .and_then(|e| e.pairs.get(&(rule, child_index)))
            .copied()
            .unwrap_or(0)
    }

    pub fn total(&self, t: &Trigram) -> u64 {
        self.by_trigram.get(t).map_or(0, |e| e.total)
    }

    /// Relative frequency without an arity check; 0 for anything unseen.
    #[inline]
    pub fn prob(&self, rule: RuleId, child_index: u8, t: &Trigram) -> f64 {
        match self.by_trigram.get(t) {
            Some(e) if e.total > 0 => {
                e.pairs.get(&(rule, child_index)).copied().unwrap_or(0) as f64 / e.total as f64
            }
            _ => 0.0,
        }
    }

    /// `P(rule, i | t)`. Fails if `i` is outside the rule.
    pub fn predict_prob(&self, grammar: &Grammar, rule: RuleId, i: usize, t: &Trigram) -> Result<f64, ModelError> {
        let arity = grammar.rule(rule).arity();
        if i == 0 || i > arity {
            return Err(ModelError::ChildIndex {
                rule: grammar.display_rule(rule),
                index: i,
            });
        }
        Ok(self.prob(rule, i as u8, t))
    }

    /// Seen `(rule, i, probability)` triples at `t`, in rule order.
    pub fn predictions(&self, t: &Trigram) -> impl Iterator<Item = (RuleId, u8, f64)> + '_ {
        self.by_trigram.get(t).into_iter().flat_map(|e| {
            let total = e.total as f64;
            e.pairs.iter().map(move |(&(r, i), &c)| (r, i, c as f64 / total))
        })
    }

    /// Smallest nonzero probability at `t`.
    pub fn min_positive(&self, t: &Trigram) -> Option<f64> {
        let e = self.by_trigram.get(t)?;
        let min = e.pairs.values().copied().filter(|&c| c > 0).min()?;
        Some(min as f64 / e.total as f64)
    }

    pub fn trigrams(&self) -> impl Iterator<Item = (&Trigram, &TrigramCounts)> {
        self.by_trigram.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.by_trigram.is_empty()
    }
}
