//! Context-sensitive rule probabilities: `P(A -> alpha | parent slot,
//! trigram)` with a strict back-off chain.
//!
//! Levels, finest first:
//!
//! 0. parent rule and position, lhs, trigram
//! 1. parent label (or root), lhs, trigram
//! 2. lhs, trigram
//! 3. lhs alone
//!
//! A query uses the finest level whose total for its key is nonzero. Every
//! level keys on the lhs, so each one is a distribution over the
//! expansions of a single nonterminal.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use crate::grammar::{Grammar, Rule, RuleId, SymbolId, Trigram};
use crate::treebank::ParentContext;

use super::ModelError;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuleCounts {
    pub total: u64,
    pub rules: BTreeMap<RuleId, u64>,
}

impl RuleCounts {
    fn add(&mut self, rule: RuleId, n: u64) {
        self.total += n;
        *self.rules.entry(rule).or_insert(0) += n;
    }

    fn prob(&self, rule: RuleId) -> f64 {
        self.rules.get(&rule).copied().unwrap_or(0) as f64 / self.total as f64
    }
}

/// Conditioning key at one back-off level. `parent: None` is the root.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CspKey {
    Slot {
        ctx: ParentContext,
        lhs: SymbolId,
        trigram: Trigram,
    },
    ParentLabel {
        parent: Option<SymbolId>,
        lhs: SymbolId,
        trigram: Trigram,
    },
    Lhs {
        lhs: SymbolId,
        trigram: Trigram,
    },
    Unconditional {
        lhs: SymbolId,
    },
}

impl CspKey {
    pub fn level(&self) -> u8 {
        match self {
            CspKey::Slot { .. } => 0,
            CspKey::ParentLabel { .. } => 1,
            CspKey::Lhs { .. } => 2,
            CspKey::Unconditional { .. } => 3,
        }
    }

    pub fn lhs(&self) -> SymbolId {
        match *self {
            CspKey::Slot { lhs, .. }
            | CspKey::ParentLabel { lhs, .. }
            | CspKey::Lhs { lhs, .. }
            | CspKey::Unconditional { lhs } => lhs,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CspModel {
    slot: HashMap<(ParentContext, SymbolId, Trigram), RuleCounts>,
    parent: HashMap<(Option<SymbolId>, SymbolId, Trigram), RuleCounts>,
    lhs_tri: HashMap<(SymbolId, Trigram), RuleCounts>,
    lhs: HashMap<SymbolId, RuleCounts>,
}

fn nonzero<'a, K: Eq + Hash>(map: &'a HashMap<K, RuleCounts>, key: &K) -> Option<&'a RuleCounts> {
    map.get(key).filter(|c| c.total > 0)
}

/// Label of the parent slot, `None` at the root.
pub fn parent_label(grammar: &Grammar, ctx: ParentContext) -> Option<SymbolId> {
    match ctx {
        ParentContext::Root => None,
        ParentContext::Child { rule, .. } => Some(grammar.rule(rule).lhs),
    }
}

impl CspModel {
    /// Counts one rule emission at every level.
    pub fn observe(&mut self, rule: &Rule, ctx: ParentContext, parent: Option<SymbolId>, t: Trigram, n: u64) {
        let lhs = rule.lhs;
        self.slot.entry((ctx, lhs, t)).or_default().add(rule.id, n);
        self.parent.entry((parent, lhs, t)).or_default().add(rule.id, n);
        self.lhs_tri.entry((lhs, t)).or_default().add(rule.id, n);
        self.lhs.entry(lhs).or_default().add(rule.id, n);
    }

    /// Adds a count at a single level; used when reading a model file.
    pub fn insert(&mut self, key: CspKey, rule: RuleId, n: u64) {
        let counts = match key {
            CspKey::Slot { ctx, lhs, trigram } => self.slot.entry((ctx, lhs, trigram)).or_default(),
            CspKey::ParentLabel { parent, lhs, trigram } => self.parent.entry((parent, lhs, trigram)).or_default(),
            CspKey::Lhs { lhs, trigram } => self.lhs_tri.entry((lhs, trigram)).or_default(),
            CspKey::Unconditional { lhs } => self.lhs.entry(lhs).or_default(),
        };
        counts.add(rule, n);
    }

    /// Finest level with mass for this query, and the rule's relative
    /// frequency there. `(3, 0.0)` when the lhs was never seen.
    pub fn lookup(&self, rule: &Rule, ctx: ParentContext, parent: Option<SymbolId>, t: Trigram) -> (u8, f64) {
        let lhs = rule.lhs;
        if let Some(c) = nonzero(&self.slot, &(ctx, lhs, t)) {
            return (0, c.prob(rule.id));
        }
        if let Some(c) = nonzero(&self.parent, &(parent, lhs, t)) {
            return (1, c.prob(rule.id));
        }
        if let Some(c) = nonzero(&self.lhs_tri, &(lhs, t)) {
            return (2, c.prob(rule.id));
        }
        match nonzero(&self.lhs, &lhs) {
            Some(c) => (3, c.prob(rule.id)),
            None => (3, 0.0),
        }
    }

    /// `P(rule | ctx, t)` without checking that the rule fits the slot.
    #[inline]
    pub fn prob(&self, grammar: &Grammar, rule: RuleId, ctx: ParentContext, t: Trigram) -> f64 {
        self.lookup(grammar.rule(rule), ctx, parent_label(grammar, ctx), t).1
    }

    /// `P(rule | ctx, t)`. The rule's lhs must be the symbol in the parent
    /// slot, or the start symbol at the root.
    pub fn rule_prob(&self, grammar: &Grammar, rule: RuleId, ctx: ParentContext, t: Trigram) -> Result<f64, ModelError> {
        let r = grammar.rule(rule);
        let expected = match ctx {
            ParentContext::Root => grammar.start(),
            ParentContext::Child { rule: p, position } => {
                let parent = grammar.rule(p);
                let pos = position as usize;
                if pos == 0 || pos > parent.arity() {
                    return Err(ModelError::ChildIndex {
                        rule: grammar.display_rule(p),
                        index: pos,
                    });
                }
                parent.child(pos)
            }
        };
        if r.lhs != expected {
            return Err(ModelError::LhsMismatch {
                rule: grammar.display_rule(rule),
                expected: grammar.name(expected).to_string(),
            });
        }
        Ok(self.prob(grammar, rule, ctx, t))
    }

    /// Every stored context with its counts, in key order.
    pub fn contexts(&self) -> Vec<(CspKey, &RuleCounts)> {
        let mut out: Vec<(CspKey, &RuleCounts)> = Vec::new();
        out.extend(
            self.slot
                .iter()
                .map(|(&(ctx, lhs, trigram), c)| (CspKey::Slot { ctx, lhs, trigram }, c)),
        );
        out.extend(
            self.parent
                .iter()
                .map(|(&(parent, lhs, trigram), c)| (CspKey::ParentLabel { parent, lhs, trigram }, c)),
        );
        out.extend(
            self.lhs_tri
                .iter()
                .map(|(&(lhs, trigram), c)| (CspKey::Lhs { lhs, trigram }, c)),
        );
        out.extend(self.lhs.iter().map(|(&lhs, c)| (CspKey::Unconditional { lhs }, c)));
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// Relative frequency of `rule` at exactly one level, no back-off.
    pub fn level_prob(&self, key: &CspKey, rule: RuleId) -> f64 {
        let counts = match *key {
            CspKey::Slot { ctx, lhs, trigram } => self.slot.get(&(ctx, lhs, trigram)),
            CspKey::ParentLabel { parent, lhs, trigram } => self.parent.get(&(parent, lhs, trigram)),
            CspKey::Lhs { lhs, trigram } => self.lhs_tri.get(&(lhs, trigram)),
            CspKey::Unconditional { lhs } => self.lhs.get(&lhs),
        };
        match counts {
            Some(c) if c.total > 0 => c.prob(rule),
            _ => 0.0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lhs.is_empty()
    }
}
