//! Exhaustive parsing for small grammars: every tree of the start symbol
//! over the whole sentence, and the most probable one by brute force.

use std::collections::HashMap;
use std::rc::Rc;

use thiserror::Error;

use crate::grammar::{Grammar, RuleId, SymbolId};
use crate::model::{tree_log_prob, CspModel, ModelError};
use crate::treebank::{ParseTree, Sentence};

pub const DEFAULT_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("{count} parses exceed the cap of {cap}")]
    CapExceeded { cap: usize, count: u128 },
    #[error("word {0} has no part of speech")]
    LexicalGap(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

struct Forest<'a> {
    g: &'a Grammar,
    s: &'a Sentence,
    n: usize,
    /// Parse counts per (symbol, start, end), saturating.
    counts: Vec<u128>,
    memo: HashMap<(SymbolId, usize, usize), Rc<Vec<ParseTree>>>,
}

impl<'a> Forest<'a> {
    fn idx(&self, sym: SymbolId, i: usize, j: usize) -> usize {
        (i * (self.n + 1) + j) * self.g.num_symbols() + sym.index()
    }

    fn count(&self, sym: SymbolId, i: usize, j: usize) -> u128 {
        self.counts[self.idx(sym, i, j)]
    }

    /// Ways for `rhs` to tile `[i, j)` exactly.
    fn tilings(&self, rhs: &[SymbolId], i: usize, j: usize) -> u128 {
        // ways[m]: the children so far cover [i, m)
        let mut ways = vec![0u128; j + 1];
        ways[i] = 1;
        for &sym in rhs {
            let mut next = vec![0u128; j + 1];
            for m in i..j {
                if ways[m] == 0 {
                    continue;
                }
                for e in m + 1..=j {
                    let c = self.count(sym, m, e);
                    if c > 0 {
                        next[e] = next[e].saturating_add(ways[m].saturating_mul(c));
                    }
                }
            }
            ways = next;
        }
        ways[j]
    }

    fn build(g: &'a Grammar, s: &'a Sentence) -> Self {
        let n = s.len();
        let mut f = Forest {
            g,
            s,
            n,
            counts: vec![0; (n + 1) * (n + 1) * g.num_symbols()],
            memo: HashMap::new(),
        };
        let unary = unary_order(g);
        for len in 1..=n {
            for i in 0..=n - len {
                let j = i + len;
                if len == 1 {
                    for &t in &s.tags[i] {
                        let k = f.idx(t, i, j);
                        f.counts[k] = 1;
                    }
                }
                for r in g.rules().iter().filter(|r| r.arity() > 1) {
                    let c = f.tilings(&r.rhs, i, j);
                    let k = f.idx(r.lhs, i, j);
                    f.counts[k] = f.counts[k].saturating_add(c);
                }
                for &rid in &unary {
                    let r = g.rule(rid);
                    let c = f.count(r.rhs[0], i, j);
                    let k = f.idx(r.lhs, i, j);
                    f.counts[k] = f.counts[k].saturating_add(c);
                }
            }
        }
        f
    }

    fn trees(&mut self, sym: SymbolId, i: usize, j: usize) -> Rc<Vec<ParseTree>> {
        if let Some(t) = self.memo.get(&(sym, i, j)) {
            return Rc::clone(t);
        }
        let mut out = Vec::new();
        if j == i + 1 && self.s.tags[i].contains(&sym) {
            out.push(ParseTree::leaf(self.g.name(sym), self.s.words[i].as_str(), i));
        }
        for &rid in self.g.rules_for(sym) {
            let rhs = self.g.rule(rid).rhs.clone();
            let mut partial: Vec<(usize, Vec<ParseTree>)> = vec![(i, Vec::new())];
            for (k, &child) in rhs.iter().enumerate() {
                let left = rhs.len() - k - 1;
                let mut next = Vec::new();
                for (at, kids) in partial {
                    // leave at least one word for each remaining child
                    for e in at + 1..=j.saturating_sub(left) {
                        if self.count(child, at, e) == 0 || (left == 0 && e != j) {
                            continue;
                        }
                        for t in self.trees(child, at, e).iter() {
                            let mut k2 = kids.clone();
                            k2.push(t.clone());
                            next.push((e, k2));
                        }
                    }
                }
                partial = next;
            }
            for (_, kids) in partial {
                out.push(ParseTree::node(self.g.name(sym), kids));
            }
        }
        let rc = Rc::new(out);
        self.memo.insert((sym, i, j), Rc::clone(&rc));
        rc
    }
}

/// Unary rules over nonterminals ordered so a rule comes after every
/// unary rule that builds its child.
fn unary_order(g: &Grammar) -> Vec<RuleId> {
    let unary: Vec<RuleId> = g.rules().iter().filter(|r| r.arity() == 1).map(|r| r.id).collect();
    let mut order = Vec::with_capacity(unary.len());
    // a rule is ready once no pending unary rule produces its child
    let mut pending = unary.clone();
    while !pending.is_empty() {
        let before = pending.len();
        let mut rest = Vec::new();
        for &rid in &pending {
            let child = g.rule(rid).rhs[0];
            let blocked = pending.iter().any(|&o| g.rule(o).lhs == child);
            if blocked {
                rest.push(rid);
            } else {
                order.push(rid);
            }
        }
        pending = rest;
        assert!(pending.len() < before, "unary cycle in a validated grammar");
    }
    order
}

/// Number of parses of the start symbol over the whole sentence.
pub fn count_parses(grammar: &Grammar, sentence: &Sentence) -> Result<u128, OracleError> {
    if let Some(p) = sentence.lexical_gap() {
        return Err(OracleError::LexicalGap(p));
    }
    if sentence.is_empty() {
        return Ok(0);
    }
    let f = Forest::build(grammar, sentence);
    Ok(f.count(grammar.start(), 0, sentence.len()))
}

/// Every parse tree of the start symbol over the sentence.
pub fn all_parses(grammar: &Grammar, sentence: &Sentence, cap: usize) -> Result<Vec<ParseTree>, OracleError> {
    if let Some(p) = sentence.lexical_gap() {
        return Err(OracleError::LexicalGap(p));
    }
    if sentence.is_empty() {
        return Ok(Vec::new());
    }
    let mut f = Forest::build(grammar, sentence);
    let n = sentence.len();
    let count = f.count(grammar.start(), 0, n);
    if count > cap as u128 {
        return Err(OracleError::CapExceeded { cap, count });
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let trees = f.trees(grammar.start(), 0, n);
    Ok(trees.as_ref().clone())
}

/// Every parse with its log-probability, most probable first (stable for
/// ties).
pub fn scored_parses(
    grammar: &Grammar,
    sentence: &Sentence,
    csp: &CspModel,
    cap: usize,
) -> Result<Vec<(ParseTree, f64)>, OracleError> {
    let mut scored = all_parses(grammar, sentence, cap)?
        .into_iter()
        .map(|t| {
            let lp = tree_log_prob(grammar, csp, &t, sentence)?;
            Ok((t, lp))
        })
        .collect::<Result<Vec<_>, OracleError>>()?;
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(scored)
}

/// The most probable parse and its log-probability; the first in
/// enumeration order among equals.
pub fn best_parse_bruteforce(
    grammar: &Grammar,
    sentence: &Sentence,
    csp: &CspModel,
    cap: usize,
) -> Result<Option<(ParseTree, f64)>, OracleError> {
    Ok(scored_parses(grammar, sentence, csp, cap)?.into_iter().next())
}
