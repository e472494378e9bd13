//! Well-formed substring table.
//!
//! Edges live in an arena and are never removed. The dedup map points each
//! [`EdgeKey`] at its best derivation; a strictly better derivation gets a
//! fresh id, so edges built from the old one stay consistent. Adjacency
//! indexes hold processed edges only (the engine calls
//! [`Chart::mark_processed`] when it pops one), with at most one entry per
//! key.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::grammar::{Grammar, RuleId, SymbolId};
use crate::model::Score;
use crate::treebank::{ParseTree, Sentence};

pub type EdgeId = u32;
pub type LeafId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    I,
    II,
    III,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::I, Phase::II, Phase::III];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Phase::I => "I",
            Phase::II => "II",
            Phase::III => "III",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstituentRef {
    Leaf(LeafId),
    Edge(EdgeId),
}

/// A part-of-speech reading of one word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Leaf {
    pub pos: usize,
    pub tag: SymbolId,
}

/// Rule, recognized child range (1-based, inclusive) and word span
/// (0-based, half-open).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeKey {
    pub rule: RuleId,
    pub lo: u8,
    pub hi: u8,
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub rule: RuleId,
    pub lo: u8,
    pub hi: u8,
    pub start: usize,
    pub end: usize,
    /// One reference per recognized child, left to right.
    pub children: Vec<ConstituentRef>,
    /// Sum over children of their contributions; the edge's own rule
    /// probability is not included because its parent slot is unknown.
    pub score: Score,
    pub phase: Phase,
    pub priority: f64,
    /// Log-probability of the prediction this edge descends from.
    pub pred_logp: f64,
    /// Words spanned by whatever predicted this edge (phase III ordering).
    pub predictor_span: usize,
    /// Tag of the leftmost word.
    pub lc_tag: SymbolId,
    /// Created by a prediction rather than by extending another edge.
    pub predicted: bool,
}

impl Edge {
    pub fn key(&self) -> EdgeKey {
        EdgeKey {
            rule: self.rule,
            lo: self.lo,
            hi: self.hi,
            start: self.start,
            end: self.end,
        }
    }

    pub fn span(&self) -> usize {
        self.end - self.start
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AddOutcome {
    Added(EdgeId),
    Improved { new: EdgeId, old: EdgeId },
    Duplicate(EdgeId),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChartError {
    #[error("invalid edge: {0}")]
    InvalidEdge(String),
    #[error("dangling constituent reference {0:?}")]
    Dangling(ConstituentRef),
    #[error("constituent {0:?} is incomplete")]
    Incomplete(ConstituentRef),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    /// Distinct edge keys added (leaves excluded).
    pub edges_created: usize,
    /// Added edges that came from a prediction.
    pub predictions: usize,
    pub predictions_by_phase: [usize; 3],
    /// Added edges that are complete.
    pub completions: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Starting,
    Ending,
}

pub struct Chart<'g> {
    grammar: &'g Grammar,
    words: Vec<String>,
    nsym: usize,
    arity: Vec<u8>,
    leaves: Vec<Leaf>,
    edges: Vec<Edge>,
    dedup: HashMap<EdgeKey, EdgeId>,
    indexed: Vec<bool>,
    by_start: Vec<Vec<ConstituentRef>>,
    by_end: Vec<Vec<ConstituentRef>>,
    need_right: Vec<Vec<EdgeId>>,
    need_left: Vec<Vec<EdgeId>>,
    pub counters: Counters,
}

impl<'g> Chart<'g> {
    pub fn new(grammar: &'g Grammar, words: Vec<String>) -> Self {
        let nsym = grammar.num_symbols();
        let slots = (words.len() + 1) * nsym;
        Chart {
            grammar,
            nsym,
            arity: grammar.rules().iter().map(|r| r.arity() as u8).collect(),
            words,
            leaves: Vec::new(),
            edges: Vec::new(),
            dedup: HashMap::new(),
            indexed: Vec::new(),
            by_start: vec![Vec::new(); slots],
            by_end: vec![Vec::new(); slots],
            need_right: vec![Vec::new(); slots],
            need_left: vec![Vec::new(); slots],
            counters: Counters::default(),
        }
    }

    /// A chart seeded with one leaf per `(word, tag)` reading.
    pub fn for_sentence(grammar: &'g Grammar, sentence: &Sentence) -> Self {
        let mut chart = Chart::new(grammar, sentence.words.clone());
        for (pos, tags) in sentence.tags.iter().enumerate() {
            for &tag in tags {
                chart.add_leaf(pos, tag);
            }
        }
        chart
    }

    pub fn grammar(&self) -> &'g Grammar {
        self.grammar
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    #[inline]
    fn slot(&self, sym: SymbolId, pos: usize) -> usize {
        pos * self.nsym + sym.index()
    }

    pub fn add_leaf(&mut self, pos: usize, tag: SymbolId) -> LeafId {
        let id = self.leaves.len() as LeafId;
        self.leaves.push(Leaf { pos, tag });
        let r = ConstituentRef::Leaf(id);
        let (s, e) = (self.slot(tag, pos), self.slot(tag, pos + 1));
        self.by_start[s].push(r);
        self.by_end[e].push(r);
        id
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    pub fn leaf(&self, id: LeafId) -> &Leaf {
        &self.leaves[id as usize]
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id as usize]
    }

    /// Every edge ever stored, superseded ones included.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn arity(&self, rule: RuleId) -> u8 {
        self.arity[rule.index()]
    }

    #[inline]
    pub fn is_complete(&self, e: &Edge) -> bool {
        e.lo == 1 && e.hi == self.arity(e.rule)
    }

    pub fn lookup(&self, key: &EdgeKey) -> Option<EdgeId> {
        self.dedup.get(key).copied()
    }

    /// Superseded by a better derivation of the same key.
    #[inline]
    pub fn is_stale(&self, id: EdgeId) -> bool {
        self.dedup.get(&self.edges[id as usize].key()) != Some(&id)
    }

    /// Current best edge ids in key order.
    pub fn best_edges(&self) -> Vec<EdgeId> {
        let mut v: Vec<(EdgeKey, EdgeId)> = self.dedup.iter().map(|(k, &id)| (*k, id)).collect();
        v.sort_unstable();
        v.into_iter().map(|(_, id)| id).collect()
    }

    pub fn label(&self, r: ConstituentRef) -> SymbolId {
        match r {
            ConstituentRef::Leaf(l) => self.leaves[l as usize].tag,
            ConstituentRef::Edge(e) => self.grammar.rule(self.edges[e as usize].rule).lhs,
        }
    }

    pub fn span(&self, r: ConstituentRef) -> (usize, usize) {
        match r {
            ConstituentRef::Leaf(l) => {
                let p = self.leaves[l as usize].pos;
                (p, p + 1)
            }
            ConstituentRef::Edge(e) => {
                let e = &self.edges[e as usize];
                (e.start, e.end)
            }
        }
    }

    pub fn lc_tag(&self, r: ConstituentRef) -> SymbolId {
        match r {
            ConstituentRef::Leaf(l) => self.leaves[l as usize].tag,
            ConstituentRef::Edge(e) => self.edges[e as usize].lc_tag,
        }
    }

    fn validate(&self, e: &Edge) -> Result<(), ChartError> {
        let bad = |m: String| Err(ChartError::InvalidEdge(m));
        if e.rule.index() >= self.arity.len() {
            return bad(format!("unknown rule {:?}", e.rule));
        }
        let arity = self.arity(e.rule);
        if e.lo < 1 || e.lo > e.hi || e.hi > arity {
            return bad(format!("child range {}..{} of arity {}", e.lo, e.hi, arity));
        }
        if e.start >= e.end || e.end > self.words.len() {
            return bad(format!("span [{},{})", e.start, e.end));
        }
        if e.children.len() != (e.hi - e.lo + 1) as usize {
            return bad(format!("{} children for range {}..{}", e.children.len(), e.lo, e.hi));
        }
        let rule = self.grammar.rule(e.rule);
        let mut at = e.start;
        for (k, &c) in e.children.iter().enumerate() {
            let (s, t) = self.try_span(c)?;
            if s != at || self.label(c) != rule.child(e.lo as usize + k) {
                return bad(format!("child {} does not tile the span", e.lo as usize + k));
            }
            at = t;
        }
        if at != e.end {
            return bad("children do not reach the end of the span".into());
        }
        Ok(())
    }

    fn try_span(&self, r: ConstituentRef) -> Result<(usize, usize), ChartError> {
        let ok = match r {
            ConstituentRef::Leaf(l) => (l as usize) < self.leaves.len(),
            ConstituentRef::Edge(e) => (e as usize) < self.edges.len(),
        };
        if ok {
            Ok(self.span(r))
        } else {
            Err(ChartError::Dangling(r))
        }
    }

    /// Viterbi insert: a new key is Added; a strictly higher log-probability
    /// for a known key is Improved under a new id; anything else is a
    /// Duplicate and leaves the chart untouched.
    pub fn add_edge(&mut self, e: Edge) -> Result<AddOutcome, ChartError> {
        self.validate(&e)?;
        let key = e.key();
        let id = self.edges.len() as EdgeId;
        match self.dedup.get(&key).copied() {
            Some(old) => {
                if e.score.log_prob_sum > self.edges[old as usize].score.log_prob_sum {
                    self.edges.push(e);
                    self.indexed.push(false);
                    self.dedup.insert(key, id);
                    Ok(AddOutcome::Improved { new: id, old })
                } else {
                    Ok(AddOutcome::Duplicate(old))
                }
            }
            None => {
                self.counters.edges_created += 1;
                if e.predicted {
                    self.counters.predictions += 1;
                    self.counters.predictions_by_phase[e.phase.index()] += 1;
                }
                if self.is_complete(&e) {
                    self.counters.completions += 1;
                }
                self.edges.push(e);
                self.indexed.push(false);
                self.dedup.insert(key, id);
                Ok(AddOutcome::Added(id))
            }
        }
    }

    /// Publishes a popped edge to the adjacency indexes, replacing the entry
    /// for an older derivation of the same key.
    pub fn mark_processed(&mut self, id: EdgeId) {
        let e = &self.edges[id as usize];
        let key = e.key();
        let rule = self.grammar.rule(e.rule);
        let mut slots: Vec<(u8, usize)> = Vec::with_capacity(2);
        if self.is_complete(e) {
            slots.push((0, self.slot(rule.lhs, e.start)));
            slots.push((1, self.slot(rule.lhs, e.end)));
        } else {
            if e.hi < self.arity(e.rule) {
                slots.push((2, self.slot(rule.child(e.hi as usize + 1), e.end)));
            }
            if e.lo > 1 {
                slots.push((3, self.slot(rule.child(e.lo as usize - 1), e.start)));
            }
        }
        for (which, s) in slots {
            let replaced = match which {
                0 | 1 => {
                    let list = if which == 0 { &mut self.by_start[s] } else { &mut self.by_end[s] };
                    let edges = &self.edges;
                    let pos = list.iter().position(|r| match *r {
                        ConstituentRef::Edge(x) => edges[x as usize].key() == key,
                        ConstituentRef::Leaf(_) => false,
                    });
                    match pos {
                        Some(p) => {
                            let ConstituentRef::Edge(old) = std::mem::replace(&mut list[p], ConstituentRef::Edge(id))
                            else {
                                unreachable!()
                            };
                            Some(old)
                        }
                        None => {
                            list.push(ConstituentRef::Edge(id));
                            None
                        }
                    }
                }
                _ => {
                    let list = if which == 2 { &mut self.need_right[s] } else { &mut self.need_left[s] };
                    let edges = &self.edges;
                    match list.iter().position(|&x| edges[x as usize].key() == key) {
                        Some(p) => Some(std::mem::replace(&mut list[p], id)),
                        None => {
                            list.push(id);
                            None
                        }
                    }
                }
            };
            if let Some(old) = replaced {
                self.indexed[old as usize] = false;
            }
        }
        self.indexed[id as usize] = true;
    }

    /// Edges currently published in the indexes, in id order.
    pub fn indexed_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.indexed
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i as EdgeId)
    }

    #[inline]
    pub fn complete_by_start(&self, sym: SymbolId, pos: usize) -> &[ConstituentRef] {
        &self.by_start[self.slot(sym, pos)]
    }

    #[inline]
    pub fn complete_by_end(&self, sym: SymbolId, pos: usize) -> &[ConstituentRef] {
        &self.by_end[self.slot(sym, pos)]
    }

    /// Processed incomplete edges ending at `pos` whose next child on the
    /// right is `sym`.
    #[inline]
    pub fn need_right(&self, sym: SymbolId, pos: usize) -> &[EdgeId] {
        &self.need_right[self.slot(sym, pos)]
    }

    /// Processed incomplete edges starting at `pos` whose next child on the
    /// left is `sym`.
    #[inline]
    pub fn need_left(&self, sym: SymbolId, pos: usize) -> &[EdgeId] {
        &self.need_left[self.slot(sym, pos)]
    }

    pub fn completes_at(&self, sym: SymbolId, pos: usize, side: Side) -> Vec<ConstituentRef> {
        if pos > self.words.len() {
            return Vec::new();
        }
        match side {
            Side::Starting => self.complete_by_start(sym, pos).to_vec(),
            Side::Ending => self.complete_by_end(sym, pos).to_vec(),
        }
    }

    /// Best complete constituent labelled `sym` under `rank`; ties go to
    /// the longer span, then the leftmost start, then the earlier insert.
    pub fn best_complete_by(&self, sym: SymbolId, mut rank: impl FnMut(&Edge) -> f64) -> Option<EdgeId> {
        let mut best: Option<(f64, usize, usize, EdgeId)> = None;
        for &id in self.dedup.values() {
            let e = &self.edges[id as usize];
            if !self.is_complete(e) || self.grammar.rule(e.rule).lhs != sym {
                continue;
            }
            let cand = (rank(e), e.span(), e.start, id);
            let better = match best {
                None => true,
                Some(b) => {
                    cand.0 > b.0
                        || (cand.0 == b.0
                            && (cand.1 > b.1 || (cand.1 == b.1 && (cand.2 < b.2 || (cand.2 == b.2 && cand.3 < b.3)))))
                }
            };
            if better {
                best = Some(cand);
            }
        }
        best.map(|b| b.3)
    }

    /// Best complete constituent labelled `sym` by stored score value.
    pub fn best_complete(&self, sym: SymbolId) -> Option<EdgeId> {
        self.best_complete_by(sym, |e| e.score.value())
    }

    pub fn extract_tree(&self, r: ConstituentRef) -> Result<ParseTree, ChartError> {
        match r {
            ConstituentRef::Leaf(l) => {
                let leaf = self.leaves.get(l as usize).ok_or(ChartError::Dangling(r))?;
                let word = self.words.get(leaf.pos).ok_or(ChartError::Dangling(r))?;
                Ok(ParseTree::leaf(self.grammar.name(leaf.tag), word.as_str(), leaf.pos))
            }
            ConstituentRef::Edge(id) => {
                let e = self.edges.get(id as usize).ok_or(ChartError::Dangling(r))?;
                if !self.is_complete(e) {
                    return Err(ChartError::Incomplete(r));
                }
                let children = e
                    .children
                    .iter()
                    .map(|&c| self.extract_tree(c))
                    .collect::<Result<Vec<_>, _>>()?;
                let lhs = self.grammar.rule(e.rule).lhs;
                Ok(ParseTree::node(self.grammar.name(lhs), children))
            }
        }
    }

    /// One line per current edge in key order:
    /// `[start,end) RULE lo..hi score=<value> phase=<I|II|III>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for id in self.best_edges() {
            let e = &self.edges[id as usize];
            let _ = writeln!(
                out,
                "[{},{}) {} {}..{} score={:.6} phase={}",
                e.start,
                e.end,
                self.grammar.display_rule(e.rule),
                e.lo,
                e.hi,
                e.score.value(),
                e.phase.name()
            );
        }
        out
    }

    /// Keys that appear more than once within any adjacency index list.
    pub fn duplicate_keys(&self) -> Vec<EdgeKey> {
        let mut dups = Vec::new();
        let mut check = |ids: &mut dyn Iterator<Item = EdgeId>| {
            let mut seen = std::collections::HashSet::new();
            for id in ids {
                let k = self.edges[id as usize].key();
                if !seen.insert(k) {
                    dups.push(k);
                }
            }
        };
        let edge_ids = |list: &Vec<ConstituentRef>| -> Vec<EdgeId> {
            list.iter()
                .filter_map(|r| match *r {
                    ConstituentRef::Edge(e) => Some(e),
                    ConstituentRef::Leaf(_) => None,
                })
                .collect()
        };
        for list in self.by_start.iter().chain(&self.by_end) {
            check(&mut edge_ids(list).into_iter());
        }
        for list in self.need_right.iter().chain(&self.need_left) {
            check(&mut list.iter().copied());
        }
        dups
    }

    /// Rebuilds the four indexes from the published edges and leaves and
    /// compares them with the live ones, ignoring order within a slot.
    pub fn indexes_consistent(&self) -> bool {
        let mut fresh = Chart::new(self.grammar, self.words.clone());
        for l in &self.leaves {
            fresh.add_leaf(l.pos, l.tag);
        }
        fresh.edges = self.edges.clone();
        fresh.indexed = vec![false; self.edges.len()];
        fresh.dedup = self.dedup.clone();
        for id in self.indexed_edges() {
            fresh.mark_processed(id);
        }
        let same = |a: &[Vec<ConstituentRef>], b: &[Vec<ConstituentRef>]| {
            a.iter().zip(b).all(|(x, y)| {
                let (mut x, mut y) = (x.clone(), y.clone());
                x.sort();
                y.sort();
                x == y
            })
        };
        let same_ids = |a: &[Vec<EdgeId>], b: &[Vec<EdgeId>]| {
            a.iter().zip(b).all(|(x, y)| {
                let (mut x, mut y) = (x.clone(), y.clone());
                x.sort();
                y.sort();
                x == y
            })
        };
        same(&fresh.by_start, &self.by_start)
            && same(&fresh.by_end, &self.by_end)
            && same_ids(&fresh.need_right, &self.need_right)
            && same_ids(&fresh.need_left, &self.need_left)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::Grammar;

    const G0: &str = include_str!("../fixtures/g0.grammar");

    fn setup(g: &Grammar) -> Chart<'_> {
        let s = Sentence::from_lexicon(g, &["the", "cow", "mooed"]);
        Chart::for_sentence(g, &s)
    }

    fn rule(g: &Grammar, text: &str) -> RuleId {
        let mut it = text.split_whitespace();
        let lhs = g.lookup(it.next().unwrap()).unwrap();
        it.next();
        let rhs: Vec<SymbolId> = it.map(|n| g.lookup(n).unwrap()).collect();
        g.find_rule(lhs, &rhs).unwrap()
    }

    fn edge(rule: RuleId, lo: u8, hi: u8, start: usize, end: usize, children: Vec<ConstituentRef>, lp: f64) -> Edge {
        Edge {
            rule,
            lo,
            hi,
            start,
            end,
            children,
            score: Score::from_log(lp, 1).unwrap(),
            phase: Phase::I,
            priority: 0.0,
            pred_logp: 0.0,
            predictor_span: 0,
            lc_tag: SymbolId(0),
            predicted: true,
        }
    }

    #[test]
    fn empty_chart_queries() {
        let g = Grammar::parse(G0).unwrap();
        let c = Chart::new(&g, vec!["x".into()]);
        let np = g.lookup("NP").unwrap();
        assert!(c.completes_at(np, 0, Side::Starting).is_empty());
        assert!(c.best_complete(g.lookup("S").unwrap()).is_none());
        assert!(c.completes_at(np, 9, Side::Ending).is_empty());
    }

    #[test]
    fn two_derivations_of_one_np() {
        let g = Grammar::parse(G0).unwrap();
        let mut c = setup(&g);
        let np = rule(&g, "NP -> det n");
        let kids = vec![ConstituentRef::Leaf(0), ConstituentRef::Leaf(1)];
        let first = c.add_edge(edge(np, 1, 2, 0, 2, kids.clone(), 0.0)).unwrap();
        assert_eq!(first, AddOutcome::Added(0));
        // same tree reached from the other side
        let mut second = edge(np, 1, 2, 0, 2, kids.clone(), 0.0);
        second.phase = Phase::II;
        assert_eq!(c.add_edge(second).unwrap(), AddOutcome::Duplicate(0));
        assert_eq!(c.counters.edges_created, 1);
        let better = c.add_edge(edge(np, 1, 2, 0, 2, kids, 0.5)).unwrap();
        assert_eq!(better, AddOutcome::Improved { new: 1, old: 0 });
        assert!(c.is_stale(0));
        assert!(!c.is_stale(1));
        assert_eq!(c.counters.edges_created, 1);
        assert_eq!(c.counters.completions, 1);
    }

    #[test]
    fn rejects_malformed_edges() {
        let g = Grammar::parse(G0).unwrap();
        let mut c = setup(&g);
        let np = rule(&g, "NP -> det n");
        let bad_range = edge(np, 2, 1, 0, 1, vec![], 0.0);
        assert!(matches!(c.add_edge(bad_range), Err(ChartError::InvalidEdge(_))));
        let gap = edge(np, 1, 2, 0, 3, vec![ConstituentRef::Leaf(0), ConstituentRef::Leaf(1)], 0.0);
        assert!(c.add_edge(gap).is_err());
        let wrong_label = edge(np, 1, 1, 1, 2, vec![ConstituentRef::Leaf(1)], 0.0);
        assert!(c.add_edge(wrong_label).is_err());
        let dangling = edge(np, 1, 1, 0, 1, vec![ConstituentRef::Edge(7)], 0.0);
        assert!(matches!(c.add_edge(dangling), Err(ChartError::Dangling(_))));
    }

    #[test]
    fn processing_publishes_and_replaces() {
        let g = Grammar::parse(G0).unwrap();
        let mut c = setup(&g);
        let np = rule(&g, "NP -> det n");
        let sym_np = g.lookup("NP").unwrap();
        let n = g.lookup("n").unwrap();
        let AddOutcome::Added(half) = c.add_edge(edge(np, 1, 1, 0, 1, vec![ConstituentRef::Leaf(0)], 0.0)).unwrap()
        else {
            panic!()
        };
        c.mark_processed(half);
        assert_eq!(c.need_right(n, 1), &[half]);
        let kids = vec![ConstituentRef::Leaf(0), ConstituentRef::Leaf(1)];
        let AddOutcome::Added(a) = c.add_edge(edge(np, 1, 2, 0, 2, kids.clone(), -1.0)).unwrap() else {
            panic!()
        };
        c.mark_processed(a);
        assert_eq!(c.completes_at(sym_np, 0, Side::Starting), [ConstituentRef::Edge(a)]);
        let AddOutcome::Improved { new, .. } = c.add_edge(edge(np, 1, 2, 0, 2, kids, -0.5)).unwrap() else {
            panic!()
        };
        c.mark_processed(new);
        assert_eq!(c.completes_at(sym_np, 2, Side::Ending), [ConstituentRef::Edge(new)]);
        assert!(c.duplicate_keys().is_empty());
        assert!(c.indexes_consistent());
        assert_eq!(c.indexed_edges().collect::<Vec<_>>(), [half, new]);
        let tree = c.extract_tree(ConstituentRef::Edge(new)).unwrap();
        assert_eq!(tree.to_string(), "(NP (det the) (n cow))");
        assert_eq!(
            c.dump(),
            "[0,1) NP -> det n 1..1 score=1.000000 phase=I\n[0,2) NP -> det n 1..2 score=0.606531 phase=I\n"
        );
        assert!(matches!(c.extract_tree(ConstituentRef::Edge(half)), Err(ChartError::Incomplete(_))));
        assert!(matches!(c.extract_tree(ConstituentRef::Edge(99)), Err(ChartError::Dangling(_))));
        let leaf = c.extract_tree(ConstituentRef::Leaf(2)).unwrap();
        assert_eq!(leaf.to_string(), "(v mooed)");
    }

    #[test]
    fn best_complete_tie_breaks() {
        let g = Grammar::parse("S -> a\nS -> a a\nS -> b\n%lexicon\nx : a\ny : b").unwrap();
        let s = Sentence::from_lexicon(&g, &["x", "x", "x", "y"]);
        let mut c = Chart::for_sentence(&g, &s);
        let sym = g.lookup("S").unwrap();
        let unary = rule(&g, "S -> a");
        let binary = rule(&g, "S -> a a");
        let l = ConstituentRef::Leaf;
        c.add_edge(edge(unary, 1, 1, 1, 2, vec![l(1)], 0.4f64.ln())).unwrap();
        c.add_edge(edge(binary, 1, 2, 0, 2, vec![l(0), l(1)], 0.3f64.ln())).unwrap();
        assert_eq!(c.best_complete(sym), Some(0));
        // equal score: the longer span wins
        c.add_edge(edge(binary, 1, 2, 1, 3, vec![l(1), l(2)], 0.4f64.ln())).unwrap();
        assert_eq!(c.best_complete(sym), Some(2));

        // equal score and span: leftmost start wins
        let mut c = Chart::for_sentence(&g, &s);
        c.add_edge(edge(unary, 1, 1, 2, 3, vec![l(2)], 0.4f64.ln())).unwrap();
        c.add_edge(edge(unary, 1, 1, 0, 1, vec![l(0)], 0.4f64.ln())).unwrap();
        assert_eq!(c.best_complete(sym), Some(1));
    }
}
