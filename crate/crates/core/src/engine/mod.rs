//! The three-phase parser.
//!
//! Phase I proposes rules whose first child is seen over a word's trigram
//! and grows them rightward. Phase II proposes rules at any child position
//! over completed constituents and grows them in both directions. Phase
//! III predicts exhaustively (over the top from every constituent, top
//! down from every partial edge) and orders work by span length.

mod config;

use std::collections::{HashMap, HashSet};

use log::debug;

use crate::agenda::Agenda;
use crate::chart::{AddOutcome, Chart, ConstituentRef, Edge, EdgeId, LeafId};
use crate::grammar::{Grammar, RuleId, SymbolId, Trigram};
use crate::model::{Models, Score};
use crate::treebank::{ParentContext, Sentence};

pub use config::{
    parse_edge_limit, ConfigError, ParseResult, ParseStats, ParseStatus, ParserConfig, Phase, PhaseSet, TraceEntry,
    TraceOutcome,
};

/// Priority for a phase-I exception when the trigram has no mass at all.
pub const EXCEPTION_FLOOR: f64 = 1e-9;

pub struct Parser<'a> {
    grammar: &'a Grammar,
    models: &'a Models,
    config: ParserConfig,
}

impl<'a> Parser<'a> {
    pub fn new(grammar: &'a Grammar, models: &'a Models, config: ParserConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        Ok(Parser {
            grammar,
            models,
            config,
        })
    }

    pub fn config(&self) -> &ParserConfig {
        &self.config
    }

    pub fn parse(&self, sentence: &Sentence) -> ParseResult {
        self.parse_with_chart(sentence).0
    }

    /// Parses and hands back the final chart for inspection.
    pub fn parse_with_chart(&self, sentence: &Sentence) -> (ParseResult, Chart<'a>) {
        let mut run = Run::new(self.grammar, self.models, &self.config, sentence);
        let result = run.run();
        if log::log_enabled!(log::Level::Debug) {
            debug!("chart for `{}`:\n{}", sentence.words.join(" "), run.chart.dump());
        }
        (result, run.chart)
    }
}

/// One-shot convenience wrapper around [`Parser`].
pub fn parse(
    sentence: &Sentence,
    grammar: &Grammar,
    models: &Models,
    config: &ParserConfig,
) -> Result<ParseResult, ConfigError> {
    Ok(Parser::new(grammar, models, config.clone())?.parse(sentence))
}

/// A pending instantiation: when a constituent labelled with the seek's
/// symbol appears at its position, the rule is started over it.
#[derive(Clone, Copy, Debug)]
struct Seek {
    rule: RuleId,
    /// Only constituents with this left-corner tag qualify.
    lc_filter: Option<SymbolId>,
    origin: Phase,
    pred_logp: f64,
    predictor_span: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Corner {
    Left,
    Right,
}

struct Run<'a, 's> {
    g: &'a Grammar,
    m: &'a Models,
    cfg: &'s ParserConfig,
    sentence: &'s Sentence,
    chart: Chart<'a>,
    agenda: Agenda<EdgeId>,
    phase: Phase,
    phase_reached: Option<Phase>,
    leaf_ids: Vec<Vec<(SymbolId, LeafId)>>,
    lc_seeks: HashMap<(SymbolId, usize), Vec<Seek>>,
    rc_seeks: HashMap<(SymbolId, usize), Vec<Seek>>,
    seek_seen: HashSet<(Corner, SymbolId, usize, RuleId, Option<SymbolId>)>,
    rule_probs: HashMap<(RuleId, ParentContext, usize, SymbolId), f64>,
    full_span: bool,
    halted: bool,
    trace: Vec<TraceEntry>,
}

impl<'a, 's> Run<'a, 's> {
    fn new(g: &'a Grammar, m: &'a Models, cfg: &'s ParserConfig, sentence: &'s Sentence) -> Self {
        let chart = Chart::for_sentence(g, sentence);
        let mut leaf_ids = vec![Vec::new(); sentence.len()];
        for (id, leaf) in chart.leaves().iter().enumerate() {
            leaf_ids[leaf.pos].push((leaf.tag, id as LeafId));
        }
        Run {
            g,
            m,
            cfg,
            sentence,
            chart,
            agenda: Agenda::new(),
            phase: Phase::I,
            phase_reached: None,
            leaf_ids,
            lc_seeks: HashMap::new(),
            rc_seeks: HashMap::new(),
            seek_seen: HashSet::new(),
            rule_probs: HashMap::new(),
            full_span: false,
            halted: false,
            trace: Vec::new(),
        }
    }

    fn run(&mut self) -> ParseResult {
        if self.sentence.is_empty() {
            return self.finish(ParseStatus::NoParse);
        }
        if self.sentence.lexical_gap().is_some() {
            return self.finish(ParseStatus::LexicalGap);
        }
        for phase in self.cfg.phases.iter() {
            if self.halted || (self.cfg.stop_on_first_span && self.full_span) {
                break;
            }
            self.phase = phase;
            self.phase_reached = Some(phase);
            match phase {
                Phase::I => self.enter_phase1(),
                Phase::II => self.enter_phase2(),
                Phase::III => self.enter_phase3(),
            }
            self.drain();
        }
        self.finish(ParseStatus::NoParse)
    }

    fn stopped(&self) -> bool {
        self.halted || (self.cfg.stop_on_first_span && self.full_span)
    }

    fn drain(&mut self) {
        while !self.stopped() {
            let Some(top) = self.agenda.peek() else { break };
            let id = top.item;
            if self.chart.is_stale(id) {
                self.agenda.pop_best();
                continue;
            }
            if let (Some(floor), Phase::I | Phase::II) = (self.cfg.min_score, self.phase) {
                if top.priority < floor {
                    break;
                }
            }
            self.agenda.pop_best();
            if let (Some(floor), Phase::III) = (self.cfg.min_score, self.phase) {
                if self.chart.edge(id).score.value() < floor {
                    continue;
                }
            }
            self.process(id);
        }
    }

    fn process(&mut self, id: EdgeId) {
        self.chart.mark_processed(id);
        let e = self.chart.edge(id);
        if self.chart.is_complete(e) {
            self.on_complete(ConstituentRef::Edge(id));
        } else {
            self.on_incomplete(id);
        }
    }

    fn on_complete(&mut self, c: ConstituentRef) {
        let label = self.chart.label(c);
        let (start, end) = self.chart.span(c);
        for e in self.chart.need_right(label, start).to_vec() {
            self.extend(e, c, true);
        }
        for e in self.chart.need_left(label, end).to_vec() {
            self.extend(e, c, false);
        }
        if let Some(seeks) = self.lc_seeks.get(&(label, start)).cloned() {
            for s in seeks {
                self.fire(s, c, Corner::Left);
            }
        }
        if let Some(seeks) = self.rc_seeks.get(&(label, end)).cloned() {
            for s in seeks {
                self.fire(s, c, Corner::Right);
            }
        }
        match self.phase {
            Phase::I => {}
            Phase::II => self.propose_any_child(c),
            Phase::III => self.over_the_top(c),
        }
    }

    fn on_incomplete(&mut self, id: EdgeId) {
        let e = self.chart.edge(id);
        let rule = self.g.rule(e.rule);
        let (lo, hi, start, end) = (e.lo as usize, e.hi as usize, e.start, e.end);
        if hi < rule.arity() {
            for c in self.chart.complete_by_start(rule.child(hi + 1), end).to_vec() {
                self.extend(id, c, true);
            }
        }
        if lo > 1 {
            for c in self.chart.complete_by_end(rule.child(lo - 1), start).to_vec() {
                self.extend(id, c, false);
            }
        }
        if self.phase == Phase::III {
            self.top_down(id);
        }
    }

    fn trigram_at(&self, pos: usize, tag: SymbolId) -> Trigram {
        self.sentence.trigram(pos, tag)
    }

    /// Score added by placing `c` at `position` of `parent`.
    fn contribution(&mut self, c: ConstituentRef, parent: RuleId, position: usize) -> Score {
        let ConstituentRef::Edge(id) = c else {
            return Score::EMPTY;
        };
        let e = self.chart.edge(id);
        let ctx = ParentContext::Child {
            rule: parent,
            position: position as u8,
        };
        let (rule, start, lc, score) = (e.rule, e.start, e.lc_tag, e.score);
        let p = self.rule_prob(rule, ctx, start, lc);
        score.with(p)
    }

    fn rule_prob(&mut self, rule: RuleId, ctx: ParentContext, start: usize, lc: SymbolId) -> f64 {
        if let Some(&p) = self.rule_probs.get(&(rule, ctx, start, lc)) {
            return p;
        }
        let t = self.trigram_at(start, lc);
        let p = self.m.csp.prob(self.g, rule, ctx, t);
        self.rule_probs.insert((rule, ctx, start, lc), p);
        p
    }

    /// Log-probability of a complete start-symbol edge as a whole tree.
    fn rooted_log_prob(&mut self, id: EdgeId) -> f64 {
        let e = self.chart.edge(id);
        let (rule, start, lc, lp) = (e.rule, e.start, e.lc_tag, e.score.log_prob_sum);
        lp + self.rule_prob(rule, ParentContext::Root, start, lc).ln()
    }

    fn rooted_score(&mut self, id: EdgeId) -> Score {
        let e = self.chart.edge(id);
        let (rule, start, lc, score) = (e.rule, e.start, e.lc_tag, e.score);
        score.with(self.rule_prob(rule, ParentContext::Root, start, lc))
    }

    fn priority(&self, score: Score, pred_logp: f64, span: usize, predictor_span: usize) -> f64 {
        match self.phase {
            Phase::I | Phase::II => (score + Score::from_log(pred_logp, 1).unwrap_or(Score::EMPTY)).value(),
            Phase::III => phase3_priority(predictor_span, span, score),
        }
    }

    /// Starts `rule` at child `i` over `c`.
    fn predict(&mut self, rule: RuleId, i: usize, c: ConstituentRef, origin: Phase, pred_logp: f64, predictor_span: usize) {
        let (start, end) = self.chart.span(c);
        let score = self.contribution(c, rule, i);
        let edge = Edge {
            rule,
            lo: i as u8,
            hi: i as u8,
            start,
            end,
            children: vec![c],
            score,
            phase: origin,
            priority: self.priority(score, pred_logp, end - start, predictor_span),
            pred_logp,
            predictor_span,
            lc_tag: self.chart.lc_tag(c),
            predicted: true,
        };
        self.insert(edge);
    }

    fn extend(&mut self, id: EdgeId, c: ConstituentRef, rightward: bool) {
        let e = self.chart.edge(id);
        let (rule, lo, hi) = (e.rule, e.lo, e.hi);
        let position = if rightward { hi as usize + 1 } else { lo as usize - 1 };
        let (cs, ce) = self.chart.span(c);
        let e = self.chart.edge(id);
        let mut children = Vec::with_capacity(e.children.len() + 1);
        let (start, end, lc_tag) = if rightward {
            children.extend_from_slice(&e.children);
            children.push(c);
            (e.start, ce, e.lc_tag)
        } else {
            children.push(c);
            children.extend_from_slice(&e.children);
            (cs, e.end, self.chart.lc_tag(c))
        };
        let (base, origin, pred_logp, predictor_span) = (e.score, e.phase, e.pred_logp, e.predictor_span);
        let score = base + self.contribution(c, rule, position);
        let (lo, hi) = if rightward { (lo, hi + 1) } else { (lo - 1, hi) };
        let edge = Edge {
            rule,
            lo,
            hi,
            start,
            end,
            children,
            score,
            phase: origin,
            priority: self.priority(score, pred_logp, end - start, predictor_span),
            pred_logp,
            predictor_span,
            lc_tag,
            predicted: false,
        };
        self.insert(edge);
    }

    fn insert(&mut self, edge: Edge) {
        if self.halted {
            return;
        }
        let key = edge.key();
        if let Some(max) = self.cfg.max_edges {
            if self.chart.lookup(&key).is_none() && self.chart.counters.edges_created >= max {
                self.halted = true;
                return;
            }
        }
        let (predicted, priority) = (edge.predicted, edge.priority);
        let outcome = self.chart.add_edge(edge).expect("engine built a malformed edge");
        if self.cfg.record_trace {
            self.trace.push(TraceEntry {
                phase: self.phase,
                key,
                predicted,
                outcome: match outcome {
                    AddOutcome::Added(_) => TraceOutcome::Added,
                    AddOutcome::Improved { .. } => TraceOutcome::Improved,
                    AddOutcome::Duplicate(_) => TraceOutcome::Duplicate,
                },
            });
        }
        let id = match outcome {
            AddOutcome::Added(id) | AddOutcome::Improved { new: id, .. } => id,
            AddOutcome::Duplicate(_) => return,
        };
        self.agenda.push(id, priority);
        let e = self.chart.edge(id);
        if e.start == 0
            && e.end == self.sentence.len()
            && self.chart.is_complete(e)
            && self.g.rule(e.rule).lhs == self.g.start()
        {
            self.full_span = true;
        }
    }

    fn register(&mut self, corner: Corner, sym: SymbolId, pos: usize, seek: Seek) {
        if !self.seek_seen.insert((corner, sym, pos, seek.rule, seek.lc_filter)) {
            return;
        }
        let existing = match corner {
            Corner::Left => {
                self.lc_seeks.entry((sym, pos)).or_default().push(seek);
                self.chart.complete_by_start(sym, pos).to_vec()
            }
            Corner::Right => {
                self.rc_seeks.entry((sym, pos)).or_default().push(seek);
                self.chart.complete_by_end(sym, pos).to_vec()
            }
        };
        for c in existing {
            self.fire(seek, c, corner);
        }
    }

    fn fire(&mut self, s: Seek, c: ConstituentRef, corner: Corner) {
        if s.lc_filter.is_some_and(|tag| tag != self.chart.lc_tag(c)) {
            return;
        }
        let i = match corner {
            Corner::Left => 1,
            Corner::Right => self.g.rule(s.rule).arity(),
        };
        let span = {
            let (a, b) = self.chart.span(c);
            b - a
        };
        self.predict(s.rule, i, c, s.origin, s.pred_logp, s.predictor_span.max(span));
    }

    fn leaf(&self, pos: usize, tag: SymbolId) -> ConstituentRef {
        let id = self.leaf_ids[pos]
            .iter()
            .find(|(t, _)| *t == tag)
            .map(|&(_, id)| id)
            .expect("leaf for a seeded tag");
        ConstituentRef::Leaf(id)
    }

    /// Covered left-corner prediction from each word's trigram, plus every
    /// rule whose first child is the word's tag regardless of mass.
    fn enter_phase1(&mut self) {
        let pm = &self.m.prediction;
        for j in 0..self.sentence.len() {
            for &c in &self.sentence.tags[j].clone() {
                let t = self.trigram_at(j, c);
                let covered: Vec<(RuleId, f64)> = pm
                    .predictions(&t)
                    .filter(|&(_, i, _)| i == 1)
                    .map(|(r, _, p)| (r, p))
                    .collect();
                for &(r, p) in &covered {
                    let first = self.g.rule(r).left_corner();
                    if first == c {
                        self.predict(r, 1, self.leaf(j, c), Phase::I, p.ln(), 1);
                    } else if self.g.is_nonterminal(first) {
                        let seek = Seek {
                            rule: r,
                            lc_filter: Some(c),
                            origin: Phase::I,
                            pred_logp: p.ln(),
                            predictor_span: 0,
                        };
                        self.register(Corner::Left, first, j, seek);
                    }
                }
                let floor = pm.min_positive(&t).unwrap_or(EXCEPTION_FLOOR);
                for &r in self.g.rules_with_left_corner(c) {
                    if pm.prob(r, 1, &t) == 0.0 {
                        self.predict(r, 1, self.leaf(j, c), Phase::I, floor.ln(), 1);
                    }
                }
            }
        }
    }

    /// Every constituent already built, leaves first, in creation order.
    fn complete_constituents(&self) -> Vec<ConstituentRef> {
        let mut out: Vec<ConstituentRef> = (0..self.chart.leaves().len() as LeafId).map(ConstituentRef::Leaf).collect();
        out.extend(
            self.chart
                .indexed_edges()
                .filter(|&id| self.chart.is_complete(self.chart.edge(id)))
                .map(ConstituentRef::Edge),
        );
        out
    }

    fn enter_phase2(&mut self) {
        for c in self.complete_constituents() {
            self.propose_any_child(c);
        }
    }

    /// Rules seen with `c`'s label at some child position over its trigram.
    fn propose_any_child(&mut self, c: ConstituentRef) {
        let label = self.chart.label(c);
        let (start, end) = self.chart.span(c);
        let t = self.trigram_at(start, self.chart.lc_tag(c));
        let found: Vec<(RuleId, u8, f64)> = self
            .m
            .prediction
            .predictions(&t)
            .filter(|&(r, i, _)| self.g.rule(r).child(i as usize) == label)
            .collect();
        for (r, i, p) in found {
            self.predict(r, i as usize, c, Phase::II, p.ln(), end - start);
        }
    }

    fn enter_phase3(&mut self) {
        for c in self.complete_constituents() {
            self.over_the_top(c);
        }
        let partial: Vec<EdgeId> = self
            .chart
            .indexed_edges()
            .filter(|&id| !self.chart.is_complete(self.chart.edge(id)))
            .collect();
        for id in partial {
            self.top_down(id);
        }
    }

    /// Starts every rule whose first child is `c`'s label, except those
    /// phase I already started from the same trigram.
    fn over_the_top(&mut self, c: ConstituentRef) {
        let phase1 = self.cfg.phases.contains(Phase::I);
        if phase1 && matches!(c, ConstituentRef::Leaf(_)) {
            return;
        }
        let label = self.chart.label(c);
        let (start, end) = self.chart.span(c);
        let t = self.trigram_at(start, self.chart.lc_tag(c));
        for &r in self.g.rules_with_left_corner(label) {
            if phase1 && self.m.prediction.prob(r, 1, &t) > 0.0 {
                continue;
            }
            self.predict(r, 1, c, Phase::III, 0.0, end - start);
        }
    }

    /// Seeks expansions of the nonterminals a partial edge still needs on
    /// either side.
    fn top_down(&mut self, id: EdgeId) {
        let e = self.chart.edge(id);
        let rule = self.g.rule(e.rule);
        let (lo, hi, start, end, span) = (e.lo as usize, e.hi as usize, e.start, e.end, e.span());
        let mut seeks: Vec<(Corner, SymbolId, usize, RuleId)> = Vec::new();
        if hi < rule.arity() && end < self.sentence.len() {
            let need = rule.child(hi + 1);
            for &r in self.g.rules_for(need) {
                seeks.push((Corner::Left, self.g.rule(r).left_corner(), end, r));
            }
        }
        if lo > 1 && start > 0 {
            let need = rule.child(lo - 1);
            for &r in self.g.rules_for(need) {
                seeks.push((Corner::Right, self.g.rule(r).right_corner(), start, r));
            }
        }
        for (corner, sym, pos, r) in seeks {
            let seek = Seek {
                rule: r,
                lc_filter: None,
                origin: Phase::III,
                pred_logp: 0.0,
                predictor_span: span,
            };
            self.register(corner, sym, pos, seek);
        }
    }

    fn finish(&mut self, fallback: ParseStatus) -> ParseResult {
        let c = self.chart.counters;
        let stats = ParseStats {
            predictions: c.predictions,
            predictions_by_phase: c.predictions_by_phase,
            completions: c.completions,
            edges_created: c.edges_created,
            needed_constituents: None,
        };
        let mut result = ParseResult {
            status: fallback,
            tree: None,
            log_prob: None,
            phase_reached: self.phase_reached,
            budget_exhausted: self.halted,
            stats,
            trace: std::mem::take(&mut self.trace),
        };
        if fallback == ParseStatus::LexicalGap || self.sentence.is_empty() {
            return result;
        }
        let start_sym = self.g.start();
        let n = self.sentence.len();
        let mut best: Option<(f64, EdgeId)> = None;
        for id in self.chart.best_edges() {
            let e = self.chart.edge(id);
            if e.start != 0 || e.end != n || !self.chart.is_complete(e) || self.g.rule(e.rule).lhs != start_sym {
                continue;
            }
            let lp = self.rooted_log_prob(id);
            if best.is_none_or(|(b, _)| lp > b) {
                best = Some((lp, id));
            }
        }
        let chosen = match best {
            Some((lp, id)) => {
                result.status = ParseStatus::Parsed;
                Some((lp, id))
            }
            None => {
                let mut ranks = HashMap::new();
                for id in self.chart.best_edges() {
                    let e = self.chart.edge(id);
                    if self.chart.is_complete(e) && self.g.rule(e.rule).lhs == start_sym {
                        ranks.insert(id, self.rooted_score(id));
                    }
                }
                let pick = self
                    .chart
                    .best_complete_by(start_sym, |e| {
                        let key = e.key();
                        let id = self.chart.lookup(&key).expect("current edge");
                        ranks[&id].value()
                    });
                pick.map(|id| {
                    result.status = ParseStatus::Partial;
                    (ranks[&id].log_prob_sum, id)
                })
            }
        };
        if let Some((lp, id)) = chosen {
            result.tree = Some(self.chart.extract_tree(ConstituentRef::Edge(id)).expect("chart is consistent"));
            result.log_prob = Some(lp);
        }
        result
    }
}

/// Phase-III agenda key: span of the predicting subtree (or the edge's own
/// span, if larger) first, then the geometric-mean score. Scores are at
/// most 1, so halving them keeps the span term dominant.
pub fn phase3_priority(predictor_span: usize, span: usize, score: Score) -> f64 {
    predictor_span.max(span) as f64 + score.value() / 2.0
}

#[cfg(test)]
mod tests;
