use super::*;
use crate::chart::Side;
use crate::model::tree_log_prob;
use crate::treebank::{parse_treebank, ParseTree};

const G0: &str = include_str!("../../fixtures/g0.grammar");
const C0: &str = include_str!("../../fixtures/c0.trees");

struct Fx {
    g: Grammar,
    m: Models,
    trees: Vec<ParseTree>,
}

fn fx() -> Fx {
    let g = Grammar::parse(G0).unwrap();
    let trees = parse_treebank(C0).unwrap();
    let m = Models::train_trees(&g, &trees).unwrap();
    Fx { g, m, trees }
}

impl Fx {
    fn run(&self, words: &str, cfg: ParserConfig) -> (ParseResult, Chart<'_>) {
        let w: Vec<&str> = words.split_whitespace().collect();
        let s = Sentence::from_lexicon(&self.g, &w);
        Parser::new(&self.g, &self.m, cfg).unwrap().parse_with_chart(&s)
    }
}

fn phases(text: &str) -> PhaseSet {
    text.parse().unwrap()
}

#[test]
fn the_cow_mooed_in_phase_one() {
    let f = fx();
    let cfg = ParserConfig {
        record_trace: true,
        ..ParserConfig::default().with_phases(phases("I"))
    };
    let (r, chart) = f.run("the cow mooed", cfg);
    assert_eq!(r.status, ParseStatus::Parsed);
    assert_eq!(r.tree.as_ref(), Some(&f.trees[1]));
    assert_eq!(r.phase_reached, Some(Phase::I));
    assert_eq!(r.stats.predictions, 6);
    assert_eq!(r.stats.completions, 3);
    assert_eq!(r.stats.edges_created, 8);
    let lp = r.log_prob.unwrap();
    assert!((lp - (2.0f64 / 3.0).ln()).abs() < 1e-12);
    let s = Sentence::from_lexicon(&f.g, &["the", "cow", "mooed"]);
    let exact = tree_log_prob(&f.g, &f.m.csp, r.tree.as_ref().unwrap(), &s).unwrap();
    assert!((lp - exact).abs() < 1e-9);
    let np = f.g.lookup("NP").unwrap();
    assert_eq!(chart.completes_at(np, 0, Side::Starting).len(), 1);
}

#[test]
fn all_phases_stop_in_phase_one_when_covered() {
    let f = fx();
    let (r, _) = f.run("the cow mooed", ParserConfig::default());
    assert_eq!(r.phase_reached, Some(Phase::I));
    assert_eq!(r.stats.predictions_by_phase, [6, 0, 0]);
    for t in &f.trees {
        let words: Vec<String> = t.leaves().iter().map(|(_, w)| w.to_string()).collect();
        let (r, _) = f.run(&words.join(" "), ParserConfig::default());
        assert_eq!(r.tree.as_ref(), Some(t));
        assert_eq!(r.stats.predictions_by_phase[2], 0);
    }
}

#[test]
fn lexical_gap() {
    let f = fx();
    let (r, _) = f.run("the zyzzyva mooed", ParserConfig::default());
    assert_eq!(r.status, ParseStatus::LexicalGap);
    assert!(r.tree.is_none());
    assert_eq!(r.phase_reached, None);
}

#[test]
fn budget_of_one_edge() {
    let f = fx();
    let (r, _) = f.run("the cow raced past the barn", ParserConfig::default().with_max_edges(Some(1)));
    assert!(matches!(r.status, ParseStatus::NoParse | ParseStatus::Partial));
    assert!(r.stats.edges_created <= 1);
    assert!(r.budget_exhausted);
}

#[test]
fn same_np_from_both_sides_is_stored_once() {
    let f = fx();
    let cfg = ParserConfig {
        record_trace: true,
        stop_on_first_span: false,
        ..ParserConfig::default().with_phases(phases("I,II"))
    };
    let (r, chart) = f.run("the cow", cfg);
    let np_dn = f
        .g
        .find_rule(f.g.lookup("NP").unwrap(), &[f.g.lookup("det").unwrap(), f.g.lookup("n").unwrap()])
        .unwrap();
    let full_np: Vec<_> = r
        .trace
        .iter()
        .filter(|t| t.key.rule == np_dn && t.key.lo == 1 && t.key.hi == 2)
        .collect();
    assert!(full_np.len() >= 2, "{full_np:?}");
    assert_eq!(full_np.iter().filter(|t| t.outcome == TraceOutcome::Added).count(), 1);
    // one derivation came from the noun's side in phase II
    assert!(r.trace.iter().any(|t| t.key.rule == np_dn && t.key.lo == 2 && t.key.hi == 2 && t.phase == Phase::II));
    assert!(chart.duplicate_keys().is_empty());
    assert!(chart.indexes_consistent());
}

#[test]
fn deterministic() {
    let f = fx();
    let a = f.run("the cow raced past the barn", ParserConfig::exhaustive()).0;
    let b = f.run("the cow raced past the barn", ParserConfig::exhaustive()).0;
    assert_eq!(a, b);
}

#[test]
fn exhaustive_matches_tree_probability() {
    let f = fx();
    for words in ["the cow raced past the barn", "the cow past the barn mooed", "the cow raced the barn"] {
        let (r, chart) = f.run(words, ParserConfig::exhaustive());
        let w: Vec<&str> = words.split_whitespace().collect();
        let s = Sentence::from_lexicon(&f.g, &w);
        assert_eq!(r.status, ParseStatus::Parsed, "{words}");
        let exact = tree_log_prob(&f.g, &f.m.csp, r.tree.as_ref().unwrap(), &s).unwrap();
        let lp = r.log_prob.unwrap();
        assert!(lp == exact || (lp - exact).abs() < 1e-9, "{words}: {lp} vs {exact}");
        assert!(chart.duplicate_keys().is_empty());
        assert!(chart.indexes_consistent());
    }
}

#[test]
fn ungrammatical_gives_partial_or_nothing() {
    let f = fx();
    let (r, _) = f.run("mooed the cow", ParserConfig::exhaustive());
    assert_eq!(r.status, ParseStatus::NoParse);
    let (r, _) = f.run("the cow mooed the", ParserConfig::exhaustive());
    assert_eq!(r.status, ParseStatus::Partial);
    assert_eq!(r.tree.unwrap().word_count(), 3);
}

#[test]
fn phase_three_alone_parses() {
    let f = fx();
    let (r, _) = f.run("the cow raced past the barn", ParserConfig::default().with_phases(phases("III")));
    assert_eq!(r.status, ParseStatus::Parsed);
    assert_eq!(r.phase_reached, Some(Phase::III));
    assert_eq!(r.stats.predictions_by_phase[0], 0);
}

#[test]
fn phase3_ordering() {
    let s = |v: f64| Score::single(v).unwrap();
    assert!(phase3_priority(5, 1, s(0.1)) > phase3_priority(2, 2, s(1.0)));
    assert!(phase3_priority(3, 1, s(0.6)) > phase3_priority(3, 2, s(0.5)));
    assert_eq!(phase3_priority(3, 1, s(0.5)), phase3_priority(1, 3, s(0.5)));
}

#[test]
fn score_floor_stops_early_phases() {
    let f = fx();
    let cfg = ParserConfig {
        min_score: Some(0.99),
        ..ParserConfig::default().with_phases(phases("I,II"))
    };
    let (r, _) = f.run("the cow mooed", cfg);
    assert_ne!(r.status, ParseStatus::Parsed);
}
