//! Shared helpers for integration tests: fixtures and seeded random
//! grammars and treebanks.
#![allow(dead_code)]

use std::collections::HashSet;

use picky::grammar::{Grammar, GrammarBuilder, RuleId, SymbolId, Trigram};
use picky::model::Models;
use picky::treebank::{extract_events, parse_treebank, ParseTree, Sentence};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const G0: &str = include_str!("../../fixtures/g0.grammar");
pub const G1: &str = include_str!("../../fixtures/g1.grammar");
pub const C0: &str = include_str!("../../fixtures/c0.trees");
pub const DIRECTIONS_GRAMMAR: &str = include_str!("../../fixtures/directions.grammar");
pub const DIRECTIONS_TREES: &str = include_str!("../../fixtures/directions.trees");

pub struct Fixture {
    pub grammar: Grammar,
    pub trees: Vec<ParseTree>,
    pub models: Models,
}

impl Fixture {
    pub fn load(grammar: &str, trees: &str) -> Fixture {
        let grammar = Grammar::parse(grammar).unwrap();
        let trees = parse_treebank(trees).unwrap();
        let models = Models::train_trees(&grammar, &trees).unwrap();
        Fixture { grammar, trees, models }
    }

    pub fn g0() -> Fixture {
        Fixture::load(G0, C0)
    }

    pub fn directions() -> Fixture {
        Fixture::load(DIRECTIONS_GRAMMAR, DIRECTIONS_TREES)
    }

    pub fn sentence(&self, words: &str) -> Sentence {
        let w: Vec<&str> = words.split_whitespace().collect();
        Sentence::from_lexicon(&self.grammar, &w)
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const NONTERMINALS: [&str; 4] = ["S", "A", "B", "C"];
const TAGS: [&str; 3] = ["x", "y", "z"];

/// A random grammar over nonterminals S, A, B, C and tags x, y, z, with at
/// most `max_rules` rules. Unary rules only point down the nonterminal
/// order, so unary chains cannot cycle; every nonterminal derives some
/// string because its first rule uses only tags and later nonterminals.
pub fn random_grammar(seed: u64, max_rules: usize) -> Grammar {
    assert!(max_rules >= NONTERMINALS.len());
    let mut rng = rng(seed);
    let mut b = GrammarBuilder::new();
    let mut rules: Vec<(usize, Vec<String>)> = Vec::new();
    let push = |b: &mut GrammarBuilder, rules: &mut Vec<(usize, Vec<String>)>, lhs: usize, rhs: Vec<String>| {
        let names: Vec<&str> = rhs.iter().map(String::as_str).collect();
        if b.has_rule(NONTERMINALS[lhs], &names) {
            return;
        }
        b.rule(NONTERMINALS[lhs], &names);
        rules.push((lhs, rhs));
    };
    for lhs in (0..NONTERMINALS.len()).rev() {
        let len = rng.gen_range(1..=3);
        let rhs: Vec<String> = (0..len)
            .map(|_| {
                let later = NONTERMINALS.len() - lhs - 1;
                let k = rng.gen_range(0..TAGS.len() + later);
                if k < TAGS.len() {
                    TAGS[k].to_string()
                } else {
                    NONTERMINALS[lhs + 1 + k - TAGS.len()].to_string()
                }
            })
            .collect();
        push(&mut b, &mut rules, lhs, rhs);
    }
    let target = rng.gen_range(rules.len().max(8)..=max_rules.max(8).min(max_rules));
    let mut attempts = 0;
    while rules.len() < target && attempts < 200 {
        attempts += 1;
        let lhs = rng.gen_range(0..NONTERMINALS.len());
        let len = rng.gen_range(1..=3);
        let rhs: Vec<String> = if len == 1 {
            let k = rng.gen_range(0..TAGS.len() + NONTERMINALS.len() - lhs - 1);
            if k < TAGS.len() {
                vec![TAGS[k].to_string()]
            } else {
                vec![NONTERMINALS[lhs + 1 + k - TAGS.len()].to_string()]
            }
        } else {
            (0..len)
                .map(|_| {
                    let k = rng.gen_range(0..TAGS.len() + NONTERMINALS.len());
                    if k < TAGS.len() {
                        TAGS[k].to_string()
                    } else {
                        NONTERMINALS[k - TAGS.len()].to_string()
                    }
                })
                .collect()
        };
        push(&mut b, &mut rules, lhs, rhs);
    }
    for (i, t) in TAGS.iter().enumerate() {
        b.declare_pos(t, 0);
        b.lexical_entry(t, &[t], i + 1);
    }
    b.start("S");
    b.build().expect("generated grammar is valid")
}

/// Fewest levels of rule expansion below each symbol; `None` for symbols
/// that derive nothing.
fn heights(g: &Grammar) -> Vec<Option<u32>> {
    let mut h: Vec<Option<u32>> = (0..g.num_symbols())
        .map(|i| g.is_preterminal(SymbolId(i as u32)).then_some(0))
        .collect();
    loop {
        let mut changed = false;
        for r in g.rules() {
            let below = r.rhs.iter().map(|c| h[c.index()]).try_fold(0, |m, x| x.map(|x| m.max(x)));
            if let Some(b) = below {
                let cand = b + 1;
                if h[r.lhs.index()].is_none_or(|old| cand < old) {
                    h[r.lhs.index()] = Some(cand);
                    changed = true;
                }
            }
        }
        if !changed {
            return h;
        }
    }
}

/// Samples a tree top-down from `g`. Past `soft_depth` only the shallowest
/// expansions are chosen, so the tree stays small.
pub fn random_tree(g: &Grammar, rng: &mut impl Rng, soft_depth: u32) -> ParseTree {
    let h = heights(g);
    fn grow(g: &Grammar, h: &[Option<u32>], sym: SymbolId, depth: u32, soft: u32, rng: &mut impl Rng) -> ParseTree {
        if g.is_preterminal(sym) {
            let name = g.name(sym);
            let word = g.lexicon().iter().find(|(_, tags)| tags.contains(&sym)).map(|(w, _)| w).unwrap_or(name);
            return ParseTree::leaf(name, word, 0);
        }
        let usable: Vec<_> = g
            .rules_for(sym)
            .iter()
            .copied()
            .filter(|&r| g.rule(r).rhs.iter().all(|c| h[c.index()].is_some()))
            .collect();
        let cost = |r: picky::grammar::RuleId| g.rule(r).rhs.iter().map(|c| h[c.index()].unwrap()).max().unwrap();
        let rule = if depth >= soft {
            let best = usable.iter().map(|&r| cost(r)).min().unwrap();
            let shallow: Vec<_> = usable.iter().copied().filter(|&r| cost(r) == best).collect();
            *shallow.choose(rng).unwrap()
        } else {
            *usable.choose(rng).unwrap()
        };
        let children = g
            .rule(rule)
            .rhs
            .iter()
            .map(|&c| grow(g, h, c, depth + 1, soft, rng))
            .collect();
        ParseTree::node(g.name(sym), children)
    }
    let mut t = grow(g, &h, g.start(), 0, soft_depth, rng);
    t.renumber(0);
    t
}

/// Up to `n` random trees whose yields have at most `max_len` words;
/// fewer when such trees are rare or impossible.
pub fn short_trees(g: &Grammar, rng: &mut impl Rng, n: usize, max_len: usize) -> Vec<ParseTree> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..100 * n + 1000 {
        if out.len() == n {
            break;
        }
        let t = random_tree(g, rng, 3);
        if t.word_count() <= max_len {
            out.push(t);
        }
    }
    out
}

/// Exactly `n` random trees whose yields have at most `max_len` words.
pub fn random_corpus(g: &Grammar, rng: &mut impl Rng, n: usize, max_len: usize) -> Vec<ParseTree> {
    let out = short_trees(g, rng, n, max_len);
    assert_eq!(out.len(), n, "grammar yields too few short trees");
    out
}

/// Every tag sequence of length 1 to `max_len`, shortest first.
pub fn all_tag_sequences(g: &Grammar, max_len: usize) -> Vec<Vec<SymbolId>> {
    let tags: Vec<SymbolId> = g.preterminals().collect();
    let mut out = Vec::new();
    let mut layer: Vec<Vec<SymbolId>> = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|p| {
                tags.iter().map(move |&t| {
                    let mut q = p.clone();
                    q.push(t);
                    q
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// `(rule, child index, trigram)` keys of every event in the trees.
pub fn event_keys(g: &Grammar, trees: &[ParseTree]) -> HashSet<(RuleId, u8, Trigram)> {
    trees
        .iter()
        .flat_map(|t| extract_events(t, g).unwrap())
        .map(|e| (e.rule, e.child_index, e.trigram))
        .collect()
}

/// A 50-sentence test corpus and a training corpus grown one tree at a
/// time until it covers half of the test corpus's events. `None` when the
/// grammar has too few short sentences.
pub fn half_covered_split(g: &Grammar, seed: u64) -> Option<(Vec<ParseTree>, Vec<ParseTree>)> {
    let mut r = rng(seed);
    let test = short_trees(g, &mut r, 50, 8);
    if test.len() < 50 {
        return None;
    }
    let wanted = event_keys(g, &test);
    let mut train = Vec::new();
    let mut seen = HashSet::new();
    while seen.intersection(&wanted).count() * 2 < wanted.len() {
        let t = short_trees(g, &mut r, 1, 8).pop()?;
        seen.extend(event_keys(g, std::slice::from_ref(&t)));
        train.push(t);
        if train.len() >= 1000 {
            return None;
        }
    }
    Some((train, test))
}
