//! Context-free rule base, symbol table and lexicon.
//!
//! Symbol ids are dense and assigned in order of first appearance, after the
//! two reserved boundary symbols `<s>` (id 0) and `</s>` (id 1). A symbol
//! that appears on the left of some rule is a nonterminal; every other
//! symbol is a part of speech (preterminal).

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub u32);

impl SymbolId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Sentence-start padding symbol.
pub const BOS: SymbolId = SymbolId(0);
/// Sentence-end padding symbol.
pub const EOS: SymbolId = SymbolId(1);

const BOS_NAME: &str = "<s>";
const EOS_NAME: &str = "</s>";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Nonterminal,
    Preterminal,
    Boundary,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symbol {
    pub id: SymbolId,
    pub name: String,
    pub kind: SymbolKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleId(pub u32);

impl RuleId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub id: RuleId,
    pub lhs: SymbolId,
    pub rhs: Vec<SymbolId>,
}

impl Rule {
    #[inline]
    pub fn arity(&self) -> usize {
        self.rhs.len()
    }

    /// Child symbol at a 1-based position.
    #[inline]
    pub fn child(&self, index: usize) -> SymbolId {
        self.rhs[index - 1]
    }

    #[inline]
    pub fn left_corner(&self) -> SymbolId {
        self.rhs[0]
    }

    #[inline]
    pub fn right_corner(&self) -> SymbolId {
        self.rhs[self.rhs.len() - 1]
    }
}

/// Part-of-speech triple `(left neighbour, left corner, right neighbour)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trigram(pub [SymbolId; 3]);

impl Trigram {
    pub fn new(left: SymbolId, center: SymbolId, right: SymbolId) -> Self {
        Trigram([left, center, right])
    }

    pub fn left(&self) -> SymbolId {
        self.0[0]
    }

    pub fn center(&self) -> SymbolId {
        self.0[1]
    }

    pub fn right(&self) -> SymbolId {
        self.0[2]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: undeclared symbol `{name}`")]
    UndeclaredSymbol { name: String, line: usize },
    #[error("line {line}: rule for `{lhs}` has an empty right-hand side")]
    EpsilonRule { lhs: String, line: usize },
    #[error("line {line}: duplicate rule `{rule}`")]
    DuplicateRule { rule: String, line: usize },
    #[error("unary rules form a cycle: {}", .0.join(" -> "))]
    UnaryCycle(Vec<String>),
    #[error("`{0}` is used both as a nonterminal and as a part of speech")]
    KindConflict(String),
    #[error("`{0}` is a reserved symbol name")]
    Reserved(String),
    #[error("grammar has no rules")]
    NoRules,
    #[error("`{0}` is not a symbol of this grammar")]
    UnknownSymbol(String),
}

/// Word to part-of-speech map. Tags keep their declaration order; the first
/// tag of a word is its primary tag.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: HashMap<String, Vec<SymbolId>>,
    order: Vec<String>,
}

impl Lexicon {
    /// Tags of `word`, empty when the word is unknown.
    pub fn pos_tags(&self, word: &str) -> &[SymbolId] {
        self.entries.get(word).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Entries in first-appearance order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[SymbolId])> {
        self.order
            .iter()
            .map(move |w| (w.as_str(), self.entries[w].as_slice()))
    }

    fn insert(&mut self, word: &str, tag: SymbolId) {
        match self.entries.get_mut(word) {
            Some(tags) => {
                if !tags.contains(&tag) {
                    tags.push(tag);
                }
            }
            None => {
                self.order.push(word.to_string());
                self.entries.insert(word.to_string(), vec![tag]);
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Grammar {
    symbols: Vec<Symbol>,
    by_name: HashMap<String, SymbolId>,
    rules: Vec<Rule>,
    rule_lookup: HashMap<(SymbolId, Vec<SymbolId>), RuleId>,
    start: SymbolId,
    by_lhs: Vec<Vec<RuleId>>,
    by_member: Vec<Vec<(RuleId, usize)>>,
    by_left_corner: Vec<Vec<RuleId>>,
    by_right_corner: Vec<Vec<RuleId>>,
    lexicon: Lexicon,
}

impl Grammar {
    /// Reads the grammar file format: `LHS -> RHS...` rules, optional
    /// `%start SYM` and `%pos TAG...` directives, and a lexicon section
    /// introduced by `%lexicon` with `word : tag...` entries.
    pub fn parse(text: &str) -> Result<Grammar, GrammarError> {
        let mut builder = GrammarBuilder::default();
        let mut in_lexicon = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let content = match raw.find('#') {
                Some(at) => &raw[..at],
                None => raw,
            };
            if content.trim().is_empty() {
                continue;
            }
            let tokens = tokenize(content);
            let (first_col, first) = tokens[0];
            if let Some(directive) = first.strip_prefix('%') {
                match directive {
                    "lexicon" if tokens.len() == 1 => in_lexicon = true,
                    "start" if tokens.len() == 2 => {
                        builder.start_at(tokens[1].1, line_no);
                    }
                    "pos" if tokens.len() >= 2 => {
                        for &(_, tag) in &tokens[1..] {
                            builder.declare_pos(tag, line_no);
                        }
                    }
                    _ => {
                        return Err(GrammarError::Syntax {
                            line: line_no,
                            column: first_col,
                            message: format!("malformed directive `{}`", content.trim()),
                        })
                    }
                }
                continue;
            }
            if in_lexicon {
                if tokens.len() < 2 || tokens[1].1 != ":" {
                    let column = tokens.get(1).map_or(first_col + first.len(), |t| t.0);
                    return Err(GrammarError::Syntax {
                        line: line_no,
                        column,
                        message: "expected `word : tag...`".into(),
                    });
                }
                if tokens.len() == 2 {
                    return Err(GrammarError::Syntax {
                        line: line_no,
                        column: tokens[1].0 + 1,
                        message: format!("word `{first}` has no tags"),
                    });
                }
                let tags: Vec<&str> = tokens[2..].iter().map(|t| t.1).collect();
                builder.lexical_entry(first, &tags, line_no);
                continue;
            }
            let arrow = tokens.iter().position(|t| t.1 == "->");
            match arrow {
                Some(1) => {
                    let rhs: Vec<&str> = tokens[2..].iter().map(|t| t.1).collect();
                    builder.rule_at(first, &rhs, line_no);
                }
                Some(0) => {
                    return Err(GrammarError::Syntax {
                        line: line_no,
                        column: first_col,
                        message: "rule has no left-hand side".into(),
                    })
                }
                Some(_) => {
                    return Err(GrammarError::Syntax {
                        line: line_no,
                        column: tokens[1].0,
                        message: "left-hand side must be a single symbol".into(),
                    })
                }
                None => {
                    return Err(GrammarError::Syntax {
                        line: line_no,
                        column: first_col,
                        message: "expected `LHS -> RHS...`".into(),
                    })
                }
            }
        }
        builder.build()
    }

    /// Writes the grammar back in the file format accepted by [`Grammar::parse`].
    /// Parsing the output yields identical symbol and rule ids.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for rule in &self.rules {
            out.push_str(&self.display_rule(rule.id));
            out.push('\n');
        }
        let mut in_rules = vec![false; self.symbols.len()];
        for rule in &self.rules {
            in_rules[rule.lhs.index()] = true;
            for s in &rule.rhs {
                in_rules[s.index()] = true;
            }
        }
        let extra: Vec<&str> = self
            .symbols
            .iter()
            .filter(|s| s.kind == SymbolKind::Preterminal && !in_rules[s.id.index()])
            .map(|s| s.name.as_str())
            .collect();
        if !extra.is_empty() {
            let _ = writeln!(out, "%pos {}", extra.join(" "));
        }
        if self.rules.first().map(|r| r.lhs) != Some(self.start) {
            let _ = writeln!(out, "%start {}", self.name(self.start));
        }
        if !self.lexicon.is_empty() {
            out.push_str("%lexicon\n");
            for (word, tags) in self.lexicon.iter() {
                let names: Vec<&str> = tags.iter().map(|&t| self.name(t)).collect();
                let _ = writeln!(out, "{word} : {}", names.join(" "));
            }
        }
        out
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn num_symbols(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbol(&self, id: SymbolId) -> &Symbol {
        &self.symbols[id.index()]
    }

    pub fn name(&self, id: SymbolId) -> &str {
        &self.symbols[id.index()].name
    }

    pub fn kind(&self, id: SymbolId) -> SymbolKind {
        self.symbols[id.index()].kind
    }

    pub fn is_nonterminal(&self, id: SymbolId) -> bool {
        self.kind(id) == SymbolKind::Nonterminal
    }

    pub fn is_preterminal(&self, id: SymbolId) -> bool {
        self.kind(id) == SymbolKind::Preterminal
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolId> {
        self.by_name.get(name).copied()
    }

    pub fn preterminals(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.symbols
            .iter()
            .filter(|s| s.kind == SymbolKind::Preterminal)
            .map(|s| s.id)
    }

    pub fn nonterminals(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.symbols
            .iter()
            .filter(|s| s.kind == SymbolKind::Nonterminal)
            .map(|s| s.id)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: RuleId) -> &Rule {
        &self.rules[id.index()]
    }

    pub fn start(&self) -> SymbolId {
        self.start
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn pos_tags(&self, word: &str) -> &[SymbolId] {
        self.lexicon.pos_tags(word)
    }

    pub fn rules_for(&self, lhs: SymbolId) -> &[RuleId] {
        &self.by_lhs[lhs.index()]
    }

    /// Every `(rule, i)` with `rule.rhs[i] == sym`, `i` 1-based.
    pub fn rules_with_member(&self, sym: SymbolId) -> Result<&[(RuleId, usize)], GrammarError> {
        self.by_member
            .get(sym.index())
            .map(Vec::as_slice)
            .ok_or_else(|| GrammarError::UnknownSymbol(format!("#{}", sym.0)))
    }

    pub fn rules_with_left_corner(&self, sym: SymbolId) -> &[RuleId] {
        &self.by_left_corner[sym.index()]
    }

    pub fn rules_with_right_corner(&self, sym: SymbolId) -> &[RuleId] {
        &self.by_right_corner[sym.index()]
    }

    pub fn find_rule(&self, lhs: SymbolId, rhs: &[SymbolId]) -> Option<RuleId> {
        self.rule_lookup.get(&(lhs, rhs.to_vec())).copied()
    }

    pub fn display_rule(&self, id: RuleId) -> String {
        let rule = self.rule(id);
        let mut s = format!("{} ->", self.name(rule.lhs));
        for &c in &rule.rhs {
            s.push(' ');
            s.push_str(self.name(c));
        }
        s
    }

    pub fn display_trigram(&self, t: &Trigram) -> String {
        format!(
            "({},{},{})",
            self.name(t.left()),
            self.name(t.center()),
            self.name(t.right())
        )
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    // 1-based character columns
    out.into_iter()
        .map(|(byte, tok)| (line[..byte].chars().count() + 1, tok))
        .collect()
}

/// Incremental grammar construction shared by the file reader and treebank
/// induction. Nothing is validated until [`GrammarBuilder::build`].
#[derive(Debug, Default, Clone)]
pub struct GrammarBuilder {
    rules: Vec<(String, Vec<String>, usize)>,
    pos: Vec<(String, usize)>,
    start: Option<(String, usize)>,
    lexicon: Vec<(String, Vec<String>, usize)>,
}

impl GrammarBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rule(&mut self, lhs: &str, rhs: &[&str]) -> &mut Self {
        let line = self.rules.len() + 1;
        self.rule_at(lhs, rhs, line)
    }

    fn rule_at(&mut self, lhs: &str, rhs: &[&str], line: usize) -> &mut Self {
        self.rules.push((
            lhs.to_string(),
            rhs.iter().map(|s| s.to_string()).collect(),
            line,
        ));
        self
    }

    pub fn declare_pos(&mut self, tag: &str, line: usize) -> &mut Self {
        self.pos.push((tag.to_string(), line));
        self
    }

    pub fn start(&mut self, name: &str) -> &mut Self {
        self.start_at(name, 0)
    }

    fn start_at(&mut self, name: &str, line: usize) -> &mut Self {
        self.start = Some((name.to_string(), line));
        self
    }

    pub fn lexical_entry(&mut self, word: &str, tags: &[&str], line: usize) -> &mut Self {
        self.lexicon.push((
            word.to_string(),
            tags.iter().map(|s| s.to_string()).collect(),
            line,
        ));
        self
    }

    pub fn has_rule(&self, lhs: &str, rhs: &[&str]) -> bool {
        self.rules
            .iter()
            .any(|(l, r, _)| l == lhs && r.iter().map(String::as_str).eq(rhs.iter().copied()))
    }

    pub fn build(&self) -> Result<Grammar, GrammarError> {
        if self.rules.is_empty() {
            return Err(GrammarError::NoRules);
        }
        let lhs_names: std::collections::HashSet<&str> =
            self.rules.iter().map(|(l, _, _)| l.as_str()).collect();

        let mut symbols = vec![
            Symbol {
                id: BOS,
                name: BOS_NAME.into(),
                kind: SymbolKind::Boundary,
            },
            Symbol {
                id: EOS,
                name: EOS_NAME.into(),
                kind: SymbolKind::Boundary,
            },
        ];
        let mut by_name: HashMap<String, SymbolId> = HashMap::new();
        by_name.insert(BOS_NAME.into(), BOS);
        by_name.insert(EOS_NAME.into(), EOS);

        let intern = |name: &str,
                          symbols: &mut Vec<Symbol>,
                          by_name: &mut HashMap<String, SymbolId>|
         -> Result<SymbolId, GrammarError> {
            if name == BOS_NAME || name == EOS_NAME {
                return Err(GrammarError::Reserved(name.to_string()));
            }
            if let Some(&id) = by_name.get(name) {
                return Ok(id);
            }
            let id = SymbolId(symbols.len() as u32);
            let kind = if lhs_names.contains(name) {
                SymbolKind::Nonterminal
            } else {
                SymbolKind::Preterminal
            };
            symbols.push(Symbol {
                id,
                name: name.to_string(),
                kind,
            });
            by_name.insert(name.to_string(), id);
            Ok(id)
        };

        let mut rules: Vec<Rule> = Vec::with_capacity(self.rules.len());
        let mut rule_lookup = HashMap::new();
        for (lhs, rhs, line) in &self.rules {
            if rhs.is_empty() {
                return Err(GrammarError::EpsilonRule {
                    lhs: lhs.clone(),
                    line: *line,
                });
            }
            let lhs_id = intern(lhs, &mut symbols, &mut by_name)?;
            let mut rhs_ids = Vec::with_capacity(rhs.len());
            for name in rhs {
                rhs_ids.push(intern(name, &mut symbols, &mut by_name)?);
            }
            let id = RuleId(rules.len() as u32);
            if rule_lookup.insert((lhs_id, rhs_ids.clone()), id).is_some() {
                return Err(GrammarError::DuplicateRule {
                    rule: format!("{lhs} -> {}", rhs.join(" ")),
                    line: *line,
                });
            }
            rules.push(Rule {
                id,
                lhs: lhs_id,
                rhs: rhs_ids,
            });
        }

        for (tag, _) in &self.pos {
            if lhs_names.contains(tag.as_str()) {
                return Err(GrammarError::KindConflict(tag.clone()));
            }
            intern(tag, &mut symbols, &mut by_name)?;
        }

        let mut lexicon = Lexicon::default();
        for (word, tags, line) in &self.lexicon {
            for tag in tags {
                match by_name.get(tag.as_str()) {
                    None => {
                        return Err(GrammarError::UndeclaredSymbol {
                            name: tag.clone(),
                            line: *line,
                        })
                    }
                    Some(&id) if symbols[id.index()].kind != SymbolKind::Preterminal => {
                        return Err(GrammarError::KindConflict(tag.clone()))
                    }
                    Some(&id) => lexicon.insert(word, id),
                }
            }
        }

        let start = match &self.start {
            None => rules[0].lhs,
            Some((name, line)) => match by_name.get(name.as_str()) {
                Some(&id) if symbols[id.index()].kind == SymbolKind::Nonterminal => id,
                Some(_) => return Err(GrammarError::KindConflict(name.clone())),
                None => {
                    return Err(GrammarError::UndeclaredSymbol {
                        name: name.clone(),
                        line: *line,
                    })
                }
            },
        };

        let n = symbols.len();
        let mut by_lhs = vec![Vec::new(); n];
        let mut by_member = vec![Vec::new(); n];
        let mut by_left_corner = vec![Vec::new(); n];
        let mut by_right_corner = vec![Vec::new(); n];
        for rule in &rules {
            by_lhs[rule.lhs.index()].push(rule.id);
            for (i, s) in rule.rhs.iter().enumerate() {
                by_member[s.index()].push((rule.id, i + 1));
            }
            by_left_corner[rule.left_corner().index()].push(rule.id);
            by_right_corner[rule.right_corner().index()].push(rule.id);
        }

        let grammar = Grammar {
            symbols,
            by_name,
            rules,
            rule_lookup,
            start,
            by_lhs,
            by_member,
            by_left_corner,
            by_right_corner,
            lexicon,
        };
        if let Some(cycle) = find_unary_cycle(&grammar) {
            return Err(GrammarError::UnaryCycle(
                cycle.iter().map(|&s| grammar.name(s).to_string()).collect(),
            ));
        }
        Ok(grammar)
    }
}

fn find_unary_cycle(g: &Grammar) -> Option<Vec<SymbolId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let n = g.num_symbols();
    let mut edges = vec![Vec::new(); n];
    for rule in g.rules() {
        if rule.arity() == 1 && g.is_nonterminal(rule.rhs[0]) {
            edges[rule.lhs.index()].push(rule.rhs[0]);
        }
    }
    let mut mark = vec![Mark::New; n];
    let mut path = Vec::new();

    fn visit(
        v: SymbolId,
        edges: &[Vec<SymbolId>],
        mark: &mut [Mark],
        path: &mut Vec<SymbolId>,
    ) -> Option<Vec<SymbolId>> {
        mark[v.index()] = Mark::Active;
        path.push(v);
        for &w in &edges[v.index()] {
            match mark[w.index()] {
                Mark::Active => {
                    let from = path.iter().position(|&p| p == w).unwrap();
                    let mut cycle = path[from..].to_vec();
                    cycle.push(w);
                    return Some(cycle);
                }
                Mark::New => {
                    if let Some(c) = visit(w, edges, mark, path) {
                        return Some(c);
                    }
                }
                Mark::Done => {}
            }
        }
        path.pop();
        mark[v.index()] = Mark::Done;
        None
    }

    for s in 0..n {
        if mark[s] == Mark::New {
            if let Some(c) = visit(SymbolId(s as u32), &edges, &mut mark, &mut path) {
                return Some(c);
            }
        }
    }
    None
}
