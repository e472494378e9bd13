//! Bracketed parse trees, sentences and the training-event stream.

use std::fmt;

use thiserror::Error;

use crate::grammar::{Grammar, GrammarBuilder, GrammarError, RuleId, SymbolId, Trigram, BOS, EOS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreebankError {
    #[error("line {line}, column {column}: unbalanced brackets")]
    Unbalanced { line: usize, column: usize },
    #[error("line {line}, column {column}: node `{label}` has no children")]
    EmptyNode {
        line: usize,
        column: usize,
        label: String,
    },
    #[error("line {line}, column {column}: node has no label")]
    MissingLabel { line: usize, column: usize },
    #[error("line {line}, column {column}: leaf `{label}` must hold exactly one word")]
    MalformedLeaf {
        line: usize,
        column: usize,
        label: String,
    },
    #[error("line {line}, column {column}: text after the tree")]
    TrailingInput { line: usize, column: usize },
    #[error("no tree found")]
    EmptyInput,
    #[error("tree root `{0}` is a leaf")]
    LeafRoot(String),
    #[error("no grammar rule `{0}`")]
    NoRule(String),
    #[error("`{0}` is not a part of speech in the grammar")]
    UnknownTag(String),
    #[error("tree {index}: {source}")]
    InTree {
        index: usize,
        #[source]
        source: Box<TreebankError>,
    },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("tree yield does not match the sentence")]
    YieldMismatch,
    #[error(transparent)]
    Grammar(#[from] GrammarError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TreeBody {
    Node(Vec<ParseTree>),
    Leaf { word: String, index: usize },
}

/// A labelled tree. Leaves are the part-of-speech nodes; each carries its
/// word and 0-based position in the sentence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ParseTree {
    pub label: String,
    pub body: TreeBody,
}

impl ParseTree {
    pub fn leaf(label: impl Into<String>, word: impl Into<String>, index: usize) -> Self {
        ParseTree {
            label: label.into(),
            body: TreeBody::Leaf {
                word: word.into(),
                index,
            },
        }
    }

    pub fn node(label: impl Into<String>, children: Vec<ParseTree>) -> Self {
        ParseTree {
            label: label.into(),
            body: TreeBody::Node(children),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.body, TreeBody::Leaf { .. })
    }

    pub fn children(&self) -> &[ParseTree] {
        match &self.body {
            TreeBody::Node(c) => c,
            TreeBody::Leaf { .. } => &[],
        }
    }

    /// `(tag, word)` pairs left to right.
    pub fn leaves(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<(&'a str, &'a str)>) {
        match &self.body {
            TreeBody::Leaf { word, .. } => out.push((&self.label, word)),
            TreeBody::Node(children) => {
                for c in children {
                    c.collect_leaves(out);
                }
            }
        }
    }

    /// Number of internal (non-preterminal) nodes.
    pub fn internal_count(&self) -> usize {
        match &self.body {
            TreeBody::Leaf { .. } => 0,
            TreeBody::Node(children) => 1 + children.iter().map(ParseTree::internal_count).sum::<usize>(),
        }
    }

    pub fn word_count(&self) -> usize {
        match &self.body {
            TreeBody::Leaf { .. } => 1,
            TreeBody::Node(children) => children.iter().map(ParseTree::word_count).sum(),
        }
    }

    /// Index of the leftmost word.
    pub fn left_corner_index(&self) -> usize {
        match &self.body {
            TreeBody::Leaf { index, .. } => *index,
            TreeBody::Node(children) => children[0].left_corner_index(),
        }
    }

    /// Reassigns word indexes left to right starting at `from`.
    pub fn renumber(&mut self, from: usize) -> usize {
        match &mut self.body {
            TreeBody::Leaf { index, .. } => {
                *index = from;
                from + 1
            }
            TreeBody::Node(children) => children.iter_mut().fold(from, |at, c| c.renumber(at)),
        }
    }

    /// Checks that every internal node is a grammar rule and every leaf a
    /// part of speech.
    pub fn check(&self, grammar: &Grammar) -> Result<(), TreebankError> {
        self.resolve_rule(grammar).map(|_| ())?;
        for c in self.children() {
            c.check(grammar)?;
        }
        if let TreeBody::Leaf { .. } = self.body {
            resolve_tag(grammar, &self.label)?;
        }
        Ok(())
    }

    /// Rule used at this node; `None` for a leaf.
    pub fn resolve_rule(&self, grammar: &Grammar) -> Result<Option<RuleId>, TreebankError> {
        let children = match &self.body {
            TreeBody::Leaf { .. } => return Ok(None),
            TreeBody::Node(c) => c,
        };
        let no_rule = || {
            let rhs: Vec<&str> = children.iter().map(|c| c.label.as_str()).collect();
            TreebankError::NoRule(format!("{} -> {}", self.label, rhs.join(" ")))
        };
        let lhs = grammar.lookup(&self.label).ok_or_else(no_rule)?;
        let mut rhs = Vec::with_capacity(children.len());
        for c in children {
            rhs.push(grammar.lookup(&c.label).ok_or_else(no_rule)?);
        }
        grammar.find_rule(lhs, &rhs).map(Some).ok_or_else(no_rule)
    }
}

impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.body {
            TreeBody::Leaf { word, .. } => write!(f, "({} {})", self.label, word),
            TreeBody::Node(children) => {
                write!(f, "({}", self.label)?;
                for c in children {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

fn resolve_tag(grammar: &Grammar, label: &str) -> Result<SymbolId, TreebankError> {
    match grammar.lookup(label) {
        Some(id) if grammar.is_preterminal(id) => Ok(id),
        _ => Err(TreebankError::UnknownTag(label.to_string())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Token<'a> {
    Open,
    Close,
    Atom(&'a str),
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
    line_start: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            text,
            pos: 0,
            line: 1,
            line_start: 0,
        }
    }

    fn column(&self, at: usize) -> usize {
        self.text[self.line_start..at].chars().count() + 1
    }

    fn skip_ws(&mut self) {
        while let Some(ch) = self.text[self.pos..].chars().next() {
            if !ch.is_whitespace() {
                break;
            }
            self.pos += ch.len_utf8();
            if ch == '\n' {
                self.line += 1;
                self.line_start = self.pos;
            }
        }
    }

    /// Next token with its (line, column).
    fn next(&mut self) -> Option<(Token<'a>, usize, usize)> {
        self.skip_ws();
        let at = self.pos;
        let ch = self.text[at..].chars().next()?;
        let pos = (self.line, self.column(at));
        let tok = match ch {
            '(' => {
                self.pos += 1;
                Token::Open
            }
            ')' => {
                self.pos += 1;
                Token::Close
            }
            _ => {
                let end = self.text[at..]
                    .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
                    .map_or(self.text.len(), |e| at + e);
                self.pos = end;
                Token::Atom(&self.text[at..end])
            }
        };
        Some((tok, pos.0, pos.1))
    }

    fn peek(&mut self) -> Option<(Token<'a>, usize, usize)> {
        let saved = (self.pos, self.line, self.line_start);
        let t = self.next();
        (self.pos, self.line, self.line_start) = saved;
        t
    }

    fn end_position(&mut self) -> (usize, usize) {
        self.skip_ws();
        (self.line, self.column(self.pos))
    }
}

fn parse_node(lx: &mut Lexer<'_>, words: &mut usize) -> Result<ParseTree, TreebankError> {
    let (tok, line, column) = match lx.next() {
        Some(t) => t,
        None => {
            let (line, column) = lx.end_position();
            return Err(TreebankError::Unbalanced { line, column });
        }
    };
    if tok != Token::Open {
        return Err(TreebankError::Unbalanced { line, column });
    }
    let label = match lx.next() {
        Some((Token::Atom(a), _, _)) => a.to_string(),
        Some((_, l, c)) => return Err(TreebankError::MissingLabel { line: l, column: c }),
        None => {
            let (line, column) = lx.end_position();
            return Err(TreebankError::Unbalanced { line, column });
        }
    };
    let mut children = Vec::new();
    let mut atoms: Vec<&str> = Vec::new();
    loop {
        match lx.peek() {
            None => {
                let (line, column) = lx.end_position();
                return Err(TreebankError::Unbalanced { line, column });
            }
            Some((Token::Close, _, _)) => {
                lx.next();
                break;
            }
            Some((Token::Open, _, _)) => children.push(parse_node(lx, words)?),
            Some((Token::Atom(a), _, _)) => {
                lx.next();
                atoms.push(a);
            }
        }
    }
    match (atoms.len(), children.is_empty()) {
        (0, true) => Err(TreebankError::EmptyNode {
            line,
            column,
            label,
        }),
        (0, false) => Ok(ParseTree::node(label, children)),
        (1, true) => {
            let index = *words;
            *words += 1;
            Ok(ParseTree::leaf(label, atoms[0], index))
        }
        _ => Err(TreebankError::MalformedLeaf {
            line,
            column,
            label,
        }),
    }
}

/// Parses exactly one bracketed tree.
pub fn parse_tree_text(text: &str) -> Result<ParseTree, TreebankError> {
    let mut lx = Lexer::new(text);
    if lx.peek().is_none() {
        return Err(TreebankError::EmptyInput);
    }
    let mut words = 0;
    let tree = parse_node(&mut lx, &mut words)?;
    if let Some((_, line, column)) = lx.next() {
        return Err(TreebankError::TrailingInput { line, column });
    }
    if tree.is_leaf() {
        return Err(TreebankError::LeafRoot(tree.label));
    }
    Ok(tree)
}

/// Parses a whole treebank file: any number of trees, layout-insensitive.
pub fn parse_treebank(text: &str) -> Result<Vec<ParseTree>, TreebankError> {
    let mut lx = Lexer::new(text);
    let mut trees = Vec::new();
    while lx.peek().is_some() {
        let mut words = 0;
        let tree = parse_node(&mut lx, &mut words)?;
        if tree.is_leaf() {
            return Err(TreebankError::InTree {
                index: trees.len() + 1,
                source: Box::new(TreebankError::LeafRoot(tree.label)),
            });
        }
        trees.push(tree);
    }
    Ok(trees)
}

/// Words with their candidate tags. Gold sentences carry exactly one tag
/// per word; raw input tagged through a lexicon may carry several, the
/// first being the primary tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub words: Vec<String>,
    pub tags: Vec<Vec<SymbolId>>,
}

impl Sentence {
    pub fn new(words: Vec<String>, tags: Vec<Vec<SymbolId>>) -> Self {
        debug_assert_eq!(words.len(), tags.len());
        Sentence { words, tags }
    }

    /// One tag per word.
    pub fn tagged(words: Vec<String>, tags: Vec<SymbolId>) -> Self {
        Sentence::new(words, tags.into_iter().map(|t| vec![t]).collect())
    }

    /// A sentence whose words are the tag names themselves.
    pub fn from_tags(grammar: &Grammar, tags: &[SymbolId]) -> Self {
        let words = tags.iter().map(|&t| grammar.name(t).to_string()).collect();
        Sentence::tagged(words, tags.to_vec())
    }

    /// Tags each word through the grammar's lexicon. Unknown words get an
    /// empty tag set.
    pub fn from_lexicon(grammar: &Grammar, words: &[&str]) -> Self {
        let tags = words.iter().map(|w| grammar.pos_tags(w).to_vec()).collect();
        Sentence::new(words.iter().map(|w| w.to_string()).collect(), tags)
    }

    /// Reads one input line. A token `word_TAG` whose suffix names a part
    /// of speech is pre-tagged; any other token is looked up in the lexicon.
    pub fn from_line(grammar: &Grammar, line: &str) -> Self {
        let mut words = Vec::new();
        let mut tags = Vec::new();
        for tok in line.split_whitespace() {
            let tagged = tok.rsplit_once('_').and_then(|(w, t)| {
                let id = grammar.lookup(t).filter(|&id| grammar.is_preterminal(id))?;
                (!w.is_empty()).then_some((w, id))
            });
            match tagged {
                Some((w, id)) => {
                    words.push(w.to_string());
                    tags.push(vec![id]);
                }
                None => {
                    words.push(tok.to_string());
                    tags.push(grammar.pos_tags(tok).to_vec());
                }
            }
        }
        Sentence::new(words, tags)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_unambiguous(&self) -> bool {
        self.tags.iter().all(|t| t.len() == 1)
    }

    /// First position with no candidate tag.
    pub fn lexical_gap(&self) -> Option<usize> {
        self.tags.iter().position(Vec::is_empty)
    }

    pub fn primary_tag(&self, pos: usize) -> SymbolId {
        self.tags[pos][0]
    }

    /// Trigram centred at `pos` with left-corner tag `center`; flanks use
    /// the neighbours' primary tags, or the boundary symbols at the edges.
    pub fn trigram(&self, pos: usize, center: SymbolId) -> Trigram {
        let left = if pos == 0 { BOS } else { self.primary_tag(pos - 1) };
        let right = if pos + 1 >= self.len() {
            EOS
        } else {
            self.primary_tag(pos + 1)
        };
        Trigram::new(left, center, right)
    }
}

/// Words and tags read off the leaves.
pub fn yield_sentence(tree: &ParseTree, grammar: &Grammar) -> Result<Sentence, TreebankError> {
    let mut words = Vec::new();
    let mut tags = Vec::new();
    for (tag, word) in tree.leaves() {
        tags.push(resolve_tag(grammar, tag)?);
        words.push(word.to_string());
    }
    Ok(Sentence::tagged(words, tags))
}

/// Parent slot of a node, conditioning the rule-probability model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParentContext {
    Root,
    /// Parent rule and the node's 1-based position in it.
    Child { rule: RuleId, position: u8 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TrainingEvent {
    pub rule: RuleId,
    /// 1-based child index.
    pub child_index: u8,
    pub trigram: Trigram,
    pub parent: ParentContext,
}

/// One event per (internal node, child), preorder, children left to right.
/// Each event's trigram is centred on the left-corner word of that child.
pub fn extract_events(tree: &ParseTree, grammar: &Grammar) -> Result<Vec<TrainingEvent>, TreebankError> {
    let sentence = yield_sentence(tree, grammar)?;
    let mut out = Vec::new();
    walk_events(tree, grammar, &sentence, ParentContext::Root, &mut out)?;
    Ok(out)
}

fn walk_events(
    node: &ParseTree,
    grammar: &Grammar,
    sentence: &Sentence,
    parent: ParentContext,
    out: &mut Vec<TrainingEvent>,
) -> Result<(), TreebankError> {
    let Some(rule) = node.resolve_rule(grammar)? else {
        return Ok(());
    };
    for (i, child) in node.children().iter().enumerate() {
        let lc = child.left_corner_index();
        out.push(TrainingEvent {
            rule,
            child_index: (i + 1) as u8,
            trigram: sentence.trigram(lc, sentence.primary_tag(lc)),
            parent,
        });
    }
    for (i, child) in node.children().iter().enumerate() {
        let ctx = ParentContext::Child {
            rule,
            position: (i + 1) as u8,
        };
        walk_events(child, grammar, sentence, ctx, out)?;
    }
    Ok(())
}

/// Grammar and lexicon read off a corpus. Rules, symbols and lexicon
/// entries are numbered by first appearance; the start symbol is the first
/// tree's root label.
pub fn induce_grammar(trees: &[ParseTree]) -> Result<Grammar, TreebankError> {
    if trees.is_empty() {
        return Err(TreebankError::EmptyCorpus);
    }
    let mut builder = GrammarBuilder::new();
    let mut seen = std::collections::HashSet::new();
    for (i, tree) in trees.iter().enumerate() {
        if tree.is_leaf() {
            return Err(TreebankError::InTree {
                index: i + 1,
                source: Box::new(TreebankError::LeafRoot(tree.label.clone())),
            });
        }
        collect_rules(tree, &mut builder, &mut seen);
    }
    builder.start(&trees[0].label);
    Ok(builder.build()?)
}

fn collect_rules<'a>(
    node: &'a ParseTree,
    builder: &mut GrammarBuilder,
    seen: &mut std::collections::HashSet<(&'a str, Vec<&'a str>)>,
) {
    match &node.body {
        TreeBody::Leaf { word, .. } => {
            builder.lexical_entry(word, &[&node.label], 0);
        }
        TreeBody::Node(children) => {
            let rhs: Vec<&str> = children.iter().map(|c| c.label.as_str()).collect();
            if seen.insert((node.label.as_str(), rhs.clone())) {
                builder.rule(&node.label, &rhs);
            }
            for c in children {
                collect_rules(c, builder, seen);
            }
        }
    }
}
