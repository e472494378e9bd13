//! Versioned text serialization.
//!
//! ```text
//! picky-model v1
//! sym <id> <kind> <name>
//! rule <id> <lhs> <rhs...>
//! P <a>,<b>,<c> <rule> <child> <count>
//! C 0 <root|rule:pos>|<a>,<b>,<c> <rule> <count>
//! C 1 <root|label>|<a>,<b>,<c> <rule> <count>
//! C 2 <a>,<b>,<c> <rule> <count>
//! C 3 * <rule> <count>
//! end <records>
//! ```
//!
//! Symbols and rules are written by id; the tables make the file
//! self-describing and are checked against the grammar on load. The lhs of
//! each rule-model context is implied by the rule.

use std::fmt::Write as _;

use crate::grammar::{Grammar, RuleId, SymbolId, SymbolKind, Trigram};
use crate::treebank::ParentContext;

use super::{CspKey, ModelError, Models};

const HEADER: &str = "picky-model v1";

fn kind_name(k: SymbolKind) -> &'static str {
    match k {
        SymbolKind::Nonterminal => "nonterminal",
        SymbolKind::Preterminal => "preterminal",
        SymbolKind::Boundary => "boundary",
    }
}

fn fmt_trigram(t: &Trigram) -> String {
    format!("{},{},{}", t.0[0].0, t.0[1].0, t.0[2].0)
}

pub fn save_models(models: &Models, grammar: &Grammar) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    for s in grammar.symbols() {
        let _ = writeln!(out, "sym {} {} {}", s.id.0, kind_name(s.kind), s.name);
    }
    for r in grammar.rules() {
        let _ = write!(out, "rule {} {}", r.id.0, r.lhs.0);
        for c in &r.rhs {
            let _ = write!(out, " {}", c.0);
        }
        out.push('\n');
    }

    let mut records = 0usize;
    let mut trigrams: Vec<_> = models.prediction.trigrams().collect();
    trigrams.sort_by_key(|(t, _)| **t);
    for (t, counts) in trigrams {
        for (&(rule, i), &n) in &counts.pairs {
            let _ = writeln!(out, "P {} {} {} {}", fmt_trigram(t), rule.0, i, n);
            records += 1;
        }
    }
    for (key, counts) in models.csp.contexts() {
        let ctx = match key {
            CspKey::Slot { ctx, trigram, .. } => {
                let c = match ctx {
                    ParentContext::Root => "root".to_string(),
                    ParentContext::Child { rule, position } => format!("{}:{}", rule.0, position),
                };
                format!("0 {}|{}", c, fmt_trigram(&trigram))
            }
            CspKey::ParentLabel { parent, trigram, .. } => {
                let p = parent.map_or("root".to_string(), |s| s.0.to_string());
                format!("1 {}|{}", p, fmt_trigram(&trigram))
            }
            CspKey::Lhs { trigram, .. } => format!("2 {}", fmt_trigram(&trigram)),
            CspKey::Unconditional { .. } => "3 *".to_string(),
        };
        for (&rule, &n) in &counts.rules {
            let _ = writeln!(out, "C {} {} {}", ctx, rule.0, n);
            records += 1;
        }
    }
    let _ = writeln!(out, "end {records}");
    out
}

struct Reader<'g> {
    grammar: &'g Grammar,
    line: usize,
}

impl Reader<'_> {
    fn err(&self, message: impl Into<String>) -> ModelError {
        ModelError::Malformed {
            line: self.line,
            message: message.into(),
        }
    }

    fn num<T: std::str::FromStr>(&self, tok: Option<&str>, what: &str) -> Result<T, ModelError> {
        let tok = tok.ok_or_else(|| self.err(format!("missing {what}")))?;
        tok.parse().map_err(|_| self.err(format!("bad {what} `{tok}`")))
    }

    fn symbol(&self, tok: &str) -> Result<SymbolId, ModelError> {
        let id: u32 = self.num(Some(tok), "symbol id")?;
        if id as usize >= self.grammar.num_symbols() {
            return Err(self.err(format!("unknown symbol id {id}")));
        }
        Ok(SymbolId(id))
    }

    fn rule(&self, tok: Option<&str>) -> Result<RuleId, ModelError> {
        let id: u32 = self.num(tok, "rule id")?;
        if id as usize >= self.grammar.rules().len() {
            return Err(self.err(format!("unknown rule id {id}")));
        }
        Ok(RuleId(id))
    }

    fn trigram(&self, tok: &str) -> Result<Trigram, ModelError> {
        let parts: Vec<&str> = tok.split(',').collect();
        if parts.len() != 3 {
            return Err(self.err(format!("bad trigram `{tok}`")));
        }
        Ok(Trigram::new(
            self.symbol(parts[0])?,
            self.symbol(parts[1])?,
            self.symbol(parts[2])?,
        ))
    }

    fn context_and_trigram<'a>(&self, tok: Option<&'a str>) -> Result<(&'a str, Trigram), ModelError> {
        let tok = tok.ok_or_else(|| self.err("missing context"))?;
        let (ctx, tri) = tok.split_once('|').ok_or_else(|| self.err(format!("bad context `{tok}`")))?;
        Ok((ctx, self.trigram(tri)?))
    }
}

/// Reads a model written by [`save_models`] and checks its tables against
/// `grammar`.
pub fn load_models(text: &str, grammar: &Grammar) -> Result<Models, ModelError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        Some((_, h)) => return Err(ModelError::Version(h.trim().to_string())),
        None => return Err(ModelError::Version(String::new())),
    }
    let mut rd = Reader { grammar, line: 1 };
    let mut models = Models::default();
    let mut records = 0usize;
    let mut syms = 0usize;
    let mut rules = 0usize;
    for (i, raw) in lines {
        rd.line = i + 1;
        let mut tok = raw.split_whitespace();
        let Some(tag) = tok.next() else { continue };
        match tag {
            "sym" => {
                let id: usize = rd.num(tok.next(), "symbol id")?;
                let kind = tok.next().unwrap_or("");
                let name = tok.next().unwrap_or("");
                let ok = grammar
                    .symbols()
                    .get(id)
                    .is_some_and(|s| s.name == name && kind_name(s.kind) == kind);
                if !ok || id != syms {
                    return Err(ModelError::GrammarMismatch(format!("symbol {id} `{name}`")));
                }
                syms += 1;
            }
            "rule" => {
                let id: usize = rd.num(tok.next(), "rule id")?;
                let ids: Vec<u32> = tok
                    .map(|t| rd.num(Some(t), "symbol id"))
                    .collect::<Result<_, _>>()?;
                let ok = grammar.rules().get(id).is_some_and(|r| {
                    ids.first() == Some(&r.lhs.0) && r.rhs.iter().map(|s| s.0).eq(ids[1..].iter().copied())
                });
                if !ok || id != rules {
                    return Err(ModelError::GrammarMismatch(format!("rule {id}")));
                }
                rules += 1;
            }
            "P" => {
                let t = rd.trigram(tok.next().ok_or_else(|| rd.err("missing trigram"))?)?;
                let rule = rd.rule(tok.next())?;
                let child: u8 = rd.num(tok.next(), "child index")?;
                if child == 0 || child as usize > grammar.rule(rule).arity() {
                    return Err(rd.err(format!("child index {child} out of range")));
                }
                let n: u64 = rd.num(tok.next(), "count")?;
                models.prediction.observe(t, rule, child, n);
                records += 1;
            }
            "C" => {
                let level: u8 = rd.num(tok.next(), "level")?;
                let ctx_tok = tok.next();
                let rule = rd.rule(tok.next())?;
                let n: u64 = rd.num(tok.next(), "count")?;
                let lhs = grammar.rule(rule).lhs;
                let key = match level {
                    0 => {
                        let (c, trigram) = rd.context_and_trigram(ctx_tok)?;
                        let ctx = if c == "root" {
                            ParentContext::Root
                        } else {
                            let (r, p) = c.split_once(':').ok_or_else(|| rd.err(format!("bad slot `{c}`")))?;
                            let rule = rd.rule(Some(r))?;
                            let position: u8 = rd.num(Some(p), "position")?;
                            ParentContext::Child { rule, position }
                        };
                        CspKey::Slot { ctx, lhs, trigram }
                    }
                    1 => {
                        let (c, trigram) = rd.context_and_trigram(ctx_tok)?;
                        let parent = if c == "root" { None } else { Some(rd.symbol(c)?) };
                        CspKey::ParentLabel { parent, lhs, trigram }
                    }
                    2 => {
                        let trigram = rd.trigram(ctx_tok.ok_or_else(|| rd.err("missing trigram"))?)?;
                        CspKey::Lhs { lhs, trigram }
                    }
                    3 => CspKey::Unconditional { lhs },
                    _ => return Err(rd.err(format!("unknown level {level}"))),
                };
                models.csp.insert(key, rule, n);
                records += 1;
            }
            "end" => {
                let declared: usize = rd.num(tok.next(), "record count")?;
                if declared != records {
                    return Err(rd.err(format!("footer says {declared} records, read {records}")));
                }
                if syms != grammar.num_symbols() || rules != grammar.rules().len() {
                    return Err(ModelError::GrammarMismatch("symbol or rule table incomplete".into()));
                }
                return Ok(models);
            }
            other => return Err(rd.err(format!("unknown record `{other}`"))),
        }
    }
    Err(ModelError::Truncated { records })
}
