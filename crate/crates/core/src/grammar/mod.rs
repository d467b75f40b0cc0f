//! Sequitur grammar induction and the depth-annotated unwrapping used to
//! turn a grammar into a rule-density profile.
//!
//! [`infer_grammar`] processes terminals left to right and maintains two
//! constraints at every step: no digram (pair of adjacent symbols) appears
//! twice in the grammar, and every rule is referenced at least twice.
//! Rule bodies may grow beyond two symbols when an underused rule is inlined.

mod sequitur;

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// A grammar symbol: an input terminal id or a reference to a rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Token {
    Terminal(u32),
    Rule(u32),
}

/// A terminal of the expanded stream together with its nesting depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct UnwrappedToken {
    pub terminal: u32,
    pub depth: u32,
}

/// A context-free grammar producing exactly one string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    sequence: Vec<Token>,
    rules: Vec<Vec<Token>>,
    use_count: Vec<usize>,
}

/// One occurrence of a rule inside the fully expanded stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleOccurrence {
    /// Offset of the first terminal covered by this occurrence.
    pub start: usize,
    /// Nesting depth of the reference (1 for rules used in the top-level
    /// sequence).
    pub depth: u32,
}

/// Result of a full constraint scan.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GrammarAudit {
    /// Digrams occurring at two non-overlapping places.
    pub repeated_digrams: Vec<(Token, Token)>,
    /// Rules referenced fewer than two times.
    pub underused_rules: Vec<u32>,
    /// Rule bodies shorter than two symbols.
    pub short_rules: Vec<u32>,
}

impl GrammarAudit {
    pub fn is_clean(&self) -> bool {
        self.repeated_digrams.is_empty()
            && self.underused_rules.is_empty()
            && self.short_rules.is_empty()
    }
}

/// Runs Sequitur over a stream of terminal ids.
pub fn infer_grammar(tokens: &[u32]) -> Result<Grammar> {
    if tokens.is_empty() {
        return invalid("cannot infer a grammar from an empty stream");
    }
    let mut builder = sequitur::Builder::new(tokens.len());
    for &t in tokens {
        builder.push(t);
    }
    Ok(builder.finish())
}

impl Grammar {
    /// Assembles a grammar from its parts without validation. Reference
    /// counts are computed from the bodies; dangling references are ignored
    /// here and reported by [`Grammar::validate`].
    pub fn from_parts(sequence: Vec<Token>, rules: Vec<Vec<Token>>) -> Self {
        let mut use_count = vec![0; rules.len()];
        for t in sequence.iter().chain(rules.iter().flatten()) {
            if let Token::Rule(r) = *t {
                if let Some(c) = use_count.get_mut(r as usize) {
                    *c += 1;
                }
            }
        }
        Self {
            sequence,
            rules,
            use_count,
        }
    }

    /// The compressed top-level sequence.
    pub fn sequence(&self) -> &[Token] {
        &self.sequence
    }

    pub fn rules(&self) -> &[Vec<Token>] {
        &self.rules
    }

    pub fn rule(&self, id: u32) -> Option<&[Token]> {
        self.rules.get(id as usize).map(Vec::as_slice)
    }

    /// Number of references to each rule across the sequence and all bodies.
    pub fn use_count(&self) -> &[usize] {
        &self.use_count
    }

    /// Checks that every rule reference resolves and that the rule graph is
    /// acyclic. Returns rules in a bottom-up (dependencies first) order.
    pub fn validate(&self) -> Result<Vec<u32>> {
        let n = self.rules.len();
        let check = |t: &Token| -> Result<()> {
            match *t {
                Token::Rule(r) if r as usize >= n => Err(Error::CorruptGrammar(format!(
                    "reference to undefined rule R{r}"
                ))),
                _ => Ok(()),
            }
        };
        for t in self.sequence.iter().chain(self.rules.iter().flatten()) {
            check(t)?;
        }
        // Kahn's algorithm on the "body references" graph.
        let mut pending = vec![0usize; n];
        let mut parents: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (r, body) in self.rules.iter().enumerate() {
            for t in body {
                if let Token::Rule(c) = *t {
                    pending[r] += 1;
                    parents[c as usize].push(r as u32);
                }
            }
        }
        let mut ready: Vec<u32> = (0..n as u32).filter(|&r| pending[r as usize] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(r) = ready.pop() {
            order.push(r);
            for &p in &parents[r as usize] {
                pending[p as usize] -= 1;
                if pending[p as usize] == 0 {
                    ready.push(p);
                }
            }
        }
        if order.len() != n {
            return Err(Error::CorruptGrammar("rule references form a cycle".into()));
        }
        Ok(order)
    }

    /// Number of terminals each rule expands to.
    pub fn expansion_lengths(&self) -> Result<Vec<usize>> {
        let order = self.validate()?;
        let mut len = vec![0usize; self.rules.len()];
        for r in order {
            len[r as usize] = self.rules[r as usize]
                .iter()
                .map(|t| match *t {
                    Token::Terminal(_) => 1,
                    Token::Rule(c) => len[c as usize],
                })
                .sum();
        }
        Ok(len)
    }

    /// Height of each rule's subtree: 1 for a body of terminals only.
    pub fn rule_heights(&self) -> Result<Vec<u32>> {
        let order = self.validate()?;
        let mut h = vec![0u32; self.rules.len()];
        for r in order {
            h[r as usize] = 1 + self.rules[r as usize]
                .iter()
                .map(|t| match *t {
                    Token::Terminal(_) => 0,
                    Token::Rule(c) => h[c as usize],
                })
                .max()
                .unwrap_or(0);
        }
        Ok(h)
    }

    /// Full decompression back to the terminal stream.
    pub fn expand(&self) -> Result<Vec<u32>> {
        Ok(self.unwrap()?.into_iter().map(|u| u.terminal).collect())
    }

    /// Depth-first expansion annotating each terminal with the number of
    /// rule indirections above it.
    pub fn unwrap(&self) -> Result<Vec<UnwrappedToken>> {
        self.validate()?;
        let mut out = Vec::new();
        self.walk(|ev| {
            if let WalkEvent::Terminal { terminal, depth } = ev {
                out.push(UnwrappedToken { terminal, depth });
            }
        });
        Ok(out)
    }

    /// Every occurrence of every rule in the expanded stream, grouped by rule.
    pub fn rule_occurrences(&self) -> Result<Vec<Vec<RuleOccurrence>>> {
        self.validate()?;
        let mut occ = vec![Vec::new(); self.rules.len()];
        self.walk(|ev| {
            if let WalkEvent::Rule { rule, start, depth } = ev {
                occ[rule as usize].push(RuleOccurrence { start, depth });
            }
        });
        Ok(occ)
    }

    /// Iterative preorder traversal. Assumes a validated grammar.
    fn walk(&self, mut visit: impl FnMut(WalkEvent)) {
        let mut offset = 0usize;
        // (body, position, depth of tokens in this body)
        let mut stack: Vec<(&[Token], usize, u32)> = vec![(&self.sequence, 0, 0)];
        while let Some(top) = stack.last_mut() {
            let (body, pos, depth) = (top.0, top.1, top.2);
            if pos >= body.len() {
                stack.pop();
                continue;
            }
            top.1 += 1;
            match body[pos] {
                Token::Terminal(t) => {
                    visit(WalkEvent::Terminal { terminal: t, depth });
                    offset += 1;
                }
                Token::Rule(r) => {
                    visit(WalkEvent::Rule {
                        rule: r,
                        start: offset,
                        depth: depth + 1,
                    });
                    stack.push((&self.rules[r as usize], 0, depth + 1));
                }
            }
        }
    }

    /// Scans the whole grammar for constraint violations.
    pub fn audit(&self) -> GrammarAudit {
        let mut audit = GrammarAudit::default();
        // last recorded occurrence of each digram: (body index, position)
        let mut seen: HashMap<(Token, Token), (usize, usize)> = HashMap::new();
        let mut flagged = std::collections::BTreeSet::new();
        let bodies = std::iter::once(&self.sequence).chain(self.rules.iter());
        for (b, body) in bodies.enumerate() {
            for (i, pair) in body.windows(2).enumerate() {
                let key = (pair[0], pair[1]);
                match seen.get(&key) {
                    Some(&(pb, pi)) if pb == b && pi + 1 == i => {}
                    Some(_) => {
                        flagged.insert(key);
                    }
                    None => {
                        seen.insert(key, (b, i));
                    }
                }
            }
        }
        audit.repeated_digrams = flagged.into_iter().collect();
        for (r, body) in self.rules.iter().enumerate() {
            if self.use_count[r] < 2 {
                audit.underused_rules.push(r as u32);
            }
            if body.len() < 2 {
                audit.short_rules.push(r as u32);
            }
        }
        audit
    }

    /// Text dump: the top-level sequence as `S -> ...`, then one
    /// `R<i> -> ...` line per rule. Terminals print as their ids.
    pub fn dump(&self) -> String {
        self.dump_with(|t| t.to_string())
    }

    /// Like [`Grammar::dump`] with a custom terminal renderer.
    pub fn dump_with(&self, mut terminal: impl FnMut(u32) -> String) -> String {
        let mut out = String::new();
        let mut line = |out: &mut String, head: &str, body: &[Token]| {
            out.push_str(head);
            out.push_str(" ->");
            for t in body {
                match *t {
                    Token::Terminal(id) => {
                        let _ = write!(out, " {}", terminal(id));
                    }
                    Token::Rule(r) => {
                        let _ = write!(out, " R{r}");
                    }
                }
            }
            out.push('\n');
        };
        line(&mut out, "S", &self.sequence);
        for (r, body) in self.rules.iter().enumerate() {
            line(&mut out, &format!("R{r}"), body);
        }
        out
    }
}

enum WalkEvent {
    Terminal { terminal: u32, depth: u32 },
    Rule { rule: u32, start: usize, depth: u32 },
}
