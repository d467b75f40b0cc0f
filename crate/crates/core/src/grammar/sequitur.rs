//! Online Sequitur over an arena of doubly linked symbols.
//!
//! Each rule body is a circular list closed by a guard node; rule 0 is the
//! top-level sequence. The digram table maps each adjacent pair to the node
//! holding its left symbol.

use std::collections::HashMap;

use super::{Grammar, Token};

const NIL: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Sym {
    Terminal(u32),
    Rule(u32),
    Guard(u32),
}

#[derive(Debug, Clone, Copy)]
struct Node {
    sym: Sym,
    prev: usize,
    next: usize,
}

#[derive(Debug, Clone, Copy)]
struct RuleSlot {
    guard: usize,
    uses: usize,
}

pub(super) struct Builder {
    nodes: Vec<Node>,
    rules: Vec<RuleSlot>,
    digrams: HashMap<(Sym, Sym), usize>,
}

impl Builder {
    pub(super) fn new(capacity: usize) -> Self {
        let mut b = Self {
            nodes: Vec::with_capacity(capacity * 2 + 4),
            rules: Vec::new(),
            digrams: HashMap::with_capacity(capacity),
        };
        b.new_rule();
        b
    }

    pub(super) fn push(&mut self, terminal: u32) {
        let last = self.last(0);
        let node = self.new_symbol(Sym::Terminal(terminal));
        self.insert_after(last, node);
        let prev = self.nodes[node].prev;
        self.check(prev);
    }

    fn new_rule(&mut self) -> u32 {
        let id = self.rules.len() as u32;
        let guard = self.nodes.len();
        self.nodes.push(Node {
            sym: Sym::Guard(id),
            prev: guard,
            next: guard,
        });
        self.rules.push(RuleSlot { guard, uses: 0 });
        id
    }

    fn new_symbol(&mut self, sym: Sym) -> usize {
        if let Sym::Rule(r) = sym {
            self.rules[r as usize].uses += 1;
        }
        self.nodes.push(Node {
            sym,
            prev: NIL,
            next: NIL,
        });
        self.nodes.len() - 1
    }

    #[inline]
    fn sym(&self, i: usize) -> Sym {
        self.nodes[i].sym
    }

    #[inline]
    fn next(&self, i: usize) -> usize {
        self.nodes[i].next
    }

    #[inline]
    fn prev(&self, i: usize) -> usize {
        self.nodes[i].prev
    }

    #[inline]
    fn is_guard(&self, i: usize) -> bool {
        matches!(self.sym(i), Sym::Guard(_))
    }

    fn first(&self, rule: u32) -> usize {
        self.next(self.rules[rule as usize].guard)
    }

    fn last(&self, rule: u32) -> usize {
        self.prev(self.rules[rule as usize].guard)
    }

    fn key(&self, i: usize) -> (Sym, Sym) {
        (self.sym(i), self.sym(self.next(i)))
    }

    /// True when `i` starts a digram that could be in the table.
    fn is_digram_start(&self, i: usize) -> bool {
        i != NIL && !self.is_guard(i) && self.next(i) != NIL && !self.is_guard(self.next(i))
    }

    fn delete_digram(&mut self, i: usize) {
        if !self.is_digram_start(i) {
            return;
        }
        let key = self.key(i);
        if self.digrams.get(&key) == Some(&i) {
            self.digrams.remove(&key);
        }
    }

    fn join(&mut self, left: usize, right: usize) {
        if self.next(left) != NIL {
            self.delete_digram(left);
            // Overlapping triples (x x x) only record one pair; when the
            // recorded pair goes away the other one must be re-registered.
            let (rp, rn) = (self.prev(right), self.next(right));
            if rp != NIL
                && rn != NIL
                && self.sym(right) == self.sym(rp)
                && self.sym(right) == self.sym(rn)
            {
                let key = self.key(right);
                self.digrams.insert(key, right);
            }
            let (lp, ln) = (self.prev(left), self.next(left));
            if lp != NIL
                && ln != NIL
                && self.sym(left) == self.sym(ln)
                && self.sym(left) == self.sym(lp)
            {
                let key = self.key(lp);
                self.digrams.insert(key, lp);
            }
        }
        self.nodes[left].next = right;
        self.nodes[right].prev = left;
    }

    fn insert_after(&mut self, left: usize, node: usize) {
        let right = self.next(left);
        self.join(node, right);
        self.join(left, node);
    }

    /// Unlinks `i`, dropping its digrams and releasing its rule reference.
    fn delete_symbol(&mut self, i: usize) {
        let (p, n) = (self.prev(i), self.next(i));
        self.join(p, n);
        self.delete_digram(i);
        if let Sym::Rule(r) = self.sym(i) {
            self.rules[r as usize].uses -= 1;
        }
        self.nodes[i].prev = NIL;
        self.nodes[i].next = NIL;
    }

    /// Enforces digram uniqueness for the digram starting at `i`. Returns
    /// true when the digram was replaced.
    fn check(&mut self, i: usize) -> bool {
        if !self.is_digram_start(i) {
            return false;
        }
        let key = self.key(i);
        match self.digrams.get(&key) {
            None => {
                self.digrams.insert(key, i);
                false
            }
            Some(&m) if m == i => false,
            Some(&m) => {
                if self.next(m) == i {
                    // overlapping occurrence (x x x)
                    false
                } else {
                    self.match_digram(i, m);
                    true
                }
            }
        }
    }

    fn match_digram(&mut self, ss: usize, m: usize) {
        let rule = if self.is_guard(self.prev(m)) && self.is_guard(self.next(self.next(m))) {
            // m is the complete body of an existing rule
            let Sym::Guard(r) = self.sym(self.prev(m)) else {
                unreachable!()
            };
            self.substitute(ss, r);
            r
        } else {
            let r = self.new_rule();
            let a = self.new_symbol(self.sym(ss));
            let b = self.new_symbol(self.sym(self.next(ss)));
            let guard = self.rules[r as usize].guard;
            self.insert_after(guard, a);
            self.insert_after(a, b);
            self.substitute(m, r);
            self.substitute(ss, r);
            let first = self.first(r);
            let key = self.key(first);
            self.digrams.insert(key, first);
            r
        };
        // rule utility: a rule referenced once is inlined
        let first = self.first(rule);
        self.expand_if_underused(first);
        let last = self.last(rule);
        self.expand_if_underused(last);
    }

    fn expand_if_underused(&mut self, i: usize) {
        if let Sym::Rule(r) = self.sym(i) {
            if self.rules[r as usize].uses == 1 {
                self.expand(i);
            }
        }
    }

    fn substitute(&mut self, i: usize, rule: u32) {
        let q = self.prev(i);
        self.delete_symbol(self.next(q));
        self.delete_symbol(self.next(q));
        let node = self.new_symbol(Sym::Rule(rule));
        self.insert_after(q, node);
        if !self.check(q) {
            self.check(self.next(q));
        }
    }

    /// Replaces the only reference to a rule by the rule's body.
    fn expand(&mut self, i: usize) {
        let Sym::Rule(r) = self.sym(i) else {
            return;
        };
        let (left, right) = (self.prev(i), self.next(i));
        let guard = self.rules[r as usize].guard;
        let (f, l) = (self.next(guard), self.prev(guard));
        self.delete_digram(i);
        self.rules[r as usize].uses = 0;
        self.nodes[guard].next = guard;
        self.nodes[guard].prev = guard;
        self.join(left, f);
        self.join(l, right);
        self.nodes[i].prev = NIL;
        self.nodes[i].next = NIL;
        if self.is_digram_start(l) {
            let key = self.key(l);
            self.digrams.insert(key, l);
        }
        if self.is_digram_start(left) {
            let key = self.key(left);
            self.digrams.entry(key).or_insert(left);
        }
    }

    /// Renumbers live rules in order of first appearance.
    pub(super) fn finish(self) -> Grammar {
        let mut new_id: Vec<Option<u32>> = vec![None; self.rules.len()];
        let mut order: Vec<u32> = Vec::new();
        let body = |b: &Self, r: u32| -> Vec<Sym> {
            let guard = b.rules[r as usize].guard;
            let mut out = Vec::new();
            let mut i = b.next(guard);
            while i != guard {
                out.push(b.sym(i));
                i = b.next(i);
            }
            out
        };
        let bodies: Vec<Vec<Sym>> = (0..self.rules.len() as u32).map(|r| body(&self, r)).collect();

        // preorder walk from the top-level sequence
        let mut stack: Vec<(u32, usize)> = vec![(0, 0)];
        while let Some((r, pos)) = stack.pop() {
            let syms = &bodies[r as usize];
            if pos >= syms.len() {
                continue;
            }
            stack.push((r, pos + 1));
            if let Sym::Rule(q) = syms[pos] {
                if new_id[q as usize].is_none() {
                    new_id[q as usize] = Some(order.len() as u32);
                    order.push(q);
                    stack.push((q, 0));
                }
            }
        }
        let convert = |syms: &[Sym]| -> Vec<Token> {
            syms.iter()
                .map(|s| match *s {
                    Sym::Terminal(t) => Token::Terminal(t),
                    Sym::Rule(q) => Token::Rule(new_id[q as usize].expect("reachable rule")),
                    Sym::Guard(_) => unreachable!("guards are not part of bodies"),
                })
                .collect()
        };
        let sequence = convert(&bodies[0]);
        let rules = order.iter().map(|&q| convert(&bodies[q as usize])).collect();
        Grammar::from_parts(sequence, rules)
    }
}
