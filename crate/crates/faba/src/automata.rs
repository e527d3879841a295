//! Automaton structures: alternating automata with formula transitions,
//! nondeterministic automata with weighted edges, lasso words, and run
//! branches.
//!
//! Both automaton types share the same skeleton: a lattice, an alphabet, a
//! state set, Büchi or co-Büchi acceptance, and fuzzy initial and final
//! weight maps. Weights absent from a map are bottom; transitions absent
//! from the map are `false` (alternating) or weight zero (nondeterministic).
//! An optional weak partition on an alternating automaton groups states into
//! ordered blocks; [`Aba::is_weak`] checks that runs never climb the order
//! and that each block is homogeneously final or non-final.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::formula::Formula;
use crate::lattice::{Lattice, Value};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Acceptance {
    Buchi,
    CoBuchi,
}

impl Acceptance {
    pub fn flip(self) -> Acceptance {
        match self {
            Acceptance::Buchi => Acceptance::CoBuchi,
            Acceptance::CoBuchi => Acceptance::Buchi,
        }
    }
}

impl fmt::Display for Acceptance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Acceptance::Buchi => write!(f, "buchi"),
            Acceptance::CoBuchi => write!(f, "cobuchi"),
        }
    }
}

/// Partition of the state set into named blocks with a declared partial
/// order between block names. The declared pairs are closed reflexively and
/// transitively by [`WeakPartition::leq`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WeakPartition {
    pub blocks: BTreeMap<String, BTreeSet<String>>,
    pub order: BTreeSet<(String, String)>,
}

impl WeakPartition {
    pub fn block_of(&self, state: &str) -> Option<&str> {
        self.blocks
            .iter()
            .find(|(_, members)| members.contains(state))
            .map(|(name, _)| name.as_str())
    }

    /// Whether `lo <= hi` in the reflexive-transitive closure of the
    /// declared order pairs.
    pub fn leq(&self, lo: &str, hi: &str) -> bool {
        if lo == hi {
            return true;
        }
        let mut seen: BTreeSet<&str> = [lo].into();
        let mut queue: VecDeque<&str> = [lo].into();
        while let Some(cur) = queue.pop_front() {
            for (a, b) in &self.order {
                if a == cur && seen.insert(b) {
                    if b == hi {
                        return true;
                    }
                    queue.push_back(b);
                }
            }
        }
        false
    }
}

/// Alternating automaton: transitions are positive lattice formulas over
/// the state set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aba {
    pub lattice: Lattice,
    pub alphabet: BTreeSet<String>,
    pub states: BTreeSet<String>,
    pub acceptance: Acceptance,
    pub initial: BTreeMap<String, Value>,
    pub finals: BTreeMap<String, Value>,
    pub delta: BTreeMap<(String, String), Formula>,
    pub weak: Option<WeakPartition>,
}

impl Aba {
    pub fn initial_weight(&self, q: &str) -> Value {
        self.initial.get(q).cloned().unwrap_or_else(|| self.lattice.bot())
    }

    pub fn final_weight(&self, q: &str) -> Value {
        self.finals.get(q).cloned().unwrap_or_else(|| self.lattice.bot())
    }

    /// The transition formula for `(q, a)`, `false` when undeclared.
    pub fn transition(&self, q: &str, a: &str) -> Formula {
        self.delta
            .get(&(q.to_string(), a.to_string()))
            .cloned()
            .unwrap_or(Formula::False)
    }

    /// Exactly one initial state, with weight top.
    pub fn has_crisp_initial(&self) -> bool {
        self.initial.len() == 1 && self.initial.values().all(|w| *w == self.lattice.top())
    }

    /// Every declared final weight is top.
    pub fn has_crisp_finals(&self) -> bool {
        self.finals.values().all(|w| *w == self.lattice.top())
    }

    /// Structural diagnostics: unknown states or symbols, weights outside
    /// the lattice, redundant zero entries, and weak partition defects.
    /// Empty means well formed.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.alphabet.is_empty() {
            out.push("alphabet is empty".to_string());
        }
        if self.states.is_empty() {
            out.push("no states declared".to_string());
        }
        for (label, map) in [("initial", &self.initial), ("final", &self.finals)] {
            for (q, w) in map {
                if !self.states.contains(q) {
                    out.push(format!("{label} weight for unknown state {q}"));
                }
                if !self.lattice.contains(w) {
                    out.push(format!("{label} weight for {q} is outside the lattice"));
                } else if *w == self.lattice.bot() {
                    out.push(format!("zero {label} weight for {q} should be omitted"));
                }
            }
        }
        for ((q, a), f) in &self.delta {
            let arrow = format!("transition {q} --{a}-->");
            if !self.states.contains(q) {
                out.push(format!("{arrow} leaves unknown state {q}"));
            }
            if !self.alphabet.contains(a) {
                out.push(format!("{arrow} reads unknown symbol {a}"));
            }
            for x in f.vars() {
                if !self.states.contains(&x) {
                    out.push(format!("{arrow} references unknown state {x}"));
                }
            }
            let mut consts = Vec::new();
            collect_constants(f, &mut consts);
            for c in consts {
                if !self.lattice.contains(&c) {
                    out.push(format!("{arrow} uses value {c} outside the lattice"));
                }
            }
            if *f == Formula::False {
                out.push(format!("false {arrow} should be omitted"));
            }
        }
        if let Some(part) = &self.weak {
            let mut assigned: BTreeMap<&str, &str> = BTreeMap::new();
            for (name, members) in &part.blocks {
                if members.is_empty() {
                    out.push(format!("weak block {name} is empty"));
                }
                for q in members {
                    if !self.states.contains(q) {
                        out.push(format!("weak block {name} contains unknown state {q}"));
                    }
                    if let Some(prev) = assigned.insert(q, name) {
                        out.push(format!("state {q} is in weak blocks {prev} and {name}"));
                    }
                }
            }
            for q in &self.states {
                if !assigned.contains_key(q.as_str()) {
                    out.push(format!("state {q} is not assigned to a weak block"));
                }
            }
            for (a, b) in &part.order {
                for name in [a, b] {
                    if !part.blocks.contains_key(name) {
                        out.push(format!("weak order mentions unknown block {name}"));
                    }
                }
            }
            for a in part.blocks.keys() {
                for b in part.blocks.keys() {
                    if a < b && part.leq(a, b) && part.leq(b, a) {
                        out.push(format!("weak order is cyclic between {a} and {b}"));
                    }
                }
            }
        }
        out
    }

    /// Whether the declared weak partition makes the automaton weak: every
    /// transition target lies in a block no higher than its source's block,
    /// and each block's states share one final weight. Errors when no
    /// partition is declared or a state is unassigned.
    pub fn is_weak(&self) -> Result<bool> {
        let part = self
            .weak
            .as_ref()
            .ok_or_else(|| Error::Invalid("no weak partition declared".into()))?;
        let block = |q: &str| -> Result<&str> {
            part.block_of(q).ok_or_else(|| {
                Error::Invalid(format!("state {q} is not assigned to a weak block"))
            })
        };
        for ((q, _), f) in &self.delta {
            let src = block(q)?;
            for x in f.vars() {
                if !part.leq(block(&x)?, src) {
                    return Ok(false);
                }
            }
        }
        for members in part.blocks.values() {
            let mut weights = members.iter().map(|q| self.final_weight(q));
            if let Some(first) = weights.next() {
                if weights.any(|w| w != first) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Nondeterministic automaton: per `(state, symbol)` a weighted successor
/// map. Missing entries are zero-weight (absent) edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nba {
    pub lattice: Lattice,
    pub alphabet: BTreeSet<String>,
    pub states: BTreeSet<String>,
    pub acceptance: Acceptance,
    pub initial: BTreeMap<String, Value>,
    pub finals: BTreeMap<String, Value>,
    pub edges: BTreeMap<(String, String), BTreeMap<String, Value>>,
}

impl Nba {
    pub fn initial_weight(&self, q: &str) -> Value {
        self.initial.get(q).cloned().unwrap_or_else(|| self.lattice.bot())
    }

    pub fn final_weight(&self, q: &str) -> Value {
        self.finals.get(q).cloned().unwrap_or_else(|| self.lattice.bot())
    }

    pub fn edge_weight(&self, q: &str, a: &str, target: &str) -> Value {
        self.edges
            .get(&(q.to_string(), a.to_string()))
            .and_then(|m| m.get(target))
            .cloned()
            .unwrap_or_else(|| self.lattice.bot())
    }

    pub fn successors(&self, q: &str, a: &str) -> BTreeMap<String, Value> {
        self.edges
            .get(&(q.to_string(), a.to_string()))
            .cloned()
            .unwrap_or_default()
    }

    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.alphabet.is_empty() {
            out.push("alphabet is empty".to_string());
        }
        if self.states.is_empty() {
            out.push("no states declared".to_string());
        }
        for (label, map) in [("initial", &self.initial), ("final", &self.finals)] {
            for (q, w) in map {
                if !self.states.contains(q) {
                    out.push(format!("{label} weight for unknown state {q}"));
                }
                if !self.lattice.contains(w) {
                    out.push(format!("{label} weight for {q} is outside the lattice"));
                } else if *w == self.lattice.bot() {
                    out.push(format!("zero {label} weight for {q} should be omitted"));
                }
            }
        }
        for ((q, a), targets) in &self.edges {
            let arrow = format!("edge {q} --{a}-->");
            if !self.states.contains(q) {
                out.push(format!("{arrow} leaves unknown state {q}"));
            }
            if !self.alphabet.contains(a) {
                out.push(format!("{arrow} reads unknown symbol {a}"));
            }
            for (target, w) in targets {
                if !self.states.contains(target) {
                    out.push(format!("{arrow} {target} enters an unknown state"));
                }
                if !self.lattice.contains(w) {
                    out.push(format!("{arrow} {target} has a weight outside the lattice"));
                } else if *w == self.lattice.bot() {
                    out.push(format!("zero-weight {arrow} {target} should be omitted"));
                }
            }
        }
        out
    }
}

pub(crate) fn collect_constants(f: &Formula, out: &mut Vec<Value>) {
    match f {
        Formula::True | Formula::False | Formula::Var(_) => {}
        Formula::Const(l) => out.push(l.clone()),
        Formula::And(cs) | Formula::Or(cs) => {
            for c in cs {
                collect_constants(c, out);
            }
        }
    }
}

/// An ultimately periodic word `prefix · period^ω`. The period is never
/// empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lasso {
    prefix: Vec<String>,
    period: Vec<String>,
}

impl Lasso {
    pub fn new(prefix: Vec<String>, period: Vec<String>) -> Result<Lasso> {
        if period.is_empty() {
            return Err(Error::Invalid("lasso period must be nonempty".into()));
        }
        Ok(Lasso { prefix, period })
    }

    /// Parse from whitespace-separated symbol lists.
    pub fn parse(prefix: &str, period: &str) -> Result<Lasso> {
        let split = |s: &str| -> Vec<String> {
            s.split_whitespace().map(|t| t.to_string()).collect()
        };
        Lasso::new(split(prefix), split(period))
    }

    pub fn prefix(&self) -> &[String] {
        &self.prefix
    }

    pub fn period(&self) -> &[String] {
        &self.period
    }

    /// The symbol at position `i` of the infinite word.
    pub fn symbol(&self, i: usize) -> &str {
        if i < self.prefix.len() {
            &self.prefix[i]
        } else {
            &self.period[(i - self.prefix.len()) % self.period.len()]
        }
    }

    pub fn check_alphabet(&self, alphabet: &BTreeSet<String>) -> Result<()> {
        for s in self.prefix.iter().chain(&self.period) {
            if !alphabet.contains(s) {
                return Err(Error::Invalid(format!(
                    "lasso symbol {s} is not in the alphabet"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Lasso {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.prefix {
            write!(f, "{s} ")?;
        }
        write!(f, "({})^w", self.period.join(" "))
    }
}

/// One branch of a run tree, reduced to what its weight depends on: the
/// leaf value for finite branches, the set of states visited infinitely
/// often for infinite ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Branch {
    Finite { leaf: Value },
    Infinite { stem: Vec<String>, cycle: Vec<String> },
}

/// Weight of a single branch: the leaf value if finite; otherwise the join
/// (Büchi) or meet (co-Büchi) of the final weights of the states repeating
/// forever. States on the stem are visited finitely often and do not
/// matter.
pub fn branch_weight(
    branch: &Branch,
    finals: &BTreeMap<String, Value>,
    acceptance: Acceptance,
    lattice: &Lattice,
) -> Value {
    match branch {
        Branch::Finite { leaf } => leaf.clone(),
        Branch::Infinite { cycle, .. } => {
            let weights: Vec<Value> = cycle
                .iter()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .map(|q| finals.get(q).cloned().unwrap_or_else(|| lattice.bot()))
                .collect();
            match acceptance {
                Acceptance::Buchi => lattice.join_all(&weights),
                Acceptance::CoBuchi => lattice.meet_all(&weights),
            }
        }
    }
}
