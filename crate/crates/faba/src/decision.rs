//! Decision procedures over the word-to-value map an automaton recognizes:
//! the best value it ever attains, the worst, and the degree to which one
//! automaton's map implies another's.
//!
//! All three work level by level, like evaluation does. For each
//! join-irreducible level of the sublattice generated by the automaton's
//! weights, keeping only the transition choices, initial states, and final
//! states at or above the level yields a Boolean automaton that accepts
//! exactly the words valued at least the level. That automaton's
//! nonemptiness is decidable by the classical route: weaken it first if it
//! is co-Büchi (the Boolean cut is already crisp, so weakening never needs
//! a negation), remove alternation with the pair construction, and look
//! for a reachable accepting cycle. The best value is the join of the
//! nonempty levels, and the cycle found at the top level doubles as a
//! witness word.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::automata::{Aba, Acceptance, Lasso, Nba};
use crate::eval::{aba_values, value_basis, AbaEvaluator};
use crate::formula::Formula;
use crate::lattice::{Lattice, Value};
use crate::transforms;
use crate::{Error, Limits, Result};

/// An order comparison against a threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Relation {
    pub fn parse(text: &str) -> Result<Relation> {
        match text {
            "<" => Ok(Relation::Lt),
            "<=" => Ok(Relation::Le),
            "=" => Ok(Relation::Eq),
            ">=" => Ok(Relation::Ge),
            ">" => Ok(Relation::Gt),
            other => Err(Error::Parse(format!(
                "unknown relation {other}; expected <, <=, =, >= or >"
            ))),
        }
    }

    /// The converse relation: `a rel b` holds exactly when `b rel.flip() a`
    /// does. Under an antitone negation, `a rel b` also matches
    /// `c(a) rel.flip() c(b)`.
    pub fn flip(self) -> Relation {
        match self {
            Relation::Lt => Relation::Gt,
            Relation::Le => Relation::Ge,
            Relation::Eq => Relation::Eq,
            Relation::Ge => Relation::Le,
            Relation::Gt => Relation::Lt,
        }
    }

    /// Whether `left rel right` holds in the lattice order. The strict
    /// forms are false on incomparable values.
    pub fn holds(self, lattice: &Lattice, left: &Value, right: &Value) -> bool {
        let le = lattice.leq(left, right);
        let ge = lattice.leq(right, left);
        match self {
            Relation::Lt => le && !ge,
            Relation::Le => le,
            Relation::Eq => le && ge,
            Relation::Ge => ge,
            Relation::Gt => ge && !le,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        };
        write!(f, "{s}")
    }
}

/// Result of an extremal-value query: the value itself, and a lasso word
/// attaining it when the search found one that checks out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub value: Value,
    pub witness: Option<Lasso>,
}

/// Satisfying sets of every transition row, expanded once so the level
/// loop can reuse them.
type Rows = BTreeMap<(String, String), Vec<(BTreeSet<String>, Value)>>;

fn satisfying_rows(a: &Aba, term_cap: usize) -> Result<Rows> {
    let mut rows = BTreeMap::new();
    for ((q, sym), f) in &a.delta {
        let sets = f.minimal_satisfaction_sets(&a.lattice, term_cap)?;
        rows.insert((q.clone(), sym.clone()), sets);
    }
    Ok(rows)
}

/// The Boolean automaton accepting the words valued at least `level`:
/// initial and final states keep only the states weighted at least
/// `level`, and each transition keeps only the satisfying sets whose
/// weight passes.
fn cut_automaton(a: &Aba, rows: &Rows, level: &Value) -> Aba {
    let lattice = Lattice::boolean().with_negation();
    let top = lattice.top();
    let mut initial = BTreeMap::new();
    for (q, w) in &a.initial {
        if a.lattice.leq(level, w) {
            initial.insert(q.clone(), top.clone());
        }
    }
    let mut finals = BTreeMap::new();
    for (q, w) in &a.finals {
        if a.lattice.leq(level, w) {
            finals.insert(q.clone(), top.clone());
        }
    }
    let mut delta = BTreeMap::new();
    for ((q, sym), sets) in rows {
        let mut survivors = Vec::new();
        for (set, w) in sets {
            if a.lattice.leq(level, w) {
                survivors.push(Formula::and(set.iter().map(|x| Formula::var(x.clone()))));
            }
        }
        if survivors.is_empty() {
            continue;
        }
        delta.insert((q.clone(), sym.clone()), Formula::or(survivors));
    }
    Aba {
        lattice,
        alphabet: a.alphabet.clone(),
        states: a.states.clone(),
        acceptance: a.acceptance,
        initial,
        finals,
        delta,
        weak: None,
    }
}

/// Nonemptiness of a Boolean cut, with a shortest witness lasso when
/// nonempty.
fn level_nonempty(cut: &Aba, limits: &Limits) -> Result<Option<Lasso>> {
    if cut.initial.is_empty() {
        return Ok(None);
    }
    let buchi = match cut.acceptance {
        Acceptance::Buchi => cut.clone(),
        Acceptance::CoBuchi => {
            transforms::cobuchi_to_weak(&transforms::ensure_crisp_initial(cut), limits)?
        }
    };
    let nba = transforms::aba_to_nba(&buchi, limits)?;
    Ok(nonempty_witness(&nba))
}

/// A shortest reachable accepting lasso of a Boolean automaton, if any.
/// Edges are taken as present regardless of weight, so this is only
/// meaningful on automata whose stored weights are all top.
fn nonempty_witness(n: &Nba) -> Option<Lasso> {
    let names: Vec<&String> = n.states.iter().collect();
    let id: BTreeMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, q)| (q.as_str(), i))
        .collect();
    let count = names.len();
    let mut adj: Vec<Vec<(&str, usize)>> = vec![Vec::new(); count];
    for ((q, sym), targets) in &n.edges {
        let Some(&qi) = id.get(q.as_str()) else { continue };
        for t in targets.keys() {
            let Some(&ti) = id.get(t.as_str()) else { continue };
            adj[qi].push((sym.as_str(), ti));
        }
    }
    for row in adj.iter_mut() {
        row.sort();
        row.dedup();
    }

    let mut graph: DiGraph<(), ()> = DiGraph::new();
    for _ in 0..count {
        graph.add_node(());
    }
    for (qi, row) in adj.iter().enumerate() {
        for &(_, ti) in row {
            graph.add_edge(NodeIndex::new(qi), NodeIndex::new(ti), ());
        }
    }
    let mut comp = vec![usize::MAX; count];
    let mut nontrivial = Vec::new();
    for (ci, scc) in tarjan_scc(&graph).into_iter().enumerate() {
        let nt = scc.len() > 1 || graph.find_edge(scc[0], scc[0]).is_some();
        for v in &scc {
            comp[v.index()] = ci;
        }
        nontrivial.push(nt);
    }

    let mut stem_parent: Vec<Option<(usize, &str)>> = vec![None; count];
    let mut visited = vec![false; count];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for q in n.initial.keys() {
        if let Some(&qi) = id.get(q.as_str()) {
            if !visited[qi] {
                visited[qi] = true;
                queue.push_back(qi);
            }
        }
    }
    while let Some(u) = queue.pop_front() {
        for &(sym, t) in &adj[u] {
            if !visited[t] {
                visited[t] = true;
                stem_parent[t] = Some((u, sym));
                queue.push_back(t);
            }
        }
    }

    let mut best: Option<Lasso> = None;
    for f in n.finals.keys() {
        let Some(&fi) = id.get(f.as_str()) else { continue };
        if !visited[fi] || !nontrivial[comp[fi]] {
            continue;
        }
        let mut stem = Vec::new();
        let mut cur = fi;
        while let Some((p, sym)) = stem_parent[cur] {
            stem.push(sym.to_string());
            cur = p;
        }
        stem.reverse();
        let Some(cycle) = cycle_through(fi, &adj, &comp) else {
            continue;
        };
        let cand = Lasso::new(stem, cycle).expect("cycle is nonempty");
        let replace = match &best {
            None => true,
            Some(b) => {
                (cand.prefix().len() + cand.period().len(), &cand)
                    < (b.prefix().len() + b.period().len(), b)
            }
        };
        if replace {
            best = Some(cand);
        }
    }
    best
}

/// Shortest cycle through node `f` that stays inside `f`'s strongly
/// connected component, as a symbol sequence.
fn cycle_through(f: usize, adj: &[Vec<(&str, usize)>], comp: &[usize]) -> Option<Vec<String>> {
    let home = comp[f];
    let mut parent: Vec<Option<(usize, &str)>> = vec![None; adj.len()];
    let mut visited = vec![false; adj.len()];
    let mut queue: VecDeque<usize> = VecDeque::from([f]);
    while let Some(u) = queue.pop_front() {
        for &(sym, t) in &adj[u] {
            if comp[t] != home {
                continue;
            }
            if t == f {
                let mut syms = vec![sym.to_string()];
                let mut cur = u;
                while let Some((p, s)) = parent[cur] {
                    syms.push(s.to_string());
                    cur = p;
                }
                syms.reverse();
                return Some(syms);
            }
            if !visited[t] {
                visited[t] = true;
                parent[t] = Some((u, sym));
                queue.push_back(t);
            }
        }
    }
    None
}

/// The join of the automaton's map over all words, with a witness word
/// attaining it when one of the per-level cycles checks out against the
/// automaton itself. On a chain the witness always exists; joining
/// incomparable levels of a product lattice may yield a value no single
/// word attains, and then the witness is absent.
pub fn e_val(a: &Aba, limits: &Limits) -> Result<Outcome> {
    let lattice = &a.lattice;
    let levels = value_basis(lattice, aba_values(a))?;
    let rows = satisfying_rows(a, limits.term_cap)?;
    let mut value = lattice.bot();
    let mut candidates: Vec<Lasso> = Vec::new();
    for level in levels.iter().rev() {
        if lattice.leq(level, &value) {
            continue;
        }
        let cut = cut_automaton(a, &rows, level);
        if let Some(w) = level_nonempty(&cut, limits)? {
            value = lattice.join(&value, level);
            candidates.push(w);
        }
    }
    if value == lattice.bot() {
        if let Some(sym) = a.alphabet.iter().next() {
            candidates.push(Lasso::new(Vec::new(), vec![sym.clone()])?);
        }
    }
    candidates.sort_by_key(|w| (w.prefix().len() + w.period().len(), w.clone()));
    candidates.dedup();
    let evaluator = AbaEvaluator::new(a, limits)?;
    let mut witness = None;
    for w in &candidates {
        if evaluator.value(w)? == value {
            witness = Some(w.clone());
            break;
        }
    }
    Ok(Outcome { value, witness })
}

/// The meet of the automaton's map over all words: the negation of the
/// best value of the dual. Requires a lattice with a declared negation.
pub fn u_val(a: &Aba, limits: &Limits) -> Result<Outcome> {
    let dual = transforms::dualize(a)?;
    let best = e_val(&dual, limits)?;
    let value = a.lattice.negate(&best.value)?;
    let mut witness = None;
    if let Some(w) = best.witness {
        if AbaEvaluator::new(a, limits)?.value(&w)? == value {
            witness = Some(w);
        }
    }
    Ok(Outcome { value, witness })
}

/// How strongly `a1`'s map implies `a2`'s: the meet over all words of
/// `c(value in a1) join (value in a2)`. Computed as the negation of the
/// best value of the meet of `a1` with the dual of `a2`, weakening
/// co-Büchi operands as needed so the meet is formed between Büchi
/// automata. The two automata must share their lattice and alphabet, and
/// the lattice must carry a negation.
pub fn imp_val(a1: &Aba, a2: &Aba, limits: &Limits) -> Result<Value> {
    let left = to_buchi(a1, limits)?;
    let dual2 = transforms::dualize(a2)?;
    let right = to_buchi(&dual2, limits)?;
    let product = transforms::meet(&left, &right)?;
    let best = e_val(&product, limits)?;
    a1.lattice.negate(&best.value)
}

fn to_buchi(a: &Aba, limits: &Limits) -> Result<Aba> {
    match a.acceptance {
        Acceptance::Buchi => Ok(a.clone()),
        Acceptance::CoBuchi => transforms::cobuchi_to_weak(a, limits),
    }
}
