//! Lasso-word evaluation.
//!
//! The central routine is [`aba_lasso`], which computes the value an
//! alternating automaton assigns to an ultimately periodic word. It works
//! level by level: the weights occurring in the automaton generate a finite
//! sublattice, and for each join-irreducible element `j` of that sublattice
//! the word clears level `j` exactly when a two-player Boolean game is won.
//! The game positions pair automaton states with word positions (collapsed
//! to prefix-or-period classes), the existential player picks a satisfying
//! set for the current transition, the universal player picks which branch
//! to follow, and the acceptance condition turns into a Büchi or co-Büchi
//! winning condition on the visited states. The word's value is the join of
//! the cleared levels.
//!
//! [`nba_lasso`] is the nondeterministic counterpart (per level, a search
//! for a reachable good cycle in the product with the word), and
//! [`aba_lasso_via_nba`] evaluates by translating through the pair
//! construction instead, which the tests use to cross-check the translation
//! chain. [`brute_force_aba`] enumerates runs one by one; it is exponential
//! and only suitable for small instances, which makes it a useful
//! independent referee.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::automata::{collect_constants, Aba, Acceptance, Lasso, Nba};
use crate::lattice::{Lattice, Value};
use crate::transforms;
use crate::{Error, Limits, Result};

/// The join-irreducible elements of the sublattice generated by `seeds`,
/// in ascending order. Every value the automaton can assign to a word is a
/// join of these, so they are exactly the levels worth testing.
pub(crate) fn value_basis(
    lattice: &Lattice,
    seeds: impl IntoIterator<Item = Value>,
) -> Result<Vec<Value>> {
    let seeds: Vec<Value> = seeds.into_iter().collect();
    let closed = lattice.closure(&seeds);
    lattice.join_irreducibles(&closed)
}

/// All lattice constants mentioned by an alternating automaton.
pub(crate) fn aba_values(a: &Aba) -> Vec<Value> {
    let mut vals: Vec<Value> = a.initial.values().cloned().collect();
    vals.extend(a.finals.values().cloned());
    for f in a.delta.values() {
        collect_constants(f, &mut vals);
    }
    vals
}

/// A prepared evaluator for one alternating automaton. Splitting the
/// preparation from the per-word query lets callers score many words
/// without re-expanding the transition formulas every time.
pub struct AbaEvaluator<'a> {
    aba: &'a Aba,
    state_names: Vec<String>,
    finals: Vec<Value>,
    initial: Vec<(usize, Value)>,
    sfe: BTreeMap<String, Vec<Vec<(Vec<usize>, Value)>>>,
    levels: Vec<Value>,
}

impl<'a> AbaEvaluator<'a> {
    pub fn new(aba: &'a Aba, limits: &Limits) -> Result<AbaEvaluator<'a>> {
        let state_names: Vec<String> = aba.states.iter().cloned().collect();
        let id: BTreeMap<&str, usize> = state_names
            .iter()
            .enumerate()
            .map(|(i, q)| (q.as_str(), i))
            .collect();
        let finals: Vec<Value> = state_names.iter().map(|q| aba.final_weight(q)).collect();
        let initial: Vec<(usize, Value)> = aba
            .initial
            .iter()
            .map(|(q, w)| (id[q.as_str()], w.clone()))
            .collect();
        let mut sfe = BTreeMap::new();
        for sym in &aba.alphabet {
            let mut per_state = Vec::with_capacity(state_names.len());
            for q in &state_names {
                let terms = aba
                    .transition(q, sym)
                    .minimal_satisfaction_sets(&aba.lattice, limits.term_cap)?;
                let mut options = Vec::with_capacity(terms.len());
                for (set, weight) in terms {
                    let mut ids = Vec::with_capacity(set.len());
                    for x in &set {
                        ids.push(*id.get(x.as_str()).ok_or_else(|| {
                            Error::Invalid(format!(
                                "transition for {q} on {sym} references unknown state {x}"
                            ))
                        })?);
                    }
                    options.push((ids, weight));
                }
                per_state.push(options);
            }
            sfe.insert(sym.clone(), per_state);
        }
        let levels = value_basis(&aba.lattice, aba_values(aba))?;
        Ok(AbaEvaluator {
            aba,
            state_names,
            finals,
            initial,
            sfe,
            levels,
        })
    }

    /// The value the automaton assigns to the word.
    pub fn value(&self, word: &Lasso) -> Result<Value> {
        word.check_alphabet(&self.aba.alphabet)?;
        let lattice = &self.aba.lattice;
        let mut out = lattice.bot();
        for level in self.levels.iter().rev() {
            if lattice.leq(level, &out) {
                continue;
            }
            if self.clears_level(level, word) {
                out = lattice.join(&out, level);
            }
        }
        Ok(out)
    }

    /// Whether the word's value is at least `level`, decided by solving the
    /// acceptance game with every weight strictly below `level` cut away.
    fn clears_level(&self, level: &Value, word: &Lasso) -> bool {
        let lattice = &self.aba.lattice;
        let n = self.state_names.len();
        let prefix_len = word.prefix().len();
        let classes = prefix_len + word.period().len();

        const WIN: usize = 0;
        const LOSE: usize = 1;
        let choice_node = |q: usize, cls: usize| 2 + cls * n + q;
        let base = 2 + classes * n;
        let mut choice_owner = vec![false; base];
        let mut accepting = vec![false; base];
        let mut edges: Vec<Vec<usize>> = vec![Vec::new(); base];
        edges[WIN].push(WIN);
        edges[LOSE].push(LOSE);
        accepting[WIN] = true;
        let branch_accepting = matches!(self.aba.acceptance, Acceptance::CoBuchi);
        let mut branch_ids: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();

        for cls in 0..classes {
            let per_state = &self.sfe[word.symbol(cls)];
            let ncls = if cls + 1 < classes { cls + 1 } else { prefix_len };
            for q in 0..n {
                let v = choice_node(q, cls);
                choice_owner[v] = true;
                accepting[v] = lattice.leq(level, &self.finals[q]);
                for (set, weight) in &per_state[q] {
                    if !lattice.leq(level, weight) {
                        continue;
                    }
                    if set.is_empty() {
                        edges[v].push(WIN);
                        continue;
                    }
                    let key = (ncls, set.clone());
                    let branch_v = match branch_ids.get(&key) {
                        Some(&b) => b,
                        None => {
                            let b = edges.len();
                            edges.push(set.iter().map(|&t| choice_node(t, ncls)).collect());
                            choice_owner.push(false);
                            accepting.push(branch_accepting);
                            branch_ids.insert(key, b);
                            b
                        }
                    };
                    edges[v].push(branch_v);
                }
                if edges[v].is_empty() {
                    edges[v].push(LOSE);
                }
            }
        }

        let roots: Vec<usize> = self
            .initial
            .iter()
            .filter(|(_, w0)| lattice.leq(level, w0))
            .map(|(q, _)| choice_node(*q, 0))
            .collect();
        if roots.is_empty() {
            return false;
        }
        match self.aba.acceptance {
            Acceptance::Buchi => {
                let wins = buchi_attacker_wins(&choice_owner, &edges, &accepting, true);
                roots.iter().any(|&r| wins[r])
            }
            Acceptance::CoBuchi => {
                let complement: Vec<bool> = accepting.iter().map(|&a| !a).collect();
                let spoils = buchi_attacker_wins(&choice_owner, &edges, &complement, false);
                roots.iter().any(|&r| !spoils[r])
            }
        }
    }
}

/// Solves a Büchi game: the returned mask holds the nodes from which the
/// attacker can force visiting `target` nodes infinitely often. Every node
/// must have at least one outgoing edge. `choice_owner` marks the nodes
/// where the existential player moves; `attacker_is_choice` selects which
/// of the two players is attacking.
fn buchi_attacker_wins(
    choice_owner: &[bool],
    edges: &[Vec<usize>],
    target: &[bool],
    attacker_is_choice: bool,
) -> Vec<bool> {
    let n = choice_owner.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, succs) in edges.iter().enumerate() {
        for &u in succs {
            preds[u].push(v);
        }
    }
    let attract = |alive: &[bool], sources: &[usize], mover_is_choice: bool| -> Vec<bool> {
        let mut inside = vec![false; n];
        let mut pending = vec![0usize; n];
        for v in 0..n {
            if alive[v] {
                pending[v] = edges[v].iter().filter(|&&u| alive[u]).count();
            }
        }
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &v in sources {
            if !inside[v] {
                inside[v] = true;
                queue.push_back(v);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in &preds[u] {
                if !alive[v] || inside[v] {
                    continue;
                }
                if choice_owner[v] == mover_is_choice {
                    inside[v] = true;
                    queue.push_back(v);
                } else {
                    pending[v] -= 1;
                    if pending[v] == 0 {
                        inside[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        inside
    };

    let mut alive = vec![true; n];
    loop {
        let sources: Vec<usize> = (0..n).filter(|&v| alive[v] && target[v]).collect();
        let recurrent = attract(&alive, &sources, attacker_is_choice);
        let escaped: Vec<usize> = (0..n).filter(|&v| alive[v] && !recurrent[v]).collect();
        if escaped.is_empty() {
            return alive;
        }
        let doomed = attract(&alive, &escaped, !attacker_is_choice);
        for v in 0..n {
            if doomed[v] {
                alive[v] = false;
            }
        }
        if alive.iter().all(|&a| !a) {
            return alive;
        }
    }
}

/// The value an alternating automaton assigns to a lasso word. Total for
/// both acceptance kinds and never requires a negation.
pub fn aba_lasso(a: &Aba, word: &Lasso, limits: &Limits) -> Result<Value> {
    AbaEvaluator::new(a, limits)?.value(word)
}

/// The value a nondeterministic automaton assigns to a lasso word.
pub fn nba_lasso(n: &Nba, word: &Lasso) -> Result<Value> {
    word.check_alphabet(&n.alphabet)?;
    let mut seeds: Vec<Value> = n.initial.values().cloned().collect();
    seeds.extend(n.finals.values().cloned());
    for targets in n.edges.values() {
        seeds.extend(targets.values().cloned());
    }
    let levels = value_basis(&n.lattice, seeds)?;
    let states: Vec<&String> = n.states.iter().collect();
    let id: BTreeMap<&str, usize> = states
        .iter()
        .enumerate()
        .map(|(i, q)| (q.as_str(), i))
        .collect();
    let mut out = n.lattice.bot();
    for level in levels.iter().rev() {
        if n.lattice.leq(level, &out) {
            continue;
        }
        if nba_clears_level(n, &states, &id, level, word)? {
            out = n.lattice.join(&out, level);
        }
    }
    Ok(out)
}

fn nba_clears_level(
    n: &Nba,
    states: &[&String],
    id: &BTreeMap<&str, usize>,
    level: &Value,
    word: &Lasso,
) -> Result<bool> {
    let count = states.len();
    if count == 0 {
        return Ok(false);
    }
    let prefix_len = word.prefix().len();
    let classes = prefix_len + word.period().len();
    let node = |q: usize, cls: usize| NodeIndex::new(cls * count + q);

    let mut graph: DiGraph<(), ()> = DiGraph::new();
    for _ in 0..count * classes {
        graph.add_node(());
    }
    for ((q, sym), targets) in &n.edges {
        let qi = *id.get(q.as_str()).ok_or_else(|| {
            Error::Invalid(format!("edge source {q} is not a declared state"))
        })?;
        for cls in 0..classes {
            if word.symbol(cls) != sym {
                continue;
            }
            let ncls = if cls + 1 < classes { cls + 1 } else { prefix_len };
            for (t, weight) in targets {
                if !n.lattice.leq(level, weight) {
                    continue;
                }
                let ti = *id.get(t.as_str()).ok_or_else(|| {
                    Error::Invalid(format!("edge target {t} is not a declared state"))
                })?;
                graph.add_edge(node(qi, cls), node(ti, ncls), ());
            }
        }
    }

    let mut reach = vec![false; count * classes];
    let mut queue: VecDeque<NodeIndex> = VecDeque::new();
    for (q, name) in states.iter().enumerate() {
        if n.lattice.leq(level, &n.initial_weight(name.as_str())) {
            let v = node(q, 0);
            reach[v.index()] = true;
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        for u in graph.neighbors(v) {
            if !reach[u.index()] {
                reach[u.index()] = true;
                queue.push_back(u);
            }
        }
    }

    let final_at_level: Vec<bool> = (0..count * classes)
        .map(|i| n.lattice.leq(level, &n.final_weight(states[i % count])))
        .collect();
    match n.acceptance {
        Acceptance::Buchi => {
            for scc in tarjan_scc(&graph) {
                let nontrivial =
                    scc.len() > 1 || graph.find_edge(scc[0], scc[0]).is_some();
                if !nontrivial || !scc.iter().any(|v| reach[v.index()]) {
                    continue;
                }
                if scc.iter().any(|v| final_at_level[v.index()]) {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Acceptance::CoBuchi => {
            let mut restricted: DiGraph<(), ()> = DiGraph::new();
            for _ in 0..count * classes {
                restricted.add_node(());
            }
            for e in graph.edge_indices() {
                let (s, t) = graph.edge_endpoints(e).expect("edge endpoints");
                if final_at_level[s.index()] && final_at_level[t.index()] {
                    restricted.add_edge(s, t, ());
                }
            }
            for scc in tarjan_scc(&restricted) {
                let nontrivial =
                    scc.len() > 1 || restricted.find_edge(scc[0], scc[0]).is_some();
                if nontrivial && scc.iter().any(|v| reach[v.index()]) {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

/// Evaluates a Büchi alternating automaton on a lasso word by crisping it
/// and running the pair construction, then scoring the word on the
/// resulting nondeterministic automaton. Agrees with [`aba_lasso`]; it
/// exists so the translation chain can be exercised end to end.
pub fn aba_lasso_via_nba(a: &Aba, word: &Lasso, limits: &Limits) -> Result<Value> {
    if a.acceptance != Acceptance::Buchi {
        return Err(Error::Invalid(
            "the pair-construction route evaluates Büchi automata; weaken co-Büchi input first"
                .into(),
        ));
    }
    word.check_alphabet(&a.alphabet)?;
    let crisped = transforms::crisp_final(&transforms::crisp_initial(a), limits)?;
    let nba = transforms::aba_to_nba(&crisped, limits)?;
    nba_lasso(&nba, word)
}

/// What [`brute_force_aba`] found: the word's value and the full set of
/// nonzero run weights behind it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteForceOutcome {
    pub value: Value,
    pub run_weights: BTreeSet<Value>,
}

struct BruteCtx<'a> {
    lattice: &'a Lattice,
    options: Vec<&'a Vec<Vec<(Vec<usize>, Value)>>>,
    finals: &'a [Value],
    count: usize,
    prefix_len: usize,
    classes: usize,
    cap: usize,
    buchi: bool,
}

/// Evaluates an alternating automaton on a lasso word by enumerating runs
/// directly. On a lasso, restricting attention to runs that make the same
/// choice at every visit of a (state, word class) pair loses nothing, so
/// those are what gets enumerated: each assignment fixes one satisfying
/// set per reached pair, its weight is the initial weight met with all
/// chosen set weights and with the branch weight of every reachable cycle,
/// and the word's value is the join over assignments. The number of
/// complete assignments is capped by `limits.state_cap`.
pub fn brute_force_aba(a: &Aba, word: &Lasso, limits: &Limits) -> Result<BruteForceOutcome> {
    word.check_alphabet(&a.alphabet)?;
    let states: Vec<&String> = a.states.iter().collect();
    let id: BTreeMap<&str, usize> = states
        .iter()
        .enumerate()
        .map(|(i, q)| (q.as_str(), i))
        .collect();
    let count = states.len();
    let finals: Vec<Value> = states.iter().map(|q| a.final_weight(q)).collect();
    let prefix_len = word.prefix().len();
    let classes = prefix_len + word.period().len();

    let mut by_symbol: BTreeMap<&str, Vec<Vec<(Vec<usize>, Value)>>> = BTreeMap::new();
    for sym in &a.alphabet {
        let mut per_state = Vec::with_capacity(count);
        for q in &states {
            let terms = a
                .transition(q.as_str(), sym)
                .minimal_satisfaction_sets(&a.lattice, limits.term_cap)?;
            let mut options = Vec::with_capacity(terms.len());
            for (set, weight) in terms {
                let mut ids = Vec::with_capacity(set.len());
                for x in &set {
                    ids.push(*id.get(x.as_str()).ok_or_else(|| {
                        Error::Invalid(format!(
                            "transition for {q} on {sym} references unknown state {x}"
                        ))
                    })?);
                }
                options.push((ids, weight));
            }
            per_state.push(options);
        }
        by_symbol.insert(sym.as_str(), per_state);
    }

    let ctx = BruteCtx {
        lattice: &a.lattice,
        options: (0..classes).map(|cls| &by_symbol[word.symbol(cls)]).collect(),
        finals: &finals,
        count,
        prefix_len,
        classes,
        cap: limits.state_cap,
        buchi: matches!(a.acceptance, Acceptance::Buchi),
    };

    let mut run_weights = BTreeSet::new();
    let mut assignments = 0usize;
    for (qname, w0) in &a.initial {
        let root = id[qname.as_str()];
        let mut choice = vec![None; count * classes];
        let mut discovered = vec![false; count * classes];
        discovered[root] = true;
        let mut pending = vec![root];
        assign_runs(
            &ctx,
            w0,
            &mut choice,
            &mut discovered,
            &mut pending,
            &mut assignments,
            &mut run_weights,
        )?;
    }
    let value = a.lattice.join_all(&run_weights);
    Ok(BruteForceOutcome { value, run_weights })
}

fn assign_runs(
    ctx: &BruteCtx,
    root_weight: &Value,
    choice: &mut Vec<Option<usize>>,
    discovered: &mut Vec<bool>,
    pending: &mut Vec<usize>,
    assignments: &mut usize,
    run_weights: &mut BTreeSet<Value>,
) -> Result<()> {
    let Some(v) = pending.pop() else {
        *assignments += 1;
        if *assignments > ctx.cap {
            return Err(Error::ResourceCap {
                what: "run assignments".into(),
                cap: ctx.cap,
            });
        }
        record_run(ctx, root_weight, choice, run_weights);
        return Ok(());
    };
    let cls = v / ctx.count;
    let q = v % ctx.count;
    let option_count = ctx.options[cls][q].len();
    for i in 0..option_count {
        choice[v] = Some(i);
        let ncls = if cls + 1 < ctx.classes {
            cls + 1
        } else {
            ctx.prefix_len
        };
        let mut added = Vec::new();
        for &t in &ctx.options[cls][q][i].0 {
            let u = ncls * ctx.count + t;
            if !discovered[u] {
                discovered[u] = true;
                pending.push(u);
                added.push(u);
            }
        }
        assign_runs(
            ctx,
            root_weight,
            choice,
            discovered,
            pending,
            assignments,
            run_weights,
        )?;
        for &u in added.iter().rev() {
            let popped = pending.pop();
            debug_assert_eq!(popped, Some(u));
            discovered[u] = false;
        }
        choice[v] = None;
    }
    pending.push(v);
    Ok(())
}

fn record_run(
    ctx: &BruteCtx,
    root_weight: &Value,
    choice: &[Option<usize>],
    run_weights: &mut BTreeSet<Value>,
) {
    let mut succ: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut weight = root_weight.clone();
    for (v, picked) in choice.iter().enumerate() {
        let Some(i) = picked else { continue };
        let cls = v / ctx.count;
        let q = v % ctx.count;
        let (targets, w) = &ctx.options[cls][q][*i];
        weight = ctx.lattice.meet(&weight, w);
        let ncls = if cls + 1 < ctx.classes {
            cls + 1
        } else {
            ctx.prefix_len
        };
        succ.insert(v, targets.iter().map(|&t| ncls * ctx.count + t).collect());
    }
    for cycle in simple_cycles(&succ) {
        let on_cycle: BTreeSet<usize> = cycle.iter().map(|&v| v % ctx.count).collect();
        let weights = on_cycle.iter().map(|&q| &ctx.finals[q]);
        let branch = if ctx.buchi {
            ctx.lattice.join_all(weights)
        } else {
            ctx.lattice.meet_all(weights)
        };
        weight = ctx.lattice.meet(&weight, &branch);
    }
    if weight != ctx.lattice.bot() {
        run_weights.insert(weight);
    }
}

/// Every simple cycle of the graph, each reported once, anchored at its
/// smallest node.
fn simple_cycles(succ: &BTreeMap<usize, Vec<usize>>) -> Vec<Vec<usize>> {
    fn dfs(
        cur: usize,
        start: usize,
        succ: &BTreeMap<usize, Vec<usize>>,
        path: &mut Vec<usize>,
        on_path: &mut BTreeSet<usize>,
        cycles: &mut Vec<Vec<usize>>,
    ) {
        let Some(nexts) = succ.get(&cur) else { return };
        for &nx in nexts {
            if nx == start {
                cycles.push(path.clone());
            } else if nx > start && !on_path.contains(&nx) && succ.contains_key(&nx) {
                path.push(nx);
                on_path.insert(nx);
                dfs(nx, start, succ, path, on_path, cycles);
                path.pop();
                on_path.remove(&nx);
            }
        }
    }

    let mut cycles = Vec::new();
    for &start in succ.keys() {
        let mut path = vec![start];
        let mut on_path = BTreeSet::new();
        on_path.insert(start);
        dfs(start, start, succ, &mut path, &mut on_path, &mut cycles);
    }
    cycles
}
