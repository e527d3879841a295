//! Automaton constructions: crisping initial and final weights, union and
//! meet, dualization, alternation removal, and rank-based weakening of
//! co-Büchi automata.
//!
//! All constructions preserve the recognized word-to-value map, except
//! [`dualize`], which negates it pointwise, and [`union`]/[`meet`], which
//! combine two maps by join/meet. Every output drops any weak partition of
//! its inputs; only [`cobuchi_to_weak`] declares one, on its rank blocks.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use itertools::Itertools;

use crate::automata::{Aba, Acceptance, Nba, WeakPartition};
use crate::formula::Formula;
use crate::lattice::{Lattice, Value};
use crate::{Error, Limits, Result};

fn weight_and(lattice: &Lattice, w: &Value, f: Formula) -> Formula {
    if *w == lattice.top() {
        f
    } else {
        Formula::and([Formula::Const(w.clone()), f])
    }
}

fn fresh_name(states: &BTreeSet<String>, base: &str) -> String {
    let mut name = base.to_string();
    while states.contains(&name) {
        name.push('\'');
    }
    name
}

/// What a fresh root must do on `symbol`: the join over initial states of
/// initial weight meet transition.
fn initial_formula(a: &Aba, symbol: &str) -> Formula {
    Formula::or(
        a.initial
            .iter()
            .map(|(q, w)| weight_and(&a.lattice, w, a.transition(q, symbol))),
    )
}

/// Replace the fuzzy initial assignment by a single fresh root of weight
/// top whose transitions fold every initial weight into the first step.
pub fn crisp_initial(a: &Aba) -> Aba {
    let root = fresh_name(&a.states, "init");
    let mut states = a.states.clone();
    states.insert(root.clone());
    let mut delta = a.delta.clone();
    for symbol in &a.alphabet {
        let f = initial_formula(a, symbol);
        if f != Formula::False {
            delta.insert((root.clone(), symbol.clone()), f);
        }
    }
    Aba {
        lattice: a.lattice.clone(),
        alphabet: a.alphabet.clone(),
        states,
        acceptance: a.acceptance,
        initial: [(root, a.lattice.top())].into(),
        finals: a.finals.clone(),
        delta,
        weak: None,
    }
}

pub(crate) fn ensure_crisp_initial(a: &Aba) -> Aba {
    if a.has_crisp_initial() {
        a.clone()
    } else {
        crisp_initial(a)
    }
}

/// Replace fuzzy final weights by crisp ones. One copy of the automaton is
/// made per subset of the properly-fuzzy final states (in size-then-lex
/// order, copies tagged `@1`, `@2`, …); copy `S` guesses that exactly the
/// states of `S` recur, pays `⋀ F(S)` up front in its initial weight, and
/// marks `S` plus the already-crisp finals as its final set. A fuzzy
/// initial assignment is crisped first so the guess has a single place to
/// charge.
pub fn crisp_final(a: &Aba, limits: &Limits) -> Result<Aba> {
    let base = ensure_crisp_initial(a);
    let lattice = base.lattice.clone();
    let top = lattice.top();
    let bot = lattice.bot();
    let ker: Vec<&String> =
        base.finals.iter().filter(|(_, w)| **w == top).map(|(q, _)| q).collect();
    let fringe: Vec<&String> =
        base.finals.iter().filter(|(_, w)| **w != top).map(|(q, _)| q).collect();
    let copies = 1usize
        .checked_shl(fringe.len() as u32)
        .filter(|c| base.states.len().saturating_mul(*c) <= limits.state_cap)
        .ok_or(Error::ResourceCap {
            what: "crisp-final copies".into(),
            cap: limits.state_cap,
        })?;
    let mut subsets: Vec<Vec<&String>> = Vec::with_capacity(copies);
    for size in 0..=fringe.len() {
        for combo in fringe.iter().combinations(size) {
            subsets.push(combo.into_iter().copied().collect());
        }
    }

    let root = base
        .initial
        .keys()
        .next()
        .cloned()
        .expect("a crisped automaton has exactly one initial state");
    let mut states = BTreeSet::new();
    let mut initial = BTreeMap::new();
    let mut finals = BTreeMap::new();
    let mut delta = BTreeMap::new();
    for (idx, subset) in subsets.iter().enumerate() {
        let copy = idx + 1;
        let tag = |q: &str| format!("{q}@{copy}");
        for q in &base.states {
            states.insert(tag(q));
        }
        let guess = lattice.meet_all(subset.iter().map(|q| &base.finals[*q]));
        if guess != bot {
            initial.insert(tag(&root), guess);
        }
        for q in subset.iter().copied().chain(ker.iter().copied()) {
            finals.insert(tag(q), top.clone());
        }
        for ((q, s), f) in &base.delta {
            delta.insert((tag(q), s.clone()), f.rename(&tag));
        }
    }
    Ok(Aba {
        lattice,
        alphabet: base.alphabet,
        states,
        acceptance: base.acceptance,
        initial,
        finals,
        delta,
        weak: None,
    })
}

fn check_compatible(a1: &Aba, a2: &Aba) -> Result<()> {
    if a1.lattice != a2.lattice {
        return Err(Error::Invalid("the two automata use different lattices".into()));
    }
    if a1.alphabet != a2.alphabet {
        return Err(Error::Invalid("the two automata use different alphabets".into()));
    }
    if a1.acceptance != a2.acceptance {
        return Err(Error::Invalid(
            "the two automata mix Büchi and co-Büchi acceptance".into(),
        ));
    }
    Ok(())
}

fn retag(a: &Aba, suffix: &str) -> Aba {
    let tag = |q: &str| format!("{q}{suffix}");
    Aba {
        lattice: a.lattice.clone(),
        alphabet: a.alphabet.clone(),
        states: a.states.iter().map(|q| tag(q)).collect(),
        acceptance: a.acceptance,
        initial: a.initial.iter().map(|(q, w)| (tag(q), w.clone())).collect(),
        finals: a.finals.iter().map(|(q, w)| (tag(q), w.clone())).collect(),
        delta: a
            .delta
            .iter()
            .map(|((q, s), f)| ((tag(q), s.clone()), f.rename(&tag)))
            .collect(),
        weak: None,
    }
}

/// Side-by-side disjoint union; recognizes the pointwise join of the two
/// maps. States are tagged `@1` and `@2`.
pub fn union(a1: &Aba, a2: &Aba) -> Result<Aba> {
    check_compatible(a1, a2)?;
    let b1 = retag(a1, "@1");
    let b2 = retag(a2, "@2");
    Ok(Aba {
        lattice: b1.lattice,
        alphabet: b1.alphabet,
        states: b1.states.into_iter().chain(b2.states).collect(),
        acceptance: b1.acceptance,
        initial: b1.initial.into_iter().chain(b2.initial).collect(),
        finals: b1.finals.into_iter().chain(b2.finals).collect(),
        delta: b1.delta.into_iter().chain(b2.delta).collect(),
        weak: None,
    })
}

/// Disjoint union plus a fresh root that conjoins both sides' first steps;
/// recognizes the pointwise meet of the two maps.
pub fn meet(a1: &Aba, a2: &Aba) -> Result<Aba> {
    check_compatible(a1, a2)?;
    let b1 = retag(a1, "@1");
    let b2 = retag(a2, "@2");
    let mut states: BTreeSet<String> =
        b1.states.iter().chain(&b2.states).cloned().collect();
    let root = fresh_name(&states, "init");
    states.insert(root.clone());
    let mut delta: BTreeMap<(String, String), Formula> =
        b1.delta.iter().chain(&b2.delta).map(|(k, f)| (k.clone(), f.clone())).collect();
    for symbol in &b1.alphabet {
        let f = Formula::and([initial_formula(&b1, symbol), initial_formula(&b2, symbol)]);
        if f != Formula::False {
            delta.insert((root.clone(), symbol.clone()), f);
        }
    }
    Ok(Aba {
        lattice: b1.lattice.clone(),
        alphabet: b1.alphabet.clone(),
        states,
        acceptance: b1.acceptance,
        initial: [(root, b1.lattice.top())].into(),
        finals: b1.finals.into_iter().chain(b2.finals).collect(),
        delta,
        weak: None,
    })
}

/// The complement automaton: every transition formula is dualized, every
/// final weight negated (states without one become fully final), and the
/// acceptance flips. Recognizes the pointwise negation of the input's map.
/// A fuzzy initial assignment is crisped first, since only a single root's
/// choice dualizes soundly.
pub fn dualize(a: &Aba) -> Result<Aba> {
    if !a.lattice.has_negation() {
        return Err(Error::NegationUnavailable(
            "dualizing an automaton requires a lattice negation".into(),
        ));
    }
    let base = ensure_crisp_initial(a);
    let bot = base.lattice.bot();
    let mut finals = BTreeMap::new();
    for q in &base.states {
        let w = base.lattice.negate(&base.final_weight(q))?;
        if w != bot {
            finals.insert(q.clone(), w);
        }
    }
    let mut delta = BTreeMap::new();
    for q in &base.states {
        for s in &base.alphabet {
            let f = base.transition(q, s).dual(&base.lattice)?;
            if f != Formula::False {
                delta.insert((q.clone(), s.clone()), f);
            }
        }
    }
    Ok(Aba {
        lattice: base.lattice,
        alphabet: base.alphabet,
        states: base.states,
        acceptance: base.acceptance.flip(),
        initial: base.initial,
        finals,
        delta,
        weak: None,
    })
}

/// View a nondeterministic automaton as an alternating one: each edge map
/// becomes the join of weighted successor variables.
pub fn nba_to_aba(n: &Nba) -> Aba {
    let mut delta = BTreeMap::new();
    for ((q, s), targets) in &n.edges {
        let f = Formula::or(
            targets
                .iter()
                .map(|(t, w)| weight_and(&n.lattice, w, Formula::var(t.clone()))),
        );
        if f != Formula::False {
            delta.insert((q.clone(), s.clone()), f);
        }
    }
    Aba {
        lattice: n.lattice.clone(),
        alphabet: n.alphabet.clone(),
        states: n.states.clone(),
        acceptance: n.acceptance,
        initial: n.initial.clone(),
        finals: n.finals.clone(),
        delta,
        weak: None,
    }
}

fn pair_name(u: &BTreeSet<String>, v: &BTreeSet<String>) -> String {
    format!(
        "pair{{U=[{}],V=[{}]}}",
        u.iter().join(","),
        v.iter().join(",")
    )
}

/// Remove alternation from a Büchi automaton with crisp final states. The
/// output's states are pairs `(U, V)`: `U` the set of currently active
/// states, `V ⊆ U` the ones still owing a final visit since the last
/// breakpoint. An edge picks one minimal satisfaction set per active state;
/// its weight is the meet of their weights, and parallel picks reaching the
/// same pair join. Pairs with empty `V` are final, and only pairs reachable
/// from the initial seeds `({q}, ∅)` are kept.
pub fn aba_to_nba(a: &Aba, limits: &Limits) -> Result<Nba> {
    if a.acceptance != Acceptance::Buchi {
        return Err(Error::Invalid(
            "alternation removal applies to Büchi automata".into(),
        ));
    }
    if !a.has_crisp_finals() {
        return Err(Error::Invalid(
            "alternation removal needs crisp final weights; crisp them first".into(),
        ));
    }
    let lattice = &a.lattice;
    let bot = lattice.bot();
    let fset: BTreeSet<&String> = a.finals.keys().collect();

    let mut sfe: BTreeMap<(&String, &String), Vec<(BTreeSet<String>, Value)>> = BTreeMap::new();
    for q in &a.states {
        for s in &a.alphabet {
            let terms = a.transition(q, s).minimal_satisfaction_sets(lattice, limits.term_cap)?;
            sfe.insert((q, s), terms);
        }
    }

    type Pair = (BTreeSet<String>, BTreeSet<String>);
    let mut seen: BTreeSet<Pair> = BTreeSet::new();
    let mut queue: VecDeque<Pair> = VecDeque::new();
    let mut initial = BTreeMap::new();
    for (q, w) in &a.initial {
        let pair: Pair = ([q.clone()].into(), BTreeSet::new());
        initial.insert(pair_name(&pair.0, &pair.1), w.clone());
        if seen.insert(pair.clone()) {
            queue.push_back(pair);
        }
    }

    let mut edges: BTreeMap<(String, String), BTreeMap<String, Value>> = BTreeMap::new();
    while let Some((u, v)) = queue.pop_front() {
        let name = pair_name(&u, &v);
        for s in &a.alphabet {
            let slot = edges.entry((name.clone(), s.clone())).or_default();
            if u.is_empty() {
                slot.insert(name.clone(), lattice.top());
                continue;
            }
            let options: Vec<&Vec<(BTreeSet<String>, Value)>> =
                u.iter().map(|q| &sfe[&(q, s)]).collect();
            options
                .iter()
                .map(|o| o.len())
                .try_fold(1usize, |acc, n| {
                    acc.checked_mul(n).filter(|c| *c <= limits.term_cap)
                })
                .ok_or(Error::ResourceCap {
                    what: format!("satisfying-set choices leaving pair state {name} on {s}"),
                    cap: limits.term_cap,
                })?;
            for combo in options.iter().map(|o| o.iter()).multi_cartesian_product() {
                let mut weight = lattice.top();
                let mut u_next: BTreeSet<String> = BTreeSet::new();
                let mut moved: BTreeSet<String> = BTreeSet::new();
                for (q, (set, w)) in u.iter().zip(&combo) {
                    weight = lattice.meet(&weight, w);
                    u_next.extend(set.iter().cloned());
                    if v.contains(q) {
                        moved.extend(set.iter().cloned());
                    }
                }
                if weight == bot {
                    continue;
                }
                let v_next: BTreeSet<String> = if v.is_empty() { &u_next } else { &moved }
                    .iter()
                    .filter(|q| !fset.contains(q))
                    .cloned()
                    .collect();
                let target = (u_next, v_next);
                let entry = slot
                    .entry(pair_name(&target.0, &target.1))
                    .or_insert_with(|| bot.clone());
                *entry = lattice.join(entry, &weight);
                if seen.insert(target.clone()) {
                    if seen.len() > limits.state_cap {
                        return Err(Error::ResourceCap {
                            what: "pair states".into(),
                            cap: limits.state_cap,
                        });
                    }
                    queue.push_back(target);
                }
            }
        }
    }
    edges.retain(|_, targets| {
        targets.retain(|_, w| *w != bot);
        !targets.is_empty()
    });

    let mut finals = BTreeMap::new();
    let mut states = BTreeSet::new();
    for (u, v) in &seen {
        let name = pair_name(u, v);
        if v.is_empty() {
            finals.insert(name.clone(), lattice.top());
        }
        states.insert(name);
    }
    Ok(Nba {
        lattice: a.lattice.clone(),
        alphabet: a.alphabet.clone(),
        states,
        acceptance: Acceptance::Buchi,
        initial,
        finals,
        edges,
    })
}

/// Turn a co-Büchi automaton into a weak Büchi one over rank pairs.
///
/// With crisp initial and final weights the rank construction applies
/// directly: states become `(q, i)` for ranks `i` in `1..=2n`, runs start
/// at the top rank, a step may release each successor to any rank at most
/// its own, non-final states are stuck at odd ranks, and the odd-rank
/// states are final. Otherwise the input is normalized first (dualize,
/// crisp the finals, crisp the initials, dualize back), which requires the
/// lattice negation. The output carries one weak block per rank.
pub fn cobuchi_to_weak(a: &Aba, limits: &Limits) -> Result<Aba> {
    if a.acceptance != Acceptance::CoBuchi {
        return Err(Error::Invalid(
            "weakening applies to co-Büchi automata".into(),
        ));
    }
    let norm = if a.has_crisp_initial() && a.has_crisp_finals() {
        a.clone()
    } else {
        let d = dualize(a)?;
        let cf = crisp_final(&d, limits)?;
        dualize(&crisp_initial(&cf))?
    };
    let ranks = 2 * norm.states.len();
    if norm.states.len().saturating_mul(ranks) > limits.state_cap {
        return Err(Error::ResourceCap {
            what: "rank states".into(),
            cap: limits.state_cap,
        });
    }
    let top = norm.lattice.top();
    let rank_name = |q: &str, i: usize| format!("rank({q},{i})");
    let block_name = |i: usize| format!("rank{i}");

    let mut states = BTreeSet::new();
    let mut finals = BTreeMap::new();
    let mut delta = BTreeMap::new();
    let mut blocks: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut order = BTreeSet::new();
    for i in 1..=ranks {
        if i < ranks {
            order.insert((block_name(i), block_name(i + 1)));
        }
        let block = blocks.entry(block_name(i)).or_default();
        for q in &norm.states {
            let name = rank_name(q, i);
            block.insert(name.clone());
            if i % 2 == 1 {
                finals.insert(name.clone(), top.clone());
            }
            if norm.finals.contains_key(q) || i % 2 == 0 {
                for s in &norm.alphabet {
                    let released = norm.transition(q, s).substitute(&|x| {
                        Formula::or((1..=i).map(|j| Formula::var(rank_name(x, j))))
                    });
                    if released != Formula::False {
                        delta.insert((name.clone(), s.clone()), released);
                    }
                }
            }
            states.insert(name);
        }
    }
    let initial = norm
        .initial
        .keys()
        .map(|q| (rank_name(q, ranks), top.clone()))
        .collect();
    Ok(Aba {
        lattice: norm.lattice,
        alphabet: norm.alphabet,
        states,
        acceptance: Acceptance::Buchi,
        initial,
        finals,
        delta,
        weak: Some(WeakPartition { blocks, order }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Value {
        Value::rational(n, d)
    }

    fn unit() -> Lattice {
        Lattice::rational_unit()
    }

    fn p(text: &str) -> Formula {
        Formula::parse(text, &unit()).unwrap()
    }

    fn fuzzy_two_state() -> Aba {
        Aba {
            lattice: unit(),
            alphabet: ["a", "b"].map(String::from).into(),
            states: ["q0", "q1"].map(String::from).into(),
            acceptance: Acceptance::Buchi,
            initial: [("q0".to_string(), rat(3, 5)), ("q1".to_string(), rat(1, 2))].into(),
            finals: [("q1".to_string(), rat(2, 5))].into(),
            delta: [
                (("q0".to_string(), "a".to_string()), p("0.7 & q1")),
                (("q1".to_string(), "a".to_string()), p("q0 | q1")),
                (("q1".to_string(), "b".to_string()), p("q1")),
            ]
            .into(),
            weak: None,
        }
    }

    #[test]
    fn crisp_initial_adds_a_fresh_root_with_folded_first_steps() {
        let a = fuzzy_two_state();
        let c = crisp_initial(&a);
        assert!(c.has_crisp_initial());
        assert_eq!(c.states.len(), 3);
        assert!(c.states.contains("init"));
        assert_eq!(
            c.transition("init", "a"),
            p("(0.6 & 0.7 & q1) | (0.5 & (q0 | q1))"),
        );
        // q1 has no b-transition... it does; q0 does not, so only q1's
        // side survives the join.
        assert_eq!(c.transition("init", "b"), p("0.5 & q1"));
        assert!(c.validate().is_empty());
    }

    #[test]
    fn crisp_initial_keeps_a_name_collision_free() {
        let mut a = fuzzy_two_state();
        a.states.insert("init".to_string());
        let c = crisp_initial(&a);
        assert!(c.states.contains("init'"));
        assert_eq!(c.initial.keys().collect::<Vec<_>>(), vec!["init'"]);
    }

    #[test]
    fn crisp_final_guesses_subsets_of_fuzzy_finals() {
        let mut a = fuzzy_two_state();
        a.finals.insert("q0".to_string(), rat(1, 1));
        let c = crisp_final(&a, &Limits::default()).unwrap();
        // One fuzzy final state, so two copies of the crisped base (three
        // states after the initial crisping).
        assert_eq!(c.states.len(), 6);
        assert!(c.has_crisp_finals());
        assert!(c.validate().is_empty());
        // Copy 1 guesses the empty set and keeps only the crisp final.
        assert_eq!(c.finals.get("q0@1"), Some(&rat(1, 1)));
        assert_eq!(c.finals.get("q1@1"), None);
        assert_eq!(c.initial.get("init@1"), Some(&rat(1, 1)));
        // Copy 2 guesses {q1} and pays its weight up front.
        assert_eq!(c.finals.get("q1@2"), Some(&rat(1, 1)));
        assert_eq!(c.initial.get("init@2"), Some(&rat(2, 5)));
        assert_eq!(c.transition("q1@2", "a"), p("q0@2 | q1@2"));
    }

    #[test]
    fn crisp_final_cap_trips_on_many_fuzzy_finals() {
        let lattice = unit();
        let states: BTreeSet<String> = (0..20).map(|i| format!("q{i}")).collect();
        let a = Aba {
            lattice,
            alphabet: ["a".to_string()].into(),
            states: states.clone(),
            acceptance: Acceptance::Buchi,
            initial: [("q0".to_string(), rat(1, 1))].into(),
            finals: states.iter().map(|q| (q.clone(), rat(1, 2))).collect(),
            delta: BTreeMap::new(),
            weak: None,
        };
        let e = crisp_final(&a, &Limits::default()).unwrap_err();
        assert!(matches!(e, Error::ResourceCap { .. }));
    }

    #[test]
    fn union_and_meet_tag_both_sides() {
        let a = fuzzy_two_state();
        let u = union(&a, &a).unwrap();
        assert_eq!(u.states.len(), 4);
        assert_eq!(u.initial.get("q0@1"), Some(&rat(3, 5)));
        assert_eq!(u.initial.get("q0@2"), Some(&rat(3, 5)));
        assert!(u.validate().is_empty());

        let m = meet(&a, &a).unwrap();
        assert_eq!(m.states.len(), 5);
        assert!(m.has_crisp_initial());
        let root_step = m.transition("init", "b");
        assert_eq!(root_step, p("(0.5 & \"q1@1\") & (0.5 & \"q1@2\")"));
        assert!(m.validate().is_empty());

        let mut cobuchi = a.clone();
        cobuchi.acceptance = Acceptance::CoBuchi;
        assert!(matches!(union(&a, &cobuchi), Err(Error::Invalid(_))));
    }

    #[test]
    fn dualize_flips_everything_and_needs_negation() {
        let a = fuzzy_two_state();
        assert!(matches!(dualize(&a), Err(Error::NegationUnavailable(_))));

        let mut a = a;
        a.lattice = unit().with_negation();
        let d = dualize(&a).unwrap();
        assert_eq!(d.acceptance, Acceptance::CoBuchi);
        assert!(d.has_crisp_initial());
        // Negated finals: absent weights become top, fuzzy ones flip.
        assert_eq!(d.finals.get("q0"), Some(&rat(1, 1)));
        assert_eq!(d.finals.get("q1"), Some(&rat(3, 5)));
        assert_eq!(d.finals.get("init"), Some(&rat(1, 1)));
        // Undeclared transitions dualize to true.
        assert_eq!(d.transition("q0", "b"), Formula::True);
        assert_eq!(d.transition("q0", "a"), p("0.3 | q1"));
        assert!(d.validate().is_empty());
    }

    #[test]
    fn nba_edges_become_weighted_joins() {
        let lattice = unit();
        let n = Nba {
            lattice: lattice.clone(),
            alphabet: ["a".to_string()].into(),
            states: ["s", "t"].map(String::from).into(),
            acceptance: Acceptance::Buchi,
            initial: [("s".to_string(), rat(1, 1))].into(),
            finals: [("t".to_string(), rat(1, 1))].into(),
            edges: [(
                ("s".to_string(), "a".to_string()),
                [("s".to_string(), rat(1, 2)), ("t".to_string(), rat(1, 1))].into(),
            )]
            .into(),
        };
        let a = nba_to_aba(&n);
        assert_eq!(a.transition("s", "a"), p("(0.5 & s) | t"));
        assert_eq!(a.transition("t", "a"), Formula::False);
        assert!(a.validate().is_empty());
    }

    #[test]
    fn pair_construction_tracks_breakpoints() {
        let lattice = unit();
        let a = Aba {
            lattice: lattice.clone(),
            alphabet: ["a".to_string()].into(),
            states: ["q0", "q1"].map(String::from).into(),
            acceptance: Acceptance::Buchi,
            initial: [("q0".to_string(), rat(1, 1))].into(),
            finals: [("q1".to_string(), rat(1, 1))].into(),
            delta: [
                (("q0".to_string(), "a".to_string()), p("q0 & q1")),
                (("q1".to_string(), "a".to_string()), p("q1")),
            ]
            .into(),
            weak: None,
        };
        let n = aba_to_nba(&a, &Limits::default()).unwrap();
        let start = "pair{U=[q0],V=[]}";
        let both = "pair{U=[q0,q1],V=[q0]}";
        assert_eq!(n.initial.get(start), Some(&rat(1, 1)));
        assert_eq!(n.edge_weight(start, "a", both), rat(1, 1));
        // q0 keeps owing a final visit, so the breakpoint never comes:
        // the reachable cycle avoids every final pair.
        assert_eq!(n.edge_weight(both, "a", both), rat(1, 1));
        assert!(n.finals.contains_key(start));
        assert!(!n.finals.contains_key(both));
        assert!(n.validate().is_empty());
    }

    #[test]
    fn pair_construction_rejects_fuzzy_finals_and_cobuchi() {
        let a = fuzzy_two_state();
        assert!(matches!(
            aba_to_nba(&a, &Limits::default()),
            Err(Error::Invalid(_))
        ));
        let mut c = a;
        c.finals.insert("q1".to_string(), rat(1, 1));
        c.acceptance = Acceptance::CoBuchi;
        assert!(matches!(
            aba_to_nba(&c, &Limits::default()),
            Err(Error::Invalid(_))
        ));
    }

    #[test]
    fn rank_weakening_of_a_crisp_single_loop() {
        let lattice = unit();
        let a = Aba {
            lattice,
            alphabet: ["a".to_string()].into(),
            states: ["q".to_string()].into(),
            acceptance: Acceptance::CoBuchi,
            initial: [("q".to_string(), rat(1, 1))].into(),
            finals: [("q".to_string(), rat(1, 1))].into(),
            delta: [(("q".to_string(), "a".to_string()), p("q"))].into(),
            weak: None,
        };
        let w = cobuchi_to_weak(&a, &Limits::default()).unwrap();
        assert_eq!(w.acceptance, Acceptance::Buchi);
        assert_eq!(w.states.len(), 2);
        assert_eq!(w.initial.keys().collect::<Vec<_>>(), vec!["rank(q,2)"]);
        assert_eq!(w.finals.keys().collect::<Vec<_>>(), vec!["rank(q,1)"]);
        assert_eq!(
            w.transition("rank(q,2)", "a"),
            p("\"rank(q,1)\" | \"rank(q,2)\"")
        );
        assert_eq!(w.transition("rank(q,1)", "a"), p("\"rank(q,1)\""));
        assert_eq!(w.is_weak().unwrap(), true);
        assert!(w.validate().is_empty());
    }

    #[test]
    fn rank_weakening_strands_nonfinal_states_at_odd_ranks() {
        let lattice = unit();
        let a = Aba {
            lattice,
            alphabet: ["a".to_string()].into(),
            states: ["p", "q"].map(String::from).into(),
            acceptance: Acceptance::CoBuchi,
            initial: [("p".to_string(), rat(1, 1))].into(),
            finals: [("q".to_string(), rat(1, 1))].into(),
            delta: [
                (("p".to_string(), "a".to_string()), p("q")),
                (("q".to_string(), "a".to_string()), p("p")),
            ]
            .into(),
            weak: None,
        };
        let w = cobuchi_to_weak(&a, &Limits::default()).unwrap();
        assert_eq!(w.states.len(), 8);
        // p is not final, so it has no moves at odd ranks.
        assert_eq!(w.transition("rank(p,1)", "a"), Formula::False);
        assert_eq!(w.transition("rank(p,3)", "a"), Formula::False);
        assert_eq!(
            w.transition("rank(p,2)", "a"),
            p("\"rank(q,1)\" | \"rank(q,2)\"")
        );
        assert_eq!(w.is_weak().unwrap(), true);
    }

    #[test]
    fn fuzzy_cobuchi_weakening_normalizes_first() {
        let mut a = fuzzy_two_state();
        a.acceptance = Acceptance::CoBuchi;
        assert!(matches!(
            cobuchi_to_weak(&a, &Limits::default()),
            Err(Error::NegationUnavailable(_))
        ));
        a.lattice = unit().with_negation();
        let w = cobuchi_to_weak(&a, &Limits::default()).unwrap();
        assert_eq!(w.acceptance, Acceptance::Buchi);
        assert_eq!(w.is_weak().unwrap(), true);
        assert!(w.validate().is_empty());
        // Normalization: the initial crisping inside dualize gives 3
        // states, the dual has one properly fuzzy final (2 copies of 3),
        // re-crisping the initials adds one, then 2n ranks on n = 7.
        assert_eq!(w.states.len(), 7 * 14);
    }
}
