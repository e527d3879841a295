//! Shared generators for the integration suites: small random automata,
//! random formulas, and bounded lasso words.

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use faba::automata::{Aba, Acceptance, Lasso, Nba};
use faba::formula::Formula;
use faba::lattice::{Lattice, Value};

pub const WEIGHTS: [(i64, i64); 5] = [(0, 1), (1, 4), (1, 2), (3, 4), (1, 1)];

pub fn weight(rng: &mut StdRng) -> Value {
    let (n, d) = *WEIGHTS.choose(rng).unwrap();
    Value::rational(n, d)
}

fn nonbot_weight(rng: &mut StdRng) -> Value {
    let (n, d) = *WEIGHTS[1..].choose(rng).unwrap();
    Value::rational(n, d)
}

fn state_names(count: usize) -> Vec<String> {
    (0..count).map(|i| format!("q{i}")).collect()
}

fn pick<'a>(rng: &mut StdRng, names: &'a [String]) -> &'a str {
    names.choose(rng).unwrap()
}

/// A transition formula with at most two minimal satisfying sets, so brute
/// force stays cheap on the generated instances.
fn random_row(rng: &mut StdRng, names: &[String]) -> Option<Formula> {
    let shape = rng.gen_range(0..8u32);
    Some(match shape {
        0 => return None,
        1 => Formula::Const(weight(rng)),
        2 => Formula::var(pick(rng, names)),
        3 => Formula::and([Formula::Const(nonbot_weight(rng)), Formula::var(pick(rng, names))]),
        4 => Formula::and([
            Formula::Const(nonbot_weight(rng)),
            Formula::var(pick(rng, names)),
            Formula::var(pick(rng, names)),
        ]),
        5 => Formula::or([
            Formula::and([Formula::Const(nonbot_weight(rng)), Formula::var(pick(rng, names))]),
            Formula::var(pick(rng, names)),
        ]),
        _ => Formula::or([
            Formula::and([Formula::Const(nonbot_weight(rng)), Formula::var(pick(rng, names))]),
            Formula::and([Formula::Const(nonbot_weight(rng)), Formula::var(pick(rng, names))]),
        ]),
    })
}

/// A small random automaton over `{a, b}` on the rational unit interval
/// with its standard negation.
pub fn random_aba(rng: &mut StdRng, max_states: usize, acceptance: Acceptance) -> Aba {
    let count = rng.gen_range(1..=max_states);
    let names = state_names(count);
    let mut initial = BTreeMap::new();
    for q in &names {
        if rng.gen_bool(0.5) {
            initial.insert(q.clone(), nonbot_weight(rng));
        }
    }
    if initial.is_empty() {
        initial.insert(names[0].clone(), nonbot_weight(rng));
    }
    let mut finals = BTreeMap::new();
    for q in &names {
        if rng.gen_bool(0.5) {
            finals.insert(q.clone(), nonbot_weight(rng));
        }
    }
    let mut delta = BTreeMap::new();
    for q in &names {
        for sym in ["a", "b"] {
            if let Some(f) = random_row(rng, &names) {
                delta.insert((q.clone(), sym.to_string()), f);
            }
        }
    }
    Aba {
        lattice: Lattice::rational_unit().with_negation(),
        alphabet: ["a".to_string(), "b".to_string()].into(),
        states: names.into_iter().collect(),
        acceptance,
        initial,
        finals,
        delta,
        weak: None,
    }
}

/// Like [`random_aba`] but with a crisp initial state and crisp finals, the
/// shape alternation removal accepts directly.
pub fn random_crisp_aba(rng: &mut StdRng, max_states: usize, acceptance: Acceptance) -> Aba {
    let mut a = random_aba(rng, max_states, acceptance);
    let top = a.lattice.top();
    let first = a.states.iter().next().unwrap().clone();
    a.initial = [(first, top.clone())].into();
    for w in a.finals.values_mut() {
        *w = top.clone();
    }
    a
}

/// A small random nondeterministic automaton over `{a, b}`.
pub fn random_nba(rng: &mut StdRng, max_states: usize) -> Nba {
    let count = rng.gen_range(1..=max_states);
    let names = state_names(count);
    let mut initial = BTreeMap::new();
    for q in &names {
        if rng.gen_bool(0.5) {
            initial.insert(q.clone(), nonbot_weight(rng));
        }
    }
    if initial.is_empty() {
        initial.insert(names[0].clone(), nonbot_weight(rng));
    }
    let mut finals = BTreeMap::new();
    for q in &names {
        if rng.gen_bool(0.5) {
            finals.insert(q.clone(), nonbot_weight(rng));
        }
    }
    let mut edges: BTreeMap<(String, String), BTreeMap<String, Value>> = BTreeMap::new();
    for q in &names {
        for sym in ["a", "b"] {
            let fanout = rng.gen_range(0..=2);
            for _ in 0..fanout {
                let target = pick(rng, &names).to_string();
                edges
                    .entry((q.clone(), sym.to_string()))
                    .or_default()
                    .entry(target)
                    .or_insert_with(|| nonbot_weight(rng));
            }
        }
    }
    edges.retain(|_, targets| !targets.is_empty());
    Nba {
        lattice: Lattice::rational_unit().with_negation(),
        alphabet: ["a".to_string(), "b".to_string()].into(),
        states: names.into_iter().collect(),
        acceptance: Acceptance::Buchi,
        initial,
        finals,
        edges,
    }
}

/// A small random Boolean automaton with crisp weights throughout, the
/// shape the classical constructions expect.
pub fn random_boolean_aba(rng: &mut StdRng, max_states: usize) -> Aba {
    let lattice = Lattice::boolean().with_negation();
    let top = lattice.top();
    let count = rng.gen_range(1..=max_states);
    let names = state_names(count);
    let mut initial = BTreeMap::new();
    for q in &names {
        if rng.gen_bool(0.5) {
            initial.insert(q.clone(), top.clone());
        }
    }
    if initial.is_empty() {
        initial.insert(names[0].clone(), top.clone());
    }
    let mut finals = BTreeMap::new();
    for q in &names {
        if rng.gen_bool(0.5) {
            finals.insert(q.clone(), top.clone());
        }
    }
    let mut delta = BTreeMap::new();
    for q in &names {
        for sym in ["a", "b"] {
            let row = match rng.gen_range(0..6u32) {
                0 => continue,
                1 => Formula::True,
                2 => Formula::var(pick(rng, &names)),
                3 => Formula::and([Formula::var(pick(rng, &names)), Formula::var(pick(rng, &names))]),
                4 => Formula::or([Formula::var(pick(rng, &names)), Formula::var(pick(rng, &names))]),
                _ => Formula::or([
                    Formula::and([Formula::var(pick(rng, &names)), Formula::var(pick(rng, &names))]),
                    Formula::var(pick(rng, &names)),
                ]),
            };
            delta.insert((q.clone(), sym.to_string()), row);
        }
    }
    Aba {
        lattice,
        alphabet: ["a".to_string(), "b".to_string()].into(),
        states: names.into_iter().collect(),
        acceptance: Acceptance::Buchi,
        initial,
        finals,
        delta,
        weak: None,
    }
}

/// A random formula over the given variables, with constants drawn from
/// [`WEIGHTS`].
pub fn random_formula(rng: &mut StdRng, vars: &[&str], depth: usize) -> Formula {
    let leaf = depth == 0 || rng.gen_bool(0.4);
    if leaf {
        return match rng.gen_range(0..4u32) {
            0 => Formula::Const(weight(rng)),
            1 => Formula::True,
            2 => Formula::False,
            _ => Formula::var(*vars.choose(rng).unwrap()),
        };
    }
    let arity = rng.gen_range(2..=3);
    let children: Vec<Formula> = (0..arity).map(|_| random_formula(rng, vars, depth - 1)).collect();
    if rng.gen_bool(0.5) {
        Formula::and(children)
    } else {
        Formula::or(children)
    }
}

/// Every lasso over `alphabet` with prefix length up to `max_prefix` and
/// period length from 1 to `max_period`, shortest first.
pub fn all_lassos(alphabet: &[&str], max_prefix: usize, max_period: usize) -> Vec<Lasso> {
    fn blocks(alphabet: &[&str], len: usize) -> Vec<Vec<String>> {
        let mut out = vec![Vec::new()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|w| {
                    alphabet.iter().map(move |s| {
                        let mut next = w.clone();
                        next.push(s.to_string());
                        next
                    })
                })
                .collect();
        }
        out
    }
    let mut words = Vec::new();
    for plen in 0..=max_prefix {
        for prefix in blocks(alphabet, plen) {
            for qlen in 1..=max_period {
                for period in blocks(alphabet, qlen) {
                    words.push(Lasso::new(prefix.clone(), period).unwrap());
                }
            }
        }
    }
    words.sort_by_key(|w| (w.prefix().len() + w.period().len(), w.clone()));
    words
}
