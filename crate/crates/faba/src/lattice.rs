//! Bounded distributive lattices with exact arithmetic.
//!
//! Four carrier kinds are supported: the rational unit interval `[0, 1]`
//! under min/max, finite chains `{0, …, n−1}`, the Boolean lattice
//! `{0, 1}`, and finite products of those (componentwise order, which is
//! genuinely partial). Each lattice may carry a standard negation, an
//! antitone involution: `x ↦ 1 − x` on the unit interval, level reversal on
//! chains, complement on Booleans, componentwise on products.
//!
//! All values are exact; decimal input like `0.3` is parsed as the rational
//! `3/10`, never as a float.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::{Error, Result};

/// An element of some [`Lattice`] carrier.
///
/// The derived `Ord` is a syntactic order used for deterministic sorting
/// and map keys only; the lattice order is [`Lattice::leq`]. The two agree
/// on chains but not on products (tuples compare lexicographically here,
/// componentwise in the lattice).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Level(u32),
    Rational(Rational64),
    Tuple(Vec<Value>),
}

impl Value {
    pub fn rational(numer: i64, denom: i64) -> Value {
        Value::Rational(Rational64::new(numer, denom))
    }

    /// Decimal approximation of a rational value, for display purposes.
    pub fn approx(&self) -> Option<f64> {
        match self {
            Value::Rational(r) => Some(*r.numer() as f64 / *r.denom() as f64),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(false) => write!(f, "0"),
            Value::Bool(true) => write!(f, "1"),
            Value::Level(k) => write!(f, "{k}"),
            Value::Rational(r) => write!(f, "{r}"),
            Value::Tuple(items) => {
                write!(f, "(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Carrier kind of a lattice. `Product` components are themselves chains
/// (never nested products).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Kind {
    Boolean,
    RationalUnit,
    /// Finite chain with levels `0..n`, ordered numerically. `n ≥ 2`.
    Chain(u32),
    Product(Vec<Kind>),
}

/// A bounded distributive lattice, optionally with standard negation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lattice {
    kind: Kind,
    negation: bool,
}

impl Lattice {
    pub fn boolean() -> Lattice {
        Lattice { kind: Kind::Boolean, negation: false }
    }

    pub fn rational_unit() -> Lattice {
        Lattice { kind: Kind::RationalUnit, negation: false }
    }

    /// Finite chain with `n ≥ 2` levels `0, …, n−1`.
    pub fn chain(n: u32) -> Lattice {
        assert!(n >= 2, "a chain needs at least two levels");
        Lattice { kind: Kind::Chain(n), negation: false }
    }

    /// Product of chain-like components (componentwise order).
    pub fn product(components: Vec<Kind>) -> Lattice {
        assert!(!components.is_empty(), "a product needs at least one component");
        assert!(
            components.iter().all(|k| !matches!(k, Kind::Product(_))),
            "product components must be chains"
        );
        Lattice { kind: Kind::Product(components), negation: false }
    }

    /// The same lattice with the standard negation enabled.
    pub fn with_negation(mut self) -> Lattice {
        self.negation = true;
        self
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn has_negation(&self) -> bool {
        self.negation
    }

    pub fn bot(&self) -> Value {
        kind_bot(&self.kind)
    }

    pub fn top(&self) -> Value {
        kind_top(&self.kind)
    }

    /// Whether `v` is an element of this lattice's carrier.
    pub fn contains(&self, v: &Value) -> bool {
        kind_contains(&self.kind, v)
    }

    /// The lattice partial order. Partial on products: distinct tuples may
    /// be incomparable.
    pub fn leq(&self, x: &Value, y: &Value) -> bool {
        match (&self.kind, x, y) {
            (Kind::Boolean, Value::Bool(a), Value::Bool(b)) => *a <= *b,
            (Kind::Chain(_), Value::Level(a), Value::Level(b)) => a <= b,
            (Kind::RationalUnit, Value::Rational(a), Value::Rational(b)) => a <= b,
            (Kind::Product(kinds), Value::Tuple(xs), Value::Tuple(ys)) => {
                kinds.len() == xs.len()
                    && xs
                        .iter()
                        .zip(ys)
                        .zip(kinds)
                        .all(|((a, b), k)| component(k).leq(a, b))
            }
            _ => panic!("value outside lattice carrier: {x} / {y}"),
        }
    }

    pub fn join(&self, x: &Value, y: &Value) -> Value {
        match (&self.kind, x, y) {
            (Kind::Boolean, Value::Bool(a), Value::Bool(b)) => Value::Bool(*a || *b),
            (Kind::Chain(_), Value::Level(a), Value::Level(b)) => Value::Level(*(a.max(b))),
            (Kind::RationalUnit, Value::Rational(a), Value::Rational(b)) => {
                Value::Rational(*(a.max(b)))
            }
            (Kind::Product(kinds), Value::Tuple(xs), Value::Tuple(ys)) => Value::Tuple(
                xs.iter()
                    .zip(ys)
                    .zip(kinds)
                    .map(|((a, b), k)| component(k).join(a, b))
                    .collect(),
            ),
            _ => panic!("value outside lattice carrier: {x} / {y}"),
        }
    }

    pub fn meet(&self, x: &Value, y: &Value) -> Value {
        match (&self.kind, x, y) {
            (Kind::Boolean, Value::Bool(a), Value::Bool(b)) => Value::Bool(*a && *b),
            (Kind::Chain(_), Value::Level(a), Value::Level(b)) => Value::Level(*(a.min(b))),
            (Kind::RationalUnit, Value::Rational(a), Value::Rational(b)) => {
                Value::Rational(*(a.min(b)))
            }
            (Kind::Product(kinds), Value::Tuple(xs), Value::Tuple(ys)) => Value::Tuple(
                xs.iter()
                    .zip(ys)
                    .zip(kinds)
                    .map(|((a, b), k)| component(k).meet(a, b))
                    .collect(),
            ),
            _ => panic!("value outside lattice carrier: {x} / {y}"),
        }
    }

    /// The standard negation, if configured: an antitone involution with
    /// `c(c(x)) = x` and De Morgan duality between join and meet.
    pub fn negate(&self, x: &Value) -> Result<Value> {
        if !self.negation {
            return Err(Error::NegationUnavailable(format!(
                "lattice {} has no negation",
                self.render_spec()
            )));
        }
        Ok(negate_in_kind(&self.kind, x))
    }

    /// Join of all `values`, bottom when empty.
    pub fn join_all<'a>(&self, values: impl IntoIterator<Item = &'a Value>) -> Value {
        values.into_iter().fold(self.bot(), |acc, v| self.join(&acc, v))
    }

    /// Meet of all `values`, top when empty.
    pub fn meet_all<'a>(&self, values: impl IntoIterator<Item = &'a Value>) -> Value {
        values.into_iter().fold(self.top(), |acc, v| self.meet(&acc, v))
    }

    /// Closure of `values ∪ {bot, top}` under join and meet: the finite
    /// sublattice generated by `values`.
    pub fn closure(&self, values: &[Value]) -> BTreeSet<Value> {
        let mut set: BTreeSet<Value> = values.iter().cloned().collect();
        set.insert(self.bot());
        set.insert(self.top());
        loop {
            let snapshot: Vec<Value> = set.iter().cloned().collect();
            let before = set.len();
            for (i, x) in snapshot.iter().enumerate() {
                for y in &snapshot[i + 1..] {
                    set.insert(self.join(x, y));
                    set.insert(self.meet(x, y));
                }
            }
            if set.len() == before {
                return set;
            }
        }
    }

    /// The join-irreducible elements of a join/meet-closed finite set:
    /// every `x ≠ bot` such that `x = a ∨ b` with `a, b` in the set forces
    /// `x ∈ {a, b}`. Every member of the set is the join of the
    /// irreducibles below it (Birkhoff decomposition).
    ///
    /// Errors when `closed` is not actually closed under join and meet or
    /// misses the bounds.
    pub fn join_irreducibles(&self, closed: &BTreeSet<Value>) -> Result<Vec<Value>> {
        if !closed.contains(&self.bot()) || !closed.contains(&self.top()) {
            return Err(Error::Invalid(
                "join_irreducibles: set does not contain both lattice bounds".into(),
            ));
        }
        let elems: Vec<&Value> = closed.iter().collect();
        for (i, x) in elems.iter().enumerate() {
            for y in &elems[i + 1..] {
                if !closed.contains(&self.join(x, y)) || !closed.contains(&self.meet(x, y)) {
                    return Err(Error::Invalid(format!(
                        "join_irreducibles: set not closed at {x} and {y}"
                    )));
                }
            }
        }
        let bot = self.bot();
        let mut out = Vec::new();
        for x in closed {
            if *x == bot {
                continue;
            }
            let reducible = elems.iter().any(|a| {
                elems.iter().any(|b| {
                    **a != *x && **b != *x && self.join(a, b) == *x
                })
            });
            if !reducible {
                out.push(x.clone());
            }
        }
        Ok(out)
    }

    /// Parse a value literal of this lattice: `0`/`1` (Boolean), a level
    /// number (chain), a decimal or fraction in `[0,1]` (rational unit), or
    /// a tuple `(v,…,v)` (product).
    pub fn parse_value(&self, text: &str) -> Result<Value> {
        parse_in_kind(&self.kind, text.trim())
    }

    /// Parse a lattice spec as written in automaton files:
    /// `rational-unit`, `chain:<n>`, `boolean`,
    /// `product:<comp>*<comp>*…`, optionally followed by
    /// `negation:standard`.
    pub fn parse_spec(tokens: &[&str]) -> Result<Lattice> {
        if tokens.is_empty() {
            return Err(Error::Parse("empty lattice spec".into()));
        }
        let kind = parse_kind(tokens[0])?;
        let mut lattice = Lattice { kind, negation: false };
        match tokens.get(1) {
            None => {}
            Some(&"negation:standard") => lattice.negation = true,
            Some(other) => {
                return Err(Error::Parse(format!(
                    "unexpected lattice spec token {other:?} (expected negation:standard)"
                )));
            }
        }
        if tokens.len() > 2 {
            return Err(Error::Parse("trailing tokens after lattice spec".into()));
        }
        Ok(lattice)
    }

    /// Inverse of [`Lattice::parse_spec`].
    pub fn render_spec(&self) -> String {
        let mut out = render_kind(&self.kind);
        if self.negation {
            out.push_str(" negation:standard");
        }
        out
    }
}

fn component(kind: &Kind) -> Lattice {
    Lattice { kind: kind.clone(), negation: false }
}

fn kind_bot(kind: &Kind) -> Value {
    match kind {
        Kind::Boolean => Value::Bool(false),
        Kind::Chain(_) => Value::Level(0),
        Kind::RationalUnit => Value::Rational(Rational64::zero()),
        Kind::Product(kinds) => Value::Tuple(kinds.iter().map(kind_bot).collect()),
    }
}

fn kind_top(kind: &Kind) -> Value {
    match kind {
        Kind::Boolean => Value::Bool(true),
        Kind::Chain(n) => Value::Level(n - 1),
        Kind::RationalUnit => Value::Rational(Rational64::one()),
        Kind::Product(kinds) => Value::Tuple(kinds.iter().map(kind_top).collect()),
    }
}

fn kind_contains(kind: &Kind, v: &Value) -> bool {
    match (kind, v) {
        (Kind::Boolean, Value::Bool(_)) => true,
        (Kind::Chain(n), Value::Level(k)) => k < n,
        (Kind::RationalUnit, Value::Rational(r)) => {
            *r >= Rational64::zero() && *r <= Rational64::one()
        }
        (Kind::Product(kinds), Value::Tuple(items)) => {
            kinds.len() == items.len()
                && kinds.iter().zip(items).all(|(k, item)| kind_contains(k, item))
        }
        _ => false,
    }
}

fn negate_in_kind(kind: &Kind, x: &Value) -> Value {
    match (kind, x) {
        (Kind::Boolean, Value::Bool(b)) => Value::Bool(!b),
        (Kind::Chain(n), Value::Level(k)) => Value::Level(n - 1 - k),
        (Kind::RationalUnit, Value::Rational(r)) => Value::Rational(Rational64::one() - r),
        (Kind::Product(kinds), Value::Tuple(items)) => Value::Tuple(
            kinds.iter().zip(items).map(|(k, item)| negate_in_kind(k, item)).collect(),
        ),
        _ => panic!("value outside lattice carrier: {x}"),
    }
}

fn parse_kind(text: &str) -> Result<Kind> {
    if text == "boolean" {
        Ok(Kind::Boolean)
    } else if text == "rational-unit" {
        Ok(Kind::RationalUnit)
    } else if let Some(n) = text.strip_prefix("chain:") {
        let n: u32 = n
            .parse()
            .map_err(|_| Error::Parse(format!("bad chain size {n:?}")))?;
        if n < 2 {
            return Err(Error::Parse("chain size must be at least 2".into()));
        }
        Ok(Kind::Chain(n))
    } else if let Some(rest) = text.strip_prefix("product:") {
        let comps = rest
            .split('*')
            .map(parse_kind)
            .collect::<Result<Vec<Kind>>>()?;
        if comps.is_empty() {
            return Err(Error::Parse("empty product lattice".into()));
        }
        if comps.iter().any(|k| matches!(k, Kind::Product(_))) {
            return Err(Error::Parse("product components must be chains".into()));
        }
        Ok(Kind::Product(comps))
    } else {
        Err(Error::Parse(format!("unknown lattice kind {text:?}")))
    }
}

fn render_kind(kind: &Kind) -> String {
    match kind {
        Kind::Boolean => "boolean".into(),
        Kind::RationalUnit => "rational-unit".into(),
        Kind::Chain(n) => format!("chain:{n}"),
        Kind::Product(kinds) => {
            let comps: Vec<String> = kinds.iter().map(render_kind).collect();
            format!("product:{}", comps.join("*"))
        }
    }
}

fn parse_in_kind(kind: &Kind, text: &str) -> Result<Value> {
    let value = match kind {
        Kind::Boolean => match text {
            "0" => Value::Bool(false),
            "1" => Value::Bool(true),
            _ => return Err(Error::Parse(format!("bad boolean value {text:?}"))),
        },
        Kind::Chain(_) => {
            let k: u32 = text
                .parse()
                .map_err(|_| Error::Parse(format!("bad chain level {text:?}")))?;
            Value::Level(k)
        }
        Kind::RationalUnit => Value::Rational(parse_rational(text)?),
        Kind::Product(kinds) => {
            let inner = text
                .strip_prefix('(')
                .and_then(|t| t.strip_suffix(')'))
                .ok_or_else(|| {
                    Error::Parse(format!("bad product value {text:?} (expected (v,…,v))"))
                })?;
            let parts: Vec<&str> = inner.split(',').collect();
            if parts.len() != kinds.len() {
                return Err(Error::Parse(format!(
                    "product value {text:?} has {} components, lattice has {}",
                    parts.len(),
                    kinds.len()
                )));
            }
            Value::Tuple(
                kinds
                    .iter()
                    .zip(parts)
                    .map(|(k, p)| parse_in_kind(k, p.trim()))
                    .collect::<Result<Vec<Value>>>()?,
            )
        }
    };
    if !kind_contains(kind, &value) {
        return Err(Error::Parse(format!("value {value} outside lattice carrier")));
    }
    Ok(value)
}

/// Exact rational from `a/b`, decimal (`0.3` = 3/10), or integer text.
fn parse_rational(text: &str) -> Result<Rational64> {
    let bad = || Error::Parse(format!("bad rational value {text:?}"));
    if let Some((n, d)) = text.split_once('/') {
        let n: i64 = n.parse().map_err(|_| bad())?;
        let d: i64 = d.parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        Ok(Rational64::new(n, d))
    } else if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let int: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let numer: i64 = frac.parse().map_err(|_| bad())?;
        let denom = 10i64
            .checked_pow(frac.len() as u32)
            .ok_or_else(bad)?;
        Ok(Rational64::from_integer(int) + Rational64::new(numer, denom))
    } else {
        let int: i64 = text.parse().map_err(|_| bad())?;
        Ok(Rational64::from_integer(int))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Value {
        Value::rational(n, d)
    }

    #[test]
    fn unit_chain_join_meet_are_max_min() {
        let l = Lattice::rational_unit();
        assert_eq!(l.join(&rat(1, 2), &rat(3, 10)), rat(1, 2));
        assert_eq!(l.meet(&rat(3, 5), &rat(7, 10)), rat(3, 5));
        assert_eq!(l.meet(&rat(3, 10), &l.top()), rat(3, 10));
    }

    #[test]
    fn standard_negation_on_unit_chain() {
        let l = Lattice::rational_unit().with_negation();
        assert_eq!(l.negate(&rat(3, 10)).unwrap(), rat(7, 10));
        assert_eq!(l.negate(&l.negate(&rat(2, 5)).unwrap()).unwrap(), rat(2, 5));
    }

    #[test]
    fn negate_without_negation_errors() {
        let l = Lattice::rational_unit();
        assert!(matches!(l.negate(&rat(1, 2)), Err(Error::NegationUnavailable(_))));
    }

    #[test]
    fn negation_is_antitone_and_de_morgan() {
        let l = Lattice::chain(5).with_negation();
        let values: Vec<Value> = (0..5).map(Value::Level).collect();
        for x in &values {
            for y in &values {
                if l.leq(x, y) {
                    let (cx, cy) = (l.negate(x).unwrap(), l.negate(y).unwrap());
                    assert!(l.leq(&cy, &cx));
                }
                assert_eq!(
                    l.negate(&l.join(x, y)).unwrap(),
                    l.meet(&l.negate(x).unwrap(), &l.negate(y).unwrap())
                );
            }
        }
    }

    #[test]
    fn closure_on_chain_adds_only_bounds() {
        let l = Lattice::rational_unit();
        let closed = l.closure(&[rat(1, 5), rat(1, 2)]);
        let expect: BTreeSet<Value> =
            [rat(0, 1), rat(1, 5), rat(1, 2), rat(1, 1)].into_iter().collect();
        assert_eq!(closed, expect);
    }

    #[test]
    fn closure_on_product_completes_the_grid() {
        let l = Lattice::product(vec![Kind::RationalUnit, Kind::RationalUnit]);
        let a = Value::Tuple(vec![rat(1, 5), rat(1, 2)]);
        let b = Value::Tuple(vec![rat(1, 2), rat(1, 5)]);
        let closed = l.closure(&[a.clone(), b.clone()]);
        assert!(closed.contains(&Value::Tuple(vec![rat(1, 5), rat(1, 5)])));
        assert!(closed.contains(&Value::Tuple(vec![rat(1, 2), rat(1, 2)])));
        assert!(closed.contains(&a) && closed.contains(&b));
    }

    #[test]
    fn chain_irreducibles_are_all_nonzero_elements() {
        let l = Lattice::rational_unit();
        let closed: BTreeSet<Value> =
            [rat(0, 1), rat(3, 10), rat(1, 2), rat(4, 5), rat(1, 1)].into_iter().collect();
        let irr = l.join_irreducibles(&closed).unwrap();
        assert_eq!(irr, vec![rat(3, 10), rat(1, 2), rat(4, 5), rat(1, 1)]);
    }

    #[test]
    fn boolean_irreducible_is_top() {
        let l = Lattice::boolean();
        let closed: BTreeSet<Value> = [Value::Bool(false), Value::Bool(true)].into_iter().collect();
        assert_eq!(l.join_irreducibles(&closed).unwrap(), vec![Value::Bool(true)]);
    }

    #[test]
    fn product_irreducibles_and_birkhoff_decomposition() {
        let l = Lattice::product(vec![Kind::Boolean, Kind::Boolean]);
        let one_zero = Value::Tuple(vec![Value::Bool(true), Value::Bool(false)]);
        let zero_one = Value::Tuple(vec![Value::Bool(false), Value::Bool(true)]);
        let closed = l.closure(&[one_zero.clone(), zero_one.clone()]);
        let irr = l.join_irreducibles(&closed).unwrap();
        assert_eq!(irr, vec![zero_one.clone(), one_zero.clone()]);
        // Birkhoff: every element is the join of the irreducibles below it.
        for y in &closed {
            let below: Vec<&Value> = irr.iter().filter(|j| l.leq(j, y)).collect();
            assert_eq!(&l.join_all(below.into_iter()), y);
        }
    }

    #[test]
    fn irreducibles_reject_unclosed_input() {
        let l = Lattice::rational_unit();
        let not_closed: BTreeSet<Value> = [rat(1, 2)].into_iter().collect();
        assert!(l.join_irreducibles(&not_closed).is_err());
    }

    #[test]
    fn distributivity_on_sampled_triples() {
        let l = Lattice::product(vec![Kind::Chain(3), Kind::Chain(4)]);
        let mut values = Vec::new();
        for a in 0..3u32 {
            for b in 0..4u32 {
                values.push(Value::Tuple(vec![Value::Level(a), Value::Level(b)]));
            }
        }
        for x in &values {
            for y in &values {
                for z in &values {
                    assert_eq!(
                        l.meet(x, &l.join(y, z)),
                        l.join(&l.meet(x, y), &l.meet(x, z))
                    );
                }
            }
        }
    }

    #[test]
    fn parse_value_accepts_decimal_fraction_and_tuple() {
        let unit = Lattice::rational_unit();
        assert_eq!(unit.parse_value("0.3").unwrap(), rat(3, 10));
        assert_eq!(unit.parse_value("3/10").unwrap(), rat(3, 10));
        assert_eq!(unit.parse_value("1").unwrap(), rat(1, 1));
        assert!(unit.parse_value("7/5").is_err());
        assert!(unit.parse_value("x").is_err());

        let prod = Lattice::product(vec![Kind::RationalUnit, Kind::Chain(3)]);
        assert_eq!(
            prod.parse_value("(0.3,2)").unwrap(),
            Value::Tuple(vec![rat(3, 10), Value::Level(2)])
        );
        assert!(prod.parse_value("(0.3)").is_err());

        let chain = Lattice::chain(4);
        assert_eq!(chain.parse_value("3").unwrap(), Value::Level(3));
        assert!(chain.parse_value("4").is_err());
    }

    #[test]
    fn spec_round_trips() {
        for spec in [
            "rational-unit",
            "rational-unit negation:standard",
            "chain:5",
            "boolean negation:standard",
            "product:rational-unit*rational-unit",
            "product:chain:3*boolean negation:standard",
        ] {
            let tokens: Vec<&str> = spec.split_whitespace().collect();
            let l = Lattice::parse_spec(&tokens).unwrap();
            assert_eq!(l.render_spec(), spec);
        }
        assert!(Lattice::parse_spec(&["chain:1"]).is_err());
        assert!(Lattice::parse_spec(&["rational-unit", "negation:odd"]).is_err());
    }

    #[test]
    fn value_display_round_trips() {
        let unit = Lattice::rational_unit();
        for text in ["0", "1", "3/10", "2/5"] {
            let v = unit.parse_value(text).unwrap();
            assert_eq!(unit.parse_value(&v.to_string()).unwrap(), v);
        }
        assert_eq!(rat(3, 10).to_string(), "3/10");
        assert_eq!(
            Value::Tuple(vec![rat(1, 2), Value::Level(2)]).to_string(),
            "(1/2,2)"
        );
    }
}
