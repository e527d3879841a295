//! Positive Boolean formulas over lattice constants and variables.
//!
//! A formula is built from `true`, `false`, lattice constants, variables,
//! `&` and `|`; there is no negation on variables. The module provides the
//! text grammar used in automaton files, evaluation against a variable
//! subset, normalization to *standard form* (full disjunctive normal form
//! with one merged coefficient per variable set) and to the *simplest final
//! expansion* (standard form after absorption), minimal satisfaction sets,
//! equivalence, and the dual operation.
//!
//! Grammar: `|` binds loosest, `&` tighter, parentheses group. Atoms are
//! `true`, `false`, value literals of the ambient lattice (`0.3`, `3/10`,
//! chain levels, `(0.3,0.5)` tuples), and variables. A plain variable
//! matches `[A-Za-z_][A-Za-z0-9_'@]*`; any other name is written in double
//! quotes (`"rank(q1,4)"`), which the generated automaton constructions
//! rely on.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::lattice::{Kind, Lattice, Value};
use crate::{Error, Result};

/// A positive formula. ASTs built through [`Formula::and`] / [`Formula::or`]
/// (and everything the parser returns) are canonical: associative operators
/// are flattened, children sorted and deduplicated, and unit/absorbing
/// constants folded away.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Const(Value),
    Var(String),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }

    pub fn constant(v: Value) -> Formula {
        Formula::Const(v)
    }

    /// Canonical conjunction: flattens nested `And`s, drops `true`,
    /// collapses to `false` on a `false` child, sorts and deduplicates.
    pub fn and(children: impl IntoIterator<Item = Formula>) -> Formula {
        let mut flat = Vec::new();
        for child in children {
            match child {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        flat.sort();
        flat.dedup();
        match flat.len() {
            0 => Formula::True,
            1 => flat.pop().unwrap(),
            _ => Formula::And(flat),
        }
    }

    /// Canonical disjunction, dual to [`Formula::and`].
    pub fn or(children: impl IntoIterator<Item = Formula>) -> Formula {
        let mut flat = Vec::new();
        for child in children {
            match child {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        flat.sort();
        flat.dedup();
        match flat.len() {
            0 => Formula::False,
            1 => flat.pop().unwrap(),
            _ => Formula::Or(flat),
        }
    }

    /// All variables occurring in the formula.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False | Formula::Const(_) => {}
            Formula::Var(x) => {
                out.insert(x.clone());
            }
            Formula::And(cs) | Formula::Or(cs) => {
                for c in cs {
                    c.collect_vars(out);
                }
            }
        }
    }

    /// The value `v(θ, Y)`: substitute top for variables in `y`, bottom for
    /// the rest, and fold. `v(true, Y) = top`, `v(false, Y) = bot`.
    pub fn evaluate(&self, y: &BTreeSet<String>, lattice: &Lattice) -> Value {
        match self {
            Formula::True => lattice.top(),
            Formula::False => lattice.bot(),
            Formula::Const(l) => l.clone(),
            Formula::Var(x) => {
                if y.contains(x) {
                    lattice.top()
                } else {
                    lattice.bot()
                }
            }
            Formula::And(cs) => {
                let mut acc = lattice.top();
                for c in cs {
                    acc = lattice.meet(&acc, &c.evaluate(y, lattice));
                }
                acc
            }
            Formula::Or(cs) => {
                let mut acc = lattice.bot();
                for c in cs {
                    acc = lattice.join(&acc, &c.evaluate(y, lattice));
                }
                acc
            }
        }
    }

    /// Structurally replace every variable through `f` (recanonicalizing,
    /// since renaming can reorder children).
    pub fn rename(&self, f: &impl Fn(&str) -> String) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Const(l) => Formula::Const(l.clone()),
            Formula::Var(x) => Formula::Var(f(x)),
            Formula::And(cs) => Formula::and(cs.iter().map(|c| c.rename(f))),
            Formula::Or(cs) => Formula::or(cs.iter().map(|c| c.rename(f))),
        }
    }

    /// Replace every variable by a whole formula (recanonicalizing).
    pub fn substitute(&self, f: &impl Fn(&str) -> Formula) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Const(l) => Formula::Const(l.clone()),
            Formula::Var(x) => f(x),
            Formula::And(cs) => Formula::and(cs.iter().map(|c| c.substitute(f))),
            Formula::Or(cs) => Formula::or(cs.iter().map(|c| c.substitute(f))),
        }
    }

    /// The dual formula: `true ↔ false`, `& ↔ |`, constants negated,
    /// variables fixed. Needs the lattice negation.
    pub fn dual(&self, lattice: &Lattice) -> Result<Formula> {
        Ok(match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Const(l) => Formula::Const(lattice.negate(l)?),
            Formula::Var(x) => Formula::Var(x.clone()),
            Formula::And(cs) => {
                Formula::or(cs.iter().map(|c| c.dual(lattice)).collect::<Result<Vec<_>>>()?)
            }
            Formula::Or(cs) => {
                Formula::and(cs.iter().map(|c| c.dual(lattice)).collect::<Result<Vec<_>>>()?)
            }
        })
    }

    /// Full disjunctive normal form with coefficients merged per variable
    /// set. Errors with a resource cap when the expansion exceeds
    /// `term_cap` terms.
    pub fn standard_form(&self, lattice: &Lattice, term_cap: usize) -> Result<StandardForm> {
        let map = self.expand(lattice, term_cap)?;
        Ok(StandardForm::from_map(map, lattice))
    }

    fn expand(
        &self,
        lattice: &Lattice,
        term_cap: usize,
    ) -> Result<BTreeMap<BTreeSet<String>, Value>> {
        let cap_err = || Error::ResourceCap {
            what: "standard form expansion".into(),
            cap: term_cap,
        };
        let mut map = BTreeMap::new();
        match self {
            Formula::True => {
                map.insert(BTreeSet::new(), lattice.top());
            }
            Formula::False => {}
            Formula::Const(l) => {
                if *l != lattice.bot() {
                    map.insert(BTreeSet::new(), l.clone());
                }
            }
            Formula::Var(x) => {
                map.insert([x.clone()].into_iter().collect(), lattice.top());
            }
            Formula::Or(cs) => {
                for c in cs {
                    for (vars, coeff) in c.expand(lattice, term_cap)? {
                        merge_term(&mut map, vars, coeff, lattice);
                    }
                    if map.len() > term_cap {
                        return Err(cap_err());
                    }
                }
            }
            Formula::And(cs) => {
                map.insert(BTreeSet::new(), lattice.top());
                let bot = lattice.bot();
                for c in cs {
                    let next = c.expand(lattice, term_cap)?;
                    if map.len().saturating_mul(next.len()) > term_cap {
                        return Err(cap_err());
                    }
                    let mut product = BTreeMap::new();
                    for (avars, acoeff) in &map {
                        for (bvars, bcoeff) in &next {
                            let coeff = lattice.meet(acoeff, bcoeff);
                            if coeff == bot {
                                continue;
                            }
                            let vars = avars.union(bvars).cloned().collect();
                            merge_term(&mut product, vars, coeff, lattice);
                        }
                    }
                    map = product;
                }
            }
        }
        Ok(map)
    }

    /// Standard form followed by absorption: a term is dropped when another
    /// term has a subset of its variables and a coefficient at least as
    /// large. The result is the unique absorption-irredundant form.
    ///
    /// Absorption is interleaved with the expansion. Dropping a dominated
    /// term early commutes with conjunction (the dominating term's products
    /// dominate the dropped term's products), so the surviving terms are
    /// exactly the domination-maximal terms of the full expansion, while
    /// intermediate products stay near their final size.
    pub fn simplest_final_expansion(
        &self,
        lattice: &Lattice,
        term_cap: usize,
    ) -> Result<StandardForm> {
        let map = self.expand_absorbed(lattice, term_cap)?;
        Ok(StandardForm::from_map(map, lattice))
    }

    fn expand_absorbed(
        &self,
        lattice: &Lattice,
        term_cap: usize,
    ) -> Result<BTreeMap<BTreeSet<String>, Value>> {
        let cap_err = || Error::ResourceCap {
            what: "standard form expansion".into(),
            cap: term_cap,
        };
        let mut map = BTreeMap::new();
        match self {
            Formula::True => {
                map.insert(BTreeSet::new(), lattice.top());
            }
            Formula::False => {}
            Formula::Const(l) => {
                if *l != lattice.bot() {
                    map.insert(BTreeSet::new(), l.clone());
                }
            }
            Formula::Var(x) => {
                map.insert([x.clone()].into_iter().collect(), lattice.top());
            }
            Formula::Or(cs) => {
                for c in cs {
                    for (vars, coeff) in c.expand_absorbed(lattice, term_cap)? {
                        merge_term(&mut map, vars, coeff, lattice);
                    }
                    if map.len() > term_cap {
                        return Err(cap_err());
                    }
                }
                map = absorb_map(map, lattice);
            }
            Formula::And(cs) => {
                map.insert(BTreeSet::new(), lattice.top());
                let bot = lattice.bot();
                for c in cs {
                    let next = c.expand_absorbed(lattice, term_cap)?;
                    if map.len().saturating_mul(next.len()) > term_cap {
                        return Err(cap_err());
                    }
                    let mut product = BTreeMap::new();
                    for (avars, acoeff) in &map {
                        for (bvars, bcoeff) in &next {
                            let coeff = lattice.meet(acoeff, bcoeff);
                            if coeff == bot {
                                continue;
                            }
                            let vars = avars.union(bvars).cloned().collect();
                            merge_term(&mut product, vars, coeff, lattice);
                        }
                    }
                    map = absorb_map(product, lattice);
                }
            }
        }
        Ok(map)
    }

    /// The sets that satisfy the formula in a minimal manner, with their
    /// weights: exactly the terms of the simplest final expansion.
    /// `true` yields `[(∅, top)]`; `false` yields `[]`.
    pub fn minimal_satisfaction_sets(
        &self,
        lattice: &Lattice,
        term_cap: usize,
    ) -> Result<Vec<(BTreeSet<String>, Value)>> {
        Ok(self
            .simplest_final_expansion(lattice, term_cap)?
            .terms()
            .iter()
            .map(|t| (t.vars.clone(), t.coeff.clone()))
            .collect())
    }

    /// Whether two formulas take equal values on every variable subset.
    /// Decided by comparing simplest final expansions, which are canonical
    /// on chain lattices. On product lattices this check is sound but may
    /// be strict: two pointwise-equal formulas can have distinct
    /// expansions when incomparable coefficients split across terms.
    pub fn equivalent(&self, other: &Formula, lattice: &Lattice, term_cap: usize) -> Result<bool> {
        Ok(self.simplest_final_expansion(lattice, term_cap)?
            == other.simplest_final_expansion(lattice, term_cap)?)
    }

    /// Parse a formula against `lattice`'s value grammar.
    pub fn parse(text: &str, lattice: &Lattice) -> Result<Formula> {
        let tokens = lex(text)?;
        let mut parser = Parser { tokens, pos: 0, lattice };
        let f = parser.parse_or()?;
        match parser.peek() {
            None => Ok(f),
            Some((t, at)) => Err(Error::Parse(format!(
                "unexpected {} at column {}",
                t.describe(),
                at + 1
            ))),
        }
    }

    /// Canonical text form; [`Formula::parse`] of the result returns an
    /// equal AST.
    pub fn render(&self) -> String {
        self.to_string()
    }
}

fn merge_term(
    map: &mut BTreeMap<BTreeSet<String>, Value>,
    vars: BTreeSet<String>,
    coeff: Value,
    lattice: &Lattice,
) {
    map.entry(vars)
        .and_modify(|c| *c = lattice.join(c, &coeff))
        .or_insert(coeff);
}

/// Keep only domination-maximal terms. A dominator uses a strict subset of
/// the variables (equal sets were already merged) with a coefficient at
/// least as large. Dropping a term dominated by an entry that is itself
/// dropped is fine: domination is transitive, so a maximal dominator
/// survives. Small variable sets are checked by enumerating their proper
/// subsets and probing the map; oversized ones fall back to a linear scan.
fn absorb_map(
    map: BTreeMap<BTreeSet<String>, Value>,
    lattice: &Lattice,
) -> BTreeMap<BTreeSet<String>, Value> {
    let Some(min_len) = map.keys().map(|vars| vars.len()).min() else {
        return map;
    };
    let dominated = |vars: &BTreeSet<String>, coeff: &Value| {
        if vars.len() <= min_len {
            return false;
        }
        if vars.len() <= 12 {
            let items: Vec<&String> = vars.iter().collect();
            for mask in 0..(1u32 << items.len()) - 1 {
                let subset: BTreeSet<String> = items
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, x)| (*x).clone())
                    .collect();
                if subset.len() < min_len {
                    continue;
                }
                if let Some(ucoeff) = map.get(&subset) {
                    if lattice.leq(coeff, ucoeff) {
                        return true;
                    }
                }
            }
            false
        } else {
            map.iter().any(|(uvars, ucoeff)| {
                uvars.len() < vars.len() && uvars.is_subset(vars) && lattice.leq(coeff, ucoeff)
            })
        }
    };
    map.iter()
        .filter(|(vars, coeff)| !dominated(vars, coeff))
        .map(|(vars, coeff)| (vars.clone(), coeff.clone()))
        .collect()
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, false)
    }
}

impl Formula {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, inside_and: bool) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Const(v) => write!(f, "{v}"),
            Formula::Var(x) => {
                if is_plain_ident(x) {
                    write!(f, "{x}")
                } else {
                    write!(f, "\"{x}\"")
                }
            }
            Formula::And(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " & ")?;
                    }
                    if matches!(c, Formula::Or(_)) {
                        write!(f, "(")?;
                        c.fmt_prec(f, false)?;
                        write!(f, ")")?;
                    } else {
                        c.fmt_prec(f, true)?;
                    }
                }
                Ok(())
            }
            Formula::Or(cs) => {
                if inside_and {
                    write!(f, "(")?;
                }
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " | ")?;
                    }
                    c.fmt_prec(f, false)?;
                }
                if inside_and {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// Whether a name can appear unquoted in formulas and automaton files.
pub fn is_plain_ident(name: &str) -> bool {
    let mut chars = name.chars();
    let head_ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_');
    head_ok
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '\'' | '@'))
        && name != "true"
        && name != "false"
}

/// One term of a standard form: a coefficient and the variables it is
/// conjoined with. The empty variable set is the constant term. Terms
/// order by variable set first, then coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub vars: BTreeSet<String>,
    pub coeff: Value,
}

/// A standard form: sorted terms, no bottom coefficients, at most one term
/// per variable set. Empty means `false`; the single term `(top, ∅)` is
/// `true`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StandardForm {
    terms: Vec<Term>,
}

impl StandardForm {
    /// Build from raw terms: merges equal variable sets by joining
    /// coefficients, drops bottom coefficients, sorts.
    pub fn from_terms(terms: impl IntoIterator<Item = Term>, lattice: &Lattice) -> StandardForm {
        let mut map = BTreeMap::new();
        for t in terms {
            merge_term(&mut map, t.vars, t.coeff, lattice);
        }
        StandardForm::from_map(map, lattice)
    }

    fn from_map(map: BTreeMap<BTreeSet<String>, Value>, lattice: &Lattice) -> StandardForm {
        let bot = lattice.bot();
        let terms = map
            .into_iter()
            .filter(|(_, coeff)| *coeff != bot)
            .map(|(vars, coeff)| Term { vars, coeff })
            .collect();
        StandardForm { terms }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_false(&self) -> bool {
        self.terms.is_empty()
    }

    /// Apply absorption: drop a term when another term uses a subset of its
    /// variables with a coefficient at least as large.
    pub fn absorb(self, lattice: &Lattice) -> StandardForm {
        let keep: Vec<Term> = self
            .terms
            .iter()
            .filter(|t| {
                !self.terms.iter().any(|u| {
                    u.vars != t.vars
                        && u.vars.is_subset(&t.vars)
                        && lattice.leq(&t.coeff, &u.coeff)
                })
            })
            .cloned()
            .collect();
        StandardForm { terms: keep }
    }

    /// The canonical disjunction-of-conjunctions formula for these terms.
    pub fn to_formula(&self, lattice: &Lattice) -> Formula {
        let top = lattice.top();
        Formula::or(self.terms.iter().map(|t| {
            let mut parts: Vec<Formula> = Vec::new();
            if t.coeff != top || t.vars.is_empty() {
                parts.push(Formula::Const(t.coeff.clone()));
            }
            parts.extend(t.vars.iter().map(Formula::var));
            if t.vars.is_empty() && t.coeff == top {
                Formula::True
            } else {
                Formula::and(parts)
            }
        }))
    }

    /// `v(·, y)` computed directly on the terms.
    pub fn evaluate(&self, y: &BTreeSet<String>, lattice: &Lattice) -> Value {
        let contributing = self
            .terms
            .iter()
            .filter(|t| t.vars.is_subset(y))
            .map(|t| &t.coeff);
        lattice.join_all(contributing)
    }
}

enum Token {
    Or,
    And,
    LParen,
    RParen,
    Comma,
    Ident(String),
    Quoted(String),
    Literal(String),
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Or => "'|'".into(),
            Token::And => "'&'".into(),
            Token::LParen => "'('".into(),
            Token::RParen => "')'".into(),
            Token::Comma => "','".into(),
            Token::Ident(s) => format!("identifier {s:?}"),
            Token::Quoted(s) => format!("name {s:?}"),
            Token::Literal(s) => format!("literal {s:?}"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Token, usize)>> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let at = i;
        match bytes[i] {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'|' => {
                tokens.push((Token::Or, at));
                i += 1;
            }
            b'&' => {
                tokens.push((Token::And, at));
                i += 1;
            }
            b'(' => {
                tokens.push((Token::LParen, at));
                i += 1;
            }
            b')' => {
                tokens.push((Token::RParen, at));
                i += 1;
            }
            b',' => {
                tokens.push((Token::Comma, at));
                i += 1;
            }
            b'"' => {
                i += 1;
                let start = i;
                while i < bytes.len() && bytes[i] != b'"' {
                    i += 1;
                }
                if i == bytes.len() {
                    return Err(Error::Parse(format!(
                        "unterminated quoted name at column {}",
                        at + 1
                    )));
                }
                tokens.push((Token::Quoted(text[start..i].to_string()), at));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i], b'0'..=b'9' | b'.' | b'/') {
                    i += 1;
                }
                tokens.push((Token::Literal(text[start..i].to_string()), at));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric()
                        || matches!(bytes[i], b'_' | b'\'' | b'@'))
                {
                    i += 1;
                }
                tokens.push((Token::Ident(text[start..i].to_string()), at));
            }
            other => {
                return Err(Error::Parse(format!(
                    "unexpected character {:?} at column {}",
                    other as char,
                    at + 1
                )));
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    lattice: &'a Lattice,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&(Token, usize)> {
        self.tokens.get(self.pos)
    }

    fn parse_or(&mut self) -> Result<Formula> {
        let mut children = vec![self.parse_and()?];
        while matches!(self.peek(), Some((Token::Or, _))) {
            self.pos += 1;
            children.push(self.parse_and()?);
        }
        Ok(Formula::or(children))
    }

    fn parse_and(&mut self) -> Result<Formula> {
        let mut children = vec![self.parse_atom()?];
        while matches!(self.peek(), Some((Token::And, _))) {
            self.pos += 1;
            children.push(self.parse_atom()?);
        }
        Ok(Formula::and(children))
    }

    fn parse_atom(&mut self) -> Result<Formula> {
        let (token, at) = self
            .tokens
            .get(self.pos)
            .ok_or_else(|| Error::Parse("unexpected end of formula".into()))?;
        let at = *at;
        match token {
            Token::Ident(name) => {
                self.pos += 1;
                Ok(match name.as_str() {
                    "true" => Formula::True,
                    "false" => Formula::False,
                    _ => Formula::Var(name.clone()),
                })
            }
            Token::Quoted(name) => {
                self.pos += 1;
                Ok(Formula::Var(name.clone()))
            }
            Token::Literal(text) => {
                self.pos += 1;
                Ok(Formula::Const(self.lattice.parse_value(text)?))
            }
            Token::LParen => {
                // A '(' opens either a tuple literal (literal, comma) or a
                // parenthesized subformula; commas occur nowhere else.
                if matches!(self.tokens.get(self.pos + 1), Some((Token::Literal(_), _))) {
                    if let Some(f) = self.try_tuple_literal()? {
                        return Ok(f);
                    }
                }
                self.pos += 1;
                let inner = self.parse_or()?;
                match self.peek() {
                    Some((Token::RParen, _)) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(Error::Parse(format!(
                        "unclosed '(' at column {}",
                        at + 1
                    ))),
                }
            }
            other => Err(Error::Parse(format!(
                "unexpected {} at column {}",
                other.describe(),
                at + 1
            ))),
        }
    }

    /// At a '(': if it shapes like `(lit, lit, …)`, consume it as one
    /// tuple value literal. A single `(lit)` counts only on one-component
    /// product lattices, where a bare literal could not be a constant
    /// anyway. Returns Ok(None) to fall back to subformula parsing.
    fn try_tuple_literal(&mut self) -> Result<Option<Formula>> {
        let single_component =
            matches!(self.lattice.kind(), Kind::Product(kinds) if kinds.len() == 1);
        let start = self.pos;
        let mut parts = Vec::new();
        let mut pos = self.pos + 1;
        loop {
            match self.tokens.get(pos) {
                Some((Token::Literal(text), _)) => {
                    parts.push(text.clone());
                    pos += 1;
                }
                _ => return Ok(None),
            }
            match self.tokens.get(pos) {
                Some((Token::Comma, _)) => pos += 1,
                Some((Token::RParen, _)) if parts.len() >= 2 || single_component => {
                    pos += 1;
                    break;
                }
                _ => return Ok(None),
            }
        }
        let text = format!("({})", parts.join(","));
        let at = self.tokens[start].1;
        let value = self
            .lattice
            .parse_value(&text)
            .map_err(|e| Error::Parse(format!("{e} at column {}", at + 1)))?;
        self.pos = pos;
        Ok(Some(Formula::Const(value)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Kind;

    fn unit() -> Lattice {
        Lattice::rational_unit()
    }

    fn unit_neg() -> Lattice {
        Lattice::rational_unit().with_negation()
    }

    fn rat(n: i64, d: i64) -> Value {
        Value::rational(n, d)
    }

    fn p(text: &str) -> Formula {
        Formula::parse(text, &unit()).unwrap()
    }

    fn term(coeff: Value, vars: &[&str]) -> Term {
        Term { vars: vars.iter().map(|s| s.to_string()).collect(), coeff }
    }

    fn theta1() -> Formula {
        p("0.5 | (x2 & 0.2 & x3) | (0.8 & x2)")
    }

    fn theta2() -> Formula {
        p("0.5 | (((0.3 & x3) | 0.8) & x2)")
    }

    const CAP: usize = 100_000;

    #[test]
    fn parse_builds_expected_ast() {
        assert_eq!(
            p("(0.5 & q2) | 0.3"),
            Formula::or([
                Formula::and([Formula::Const(rat(1, 2)), Formula::var("q2")]),
                Formula::Const(rat(3, 10)),
            ])
        );
        assert_eq!(p("true"), Formula::True);
        assert_eq!(p("false"), Formula::False);
    }

    #[test]
    fn render_round_trips_canonically() {
        for text in [
            "q1 & (q2 | q3)",
            "0.3 | 0.5 & q2",
            "true",
            "0.7 & q1",
            "\"rank(q1,4)\" | q0",
        ] {
            let f = p(text);
            assert_eq!(Formula::parse(&f.render(), &unit()).unwrap(), f);
        }
        assert_eq!(p("q1 & (q2 | q3)").render(), "q1 & (q2 | q3)");
    }

    #[test]
    fn quoted_and_primed_names_parse() {
        let f = p("\"pair{U=[q0],V=[]}\" & q0' & q0@2");
        let vars = f.vars();
        assert!(vars.contains("pair{U=[q0],V=[]}"));
        assert!(vars.contains("q0'"));
        assert!(vars.contains("q0@2"));
        assert_eq!(Formula::parse(&f.render(), &unit()).unwrap(), f);
    }

    #[test]
    fn parse_reports_positions() {
        let err = Formula::parse("q1 & ", &unit()).unwrap_err();
        assert!(err.to_string().contains("end of formula"), "{err}");
        let err = Formula::parse("q1 ) q2", &unit()).unwrap_err();
        assert!(err.to_string().contains("column 4"), "{err}");
        let err = Formula::parse("0.5 & 1.5", &unit()).unwrap_err();
        assert!(err.to_string().contains("outside"), "{err}");
    }

    #[test]
    fn tuple_literals_parse_on_product_lattices() {
        let l = Lattice::product(vec![Kind::RationalUnit, Kind::RationalUnit]);
        let f = Formula::parse("(0.3,0.5) & x | (x & y)", &l).unwrap();
        assert!(matches!(
            &f,
            Formula::Or(cs) if cs.len() == 2
        ));
        assert_eq!(Formula::parse(&f.render(), &l).unwrap(), f);
    }

    #[test]
    fn evaluate_matches_substitution() {
        let y: BTreeSet<String> = ["x2".to_string(), "x3".to_string()].into_iter().collect();
        assert_eq!(theta1().evaluate(&y, &unit()), rat(4, 5));
        assert_eq!(Formula::True.evaluate(&BTreeSet::new(), &unit()), rat(1, 1));
        assert_eq!(p("q1").evaluate(&BTreeSet::new(), &unit()), rat(0, 1));
    }

    #[test]
    fn standard_form_of_theta1() {
        let sf = theta1().standard_form(&unit(), CAP).unwrap();
        assert_eq!(
            sf.terms(),
            &[
                term(rat(1, 2), &[]),
                term(rat(4, 5), &["x2"]),
                term(rat(1, 5), &["x2", "x3"]),
            ]
        );
    }

    #[test]
    fn standard_form_edge_cases() {
        assert!(Formula::False.standard_form(&unit(), CAP).unwrap().is_false());
        let sf = p("(q1 | q2) & q3").standard_form(&unit(), CAP).unwrap();
        assert_eq!(
            sf.terms(),
            &[term(rat(1, 1), &["q1", "q3"]), term(rat(1, 1), &["q2", "q3"])]
        );
    }

    #[test]
    fn same_varset_terms_merge_by_join() {
        let sf = p("(0.3 & q1) | (0.6 & q1)").standard_form(&unit(), CAP).unwrap();
        assert_eq!(sf.terms(), &[term(rat(3, 5), &["q1"])]);
    }

    #[test]
    fn sfe_of_both_thetas_is_the_shared_form() {
        let expect = vec![term(rat(1, 2), &[]), term(rat(4, 5), &["x2"])];
        for f in [theta1(), theta2()] {
            let sfe = f.simplest_final_expansion(&unit(), CAP).unwrap();
            assert_eq!(sfe.terms(), expect.as_slice());
        }
    }

    #[test]
    fn classical_absorption() {
        let sfe = p("q1 | (q1 & q2)").simplest_final_expansion(&unit(), CAP).unwrap();
        assert_eq!(sfe.terms(), &[term(rat(1, 1), &["q1"])]);
    }

    #[test]
    fn incomparable_coefficients_both_survive() {
        let l = Lattice::product(vec![Kind::Boolean, Kind::Boolean]);
        let f = Formula::parse("((1,0) & x) | ((0,1) & x & y)", &l).unwrap();
        let sfe = f.simplest_final_expansion(&l, CAP).unwrap();
        assert_eq!(sfe.terms().len(), 2);
    }

    #[test]
    fn sfe_preserves_evaluation() {
        let l = unit();
        for f in [theta1(), theta2(), p("(q1 | 0.2) & (q2 | 0.7) & q3")] {
            let sfe = f.simplest_final_expansion(&l, CAP).unwrap();
            let g = sfe.to_formula(&l);
            let vars: Vec<String> = f.vars().into_iter().collect();
            for mask in 0..(1u32 << vars.len()) {
                let y: BTreeSet<String> = vars
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, v)| v.clone())
                    .collect();
                assert_eq!(f.evaluate(&y, &l), g.evaluate(&y, &l));
                assert_eq!(f.evaluate(&y, &l), sfe.evaluate(&y, &l));
            }
        }
    }

    #[test]
    fn minimal_satisfaction_sets_examples() {
        let sets = theta1().minimal_satisfaction_sets(&unit(), CAP).unwrap();
        assert_eq!(
            sets,
            vec![
                (BTreeSet::new(), rat(1, 2)),
                (["x2".to_string()].into_iter().collect(), rat(4, 5)),
            ]
        );
        assert!(Formula::False.minimal_satisfaction_sets(&unit(), CAP).unwrap().is_empty());
        assert_eq!(
            p("q1 & q2").minimal_satisfaction_sets(&unit(), CAP).unwrap(),
            vec![(
                ["q1".to_string(), "q2".to_string()].into_iter().collect(),
                rat(1, 1)
            )]
        );
        assert_eq!(
            Formula::True.minimal_satisfaction_sets(&unit(), CAP).unwrap(),
            vec![(BTreeSet::new(), rat(1, 1))]
        );
    }

    #[test]
    fn equivalence_examples() {
        assert!(theta1().equivalent(&theta2(), &unit(), CAP).unwrap());
        assert!(Formula::True
            .equivalent(&Formula::Const(rat(1, 1)), &unit(), CAP)
            .unwrap());
        assert!(!p("q1").equivalent(&p("q2"), &unit(), CAP).unwrap());
    }

    #[test]
    fn dual_examples() {
        let l = unit_neg();
        let f = Formula::parse("(0.5 & q2) | 0.3", &l).unwrap();
        let expect = Formula::parse("(0.5 | q2) & 0.7", &l).unwrap();
        assert_eq!(f.dual(&l).unwrap(), expect);

        let f = Formula::parse("0.6 & q1", &l).unwrap();
        assert_eq!(f.dual(&l).unwrap(), Formula::parse("0.4 | q1", &l).unwrap());

        assert_eq!(Formula::True.dual(&l).unwrap(), Formula::False);
    }

    #[test]
    fn dual_is_involutive_and_needs_negation() {
        let l = unit_neg();
        for text in ["(0.5 & q2) | 0.3", "q1 & (q2 | q3)", "true", "0.25"] {
            let f = Formula::parse(text, &l).unwrap();
            assert_eq!(f.dual(&l).unwrap().dual(&l).unwrap(), f);
        }
        assert!(matches!(
            theta1().dual(&unit()),
            Err(Error::NegationUnavailable(_))
        ));
    }

    #[test]
    fn expansion_cap_trips() {
        // (a1|b1) & … & (a20|b20) expands to 2^20 terms.
        let f = Formula::and((0..20).map(|i| {
            Formula::or([Formula::var(format!("a{i}")), Formula::var(format!("b{i}"))])
        }));
        assert!(matches!(
            f.standard_form(&unit(), 1000),
            Err(Error::ResourceCap { .. })
        ));
    }
}
