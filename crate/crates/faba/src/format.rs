//! Text format for automaton files.
//!
//! Files are line oriented. `#` starts a comment (outside quotes), blank
//! lines are skipped, and each remaining line begins with a directive:
//!
//! ```text
//! lattice rational-unit negation:standard
//! alphabet a b
//! states q0 q1
//! acceptance buchi
//! init q0 0.6
//! final q1 0.4
//! trans q0 a : 0.7 & q1
//! ```
//!
//! Nondeterministic automata use `ntrans q a q' 0.5` lines instead of
//! `trans`, and never mix with them. A weak partition is declared with
//! `weakblock <name> : q …` and `weakorder <lo> <= <hi>` lines. Tokens
//! containing whitespace, `#`, `"`, or `:` are written double-quoted.
//! The `lattice` line must precede any line carrying weights or formulas.
//! Serialization writes a fixed section order and sorted entries, so
//! parse/serialize round-trips are stable.

use std::collections::{BTreeMap, BTreeSet};

use crate::automata::{Aba, Acceptance, Nba, WeakPartition};
use crate::formula::Formula;
use crate::lattice::{Lattice, Value};
use crate::{Error, Result};

/// Either automaton flavor, as read from a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Automaton {
    Aba(Aba),
    Nba(Nba),
}

impl Automaton {
    pub fn lattice(&self) -> &Lattice {
        match self {
            Automaton::Aba(a) => &a.lattice,
            Automaton::Nba(n) => &n.lattice,
        }
    }

    pub fn validate(&self) -> Vec<String> {
        match self {
            Automaton::Aba(a) => a.validate(),
            Automaton::Nba(n) => n.validate(),
        }
    }

    pub fn into_aba(self) -> Result<Aba> {
        match self {
            Automaton::Aba(a) => Ok(a),
            Automaton::Nba(_) => Err(Error::Invalid(
                "expected an alternating automaton, found a nondeterministic one".into(),
            )),
        }
    }

    pub fn into_nba(self) -> Result<Nba> {
        match self {
            Automaton::Nba(n) => Ok(n),
            Automaton::Aba(_) => Err(Error::Invalid(
                "expected a nondeterministic automaton, found an alternating one".into(),
            )),
        }
    }
}

struct Tok {
    text: String,
    quoted: bool,
    /// Byte offset just past this token in the raw line.
    end: usize,
}

/// Tokens of one line plus the byte offset where content ends (comment
/// start or end of line).
fn split_line(raw: &str, line_no: usize) -> Result<(Vec<Tok>, usize)> {
    let mut toks = Vec::new();
    let bytes = raw.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c == b'#' {
            return Ok((toks, i));
        } else if c == b'"' {
            let start = i + 1;
            let mut j = start;
            while j < bytes.len() && bytes[j] != b'"' {
                j += 1;
            }
            if j == bytes.len() {
                return Err(Error::Parse(format!("line {line_no}: unclosed quote")));
            }
            toks.push(Tok {
                text: raw[start..j].to_string(),
                quoted: true,
                end: j + 1,
            });
            i = j + 1;
        } else {
            let start = i;
            while i < bytes.len()
                && !bytes[i].is_ascii_whitespace()
                && bytes[i] != b'#'
                && bytes[i] != b'"'
            {
                i += 1;
            }
            toks.push(Tok {
                text: raw[start..i].to_string(),
                quoted: false,
                end: i,
            });
        }
    }
    Ok((toks, raw.len()))
}

pub fn parse(text: &str) -> Result<Automaton> {
    let mut lattice: Option<Lattice> = None;
    let mut alphabet: Option<BTreeSet<String>> = None;
    let mut states: Option<BTreeSet<String>> = None;
    let mut acceptance: Option<Acceptance> = None;
    let mut initial: BTreeMap<String, Value> = BTreeMap::new();
    let mut finals: BTreeMap<String, Value> = BTreeMap::new();
    let mut trans: BTreeMap<(String, String), Formula> = BTreeMap::new();
    let mut ntrans: BTreeMap<(String, String), BTreeMap<String, Value>> = BTreeMap::new();
    let mut blocks: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut order: BTreeSet<(String, String)> = BTreeSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let no = idx + 1;
        let (toks, eff) = split_line(raw, no)?;
        if toks.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse(format!("line {no}: {msg}"));
        let head = toks[0].text.as_str();
        let need_lattice = |lattice: &Option<Lattice>| -> Result<Lattice> {
            lattice
                .clone()
                .ok_or_else(|| err(format!("{head} appears before the lattice line")))
        };
        let exactly = |n: usize| -> Result<()> {
            if toks.len() != n {
                Err(err(format!("{head} expects {} arguments", n - 1)))
            } else {
                Ok(())
            }
        };
        match head {
            "lattice" => {
                if lattice.is_some() {
                    return Err(err("duplicate lattice line".into()));
                }
                let parts: Vec<&str> = toks[1..].iter().map(|t| t.text.as_str()).collect();
                lattice = Some(
                    Lattice::parse_spec(&parts)
                        .map_err(|e| err(e.to_string()))?,
                );
            }
            "alphabet" | "states" => {
                let slot = if head == "alphabet" { &mut alphabet } else { &mut states };
                if slot.is_some() {
                    return Err(err(format!("duplicate {head} line")));
                }
                if toks.len() < 2 {
                    return Err(err(format!("empty {head} line")));
                }
                let mut set = BTreeSet::new();
                for t in &toks[1..] {
                    if !set.insert(t.text.clone()) {
                        return Err(err(format!("{head} lists {} twice", t.text)));
                    }
                }
                *slot = Some(set);
            }
            "acceptance" => {
                if acceptance.is_some() {
                    return Err(err("duplicate acceptance line".into()));
                }
                exactly(2)?;
                acceptance = Some(match toks[1].text.as_str() {
                    "buchi" => Acceptance::Buchi,
                    "cobuchi" => Acceptance::CoBuchi,
                    other => {
                        return Err(err(format!(
                            "unknown acceptance {other:?} (expected buchi or cobuchi)"
                        )))
                    }
                });
            }
            "init" | "final" => {
                exactly(3)?;
                let l = need_lattice(&lattice)?;
                let q = toks[1].text.clone();
                let w = l.parse_value(&toks[2].text).map_err(|e| err(e.to_string()))?;
                let map = if head == "init" { &mut initial } else { &mut finals };
                if map.contains_key(&q) {
                    return Err(err(format!("duplicate {head} weight for {q}")));
                }
                if w != l.bot() {
                    map.insert(q, w);
                }
            }
            "trans" => {
                let l = need_lattice(&lattice)?;
                if toks.len() < 4 || toks[3].text != ":" || toks[3].quoted {
                    return Err(err("trans expects `trans <state> <symbol> : <formula>`".into()));
                }
                let key = (toks[1].text.clone(), toks[2].text.clone());
                if trans.contains_key(&key) {
                    return Err(err(format!(
                        "duplicate transition for {} on {}",
                        key.0, key.1
                    )));
                }
                let src = &raw[toks[3].end..eff];
                let f = Formula::parse(src, &l).map_err(|e| err(e.to_string()))?;
                if f != Formula::False {
                    trans.insert(key, f);
                }
            }
            "ntrans" => {
                exactly(5)?;
                let l = need_lattice(&lattice)?;
                let key = (toks[1].text.clone(), toks[2].text.clone());
                let target = toks[3].text.clone();
                let w = l.parse_value(&toks[4].text).map_err(|e| err(e.to_string()))?;
                let slot = ntrans.entry(key.clone()).or_default();
                if slot.contains_key(&target) {
                    return Err(err(format!(
                        "duplicate edge {} --{}--> {}",
                        key.0, key.1, target
                    )));
                }
                if w != l.bot() {
                    slot.insert(target, w);
                }
            }
            "weakblock" => {
                if toks.len() < 4 || toks[2].text != ":" || toks[2].quoted {
                    return Err(err("weakblock expects `weakblock <name> : <state> …`".into()));
                }
                let name = toks[1].text.clone();
                if blocks.contains_key(&name) {
                    return Err(err(format!("duplicate weak block {name}")));
                }
                blocks.insert(name, toks[3..].iter().map(|t| t.text.clone()).collect());
            }
            "weakorder" => {
                exactly(4)?;
                if toks[2].text != "<=" {
                    return Err(err("weakorder expects `weakorder <lo> <= <hi>`".into()));
                }
                order.insert((toks[1].text.clone(), toks[3].text.clone()));
            }
            other => {
                return Err(err(format!("unknown directive {other:?}")));
            }
        }
    }

    let lattice = lattice.ok_or_else(|| Error::Parse("missing lattice line".into()))?;
    let alphabet = alphabet.ok_or_else(|| Error::Parse("missing alphabet line".into()))?;
    let states = states.ok_or_else(|| Error::Parse("missing states line".into()))?;
    let acceptance = acceptance.ok_or_else(|| Error::Parse("missing acceptance line".into()))?;

    ntrans.retain(|_, targets| !targets.is_empty());
    if !ntrans.is_empty() {
        if !trans.is_empty() {
            return Err(Error::Parse("file mixes trans and ntrans lines".into()));
        }
        if !blocks.is_empty() || !order.is_empty() {
            return Err(Error::Parse(
                "weak partitions apply to alternating automata only".into(),
            ));
        }
        return Ok(Automaton::Nba(Nba {
            lattice,
            alphabet,
            states,
            acceptance,
            initial,
            finals,
            edges: ntrans,
        }));
    }
    let weak = if blocks.is_empty() && order.is_empty() {
        None
    } else {
        Some(WeakPartition { blocks, order })
    };
    Ok(Automaton::Aba(Aba {
        lattice,
        alphabet,
        states,
        acceptance,
        initial,
        finals,
        delta: trans,
        weak,
    }))
}

fn quoted(token: &str) -> String {
    let plain = !token.is_empty()
        && token != ":"
        && !token
            .chars()
            .any(|c| c.is_whitespace() || c == '"' || c == '#');
    if plain {
        token.to_string()
    } else {
        format!("\"{token}\"")
    }
}

pub fn serialize(a: &Automaton) -> String {
    match a {
        Automaton::Aba(a) => serialize_aba(a),
        Automaton::Nba(n) => serialize_nba(n),
    }
}

fn push_header(out: &mut String, lattice: &Lattice, alphabet: &BTreeSet<String>, states: &BTreeSet<String>, acceptance: Acceptance) {
    out.push_str(&format!("lattice {}\n", lattice.render_spec()));
    let row = |items: &BTreeSet<String>| {
        items.iter().map(|s| quoted(s)).collect::<Vec<_>>().join(" ")
    };
    out.push_str(&format!("alphabet {}\n", row(alphabet)));
    out.push_str(&format!("states {}\n", row(states)));
    out.push_str(&format!("acceptance {acceptance}\n"));
}

fn push_weights(out: &mut String, head: &str, map: &BTreeMap<String, Value>) {
    for (q, w) in map {
        out.push_str(&format!("{head} {} {w}\n", quoted(q)));
    }
}

pub fn serialize_aba(a: &Aba) -> String {
    let mut out = String::new();
    push_header(&mut out, &a.lattice, &a.alphabet, &a.states, a.acceptance);
    push_weights(&mut out, "init", &a.initial);
    push_weights(&mut out, "final", &a.finals);
    for ((q, sym), f) in &a.delta {
        out.push_str(&format!("trans {} {} : {}\n", quoted(q), quoted(sym), f.render()));
    }
    if let Some(part) = &a.weak {
        for (name, members) in &part.blocks {
            let row = members.iter().map(|s| quoted(s)).collect::<Vec<_>>().join(" ");
            out.push_str(&format!("weakblock {} : {row}\n", quoted(name)));
        }
        for (lo, hi) in &part.order {
            out.push_str(&format!("weakorder {} <= {}\n", quoted(lo), quoted(hi)));
        }
    }
    out
}

pub fn serialize_nba(n: &Nba) -> String {
    let mut out = String::new();
    push_header(&mut out, &n.lattice, &n.alphabet, &n.states, n.acceptance);
    push_weights(&mut out, "init", &n.initial);
    push_weights(&mut out, "final", &n.finals);
    for ((q, sym), targets) in &n.edges {
        for (target, w) in targets {
            out.push_str(&format!(
                "ntrans {} {} {} {w}\n",
                quoted(q),
                quoted(sym),
                quoted(target)
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# three states over a b
lattice rational-unit
alphabet a b
states q0 q1 q2
acceptance buchi
init q0 0.6
final q1 0.4
final q2 0.8
trans q0 a : 0.7 & q1
trans q0 b : (0.5 & q2) | 0.3
trans q1 a : q1 & q2
trans q1 b : q2
trans q2 b : q2
";

    #[test]
    fn parses_and_serializes_canonically() {
        let a = parse(SAMPLE).unwrap();
        assert!(a.validate().is_empty());
        let text = serialize(&a);
        assert!(text.contains("init q0 3/5"));
        assert!(text.contains("trans q0 b : 3/10 | 1/2 & q2"));
        let again = parse(&text).unwrap();
        assert_eq!(a, again);
        assert_eq!(serialize(&again), text);
    }

    #[test]
    fn zero_weights_and_false_transitions_normalize_away() {
        let text = "\
lattice rational-unit
alphabet a
states q0
acceptance buchi
init q0 1
final q0 0
trans q0 a : false
";
        let a = parse(text).unwrap().into_aba().unwrap();
        assert!(a.finals.is_empty());
        assert!(a.delta.is_empty());
    }

    #[test]
    fn quoted_tokens_round_trip() {
        let text = "\
lattice boolean
alphabet a \"b c\"
states \"pair{U=[q0],V=[]}\" q1
acceptance buchi
init \"pair{U=[q0],V=[]}\" 1
final q1 1
trans \"pair{U=[q0],V=[]}\" \"b c\" : \"pair{U=[q0],V=[]}\" & q1 # comment
";
        let a = parse(text).unwrap();
        assert!(a.validate().is_empty());
        let out = serialize(&a);
        assert!(out.contains("alphabet a \"b c\""));
        assert_eq!(parse(&out).unwrap(), a);
    }

    #[test]
    fn nondeterministic_files_build_edge_maps() {
        let text = "\
lattice rational-unit
alphabet a b
states s t
acceptance buchi
init s 1
final t 1
ntrans s a t 0.5
ntrans s a s 1
ntrans t b t 0
";
        let n = parse(text).unwrap().into_nba().unwrap();
        assert_eq!(n.edge_weight("s", "a", "t"), Value::rational(1, 2));
        assert_eq!(n.edge_weight("t", "b", "t"), Value::rational(0, 1));
        assert!(!n.edges.contains_key(&("t".to_string(), "b".to_string())));
        let out = serialize(&Automaton::Nba(n.clone()));
        assert_eq!(parse(&out).unwrap().into_nba().unwrap(), n);
    }

    #[test]
    fn weak_partition_lines_round_trip() {
        let text = "\
lattice chain:3
alphabet a
states p q
acceptance buchi
init p 2
final q 2
trans p a : q
trans q a : q
weakblock upper : p
weakblock sink : q
weakorder sink <= upper
";
        let a = parse(text).unwrap().into_aba().unwrap();
        assert!(a.weak.is_some());
        assert_eq!(a.is_weak().unwrap(), true);
        let out = serialize_aba(&a);
        assert!(out.contains("weakorder sink <= upper"));
        assert_eq!(parse(&out).unwrap().into_aba().unwrap(), a);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "lattice rational-unit\nalphabet a\nstates q\nacceptance buchi\ninit q 0.7 extra\n";
        let e = parse(bad).unwrap_err();
        assert!(e.to_string().contains("line 5"));

        let dup = "lattice boolean\nlattice boolean\n";
        assert!(parse(dup).unwrap_err().to_string().contains("line 2"));

        let before = "init q 1\n";
        assert!(parse(before)
            .unwrap_err()
            .to_string()
            .contains("before the lattice"));

        let mixed = "\
lattice boolean
alphabet a
states q
acceptance buchi
trans q a : q
ntrans q a q 1
";
        assert!(parse(mixed).unwrap_err().to_string().contains("mixes"));
    }

    #[test]
    fn missing_headers_are_reported() {
        assert!(parse("").unwrap_err().to_string().contains("missing lattice"));
        let partial = "lattice boolean\nalphabet a\nstates q\n";
        assert!(parse(partial)
            .unwrap_err()
            .to_string()
            .contains("missing acceptance"));
    }
}
