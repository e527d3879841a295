//! Built-in example automata, used by the command line's `reproduce`
//! checks and throughout the test suite.

use crate::automata::Aba;
use crate::format;

/// Source text of [`branching`].
pub const BRANCHING: &str = "\
lattice rational-unit
alphabet a b
states q0 q1 q2 q3
acceptance buchi
init q0 1/2
final q1 2/5
final q2 3/10
final q3 1/10
trans q0 a : 2/5 & q1
trans q0 b : 3/10 | 1/2 & q2
trans q1 a : 1/5 & q1 & q2 | 1/2 & q3
trans q1 b : q2
trans q2 a : 1/5 & q1 & q2
trans q2 b : q3
trans q3 a : q2
trans q3 b : q3
";

/// Source text of [`pipeline`].
pub const PIPELINE: &str = "\
lattice rational-unit negation:standard
alphabet a b
states q0 q1 q2
acceptance buchi
init q0 3/5
final q1 2/5
final q2 4/5
trans q0 a : 7/10 & q1
trans q0 b : 3/10 | 1/2 & q2
trans q1 a : q1 & q2
trans q1 b : q2
trans q2 b : q2
";

/// Source text of [`cobuchi`].
pub const COBUCHI: &str = "\
lattice rational-unit negation:standard
alphabet a b
states q0 q1
acceptance cobuchi
init q0 1
final q0 2/5
final q1 4/5
trans q0 a : 7/10 & q1
trans q0 b : 3/10 | 1/2 & q1
trans q1 a : q0 & q1
";

/// Four states over `{a, b}` mixing conjunctive branching with a constant
/// escape hatch; it scores `a (a b)^w` at `3/10` through two runs weighing
/// `1/5` and `3/10`.
pub fn branching() -> Aba {
    parse(BRANCHING)
}

/// Three states over `{a, b}` with a fuzzy initial weight and fuzzy final
/// weights, small enough to push through the crisping and
/// alternation-removal pipeline whole.
pub fn pipeline() -> Aba {
    parse(PIPELINE)
}

/// A two-state co-Büchi automaton with fuzzy final weights, the shape that
/// exercises the full normalize-then-rank weakening.
pub fn cobuchi() -> Aba {
    parse(COBUCHI)
}

fn parse(text: &str) -> Aba {
    format::parse(text)
        .expect("sample text parses")
        .into_aba()
        .expect("sample text is alternating")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_parse_clean() {
        for a in [branching(), pipeline(), cobuchi()] {
            assert_eq!(a.validate(), Vec::<String>::new());
        }
    }

    #[test]
    fn sample_texts_round_trip() {
        for text in [BRANCHING, PIPELINE, COBUCHI] {
            let parsed = format::parse(text).unwrap();
            assert_eq!(format::serialize(&parsed), text);
        }
    }
}
