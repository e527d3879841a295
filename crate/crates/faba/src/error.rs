use thiserror::Error;

/// Errors produced by parsing, validation, and the automaton constructions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed textual input (automaton file, formula, value, lattice
    /// spec). The message carries the position when one is known.
    #[error("parse error: {0}")]
    Parse(String),

    /// An operation's structural precondition does not hold: wrong
    /// acceptance kind, mismatched alphabets or lattices, a symbol outside
    /// the alphabet, and the like.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// An operation needed the lattice negation but none is configured.
    #[error("negation unavailable: {0}")]
    NegationUnavailable(String),

    /// A construction exceeded a configured resource cap; the message names
    /// the offending operation.
    #[error("resource cap exceeded: {what} (cap {cap})")]
    ResourceCap { what: String, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
