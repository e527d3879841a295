//! Fuzzy alternating Büchi and co-Büchi automata over bounded distributive
//! lattices.
//!
//! The crate models ω-automata whose transition structure is given by
//! positive Boolean formulas over lattice constants and state variables, and
//! whose acceptance is weighted: initial, final and transition weights are
//! drawn from a bounded distributive lattice (the unit interval with
//! min/max, finite chains, the two-point Boolean lattice, or products of
//! chains). It provides:
//!
//! * exact lattice arithmetic ([`lattice`]), including finite sublattice
//!   closure and join-irreducible decomposition;
//! * the formula algebra ([`formula`]): parsing, evaluation, standard form,
//!   simplest final expansion, minimal satisfaction sets, duality;
//! * automaton data types, validation and a line-based text format
//!   ([`automata`], [`format`]);
//! * the equivalence-preserving constructions ([`transforms`]):
//!   nondeterministic-to-alternating, crisp initial, crisp final, union,
//!   meet, dualization, alternation removal, and the rank-based
//!   co-Büchi-to-weak translation;
//! * exact evaluation of lasso words ([`eval`]) and the
//!   emptiness-/universality-/implication-value decision procedures
//!   ([`decision`]).
//!
//! All arithmetic is exact (rationals, never floats), so evaluation results
//! can be compared with `==`.

pub mod automata;
pub mod decision;
pub mod eval;
pub mod format;
pub mod formula;
pub mod lattice;
pub mod samples;
pub mod transforms;

mod error;

pub use error::{Error, Result};

/// Resource bounds for the operations that can blow up: disjunctive normal
/// form expansion and the subset-style automaton constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of terms a standard-form expansion may produce.
    pub term_cap: usize,
    /// Maximum number of states a construction may materialize, and the
    /// maximum number of choice functions the brute-force oracle may walk.
    pub state_cap: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { term_cap: 100_000, state_cap: 100_000 }
    }
}

impl Limits {
    /// Limits with a caller-chosen term cap and the default state cap.
    pub fn with_term_cap(term_cap: usize) -> Self {
        Limits { term_cap, ..Limits::default() }
    }
}
