//! Probability ("Malevich squares") representation of qubit, qutrit and
//! two-qubit states.
//!
//! A qubit is identified with three dichotomous probabilities, a qutrit with
//! four component qubits, and a two-qubit state with one or two inaccessible
//! levels with either a qubit or a qutrit. On top of that the crate computes
//! triangle areas, linear entropies, partial-transpose negativity and
//! concurrence, and reproduces the extremal area sums by constrained
//! Nelder–Mead search.

pub mod bounds;
pub mod cli;
pub mod numerics;
pub mod qubit;
pub mod qutrit;
pub mod spin1;
pub mod two_qubit;
