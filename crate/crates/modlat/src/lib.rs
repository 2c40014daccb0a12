//! Canonical-form algebra for the minimal classical modal logic E.
//!
//! The library works inside finite modal contexts E[v,d]: formulas with at
//! most `v` variables and modal degree at most `d`, identified up to
//! equiprovability with their disjunctive canonical form (a set of minterms,
//! the "minmatrix"). On top of that it provides
//!
//! - level-0 uniform substitutions, their composition monoid, the prime
//!   (invertible) subgroup and its minterm orbits ([`subst`]),
//! - uniform replacements `<>e -> rho(e)` and their extended 5-input variant,
//!   including the 24-element prime group and the brute-force search for the
//!   31,104 prime extended replacements ([`replace`]),
//! - characteristic-minmatrix machinery: primary labels, collapse/immunity
//!   checks, the 16-system degree-1 lattice over zero variables and the
//!   embedded normal-logic fixtures ([`cmm`]),
//! - neighborhood witness models in which every minterm of a context is
//!   satisfied at its own world ([`witness`]).

pub mod bits;
pub mod cmm;
pub mod perm;
pub mod context;
pub mod formula;
pub mod replace;
pub mod subst;
pub mod witness;

pub use context::{Context, Minmatrix, Minterm, DEFAULT_CAPACITY};
pub use formula::{parse, print, Formula};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("capacity exceeded for context E[{v},{d}]: {detail}")]
    CapacityExceeded { v: u32, d: u32, detail: String },

    #[error("context mismatch: {0}")]
    ContextMismatch(String),

    #[error("{0}")]
    Domain(String),
}
