//! Certified proofs that differences of recurrence terms are not repdigits.
//!
//! The chain runs from exact arithmetic in `Q(√d)` ([`quadratic`]) through
//! interval enclosures ([`certified`]) and Matveev's lower bound
//! ([`matveev`]) to a continued-fraction reduction ([`reduction`]).
//! [`pipeline::run_proof`] strings it together and emits a certificate that
//! [`revalidate::revalidate`] can check on its own.
//!
//! ```
//! use baker_repdigit::recurrence::{exhaustive_search, lucas_balancing};
//!
//! assert!(exhaustive_search(&lucas_balancing(), 50, 2).unwrap().is_empty());
//! ```

pub mod certified;
pub mod checkpoints;
pub mod cli;
pub mod config;
pub mod error;
pub mod expr;
pub mod matveev;
pub mod pipeline;
pub mod quadratic;
pub mod recurrence;
pub mod revalidate;
pub mod reduction;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sequences.md")]
    mod sequences {}
    #[doc = include_str!("../../../book/src/quadratic-field.md")]
    mod quadratic_field {}
    #[doc = include_str!("../../../book/src/certified-reals.md")]
    mod certified_reals {}
    #[doc = include_str!("../../../book/src/matveev.md")]
    mod matveev {}
    #[doc = include_str!("../../../book/src/reduction.md")]
    mod reduction {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/discrepancies.md")]
    mod discrepancies {}
}
