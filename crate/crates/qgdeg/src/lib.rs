//! Exact-arithmetic invariants of Q-Gorenstein degenerations of surfaces:
//! Hirzebruch-Jung continued fractions and class-T singularities, link
//! homology and divisor cycle maps, toric M-resolutions with Mumford's
//! rational intersection pairing, the Riemann-Roch orthogonality ledger for
//! blocks of exceptional bundles, and Markov-type equation solution trees.
//!
//! Everything is computed over arbitrary-precision integers and rationals.

pub mod arith;
pub mod bundles;
pub mod cli;
pub mod error;
pub mod hjfrac;
pub mod linalg;
pub mod link;
pub mod markov;
pub mod report;
pub mod toric;

pub use error::{Error, Result};
