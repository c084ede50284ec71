//! Generalized concurrence objects for bipartite quantum states of arbitrary
//! finite dimension, and a numerical separability test built on them.
//!
//! The crate is organized around one pipeline:
//!
//! 1. [`states`] — value types for pure states, density matrices, and
//!    decompositions into unnormalized pure states, plus generators for
//!    benchmark state families.
//! 2. [`concurrence`] — concurrence matrices (doubled 2×2 minors of the
//!    coefficient matrix), higher-order minor tensors, and preconcurrence
//!    tensors over decompositions with their two transformation laws.
//! 3. [`biconcurrence`] — the fourth-order biconcurrence operator, built by
//!    three independent routes that must agree, and the diagonal-trace
//!    functional whose minimum over mixing unitaries decides separability.
//! 4. [`optim`] — Riemannian gradient descent over the unitary group with
//!    deterministic multistart.
//! 5. [`separability`] — the separability decision, PPT and Wootters oracles,
//!    the rank-2 dichotomy classifier, and the two-qubit witness search.
//!
//! File formats and the command-line front end live in [`io`] and [`cli`].

pub mod biconcurrence;
pub mod cli;
pub mod concurrence;
mod error;
pub mod io;
pub mod linalg;
pub mod optim;
pub mod separability;
pub mod states;

pub use error::{Error, Result};
