//! p-adic random matrix products and the reflecting Poisson sea.
//!
//! * [`signatures`]: extended integers, signatures, bi-infinite windows.
//! * [`qcalc`]: exact q-series formulas.
//! * [`padic`]: matrices mod `p^d` and truncated singular numbers.
//! * [`ensembles`]: invariant matrix laws and the singular-number chain.
//! * [`sea`]: simulators for the interacting Poisson walkers.
//! * [`generator`]: exact Markov generator and transient probabilities.
//! * [`harness`]: experiment orchestration and statistical comparison.

pub mod ensembles;
pub mod error;
pub mod generator;
pub mod harness;
pub mod padic;
pub mod qcalc;
pub mod rng;
pub mod sea;
pub mod signatures;

pub use error::{Error, Result};
