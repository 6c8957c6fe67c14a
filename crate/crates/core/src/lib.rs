//! Finite-precision p-adic dynamics.
//!
//! Values live in [`padic`]; maps and perturbations in [`dynamics`]. The
//! solvers ([`shadowing`], [`conjugacy`]) construct their objects explicitly and
//! every construction can be replayed against an exhaustive scan of the residue
//! ring ℤ/p^N.

pub mod analysis;
pub mod conjugacy;
pub mod counterexample;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod padic;
pub mod shadowing;

pub use error::{Error, Result};
pub use padic::{NormValue, PAdic, PrecisionContext, Space};
