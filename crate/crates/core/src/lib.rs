//! Exact-arithmetic invariants of truncated Barsotti-Tate groups.
//!
//! The crate provides, bottom up:
//!
//! - truncated Witt rings `W_m(F_{p^n})` with their Frobenius ([`witt`]);
//! - matrices and sigma-semilinear module truncations with Frobenius and
//!   Verschiebung, homomorphism modules, and Cartier duality
//!   ([`matrix`], [`linsolve`], [`dieudonne`]);
//! - Kraft permutation normal forms and the level-1 automorphism
//!   dimension ([`kraft`]);
//! - Newton polygons, Traverso's closed-form dimension formulas, and slope
//!   recovery from matrices at finite precision ([`newton`]);
//! - the orbit action of the block-triangular divided group on invertible
//!   matrices, with orbit/stabilizer enumeration, the symplectic
//!   restriction, dimension fitting, and the truncation-level experiment
//!   ([`orbit`], [`experiment`]);
//! - the self-contained verification suite ([`verify`]).

#![allow(clippy::needless_range_loop)]

pub mod dieudonne;
pub mod error;
pub mod experiment;
pub mod kraft;
pub mod linsolve;
pub mod matrix;
pub mod newton;
pub mod orbit;
pub mod verify;
pub mod witt;

pub use error::{Error, Result};
