//! Random generation and invariable generation of direct products of
//! nonabelian finite simple groups.
//!
//! The crate computes the expected number of uniform random elements needed
//! to generate a group (`e₁`) and to invariably generate it (the Chebotarev
//! invariant `C`), exactly for small simple groups and their direct powers
//! and by seeded Monte Carlo at larger scale.

pub mod atlas;
pub mod bitset;
pub mod engine;
pub mod error;
pub mod frac;
pub mod lattice;
pub mod perm;
pub mod product;

pub use error::{Error, Result};
