//! Exact machinery for generalized Egyptian fractions over ordered groups.
//!
//! The classical object is a sum of distinct unit fractions; here the
//! summands come from arbitrary sets that are locally cofinite at zero
//! inside an ordered abelian group carrying a countable neighborhood
//! basis. The crate provides:
//!
//! * [`group`]: the ordered-group abstraction and the three shipped
//!   instances (exact rationals, integers, lexicographic integer pairs);
//! * [`lcf0`]: set descriptors with truncation, membership, combinators,
//!   and a definitional audit;
//! * [`sumset`]: finite nets covering the zero-padded sumsets, gap
//!   certificates, exact representation enumeration, censuses, and the
//!   three-term classification;
//! * [`dynamics`]: deterministic element streams, accumulation-point
//!   search, and strictly decreasing trace extraction;
//! * [`config`]: JSON descriptions of groups and sets shared by the CLI
//!   and tests.
//!
//! All arithmetic is exact. No floating point value is ever produced,
//! accepted, or compared anywhere in the crate.

pub mod config;
pub mod dynamics;
pub mod group;
pub mod lcf0;
pub mod sumset;
