//! Decision procedures for sums of domain-permuted data vectors.
//!
//! A data vector maps finitely many data values to tuples in ℤ^d. Given a
//! finite set `V` of such vectors and a target `x`, the central question is
//! whether `x` is a finite sum of copies of members of `V`, each renamed by a
//! permutation of the data domain.

pub mod bca;
pub mod expressibility;
pub mod histogram;
pub mod json;
pub mod linalg;
pub mod oracle;
pub mod reversibility;
mod text;
pub mod updn;
pub mod vector;

pub use text::ParseError;
