//! Exact incidence geometry between point sets and Moebius transformations
//! over prime fields.
//!
//! The crate provides arithmetic on PGL(2, p), brute-force and pivot-based
//! enumeration of rich transformations, transformation energy, the
//! application constructions (representation counts, expanders, projective
//! equivalence), and a seeded harness comparing exact counts against the
//! shapes of the corresponding upper bounds.

pub mod applications;
pub mod energy;
pub mod error;
pub mod field;
pub mod harness;
pub mod incidence;
pub mod io;
pub mod pivot;

pub use error::{Error, Result};
pub use field::{FieldElement, Matrix2, MoebiusMap, PrimeField, ProjectivePoint};
pub use incidence::{Point, PointSet, TransformSet};
