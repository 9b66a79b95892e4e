//! Bounded chain complexes of free modules.

pub mod complex;
pub mod homology;
pub mod trim;
pub mod weight;

pub use complex::{cone, fiber, sign, ChainComplex, ChainMap, Homotopy, HomotopyEquivalence};
pub use homology::{homology, homology_at, lowest_homology, homology_profile, is_acyclic, is_quasi_iso, HomologyGroup};
pub use trim::{trim, Trimmed};
pub use weight::{weight_coconnective, weight_connective};
