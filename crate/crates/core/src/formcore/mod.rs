//! Unimodular forms with form parameters, their classification and Grothendieck-Witt groups.

mod arf;
mod finite;
mod form;
mod groups;
mod integral;
mod lagrangian;
mod param;

pub use finite::{
    canonical_form, classes, det_class, is_isometric_finite, lagrangians, CanonicalForm, Verdict, DEFAULT_ENUM_CAP,
    DEFAULT_ORBIT_CAP,
};
pub use form::{e8, hyperbolic, Isometry, UnimodularForm};
pub use param::{Flavor, FormParameter, GeneralQ, GeneralSpec};
pub use arf::arf;
pub use integral::{inertia, integral_invariants, is_isometric_integral, positive_rank, short_vectors, signature};
pub use lagrangian::{diagonal_lagrangian, find_lagrangian, find_lagrangian_capped, is_lagrangian, LagrangianMode};
pub use groups::{class_label, gw0, witt_class, witt_group, GroupComputation};
