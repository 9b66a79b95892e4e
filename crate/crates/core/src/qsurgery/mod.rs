//! Quadratic chain complexes and algebraic surgery.

pub mod morphism;
pub mod normalize;
pub mod random;
pub mod structure;
pub mod surgery;

pub use morphism::{compose, improve_morphism, left_connectivity, ImprovementStep, Improved};
pub use normalize::{
    generator_datum, normalize_to_heart, profile_strings, rational_signature, Normalized, StepLog, DEFAULT_STEP_CAP,
};
pub use structure::{DegreeWitness, Family, PoincareWitness, QuadraticComplex};
pub use surgery::{
    lift_through_duality, nullhomotopy_for_lift, solve_nullhomotopy, surgery, Cobordism, LefschetzCertificate, Pin,
    SurgeryDatum, SurgeryOutcome,
};
