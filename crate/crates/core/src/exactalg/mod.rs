//! Exact linear algebra over the integers and residue rings.

pub mod abelian;
pub mod linsys;
pub mod matrix;
pub mod ring;
pub mod snf;

pub use abelian::{AbelianGroupPresentation, LabelledGenerator};
pub use matrix::Matrix;
pub use ring::{is_prime, prime_factors, RingSpec};
pub use snf::{cokernel_coordinates, cokernel_presentation, kernel, rank, snf, solve, try_inverse, SmithDecomposition};
