//! Unimodular forms, Witt and Grothendieck-Witt groups, and chain-level algebraic surgery,
//! all in exact arithmetic.

pub mod error;
pub mod chaincx;
pub mod exactalg;
pub mod formcore;
pub mod json;
pub mod qcat;
pub mod qsurgery;

pub use error::{Error, Result};
