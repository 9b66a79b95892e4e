//! Finite posets, cube diagrams of free modules, and the hermitian Q-construction over prime fields.

pub mod category;
pub mod diagram;
pub mod export;
pub mod hermq;
pub mod poset;

pub use category::{Arrow, FinCategory, LawReport};
pub use diagram::{
    is_strongly_cocartesian, kan_extended_from_axes, random_cube_diagram, squares_are_pushouts, DiagramKind,
    ModuleDiagram,
};
pub use export::{q_to_dot, q_to_json};
pub use hermq::{build_hermitian_q, max_rank_cap, witt_coordinates, HermitianQ, QObject, QReport, SpanMorphism};
pub use poset::FinPoset;
