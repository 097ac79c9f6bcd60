//! Completion of incomplete two-dimensional syndrome tables over finite fields
//! with the Berlekamp-Massey-Sakata algorithm on hyperbolic index sets.

pub mod bms;
pub mod gf;
pub mod inference;
pub mod lattice;
pub mod oracle;
pub mod poly;
pub mod recovery;
pub mod table;

pub use gf::{Elem, Field, FieldSpec};
pub use lattice::{IndexPair, OrderKind, TableShape};
pub use poly::{CellSource, EvaluationPoint, Poly};
pub use table::IncompleteTable;
