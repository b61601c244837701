//! Witt decomposition of non-degenerate diagonal quadratic forms over the
//! rationals and over quadratic number fields, in exact arithmetic.
//!
//! Given a form q = <a_1, ..., a_n>, the crate computes an anisotropic form
//! q_a and a Witt index w with q isometric to q_a + w x <1, -1>, together
//! with the invariant certificate (dimension, signed discriminant,
//! signatures, Hasse invariants over a finite prime set) that proves the
//! decomposition. See the `examples/` directory for runnable entry points
//! into each layer: field arithmetic, prime ideals, local invariants,
//! S-singular bases and the decomposition itself.

pub mod aniso;
pub mod arith;
pub mod class_group;
pub mod cli;
pub mod field;
pub mod ideals;
pub mod linalg;
pub mod local;
pub mod residue;
pub mod signs;
pub mod witt;

pub use aniso::{anisotropic_part, ReductionTrace};
pub use field::{FieldElt, NumberField, RealPlace};
pub use ideals::PrimeIdeal;
pub use witt::{DiagonalForm, WittCertificate};
