//! Exact-arithmetic constructions for restricted Lie algebras in odd
//! characteristic: reduced enveloping algebras, Gelfand-Graev modules,
//! reduced finite W-algebras, and machine-checked certificates for the
//! matrix-algebra decompositions that tie them together.
//!
//! Everything is computed over `F_{p^k}` with no rounding anywhere; every
//! certified statement is an exact rank or dimension identity.

pub mod error;
pub mod field;
pub mod matrix;
pub mod poly;
pub mod liealg;
pub mod datum;
pub mod penv;
pub mod ggg;
pub mod walg;

pub use error::{Error, Result};
pub use field::Field;
