//! Split quasimorphisms, quasicocycles and quasi-representations on free
//! products of two groups, with exact rational arithmetic throughout.

pub mod automorphisms;
pub mod counting;
pub mod defect_space;
pub mod error;
pub mod groups;
pub mod matrix;
pub mod qrep;
pub mod quasicocycles;
pub mod quasimorphisms;
pub mod rational;
pub mod selftest;
pub mod words;

pub use error::{Error, Result};
