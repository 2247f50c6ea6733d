//! The guide, embedded chapter by chapter from `book/src`. Each
//! fenced snippet in the book compiles and runs as a doc-test here,
//! so the narrative cannot drift from the API it describes.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/memristor.md")]
pub mod memristor {}

#[doc = include_str!("../../../book/src/circuit.md")]
pub mod circuit {}

#[doc = include_str!("../../../book/src/analysis.md")]
pub mod analysis {}

#[doc = include_str!("../../../book/src/transient.md")]
pub mod transient {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
