//! Runs the book's code snippets as doc-tests.
//!
//! mdBook cannot execute example blocks against this workspace's crates,
//! so each chapter is included here as a documented module and
//! `cargo test --doc -p parazeta-guide` compiles and runs every fenced
//! Rust block. One module per chapter keeps failures attributable.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}

#[doc = include_str!("../../../book/src/maps.md")]
pub mod maps {}

#[doc = include_str!("../../../book/src/induced.md")]
pub mod induced {}

#[doc = include_str!("../../../book/src/orbits.md")]
pub mod orbits {}

#[doc = include_str!("../../../book/src/zeta.md")]
pub mod zeta {}

#[doc = include_str!("../../../book/src/spectral.md")]
pub mod spectral {}

#[doc = include_str!("../../../book/src/continuation.md")]
pub mod continuation {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
