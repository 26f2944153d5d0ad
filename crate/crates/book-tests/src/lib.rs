//! Runs every code snippet in the guide (`book/`) as a doctest.
//!
//! Each chapter's markdown is included verbatim as a module's
//! documentation, so `cargo test --doc -p book-tests` compiles and executes
//! every fenced `rust` block exactly as readers see it. A snippet that
//! drifts out of sync with the crate fails the build here, named after its
//! chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/environments.md")]
pub mod environments {}

#[doc = include_str!("../../../book/src/window-statistics.md")]
pub mod window_statistics {}

#[doc = include_str!("../../../book/src/policies.md")]
pub mod policies {}

#[doc = include_str!("../../../book/src/structure-analysis.md")]
pub mod structure_analysis {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
