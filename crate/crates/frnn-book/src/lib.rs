//! The guide under `book/` is an mdbook. mdbook cannot run snippets that
//! depend on workspace crates, so every chapter is pulled in here as module
//! docs and `cargo test --doc` runs its code blocks.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/feature-networks.md")]
pub mod feature_networks {}
#[doc = include_str!("../../../book/src/geometry.md")]
pub mod geometry {}
#[doc = include_str!("../../../book/src/least-squares.md")]
pub mod least_squares {}
#[doc = include_str!("../../../book/src/problems.md")]
pub mod problems {}
#[doc = include_str!("../../../book/src/newton.md")]
pub mod newton {}
#[doc = include_str!("../../../book/src/hyperparameter-search.md")]
pub mod hyperparameter_search {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
