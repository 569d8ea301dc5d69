//! The guide's chapters as doc modules, so `cargo test` runs their snippets.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/spreading.md")]
pub mod spreading {}
#[doc = include_str!("../../../book/src/reaction.md")]
pub mod reaction {}
#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}
#[doc = include_str!("../../../book/src/fitting.md")]
pub mod fitting {}
#[doc = include_str!("../../../book/src/entropy.md")]
pub mod entropy {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
