//! The guide under `book/src`, compiled so every snippet runs as a doctest.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}

#[doc = include_str!("../../../book/src/calculus.md")]
pub mod calculus {}

#[doc = include_str!("../../../book/src/scales.md")]
pub mod scales {}

#[doc = include_str!("../../../book/src/groupoids.md")]
pub mod groupoids {}

#[doc = include_str!("../../../book/src/schwartz.md")]
pub mod schwartz {}

#[doc = include_str!("../../../book/src/cusp.md")]
pub mod cusp {}

#[doc = include_str!("../../../book/src/symbols.md")]
pub mod symbols {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
