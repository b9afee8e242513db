//! Compiles and runs every code block of the guide in `book/src` as a doctest.
//!
//! mdbook cannot run snippets that depend on workspace crates, so each
//! chapter is attached as the docs of an empty module instead.

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/lattices.md")]
pub mod lattices {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/certificates.md")]
pub mod certificates {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/bounds.md")]
pub mod bounds {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/models.md")]
pub mod models {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
