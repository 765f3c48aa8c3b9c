//! Compiles the guide's code listings as doc-tests, one module per chapter,
//! so the book cannot drift from the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/sparse.md")]
pub mod sparse {}
#[doc = include_str!("../../../book/src/spectral.md")]
pub mod spectral {}
#[doc = include_str!("../../../book/src/phase_estimation.md")]
pub mod phase_estimation {}
#[doc = include_str!("../../../book/src/estimator.md")]
pub mod estimator {}
#[doc = include_str!("../../../book/src/reduction.md")]
pub mod reduction {}
#[doc = include_str!("../../../book/src/gate_set.md")]
pub mod gate_set {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
