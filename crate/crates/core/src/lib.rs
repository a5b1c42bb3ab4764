//! Numerical laboratory for Bergman kernels of high tensor powers `L^k` of
//! positive Hermitian line bundles on model Riemann surfaces.

pub mod error;
pub mod geometry;
pub mod hilbert;
pub mod asymptotics;
pub mod peaks;
pub mod kodaira;
pub mod singular;
pub mod experiment;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/frames.md")]
    mod frames {}
    #[doc = include_str!("../../../book/src/asymptotics.md")]
    mod asymptotics {}
    #[doc = include_str!("../../../book/src/peaks.md")]
    mod peaks {}
    #[doc = include_str!("../../../book/src/kodaira.md")]
    mod kodaira {}
    #[doc = include_str!("../../../book/src/singular.md")]
    mod singular {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
