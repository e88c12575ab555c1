//! Monte Carlo temporal ghost imaging with superbunching pseudothermal light.
//!
//! * [`source`] — the cascaded-exponential intensity model: sampling,
//!   density and distribution function.
//! * [`imaging`] — objects, the bucket/reference correlation simulator and
//!   normalized ghost images.
//! * [`theory`] — the independent-bin closed form and the finite-bandwidth
//!   kernel convolution.
//! * [`analysis`] — visibility, the `g²(0)` estimator, study drivers and
//!   histograms.
//!
//! ```
//! use superbunch::theory::white_noise_image;
//! use superbunch::imaging::default_double_slit;
//!
//! let curve = white_noise_image(&default_double_slit(), 1)?;
//! assert!((curve.g2[62] - 1.1).abs() < 1e-12);
//! # Ok::<(), superbunch::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod exact;
pub mod imaging;
pub mod quadrature;
pub mod rng;
pub mod source;
pub mod theory;

pub use error::{Error, Result};

// The guide's snippets run as doc-tests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/light-source.md")]
    mod light_source {}
    #[doc = include_str!("../../../book/src/imaging.md")]
    mod imaging {}
    #[doc = include_str!("../../../book/src/theory.md")]
    mod theory {}
    #[doc = include_str!("../../../book/src/estimators.md")]
    mod estimators {}
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    mod reproducibility {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
