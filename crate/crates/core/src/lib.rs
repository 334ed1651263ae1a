//! Best approximations and Kolmogorov widths of classes of convolutions
//! with the kernel `H(t) = Σ cos(kt - βπ/2) / cosh(kh)`.
//!
//! The crate computes the extremal function and its maximizer, the exact
//! width values with their validity thresholds, fundamental SK-splines with
//! their piecewise-constant derivative, the correction terms that control
//! the sign of that derivative, and a certificate for the alternating sign
//! pattern at interval midpoints. Brute-force oracles live in [`oracle`].

pub mod dd;
pub mod error;
#[allow(non_snake_case)]
pub mod extremal;
#[allow(non_snake_case)]
pub mod kushpel;
pub mod oracle;
pub mod roots;
pub mod selfcheck;
#[allow(non_snake_case)]
pub mod series_core;
pub mod sk_spline;
pub mod thresholds;
pub mod trig;

pub use error::{Error, Result};
pub use series_core::{KernelParams, SeriesConfig};
