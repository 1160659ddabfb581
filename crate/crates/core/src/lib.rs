//! Optimal sampling designs for kriging prediction of a trend-shifted
//! complex Ornstein-Uhlenbeck process on `[0, 1]`.
//!
//! The process `Z(t) = m + Y(t)` with `dY = -(lambda - i omega) Y dt + sigma dW`
//! is handled as a two-dimensional real process. Designs are compared by the
//! integrated mean squared prediction error ([`imspe`]) of the best linear
//! unbiased predictor and by the entropy of the observations ([`entropy`]).

pub mod entropy;
pub mod error;
pub mod imspe;
pub mod linalg;
pub mod model;
pub mod nelder_mead;
pub mod optimize;
pub mod ou;
pub mod polar;
pub mod quadrature;
pub mod report;
pub mod simulate;

pub use error::{Error, Result};
pub use linalg::{BlockMat, Mat2};
pub use model::{Design, OuParams};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
