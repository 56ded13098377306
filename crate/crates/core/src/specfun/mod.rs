//! Special-function kernels: complex log-Gamma and Fox H-functions of one
//! and two variables evaluated by Mellin–Barnes contour quadrature.

mod foxh;
mod lgamma;

pub use foxh::{
    fox_h_bivariate, fox_h_univariate, mellin_barnes_line, ContourSpec, FoxHBivariateSpec,
    GammaTriple, HValue,
};
pub use lgamma::{gamma_real, ln_gamma, ln_sin_pi, pole_index, recip_gamma_real};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecfunError {
    #[error("Gamma function pole at z = -{index}")]
    GammaPole { index: u64 },
    #[error("invalid Fox H specification: {0}")]
    InvalidSpec(String),
    #[error("contour does not separate the poles: {0}")]
    NonSeparating(String),
    #[error("invalid contour: {0}")]
    InvalidContour(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("truncation tail {tail_bound:.3e} exceeds tolerance (integrand scale {scale:.3e})")]
    Accuracy { tail_bound: f64, scale: f64 },
    #[error("trapezoid estimates disagree (h: {fine:.6e}, 2h: {coarse:.6e}); integrand is oscillating faster than the grid resolves")]
    Oscillation { fine: f64, coarse: f64 },
    #[error("coincident poles at s = {position}: residue is not simple")]
    Degenerate { position: f64 },
}
