//! Closed-form performance metrics of the RF→THz relay link, each reduced to
//! a Fox H-function and evaluated by contour quadrature.

mod modulation;

pub use modulation::ModulationParams;

use thiserror::Error;

use crate::channels::ChannelError;
use crate::egc::EgcError;
use crate::specfun::SpecfunError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{context}: {source}")]
    Specfun {
        context: &'static str,
        #[source]
        source: SpecfunError,
    },
    #[error("degenerate exponents: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Egc(#[from] EgcError),
}

mod asymptotic;
mod model;

pub use asymptotic::{
    diversity_order, diversity_order_of, outage_asymptotic, outage_asymptotic_perturbed,
    DEFAULT_PERTURBATION,
};
pub use model::{
    average_ber, build_ber_spec, build_capacity_spec, build_cdf_spec, build_pdf_spec,
    end_to_end_pdf, ergodic_capacity, outage, AnalyticValue, CompiledMetric, LinkModel,
};

/// One analytic point of a swept curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticCurvePoint {
    pub independent_var: f64,
    pub value: f64,
    pub est_abs_error: f64,
}
