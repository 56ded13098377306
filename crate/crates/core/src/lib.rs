//! Performance of a mixed RF/THz fixed-gain relay link: an N-antenna RF hop
//! with equal-gain combining followed by a THz hop with pointing error.
//!
//! * [`specfun`]: complex log-Gamma and Fox H-functions by contour quadrature.
//! * [`channels`]: α-μ fading, pointing error and link budgets.
//! * [`egc`]: the single α-μ approximation of an equal-gain-combined sum.
//! * [`analytics`]: closed-form density, outage, BER, capacity and their
//!   high-SNR asymptotes.
//! * [`montecarlo`]: simulation of the same link, with importance sampling
//!   for deep tails.
//! * [`cli`]: configuration files, curve sweeps and CSV artifacts.

// negated comparisons are used on purpose: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod channels;
pub mod cli;
pub mod egc;
pub mod montecarlo;
pub mod specfun;
