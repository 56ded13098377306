//! Mellin–Barnes forms of the end-to-end SNR statistics.
//!
//! With the matched combined envelope `Y = Z/√N ~ α-μ(α_r, μ_r, Ω_Y)`, the
//! relay SNR `γ = γ_r γ_t / (γ_t + C)` has
//! `F(z) = E[P(μ_r, X (1 + C/γ_t)^{α_r/2})]`, `X = B_r (z/γ̄_rf)^{α_r/2}`.
//! Writing the regularised incomplete Gamma `P` as a Mellin–Barnes integral in
//! `s₁` and the binomial `(1 + C/γ_t)^{-a}` as one in `s₂`, the expectation
//! over the THz hop turns into Gamma factors of `s₂` with argument
//! `y = C μ_t^{2/α_t} / (γ̄_thz Ω_t² S₀²)`. PDF, BER and capacity follow by
//! differentiating or integrating the `z`-dependence `X^{-s₁}` in closed form.
//!
//! The `s₁` line sits at `Re(α_r s₁/2) = -λ` with `λ` just below the
//! diversity order, where the integrand magnitude tracks the size of the
//! result. That pushes the `s₂` line left of the first poles of `Γ(s₂)`;
//! their residues are added by the evaluator.

use std::f64::consts::LN_2;

use statrs::function::gamma::ln_gamma;

use super::{AnalyticsError, ModulationParams};
use crate::channels::{AlphaMuParams, PointingErrorParams};
use crate::egc::{moment_match_sum, EgcApproximation};
use crate::montecarlo::Scenario;
use crate::specfun::{
    fox_h_bivariate, mellin_barnes_line, ContourSpec, FoxHBivariateSpec, GammaTriple, HValue,
    SpecfunError,
};

/// A value with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticValue {
    pub value: f64,
    pub abs_error: f64,
}

/// The scenario reduced to the quantities the closed forms depend on.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkModel {
    pub egc: EgcApproximation,
    /// Law of `Z/√N`; `γ_r = γ̄_rf Y²`.
    pub rf: AlphaMuParams,
    pub thz: AlphaMuParams,
    pub pointing: PointingErrorParams,
    pub avg_snr_rf: f64,
    pub avg_snr_thz: f64,
    pub relay_c: f64,
}

impl LinkModel {
    pub fn from_scenario(scn: &Scenario) -> Result<Self, AnalyticsError> {
        scn.validate()
            .map_err(|e| AnalyticsError::InvalidInput(e.to_string()))?;
        let egc = moment_match_sum(&scn.rf_branches)?;
        Ok(Self {
            rf: egc.normalized(),
            egc,
            thz: scn.thz_fading,
            pointing: scn.pointing,
            avg_snr_rf: scn.avg_snr_rf(),
            avg_snr_thz: scn.avg_snr_thz(),
            relay_c: scn.relay_c(),
        })
    }

    /// `X = B_r (z/γ̄_rf)^{α_r/2}`.
    pub fn x_arg(&self, z: f64) -> f64 {
        self.rf.b_const() * (z / self.avg_snr_rf).powf(0.5 * self.rf.alpha())
    }

    /// `y = C μ_t^{2/α_t} / (γ̄_thz Ω_t² S₀²)`.
    pub fn y_arg(&self) -> f64 {
        let t = &self.thz;
        let s0 = self.pointing.s0();
        self.relay_c * t.mu().powf(2.0 / t.alpha())
            / (self.avg_snr_thz * t.omega() * t.omega() * s0 * s0)
    }

    /// Decay order of the THz hop, `min(α_t μ_t, φ)/2`.
    pub fn thz_order(&self) -> f64 {
        0.5 * (self.thz.alpha() * self.thz.mu()).min(self.pointing.phi())
    }

    /// `min(α_r μ_r, α_t μ_t, φ)/2`.
    pub fn diversity_order(&self) -> f64 {
        (0.5 * self.rf.alpha() * self.rf.mu()).min(self.thz_order())
    }

    fn ln_prefactor(&self) -> f64 {
        (0.5 * self.pointing.phi()).ln() - ln_gamma(self.rf.mu()) - ln_gamma(self.thz.mu())
    }

    /// Line positions `(c₁, c₂)` for the CDF family.
    ///
    /// `λ` sits midway between the diversity order and the integer below it,
    /// or midway between the two integers below when the order is within
    /// `MIN_POLE_GAP` of an integer, so the lines never graze a pole.
    fn abscissas(&self) -> (f64, f64) {
        const MIN_POLE_GAP: f64 = 0.2;
        let div = self.diversity_order();
        let mut k = (div.ceil() - 1.0).max(0.0);
        let mut lambda = 0.5 * (k + div);
        if div - k < MIN_POLE_GAP && k >= 1.0 {
            k -= 1.0;
            lambda = k + 0.5;
        }
        let c1 = -2.0 * lambda / self.rf.alpha();
        let c2 = 0.5 * ((-k - 1.0).max(-self.thz_order()) + -lambda);
        (c1, c2)
    }

    fn s2_blocks(&self) -> (Vec<GammaTriple>, Vec<GammaTriple>, Vec<GammaTriple>) {
        let half_phi = 0.5 * self.pointing.phi();
        (
            vec![
                GammaTriple::y(0.0, 1.0),
                GammaTriple::y(self.thz.mu(), 2.0 / self.thz.alpha()),
                GammaTriple::y(half_phi, 1.0),
            ],
            vec![GammaTriple::y(half_phi + 1.0, 1.0)],
            vec![GammaTriple::new(0.0, 0.5 * self.rf.alpha(), -1.0)],
        )
    }

    fn spec(&self, num_s1: Vec<GammaTriple>, den_s1: Vec<GammaTriple>) -> FoxHBivariateSpec {
        let (num_s2, den_s2, joint) = self.s2_blocks();
        FoxHBivariateSpec::new(num_s1, den_s1, num_s2, den_s2, joint, vec![])
            .expect("link integrands decay in every direction")
    }
}

/// A metric compiled to one bivariate integral and a constant factor.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledMetric {
    pub spec: FoxHBivariateSpec,
    pub x: f64,
    pub y: f64,
    pub abscissa_s1: f64,
    pub abscissa_s2: f64,
    pub scale: f64,
    /// Evaluate the bare line integral instead of the pole-separating H-function.
    pub line_only: bool,
}

impl CompiledMetric {
    pub fn evaluate(&self) -> Result<AnalyticValue, SpecfunError> {
        let contour = ContourSpec::tuned(
            &self.spec,
            self.x,
            self.y,
            self.abscissa_s1,
            self.abscissa_s2,
        )?;
        let h: HValue = if self.line_only {
            mellin_barnes_line(&self.spec, self.x, self.y, &contour)?
        } else {
            fox_h_bivariate(&self.spec, self.x, self.y, &contour)?
        };
        Ok(AnalyticValue {
            value: self.scale * h.value,
            abs_error: self.scale.abs() * h.abs_error,
        })
    }
}

fn x_block_cdf(m: &LinkModel) -> (Vec<GammaTriple>, Vec<GammaTriple>) {
    let ar = m.rf.alpha();
    (
        vec![GammaTriple::x(m.rf.mu(), 1.0), GammaTriple::x(0.0, -1.0)],
        vec![GammaTriple::x(1.0, -1.0), GammaTriple::x(0.0, 0.5 * ar)],
    )
}

/// Outage CDF `P(γ < z)`.
pub fn build_cdf_spec(m: &LinkModel, z: f64) -> CompiledMetric {
    let (num, den) = x_block_cdf(m);
    let (c1, c2) = m.abscissas();
    CompiledMetric {
        spec: m.spec(num, den),
        x: m.x_arg(z),
        y: m.y_arg(),
        abscissa_s1: c1,
        abscissa_s2: c2,
        scale: m.ln_prefactor().exp(),
        line_only: false,
    }
}

/// End-to-end SNR density at `z`.
pub fn build_pdf_spec(m: &LinkModel, z: f64) -> CompiledMetric {
    let ar = m.rf.alpha();
    let (c1, c2) = m.abscissas();
    CompiledMetric {
        spec: m.spec(
            vec![GammaTriple::x(m.rf.mu(), 1.0)],
            vec![GammaTriple::x(0.0, 0.5 * ar)],
        ),
        x: m.x_arg(z),
        y: m.y_arg(),
        abscissa_s1: c1,
        abscissa_s2: c2,
        scale: 0.5 * ar / z * m.ln_prefactor().exp(),
        line_only: false,
    }
}

/// Average BER `E[Γ(p, qγ)] / (2Γ(p))`.
pub fn build_ber_spec(m: &LinkModel, modulation: &ModulationParams) -> CompiledMetric {
    let ar = m.rf.alpha();
    let (mut num, den) = x_block_cdf(m);
    num.push(GammaTriple::x(modulation.p, -0.5 * ar));
    let (c1, c2) = m.abscissas();
    CompiledMetric {
        spec: m.spec(num, den),
        x: m.x_arg(1.0 / modulation.q),
        y: m.y_arg(),
        abscissa_s1: c1,
        abscissa_s2: c2,
        scale: (m.ln_prefactor() - ln_gamma(modulation.p)).exp() * 0.5,
        line_only: false,
    }
}

/// Ergodic capacity `E[log₂(1 + γ)]`, from the Mellin transform of
/// `ln(1 + z)`, which holds on the strip `-1 < Re(α_r s₁/2) < 0`.
pub fn build_capacity_spec(m: &LinkModel) -> CompiledMetric {
    let ar = m.rf.alpha();
    CompiledMetric {
        spec: m.spec(
            vec![
                GammaTriple::x(m.rf.mu(), 1.0),
                GammaTriple::x(0.0, -0.5 * ar),
            ],
            vec![],
        ),
        x: m.x_arg(1.0),
        y: m.y_arg(),
        abscissa_s1: 1.0 / ar,
        abscissa_s2: 0.25,
        scale: -0.5 * ar / LN_2 * m.ln_prefactor().exp(),
        line_only: true,
    }
}

fn eval(c: CompiledMetric, context: &'static str) -> Result<AnalyticValue, AnalyticsError> {
    c.evaluate()
        .map_err(|source| AnalyticsError::Specfun { context, source })
}

/// Largest accepted error estimate relative to the value.
const MAX_REL_ERROR: f64 = 1e-3;

/// Clamps into `[lo, hi]` when the excursion is within the error estimate;
/// rejects values whose error estimate exceeds both `MAX_REL_ERROR` of the
/// value and the absolute `floor`.
fn bounded(
    v: AnalyticValue,
    lo: f64,
    hi: f64,
    floor: f64,
    context: &'static str,
) -> Result<AnalyticValue, AnalyticsError> {
    let slack = v.abs_error + 1e-12 * v.value.abs();
    let imprecise = !(v.abs_error <= (MAX_REL_ERROR * v.value.abs()).max(floor));
    if imprecise || v.value < lo - slack || v.value > hi + slack || !v.value.is_finite() {
        return Err(AnalyticsError::Specfun {
            context,
            source: SpecfunError::Accuracy {
                tail_bound: v.abs_error,
                scale: v.value,
            },
        });
    }
    Ok(AnalyticValue {
        value: v.value.clamp(lo, hi),
        ..v
    })
}

fn check_positive(name: &str, v: f64) -> Result<(), AnalyticsError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(AnalyticsError::InvalidInput(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

pub fn end_to_end_pdf(z: f64, scn: &Scenario) -> Result<AnalyticValue, AnalyticsError> {
    check_positive("z", z)?;
    let m = LinkModel::from_scenario(scn)?;
    let v = eval(build_pdf_spec(&m, z), "end-to-end pdf")?;
    // densities are judged on the dimensionless `z f(z)`
    bounded(v, 0.0, f64::INFINITY, 1e-6 / z, "end-to-end pdf")
}

pub fn outage(gamma_th: f64, scn: &Scenario) -> Result<AnalyticValue, AnalyticsError> {
    check_positive("gamma_th", gamma_th)?;
    let m = LinkModel::from_scenario(scn)?;
    let v = eval(build_cdf_spec(&m, gamma_th), "outage")?;
    bounded(v, 0.0, 1.0, 0.0, "outage")
}

pub fn average_ber(
    modulation: &ModulationParams,
    scn: &Scenario,
) -> Result<AnalyticValue, AnalyticsError> {
    let m = LinkModel::from_scenario(scn)?;
    let v = eval(build_ber_spec(&m, modulation), "average BER")?;
    bounded(v, 0.0, 0.5, 0.0, "average BER")
}

pub fn ergodic_capacity(scn: &Scenario) -> Result<AnalyticValue, AnalyticsError> {
    let m = LinkModel::from_scenario(scn)?;
    let v = eval(build_capacity_spec(&m), "ergodic capacity")?;
    bounded(v, 0.0, f64::INFINITY, 0.0, "ergodic capacity")
}
