//! High-SNR outage: the leading residues of the outage integral.
//!
//! Three pole families contribute, one per way the link can fail:
//!
//! * the RF hop fades (`Γ(μ_r + s₁)` at `s₁ = -μ_r`): order `α_r μ_r / 2`,
//! * the beam is misaligned (`Γ(φ/2 + s₂)` at `s₂ = -φ/2`): order `φ/2`,
//! * the THz hop fades (`Γ(μ_t + 2s₂/α_t)` at `s₂ = -α_t μ_t/2`): order `α_t μ_t / 2`.
//!
//! The RF-fade term carries `E[(1 + C/γ_t)^{α_r μ_r/2}]`, evaluated as a
//! univariate H-function so that it continues analytically past the point
//! where the moment diverges.

use log::warn;
use statrs::function::gamma::ln_gamma;

use super::model::{AnalyticValue, LinkModel};
use super::AnalyticsError;
use crate::channels::AlphaMuParams;
use crate::montecarlo::Scenario;
use crate::specfun::{fox_h_univariate, gamma_real, ContourSpec, FoxHBivariateSpec, GammaTriple};

/// `min(α_r μ_r, α_t μ_t, φ) / 2` for the scenario's matched RF law.
pub fn diversity_order(scn: &Scenario) -> Result<f64, AnalyticsError> {
    Ok(LinkModel::from_scenario(scn)?.diversity_order())
}

/// `min(a, b, c) / 2` for the three products `α_r μ_r`, `α_t μ_t`, `φ`.
pub fn diversity_order_of(rf_product: f64, thz_product: f64, phi: f64) -> f64 {
    0.5 * rf_product.min(thz_product).min(phi)
}

const POLE_TOL: f64 = 1e-9;

/// Relative shift used by [`outage_asymptotic_perturbed`] callers by default.
pub const DEFAULT_PERTURBATION: f64 = 1e-6;

fn near_pole(arg: f64) -> bool {
    arg <= POLE_TOL && (arg - arg.round()).abs() < POLE_TOL
}

#[derive(Debug, Clone, Copy)]
struct Params {
    ar: f64,
    mur: f64,
    at: f64,
    mut_: f64,
    phi: f64,
    x: f64,
    y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    RfFade,
    Misalignment,
    ThzFade,
}

impl Family {
    fn label(self) -> &'static str {
        match self {
            Family::RfFade => "alpha_r*mu_r",
            Family::Misalignment => "phi",
            Family::ThzFade => "alpha_t*mu_t",
        }
    }
}

impl Params {
    fn order(&self, f: Family) -> f64 {
        match f {
            Family::RfFade => 0.5 * self.ar * self.mur,
            Family::Misalignment => 0.5 * self.phi,
            Family::ThzFade => 0.5 * self.at * self.mut_,
        }
    }

    /// `E[(C/γ_t)^j]` continued to any real `j` away from poles.
    fn inverse_moment(&self, j: f64) -> Result<f64, ()> {
        let g = gamma_real(self.mut_ - 2.0 * j / self.at).map_err(|_| ())?;
        if (self.phi - 2.0 * j).abs() < POLE_TOL {
            return Err(());
        }
        Ok(self.y.powf(j) * g / ln_gamma(self.mut_).exp() * self.phi / (self.phi - 2.0 * j))
    }

    /// `E[(1 + C/γ_t)^λ]`, analytically continued in `λ`.
    fn binomial_moment(&self, lambda: f64) -> Result<AnalyticValue, ()> {
        if (lambda - lambda.round()).abs() < 1e-12 {
            let n = lambda.round() as u32;
            let mut total = 0.0;
            let mut binom = 1.0;
            for j in 0..=n {
                total += binom * self.inverse_moment(j as f64)?;
                binom *= (n - j) as f64 / (j + 1) as f64;
            }
            return Ok(AnalyticValue {
                value: total,
                abs_error: 1e-14 * total.abs(),
            });
        }
        let half_phi = 0.5 * self.phi;
        let spec = FoxHBivariateSpec::univariate(
            vec![
                GammaTriple::x(0.0, 1.0),
                GammaTriple::x(-lambda, -1.0),
                GammaTriple::x(self.mut_, 2.0 / self.at),
                GammaTriple::x(half_phi, 1.0),
            ],
            vec![GammaTriple::x(half_phi + 1.0, 1.0)],
        )
        .map_err(|_| ())?;
        let c = ContourSpec::auto_abscissa_univariate(&spec);
        let contour = ContourSpec::tuned(&spec, self.y, 1.0, c, 0.0).map_err(|_| ())?;
        let h = fox_h_univariate(&spec, self.y, &contour).map_err(|_| ())?;
        let k = half_phi / (gamma_real(-lambda).map_err(|_| ())? * ln_gamma(self.mut_).exp());
        Ok(h.scaled(k)).map(|h| AnalyticValue {
            value: h.value,
            abs_error: h.abs_error,
        })
    }

    fn term(&self, f: Family) -> Result<AnalyticValue, ()> {
        let lg_r = ln_gamma(self.mur);
        let lg_t = ln_gamma(self.mut_);
        match f {
            Family::RfFade => {
                let g = self.binomial_moment(self.order(f))?;
                let k = self.x.powf(self.mur) / (lg_r + self.mur.ln()).exp();
                Ok(AnalyticValue {
                    value: k * g.value,
                    abs_error: k * g.abs_error,
                })
            }
            Family::Misalignment => {
                let a = self.mur - self.phi / self.ar;
                let b = self.mut_ - self.phi / self.at;
                if near_pole(a) || near_pole(b) {
                    return Err(());
                }
                let v = gamma_real(a).map_err(|_| ())? * gamma_real(b).map_err(|_| ())?
                    / (lg_r + lg_t).exp()
                    * self.x.powf(self.phi / self.ar)
                    * self.y.powf(0.5 * self.phi);
                Ok(exact(v))
            }
            Family::ThzFade => {
                let sc = self.at * self.mut_ / self.ar;
                let a = self.mur - sc;
                if near_pole(a) || (self.phi - self.at * self.mut_).abs() < POLE_TOL {
                    return Err(());
                }
                let v = gamma_real(a).map_err(|_| ())? / (lg_r + ln_gamma(self.mut_ + 1.0)).exp()
                    * self.phi
                    / (self.phi - self.at * self.mut_)
                    * self.x.powf(sc)
                    * self.y.powf(0.5 * self.at * self.mut_);
                Ok(exact(v))
            }
        }
    }

    /// Whether the family's residue collides with another pole.
    fn collides(&self, f: Family) -> bool {
        match f {
            Family::RfFade => {
                let l = self.order(f);
                let hits_phi = l >= 0.5 * self.phi - POLE_TOL && near_pole(0.5 * self.phi - l);
                let t = self.mut_ - 2.0 * l / self.at;
                let hits_thz = near_pole(t);
                hits_phi || hits_thz
            }
            Family::Misalignment => {
                near_pole(self.mur - self.phi / self.ar)
                    || near_pole(self.mut_ - self.phi / self.at)
            }
            Family::ThzFade => {
                near_pole(self.mur - self.at * self.mut_ / self.ar)
                    || (self.phi - self.at * self.mut_).abs() < POLE_TOL
            }
        }
    }
}

fn exact(v: f64) -> AnalyticValue {
    AnalyticValue {
        value: v,
        abs_error: 1e-14 * v.abs(),
    }
}

const FAMILIES: [Family; 3] = [Family::RfFade, Family::Misalignment, Family::ThzFade];

fn sum_terms(p: &Params) -> Result<AnalyticValue, AnalyticsError> {
    let lead = FAMILIES
        .iter()
        .map(|&f| p.order(f))
        .fold(f64::INFINITY, f64::min);
    let mut total = AnalyticValue {
        value: 0.0,
        abs_error: 0.0,
    };
    for f in FAMILIES {
        let leading = p.order(f) <= lead + 1e-9;
        if p.collides(f) {
            if leading {
                let others: Vec<String> = FAMILIES
                    .iter()
                    .filter(|&&g| g != f)
                    .map(|g| format!("{}/2 = {}", g.label(), p.order(*g)))
                    .collect();
                return Err(AnalyticsError::Degenerate(format!(
                    "{}/2 = {} collides with another pole ({}); residues are not simple",
                    f.label(),
                    p.order(f),
                    others.join(", ")
                )));
            }
            warn!(
                "skipping subleading {} term of order {}: coincident poles",
                f.label(),
                p.order(f)
            );
            continue;
        }
        let t = p.term(f).map_err(|_| {
            AnalyticsError::Degenerate(format!("{} term could not be evaluated", f.label()))
        })?;
        total.value += t.value;
        total.abs_error += t.abs_error;
    }
    Ok(total)
}

fn params_of(m: &LinkModel, gamma_th: f64) -> Params {
    Params {
        ar: m.rf.alpha(),
        mur: m.rf.mu(),
        at: m.thz.alpha(),
        mut_: m.thz.mu(),
        phi: m.pointing.phi(),
        x: m.x_arg(gamma_th),
        y: m.y_arg(),
    }
}

/// Sum of the leading residue terms of the outage probability at `gamma_th`.
///
/// Fails with [`AnalyticsError::Degenerate`] when a leading term sits on a
/// double pole, e.g. when `α_t μ_t = φ`.
pub fn outage_asymptotic(gamma_th: f64, scn: &Scenario) -> Result<AnalyticValue, AnalyticsError> {
    if !(gamma_th > 0.0) {
        return Err(AnalyticsError::InvalidInput(format!(
            "gamma_th must be positive, got {gamma_th}"
        )));
    }
    let m = LinkModel::from_scenario(scn)?;
    sum_terms(&params_of(&m, gamma_th))
}

/// As [`outage_asymptotic`], but resolves a double pole by scaling `μ_r`
/// (when the RF-fade term is involved) or `μ_t` by `1 + eps`.
pub fn outage_asymptotic_perturbed(
    gamma_th: f64,
    scn: &Scenario,
    eps: f64,
) -> Result<AnalyticValue, AnalyticsError> {
    match outage_asymptotic(gamma_th, scn) {
        Err(AnalyticsError::Degenerate(msg)) => {
            warn!("{msg}; perturbing by {eps}");
            let mut m = LinkModel::from_scenario(scn)?;
            let p = params_of(&m, gamma_th);
            if p.collides(Family::RfFade) {
                m.rf = AlphaMuParams::new(m.rf.alpha(), m.rf.mu() * (1.0 + eps), m.rf.omega())?;
            } else {
                m.thz = AlphaMuParams::new(m.thz.alpha(), m.thz.mu() * (1.0 + eps), m.thz.omega())?;
            }
            sum_terms(&params_of(&m, gamma_th))
        }
        other => other,
    }
}
