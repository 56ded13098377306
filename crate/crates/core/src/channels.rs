//! Physical-layer primitives: α-μ fading, THz pointing error and link budgets.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use statrs::function::gamma::{gamma_lr, ln_gamma};
use thiserror::Error;

use crate::specfun::{fox_h_univariate, ContourSpec, FoxHBivariateSpec, GammaTriple, SpecfunError};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("invalid parameter {name} = {value}: must be {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error("beamwidth {w_eq} m and jitter {sigma_s} m give phi = {implied}, not {phi}")]
    InconsistentPointing {
        phi: f64,
        implied: f64,
        sigma_s: f64,
        w_eq: f64,
    },
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
}

fn require(
    name: &'static str,
    value: f64,
    ok: bool,
    constraint: &'static str,
) -> Result<(), ChannelError> {
    if ok {
        Ok(())
    } else {
        Err(ChannelError::InvalidParameter {
            name,
            value,
            constraint,
        })
    }
}

fn positive(name: &'static str, v: f64) -> Result<(), ChannelError> {
    require(name, v, v > 0.0 && v.is_finite(), "positive and finite")
}

/// α-μ fading law: `R^α ~ Gamma(μ, Ω^α/μ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaMuParams {
    alpha: f64,
    mu: f64,
    omega: f64,
}

impl AlphaMuParams {
    pub fn new(alpha: f64, mu: f64, omega: f64) -> Result<Self, ChannelError> {
        positive("alpha", alpha)?;
        positive("mu", mu)?;
        positive("omega", omega)?;
        Ok(Self { alpha, mu, omega })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `μ / Ω^α`.
    pub fn b_const(&self) -> f64 {
        self.mu / self.omega.powf(self.alpha)
    }

    /// `α μ^μ / (Ω^{αμ} Γ(μ))`, the envelope density prefactor.
    pub fn a_const(&self) -> f64 {
        self.ln_a_const().exp()
    }

    fn ln_a_const(&self) -> f64 {
        self.alpha.ln() + self.mu * self.mu.ln()
            - self.alpha * self.mu * self.omega.ln()
            - ln_gamma(self.mu)
    }

    /// `E[R^k] = Ω^k Γ(μ + k/α) / (μ^{k/α} Γ(μ))`, defined for `k > -αμ`.
    pub fn moment(&self, k: f64) -> f64 {
        let t = k / self.alpha;
        (k * self.omega.ln() + ln_gamma(self.mu + t) - t * self.mu.ln() - ln_gamma(self.mu)).exp()
    }

    pub fn envelope_pdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let lr = r.ln();
        (self.ln_a_const() + (self.alpha * self.mu - 1.0) * lr
            - self.b_const() * (self.alpha * lr).exp())
        .exp()
    }

    pub fn envelope_cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        gamma_lr(self.mu, self.b_const() * r.powf(self.alpha))
    }

    /// CDF of `γ = γ̄ R²`.
    pub fn snr_cdf(&self, gamma: f64, avg_snr: f64) -> f64 {
        if gamma <= 0.0 {
            return 0.0;
        }
        self.envelope_cdf((gamma / avg_snr).sqrt())
    }
}

/// Misalignment gain `h_p = S₀ U^{1/φ}` with `U` uniform on (0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointingErrorParams {
    phi: f64,
    s0: f64,
    sigma_s: Option<f64>,
    w_eq: Option<f64>,
}

impl PointingErrorParams {
    pub fn new(phi: f64, s0: f64) -> Result<Self, ChannelError> {
        positive("phi", phi)?;
        positive("s0", s0)?;
        Ok(Self {
            phi,
            s0,
            sigma_s: None,
            w_eq: None,
        })
    }

    /// `φ = w_eq² / (4σ_s²)`.
    pub fn from_jitter(sigma_s: f64, w_eq: f64, s0: f64) -> Result<Self, ChannelError> {
        positive("sigma_s", sigma_s)?;
        positive("w_eq", w_eq)?;
        let mut p = Self::new(w_eq * w_eq / (4.0 * sigma_s * sigma_s), s0)?;
        p.sigma_s = Some(sigma_s);
        p.w_eq = Some(w_eq);
        Ok(p)
    }

    /// Attaches jitter provenance to an explicit `φ`, checking consistency.
    pub fn with_provenance(self, sigma_s: f64, w_eq: f64) -> Result<Self, ChannelError> {
        let implied = Self::from_jitter(sigma_s, w_eq, self.s0)?.phi;
        if ((implied - self.phi) / self.phi).abs() > 1e-9 {
            return Err(ChannelError::InconsistentPointing {
                phi: self.phi,
                implied,
                sigma_s,
                w_eq,
            });
        }
        Ok(Self {
            sigma_s: Some(sigma_s),
            w_eq: Some(w_eq),
            ..self
        })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn sigma_s(&self) -> Option<f64> {
        self.sigma_s
    }

    pub fn w_eq(&self) -> Option<f64> {
        self.w_eq
    }

    /// `E[h_p^k] = S₀^k φ / (φ + k)` for `k > -φ`.
    pub fn moment(&self, k: f64) -> f64 {
        self.s0.powf(k) * self.phi / (self.phi + k)
    }

    pub fn cdf(&self, h: f64) -> f64 {
        if h <= 0.0 {
            0.0
        } else if h >= self.s0 {
            1.0
        } else {
            (h / self.s0).powf(self.phi)
        }
    }
}

/// Linear-scale link quantities; powers in W.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub tx_power: f64,
    /// `|H_r|²`
    pub rf_path_gain: f64,
    /// `|H_t|²`
    pub thz_path_gain: f64,
    pub rf_noise_var: f64,
    pub thz_noise_var: f64,
    /// Fixed-gain relay constant `C`.
    pub relay_c: f64,
}

impl LinkBudget {
    pub fn new(
        tx_power: f64,
        rf_path_gain: f64,
        thz_path_gain: f64,
        rf_noise_var: f64,
        thz_noise_var: f64,
        relay_c: f64,
    ) -> Result<Self, ChannelError> {
        positive("tx_power", tx_power)?;
        positive("rf_path_gain", rf_path_gain)?;
        positive("thz_path_gain", thz_path_gain)?;
        positive("rf_noise_var", rf_noise_var)?;
        positive("thz_noise_var", thz_noise_var)?;
        positive("relay_c", relay_c)?;
        Ok(Self {
            tx_power,
            rf_path_gain,
            thz_path_gain,
            rf_noise_var,
            thz_noise_var,
            relay_c,
        })
    }

    /// Budget that realises the given average SNRs with unit power and gains.
    pub fn from_avg_snr(
        avg_snr_rf: f64,
        avg_snr_thz: f64,
        relay_c: f64,
    ) -> Result<Self, ChannelError> {
        positive("avg_snr_rf", avg_snr_rf)?;
        positive("avg_snr_thz", avg_snr_thz)?;
        Self::new(1.0, 1.0, 1.0, 1.0 / avg_snr_rf, 1.0 / avg_snr_thz, relay_c)
    }

    pub fn avg_snr_rf(&self) -> f64 {
        self.tx_power * self.rf_path_gain / self.rf_noise_var
    }

    pub fn avg_snr_thz(&self) -> f64 {
        self.tx_power * self.thz_path_gain / self.thz_noise_var
    }

    pub fn with_relay_c(self, relay_c: f64) -> Result<Self, ChannelError> {
        positive("relay_c", relay_c)?;
        Ok(Self { relay_c, ..self })
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Thermal noise power in W: −174 dBm/Hz + 10 log₁₀(B) + NF.
pub fn noise_variance(bandwidth_hz: f64, noise_figure_db: f64) -> Result<f64, ChannelError> {
    positive("bandwidth_hz", bandwidth_hz)?;
    require(
        "noise_figure_db",
        noise_figure_db,
        noise_figure_db.is_finite(),
        "finite",
    )?;
    Ok(dbm_to_watts(
        -174.0 + 10.0 * bandwidth_hz.log10() + noise_figure_db,
    ))
}

/// Urban-micro path loss `32.4 + 17.3 log₁₀ d + 20 log₁₀(f / 1 GHz)` in dB.
pub fn path_loss_rf_db(distance_m: f64, freq_hz: f64) -> Result<f64, ChannelError> {
    require(
        "distance_m",
        distance_m,
        (1.0..=1e4).contains(&distance_m),
        "within [1, 10000] m",
    )?;
    positive("freq_hz", freq_hz)?;
    Ok(32.4 + 17.3 * distance_m.log10() + 20.0 * (freq_hz * 1e-9).log10())
}

/// RF power gain in dB: antenna gains minus path loss.
pub fn path_gain_rf(
    distance_m: f64,
    freq_hz: f64,
    antenna_gain_db: f64,
) -> Result<f64, ChannelError> {
    Ok(antenna_gain_db - path_loss_rf_db(distance_m, freq_hz)?)
}

/// THz amplitude gain `c G / (4π f d) · exp(-k d / 2)`.
pub fn path_gain_thz(
    distance_m: f64,
    freq_hz: f64,
    antenna_gain: f64,
    absorption: f64,
) -> Result<f64, ChannelError> {
    positive("distance_m", distance_m)?;
    positive("freq_hz", freq_hz)?;
    positive("antenna_gain", antenna_gain)?;
    require(
        "absorption",
        absorption,
        absorption >= 0.0 && absorption.is_finite(),
        "nonnegative",
    )?;
    Ok(
        SPEED_OF_LIGHT * antenna_gain / (4.0 * std::f64::consts::PI * freq_hz * distance_m)
            * (-0.5 * absorption * distance_m).exp(),
    )
}

/// Envelope samples of an α-μ law.
pub fn sample_alpha_mu<R: Rng + ?Sized>(params: &AlphaMuParams, n: usize, rng: &mut R) -> Vec<f64> {
    let sampler = AlphaMuSampler::new(params);
    (0..n).map(|_| sampler.sample(rng)).collect()
}

/// Reusable sampler for one α-μ law.
#[derive(Debug, Clone, Copy)]
pub struct AlphaMuSampler {
    gamma: Gamma<f64>,
    inv_alpha: f64,
}

impl AlphaMuSampler {
    pub fn new(params: &AlphaMuParams) -> Self {
        let scale = 1.0 / params.b_const();
        Self {
            gamma: Gamma::new(params.mu, scale).expect("validated alpha-mu parameters"),
            inv_alpha: 1.0 / params.alpha,
        }
    }

    /// Sampler of `R^α` with the shape multiplied by `beta`; used as an
    /// importance-sampling proposal.
    pub fn with_shape_factor(params: &AlphaMuParams, beta: f64) -> Self {
        let scale = 1.0 / params.b_const();
        Self {
            gamma: Gamma::new(params.mu * beta, scale).expect("positive shape"),
            inv_alpha: 1.0 / params.alpha,
        }
    }

    /// Draws `R^α`.
    #[inline]
    pub fn sample_power<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.gamma.sample(rng)
    }

    /// `R` from a draw of `R^α`.
    #[inline]
    pub fn envelope_from_power(&self, w: f64) -> f64 {
        w.powf(self.inv_alpha)
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.envelope_from_power(self.sample_power(rng))
    }
}

/// Pointing gain samples in (0, S₀].
pub fn sample_pointing_error<R: Rng + ?Sized>(
    params: &PointingErrorParams,
    n: usize,
    rng: &mut R,
) -> Vec<f64> {
    (0..n)
        .map(|_| sample_pointing_gain(params.phi, params.s0, rng))
        .collect()
}

#[inline]
pub(crate) fn sample_pointing_gain<R: Rng + ?Sized>(phi: f64, s0: f64, rng: &mut R) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    s0 * u.powf(1.0 / phi)
}

/// Density of `γ = γ̄ R²` for an α-μ envelope `R`.
pub fn snr_pdf_rf(gamma: f64, params: &AlphaMuParams, avg_snr: f64) -> f64 {
    if gamma <= 0.0 {
        return 0.0;
    }
    let r = (gamma / avg_snr).sqrt();
    params.envelope_pdf(r) / (2.0 * (gamma * avg_snr).sqrt())
}

/// Mellin–Barnes kernel of the THz SNR density.
///
/// With `u = x μ^{2/α} / (γ̄ Ω² S₀²)` the density is
/// `(φ/2) / (x Γ(μ)) · H(u)` where `H` has numerator factors
/// `Γ(μ + 2s/α)`, `Γ(φ/2 + s)` and denominator `Γ(φ/2 + 1 + s)`.
pub fn thz_snr_spec(params: &AlphaMuParams, pe: &PointingErrorParams) -> FoxHBivariateSpec {
    FoxHBivariateSpec::univariate(
        vec![
            GammaTriple::x(params.mu, 2.0 / params.alpha),
            GammaTriple::x(0.5 * pe.phi, 1.0),
        ],
        vec![GammaTriple::x(0.5 * pe.phi + 1.0, 1.0)],
    )
    .expect("THz kernel decays at rate π/α")
}

/// Argument `u` of the THz SNR kernel.
pub fn thz_kernel_argument(
    x: f64,
    params: &AlphaMuParams,
    pe: &PointingErrorParams,
    avg_snr: f64,
) -> f64 {
    x * params.mu.powf(2.0 / params.alpha) / (avg_snr * params.omega * params.omega * pe.s0 * pe.s0)
}

/// Density of `γ_t = γ̄ (h_f h_p)²` with α-μ `h_f` and pointing gain `h_p`.
pub fn snr_pdf_thz(
    x: f64,
    params: &AlphaMuParams,
    pe: &PointingErrorParams,
    avg_snr: f64,
) -> Result<f64, ChannelError> {
    positive("x", x)?;
    positive("avg_snr", avg_snr)?;
    let spec = thz_snr_spec(params, pe);
    let u = thz_kernel_argument(x, params, pe, avg_snr);
    let left = (-0.5 * params.alpha * params.mu).max(-0.5 * pe.phi);
    let c = ContourSpec::saddle_abscissa_univariate(&spec, u, left, f64::INFINITY)?;
    let contour = ContourSpec::tuned(&spec, u, 1.0, c, 0.0)?;
    let h = fox_h_univariate(&spec, u, &contour)?;
    Ok(0.5 * pe.phi / (x * ln_gamma(params.mu).exp()) * h.value)
}

/// CDF of the THz SNR by conditioning on the pointing gain:
/// `P(γ_t < x) = ∫ F_R(√(x/γ̄)/h) dF_h`, evaluated by Gauss–Legendre
/// quadrature in `v = (h/S₀)^φ`.
pub fn snr_cdf_thz(x: f64, params: &AlphaMuParams, pe: &PointingErrorParams, avg_snr: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let r = (x / avg_snr).sqrt();
    gauss_legendre_unit(|v| {
        let h = pe.s0 * v.powf(1.0 / pe.phi);
        params.envelope_cdf(r / h)
    })
}

// composite 20-point Gauss–Legendre on (0, 1), graded towards 0
fn gauss_legendre_unit(f: impl Fn(f64) -> f64) -> f64 {
    const NODES: [f64; 10] = [
        0.076_526_521_133_497_33,
        0.227_785_851_141_645_08,
        0.373_706_088_715_419_56,
        0.510_867_001_950_827_1,
        0.636_053_680_726_515,
        0.746_331_906_460_150_8,
        0.839_116_971_822_218_8,
        0.912_234_428_251_326,
        0.963_971_927_277_913_8,
        0.993_128_599_185_094_9,
    ];
    const WEIGHTS: [f64; 10] = [
        0.152_753_387_130_725_85,
        0.149_172_986_472_603_75,
        0.142_096_109_318_382_05,
        0.131_688_638_449_176_63,
        0.118_194_531_961_518_42,
        0.101_930_119_817_240_44,
        0.083_276_741_576_704_75,
        0.062_672_048_334_109_06,
        0.040_601_429_800_386_94,
        0.017_614_007_139_152_12,
    ];
    let mut edges = vec![0.0];
    let mut e = 1e-12;
    while e < 1.0 {
        edges.push(e);
        e *= 4.0;
    }
    edges.push(1.0);
    let mut total = 0.0;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let m = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        for (x, wt) in NODES.iter().zip(WEIGHTS) {
            total += wt * r * (f(m - r * x) + f(m + r * x));
        }
    }
    total
}
