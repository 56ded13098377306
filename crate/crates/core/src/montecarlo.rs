//! Monte Carlo simulation of the relay link.
//!
//! Trials are generated in fixed-size chunks; chunk `k` draws from stream `k`
//! of a ChaCha generator keyed by the seed, so results do not depend on the
//! number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::analytics::ModulationParams;
use crate::channels::{
    sample_pointing_gain, AlphaMuParams, AlphaMuSampler, ChannelError, LinkBudget,
    PointingErrorParams,
};
use crate::egc::sum_envelope_moments;

const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonteCarloError {
    #[error("scenario lists {branches} RF branches but n_antennas = {n_antennas}")]
    AntennaMismatch { branches: usize, n_antennas: usize },
    #[error("n_antennas must be >= 1")]
    NoAntennas,
    #[error("trial count must be >= 1")]
    NoTrials,
    #[error("invalid tail-boost factor {0}: must be in (0, 1]")]
    InvalidBoost(f64),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Complete description of one operating point of the link.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub rf_branches: Vec<AlphaMuParams>,
    pub thz_fading: AlphaMuParams,
    pub pointing: PointingErrorParams,
    pub budget: LinkBudget,
    pub n_antennas: usize,
}

impl Scenario {
    pub fn new(
        rf_branches: Vec<AlphaMuParams>,
        thz_fading: AlphaMuParams,
        pointing: PointingErrorParams,
        budget: LinkBudget,
    ) -> Result<Self, MonteCarloError> {
        if rf_branches.is_empty() {
            return Err(MonteCarloError::NoAntennas);
        }
        let n_antennas = rf_branches.len();
        Ok(Self {
            rf_branches,
            thz_fading,
            pointing,
            budget,
            n_antennas,
        })
    }

    pub fn validate(&self) -> Result<(), MonteCarloError> {
        if self.n_antennas == 0 {
            return Err(MonteCarloError::NoAntennas);
        }
        if self.n_antennas != self.rf_branches.len() {
            return Err(MonteCarloError::AntennaMismatch {
                branches: self.rf_branches.len(),
                n_antennas: self.n_antennas,
            });
        }
        Ok(())
    }

    pub fn avg_snr_rf(&self) -> f64 {
        self.budget.avg_snr_rf()
    }

    pub fn avg_snr_thz(&self) -> f64 {
        self.budget.avg_snr_thz()
    }

    pub fn relay_c(&self) -> f64 {
        self.budget.relay_c
    }

    /// `E[γ_r] = γ̄_rf E[(Σ Rᵢ)²] / N`.
    pub fn mean_rf_snr(&self) -> f64 {
        self.avg_snr_rf() * sum_envelope_moments(&self.rf_branches, 2) / self.n_antennas as f64
    }

    /// Semi-blind relay constant `1 + E[γ_r]`.
    pub fn semi_blind_c(&self) -> f64 {
        1.0 + self.mean_rf_snr()
    }

    pub fn with_relay_c(&self, c: f64) -> Result<Self, MonteCarloError> {
        Ok(Self {
            budget: self.budget.with_relay_c(c)?,
            ..self.clone()
        })
    }

    pub fn with_semi_blind_c(&self) -> Result<Self, MonteCarloError> {
        self.with_relay_c(self.semi_blind_c())
    }
}

/// Simulated SNRs; `end_to_end[i] = rf_combined[i]·thz[i]/(thz[i] + C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrSampleBatch {
    pub end_to_end: Vec<f64>,
    pub rf_combined: Vec<f64>,
    pub thz: Vec<f64>,
    pub seed: u64,
}

/// Per-trial sampler with optional exponential tilting of every shape
/// parameter by `beta` (`beta = 1` is the physical law).
struct TrialSampler {
    rf: Vec<(AlphaMuSampler, f64, f64, f64)>,
    thz: (AlphaMuSampler, f64, f64, f64),
    phi: f64,
    phi_q: f64,
    s0: f64,
    beta: f64,
    inv_n: f64,
    avg_rf: f64,
    avg_thz: f64,
    c: f64,
}

struct Trial {
    gamma: f64,
    rf: f64,
    thz: f64,
    weight: f64,
}

impl TrialSampler {
    fn new(scn: &Scenario, beta: f64) -> Self {
        // (sampler, μ, θ = Ω^α/μ, ln Γ(μβ) − ln Γ(μ))
        let part = |p: &AlphaMuParams| {
            (
                AlphaMuSampler::with_shape_factor(p, beta),
                p.mu(),
                1.0 / p.b_const(),
                ln_gamma(p.mu() * beta) - ln_gamma(p.mu()),
            )
        };
        Self {
            rf: scn.rf_branches.iter().map(part).collect(),
            thz: part(&scn.thz_fading),
            phi: scn.pointing.phi(),
            phi_q: scn.pointing.phi() * beta,
            s0: scn.pointing.s0(),
            beta,
            inv_n: 1.0 / scn.n_antennas as f64,
            avg_rf: scn.avg_snr_rf(),
            avg_thz: scn.avg_snr_thz(),
            c: scn.relay_c(),
        }
    }

    #[inline]
    fn draw(&self, rng: &mut ChaCha8Rng) -> Trial {
        let tilted = self.beta != 1.0;
        let mut ln_w = 0.0;
        let mut z = 0.0;
        for (s, mu, theta, lg) in &self.rf {
            let w = s.sample_power(rng);
            if tilted {
                ln_w += lg + mu * (1.0 - self.beta) * (w / theta).ln();
            }
            z += s.envelope_from_power(w);
        }
        let (s, mu, theta, lg) = &self.thz;
        let w = s.sample_power(rng);
        if tilted {
            ln_w += lg + mu * (1.0 - self.beta) * (w / theta).ln();
        }
        let hf = s.envelope_from_power(w);
        let hp = sample_pointing_gain(self.phi_q, self.s0, rng);
        if tilted {
            ln_w += -self.beta.ln() + self.phi * (1.0 - self.beta) * (hp / self.s0).ln();
        }
        let rf = self.avg_rf * z * z * self.inv_n;
        let g = hf * hp;
        let thz = self.avg_thz * g * g;
        Trial {
            gamma: rf * thz / (thz + self.c),
            rf,
            thz,
            weight: if tilted { ln_w.exp() } else { 1.0 },
        }
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn chunks(n: usize) -> impl IndexedParallelIterator<Item = (usize, usize)> {
    let count = n.div_ceil(CHUNK);
    (0..count)
        .into_par_iter()
        .map(move |k| (k, CHUNK.min(n - k * CHUNK)))
}

/// Draws `n` physical trials.
pub fn simulate(scn: &Scenario, n: usize, seed: u64) -> Result<SnrSampleBatch, MonteCarloError> {
    scn.validate()?;
    if n == 0 {
        return Err(MonteCarloError::NoTrials);
    }
    let sampler = TrialSampler::new(scn, 1.0);
    let parts: Vec<Vec<Trial>> = chunks(n)
        .map(|(k, len)| {
            let mut rng = chunk_rng(seed, k);
            (0..len).map(|_| sampler.draw(&mut rng)).collect()
        })
        .collect();
    let mut batch = SnrSampleBatch {
        end_to_end: Vec::with_capacity(n),
        rf_combined: Vec::with_capacity(n),
        thz: Vec::with_capacity(n),
        seed,
    };
    for t in parts.into_iter().flatten() {
        batch.end_to_end.push(t.gamma);
        batch.rf_combined.push(t.rf);
        batch.thz.push(t.thz);
    }
    Ok(batch)
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Empirical outage, BER and capacity of a batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalMetrics {
    pub outage: Estimate,
    pub ber: Estimate,
    pub capacity: Estimate,
}

#[derive(Debug, Default, Clone, Copy)]
struct Moments {
    n: f64,
    s: f64,
    s2: f64,
}

impl Moments {
    #[inline]
    fn push(&mut self, v: f64) {
        self.n += 1.0;
        self.s += v;
        self.s2 += v * v;
    }

    fn merge(mut self, o: Self) -> Self {
        self.n += o.n;
        self.s += o.s;
        self.s2 += o.s2;
        self
    }

    fn estimate(&self) -> Estimate {
        let m = self.s / self.n;
        let var = (self.s2 / self.n - m * m).max(0.0);
        Estimate {
            value: m,
            stderr: (var / self.n).sqrt(),
        }
    }

    /// Probability estimate; zero events report the `1/n` resolution as error.
    fn probability(&self) -> Estimate {
        let e = self.estimate();
        Estimate {
            value: e.value,
            stderr: e.stderr.max(if self.s == 0.0 { 1.0 / self.n } else { 0.0 }),
        }
    }
}

/// Outage fraction, mean conditional BER and mean `log₂(1 + γ)`.
pub fn empirical_metrics(
    batch: &SnrSampleBatch,
    gamma_th: f64,
    modulation: &ModulationParams,
) -> EmpiricalMetrics {
    let mut out = Moments::default();
    let mut ber = Moments::default();
    let mut cap = Moments::default();
    for &g in &batch.end_to_end {
        out.push(if g < gamma_th { 1.0 } else { 0.0 });
        ber.push(modulation.conditional_ber(g));
        cap.push((1.0 + g).log2());
    }
    EmpiricalMetrics {
        outage: out.probability(),
        ber: ber.estimate(),
        capacity: cap.estimate(),
    }
}

/// Importance-sampling policy for rare events.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailBoost {
    /// Physical sampling only.
    Off,
    /// Scale every fading and pointing shape parameter by the given factor.
    Fixed(f64),
    /// Pick the factor from a pilot run when plain sampling sees too few events.
    Auto,
}

const BOOST_CANDIDATES: [f64; 4] = [1.0, 0.5, 0.3, 0.2];
const MIN_EVENTS: f64 = 100.0;
const PLAIN_OUTAGE_FLOOR: f64 = 1e-5;

/// Streaming estimates of outage, BER and capacity without storing samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricEstimates {
    pub outage: Estimate,
    pub ber: Estimate,
    pub capacity: Estimate,
    /// Shape factors used for the outage and BER estimators.
    pub outage_boost: f64,
    pub ber_boost: f64,
    pub trials: usize,
}

#[derive(Debug, Default, Clone, Copy)]
struct Acc {
    out: Moments,
    ber: Moments,
    cap: Moments,
    events: f64,
}

impl Acc {
    fn merge(self, o: Self) -> Self {
        Self {
            out: self.out.merge(o.out),
            ber: self.ber.merge(o.ber),
            cap: self.cap.merge(o.cap),
            events: self.events + o.events,
        }
    }
}

fn run(scn: &Scenario, beta: f64, n: usize, seed: u64, gamma_th: f64, m: &ModulationParams) -> Acc {
    let sampler = TrialSampler::new(scn, beta);
    let parts: Vec<Acc> = chunks(n)
        .map(|(k, len)| {
            let mut rng = chunk_rng(seed, k);
            let mut a = Acc::default();
            for _ in 0..len {
                let t = sampler.draw(&mut rng);
                let hit = t.gamma < gamma_th;
                a.out.push(if hit { t.weight } else { 0.0 });
                a.events += hit as u8 as f64;
                a.ber.push(t.weight * m.conditional_ber(t.gamma));
                a.cap.push(t.weight * (1.0 + t.gamma).log2());
            }
            a
        })
        .collect();
    parts.into_iter().fold(Acc::default(), Acc::merge)
}

fn rel_se(e: Estimate) -> f64 {
    if e.value > 0.0 {
        e.stderr / e.value
    } else {
        f64::INFINITY
    }
}

/// Estimates all metrics from `n` trials, importance sampling the outage and
/// BER estimators when the policy asks for it.
pub fn estimate_metrics(
    scn: &Scenario,
    gamma_th: f64,
    modulation: &ModulationParams,
    n: usize,
    seed: u64,
    boost: TailBoost,
) -> Result<MetricEstimates, MonteCarloError> {
    scn.validate()?;
    if n == 0 {
        return Err(MonteCarloError::NoTrials);
    }
    let (b_out, b_ber) = match boost {
        TailBoost::Off => (1.0, 1.0),
        TailBoost::Fixed(b) => {
            if !(b > 0.0 && b <= 1.0) {
                return Err(MonteCarloError::InvalidBoost(b));
            }
            (b, b)
        }
        TailBoost::Auto => {
            let pilot_n = (n / 10).clamp(CHUNK.min(n), 4 * CHUNK);
            let pilot_seed = seed ^ 0x9e37_79b9_7f4a_7c15;
            let plain = run(scn, 1.0, pilot_n, pilot_seed, gamma_th, modulation);
            let p = plain.out.estimate().value;
            let plain_ok = plain.events >= MIN_EVENTS && p >= PLAIN_OUTAGE_FLOOR;
            let mut best_out = (
                if plain_ok {
                    0.0
                } else {
                    rel_se(plain.out.estimate())
                },
                1.0,
            );
            let mut best_ber = (rel_se(plain.ber.estimate()), 1.0);
            if !plain_ok {
                for &b in &BOOST_CANDIDATES[1..] {
                    let a = run(scn, b, pilot_n, pilot_seed, gamma_th, modulation);
                    let r_out = rel_se(a.out.estimate());
                    if a.events >= 10.0 && r_out < best_out.0 {
                        best_out = (r_out, b);
                    }
                    let r_ber = rel_se(a.ber.estimate());
                    if r_ber < best_ber.0 {
                        best_ber = (r_ber, b);
                    }
                }
            }
            (best_out.1, best_ber.1)
        }
    };
    let plain = run(scn, 1.0, n, seed, gamma_th, modulation);
    let pick = |b: f64| {
        if b == 1.0 {
            plain
        } else {
            run(scn, b, n, seed, gamma_th, modulation)
        }
    };
    let out_acc = pick(b_out);
    let ber_acc = if b_ber == b_out { out_acc } else { pick(b_ber) };
    Ok(MetricEstimates {
        outage: out_acc.out.probability(),
        ber: ber_acc.ber.estimate(),
        capacity: plain.cap.estimate(),
        outage_boost: b_out,
        ber_boost: b_ber,
        trials: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(n: usize, snr: f64) -> Scenario {
        let b = AlphaMuParams::new(1.0, 1.0, 1.0).unwrap();
        let t = AlphaMuParams::new(2.0, 2.6, 1.0).unwrap();
        let pe = PointingErrorParams::new(4.0, 1.0).unwrap();
        let budget = LinkBudget::from_avg_snr(snr, snr, 1.0).unwrap();
        Scenario::new(vec![b; n], t, pe, budget)
            .unwrap()
            .with_semi_blind_c()
            .unwrap()
    }

    #[test]
    fn af_identity_holds_exactly() {
        let scn = scenario(3, 100.0);
        let b = simulate(&scn, 5000, 1).unwrap();
        let c = scn.relay_c();
        for i in 0..b.end_to_end.len() {
            assert_eq!(
                b.end_to_end[i],
                b.rf_combined[i] * b.thz[i] / (b.thz[i] + c)
            );
            assert!(b.end_to_end[i] < b.rf_combined[i]);
        }
    }

    #[test]
    fn semi_blind_constant() {
        // E[(ΣRᵢ)²] = N + N² for unit exponentials
        let scn = scenario(3, 10.0);
        assert!((scn.semi_blind_c() - (1.0 + 10.0 * 12.0 / 3.0)).abs() < 1e-10);
    }

    #[test]
    fn constant_batch_metrics() {
        let m = ModulationParams::bpsk();
        let batch = |g: f64| SnrSampleBatch {
            end_to_end: vec![g; 10],
            rf_combined: vec![g; 10],
            thz: vec![g; 10],
            seed: 0,
        };
        assert_eq!(empirical_metrics(&batch(10.0), 1.0, &m).outage.value, 0.0);
        assert!((empirical_metrics(&batch(3.0), 1.0, &m).capacity.value - 2.0).abs() < 1e-15);
        assert!((empirical_metrics(&batch(0.0), 1.0, &m).ber.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn antenna_count_checked() {
        let mut scn = scenario(2, 10.0);
        scn.n_antennas = 3;
        assert!(matches!(
            simulate(&scn, 10, 0),
            Err(MonteCarloError::AntennaMismatch { .. })
        ));
    }
}
