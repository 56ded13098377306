//! Equal-gain combining and the single α-μ approximation of an envelope sum.

use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::channels::{AlphaMuParams, ChannelError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EgcError {
    #[error("at least one branch is required")]
    Empty,
    #[error("branch SNR {0} is negative or not finite")]
    InvalidSnr(f64),
    #[error(
        "moment matching did not converge: target ratios ({t1:.6}, {t2:.6}), last iterate alpha = {alpha:.6}, mu = {mu:.6}, residual {residual:.3e}"
    )]
    NoConvergence {
        t1: f64,
        t2: f64,
        alpha: f64,
        mu: f64,
        residual: f64,
    },
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// `(Σ √γᵢ)² / N`.
pub fn egc_combine(branch_snrs: &[f64]) -> Result<f64, EgcError> {
    if branch_snrs.is_empty() {
        return Err(EgcError::Empty);
    }
    let mut s = 0.0;
    for &g in branch_snrs {
        if !(g >= 0.0 && g.is_finite()) {
            return Err(EgcError::InvalidSnr(g));
        }
        s += g.sqrt();
    }
    Ok(s * s / branch_snrs.len() as f64)
}

/// Exact raw moments `E[Zʲ]`, `j = 0..=k`, of `Z = Σ Rᵢ` for independent
/// branches, built one branch at a time by binomial convolution.
pub fn sum_moments_upto(branches: &[AlphaMuParams], k: usize) -> Vec<f64> {
    let mut acc = vec![0.0; k + 1];
    acc[0] = 1.0;
    for b in branches {
        let own: Vec<f64> = (0..=k).map(|j| b.moment(j as f64)).collect();
        let mut next = vec![0.0; k + 1];
        for (j, slot) in next.iter_mut().enumerate() {
            let mut binom = 1.0;
            for l in 0..=j {
                *slot += binom * acc[l] * own[j - l];
                binom *= (j - l) as f64 / (l + 1) as f64;
            }
        }
        acc = next;
    }
    acc
}

/// `E[(Σ Rᵢ)^k]` for independent α-μ branches.
pub fn sum_envelope_moments(branches: &[AlphaMuParams], k: usize) -> f64 {
    sum_moments_upto(branches, k)[k]
}

/// Single α-μ law matched to the moments of order 1, 2 and 4 of an envelope sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgcApproximation {
    pub matched: AlphaMuParams,
    /// Largest relative mismatch over the matched moments.
    pub moment_residual: f64,
    pub n_branches: usize,
}

impl EgcApproximation {
    /// Law of `Z / √N`, whose square times `γ̄` is the combined SNR.
    pub fn normalized(&self) -> AlphaMuParams {
        AlphaMuParams::new(
            self.matched.alpha(),
            self.matched.mu(),
            self.matched.omega() / (self.n_branches as f64).sqrt(),
        )
        .expect("scaled omega stays positive")
    }
}

const MAX_RESIDUAL: f64 = 1e-6;

fn ln_r1(alpha: f64, mu: f64) -> f64 {
    ln_gamma(mu + 2.0 / alpha) + ln_gamma(mu) - 2.0 * ln_gamma(mu + 1.0 / alpha)
}

fn ln_r2(alpha: f64, mu: f64) -> f64 {
    ln_gamma(mu + 4.0 / alpha) + ln_gamma(mu) - 2.0 * ln_gamma(mu + 2.0 / alpha)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * (1.0 + mid.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

const LN_MU_RANGE: (f64, f64) = (-12.0, 16.0);

/// `μ` such that `E[R²]/E[R]² = t1` for the given `α`, if one exists.
fn mu_for_alpha(alpha: f64, ln_t1: f64) -> Option<f64> {
    // the ratio falls monotonically from +∞ (μ → 0) to 1 (μ → ∞)
    let g = |lm: f64| ln_r1(alpha, lm.exp()) - ln_t1;
    let (a, b) = LN_MU_RANGE;
    if g(a) < 0.0 || g(b) > 0.0 {
        return None;
    }
    Some(bisect(g, a, b).exp())
}

/// Matches a single α-μ law to `Σ Rᵢ`; a single branch is returned unchanged.
pub fn moment_match_sum(branches: &[AlphaMuParams]) -> Result<EgcApproximation, EgcError> {
    match branches {
        [] => Err(EgcError::Empty),
        [only] => Ok(EgcApproximation {
            matched: *only,
            moment_residual: 0.0,
            n_branches: 1,
        }),
        _ => match_many(branches),
    }
}

fn match_many(branches: &[AlphaMuParams]) -> Result<EgcApproximation, EgcError> {
    let m = sum_moments_upto(branches, 4);
    let ln_t1 = (m[2] / (m[1] * m[1])).ln();
    let ln_t2 = (m[4] / (m[2] * m[2])).ln();
    let residual_of = |alpha: f64| mu_for_alpha(alpha, ln_t1).map(|mu| ln_r2(alpha, mu) - ln_t2);

    // scan ln α for a sign change, starting from the branch mean
    let grid: Vec<f64> = (0..=400)
        .map(|i| (-3.0 + 7.0 * i as f64 / 400.0f64).exp())
        .collect();
    let alpha0 = branches.iter().map(|b| b.alpha()).sum::<f64>() / branches.len() as f64;
    let mut brackets = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &a in &grid {
        let Some(v) = residual_of(a) else {
            prev = None;
            continue;
        };
        if let Some((pa, pv)) = prev {
            if (pv < 0.0) != (v < 0.0) {
                brackets.push((pa, a));
            }
        }
        prev = Some((a, v));
    }
    let fail = |alpha: f64, mu: f64, residual: f64| EgcError::NoConvergence {
        t1: ln_t1.exp(),
        t2: ln_t2.exp(),
        alpha,
        mu,
        residual,
    };
    let &(lo, hi) = brackets
        .iter()
        .min_by(|x, y| {
            let dx = (0.5 * (x.0 + x.1) / alpha0).ln().abs();
            let dy = (0.5 * (y.0 + y.1) / alpha0).ln().abs();
            dx.total_cmp(&dy)
        })
        .ok_or_else(|| fail(alpha0, f64::NAN, f64::INFINITY))?;
    let alpha = bisect(
        |la| residual_of(la.exp()).unwrap_or(f64::NAN),
        lo.ln(),
        hi.ln(),
    )
    .exp();
    let mu = mu_for_alpha(alpha, ln_t1).ok_or_else(|| fail(alpha, f64::NAN, f64::INFINITY))?;
    let omega = (m[1].ln() + mu.ln() / alpha + ln_gamma(mu) - ln_gamma(mu + 1.0 / alpha)).exp();
    let matched = AlphaMuParams::new(alpha, mu, omega)?;
    let residual = [1usize, 2, 4]
        .iter()
        .map(|&k| (matched.moment(k as f64) / m[k] - 1.0).abs())
        .fold(0.0, f64::max);
    if !(residual <= MAX_RESIDUAL) {
        return Err(fail(alpha, mu, residual));
    }
    Ok(EgcApproximation {
        matched,
        moment_residual: residual,
        n_branches: branches.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combine_examples() {
        assert!((egc_combine(&[7.0]).unwrap() - 7.0).abs() < 1e-14);
        assert!((egc_combine(&[2.5; 4]).unwrap() - 10.0).abs() < 1e-12);
        assert!((egc_combine(&[1.0, 4.0]).unwrap() - 4.5).abs() < 1e-12);
        assert!(matches!(egc_combine(&[]), Err(EgcError::Empty)));
        assert!(egc_combine(&[1.0, -1.0]).is_err());
    }

    #[test]
    fn single_branch_fixed_point() {
        let p = AlphaMuParams::new(3.5, 1.2, 1.0).unwrap();
        let m = moment_match_sum(&[p]).unwrap();
        assert_eq!(m.matched, p);
        assert_eq!(m.n_branches, 1);
    }

    #[test]
    fn exponential_sum_is_exact() {
        // a sum of N unit exponentials is Gamma(N): α = 1, μ = N, Ω = N
        let p = AlphaMuParams::new(1.0, 1.0, 1.0).unwrap();
        for n in 2..=6 {
            let m = moment_match_sum(&vec![p; n]).unwrap();
            assert!((m.matched.alpha() - 1.0).abs() < 1e-7, "{m:?}");
            assert!((m.matched.mu() / n as f64 - 1.0).abs() < 1e-6, "{m:?}");
            assert!((m.matched.omega() / n as f64 - 1.0).abs() < 1e-6, "{m:?}");
        }
    }

    #[test]
    fn linearity_of_first_moment() {
        let b = [
            AlphaMuParams::new(2.0, 1.0, 1.0).unwrap(),
            AlphaMuParams::new(1.3, 2.2, 0.7).unwrap(),
        ];
        let s = sum_envelope_moments(&b, 1);
        assert!((s - b[0].moment(1.0) - b[1].moment(1.0)).abs() < 1e-14);
    }

    #[test]
    fn two_rayleigh_second_moment() {
        let r = AlphaMuParams::new(2.0, 1.0, 1.0).unwrap();
        let s = sum_envelope_moments(&[r, r], 2);
        assert!((s - (2.0 + std::f64::consts::FRAC_PI_2)).abs() < 1e-13);
    }
}
