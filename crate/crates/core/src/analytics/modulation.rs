use statrs::function::gamma::gamma_ur;

use super::AnalyticsError;

/// Binary modulation with conditional error probability `Γ(p, qγ) / (2Γ(p))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationParams {
    pub p: f64,
    pub q: f64,
    pub name: String,
}

impl ModulationParams {
    pub fn new(p: f64, q: f64, name: impl Into<String>) -> Result<Self, AnalyticsError> {
        for (field, v) in [("p", p), ("q", q)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(AnalyticsError::InvalidInput(format!(
                    "modulation {field} must be positive, got {v}"
                )));
            }
        }
        Ok(Self {
            p,
            q,
            name: name.into(),
        })
    }

    /// Coherent BPSK.
    pub fn bpsk() -> Self {
        Self::new(0.5, 1.0, "bpsk").unwrap()
    }

    /// Differential BPSK.
    pub fn dbpsk() -> Self {
        Self::new(1.0, 1.0, "dbpsk").unwrap()
    }

    /// Error probability at instantaneous SNR `gamma`.
    pub fn conditional_ber(&self, gamma: f64) -> f64 {
        if gamma <= 0.0 {
            0.5
        } else {
            0.5 * gamma_ur(self.p, self.q * gamma)
        }
    }
}
