use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};

/// Drift, volatility and spot of `dX = μX dt + σX dW`, `X_0 = S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    mu: f64,
    sigma: f64,
    spot: f64,
}

impl ModelParams {
    pub fn new(mu: f64, sigma: f64, spot: f64) -> Result<Self> {
        Ok(Self {
            mu: ensure_finite("mu", mu)?,
            sigma: ensure_positive("sigma", sigma)?,
            spot: ensure_positive("spot", spot)?,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn spot(&self) -> f64 {
        self.spot
    }

    /// `c = μ - σ²/2`, the drift of `ln X`.
    pub fn log_drift(&self) -> f64 {
        self.mu - 0.5 * self.sigma * self.sigma
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(mu, self.sigma, self.spot)
    }

    pub fn dynamics(&self) -> LogDynamics {
        LogDynamics {
            start: self.spot.ln(),
            drift: self.log_drift(),
            vol: self.sigma,
        }
    }
}

/// Barrier level, strike and maturity of an up-and-in contract.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSpec {
    barrier: f64,
    strike: f64,
    maturity: f64,
}

impl BarrierSpec {
    pub fn new(barrier: f64, strike: f64, maturity: f64) -> Result<Self> {
        let strike = ensure_finite("strike", strike)?;
        if strike < 0.0 {
            return Err(Error::Domain(format!("strike must be >= 0, got {strike}")));
        }
        Ok(Self {
            barrier: ensure_positive("barrier", barrier)?,
            strike,
            maturity: ensure_positive("maturity", maturity)?,
        })
    }

    pub fn barrier(&self) -> f64 {
        self.barrier
    }

    pub fn strike(&self) -> f64 {
        self.strike
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn with_maturity(&self, maturity: f64) -> Result<Self> {
        Self::new(self.barrier, self.strike, maturity)
    }

    /// Conditioning requires an out-of-the-money barrier.
    pub fn require_above(&self, spot: f64) -> Result<()> {
        if self.barrier > spot {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "barrier {} must exceed spot {spot}",
                self.barrier
            )))
        }
    }
}

/// Uniform grid `t_k = k·T/steps`, `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    maturity: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(maturity: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Domain("grid needs at least one step".into()));
        }
        Ok(Self {
            maturity: ensure_positive("maturity", maturity)?,
            steps,
        })
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.maturity / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.maturity
        } else {
            k as f64 * self.dt()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(|k| self.time(k))
    }
}

/// A Brownian motion with drift in log space: `Y_t = start + drift·t + vol·W_t`.
///
/// GBM paths use `start = ln S`, `drift = μ - σ²/2`, `vol = σ`; a standard
/// Brownian motion is `(0, 0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDynamics {
    pub start: f64,
    pub drift: f64,
    pub vol: f64,
}

impl LogDynamics {
    pub fn standard_brownian() -> Self {
        Self {
            start: 0.0,
            drift: 0.0,
            vol: 1.0,
        }
    }
}
