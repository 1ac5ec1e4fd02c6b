use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::paths::ModelParams;

/// Density of the first time a Brownian motion with drift `v`, started at 0,
/// reaches the level `a > 0`.
#[inline]
pub(crate) fn inverse_gaussian_density(t: f64, a: f64, v: f64) -> f64 {
    let gap = a - v * t;
    a / (2.0 * PI * t * t * t).sqrt() * (-gap * gap / (2.0 * t)).exp()
}

/// Density of `τ = inf{t : X_t = B}` for the GBM described by `params`.
///
/// In log space `ln X_t / σ` is a Brownian motion with drift
/// `v = (μ - σ²/2)/σ` that has to travel `a = ln(B/S)/σ`.
pub fn first_passage_density(t: f64, params: &ModelParams, barrier: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!("t must be finite and > 0, got {t}")));
    }
    let (a, v) = passage_coordinates(params, barrier)?;
    Ok(inverse_gaussian_density(t, a, v))
}

/// Lower integration limit for the first-passage density.
///
/// Below `a²/(2·700)` the exponent is under `-700`, so the mass dropped is
/// below `1e-300`.
pub fn passage_integration_floor(params: &ModelParams, barrier: f64) -> Result<f64> {
    let (a, _) = passage_coordinates(params, barrier)?;
    Ok((a * a / 1400.0).max(1e-12))
}

pub(crate) fn passage_coordinates(params: &ModelParams, barrier: f64) -> Result<(f64, f64)> {
    if !(barrier.is_finite() && barrier > params.spot()) {
        return Err(Error::Domain(format!(
            "barrier {barrier} must exceed spot {}",
            params.spot()
        )));
    }
    let sigma = params.sigma();
    Ok((
        (barrier / params.spot()).ln() / sigma,
        params.log_drift() / sigma,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::new(0.0, 0.3, 1.0).unwrap()
    }

    #[test]
    fn vanishes_at_origin() {
        let f = first_passage_density(1e-12, &params(), 1.1).unwrap();
        assert!(f < 1e-300);
        assert!(f >= 0.0);
    }

    #[test]
    fn domain_errors() {
        assert!(first_passage_density(0.0, &params(), 1.1).is_err());
        assert!(first_passage_density(-1.0, &params(), 1.1).is_err());
        assert!(first_passage_density(0.1, &params(), 1.0).is_err());
        assert!(first_passage_density(0.1, &params(), 0.9).is_err());
    }

    #[test]
    fn floor_matches_exponent_cutoff() {
        let a = 1.1f64.ln() / 0.3;
        let floor = passage_integration_floor(&params(), 1.1).unwrap();
        assert!((floor - a * a / 1400.0).abs() < 1e-18);
        let f = first_passage_density(floor, &params(), 1.1).unwrap();
        assert!(f < 1e-290, "{f}");
    }
}
