//! Closed-form quantities for the up-crossing event `max_{t<=T} X_t >= B`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::mathcore::{cdf, inverse_gaussian_density, passage_integration_floor, sf, Integrator};
use crate::paths::ModelParams;

/// The deterministic curve `t ↦ S (B/S)^{t/T}` on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitCurve {
    spot: f64,
    barrier: f64,
    maturity: f64,
}

impl LimitCurve {
    pub fn new(spot: f64, barrier: f64, maturity: f64) -> Result<Self> {
        Ok(Self {
            spot: ensure_positive("spot", spot)?,
            barrier: ensure_positive("barrier", barrier)?,
            maturity: ensure_positive("maturity", maturity)?,
        })
    }

    pub fn spot(&self) -> f64 {
        self.spot
    }

    pub fn barrier(&self) -> f64 {
        self.barrier
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t <= self.maturity) {
            return Err(Error::Domain(format!(
                "t = {t} outside [0, {}]",
                self.maturity
            )));
        }
        Ok(if t == self.maturity {
            self.barrier
        } else {
            self.spot * (self.barrier / self.spot).powf(t / self.maturity)
        })
    }
}

pub fn limit_curve_eval(curve: &LimitCurve, t: f64) -> Result<f64> {
    curve.evaluate(t)
}

/// `P(max_{s<=t} (drift·s + vol·W_s) >= gap)` for `gap > 0`.
pub(crate) fn log_max_exceedance(gap: f64, drift: f64, vol: f64, t: f64) -> f64 {
    if gap <= 0.0 {
        return 1.0;
    }
    let s = vol * t.sqrt();
    let direct = sf((gap - drift * t) / s);
    let tail = sf((gap + drift * t) / s);
    let reflected = if tail > 0.0 {
        (2.0 * drift * gap / (vol * vol) + tail.ln()).exp()
    } else {
        0.0
    };
    (direct + reflected).clamp(0.0, 1.0)
}

/// Probability that the GBM reaches `barrier` by time `t` (reflection
/// principle with drift `ν = μ - σ²/2` in log space).
pub fn barrier_crossing_probability(params: &ModelParams, barrier: f64, t: f64) -> Result<f64> {
    let barrier = ensure_positive("barrier", barrier)?;
    let t = ensure_positive("T", t)?;
    let gap = (barrier / params.spot()).ln();
    Ok(log_max_exceedance(
        gap,
        params.log_drift(),
        params.sigma(),
        t,
    ))
}

/// The crossing-probability expression exactly as printed in the source
/// remark: `1 + (B/S)^{-1} Φ((σ²T/2 - ln(B/S))/(σ√T)) - Φ((ln(B/S) - σ²T/2)/(σ√T))`.
///
/// It does not involve `μ`, and its last argument carries `-σ²T/2` where the
/// driftless (μ = 0) reflection formula has `+σ²T/2`. Kept for auditing only.
pub fn barrier_probability_paper_remark(params: &ModelParams, barrier: f64, t: f64) -> Result<f64> {
    let barrier = ensure_positive("barrier", barrier)?;
    let t = ensure_positive("T", t)?;
    let sigma = params.sigma();
    let ratio = barrier / params.spot();
    let b = ratio.ln();
    let s = sigma * t.sqrt();
    let half_var = 0.5 * sigma * sigma * t;
    Ok(1.0 + ratio.recip() * cdf((half_var - b) / s) - cdf((b - half_var) / s))
}

/// Side-by-side comparison of the printed remark formula against the
/// general formula evaluated at `μ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemarkAudit {
    pub remark: f64,
    pub general_zero_drift: f64,
    /// `remark - general_zero_drift`.
    pub deviation: f64,
}

pub fn remark_audit(params: &ModelParams, barrier: f64, t: f64) -> Result<RemarkAudit> {
    let remark = barrier_probability_paper_remark(params, barrier, t)?;
    let driftless = params.with_mu(0.0)?;
    let general_zero_drift = barrier_crossing_probability(&driftless, barrier, t)?;
    Ok(RemarkAudit {
        remark,
        general_zero_drift,
        deviation: remark - general_zero_drift,
    })
}

const HITTING_REL_TOL: f64 = 1e-12;

/// `P(τ >= (1 - √T) T | τ <= T)` by quadrature of the first-passage density.
pub fn hitting_tail_conditional(params: &ModelParams, barrier: f64, t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!("T must lie in (0, 1), got {t}")));
    }
    let floor = passage_integration_floor(params, barrier)?;
    let sigma = params.sigma();
    let a = (barrier / params.spot()).ln() / sigma;
    let v = params.log_drift() / sigma;
    let density = |s: f64| inverse_gaussian_density(s, a, v);
    let underflow = || {
        Error::Underflow(format!(
            "P(τ <= {t}) is below 1e-300; increase T or move the barrier closer to spot"
        ))
    };
    if t <= floor {
        return Err(underflow());
    }
    let integ = Integrator::relative(HITTING_REL_TOL);
    let denom = integ.integrate(density, floor, t)?.value;
    if denom < 1e-300 {
        return Err(underflow());
    }
    let lower = ((1.0 - t.sqrt()) * t).max(floor);
    let numer = integ.integrate(density, lower, t)?.value;
    Ok((numer / denom).clamp(0.0, 1.0))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::mathcore::{first_passage_density, integrate};

    fn p(mu: f64, sigma: f64) -> ModelParams {
        ModelParams::new(mu, sigma, 1.0).unwrap()
    }

    #[test]
    fn curve_endpoints_and_midpoint() {
        let c = LimitCurve::new(1.0, 4.0, 0.5).unwrap();
        assert_eq!(c.evaluate(0.0).unwrap(), 1.0);
        assert_eq!(c.evaluate(0.5).unwrap(), 4.0);
        assert!((c.evaluate(0.25).unwrap() - 2.0).abs() < 1e-15);
        assert!(c.evaluate(-1e-9).is_err());
        assert!(c.evaluate(0.5 + 1e-9).is_err());
    }

    #[test]
    fn curve_is_exponential() {
        let c = LimitCurve::new(1.0, 1.7, 1.0).unwrap();
        for (t1, t2) in [(0.1, 0.2), (0.33, 0.5), (0.0, 0.9), (0.45, 0.55)] {
            let lhs = c.evaluate(t1 + t2).unwrap();
            let rhs = c.evaluate(t1).unwrap() * c.evaluate(t2).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn crossing_probability_reference_values() {
        // mpmath, 40 digits
        let cases = [
            (0.0, 0.25, 0.500_184_878_296_615_8),
            (0.0, 0.1, 0.300_221_717_650_394_9),
            (0.0, 0.01, 0.001_418_652_638_107_972_7),
            (0.05, 0.4, 0.618_692_612_144_425_4),
            (0.05, 0.025, 0.044_739_892_991_245_51),
        ];
        for (mu, t, exact) in cases {
            let got = barrier_crossing_probability(&p(mu, 0.3), 1.1, t).unwrap();
            assert!(
                ((got - exact) / exact).abs() < 1e-13,
                "mu={mu} T={t}: {got} vs {exact}"
            );
        }
    }

    #[test]
    fn crossing_probability_limits() {
        let m = p(0.0, 0.3);
        assert_eq!(barrier_crossing_probability(&m, 1.0, 0.3).unwrap(), 1.0);
        assert_eq!(barrier_crossing_probability(&m, 0.8, 0.3).unwrap(), 1.0);
        assert!(barrier_crossing_probability(&m, 1e6, 0.3).unwrap() < 1e-300);
        assert!(barrier_crossing_probability(&m, 1.1, 0.0).is_err());
        let up = p(0.2, 0.3);
        let mut last = 0.0;
        for t in [0.01, 0.05, 0.1, 0.5, 1.0, 4.0] {
            let v = barrier_crossing_probability(&up, 1.3, t).unwrap();
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn crossing_probability_five_sigma_tail() {
        let sigma = 0.3;
        let t = 0.2;
        let barrier = (5.0 * sigma * f64::sqrt(t)).exp();
        let v = barrier_crossing_probability(&p(0.0, sigma), barrier, t).unwrap();
        assert!(v <= 2.0 * sf(4.99) && v > 1e-7, "{v}");
    }

    #[test]
    fn crossing_probability_scale_invariant() {
        let base = barrier_crossing_probability(&p(0.05, 0.3), 1.1, 0.25).unwrap();
        for k in [0.5, 2.0, 10.0] {
            let m = ModelParams::new(0.05, 0.3, k).unwrap();
            let v = barrier_crossing_probability(&m, 1.1 * k, 0.25).unwrap();
            assert!((v - base).abs() < 1e-12);
        }
    }

    #[test]
    fn density_integrates_to_crossing_probability() {
        let m = p(0.0, 0.3);
        let floor = passage_integration_floor(&m, 1.1).unwrap();
        let r = integrate(
            |t| first_passage_density(t, &m, 1.1).unwrap(),
            floor,
            0.25,
            1e-12,
        )
        .unwrap();
        let closed = barrier_crossing_probability(&m, 1.1, 0.25).unwrap();
        assert!((r.value - closed).abs() < 1e-8);
    }

    #[test]
    fn density_total_mass_is_defective_for_negative_drift() {
        let m = p(0.0, 0.3);
        let floor = passage_integration_floor(&m, 1.1).unwrap();
        // t = u/(1-u) maps [0,1) onto [0,∞)
        let f = |u: f64| {
            let t = floor + u / (1.0 - u);
            first_passage_density(t, &m, 1.1).unwrap() / ((1.0 - u) * (1.0 - u))
        };
        let r = Integrator::absolute(1e-11)
            .integrate(f, 0.0, 1.0 - 1e-9)
            .unwrap();
        assert!(r.value <= 1.0);
        // mass of a defective hitting time is (B/S)^{2ν/σ²} = 1/1.1
        assert!((r.value - 1.0 / 1.1).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn remark_variant() {
        let m = p(0.0, 0.3);
        // at B = S the printed expression is 2Φ(σ√T/2), not 1
        let near = barrier_probability_paper_remark(&m, 1.0 + 1e-12, 0.25).unwrap();
        assert!((near - 1.059_785_288_105_789_5).abs() < 1e-11, "{near}");
        let audit = remark_audit(&m, 1.1, 0.25).unwrap();
        // mpmath: remark 0.549060095366244, general 0.500184878296616
        assert!((audit.remark - 0.549_060_095_366_244_1).abs() < 1e-13);
        assert!((audit.deviation - 0.048_875_217_069_628_26).abs() < 1e-13);
        for t in [1e-3, 1e-5] {
            assert!(barrier_probability_paper_remark(&m, 1.1, t).unwrap() < 1e-10);
            assert!(barrier_crossing_probability(&m, 1.1, t).unwrap() < 1e-10);
        }
    }

    #[test]
    fn hitting_tail_reference_values() {
        // mpmath quadrature of the inverse-Gaussian density, μ = 0.05
        let m = p(0.05, 0.3);
        let cases = [
            (0.1, 0.287_817_845_425_365_5),
            (0.05, 0.312_247_936_019_285_8),
            (0.01, 0.454_683_360_509_927_0),
            (0.005, 0.551_483_619_057_476_1),
        ];
        for (t, exact) in cases {
            let got = hitting_tail_conditional(&m, 1.1, t).unwrap();
            assert!((got - exact).abs() < 1e-9, "T={t}: {got} vs {exact}");
        }
    }

    #[test]
    fn hitting_tail_domain_and_underflow() {
        let m = p(0.05, 0.3);
        assert!(hitting_tail_conditional(&m, 1.1, 1.0).is_err());
        assert!(hitting_tail_conditional(&m, 1.1, 0.0).is_err());
        assert!(hitting_tail_conditional(&m, 1.0, 0.1).is_err());
        assert!(matches!(
            hitting_tail_conditional(&m, 3.0, 1e-4),
            Err(Error::Underflow(_))
        ));
    }
}
