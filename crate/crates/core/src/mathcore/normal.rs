use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{ensure_positive, Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// A finite argument of the standard normal distribution functions.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NormalArg(f64);

impl NormalArg {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(Self(value))
        } else {
            Err(Error::Domain(format!(
                "normal argument must be finite, got {value}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for NormalArg {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

pub fn norm_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF `Φ(x)`.
pub fn norm_cdf(x: NormalArg) -> f64 {
    cdf(x.0)
}

/// Upper tail `Q(x) = 1 - Φ(x)`, evaluated without forming `1 - Φ(x)`.
pub fn norm_sf(x: NormalArg) -> f64 {
    sf(x.0)
}

#[inline]
pub(crate) fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

#[inline]
pub(crate) fn sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

// Below this the direct ratio φ/Q is accurate; above it the continued
// fraction converges to full precision within CF_TERMS terms.
const CF_SWITCH: f64 = 5.0;
const CF_TERMS: usize = 400;

/// `φ(a)/Q(a) - a`, the standardised conditional tail excess `E[Z - a | Z >= a]`.
///
/// For large `a` this is `1/(a + 2/(a + 3/(a + ...)))` (Laplace's continued
/// fraction for the Mills ratio with the leading `a` removed), so neither
/// `Q(a)` nor the cancellation `φ/Q - a` is ever formed.
pub(crate) fn standard_tail_excess(a: f64) -> f64 {
    if a < CF_SWITCH {
        norm_pdf(a) / sf(a) - a
    } else {
        let mut tail = 0.0;
        for k in (2..=CF_TERMS).rev() {
            tail = k as f64 / (a + tail);
        }
        1.0 / (a + tail)
    }
}

/// `E[W_T - r | W_T >= r]` for a standard Brownian motion `W`.
///
/// Equals `√T φ(a)/Q(a) - r` with `a = r/√T`, and behaves like `T/r` as
/// `T -> 0` for fixed `r > 0`.
pub fn norm_tail_mean_excess(r: f64, t: f64) -> Result<f64> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::Domain(format!("r must be finite and >= 0, got {r}")));
    }
    let t = ensure_positive("T", t)?;
    let sd = t.sqrt();
    Ok(sd * standard_tail_excess(r / sd))
}

/// `E[exp(2σ|W_T|)] = 2 e^{2Tσ²} Φ(2σ√T)`.
pub fn exp_abs_normal_moment(sigma: f64, t: f64) -> Result<f64> {
    let sigma = ensure_positive("sigma", sigma)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!("T must be finite and >= 0, got {t}")));
    }
    Ok(2.0 * (2.0 * t * sigma * sigma).exp() * cdf(2.0 * sigma * t.sqrt()))
}

/// `√(2/π)`, the mean of a standard half-normal variable.
pub const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;
