use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum integrand evaluations per call.
pub const EVALUATION_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_bound: f64,
    pub evaluations: usize,
}

// 15-point Kronrod abscissae on [-1, 1] (non-negative half) with the
// weights of the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(centre - dx) + f(centre + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kron * half;
    if !value.is_finite() {
        return Err(Error::Domain(format!(
            "integrand is not finite on [{a}, {b}]"
        )));
    }
    Ok(Segment {
        a,
        b,
        value,
        error: ((kron - gauss) * half).abs(),
    })
}

/// Globally adaptive Gauss–Kronrod (7/15) integration with bisection.
///
/// The interval with the largest error estimate is split until the summed
/// estimate satisfies `err <= max(abs_tol, rel_tol * |value|)`.
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub budget: usize,
}

impl Integrator {
    pub fn absolute(tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: 0.0,
            budget: EVALUATION_BUDGET,
        }
    }

    pub fn relative(rel_tol: f64) -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol,
            budget: EVALUATION_BUDGET,
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<QuadratureResult> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Domain(format!("need finite a < b, got [{a}, {b}]")));
        }
        if !(self.abs_tol >= 0.0
            && self.rel_tol >= 0.0
            && (self.abs_tol > 0.0 || self.rel_tol > 0.0))
        {
            return Err(Error::Domain("tolerance must be positive".into()));
        }
        let first = kronrod(&f, a, b)?;
        let mut evaluations = 15;
        let mut value = first.value;
        let mut error = first.error;
        let mut heap = BinaryHeap::new();
        heap.push(first);
        loop {
            let target = self.abs_tol.max(self.rel_tol * value.abs());
            if error <= target {
                // Re-sum to shed the drift of incremental updates.
                let (v, e) = heap
                    .iter()
                    .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
                return Ok(QuadratureResult {
                    value: v,
                    abs_error_bound: e,
                    evaluations,
                });
            }
            if evaluations + 30 > self.budget {
                return Err(Error::BudgetExceeded {
                    estimate: value,
                    abs_error_bound: error,
                    evaluations,
                });
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // Interval can no longer be split in floating point.
                return Err(Error::BudgetExceeded {
                    estimate: value,
                    abs_error_bound: error,
                    evaluations,
                });
            }
            let left = kronrod(&f, worst.a, mid)?;
            let right = kronrod(&f, mid, worst.b)?;
            evaluations += 30;
            value += left.value + right.value - worst.value;
            error += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
        }
    }
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult> {
    Integrator::absolute(tol).integrate(f, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathcore::norm_pdf;

    #[test]
    fn constant() {
        let r = integrate(|_| 1.0, 0.0, 1.0, 1e-14).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-14);
        assert!(r.abs_error_bound <= 1e-14);
        assert!(r.evaluations >= 1);
    }

    #[test]
    fn normal_density_normalises() {
        let r = integrate(norm_pdf, -8.0, 8.0, 1e-13).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-12, "{}", r.value);
        assert!(r.abs_error_bound <= 1e-13);
    }

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 1e-12).unwrap();
        assert!((r.value - (10.5 - 9.0)).abs() < 1e-13);
    }

    #[test]
    fn relative_tolerance_on_tiny_integral() {
        let r = Integrator::relative(1e-10)
            .integrate(|x| 1e-200 * (-x * x).exp(), 0.0, 10.0)
            .unwrap();
        let exact = 1e-200 * std::f64::consts::PI.sqrt() / 2.0;
        assert!(((r.value - exact) / exact).abs() < 1e-10);
    }

    #[test]
    fn budget_exceeded_carries_estimate() {
        let integ = Integrator {
            abs_tol: 1e-15,
            rel_tol: 0.0,
            budget: 200,
        };
        match integ.integrate(|x: f64| x.abs().sqrt().recip(), 1e-300, 1.0) {
            Err(Error::BudgetExceeded {
                estimate,
                evaluations,
                ..
            }) => {
                assert!(estimate > 0.0);
                assert!(evaluations <= 200);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn bad_interval() {
        assert!(integrate(|x| x, 1.0, 1.0, 1e-8).is_err());
        assert!(integrate(|x| x, 0.0, f64::INFINITY, 1e-8).is_err());
        assert!(integrate(|x| x, 0.0, 1.0, 0.0).is_err());
    }
}
