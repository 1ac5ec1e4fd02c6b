//! Number formatting and the log-log least-squares fit shared by reports.

use serde::{Deserialize, Serialize};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Least-squares line `ln y = intercept + slope · ln x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Absent with only two points.
    pub slope_stderr: Option<f64>,
}

/// Fit `ln y` against `ln x`. Needs at least two points with distinct `x`,
/// all coordinates positive.
pub fn fit_loglog(points: &[(f64, f64)]) -> Option<LogLogFit> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return None;
    }
    let n = points.len() as f64;
    let (mx, my) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (mx / n, my / n);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in points {
        let dx = x.ln() - mx;
        sxx += dx * dx;
        sxy += dx * (y.ln() - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = (points.len() > 2).then(|| {
        let ssr: f64 = points
            .iter()
            .map(|&(x, y)| {
                let r = y.ln() - intercept - slope * x.ln();
                r * r
            })
            .sum();
        (ssr / (n - 2.0) / sxx).sqrt()
    });
    Some(LogLogFit {
        slope,
        intercept,
        slope_stderr,
    })
}
