//! Verification runs: conditioned-GBM convergence to the limit curve, the
//! Brownian extreme-value bound, hitting-time concentration and the pricing
//! error law. Every run is a pure function of its inputs and seed.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analytics::{barrier_crossing_probability, hitting_tail_conditional, LimitCurve};
use crate::error::{Error, Result};
use crate::mathcore::SQRT_2_OVER_PI;
use crate::paths::{
    derive_seed, sup_distance_log, BarrierSpec, Conditioning, ModelParams, SamplerChoice,
    SamplerKind, TimeGrid,
};
use crate::pricing::{limit_payoff, mc_price, Payoff, MIN_MC_PATHS};
use crate::report::{fit_loglog, fmt_f64, LogLogFit};

pub const CONVERGENCE_CSV_HEADER: &str = "T,estimate,stderr,n_effective,sampler";

/// Minimum per-row target for convergence runs.
pub const MIN_ROW_TARGET: u64 = 1_000;

/// Rows reaching less than this fraction of their target are excluded from fits.
pub const RELIABLE_FRACTION: f64 = 0.1;

/// Smallest ε the Brownian experiment attempts.
pub const MIN_EPSILON: f64 = 0.1;

/// Sampling settings shared by the Monte Carlo experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Accepted paths per row for rejection, draws per row otherwise.
    pub per_row: u64,
    pub steps: usize,
    pub seed: u64,
    pub sampler: SamplerChoice,
}

impl ExperimentConfig {
    pub fn new(per_row: u64, steps: usize, seed: u64) -> Self {
        Self {
            per_row,
            steps,
            seed,
            sampler: SamplerChoice::Auto,
        }
    }

    pub fn with_sampler(mut self, sampler: SamplerChoice) -> Self {
        self.sampler = sampler;
        self
    }

    fn row_seed(&self, t: f64) -> u64 {
        derive_seed(self.seed, t.to_bits())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    #[serde(rename = "T")]
    pub t: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub n_effective: u64,
    pub sampler: SamplerKind,
    /// False when the row fell short of its sample target, had degenerate
    /// weights, or has a non-positive estimate. Such rows are not fitted.
    pub reliable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportStatus {
    Ok,
    /// Estimates do not decrease with T beyond two combined standard errors,
    /// or too few reliable rows remain to fit.
    Inconclusive,
    Degenerate,
}

/// Per-maturity estimates with a least-squares fit of `ln estimate` on `ln T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub fit: Option<LogLogFit>,
    pub status: ReportStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ConvergenceReport {
    /// Sort rows by decreasing T, fit the reliable ones and grade the result.
    pub fn assemble(mut rows: Vec<ConvergenceRow>) -> Self {
        rows.sort_by(|a, b| b.t.total_cmp(&a.t));
        for r in rows.iter_mut() {
            r.reliable &= r.estimate.is_finite() && r.estimate > 0.0;
        }
        let points: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.reliable)
            .map(|r| (r.t, r.estimate))
            .collect();
        let fit = fit_loglog(&points);
        let mut report = Self {
            rows,
            fit,
            status: ReportStatus::Ok,
            note: None,
        };
        if points.len() >= 2 && fit.is_none() {
            report.status = ReportStatus::Inconclusive;
            report.note = Some("fit failed".into());
        } else if !report.decreasing_beyond_noise() {
            report.status = ReportStatus::Inconclusive;
            report.note =
                Some("estimates do not decrease with T beyond 2 combined standard errors".into());
        }
        report
    }

    /// Whether each reliable estimate exceeds the next (smaller T) one by more
    /// than two combined standard errors.
    pub fn decreasing_beyond_noise(&self) -> bool {
        let reliable: Vec<&ConvergenceRow> = self.rows.iter().filter(|r| r.reliable).collect();
        reliable.windows(2).all(|w| {
            let combined = w[0].stderr.hypot(w[1].stderr);
            w[0].estimate - w[1].estimate > 2.0 * combined
        })
    }

    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    pub fn slope_stderr(&self) -> Option<f64> {
        self.fit.and_then(|f| f.slope_stderr)
    }

    /// CSV with header `T,estimate,stderr,n_effective,sampler`, one row per
    /// maturity (unreliable rows included).
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CONVERGENCE_CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_f64(r.t),
                fmt_f64(r.estimate),
                fmt_f64(r.stderr),
                r.n_effective,
                r.sampler
            )?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialise")
}

fn check_maturities(t_list: &[f64]) -> Result<()> {
    match t_list.iter().find(|&&t| !(t > 0.0 && t < 1.0)) {
        Some(t) => Err(Error::Domain(format!(
            "maturities must lie in (0, 1), got {t}"
        ))),
        None => Ok(()),
    }
}

fn check_row_target(per_row: u64) -> Result<()> {
    if per_row < MIN_ROW_TARGET {
        return Err(Error::Config(format!(
            "per-row sample target must be at least {MIN_ROW_TARGET}, got {per_row}"
        )));
    }
    Ok(())
}

/// `E[sup_t |X_t - S (B/S)^{t/T}| | max X >= B]` for each maturity.
pub fn run_gbm_convergence(
    params: &ModelParams,
    barrier: f64,
    t_list: &[f64],
    config: &ExperimentConfig,
) -> Result<ConvergenceReport> {
    check_maturities(t_list)?;
    check_row_target(config.per_row)?;
    let log_barrier = barrier.ln();
    let mut rows = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let spec = BarrierSpec::new(barrier, 0.0, t)?;
        let grid = TimeGrid::new(t, config.steps)?;
        let cond = Conditioning::gbm(params, &spec, grid, config.row_seed(t))?;
        let r = cond.estimate(config.sampler, config.per_row, |p| {
            sup_distance_log(p, log_barrier)
        })?;
        rows.push(ConvergenceRow {
            t,
            estimate: r.estimate.mean,
            stderr: r.estimate.stderr,
            n_effective: r.estimate.n_effective,
            sampler: r.sampler,
            reliable: !r.degenerate_weights
                && r.estimate.n_effective as f64 >= RELIABLE_FRACTION * config.per_row as f64,
        });
    }
    Ok(ConvergenceReport::assemble(rows))
}

/// `|E[Ψ | max X >= B] - Ψ(limit curve)|` for each maturity, with the
/// conditional price taken as `mc_price / P(B,T)`.
pub fn run_pricing_error_law(
    params: &ModelParams,
    spec_template: &BarrierSpec,
    payoff: &Payoff,
    t_list: &[f64],
    config: &ExperimentConfig,
) -> Result<ConvergenceReport> {
    check_maturities(t_list)?;
    if config.per_row < MIN_MC_PATHS {
        return Err(Error::Config(format!(
            "per-row path count must be at least {MIN_MC_PATHS}, got {}",
            config.per_row
        )));
    }
    let mut rows = Vec::with_capacity(t_list.len());
    let mut zero_payoff = false;
    for &t in t_list {
        let spec = spec_template.with_maturity(t)?;
        let curve = LimitCurve::new(params.spot(), spec.barrier(), t)?;
        let psi = limit_payoff(payoff, &curve)?;
        zero_payoff |= psi == 0.0;
        let p = barrier_crossing_probability(params, spec.barrier(), t)?;
        let grid = TimeGrid::new(t, config.steps)?;
        let mc = mc_price(
            params,
            &spec,
            payoff,
            grid,
            config.row_seed(t),
            config.per_row,
            config.sampler,
        )?;
        rows.push(ConvergenceRow {
            t,
            estimate: (mc.estimate.mean / p - psi).abs(),
            stderr: mc.estimate.stderr / p,
            n_effective: mc.estimate.n_effective,
            sampler: mc.sampler,
            reliable: !mc.degenerate_weights
                && mc.estimate.n_effective as f64 >= RELIABLE_FRACTION * config.per_row as f64,
        });
    }
    let mut report = ConvergenceReport::assemble(rows);
    if zero_payoff {
        report.fit = None;
        report.status = ReportStatus::Degenerate;
        report.note = Some("degenerate: zero limit payoff".into());
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub epsilon: f64,
    /// Absent when the row was rejected.
    pub estimate: Option<f64>,
    pub stderr: Option<f64>,
    pub bound: f64,
    pub n_effective: u64,
    pub sampler: Option<SamplerKind>,
    pub passed: bool,
    /// Closed-form probability of the conditioning event.
    pub event_probability: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// `E[|εW_1 - 1| | max_{t<=1} W_t >= 1/ε]` against `ε √(2/π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheckReport {
    pub rows: Vec<BoundRow>,
    /// Every estimated row satisfies `estimate <= bound + 3 stderr`.
    /// Rejected rows do not count against it.
    pub all_pass: bool,
}

impl BoundCheckReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "epsilon,estimate,stderr,bound,n_effective,sampler,passed"
        )?;
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt_f64(r.epsilon),
                opt(r.estimate),
                opt(r.stderr),
                fmt_f64(r.bound),
                r.n_effective,
                r.sampler.map(|s| s.label()).unwrap_or("rejected"),
                r.passed
            )?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

/// Standard Brownian motion on `[0, 1]` conditioned on reaching `1/ε`.
pub fn run_bm_extreme(epsilon_list: &[f64], config: &ExperimentConfig) -> Result<BoundCheckReport> {
    if config.per_row < 10_000 {
        return Err(Error::Config(format!(
            "per-row sample count must be at least 10000, got {}",
            config.per_row
        )));
    }
    let grid = TimeGrid::new(1.0, config.steps)?;
    let mut rows = Vec::with_capacity(epsilon_list.len());
    for &eps in epsilon_list {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::Domain(format!(
                "epsilon must lie in (0, 1], got {eps}"
            )));
        }
        let bound = eps * SQRT_2_OVER_PI;
        let cond = Conditioning::brownian(eps.recip(), grid, config.row_seed(eps))?;
        let event_probability = cond.crossing_probability();
        if eps < MIN_EPSILON {
            rows.push(BoundRow {
                epsilon: eps,
                estimate: None,
                stderr: None,
                bound,
                n_effective: 0,
                sampler: None,
                passed: false,
                event_probability,
                note: Some(format!(
                    "rejected: P(max W >= 1/ε) = {event_probability:e} is beyond the tilted sampler's reach for ε < {MIN_EPSILON}"
                )),
            });
            continue;
        }
        let r = cond.estimate(config.sampler, config.per_row, |p| {
            (eps * p.terminal_log() - 1.0).abs()
        })?;
        let (m, se) = (r.estimate.mean, r.estimate.stderr);
        rows.push(BoundRow {
            epsilon: eps,
            estimate: Some(m),
            stderr: Some(se),
            bound,
            n_effective: r.estimate.n_effective,
            sampler: Some(r.sampler),
            passed: m <= bound + 3.0 * se,
            event_probability,
            note: r
                .degenerate_weights
                .then(|| "degenerate tilting weights".to_string()),
        });
    }
    let all_pass = rows
        .iter()
        .filter(|r| r.estimate.is_some())
        .all(|r| r.passed);
    Ok(BoundCheckReport { rows, all_pass })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HittingRow {
    #[serde(rename = "T")]
    pub t: f64,
    /// `P(τ >= (1 - √T) T | τ <= T)`.
    pub conditional_tail: f64,
}

/// Fit of `1 - tail ≈ C4 T^{-1/2} exp(-C1/√T)` by least squares in
/// `ln((1 - tail) √T)` against `1/√T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub c1: f64,
    pub c4: f64,
    /// `(1 - tail) / (C4 T^{-1/2} exp(-C1/√T))` per row.
    pub ratios: Vec<f64>,
    /// `C1 > 0` and every ratio within a factor 2 of one.
    pub bounded: bool,
}

/// Monte Carlo cross-check of the quadrature value at one maturity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HittingMcCheck {
    #[serde(rename = "T")]
    pub t: f64,
    pub quadrature: f64,
    pub empirical: f64,
    pub stderr: f64,
    /// Grid-resolution allowance `Δt/T`.
    pub allowance: f64,
    pub accepted: u64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingReport {
    pub rows: Vec<HittingRow>,
    /// Tail column nondecreasing as T decreases, to within 1e-8.
    pub monotone: bool,
    pub fit: Option<TailFit>,
    pub mc_check: Option<HittingMcCheck>,
}

impl HittingReport {
    pub fn final_value(&self) -> Option<f64> {
        self.rows.last().map(|r| r.conditional_tail)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "T,conditional_tail")?;
        for r in &self.rows {
            writeln!(out, "{},{}", fmt_f64(r.t), fmt_f64(r.conditional_tail))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

const MONOTONE_TOLERANCE: f64 = 1e-8;

fn fit_tail(rows: &[HittingRow]) -> Option<TailFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.conditional_tail < 1.0)
        .map(|r| {
            (
                r.t.sqrt().recip(),
                ((1.0 - r.conditional_tail) * r.t.sqrt()).ln(),
            )
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let c1 = -sxy / sxx;
    let c4 = (my + c1 * mx).exp();
    let ratios: Vec<f64> = rows
        .iter()
        .map(|r| {
            let s = r.t.sqrt();
            (1.0 - r.conditional_tail) / (c4 / s * (-c1 / s).exp())
        })
        .collect();
    let bounded = c1 > 0.0 && ratios.iter().all(|&q| (0.5..=2.0).contains(&q));
    Some(TailFit {
        c1,
        c4,
        ratios,
        bounded,
    })
}

/// Quadrature of the hitting-time tail on a decreasing maturity grid, with an
/// optional Monte Carlo cross-check at the largest maturity.
pub fn run_hitting_concentration(
    params: &ModelParams,
    barrier: f64,
    t_list: &[f64],
    mc: Option<&ExperimentConfig>,
) -> Result<HittingReport> {
    check_maturities(t_list)?;
    if t_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain(
            "maturities must be listed in decreasing order".into(),
        ));
    }
    let rows = t_list
        .iter()
        .map(|&t| {
            Ok(HittingRow {
                t,
                conditional_tail: hitting_tail_conditional(params, barrier, t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let monotone = rows
        .windows(2)
        .all(|w| w[1].conditional_tail >= w[0].conditional_tail - MONOTONE_TOLERANCE);
    let mc_check = match (mc, rows.first()) {
        (Some(cfg), Some(first)) => Some(hitting_mc_check(params, barrier, first, cfg)?),
        _ => None,
    };
    Ok(HittingReport {
        fit: fit_tail(&rows),
        rows,
        monotone,
        mc_check,
    })
}

fn hitting_mc_check(
    params: &ModelParams,
    barrier: f64,
    row: &HittingRow,
    config: &ExperimentConfig,
) -> Result<HittingMcCheck> {
    check_row_target(config.per_row)?;
    let t = row.t;
    let spec = BarrierSpec::new(barrier, 0.0, t)?;
    let grid = TimeGrid::new(t, config.steps)?;
    let cond = Conditioning::gbm(params, &spec, grid, config.row_seed(t))?;
    let cutoff = (1.0 - t.sqrt()) * t;
    let r = cond.estimate(config.sampler, config.per_row, |p| {
        match p.crossing_time() {
            Some(tau) if tau >= cutoff => 1.0,
            _ => 0.0,
        }
    })?;
    let allowance = grid.dt() / t;
    let (empirical, stderr) = (r.estimate.mean, r.estimate.stderr);
    Ok(HittingMcCheck {
        t,
        quadrature: row.conditional_tail,
        empirical,
        stderr,
        allowance,
        accepted: r.estimate.n_effective,
        passed: (empirical - row.conditional_tail).abs() <= 3.0 * stderr + allowance,
    })
}
