//! Up-and-in barrier payoffs, the short-maturity asymptotic price
//! `P(B,T) · Ψ(S (B/S)^{t/T})` and a Monte Carlo pricer.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analytics::{barrier_crossing_probability, LimitCurve};
use crate::error::{Error, Result};
use crate::mathcore::{StreamingStats, WeightedStats};
use crate::paths::{
    BarrierSpec, Conditioning, McEstimate, ModelParams, Path, SamplerChoice, SamplerKind, TimeGrid,
    AUTO_REJECTION_THRESHOLD, DEGENERATE_WEIGHT_SHARE,
};

/// Nodes used to evaluate a custom payoff on the limit curve.
pub const CURVE_NODES: usize = 10_000;

pub const MIN_MC_PATHS: u64 = 1_000;

/// Path functional evaluated on `(grid, prices)`.
pub type PathFunctional = dyn Fn(&TimeGrid, &[f64]) -> f64 + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PayoffKind {
    European,
    Asian,
    Lookback,
    Custom,
}

impl PayoffKind {
    pub fn label(&self) -> &'static str {
        match self {
            PayoffKind::European => "european",
            PayoffKind::Asian => "asian",
            PayoffKind::Lookback => "lookback",
            PayoffKind::Custom => "custom",
        }
    }
}

impl std::str::FromStr for PayoffKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "european" => Ok(PayoffKind::European),
            "asian" => Ok(PayoffKind::Asian),
            "lookback" => Ok(PayoffKind::Lookback),
            "custom" => Ok(PayoffKind::Custom),
            other => Err(Error::Config(format!("unknown payoff kind `{other}`"))),
        }
    }
}

/// A payoff paid when the barrier has been reached.
///
/// Built-ins: European `(X_T - K)^+`, Asian `(mean X - K)^+` with the
/// trapezoidal rule on the grid, Lookback `(max X - K)^+` over nodes.
#[derive(Clone)]
pub struct Payoff {
    kind: PayoffKind,
    strike: f64,
    custom: Option<Arc<PathFunctional>>,
    lipschitz: Option<f64>,
}

impl fmt::Debug for Payoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Payoff")
            .field("kind", &self.kind)
            .field("strike", &self.strike)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl Payoff {
    pub fn new(kind: PayoffKind, strike: f64) -> Result<Self> {
        if kind == PayoffKind::Custom {
            return Err(Error::Config(
                "use Payoff::custom for custom payoffs".into(),
            ));
        }
        if !(strike.is_finite() && strike >= 0.0) {
            return Err(Error::Domain(format!(
                "strike must be finite and >= 0, got {strike}"
            )));
        }
        Ok(Self {
            kind,
            strike,
            custom: None,
            lipschitz: Some(1.0),
        })
    }

    pub fn european(strike: f64) -> Result<Self> {
        Self::new(PayoffKind::European, strike)
    }

    pub fn asian(strike: f64) -> Result<Self> {
        Self::new(PayoffKind::Asian, strike)
    }

    pub fn lookback(strike: f64) -> Result<Self> {
        Self::new(PayoffKind::Lookback, strike)
    }

    /// A custom functional of the price path. `lipschitz` is its sup-norm
    /// Lipschitz constant; pricing refuses a payoff that does not declare one.
    pub fn custom<F>(f: F, lipschitz: Option<f64>) -> Self
    where
        F: Fn(&TimeGrid, &[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: PayoffKind::Custom,
            strike: 0.0,
            custom: Some(Arc::new(f)),
            lipschitz,
        }
    }

    pub fn kind(&self) -> PayoffKind {
        self.kind
    }

    pub fn strike(&self) -> f64 {
        self.strike
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    fn check_lipschitz(&self) -> Result<()> {
        match self.lipschitz {
            Some(l) if l.is_finite() && l > 0.0 => Ok(()),
            Some(l) => Err(Error::Config(format!(
                "Lipschitz constant must be finite and > 0, got {l}"
            ))),
            None => Err(Error::Config(
                "custom payoff must declare a Lipschitz constant".into(),
            )),
        }
    }

    /// Payoff of a price path sampled on `grid`.
    pub fn evaluate_prices(&self, grid: &TimeGrid, prices: &[f64]) -> f64 {
        let k = self.strike;
        match self.kind {
            PayoffKind::European => (prices[prices.len() - 1] - k).max(0.0),
            PayoffKind::Lookback => {
                (prices.iter().copied().fold(f64::NEG_INFINITY, f64::max) - k).max(0.0)
            }
            PayoffKind::Asian => (trapezoid_mean(prices) - k).max(0.0),
            PayoffKind::Custom => {
                (self
                    .custom
                    .as_ref()
                    .expect("custom payoff has a functional"))(grid, prices)
            }
        }
    }

    /// Payoff of a simulated (log-space) path.
    pub fn evaluate(&self, path: &Path) -> f64 {
        let k = self.strike;
        match self.kind {
            PayoffKind::European => (path.terminal_log().exp() - k).max(0.0),
            PayoffKind::Lookback => (path.max_log().exp() - k).max(0.0),
            _ => {
                let prices: Vec<f64> = path.prices().collect();
                self.evaluate_prices(&path.grid, &prices)
            }
        }
    }
}

fn trapezoid_mean(prices: &[f64]) -> f64 {
    let n = prices.len() - 1;
    if n == 0 {
        return prices[0];
    }
    let inner: f64 = prices[1..n].iter().sum();
    (inner + 0.5 * (prices[0] + prices[n])) / n as f64
}

/// `Ψ` evaluated on the limit curve; closed forms for the built-ins.
pub fn limit_payoff(payoff: &Payoff, curve: &LimitCurve) -> Result<f64> {
    let (s, b, k) = (curve.spot(), curve.barrier(), payoff.strike());
    match payoff.kind() {
        PayoffKind::European | PayoffKind::Lookback => Ok((b - k).max(0.0)),
        PayoffKind::Asian => {
            let mean = if b == s {
                s
            } else {
                s * (b / s - 1.0) / (b / s).ln()
            };
            Ok((mean - k).max(0.0))
        }
        PayoffKind::Custom => {
            payoff.check_lipschitz()?;
            let (grid, prices) = curve_nodes(curve, CURVE_NODES)?;
            Ok(payoff.evaluate_prices(&grid, &prices))
        }
    }
}

/// The limit curve sampled on a uniform grid with `steps` intervals.
pub fn curve_nodes(curve: &LimitCurve, steps: usize) -> Result<(TimeGrid, Vec<f64>)> {
    let grid = TimeGrid::new(curve.maturity(), steps)?;
    let prices = (0..=steps)
        .map(|k| curve.evaluate(grid.time(k)))
        .collect::<Result<Vec<_>>>()?;
    Ok((grid, prices))
}

/// Parameters echoed in a [`PriceQuote`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuoteInputs {
    pub spot: f64,
    pub mu: f64,
    pub sigma: f64,
    pub barrier: f64,
    pub strike: f64,
    pub maturity: f64,
    pub payoff: PayoffKind,
    pub paths: u64,
    pub steps: usize,
    pub seed: u64,
    pub sampler: SamplerChoice,
}

/// Sampler actually used by the Monte Carlo leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McDiagnostics {
    pub sampler: SamplerKind,
    pub degenerate_weights: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceQuote {
    pub asymptotic: f64,
    pub crossing_prob: f64,
    pub limit_payoff: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McEstimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_diagnostics: Option<McDiagnostics>,
    pub inputs: QuoteInputs,
}

/// Monte Carlo configuration for [`quote`]; `paths == 0` skips the MC leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub paths: u64,
    pub steps: usize,
    pub seed: u64,
    pub sampler: SamplerChoice,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            paths: 0,
            steps: 512,
            seed: 0,
            sampler: SamplerChoice::Auto,
        }
    }
}

fn inputs(params: &ModelParams, spec: &BarrierSpec, payoff: &Payoff, mc: &McConfig) -> QuoteInputs {
    QuoteInputs {
        spot: params.spot(),
        mu: params.mu(),
        sigma: params.sigma(),
        barrier: spec.barrier(),
        strike: payoff.strike(),
        maturity: spec.maturity(),
        payoff: payoff.kind(),
        paths: mc.paths,
        steps: mc.steps,
        seed: mc.seed,
        sampler: mc.sampler,
    }
}

fn asymptotic_parts(
    params: &ModelParams,
    spec: &BarrierSpec,
    payoff: &Payoff,
) -> Result<(f64, f64)> {
    spec.require_above(params.spot())?;
    let curve = LimitCurve::new(params.spot(), spec.barrier(), spec.maturity())?;
    let psi = limit_payoff(payoff, &curve)?;
    let p = barrier_crossing_probability(params, spec.barrier(), spec.maturity())?;
    Ok((p, psi))
}

/// `P(B,T) · Ψ(limit curve)` without a Monte Carlo leg.
pub fn asymptotic_price(
    params: &ModelParams,
    spec: &BarrierSpec,
    payoff: &Payoff,
) -> Result<PriceQuote> {
    let (crossing_prob, limit_payoff) = asymptotic_parts(params, spec, payoff)?;
    Ok(PriceQuote {
        asymptotic: crossing_prob * limit_payoff,
        crossing_prob,
        limit_payoff,
        mc: None,
        mc_diagnostics: None,
        inputs: inputs(params, spec, payoff, &McConfig::default()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McPrice {
    pub estimate: McEstimate,
    pub sampler: SamplerKind,
    pub degenerate_weights: bool,
}

/// Monte Carlo estimate of `E[Ψ(X) 1{max X >= B}]`.
///
/// `auto` and `rejection` use plain paths with bridge-corrected crossing
/// (auto switches to tilting when the crossing probability is below
/// [`AUTO_REJECTION_THRESHOLD`]); `tilt` averages weighted payoffs under the
/// drift-tilted law.
pub fn mc_price(
    params: &ModelParams,
    spec: &BarrierSpec,
    payoff: &Payoff,
    grid: TimeGrid,
    seed: u64,
    n: u64,
    sampler: SamplerChoice,
) -> Result<McPrice> {
    if n < MIN_MC_PATHS {
        return Err(Error::Config(format!(
            "mc_price needs at least {MIN_MC_PATHS} paths, got {n}"
        )));
    }
    payoff.check_lipschitz()?;
    let cond = Conditioning::gbm(params, spec, grid, seed)?;
    let kind = match sampler {
        SamplerChoice::Rejection => SamplerKind::Unconditioned,
        SamplerChoice::Tilt => SamplerKind::Tilted,
        SamplerChoice::Auto if cond.crossing_probability() >= AUTO_REJECTION_THRESHOLD => {
            SamplerKind::Unconditioned
        }
        SamplerChoice::Auto => SamplerKind::Tilted,
    };
    let engine = match kind {
        SamplerKind::Tilted => cond.tilted_engine(),
        _ => cond.untilted_engine(),
    };
    let parts = engine.fold_blocks(
        0..n,
        || (StreamingStats::new(), WeightedStats::new()),
        |(values, weights), path| {
            if path.crossed_barrier {
                values.push(path.weight * payoff.evaluate(path));
                weights.push(path.weight, 0.0);
            } else {
                values.push(0.0);
                weights.push(0.0, 0.0);
            }
        },
    );
    let (values, weights) = parts.into_iter().fold(
        (StreamingStats::new(), WeightedStats::new()),
        |(a, b), (c, d)| (a.merge(c), b.merge(d)),
    );
    let acceptance_rate = weights.positive_count() as f64 / n as f64;
    Ok(McPrice {
        estimate: McEstimate {
            mean: values.mean(),
            stderr: values.stderr(),
            n_effective: values.count(),
            acceptance_rate,
        },
        sampler: kind,
        degenerate_weights: kind == SamplerKind::Tilted
            && weights.max_weight_share() > DEGENERATE_WEIGHT_SHARE,
    })
}

/// Asymptotic price plus, when `mc.paths > 0`, the Monte Carlo price.
pub fn quote(
    params: &ModelParams,
    spec: &BarrierSpec,
    payoff: &Payoff,
    mc: &McConfig,
) -> Result<PriceQuote> {
    let (crossing_prob, limit_payoff) = asymptotic_parts(params, spec, payoff)?;
    let (mc_est, diagnostics) = if mc.paths == 0 {
        (None, None)
    } else {
        let grid = TimeGrid::new(spec.maturity(), mc.steps)?;
        let r = mc_price(params, spec, payoff, grid, mc.seed, mc.paths, mc.sampler)?;
        (
            Some(r.estimate),
            Some(McDiagnostics {
                sampler: r.sampler,
                degenerate_weights: r.degenerate_weights,
            }),
        )
    };
    Ok(PriceQuote {
        asymptotic: crossing_prob * limit_payoff,
        crossing_prob,
        limit_payoff,
        mc: mc_est,
        mc_diagnostics: diagnostics,
        inputs: inputs(params, spec, payoff, mc),
    })
}
