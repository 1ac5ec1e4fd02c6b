//! Browser bindings: conditioned paths against the limit curve, the
//! crossing-probability curve and the asymptotic price quote. Every function
//! returns a JSON string.

use serde_json::json;
use wasm_bindgen::prelude::*;

use extremal::analytics::{
    barrier_crossing_probability, barrier_probability_paper_remark, LimitCurve,
};
use extremal::paths::{
    BarrierSpec, Conditioning, ModelParams, Path, SamplerChoice, SamplerKind, TimeGrid,
};
use extremal::pricing::{asymptotic_price, Payoff, PayoffKind};
use extremal::Result;

/// Upper limit on tilted draws scanned for crossing paths.
const TILT_SCAN: u64 = 200_000;
const MAX_PATHS: usize = 200;

#[allow(clippy::too_many_arguments)]
pub fn conditioned_paths_json(
    spot: f64,
    barrier: f64,
    sigma: f64,
    mu: f64,
    maturity: f64,
    steps: usize,
    count: usize,
    seed: u64,
) -> Result<String> {
    let params = ModelParams::new(mu, sigma, spot)?;
    let spec = BarrierSpec::new(barrier, 0.0, maturity)?;
    let grid = TimeGrid::new(maturity, steps)?;
    let cond = Conditioning::gbm(&params, &spec, grid, seed)?;
    let count = count.clamp(1, MAX_PATHS);
    let sampler = cond.resolve(SamplerChoice::Auto);
    let paths: Vec<Path> = match sampler {
        SamplerKind::Tilted => {
            let engine = cond.tilted_engine();
            (0..TILT_SCAN)
                .map(|i| engine.path(i))
                .filter(|p| p.crossed_barrier)
                .take(count)
                .collect()
        }
        _ => cond
            .rejection_paths(count as u64)?
            .paths
            .into_iter()
            .take(count)
            .collect(),
    };
    let curve = LimitCurve::new(spot, barrier, maturity)?;
    let times: Vec<f64> = grid.times().collect();
    let limit = times
        .iter()
        .map(|&t| curve.evaluate(t))
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({
        "t": times,
        "curve": limit,
        "paths": paths.iter().map(|p| p.prices().collect::<Vec<_>>()).collect::<Vec<_>>(),
        "weights": paths.iter().map(|p| p.weight).collect::<Vec<_>>(),
        "sampler": sampler.label(),
        "crossing_prob": cond.crossing_probability(),
    })
    .to_string())
}

pub fn crossing_curve_json(
    spot: f64,
    barrier: f64,
    sigma: f64,
    mu: f64,
    t_max: f64,
    points: usize,
) -> Result<String> {
    let params = ModelParams::new(mu, sigma, spot)?;
    let points = points.clamp(2, 2_000);
    let grid = TimeGrid::new(t_max, points)?;
    let ts: Vec<f64> = grid.times().skip(1).collect();
    let general = ts
        .iter()
        .map(|&t| barrier_crossing_probability(&params, barrier, t))
        .collect::<Result<Vec<_>>>()?;
    let remark = ts
        .iter()
        .map(|&t| barrier_probability_paper_remark(&params, barrier, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({ "T": ts, "general": general, "remark": remark }).to_string())
}

pub fn price_quote_json(
    spot: f64,
    barrier: f64,
    sigma: f64,
    mu: f64,
    maturity: f64,
    strike: f64,
    payoff: &str,
) -> Result<String> {
    let params = ModelParams::new(mu, sigma, spot)?;
    let spec = BarrierSpec::new(barrier, strike, maturity)?;
    let kind: PayoffKind = payoff.parse()?;
    let q = asymptotic_price(&params, &spec, &Payoff::new(kind, strike)?)?;
    Ok(serde_json::to_string(&q).expect("quote serialises"))
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

/// Conditioned GBM paths (prices) with the limit curve on the same grid.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn conditioned_paths(
    spot: f64,
    barrier: f64,
    sigma: f64,
    mu: f64,
    maturity: f64,
    steps: usize,
    count: usize,
    seed: u64,
) -> std::result::Result<String, JsError> {
    js(conditioned_paths_json(
        spot, barrier, sigma, mu, maturity, steps, count, seed,
    ))
}

/// `P(max X >= B)` over `(0, t_max]`, general formula and printed remark.
#[wasm_bindgen]
pub fn crossing_curve(
    spot: f64,
    barrier: f64,
    sigma: f64,
    mu: f64,
    t_max: f64,
    points: usize,
) -> std::result::Result<String, JsError> {
    js(crossing_curve_json(spot, barrier, sigma, mu, t_max, points))
}

/// Asymptotic up-and-in quote for `european`, `asian` or `lookback`.
#[wasm_bindgen]
pub fn price_quote(
    spot: f64,
    barrier: f64,
    sigma: f64,
    mu: f64,
    maturity: f64,
    strike: f64,
    payoff: &str,
) -> std::result::Result<String, JsError> {
    js(price_quote_json(
        spot, barrier, sigma, mu, maturity, strike, payoff,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_start_at_spot_and_reach_barrier() {
        let v: serde_json::Value = serde_json::from_str(
            &conditioned_paths_json(1.0, 1.1, 0.3, 0.0, 0.1, 64, 5, 1).unwrap(),
        )
        .unwrap();
        let paths = v["paths"].as_array().unwrap();
        assert_eq!(paths.len(), 5);
        assert_eq!(v["sampler"], "rejection");
        assert_eq!(v["curve"][64].as_f64().unwrap(), 1.1);
        for p in paths {
            assert_eq!(p[0].as_f64().unwrap(), 1.0);
        }
    }

    #[test]
    fn rare_regime_uses_tilting() {
        let v: serde_json::Value = serde_json::from_str(
            &conditioned_paths_json(1.0, 1.1, 0.3, 0.0, 0.004, 32, 3, 1).unwrap(),
        )
        .unwrap();
        assert_eq!(v["sampler"], "tilt");
        assert_eq!(v["paths"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn curve_and_quote() {
        let v: serde_json::Value =
            serde_json::from_str(&crossing_curve_json(1.0, 1.1, 0.3, 0.0, 0.25, 10).unwrap())
                .unwrap();
        let g = v["general"].as_array().unwrap();
        assert_eq!(g.len(), 10);
        assert!((g[9].as_f64().unwrap() - 0.500_184_878_296_615_8).abs() < 1e-13);
        let q: serde_json::Value = serde_json::from_str(
            &price_quote_json(1.0, 1.1, 0.3, 0.0, 0.1, 1.0, "lookback").unwrap(),
        )
        .unwrap();
        assert!(q["asymptotic"].as_f64().unwrap() > 0.0);
        assert!(price_quote_json(1.0, 1.1, 0.3, 0.0, 0.1, 1.0, "digital").is_err());
        assert!(price_quote_json(1.0, 0.9, 0.3, 0.0, 0.1, 1.0, "european").is_err());
    }
}
