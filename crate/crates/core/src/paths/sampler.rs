use serde::{Deserialize, Serialize};

use super::engine::{PathEngine, BLOCK_SIZE};
use super::params::{BarrierSpec, LogDynamics, ModelParams, TimeGrid};
use super::path::Path;
use crate::analytics::log_max_exceedance;
use crate::error::{Error, Result};
use crate::mathcore::{StreamingStats, WeightedStats};

/// Rejection sampling is refused below this closed-form crossing probability.
pub const REJECTION_GUARD: f64 = 1e-6;

/// `auto` picks rejection sampling iff the crossing probability is at least this.
pub const AUTO_REJECTION_THRESHOLD: f64 = 1e-3;

/// A tilted estimate is flagged when one weight carries more than this share.
pub const DEGENERATE_WEIGHT_SHARE: f64 = 0.5;

/// Mean, standard error, effective sample count and acceptance rate of a
/// Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_effective: u64,
    pub acceptance_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Unconditioned,
    Rejection,
    #[serde(rename = "tilt")]
    Tilted,
}

impl SamplerKind {
    pub fn label(&self) -> &'static str {
        match self {
            SamplerKind::Unconditioned => "unconditioned",
            SamplerKind::Rejection => "rejection",
            SamplerKind::Tilted => "tilt",
        }
    }
}

impl std::fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerChoice {
    #[default]
    Auto,
    Rejection,
    Tilt,
}

/// An estimate of `E[g | max Y >= level]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalEstimate {
    pub estimate: McEstimate,
    /// Estimate of the conditioning probability from the same run.
    pub event_probability: McEstimate,
    pub sampler: SamplerKind,
    /// Set when a single tilted weight dominates the total.
    pub degenerate_weights: bool,
    pub attempted: u64,
}

/// Accepted paths from the rejection sampler, in stream order.
#[derive(Debug, Clone)]
pub struct RejectionSample {
    pub paths: Vec<Path>,
    pub attempted: u64,
    pub acceptance_rate: f64,
}

/// Every path drawn under the tilted law, crossing or not, with weights.
#[derive(Debug, Clone)]
pub struct TiltedSample {
    pub paths: Vec<Path>,
    /// Kish effective sample size over crossing paths.
    pub effective_sample_size: f64,
    pub degenerate_weights: bool,
}

/// The conditioning event `max_{t<=T} Y_t >= level` for a log process on a grid.
#[derive(Debug, Clone, Copy)]
pub struct Conditioning {
    pub dynamics: LogDynamics,
    pub grid: TimeGrid,
    pub log_level: f64,
    pub master_seed: u64,
}

impl Conditioning {
    /// GBM conditioned on reaching `spec.barrier()` before `spec.maturity()`.
    pub fn gbm(
        params: &ModelParams,
        spec: &BarrierSpec,
        grid: TimeGrid,
        master_seed: u64,
    ) -> Result<Self> {
        spec.require_above(params.spot())?;
        if (grid.maturity() - spec.maturity()).abs() > 1e-12 * spec.maturity() {
            return Err(Error::Domain(format!(
                "grid maturity {} does not match contract maturity {}",
                grid.maturity(),
                spec.maturity()
            )));
        }
        Ok(Self {
            dynamics: params.dynamics(),
            grid,
            log_level: spec.barrier().ln(),
            master_seed,
        })
    }

    /// Standard Brownian motion conditioned on reaching `level > 0`.
    pub fn brownian(level: f64, grid: TimeGrid, master_seed: u64) -> Result<Self> {
        if !(level.is_finite() && level > 0.0) {
            return Err(Error::Domain(format!(
                "level must be finite and > 0, got {level}"
            )));
        }
        Ok(Self {
            dynamics: LogDynamics::standard_brownian(),
            grid,
            log_level: level,
            master_seed,
        })
    }

    pub fn with_seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }

    /// Closed-form probability of the event.
    pub fn crossing_probability(&self) -> f64 {
        log_max_exceedance(
            self.log_level - self.dynamics.start,
            self.dynamics.drift,
            self.dynamics.vol,
            self.grid.maturity(),
        )
    }

    /// Extra drift putting the terminal mean on the barrier.
    pub fn tilt(&self) -> f64 {
        let t = self.grid.maturity();
        (self.log_level - self.dynamics.start - self.dynamics.drift * t) / t
    }

    pub fn resolve(&self, choice: SamplerChoice) -> SamplerKind {
        match choice {
            SamplerChoice::Rejection => SamplerKind::Rejection,
            SamplerChoice::Tilt => SamplerKind::Tilted,
            SamplerChoice::Auto => {
                if self.crossing_probability() >= AUTO_REJECTION_THRESHOLD {
                    SamplerKind::Rejection
                } else {
                    SamplerKind::Tilted
                }
            }
        }
    }

    pub fn untilted_engine(&self) -> PathEngine {
        PathEngine::new(self.dynamics, self.grid, self.log_level, self.master_seed)
    }

    pub fn tilted_engine(&self) -> PathEngine {
        self.untilted_engine().with_tilt(self.tilt())
    }

    /// `size` is the accepted-path target for rejection and the number of
    /// draws for tilting.
    pub fn estimate<G>(&self, choice: SamplerChoice, size: u64, g: G) -> Result<ConditionalEstimate>
    where
        G: Fn(&Path) -> f64 + Sync,
    {
        match self.resolve(choice) {
            SamplerKind::Tilted => self.tilted(size, g),
            _ => self.rejection(size, g),
        }
    }

    fn rejection_rounds<A, I, F, C, M>(
        &self,
        target: u64,
        init: I,
        observe: F,
        count: C,
        mut merge: M,
    ) -> Result<(A, u64)>
    where
        A: Send,
        I: Fn() -> A + Sync,
        F: Fn(&mut A, &Path) + Sync,
        C: Fn(&A) -> u64,
        M: FnMut(A, A) -> A,
    {
        let p = self.crossing_probability();
        if p < REJECTION_GUARD {
            return Err(Error::RareEvent {
                probability: p,
                threshold: REJECTION_GUARD,
            });
        }
        if target == 0 {
            return Err(Error::Config("rejection target must be positive".into()));
        }
        let engine = self.untilted_engine();
        let mut acc = init();
        let mut drawn = 0u64;
        while count(&acc) < target {
            let need = (target - count(&acc)) as f64;
            let round =
                ((need / p * 1.1).ceil() as u64 + BLOCK_SIZE).div_ceil(BLOCK_SIZE) * BLOCK_SIZE;
            let parts = engine.fold_blocks(drawn..drawn + round, &init, |a, path| {
                if path.crossed_barrier {
                    observe(a, path)
                }
            });
            drawn += round;
            acc = parts.into_iter().fold(acc, &mut merge);
        }
        Ok((acc, drawn))
    }

    /// Conditional mean of `g` over accepted paths (every accepted path is
    /// kept, so at least `target` contribute).
    pub fn rejection<G>(&self, target: u64, g: G) -> Result<ConditionalEstimate>
    where
        G: Fn(&Path) -> f64 + Sync,
    {
        let (stats, attempted) = self.rejection_rounds(
            target,
            StreamingStats::new,
            |s, path| s.push(g(path)),
            |s| s.count(),
            StreamingStats::merge,
        )?;
        let accepted = stats.count();
        let rate = accepted as f64 / attempted as f64;
        Ok(ConditionalEstimate {
            estimate: McEstimate {
                mean: stats.mean(),
                stderr: stats.stderr(),
                n_effective: accepted,
                acceptance_rate: rate,
            },
            event_probability: McEstimate {
                mean: rate,
                stderr: (rate * (1.0 - rate) / attempted as f64).sqrt(),
                n_effective: attempted,
                acceptance_rate: rate,
            },
            sampler: SamplerKind::Rejection,
            degenerate_weights: false,
            attempted,
        })
    }

    pub fn rejection_paths(&self, target: u64) -> Result<RejectionSample> {
        let (paths, attempted) = self.rejection_rounds(
            target,
            Vec::new,
            |v: &mut Vec<Path>, path| v.push(path.clone()),
            |v| v.len() as u64,
            |mut a, b| {
                a.extend(b);
                a
            },
        )?;
        let acceptance_rate = paths.len() as f64 / attempted as f64;
        Ok(RejectionSample {
            paths,
            attempted,
            acceptance_rate,
        })
    }

    /// Self-normalised estimate of `E[g | event]` under the tilted law.
    pub fn tilted<G>(&self, n: u64, g: G) -> Result<ConditionalEstimate>
    where
        G: Fn(&Path) -> f64 + Sync,
    {
        if n == 0 {
            return Err(Error::Config("tilted sample size must be positive".into()));
        }
        let parts = self.tilted_engine().fold_blocks(
            0..n,
            || (WeightedStats::new(), StreamingStats::new()),
            |(ws, ps), path| {
                if path.crossed_barrier {
                    ws.push(path.weight, g(path));
                    ps.push(path.weight);
                } else {
                    ws.push(0.0, 0.0);
                    ps.push(0.0);
                }
            },
        );
        let (ws, ps) = parts.into_iter().fold(
            (WeightedStats::new(), StreamingStats::new()),
            |(a, b), (c, d)| (a.merge(c), b.merge(d)),
        );
        if ws.positive_count() == 0 {
            return Err(Error::NoCrossings { attempted: n });
        }
        let rate = ws.positive_count() as f64 / n as f64;
        Ok(ConditionalEstimate {
            estimate: McEstimate {
                mean: ws.mean(),
                stderr: ws.stderr(),
                n_effective: ws.effective_sample_size().floor() as u64,
                acceptance_rate: rate,
            },
            event_probability: McEstimate {
                mean: ps.mean(),
                stderr: ps.stderr(),
                n_effective: n,
                acceptance_rate: rate,
            },
            sampler: SamplerKind::Tilted,
            degenerate_weights: ws.max_weight_share() > DEGENERATE_WEIGHT_SHARE,
            attempted: n,
        })
    }

    pub fn tilted_paths(&self, n: u64) -> Result<TiltedSample> {
        let paths: Vec<Path> = self
            .tilted_engine()
            .fold_blocks(0..n, Vec::new, |v: &mut Vec<Path>, p| v.push(p.clone()))
            .into_iter()
            .flatten()
            .collect();
        let mut ws = WeightedStats::new();
        for p in &paths {
            ws.push(if p.crossed_barrier { p.weight } else { 0.0 }, 0.0);
        }
        Ok(TiltedSample {
            effective_sample_size: ws.effective_sample_size(),
            degenerate_weights: ws.max_weight_share() > DEGENERATE_WEIGHT_SHARE,
            paths,
        })
    }
}

/// Exact draws from the conditional law given a (bridge-corrected) crossing.
pub fn sample_conditioned_rejection(
    params: &ModelParams,
    spec: &BarrierSpec,
    grid: TimeGrid,
    master_seed: u64,
    target_accepted: u64,
) -> Result<RejectionSample> {
    Conditioning::gbm(params, spec, grid, master_seed)?.rejection_paths(target_accepted)
}

/// Weighted draws under the drift-tilted law.
pub fn sample_conditioned_tilted(
    params: &ModelParams,
    spec: &BarrierSpec,
    grid: TimeGrid,
    master_seed: u64,
    n: u64,
) -> Result<TiltedSample> {
    Conditioning::gbm(params, spec, grid, master_seed)?.tilted_paths(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(t: f64, steps: usize) -> (ModelParams, BarrierSpec, TimeGrid) {
        (
            ModelParams::new(0.0, 0.3, 1.0).unwrap(),
            BarrierSpec::new(1.1, 1.0, t).unwrap(),
            TimeGrid::new(t, steps).unwrap(),
        )
    }

    #[test]
    fn rejection_refuses_in_the_money_barrier() {
        let (p, _, g) = setup(0.25, 16);
        let spec = BarrierSpec::new(1.0, 1.0, 0.25).unwrap();
        assert!(sample_conditioned_rejection(&p, &spec, g, 0, 10).is_err());
    }

    #[test]
    fn rejection_guard() {
        let p = ModelParams::new(0.0, 0.3, 1.0).unwrap();
        let spec = BarrierSpec::new(1.5, 1.0, 0.01).unwrap();
        let g = TimeGrid::new(0.01, 16).unwrap();
        let c = Conditioning::gbm(&p, &spec, g, 0).unwrap();
        assert!(c.crossing_probability() < REJECTION_GUARD);
        assert!(matches!(
            c.rejection(10, |_| 0.0),
            Err(Error::RareEvent { .. })
        ));
        assert_eq!(c.resolve(SamplerChoice::Auto), SamplerKind::Tilted);
    }

    #[test]
    fn rejection_emits_only_crossing_unit_weight_paths() {
        let (p, s, g) = setup(0.25, 64);
        let sample = sample_conditioned_rejection(&p, &s, g, 3, 500).unwrap();
        assert!(sample.paths.len() >= 500);
        assert!(sample
            .paths
            .iter()
            .all(|x| x.crossed_barrier && x.weight == 1.0));
        let closed = Conditioning::gbm(&p, &s, g, 0)
            .unwrap()
            .crossing_probability();
        let se = (closed * (1.0 - closed) / sample.attempted as f64).sqrt();
        assert!((sample.acceptance_rate - closed).abs() < 3.0 * se);
    }

    #[test]
    fn zero_tilt_gives_unit_weights() {
        let p = ModelParams::new(0.05, 0.3, 1.0).unwrap();
        let t = 0.25;
        let barrier = (p.log_drift() * t).exp() * 1.0;
        // barrier at exp(cT) > spot requires c > 0
        assert!(barrier > 1.0);
        let spec = BarrierSpec::new(barrier, 1.0, t).unwrap();
        let g = TimeGrid::new(t, 32).unwrap();
        let c = Conditioning::gbm(&p, &spec, g, 0).unwrap();
        assert!(c.tilt().abs() < 1e-12);
        let tilted = c.tilted_paths(200).unwrap();
        let plain = c.untilted_engine();
        for (i, path) in tilted.paths.iter().enumerate() {
            assert!((path.weight - 1.0).abs() < 1e-12);
            let q = plain.path(i as u64);
            for (a, b) in path.log_values.iter().zip(&q.log_values) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tilted_crossing_probability_in_rare_regime() {
        let (p, s, g) = setup(0.01, 128);
        let c = Conditioning::gbm(&p, &s, g, 17).unwrap();
        let est = c.tilted(100_000, |_| 1.0).unwrap();
        let closed = c.crossing_probability();
        let pe = est.event_probability;
        assert!(
            (pe.mean - closed).abs() < 3.0 * pe.stderr,
            "{} ± {} vs {closed}",
            pe.mean,
            pe.stderr
        );
        assert!(!est.degenerate_weights);
        assert!(est.estimate.acceptance_rate > 0.3);
    }

    #[test]
    fn estimate_dispatch() {
        let (p, s, g) = setup(0.25, 16);
        let c = Conditioning::gbm(&p, &s, g, 1).unwrap();
        assert_eq!(c.resolve(SamplerChoice::Auto), SamplerKind::Rejection);
        let r = c
            .estimate(SamplerChoice::Tilt, 2000, |x| x.terminal_log())
            .unwrap();
        assert_eq!(r.sampler, SamplerKind::Tilted);
        let r = c
            .estimate(SamplerChoice::Auto, 2000, |x| x.terminal_log())
            .unwrap();
        assert_eq!(r.sampler, SamplerKind::Rejection);
        assert!(r.estimate.n_effective >= 2000);
    }

    #[test]
    fn sampler_labels_round_trip() {
        for k in [
            SamplerKind::Unconditioned,
            SamplerKind::Rejection,
            SamplerKind::Tilted,
        ] {
            let s = serde_json::to_string(&k).unwrap();
            assert_eq!(s, format!("\"{}\"", k.label()));
            assert_eq!(serde_json::from_str::<SamplerKind>(&s).unwrap(), k);
        }
    }
}
