use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;

use super::params::{BarrierSpec, LogDynamics, ModelParams, TimeGrid};
use super::rng::RngStream;
use crate::error::{Error, Result};
use crate::report::fmt_f64;

/// A discretised trajectory stored as log values on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub grid: TimeGrid,
    pub log_values: Vec<f64>,
    pub crossed_barrier: bool,
    /// Likelihood ratio against the untilted law; exactly 1 unless the path
    /// came from the tilted sampler.
    pub weight: f64,
    /// Grid index closing the interval in which the barrier was first
    /// reached (by a node or by a bridge draw).
    pub crossing_step: Option<usize>,
    /// Diffusion coefficient of the log process, needed for bridge draws.
    pub vol: f64,
}

impl Path {
    pub fn new(grid: TimeGrid, vol: f64) -> Self {
        Self {
            grid,
            log_values: vec![0.0; grid.steps() + 1],
            crossed_barrier: false,
            weight: 1.0,
            crossing_step: None,
            vol,
        }
    }

    pub fn prices(&self) -> impl Iterator<Item = f64> + '_ {
        self.log_values.iter().map(|y| y.exp())
    }

    pub fn terminal_log(&self) -> f64 {
        *self.log_values.last().expect("path has at least two nodes")
    }

    pub fn max_log(&self) -> f64 {
        self.log_values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Whether some grid node reaches `log_level`, ignoring what happens
    /// between nodes.
    pub fn nodes_reach(&self, log_level: f64) -> bool {
        self.log_values.iter().any(|&y| y >= log_level)
    }

    pub fn crossing_time(&self) -> Option<f64> {
        self.crossing_step.map(|k| self.grid.time(k))
    }

    /// CSV with header `t,log_value,value`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,log_value,value")?;
        for (k, &y) in self.log_values.iter().enumerate() {
            writeln!(
                out,
                "{},{},{}",
                fmt_f64(self.grid.time(k)),
                fmt_f64(y),
                fmt_f64(y.exp())
            )?;
        }
        Ok(())
    }
}

/// Fill `path` with an exact sample of `dynamics` plus an extra drift
/// `tilt`; returns the sum of the normal draws.
pub(crate) fn fill_log_path<R: Rng>(
    path: &mut Path,
    dynamics: LogDynamics,
    tilt: f64,
    rng: &mut R,
) -> f64 {
    let dt = path.grid.dt();
    let step_mean = (dynamics.drift + tilt) * dt;
    let step_sd = dynamics.vol * dt.sqrt();
    let mut y = dynamics.start;
    let mut z_sum = 0.0;
    path.log_values[0] = y;
    for v in path.log_values[1..].iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        z_sum += z;
        y += step_mean + step_sd * z;
        *v = y;
    }
    path.vol = dynamics.vol;
    path.crossed_barrier = false;
    path.crossing_step = None;
    path.weight = 1.0;
    z_sum
}

/// Exact GBM path: log increments `c·Δt + σ√Δt·Z`.
pub fn sample_gbm_path(params: &ModelParams, grid: TimeGrid, rng: RngStream) -> Path {
    sample_gbm_path_with(params, grid, &mut rng.generator())
}

pub fn sample_gbm_path_with<R: Rng>(params: &ModelParams, grid: TimeGrid, rng: &mut R) -> Path {
    let mut path = Path::new(grid, params.sigma());
    fill_log_path(&mut path, params.dynamics(), 0.0, rng);
    path
}

/// `exp(-2(level - y0)(level - y1)/(σ²Δt))` when both ends are below
/// `level`, else 1: the probability a Brownian bridge from `y0` to `y1`
/// over `dt` reaches `level`.
pub fn bridge_crossing_probability(
    y0: f64,
    y1: f64,
    level: f64,
    sigma: f64,
    dt: f64,
) -> Result<f64> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Domain(format!(
            "dt must be finite and > 0, got {dt}"
        )));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Domain(format!(
            "sigma must be finite and > 0, got {sigma}"
        )));
    }
    Ok(bridge_probability(y0, y1, level, sigma * sigma * dt))
}

#[inline]
fn bridge_probability(y0: f64, y1: f64, level: f64, var: f64) -> f64 {
    if y0 >= level || y1 >= level {
        1.0
    } else {
        (-2.0 * (level - y0) * (level - y1) / var).exp()
    }
}

/// Set `crossed_barrier`: a node at or above `ln(barrier)`, or a successful
/// Bernoulli draw with the bridge probability on some interval. Draws stop at
/// the first crossing, so replaying the same generator gives the same result.
pub fn detect_crossing<R: Rng>(path: &mut Path, barrier: f64, rng: &mut R) {
    detect_crossing_log(path, barrier.ln(), rng)
}

pub(crate) fn detect_crossing_log<R: Rng>(path: &mut Path, level: f64, rng: &mut R) {
    path.crossed_barrier = false;
    path.crossing_step = None;
    if path.log_values[0] >= level {
        path.crossed_barrier = true;
        path.crossing_step = Some(0);
        return;
    }
    let scale = 2.0 / (path.vol * path.vol * path.grid.dt());
    for (k, w) in path.log_values.windows(2).enumerate() {
        let (y0, y1) = (w[0], w[1]);
        let hit = if y1 >= level {
            true
        } else {
            let exponent = scale * (level - y0) * (level - y1);
            // exp(-745) is the last non-zero double
            exponent < 745.0 && rng.random::<f64>() < (-exponent).exp()
        };
        if hit {
            path.crossed_barrier = true;
            path.crossing_step = Some(k + 1);
            return;
        }
    }
}

/// `max_k |X_{t_k} - S (B/S)^{t_k/T}|`, in price space over grid nodes.
pub fn sup_distance(path: &Path, spec: &BarrierSpec) -> Result<f64> {
    let t = path.grid.maturity();
    if (t - spec.maturity()).abs() > 1e-12 * t.max(spec.maturity()) {
        return Err(Error::Domain(format!(
            "path maturity {t} does not match contract maturity {}",
            spec.maturity()
        )));
    }
    Ok(sup_distance_log(path, spec.barrier().ln()))
}

pub(crate) fn sup_distance_log(path: &Path, log_barrier: f64) -> f64 {
    let y0 = path.log_values[0];
    let gap = log_barrier - y0;
    let n = path.grid.steps() as f64;
    path.log_values
        .iter()
        .enumerate()
        .map(|(k, &y)| {
            let curve = y0 + gap * (k as f64 / n);
            (y.exp() - curve.exp()).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(t: f64, n: usize) -> TimeGrid {
        TimeGrid::new(t, n).unwrap()
    }

    #[test]
    fn deterministic_drift_limit() {
        let p = ModelParams::new(0.05, 1e-10, 2.0).unwrap();
        let path = sample_gbm_path(&p, grid(1.0, 64), RngStream::new(1, 0));
        assert_eq!(path.log_values[0], 2f64.ln());
        assert!((path.terminal_log() - (2f64.ln() + p.log_drift())).abs() < 1e-6);
        assert_eq!(path.weight, 1.0);
    }

    #[test]
    fn replay_is_bitwise() {
        let p = ModelParams::new(0.05, 0.3, 1.0).unwrap();
        let s = RngStream::new(42, 9);
        let a = sample_gbm_path(&p, grid(0.5, 100), s);
        let b = sample_gbm_path(&p, grid(0.5, 100), s);
        assert_eq!(a, b);
        let c = sample_gbm_path(&p, grid(0.5, 100), RngStream::new(42, 10));
        assert_ne!(a.log_values, c.log_values);
    }

    #[test]
    fn bridge_probability_cases() {
        assert_eq!(
            bridge_crossing_probability(1.0, 0.2, 1.0, 0.3, 0.01).unwrap(),
            1.0
        );
        assert_eq!(
            bridge_crossing_probability(0.1, 1.5, 1.0, 0.3, 0.01).unwrap(),
            1.0
        );
        let sd = 0.3 * 0.1;
        let far =
            bridge_crossing_probability(1.0 - 10.0 * sd, 1.0 - 10.0 * sd, 1.0, 0.3, 0.01).unwrap();
        assert!(far <= (-200f64).exp() * (1.0 + 1e-12));
        assert!(bridge_crossing_probability(0.0, 0.0, 1.0, 0.3, 0.0).is_err());
        let mut last = 1.0;
        for level in [0.51, 0.6, 0.8, 1.2] {
            let v = bridge_crossing_probability(0.5, 0.4, level, 0.3, 0.1).unwrap();
            assert!(v < last && (0.0..=1.0).contains(&v));
            last = v;
        }
    }

    #[test]
    fn crossing_on_nodes_and_far_paths() {
        let mut rng = RngStream::new(0, 0).generator();
        let mut path = Path::new(grid(1.0, 4), 0.3);
        path.log_values = vec![0.3; 5];
        detect_crossing_log(&mut path, 0.2, &mut rng);
        assert!(path.crossed_barrier);
        assert_eq!(path.crossing_step, Some(0));

        let dt: f64 = 0.25;
        let far = 0.2 - 10.0 * 0.3 * dt.sqrt();
        path.log_values = vec![far; 5];
        let mut hits = 0;
        for i in 0..1000 {
            let mut rng = RngStream::new(0, i).generator();
            detect_crossing_log(&mut path, 0.2, &mut rng);
            hits += path.crossed_barrier as u32;
        }
        assert_eq!(hits, 0);
    }

    #[test]
    fn crossing_is_idempotent_under_replay() {
        let p = ModelParams::new(0.0, 0.3, 1.0).unwrap();
        for i in 0..50 {
            let mut g = RngStream::new(3, i).generator();
            let mut path = sample_gbm_path_with(&p, grid(0.25, 32), &mut g);
            let mut g2 = g.clone();
            detect_crossing(&mut path, 1.1, &mut g);
            let first = (path.crossed_barrier, path.crossing_step);
            detect_crossing(&mut path, 1.1, &mut g2);
            assert_eq!(first, (path.crossed_barrier, path.crossing_step));
        }
    }

    #[test]
    fn sup_distance_on_curve_and_constant() {
        let spec = BarrierSpec::new(2.0, 1.0, 0.5).unwrap();
        let g = grid(0.5, 16);
        let mut path = Path::new(g, 0.3);
        let (y0, yb) = (0f64, 2f64.ln());
        for (k, v) in path.log_values.iter_mut().enumerate() {
            *v = y0 + (yb - y0) * (k as f64 / 16.0);
        }
        assert_eq!(sup_distance(&path, &spec).unwrap(), 0.0);

        path.log_values.iter_mut().for_each(|v| *v = 0.0);
        assert!((sup_distance(&path, &spec).unwrap() - 1.0).abs() < 1e-15);

        let other = BarrierSpec::new(2.0, 1.0, 0.4).unwrap();
        assert!(sup_distance(&path, &other).is_err());
    }

    #[test]
    fn csv_dump_header_and_rows() {
        let p = ModelParams::new(0.0, 0.3, 1.0).unwrap();
        let path = sample_gbm_path(&p, grid(1.0, 3), RngStream::new(0, 0));
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,log_value,value");
        assert_eq!(lines.len(), 5);
        let last: Vec<f64> = lines[4].split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(last[0], 1.0);
        assert_eq!(last[1], path.terminal_log());
    }
}
