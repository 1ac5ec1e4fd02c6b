use std::ops::Range;

use super::params::{LogDynamics, TimeGrid};
use super::path::{detect_crossing_log, fill_log_path, Path};
use super::rng::RngStream;

/// Paths per work unit. Blocks are simulated independently and their
/// accumulators merged in block order, so the result is the same for any
/// thread count.
pub const BLOCK_SIZE: u64 = 1024;

/// Simulates path `i` of a run from stream `(master_seed, i)`.
#[derive(Debug, Clone, Copy)]
pub struct PathEngine {
    pub dynamics: LogDynamics,
    pub grid: TimeGrid,
    /// Barrier in the same (log) coordinates as the path.
    pub log_level: f64,
    /// Extra drift of the proposal law; 0 for the untilted law.
    pub tilt: f64,
    /// Bridge-corrected crossing detection; node-only when false.
    pub bridge: bool,
    pub master_seed: u64,
}

impl PathEngine {
    pub fn new(dynamics: LogDynamics, grid: TimeGrid, log_level: f64, master_seed: u64) -> Self {
        Self {
            dynamics,
            grid,
            log_level,
            tilt: 0.0,
            bridge: true,
            master_seed,
        }
    }

    pub fn with_tilt(mut self, tilt: f64) -> Self {
        self.tilt = tilt;
        self
    }

    pub fn with_bridge(mut self, bridge: bool) -> Self {
        self.bridge = bridge;
        self
    }

    pub fn blank_path(&self) -> Path {
        Path::new(self.grid, self.dynamics.vol)
    }

    /// Overwrite `path` with path number `index`.
    pub fn simulate(&self, index: u64, path: &mut Path) {
        let mut rng = RngStream::new(self.master_seed, index).generator();
        let z_sum = fill_log_path(path, self.dynamics, self.tilt, &mut rng);
        if self.tilt != 0.0 {
            // dP/dQ for a Brownian shift θ = tilt/vol over [0, T]
            let theta = self.tilt / self.dynamics.vol;
            let w_t = z_sum * self.grid.dt().sqrt();
            path.weight = (-theta * w_t - 0.5 * theta * theta * self.grid.maturity()).exp();
        }
        if self.bridge {
            detect_crossing_log(path, self.log_level, &mut rng);
        } else {
            path.crossing_step = path.log_values.iter().position(|&y| y >= self.log_level);
            path.crossed_barrier = path.crossing_step.is_some();
        }
    }

    pub fn path(&self, index: u64) -> Path {
        let mut p = self.blank_path();
        self.simulate(index, &mut p);
        p
    }

    /// Simulate every index in `range`, folding each path into a per-block
    /// accumulator. Returns the accumulators in block order.
    pub fn fold_blocks<A, I, F>(&self, range: Range<u64>, init: I, observe: F) -> Vec<A>
    where
        A: Send,
        I: Fn() -> A + Sync,
        F: Fn(&mut A, &Path) + Sync,
    {
        let start = range.start;
        let len = range.end.saturating_sub(start);
        let blocks = len.div_ceil(BLOCK_SIZE);
        let run_block = |b: u64| {
            let lo = start + b * BLOCK_SIZE;
            let hi = (lo + BLOCK_SIZE).min(range.end);
            let mut acc = init();
            let mut path = self.blank_path();
            for i in lo..hi {
                self.simulate(i, &mut path);
                observe(&mut acc, &path);
            }
            acc
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..blocks).into_par_iter().map(run_block).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..blocks).map(run_block).collect()
        }
    }
}

/// Run `f` with at most `threads` workers (all available when `None`).
/// Results never depend on the choice.
pub fn with_thread_count<R, F>(threads: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        match threads {
            Some(n) => match rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
            {
                Ok(pool) => pool.install(f),
                Err(_) => f(),
            },
            None => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}
