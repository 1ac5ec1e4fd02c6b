use serde::{Deserialize, Serialize};

/// Single-pass mean and sum of squared deviations (Welford), mergeable
/// across partitions of a sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StreamingStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl StreamingStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut s = Self::new();
        xs.iter().for_each(|&x| s.push(x));
        s
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Combine two partitions (Chan et al. pairwise update).
    pub fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        Self {
            n,
            mean: self.mean + delta * (nb / n as f64),
            m2: self.m2 + other.m2 + delta * delta * (na * nb / n as f64),
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    /// Unbiased sample variance; zero for fewer than two observations.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean, `s / √n`.
    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// Running sums for self-normalised importance-sampling estimates
/// `Σ w g / Σ w`, with a delta-method standard error and Kish effective
/// sample size. Observations with `w = 0` only count towards `n`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightedStats {
    n: u64,
    positive: u64,
    sum_w: f64,
    sum_w2: f64,
    sum_wg: f64,
    sum_w2g: f64,
    sum_w2g2: f64,
    max_w: f64,
}

impl WeightedStats {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, w: f64, g: f64) {
        self.n += 1;
        if w > 0.0 {
            self.positive += 1;
            let w2 = w * w;
            self.sum_w += w;
            self.sum_w2 += w2;
            self.sum_wg += w * g;
            self.sum_w2g += w2 * g;
            self.sum_w2g2 += w2 * g * g;
            self.max_w = self.max_w.max(w);
        }
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            n: self.n + other.n,
            positive: self.positive + other.positive,
            sum_w: self.sum_w + other.sum_w,
            sum_w2: self.sum_w2 + other.sum_w2,
            sum_wg: self.sum_wg + other.sum_wg,
            sum_w2g: self.sum_w2g + other.sum_w2g,
            sum_w2g2: self.sum_w2g2 + other.sum_w2g2,
            max_w: self.max_w.max(other.max_w),
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn positive_count(&self) -> u64 {
        self.positive
    }

    pub fn sum_weights(&self) -> f64 {
        self.sum_w
    }

    pub fn mean(&self) -> f64 {
        if self.sum_w > 0.0 {
            self.sum_wg / self.sum_w
        } else {
            0.0
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.sum_w <= 0.0 {
            return 0.0;
        }
        let m = self.mean();
        let v = self.sum_w2g2 - 2.0 * m * self.sum_w2g + m * m * self.sum_w2;
        v.max(0.0).sqrt() / self.sum_w
    }

    /// `(Σw)² / Σw²`.
    pub fn effective_sample_size(&self) -> f64 {
        if self.sum_w2 > 0.0 {
            self.sum_w * self.sum_w / self.sum_w2
        } else {
            0.0
        }
    }

    /// Largest single weight as a fraction of the total.
    pub fn max_weight_share(&self) -> f64 {
        if self.sum_w > 0.0 {
            self.max_w / self.sum_w
        } else {
            0.0
        }
    }
}
