//! One-pass central-moment accumulation with exact pairwise combination.
//!
//! The Monte Carlo engine accumulates per-chunk summaries that are later
//! merged in chunk-index order, so results cannot depend on how chunks were
//! scheduled across threads. Tracking through the fourth central moment lets
//! the reports attach a standard error to the variance estimate itself.

/// Running count, mean, and second through fourth centered sums.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningMoments {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl RunningMoments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        let n0 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term = delta * delta_n * n0;
        // m4 and m3 must read the pre-update lower moments.
        self.m4 += term * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2
            - 4.0 * delta_n * self.m3;
        self.m3 += term * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term;
        self.mean += delta_n;
    }

    /// Combines two summaries as if their underlying samples were
    /// concatenated.
    pub fn merge(&mut self, other: &RunningMoments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let na = self.n as f64;
        let nb = other.n as f64;
        let n = na + nb;
        let delta = other.mean - self.mean;
        let d2 = delta * delta;

        let m4 = self.m4
            + other.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n;
        let m3 = self.m3
            + other.m3
            + delta * d2 * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;

        self.mean += delta * nb / n;
        self.n += other.n;
        self.m2 = m2;
        self.m3 = m3;
        self.m4 = m4;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero until two observations arrive.
    pub fn sample_variance(&self) -> f64 {
        if self.n < 2 { 0.0 } else { self.m2 / (self.n - 1) as f64 }
    }

    /// Standard error of the sample mean.
    pub fn mean_standard_error(&self) -> f64 {
        if self.n < 2 { 0.0 } else { (self.sample_variance() / self.n as f64).sqrt() }
    }

    /// Standard error of the sample variance, from the fourth-central-moment
    /// formula `Var(s^2) = m4/R - s^4 (R-3)/(R(R-1))`.
    pub fn variance_standard_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let s2 = self.sample_variance();
        let m4 = self.m4 / n;
        (m4 / n - s2 * s2 * (n - 3.0) / (n * (n - 1.0))).max(0.0).sqrt()
    }
}
