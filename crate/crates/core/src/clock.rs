//! Time accounting for teacher runs.
//!
//! A [`CostClock`] runs either against the wall clock or against a simulated
//! cost model where training on `m` examples costs `m^k * f(m)` and
//! classifying one example costs a fixed `c_clf`. Simulated mode is exact
//! and replays bit-for-bit.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

/// Sublinear, non-decreasing factor `f` of the training cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CostShape {
    /// `f(m) = 1`
    #[default]
    Constant,
    /// `f(m) = log2(m + 2)`
    Log2,
}

impl CostShape {
    pub fn factor(self, m: usize) -> f64 {
        match self {
            CostShape::Constant => 1.0,
            CostShape::Log2 => ((m + 2) as f64).log2(),
        }
    }
}

/// Training `m` examples costs `m^exponent * shape(m)` time units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostModel {
    pub exponent: u32,
    pub shape: CostShape,
}

impl CostModel {
    pub const fn new(exponent: u32, shape: CostShape) -> Self {
        Self { exponent, shape }
    }

    pub fn train_cost(&self, m: usize) -> f64 {
        simulated_train_cost(m, self.exponent, self.shape)
    }

    /// Largest `m` with `train_cost(m) <= budget`, found by doubling and
    /// bisection over the monotone cost.
    pub fn max_affordable(&self, budget: f64) -> usize {
        if self.train_cost(1) > budget {
            return 0;
        }
        let mut lo = 1usize;
        let mut hi = 2usize;
        while self.train_cost(hi) <= budget {
            lo = hi;
            hi = hi.checked_mul(2).expect("budget too large for cost search");
        }
        // invariant: cost(lo) <= budget < cost(hi)
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.train_cost(mid) <= budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

impl Default for CostModel {
    fn default() -> Self {
        Self::new(1, CostShape::Constant)
    }
}

pub fn simulated_train_cost(m: usize, exponent: u32, shape: CostShape) -> f64 {
    if m == 0 {
        return 0.0;
    }
    (m as f64).powi(exponent as i32) * shape.factor(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockMode {
    Wall,
    Simulated,
}

#[derive(Debug, Clone)]
pub struct CostClock {
    mode: ClockMode,
    simulated: f64,
    classify_cost: f64,
    started: Instant,
    paused_total: Duration,
    paused_at: Option<Instant>,
}

impl CostClock {
    /// Simulated clock charging `classify_cost` per classified example.
    pub fn simulated(classify_cost: f64) -> Self {
        assert!(classify_cost >= 0.0, "classification cost must be non-negative");
        Self::build(ClockMode::Simulated, classify_cost)
    }

    /// Wall clock in seconds; starts running immediately.
    pub fn wall() -> Self {
        Self::build(ClockMode::Wall, 0.0)
    }

    pub fn new(mode: ClockMode, classify_cost: f64) -> Self {
        match mode {
            ClockMode::Wall => Self::wall(),
            ClockMode::Simulated => Self::simulated(classify_cost),
        }
    }

    fn build(mode: ClockMode, classify_cost: f64) -> Self {
        Self {
            mode,
            simulated: 0.0,
            classify_cost,
            started: Instant::now(),
            paused_total: Duration::ZERO,
            paused_at: None,
        }
    }

    pub fn mode(&self) -> ClockMode {
        self.mode
    }

    pub fn classify_cost(&self) -> f64 {
        self.classify_cost
    }

    pub fn elapsed(&self) -> f64 {
        match self.mode {
            ClockMode::Simulated => self.simulated,
            ClockMode::Wall => {
                let now = self.paused_at.unwrap_or_else(Instant::now);
                (now.duration_since(self.started) - self.paused_total).as_secs_f64()
            }
        }
    }

    fn is_paused(&self) -> bool {
        self.paused_at.is_some()
    }

    /// Charges a training run on `m` examples. Wall mode measures real time
    /// instead, so this is a no-op there.
    pub fn charge_training(&mut self, m: usize, cost: CostModel) {
        if self.mode == ClockMode::Simulated && !self.is_paused() {
            self.simulated += cost.train_cost(m);
        }
    }

    pub fn charge_classification(&mut self, n: usize) {
        if self.mode == ClockMode::Simulated && !self.is_paused() {
            self.simulated += self.classify_cost * n as f64;
        }
    }

    /// Charges an arbitrary simulated amount (used for incremental updates).
    pub fn charge(&mut self, amount: f64) {
        debug_assert!(amount >= 0.0);
        if self.mode == ClockMode::Simulated && !self.is_paused() {
            self.simulated += amount;
        }
    }

    pub fn pause(&mut self) {
        if self.paused_at.is_none() {
            self.paused_at = Some(Instant::now());
        }
    }

    pub fn resume(&mut self) {
        if let Some(at) = self.paused_at.take() {
            self.paused_total += at.elapsed();
        }
    }

    /// Runs `f` with the clock stopped; nothing charged inside counts.
    pub fn suspended<R>(&mut self, f: impl FnOnce() -> R) -> R {
        self.pause();
        let out = f();
        self.resume();
        out
    }
}

/// Time limit `T`, in the active clock's units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeBudget(f64);

impl TimeBudget {
    pub fn new(limit: f64) -> Option<Self> {
        (limit > 0.0).then_some(Self(limit))
    }

    pub fn unlimited() -> Self {
        Self(f64::INFINITY)
    }

    pub fn limit(&self) -> f64 {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cost_goldens() {
        assert_eq!(simulated_train_cost(0, 2, CostShape::Constant), 0.0);
        assert_eq!(simulated_train_cost(10, 2, CostShape::Constant), 100.0);
        // 8 * log2(10), computed independently
        assert_relative_eq!(simulated_train_cost(8, 1, CostShape::Log2), 26.575424759098897, max_relative = 1e-12);
    }

    #[test]
    fn cost_is_monotone() {
        for shape in [CostShape::Constant, CostShape::Log2] {
            for k in 1..=3 {
                let mut prev = 0.0;
                for m in 0..500 {
                    let c = simulated_train_cost(m, k, shape);
                    assert!(c >= prev);
                    prev = c;
                }
            }
        }
    }

    #[test]
    fn max_affordable_matches_scan() {
        for (k, shape, budget) in
            [(2, CostShape::Constant, 100.0), (1, CostShape::Constant, 7.5), (2, CostShape::Log2, 1000.0)]
        {
            let cm = CostModel::new(k, shape);
            let scan = (1..).take_while(|&m| cm.train_cost(m) <= budget).last().unwrap_or(0);
            assert_eq!(cm.max_affordable(budget), scan);
        }
        assert_eq!(CostModel::new(2, CostShape::Constant).max_affordable(0.5), 0);
    }

    #[test]
    fn simulated_clock_charges_and_suspends() {
        let mut c = CostClock::simulated(0.5);
        c.charge_training(10, CostModel::new(2, CostShape::Constant));
        c.charge_classification(4);
        assert_eq!(c.elapsed(), 102.0);
        let before = c.elapsed();
        c.suspended(|| ());
        c.pause();
        c.charge_classification(1000);
        c.resume();
        assert_eq!(c.elapsed(), before);
    }

    #[test]
    fn wall_clock_excludes_paused_time() {
        let mut c = CostClock::wall();
        c.pause();
        let frozen = c.elapsed();
        std::thread::sleep(Duration::from_millis(20));
        assert_eq!(c.elapsed(), frozen);
        c.resume();
        assert!(c.elapsed() < 0.015 + frozen);
    }

    #[test]
    fn budget_must_be_positive() {
        assert!(TimeBudget::new(0.0).is_none());
        assert_eq!(TimeBudget::new(3.0).unwrap().limit(), 3.0);
    }
}
