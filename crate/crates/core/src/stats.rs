//! Accuracy estimates, confidence bounds, the win/loss significance test and
//! normalized-time curve aggregation.

use serde::{Deserialize, Serialize};

/// Accuracy measured on `n` examples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyEstimate {
    pub acc: f64,
    pub n: usize,
}

impl AccuracyEstimate {
    pub fn new(acc: f64, n: usize) -> Self {
        debug_assert!((0.0..=1.0).contains(&acc));
        Self { acc, n }
    }

    pub fn from_counts(correct: usize, n: usize) -> Self {
        Self { acc: if n == 0 { 0.0 } else { correct as f64 / n as f64 }, n }
    }
}

/// Sample-size weighted mean of two estimates. An empty second estimate
/// leaves the first unchanged.
pub fn pooled_accuracy(first: AccuracyEstimate, second: AccuracyEstimate) -> AccuracyEstimate {
    let n = first.n + second.n;
    if n == 0 {
        return AccuracyEstimate { acc: 0.0, n: 0 };
    }
    if second.n == 0 {
        return first;
    }
    if first.n == 0 {
        return second;
    }
    let acc = (first.acc * first.n as f64 + second.acc * second.n as f64) / n as f64;
    AccuracyEstimate { acc: acc.clamp(first.acc.min(second.acc), first.acc.max(second.acc)), n }
}

/// Default multiplier for a two-sided 95% normal interval.
pub const Z_95: f64 = 1.96;

/// Lower end of the normal confidence interval, `acc - z*sqrt(acc(1-acc)/n)`,
/// clipped to `[0, 1]`.
pub fn ci_lower(e: AccuracyEstimate, z: f64) -> f64 {
    if e.n == 0 {
        return 0.0;
    }
    let half = z * (e.acc * (1.0 - e.acc) / e.n as f64).sqrt();
    (e.acc - half).clamp(0.0, 1.0)
}

pub fn ci_lower_95(e: AccuracyEstimate) -> f64 {
    ci_lower(e, Z_95)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    AWins,
    BWins,
    Tie,
}

impl Verdict {
    pub fn swapped(self) -> Self {
        match self {
            Verdict::AWins => Verdict::BWins,
            Verdict::BWins => Verdict::AWins,
            Verdict::Tie => Verdict::Tie,
        }
    }
}

/// One-sided 95% normal quantile used by the win/loss test.
pub const Z_ONE_SIDED_95: f64 = 1.645;

/// Declares a winner when the accuracy gap exceeds
/// `1.645 * sqrt(a(1-a)/m + b(1-b)/m)`.
pub fn win_loss_test(acc_a: f64, acc_b: f64, m_test: usize) -> Verdict {
    let m = m_test.max(1) as f64;
    let threshold = Z_ONE_SIDED_95 * (acc_a * (1.0 - acc_a) / m + acc_b * (1.0 - acc_b) / m).sqrt();
    let gap = (acc_a - acc_b).abs();
    if gap - threshold > 0.0 {
        if acc_a > acc_b {
            Verdict::AWins
        } else {
            Verdict::BWins
        }
    } else {
        Verdict::Tie
    }
}

/// One run's accuracy as a step function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSteps {
    /// Normalization constant (full-training time for the run's dataset).
    pub t_full: f64,
    /// `(time, accuracy)` at each change of the reported model, time-sorted.
    pub steps: Vec<(f64, f64)>,
    /// Accuracy reported before any model exists.
    pub baseline: f64,
}

impl RunSteps {
    pub fn value_at(&self, time: f64) -> f64 {
        let mut value = self.baseline;
        for &(t, a) in &self.steps {
            if t <= time {
                value = a;
            } else {
                break;
            }
        }
        value
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    pub mean_acc: f64,
    pub n_runs: usize,
}

/// Mean accuracy across runs at each normalized time `t * t_full`.
pub fn normalized_curve(runs: &[RunSteps], grid: &[f64]) -> Vec<CurvePoint> {
    grid.iter()
        .map(|&t| {
            let n = runs.len();
            let sum: f64 = runs.iter().map(|r| r.value_at(t * r.t_full)).sum();
            CurvePoint { t, mean_acc: if n == 0 { 0.0 } else { sum / n as f64 }, n_runs: n }
        })
        .collect()
}

pub const DEFAULT_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Lower median (an actual sample value).
pub fn lower_median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[(v.len() - 1) / 2]
}

/// Empirical quantile at level `q` (smallest value with at least `q` of the
/// mass at or below it).
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let idx = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
    v[idx]
}

/// Least-squares line fit; returns `(intercept, slope, residual norm)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let intercept = my - slope * mx;
    let resid = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum::<f64>().sqrt();
    (intercept, slope, resid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn pooled_goldens() {
        let p = pooled_accuracy(AccuracyEstimate::new(0.5, 100), AccuracyEstimate::new(0.5, 20));
        assert_eq!((p.acc, p.n), (0.5, 120));
        let p = pooled_accuracy(AccuracyEstimate::new(1.0, 10), AccuracyEstimate::new(0.0, 10));
        assert_eq!((p.acc, p.n), (0.5, 20));
        let p = pooled_accuracy(AccuracyEstimate::new(0.8, 100), AccuracyEstimate::new(0.6, 50));
        assert_abs_diff_eq!(p.acc, 110.0 / 150.0, epsilon = 1e-12);
        assert_eq!(p.n, 150);
    }

    #[test]
    fn ci_goldens() {
        assert_abs_diff_eq!(ci_lower_95(AccuracyEstimate::new(0.5, 100)), 0.402, epsilon = 1e-12);
        assert_eq!(ci_lower_95(AccuracyEstimate::new(1.0, 7)), 1.0);
        assert_abs_diff_eq!(ci_lower_95(AccuracyEstimate::new(0.9, 36)), 0.802, epsilon = 1e-12);
        assert_eq!(ci_lower_95(AccuracyEstimate::new(0.1, 2)), 0.0);
    }

    #[test]
    fn win_loss_goldens() {
        assert_eq!(win_loss_test(0.7, 0.7, 100), Verdict::Tie);
        assert_eq!(win_loss_test(0.90, 0.85, 10_000), Verdict::AWins);
        assert_eq!(win_loss_test(0.90, 0.895, 1000), Verdict::Tie);
        assert_eq!(win_loss_test(0.85, 0.90, 10_000), Verdict::BWins);
    }

    #[test]
    fn curve_steps() {
        let single = RunSteps { t_full: 40.0, steps: vec![(10.0, 0.5), (30.0, 0.7)], baseline: 0.3 };
        let c = normalized_curve(std::slice::from_ref(&single), &[0.0, 0.5, 1.0]);
        assert_eq!(c[0].mean_acc, 0.3);
        assert_eq!(c[1].mean_acc, 0.5);
        assert_eq!(c[2].mean_acc, 0.7);
        let a = RunSteps { t_full: 1.0, steps: vec![(1.0, 0.6)], baseline: 0.0 };
        let b = RunSteps { t_full: 2.0, steps: vec![(2.0, 0.8)], baseline: 0.0 };
        let c = normalized_curve(&[a, b], &[1.0]);
        assert_abs_diff_eq!(c[0].mean_acc, 0.7, epsilon = 1e-15);
        assert_eq!(c[0].n_runs, 2);
    }

    #[test]
    fn fit_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 + 3.0 * v).collect();
        let (a, b, r) = linear_fit(&x, &y);
        assert_abs_diff_eq!(a, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b, 3.0, epsilon = 1e-12);
        assert!(r < 1e-12);
    }

    #[test]
    fn medians_and_quantiles() {
        assert_eq!(lower_median(&[3.0, 1.0, 2.0, 4.0]), 2.0);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0], 0.9), 9.0);
    }

    proptest! {
        #[test]
        fn ci_never_exceeds_acc(correct in 0usize..200, extra in 1usize..200, z in 0.0f64..4.0) {
            let e = AccuracyEstimate::from_counts(correct.min(extra), extra);
            let lo = ci_lower(e, z);
            prop_assert!(lo <= e.acc + 1e-15);
            if e.acc == 0.0 || e.acc == 1.0 { prop_assert_eq!(lo, e.acc); }
        }

        #[test]
        fn pooling_is_symmetric_and_bracketed(a in 0.0f64..=1.0, na in 1usize..500, b in 0.0f64..=1.0, nb in 1usize..500) {
            let x = AccuracyEstimate::new(a, na);
            let y = AccuracyEstimate::new(b, nb);
            let p = pooled_accuracy(x, y);
            let q = pooled_accuracy(y, x);
            prop_assert!((p.acc - q.acc).abs() < 1e-12);
            prop_assert!(p.acc >= a.min(b) && p.acc <= a.max(b));
        }

        #[test]
        fn win_loss_is_antisymmetric(a in 0.0f64..=1.0, b in 0.0f64..=1.0, m in 1usize..100_000) {
            prop_assert_eq!(win_loss_test(a, b, m), win_loss_test(b, a, m).swapped());
        }
    }
}
