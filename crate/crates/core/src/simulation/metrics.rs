//! Operating-characteristic statistics over replicated trials.

use serde::{Deserialize, Serialize};

use crate::model::MtdCurve;

const EPS: f64 = 1e-12;

/// A curve `y(x)` the distance metrics can be evaluated against.
pub trait Contour {
    fn y_at(&self, x: f64) -> Option<f64>;
    /// In-range points on an `n`-point uniform `x` grid.
    fn polyline(&self, n: usize) -> Vec<(f64, f64)>;
}

impl Contour for MtdCurve {
    fn y_at(&self, x: f64) -> Option<f64> {
        MtdCurve::y_at(self, x)
    }

    fn polyline(&self, n: usize) -> Vec<(f64, f64)> {
        MtdCurve::polyline(self, n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyStats {
    pub avg_pct_dlt: f64,
    pub pct_trials_rate_gt_theta_p05: f64,
    pub pct_trials_rate_gt_theta_p10: f64,
}

/// Safety summaries from per-trial `(dlts, patients)` counts.
pub fn safety_stats(counts: &[(usize, usize)], theta: f64) -> SafetyStats {
    let m = counts.len().max(1) as f64;
    let rates: Vec<f64> = counts
        .iter()
        .map(|&(d, n)| if n == 0 { 0.0 } else { d as f64 / n as f64 })
        .collect();
    let pct_above = |cut: f64| 100.0 * rates.iter().filter(|&&r| r > cut + EPS).count() as f64 / m;
    SafetyStats {
        avg_pct_dlt: 100.0 * rates.iter().sum::<f64>() / m,
        pct_trials_rate_gt_theta_p05: pct_above(theta + 0.05),
        pct_trials_rate_gt_theta_p10: pct_above(theta + 0.10),
    }
}

/// Signed distance from `(x, y)` to `curve`, discretized at `n` points plus
/// the curve's own point at `x`. Positive when the nearest curve point lies
/// above `y`.
pub fn signed_min_distance<C: Contour + ?Sized>(curve: &C, x: f64, y: f64, n: usize) -> Option<f64> {
    let mut pts = curve.polyline(n);
    if let Some(yc) = curve.y_at(x) {
        pts.push((x, yc));
    }
    let (d2, near_y) = pts
        .iter()
        .map(|&(px, py)| ((px - x).powi(2) + (py - y).powi(2), py))
        .min_by(|a, b| a.0.total_cmp(&b.0))?;
    let d = d2.sqrt();
    Some(if near_y > y { d } else { -d })
}

/// Average signed minimum distance from each true point `(x, y_true(x))` to
/// the estimated curves. `None` entries (stopped or empty estimates) are left
/// out of the average; grid points off the true curve are masked as `None`.
pub fn pointwise_bias<T, C>(truth: &T, estimates: &[Option<&C>], x_grid: &[f64], n: usize) -> Vec<Option<f64>>
where
    T: Contour + ?Sized,
    C: Contour + ?Sized,
{
    x_grid
        .iter()
        .map(|&x| {
            let y = truth.y_at(x)?;
            let ds: Vec<f64> = estimates
                .iter()
                .filter_map(|c| c.and_then(|c| signed_min_distance(c, x, y, n)))
                .collect();
            (!ds.is_empty()).then(|| ds.iter().sum::<f64>() / ds.len() as f64)
        })
        .collect()
}

/// Percent of trials whose estimated curve passes within `p` times the norm
/// of the true MTD point. Missing estimates count as misses.
pub fn pointwise_pct_recommendation<T, C>(
    truth: &T,
    estimates: &[Option<&C>],
    x_grid: &[f64],
    p: f64,
    n: usize,
) -> Vec<Option<f64>>
where
    T: Contour + ?Sized,
    C: Contour + ?Sized,
{
    let m = estimates.len().max(1) as f64;
    x_grid
        .iter()
        .map(|&x| {
            let y = truth.y_at(x)?;
            let tol = p * x.hypot(y) + EPS;
            let hits = estimates
                .iter()
                .filter(|c| {
                    c.and_then(|c| signed_min_distance(c, x, y, n))
                        .is_some_and(|d| d.abs() <= tol)
                })
                .count();
            Some(100.0 * hits as f64 / m)
        })
        .collect()
}

/// Percent of trials in which at least 25/50/75/100% of the recommended
/// combinations belong to the true MTD set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionPct {
    pub at_least_25: f64,
    pub at_least_50: f64,
    pub at_least_75: f64,
    pub all: f64,
}

pub fn discrete_pct_selection(recommended: &[Vec<(usize, usize)>], true_set: &[(usize, usize)]) -> SelectionPct {
    let m = recommended.len().max(1) as f64;
    let fractions: Vec<f64> = recommended
        .iter()
        .map(|rec| {
            if rec.is_empty() {
                0.0
            } else {
                rec.iter().filter(|c| true_set.contains(c)).count() as f64 / rec.len() as f64
            }
        })
        .collect();
    let pct = |cut: f64| 100.0 * fractions.iter().filter(|&&f| f >= cut - EPS).count() as f64 / m;
    SelectionPct {
        at_least_25: pct(0.25),
        at_least_50: pct(0.5),
        at_least_75: pct(0.75),
        all: pct(1.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PctRecommendation {
    pub p: f64,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingCharacteristics {
    pub replicates: usize,
    pub avg_pct_dlt: f64,
    pub pct_trials_rate_gt_theta_p05: f64,
    pub pct_trials_rate_gt_theta_p10: f64,
    pub pct_stopped: f64,
    /// Abscissae of the pointwise vectors; empty for tabulated truths.
    pub x_grid: Vec<f64>,
    pub pointwise_bias: Vec<Option<f64>>,
    pub pointwise_pct_recommendation: Vec<PctRecommendation>,
    /// Present in discrete designs.
    pub discrete_pct_selection: Option<SelectionPct>,
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Flat(f64);

    impl Contour for Flat {
        fn y_at(&self, _x: f64) -> Option<f64> {
            Some(self.0)
        }

        fn polyline(&self, n: usize) -> Vec<(f64, f64)> {
            (0..n).map(|i| (0.05 + 0.25 * i as f64 / (n - 1) as f64, self.0)).collect()
        }
    }

    fn grid() -> Vec<f64> {
        (0..11).map(|i| 0.05 + 0.025 * i as f64).collect()
    }

    #[test]
    fn safety_counting() {
        let s = safety_stats(&[(5, 20), (6, 20), (7, 20), (8, 20)], 0.3);
        assert!((s.avg_pct_dlt - 32.5).abs() < 1e-12);
        assert_eq!(s.pct_trials_rate_gt_theta_p05, 25.0);
        assert_eq!(s.pct_trials_rate_gt_theta_p10, 0.0);

        let s = safety_stats(&[(12, 40)], 0.3);
        assert!((s.avg_pct_dlt - 30.0).abs() < 1e-12);
        assert_eq!(s.pct_trials_rate_gt_theta_p05, 0.0);

        let s = safety_stats(&[(19, 40)], 0.3);
        assert!((s.avg_pct_dlt - 47.5).abs() < 1e-12);
        assert_eq!(s.pct_trials_rate_gt_theta_p05, 100.0);
        assert_eq!(s.pct_trials_rate_gt_theta_p10, 100.0);
    }

    #[test]
    fn parallel_curves() {
        let est = Flat(0.25);
        let bias = pointwise_bias(&Flat(0.2), &[Some(&est)], &grid(), 1000);
        for b in bias {
            assert!((b.unwrap() - 0.05).abs() < 1e-12);
        }
        let low = Flat(0.15);
        let bias = pointwise_bias(&Flat(0.2), &[Some(&low)], &grid(), 1000);
        assert!((bias[3].unwrap() + 0.05).abs() < 1e-12);
    }

    #[test]
    fn identical_curves() {
        let t = Flat(0.2);
        let bias = pointwise_bias(&t, &[Some(&t), Some(&t)], &grid(), 1000);
        assert!(bias.iter().all(|b| b.unwrap() == 0.0));
        let pct = pointwise_pct_recommendation(&t, &[Some(&t)], &grid(), 0.1, 1000);
        assert!(pct.iter().all(|p| p.unwrap() == 100.0));
    }

    #[test]
    fn missing_estimates() {
        let t = Flat(0.2);
        let est: [Option<&Flat>; 2] = [Some(&t), None];
        let bias = pointwise_bias(&t, &est, &grid(), 1000);
        assert_eq!(bias[0], Some(0.0));
        let pct = pointwise_pct_recommendation(&t, &est, &grid(), 0.1, 1000);
        assert_eq!(pct[0], Some(50.0));
        let none: [Option<&Flat>; 1] = [None];
        assert_eq!(pointwise_bias(&t, &none, &grid(), 1000)[0], None);
    }

    #[test]
    fn threshold_is_inclusive() {
        // true point (0.15, 0.2) has norm 0.25; p = 0.2 allows 0.05
        let pct = pointwise_pct_recommendation(&Flat(0.2), &[Some(&Flat(0.25))], &[0.15], 0.2, 1000);
        assert_eq!(pct[0], Some(100.0));
        let pct = pointwise_pct_recommendation(&Flat(0.2), &[Some(&Flat(0.26))], &[0.15], 0.2, 1000);
        assert_eq!(pct[0], Some(0.0));
    }

    #[test]
    fn selection_thresholds() {
        let truth = [(0, 1), (1, 0)];
        let s = discrete_pct_selection(&[vec![(0, 1)], vec![(1, 0), (0, 1)]], &truth);
        assert_eq!((s.at_least_25, s.at_least_50, s.at_least_75, s.all), (100.0, 100.0, 100.0, 100.0));
        let s = discrete_pct_selection(&[vec![(0, 1), (1, 1)]], &truth);
        assert_eq!((s.at_least_25, s.at_least_50, s.at_least_75, s.all), (100.0, 100.0, 0.0, 0.0));
        let s = discrete_pct_selection(&[vec![]], &truth);
        assert_eq!(s.at_least_25, 0.0);
    }
}
