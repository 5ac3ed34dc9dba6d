//! Log-log least squares for growth exponents.

use crate::error::{Error, Result};
use crate::stats::CheckpointSeries;

/// Fewest checkpoints a fit accepts.
pub const MIN_FIT_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SlopeFit {
    pub alpha_hat: f64,
    pub intercept: f64,
    /// OLS standard error of `alpha_hat`.
    pub stderr: f64,
    pub window: (u64, u64),
    pub points: usize,
}

/// Fits `log m = intercept + alpha_hat log n` over the `(n, m)` pairs.
pub fn fit_power_law(points: &[(f64, f64)], window: (u64, u64)) -> Result<SlopeFit> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::Usage(format!(
            "slope fit needs at least {MIN_FIT_POINTS} points in [{}, {}], got {}",
            window.0,
            window.1,
            points.len()
        )));
    }
    if let Some(&(n, m)) = points.iter().find(|&&(n, m)| !(n >= 1.0 && m >= 1.0)) {
        return Err(Error::Usage(format!("slope fit needs n, M >= 1, got ({n}, {m})")));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let count = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / count;
    let y_mean = ys.iter().sum::<f64>() / count;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Usage("slope fit needs at least two distinct n".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let alpha_hat = sxy / sxx;
    let intercept = y_mean - alpha_hat * x_mean;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - alpha_hat * x).powi(2))
        .sum();
    let stderr = (ssr / (count - 2.0) / sxx).sqrt();
    Ok(SlopeFit {
        alpha_hat,
        intercept,
        stderr,
        window,
        points: points.len(),
    })
}

/// Fits the growth exponent of `M_rank` over checkpoints with `n` in `window`
/// (inclusive).
pub fn fit_slope(series: &CheckpointSeries, rank: usize, window: (u64, u64)) -> Result<SlopeFit> {
    if rank < 1 || rank > series.k {
        return Err(Error::Usage(format!("rank {rank} outside 1..={}", series.k)));
    }
    let points: Vec<(f64, f64)> = series
        .rows
        .iter()
        .filter(|r| r.n >= window.0 && r.n <= window.1)
        .map(|r| (r.n as f64, r.m[rank - 1] as f64))
        .collect();
    fit_power_law(&points, window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::CheckpointSchedule;

    fn synthetic(f: impl Fn(f64) -> f64, window: (u64, u64)) -> Vec<(f64, f64)> {
        CheckpointSchedule::new(1.05, window.1)
            .unwrap()
            .steps()
            .into_iter()
            .filter(|&n| n >= window.0)
            .map(|n| (n as f64, f(n as f64)))
            .collect()
    }

    #[test]
    fn exact_power_law() {
        let w = (1_000, 1_000_000);
        let fit = fit_power_law(&synthetic(|n| 3.0 * n.powf(0.57), w), w).unwrap();
        assert!((fit.alpha_hat - 0.57).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-10);
        assert!(fit.stderr < 1e-10);
    }

    #[test]
    fn log_corrected_power_law() {
        let w = (10_000, 1_000_000);
        let fit = fit_power_law(&synthetic(|n| n.sqrt() * (1.0 + 1.0 / n.ln()), w), w).unwrap();
        assert!((fit.alpha_hat - 0.5).abs() < 0.03, "{}", fit.alpha_hat);
    }

    #[test]
    fn constant_series() {
        let w = (10, 10_000);
        let fit = fit_power_law(&synthetic(|_| 5.0, w), w).unwrap();
        assert!(fit.alpha_hat.abs() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        let pts: Vec<(f64, f64)> = (1..5).map(|n| (n as f64, n as f64)).collect();
        assert!(matches!(fit_power_law(&pts, (1, 4)), Err(Error::Usage(_))));
        let mut pts: Vec<(f64, f64)> = (1..20).map(|n| (n as f64, n as f64)).collect();
        pts[3].1 = 0.5;
        assert!(fit_power_law(&pts, (1, 19)).is_err());
    }
}
