//! Comparing samples with exact or continuous laws.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Largest total-variation distance accepted between a Monte Carlo law and
/// the exact one.
pub const TV_THRESHOLD: f64 = 0.01;

/// Smallest χ² p-value accepted. Only gross disagreement trips it.
pub const CHI2_P_THRESHOLD: f64 = 1e-6;

/// Cells expected to hold fewer draws than this are pooled for the χ² test.
const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OracleComparison {
    pub replicas: u64,
    pub total_variation: f64,
    pub chi2_statistic: f64,
    pub chi2_dof: usize,
    pub chi2_p_value: f64,
    pub tv_threshold: f64,
    pub p_threshold: f64,
    pub passed: bool,
}

/// Total variation and χ² goodness of fit of `mc_counts` against `exact`.
///
/// An observed outcome that has no exact mass is a usage error: the two
/// sides do not describe the same process.
pub fn compare_mc_to_oracle<K: Ord + Debug>(
    mc_counts: &BTreeMap<K, u64>,
    exact: &BTreeMap<K, BigRational>,
) -> Result<OracleComparison> {
    let replicas: u64 = mc_counts.values().sum();
    if replicas == 0 {
        return Err(Error::Usage("no Monte Carlo samples".into()));
    }
    for key in mc_counts.keys() {
        match exact.get(key) {
            Some(p) if p.to_f64().unwrap_or(0.0) > 0.0 => {}
            _ => {
                return Err(Error::Usage(format!(
                    "outcome {key:?} is outside the exact support"
                )))
            }
        }
    }

    let mut tv = 0.0;
    let mut cells: Vec<(f64, f64)> = Vec::new(); // (observed, expected)
    let mut pooled = (0.0, 0.0);
    for (key, p) in exact {
        let p = p.to_f64().expect("finite probability");
        let observed = mc_counts.get(key).copied().unwrap_or(0) as f64;
        tv += (observed / replicas as f64 - p).abs();
        let expected = p * replicas as f64;
        if expected < MIN_EXPECTED {
            pooled.0 += observed;
            pooled.1 += expected;
        } else {
            cells.push((observed, expected));
        }
    }
    tv *= 0.5;
    if pooled.1 > 0.0 {
        cells.push(pooled);
    }
    let stat: f64 = cells
        .iter()
        .filter(|c| c.1 > 0.0)
        .map(|&(o, e)| (o - e) * (o - e) / e)
        .sum();
    let dof = cells.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        1.0 - ChiSquared::new(dof as f64).expect("positive dof").cdf(stat)
    };
    Ok(OracleComparison {
        replicas,
        total_variation: tv,
        chi2_statistic: stat,
        chi2_dof: dof,
        chi2_p_value: p_value,
        tv_threshold: TV_THRESHOLD,
        p_threshold: CHI2_P_THRESHOLD,
        passed: tv <= TV_THRESHOLD && p_value >= CHI2_P_THRESHOLD,
    })
}

/// Kolmogorov–Smirnov distance between `samples` and the law with CDF `cdf`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Kolmogorov–Smirnov distance between `samples` and Uniform(0, 1).
pub fn ks_uniform(samples: &[f64]) -> f64 {
    ks_distance(samples, |x| x.clamp(0.0, 1.0))
}

/// Linear-interpolation quantile of unsorted `values`, `q` in `[0, 1]`.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation.
pub fn std_dev(values: &[f64]) -> f64 {
    let m = mean(values);
    let ss: f64 = values.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (values.len() as f64 - 1.0)).sqrt()
}
