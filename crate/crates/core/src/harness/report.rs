//! Ensemble summaries.
//!
//! A [`SummaryReport`] is computed from the per-replica checkpoint series
//! only, so regenerating it from the CSV files on disk gives the same report
//! as the run that wrote them.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::BigRational;

use crate::error::Result;
use crate::harness::compare::{compare_mc_to_oracle, mean, quantile, OracleComparison};
use crate::harness::config::ExperimentConfig;
use crate::harness::oracle::{exact_enumeration, simulate_counts, Signature, ORACLE_MAX_D};
use crate::harness::slope::{fit_slope, SlopeFit};
use crate::process::Rule;
use crate::rng::{self, RNG_ALGORITHM};
use crate::stats::{format_float, CheckpointSeries};
use crate::theory::TheoryParams;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Plain preferential attachment grows every top degree like `n^(1/2)`.
pub const PLAIN_EXPONENT: f64 = 0.5;

/// Oracle cross-check run alongside every summary.
pub const SUMMARY_ORACLE_N: u64 = 5;
pub const SUMMARY_ORACLE_REPLICAS: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    /// Allowed gap between mean terminal `M_1/n` and `x*`.
    pub x_star: f64,
    /// Allowed gap between the median fitted slope of `M_k`, `k >= 2`, and `alpha`.
    pub alpha: f64,
    /// Allowed gap between the median fitted slope of `M_1` and 1 under the max rule.
    pub linear_slope: f64,
    /// Allowed gap between fitted slopes and 1/2 under the plain rule.
    pub plain_slope: f64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    x_star: 0.05,
    alpha: 0.1,
    linear_slope: 0.05,
    plain_slope: 0.1,
};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RankSlopes {
    pub rank: usize,
    /// One fit per replica; `None` where the window held too few checkpoints.
    pub fits: Vec<Option<SlopeFit>>,
    pub median_alpha_hat: Option<f64>,
    /// Exponent predicted for this rank, if any.
    pub reference: Option<f64>,
    pub reference_label: String,
    pub deviation: Option<f64>,
    pub tolerance: Option<f64>,
    pub within_tolerance: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HubSummary {
    pub rank: usize,
    /// Quantiles 0.1, 0.5, 0.9 of the last change of rank `rank`, as a fraction of the horizon.
    pub last_change_quantiles: [f64; 3],
    /// Share of replicas whose rank did not change on `[n/2, n]`.
    pub unchanged_second_half: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OracleCheck {
    pub n_max: u64,
    pub k: usize,
    pub comparison: OracleComparison,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SummaryReport {
    pub tool_version: String,
    pub rng_algorithm: String,
    pub config: ExperimentConfig,
    pub theory: Option<TheoryParams>,
    pub notes: Vec<String>,
    pub tolerances: Tolerances,
    pub terminal_n: u64,
    pub terminal_m: Vec<Vec<u32>>,
    pub terminal_m1_over_n: Vec<f64>,
    pub mean_m1_over_n: f64,
    pub x_star_deviation: Option<f64>,
    pub slopes: Vec<RankSlopes>,
    pub hubs: Vec<HubSummary>,
    pub oracle: Option<OracleCheck>,
}

fn rank_reference(
    config: &ExperimentConfig,
    theory: Option<&TheoryParams>,
    rank: usize,
) -> (Option<f64>, String, Option<f64>) {
    match (config.rule, theory) {
        (Rule::Plain, _) => (
            Some(PLAIN_EXPONENT),
            "plain PA n^(1/2)".into(),
            Some(TOLERANCES.plain_slope),
        ),
        (Rule::Max, Some(_)) if rank == 1 => (Some(1.0), "linear hub".into(), Some(TOLERANCES.linear_slope)),
        (Rule::Max, Some(t)) => (Some(t.alpha), "c^(d-1) d/2".into(), Some(TOLERANCES.alpha)),
        (Rule::Max, None) => (None, "none (d <= 2)".into(), None),
        (Rule::Min, _) => (None, "none (doubly logarithmic)".into(), None),
    }
}

/// Summarizes completed replicas of `config`.
pub fn summarize(config: &ExperimentConfig, replicas: &[CheckpointSeries]) -> Result<SummaryReport> {
    let mut notes = Vec::new();
    let theory = if config.rule == Rule::Max && config.d > 2 {
        Some(TheoryParams::new(config.d)?)
    } else {
        notes.push(format!(
            "theory constants omitted: they describe the max rule with d > 2 (rule = {}, d = {})",
            config.rule, config.d
        ));
        None
    };
    if let Some(t) = theory {
        notes
            .push("gamma lower reference (delta = 0.01): ".to_string() + &format_float(t.gamma_lower(0.01)?));
        notes.push(
            "last_change values are lower bounds for the time after which a rank is held for good".into(),
        );
    }

    let finals: Vec<_> = replicas.iter().filter_map(|s| s.last()).collect();
    let terminal_n = finals.first().map_or(0, |r| r.n);
    let terminal_m: Vec<Vec<u32>> = finals.iter().map(|r| r.m.clone()).collect();
    let terminal_m1_over_n: Vec<f64> = finals.iter().map(|r| r.m[0] as f64 / r.n as f64).collect();
    let mean_m1_over_n = mean(&terminal_m1_over_n);
    let x_star_deviation = theory.map(|t| mean_m1_over_n - t.x_star);

    let window = (config.window_lo, config.window_hi);
    let slopes = (1..=config.k)
        .map(|rank| {
            let fits: Vec<Option<SlopeFit>> =
                replicas.iter().map(|s| fit_slope(s, rank, window).ok()).collect();
            let hats: Vec<f64> = fits.iter().flatten().map(|f| f.alpha_hat).collect();
            let median_alpha_hat = (!hats.is_empty()).then(|| quantile(&hats, 0.5));
            let (reference, reference_label, tolerance) = rank_reference(config, theory.as_ref(), rank);
            let deviation = median_alpha_hat.zip(reference).map(|(m, r)| m - r);
            let within_tolerance = deviation.zip(tolerance).map(|(dev, tol)| dev.abs() <= tol);
            RankSlopes {
                rank,
                fits,
                median_alpha_hat,
                reference,
                reference_label,
                deviation,
                tolerance,
                within_tolerance,
            }
        })
        .collect();

    let hubs = (1..=config.k)
        .map(|rank| {
            let fractions: Vec<f64> = finals
                .iter()
                .map(|r| r.last_change[rank - 1] as f64 / r.n as f64)
                .collect();
            let unchanged = finals
                .iter()
                .filter(|r| 2 * r.last_change[rank - 1] <= r.n)
                .count();
            HubSummary {
                rank,
                last_change_quantiles: [
                    quantile(&fractions, 0.1),
                    quantile(&fractions, 0.5),
                    quantile(&fractions, 0.9),
                ],
                unchanged_second_half: unchanged as f64 / finals.len() as f64,
            }
        })
        .collect();

    let oracle = if config.d <= ORACLE_MAX_D {
        let k = config.k.min(3);
        let exact = exact_enumeration(config.rule, config.d, SUMMARY_ORACLE_N, k)?;
        let key = |s: &[u32]| Signature::of(s, k).with_l(1);
        let law: BTreeMap<_, BigRational> = exact.marginal(key);
        let mut stream = rng::from_seed(rng::replica_seed(config.seed, u64::MAX));
        let counts = simulate_counts(
            config.rule,
            config.d,
            SUMMARY_ORACLE_N,
            SUMMARY_ORACLE_REPLICAS,
            &mut stream,
            key,
        )?;
        Some(OracleCheck {
            n_max: SUMMARY_ORACLE_N,
            k,
            comparison: compare_mc_to_oracle(&counts, &law)?,
        })
    } else {
        notes.push(format!(
            "oracle check skipped: d = {} exceeds {ORACLE_MAX_D}",
            config.d
        ));
        None
    };

    Ok(SummaryReport {
        tool_version: TOOL_VERSION.to_string(),
        rng_algorithm: RNG_ALGORITHM.to_string(),
        config: config.clone(),
        theory,
        notes,
        tolerances: TOLERANCES,
        terminal_n,
        terminal_m,
        terminal_m1_over_n,
        mean_m1_over_n,
        x_star_deviation,
        slopes,
        hubs,
        oracle,
    })
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), format_float)
}

impl SummaryReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Human-readable rendering with the same fields as the JSON form.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "tool_version: {}", self.tool_version);
        let _ = writeln!(s, "rng_algorithm: {}", self.rng_algorithm);
        let _ = writeln!(s, "\n[config]");
        s.push_str(&self.config.to_file_string());
        let _ = writeln!(s, "\n[theory]");
        match &self.theory {
            Some(t) => {
                let _ = writeln!(s, "x_star: {}", format_float(t.x_star));
                let _ = writeln!(s, "c: {}", format_float(t.c));
                let _ = writeln!(s, "alpha: {}", format_float(t.alpha));
            }
            None => {
                let _ = writeln!(s, "(not applicable)");
            }
        }
        let _ = writeln!(s, "plain_baseline_exponent: {}", format_float(PLAIN_EXPONENT));
        for note in &self.notes {
            let _ = writeln!(s, "note: {note}");
        }
        let t = &self.tolerances;
        let _ = writeln!(s, "\n[tolerances]");
        let _ = writeln!(s, "x_star: {}", format_float(t.x_star));
        let _ = writeln!(s, "alpha: {}", format_float(t.alpha));
        let _ = writeln!(s, "linear_slope: {}", format_float(t.linear_slope));
        let _ = writeln!(s, "plain_slope: {}", format_float(t.plain_slope));

        let _ = writeln!(s, "\n[terminal]");
        let _ = writeln!(s, "n: {}", self.terminal_n);
        let _ = writeln!(s, "mean_m1_over_n: {}", format_float(self.mean_m1_over_n));
        let _ = writeln!(s, "x_star_deviation: {}", opt(self.x_star_deviation));
        let _ = writeln!(s, "replica  m1_over_n  M");
        for (i, (f, m)) in self.terminal_m1_over_n.iter().zip(&self.terminal_m).enumerate() {
            let ms: Vec<String> = m.iter().map(u32::to_string).collect();
            let _ = writeln!(s, "{i:>7}  {}  {}", format_float(*f), ms.join(" "));
        }

        let _ = writeln!(s, "\n[slopes]");
        let _ = writeln!(
            s,
            "rank  median_alpha_hat  reference  deviation  tolerance  ok  label"
        );
        for r in &self.slopes {
            let _ = writeln!(
                s,
                "{:>4}  {}  {}  {}  {}  {}  {}",
                r.rank,
                opt(r.median_alpha_hat),
                opt(r.reference),
                opt(r.deviation),
                opt(r.tolerance),
                r.within_tolerance.map_or("-".to_string(), |b| b.to_string()),
                r.reference_label
            );
        }
        let _ = writeln!(s, "replica  rank  alpha_hat  stderr  points");
        for r in &self.slopes {
            for (i, fit) in r.fits.iter().enumerate() {
                match fit {
                    Some(f) => {
                        let _ = writeln!(
                            s,
                            "{i:>7}  {:>4}  {}  {}  {}",
                            r.rank,
                            format_float(f.alpha_hat),
                            format_float(f.stderr),
                            f.points
                        );
                    }
                    None => {
                        let _ = writeln!(s, "{i:>7}  {:>4}  -  -  0", r.rank);
                    }
                }
            }
        }

        let _ = writeln!(s, "\n[hubs]");
        let _ = writeln!(
            s,
            "rank  last_change_q10  last_change_q50  last_change_q90  unchanged_second_half"
        );
        for h in &self.hubs {
            let q = h.last_change_quantiles;
            let _ = writeln!(
                s,
                "{:>4}  {}  {}  {}  {}",
                h.rank,
                format_float(q[0]),
                format_float(q[1]),
                format_float(q[2]),
                format_float(h.unchanged_second_half)
            );
        }

        let _ = writeln!(s, "\n[oracle]");
        match &self.oracle {
            Some(o) => {
                let c = &o.comparison;
                let _ = writeln!(s, "n_max: {}", o.n_max);
                let _ = writeln!(s, "k: {}", o.k);
                let _ = writeln!(s, "replicas: {}", c.replicas);
                let _ = writeln!(s, "total_variation: {}", format_float(c.total_variation));
                let _ = writeln!(s, "chi2_statistic: {}", format_float(c.chi2_statistic));
                let _ = writeln!(s, "chi2_dof: {}", c.chi2_dof);
                let _ = writeln!(s, "chi2_p_value: {}", format_float(c.chi2_p_value));
                let _ = writeln!(s, "passed: {}", c.passed);
            }
            None => {
                let _ = writeln!(s, "(skipped)");
            }
        }
        s
    }
}
