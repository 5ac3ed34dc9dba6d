//! Ensembles, the exact small-`n` oracle, slope estimation and reports.

pub mod compare;
pub mod config;
pub mod ensemble;
pub mod oracle;
pub mod report;
pub mod slope;

pub use compare::{compare_mc_to_oracle, ks_uniform, OracleComparison};
pub use config::{ConfigOverrides, ExperimentConfig};
pub use ensemble::{load_ensemble, run_ensemble, run_replicas, EnsembleOutput};
pub use oracle::{exact_enumeration, ExactDistribution, Signature};
pub use report::{summarize, SummaryReport};
pub use slope::{fit_slope, SlopeFit};
