//! Independent replicas and their on-disk layout.
//!
//! `out_dir/config.txt` echoes the resolved configuration,
//! `out_dir/replica_<i>.csv` holds the checkpoints of replica `i`, and
//! `out_dir/report.txt` / `out_dir/report.json` hold the summary.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harness::config::{ConfigOverrides, ExperimentConfig};
use crate::harness::report::{summarize, SummaryReport};
use crate::process::run_with_schedule;
use crate::stats::{CheckpointSchedule, CheckpointSeries};

pub const CONFIG_FILE: &str = "config.txt";
pub const REPORT_TEXT_FILE: &str = "report.txt";
pub const REPORT_JSON_FILE: &str = "report.json";

pub fn replica_file(out_dir: &Path, index: u64) -> PathBuf {
    out_dir.join(format!("replica_{index}.csv"))
}

/// Runs replica `index` of `config` in memory.
pub fn run_replica(config: &ExperimentConfig, index: u64) -> Result<CheckpointSeries> {
    let schedule = CheckpointSchedule::new(config.checkpoint_ratio, config.horizon)?;
    run_with_schedule(&config.model(index), schedule, &mut [])
}

/// Runs all replicas in memory, in parallel.
pub fn run_replicas(config: &ExperimentConfig) -> Result<Vec<CheckpointSeries>> {
    config.validate()?;
    (0..config.replicas)
        .into_par_iter()
        .map(|i| run_replica(config, i))
        .collect()
}

pub fn write_series(path: &Path, series: &CheckpointSeries) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    series.write_csv(std::io::BufWriter::new(file))
}

pub fn read_series(path: &Path) -> Result<CheckpointSeries> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    CheckpointSeries::read_csv(std::io::BufReader::new(file))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_report(out_dir: &Path, report: &SummaryReport) -> Result<()> {
    write_text(&out_dir.join(REPORT_TEXT_FILE), &report.to_text())?;
    write_text(&out_dir.join(REPORT_JSON_FILE), &report.to_json()?)
}

#[derive(Debug, Clone)]
pub struct EnsembleOutput {
    pub series: Vec<CheckpointSeries>,
    pub report: SummaryReport,
}

/// Runs the ensemble, writing each replica's CSV as soon as it finishes and
/// the report once all are done. Files of replicas that completed before a
/// failure stay on disk.
pub fn run_ensemble(config: &ExperimentConfig) -> Result<EnsembleOutput> {
    config.validate()?;
    let out = &config.out_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_text(&out.join(CONFIG_FILE), &config.to_file_string())?;
    let series = (0..config.replicas)
        .into_par_iter()
        .map(|i| {
            let s = run_replica(config, i)?;
            write_series(&replica_file(out, i), &s)?;
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    let report = summarize(config, &series)?;
    write_report(out, &report)?;
    Ok(EnsembleOutput { series, report })
}

/// Reads back the configuration and replica series written by [`run_ensemble`].
pub fn load_ensemble(out_dir: &Path) -> Result<(ExperimentConfig, Vec<CheckpointSeries>)> {
    let config = ConfigOverrides::load(&out_dir.join(CONFIG_FILE))?.resolve()?;
    let series = (0..config.replicas)
        .map(|i| read_series(&replica_file(out_dir, i)))
        .collect::<Result<Vec<_>>>()?;
    Ok((config, series))
}
