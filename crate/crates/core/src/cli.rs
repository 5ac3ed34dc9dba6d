//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on invalid usage.
//! Flags mirror the configuration-file keys and override values read from
//! `--config`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::error::{Error, Result};
use crate::harness::compare::{ks_distance, mean, std_dev};
use crate::harness::config::{ConfigOverrides, ExperimentConfig};
use crate::harness::ensemble::{self, load_ensemble, run_ensemble, CONFIG_FILE};
use crate::harness::oracle::{exact_enumeration, Signature};
use crate::harness::report::summarize;
use crate::process::Rule;
use crate::rng::{self, RNG_ALGORITHM};
use crate::stats::format_float;
use crate::theory::{self, TheoryParams};

#[derive(Debug, Parser)]
#[command(
    name = "maxchoice",
    version,
    about = "Max-choice preferential attachment trees: simulation and checks"
)]
pub struct Cli {
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one replica and write its checkpoint CSV.
    Simulate(ModelFlags),
    /// Run independent replicas and write per-replica CSVs and a summary report.
    Ensemble(EnsembleFlags),
    /// Print x*, c, alpha and the analytic checks for one d.
    Theory(TheoryFlags),
    /// Print the exact small-n law of the top degrees.
    Oracle(OracleFlags),
    /// Simulate a two-colour Pólya urn.
    Urn(UrnFlags),
    /// Rebuild the summary report of an ensemble directory.
    Report(ReportFlags),
}

#[derive(Debug, Args)]
pub struct ModelFlags {
    /// Configuration file with key = value lines; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Attachment rule: max, min or plain.
    #[arg(long)]
    pub rule: Option<Rule>,
    /// Candidates drawn per step.
    #[arg(long)]
    pub d: Option<u32>,
    /// Number of tracked degree ranks.
    #[arg(long)]
    pub k: Option<usize>,
    /// Final step count.
    #[arg(long = "horizon", visible_alias = "n")]
    pub horizon: Option<u64>,
    /// Base seed; replica i uses a seed mixed from it and i.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Growth factor between consecutive checkpoints.
    #[arg(long)]
    pub checkpoint_ratio: Option<f64>,
    /// Lower end of the slope-fit window.
    #[arg(long)]
    pub window_lo: Option<u64>,
    /// Upper end of the slope-fit window.
    #[arg(long)]
    pub window_hi: Option<u64>,
    /// Output directory.
    #[arg(long = "out-dir", visible_alias = "out")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnsembleFlags {
    #[command(flatten)]
    pub model: ModelFlags,
    /// Number of independent replicas.
    #[arg(long)]
    pub replicas: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TheoryFlags {
    /// Candidates drawn per step; must exceed 2.
    #[arg(long)]
    pub d: u32,
}

#[derive(Debug, Args)]
pub struct OracleFlags {
    /// Candidates drawn per step.
    #[arg(long)]
    pub d: u32,
    /// Number of steps (at most 8).
    #[arg(long)]
    pub n: u64,
    /// Number of tracked degree ranks.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Attachment rule: max, min or plain.
    #[arg(long, default_value = "max")]
    pub rule: Rule,
}

#[derive(Debug, Args)]
pub struct UrnFlags {
    /// Initial balls of the tracked colour.
    #[arg(long)]
    pub a: u64,
    /// Initial balls of the other colour.
    #[arg(long)]
    pub b: u64,
    /// Draws per replica.
    #[arg(long)]
    pub steps: u64,
    #[arg(long, default_value_t = 1)]
    pub replicas: u64,
    /// Base seed for the urn draws.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ReportFlags {
    /// Directory written by the ensemble subcommand.
    #[arg(long = "out-dir", visible_alias = "out")]
    pub out_dir: PathBuf,
}

impl ModelFlags {
    fn overrides(&self, replicas: Option<u64>) -> Result<ConfigOverrides> {
        let file = match &self.config {
            Some(path) => ConfigOverrides::load(path)?,
            None => ConfigOverrides::default(),
        };
        Ok(file.overlay(ConfigOverrides {
            rule: self.rule,
            d: self.d,
            k: self.k,
            horizon: self.horizon,
            replicas,
            seed: self.seed,
            checkpoint_ratio: self.checkpoint_ratio,
            window_lo: self.window_lo,
            window_hi: self.window_hi,
            out_dir: self.out_dir.clone(),
        }))
    }
}

/// Maps an error to the exit-code convention.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Usage(_) | Error::Domain(_) | Error::Config(_) => 2,
        _ => 1,
    }
}

/// Parses `args` and runs the command, writing human output to `out`.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Simulate(flags) => simulate(flags, cli.json, out),
        Command::Ensemble(flags) => run_ensemble_cmd(flags, cli.json, out),
        Command::Theory(flags) => theory_cmd(flags, cli.json, out),
        Command::Oracle(flags) => oracle_cmd(flags, cli.json, out),
        Command::Urn(flags) => urn_cmd(flags, cli.json, out),
        Command::Report(flags) => report_cmd(flags, cli.json, out),
    }
}

/// Peak resident set size of this process, where the platform reports it.
pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn simulate(flags: &ModelFlags, json: bool, out: &mut dyn Write) -> Result<()> {
    let overrides = flags.overrides(Some(1))?;
    if overrides.horizon.is_none() {
        return Err(Error::Usage("simulate needs --n (or horizon in --config)".into()));
    }
    let config = overrides.resolve()?;
    let dir = &config.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    std::fs::write(dir.join(CONFIG_FILE), config.to_file_string()).map_err(|e| Error::io(dir, e))?;

    let started = Instant::now();
    let series = ensemble::run_replica(&config, 0)?;
    let elapsed = started.elapsed().as_secs_f64();
    let csv_path = ensemble::replica_file(dir, 0);
    ensemble::write_series(&csv_path, &series)?;

    let last = series.last().expect("at least one checkpoint");
    let theory = theory_for(&config);
    let notice = theory.is_none().then(|| theory_notice(&config));
    if json {
        let value = json!({
            "config": config,
            "rng_algorithm": RNG_ALGORITHM,
            "csv": csv_path,
            "n": last.n,
            "m": last.m,
            "l_k": last.l_k,
            "c_hat_k": last.c_hat(config.k),
            "holders": last.holders,
            "last_change": last.last_change,
            "theory": theory,
            "notice": notice,
            "elapsed_seconds": elapsed,
            "peak_rss_bytes": peak_rss_bytes(),
        });
        return emit(out, &(serde_json::to_string_pretty(&value)? + "\n"));
    }
    let mut s = String::from("[config]\n");
    s += &config.to_file_string();
    s += &format!("rng_algorithm = {RNG_ALGORITHM}\n\n[result]\n");
    s += &format!("csv: {}\n", csv_path.display());
    s += &format!("n: {}\n", last.n);
    for (l, m) in last.m.iter().enumerate() {
        s += &format!("M_{}: {m}\n", l + 1);
    }
    s += &format!("L_{}: {}\n", config.k, last.l_k);
    s += &format!("c_hat_{}: {}\n", config.k, format_float(last.c_hat(config.k)));
    s += &format!("M_1/n: {}\n", format_float(last.m[0] as f64 / last.n as f64));
    match (&theory, &notice) {
        (Some(t), _) => {
            s += &format!(
                "x_star: {}\nalpha: {}\n",
                format_float(t.x_star),
                format_float(t.alpha)
            );
        }
        (None, Some(n)) => s += &format!("notice: {n}\n"),
        _ => {}
    }
    s += &format!("elapsed_seconds: {elapsed:.3}\n");
    if let Some(rss) = peak_rss_bytes() {
        s += &format!("peak_rss_bytes: {rss}\n");
    }
    emit(out, &s)
}

fn theory_for(config: &ExperimentConfig) -> Option<TheoryParams> {
    (config.rule == Rule::Max && config.d > 2)
        .then(|| TheoryParams::new(config.d).ok())
        .flatten()
}

fn theory_notice(config: &ExperimentConfig) -> String {
    format!(
        "theory columns omitted: the growth exponents describe the max rule with d > 2 (rule = {}, d = {})",
        config.rule, config.d
    )
}

fn run_ensemble_cmd(flags: &EnsembleFlags, json: bool, out: &mut dyn Write) -> Result<()> {
    let config = flags.model.overrides(flags.replicas)?.resolve()?;
    let result = run_ensemble(&config)?;
    if json {
        emit(out, &result.report.to_json()?)
    } else {
        emit(out, &result.report.to_text())
    }
}

fn report_cmd(flags: &ReportFlags, json: bool, out: &mut dyn Write) -> Result<()> {
    let (config, series) = load_ensemble(&flags.out_dir)?;
    let report = summarize(&config, &series)?;
    ensemble::write_report(&flags.out_dir, &report)?;
    if json {
        emit(out, &report.to_json()?)
    } else {
        emit(out, &report.to_text())
    }
}

fn theory_cmd(flags: &TheoryFlags, json: bool, out: &mut dyn Write) -> Result<()> {
    let d = flags.d;
    let t = TheoryParams::new(d)?;
    let c_bound = theory::check_c_bound(d)?;
    let bracket = t.x_star > 1.0 - 1.0 / d as f64 && t.x_star < 1.0;
    // f(x, c) < 1 on [0, 2c]: the drift of every lower rank stays below n^1
    let f_below_one = theory::check_f_below_one(t.c, d, 10_001)?;
    let residual = theory::fixed_point_residual(t.x_star, d);
    if json {
        let value = json!({
            "d": d,
            "x_star": t.x_star,
            "c": t.c,
            "alpha": t.alpha,
            "fixed_point_residual": residual,
            "c_pow_d_minus_1_below_2_over_d": c_bound,
            "x_star_in_bracket": bracket,
            "f_below_one_at_c": f_below_one,
        });
        return emit(out, &(serde_json::to_string_pretty(&value)? + "\n"));
    }
    let s = format!(
        "d: {d}\nx_star: {}\nc: {}\nalpha: {}\nfixed_point_residual: {}\n\
         c^(d-1) < 2/d: {c_bound}\n1 - 1/d < x_star < 1: {bracket}\nf(x, c) < 1 on [0, 2c]: {f_below_one}\n",
        format_float(t.x_star),
        format_float(t.c),
        format_float(t.alpha),
        format_float(residual),
    );
    emit(out, &s)
}

fn oracle_cmd(flags: &OracleFlags, json: bool, out: &mut dyn Write) -> Result<()> {
    let exact = exact_enumeration(flags.rule, flags.d, flags.n, flags.k)?;
    let m1 = exact.marginal(|s| s[0]);
    let sigs = exact.signatures();
    if json {
        let value = json!({
            "rule": flags.rule,
            "d": flags.d,
            "n": flags.n,
            "k": flags.k,
            "total": exact.total().to_string(),
            "m1": m1.iter().map(|(g, p)| (g.to_string(), p.to_string())).collect::<BTreeMap<_, _>>(),
            "signatures": sigs.iter().map(|(s, p)| json!({"m": s.m, "l": s.l, "p": p.to_string()})).collect::<Vec<_>>(),
        });
        return emit(out, &(serde_json::to_string_pretty(&value)? + "\n"));
    }
    let mut s = format!(
        "rule: {}\nd: {}\nn: {}\nk: {}\n",
        flags.rule, flags.d, flags.n, flags.k
    );
    for (g, p) in &m1 {
        s += &format!("P(M_1={g}) = {p}\n");
    }
    s += "M_1..M_k | L_1..L_k | probability\n";
    for (Signature { m, l }, p) in &sigs {
        let m: Vec<String> = m.iter().map(u32::to_string).collect();
        let l: Vec<String> = l.iter().map(u32::to_string).collect();
        s += &format!("{} | {} | {p}\n", m.join(" "), l.join(" "));
    }
    s += &format!("total: {}\n", exact.total());
    emit(out, &s)
}

fn urn_cmd(flags: &UrnFlags, json: bool, out: &mut dyn Write) -> Result<()> {
    if flags.replicas < 1 {
        return Err(Error::Usage("replicas must be at least 1".into()));
    }
    let fractions: Vec<f64> = (0..flags.replicas)
        .map(|i| {
            let mut r = rng::from_seed(rng::replica_seed(flags.seed, i));
            theory::polya_urn_run(flags.a, flags.b, flags.steps, &mut r)
        })
        .collect::<Result<_>>()?;
    let beta = statrs::distribution::Beta::new(flags.a as f64, flags.b as f64)
        .map_err(|e| Error::Domain(e.to_string()))?;
    let ks = (flags.replicas > 1).then(|| {
        use statrs::distribution::ContinuousCDF;
        ks_distance(&fractions, |x| beta.cdf(x.clamp(0.0, 1.0)))
    });
    let m = mean(&fractions);
    let sd = (flags.replicas > 1).then(|| std_dev(&fractions));
    let beta_mean = flags.a as f64 / (flags.a + flags.b) as f64;
    if json {
        let value = json!({
            "a": flags.a, "b": flags.b, "steps": flags.steps, "replicas": flags.replicas,
            "seed": flags.seed, "rng_algorithm": RNG_ALGORITHM,
            "fraction": (flags.replicas == 1).then(|| fractions[0]),
            "mean": m, "std_dev": sd, "beta_mean": beta_mean, "ks_distance_to_beta": ks,
        });
        return emit(out, &(serde_json::to_string_pretty(&value)? + "\n"));
    }
    let mut s = format!(
        "a: {}\nb: {}\nsteps: {}\nreplicas: {}\n",
        flags.a, flags.b, flags.steps, flags.replicas
    );
    if flags.replicas == 1 {
        s += &format!("fraction: {}\n", format_float(fractions[0]));
    } else {
        s += &format!(
            "mean: {}\nbeta_mean: {}\n",
            format_float(m),
            format_float(beta_mean)
        );
        if let Some(sd) = sd {
            s += &format!("std_dev: {}\n", format_float(sd));
        }
        if let Some(ks) = ks {
            s += &format!("ks_distance_to_beta: {}\n", format_float(ks));
        }
    }
    emit(out, &s)
}
