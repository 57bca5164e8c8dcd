use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use tsh_core::bandit::ProblemInstance;
use tsh_core::harness::{
    fit_log_slope, fit_power_exponent, log_growth_ratio, run_experiment_with, sweep_h,
    CheckpointSchedule, ExperimentConfig, RegretCurve, SweepRow, DEFAULT_TAIL_FRACTION,
};
use tsh_core::policy::{PolicyConfig, SelectionMode};
use tsh_core::theory::{classify_regime, RegimeLabel};
use tsh_core::Execution;

use crate::output::{
    curve_csv, num, opt_num, to_json, write_file, Envelope, LONG_HEADER, SUMMARY_HEADER,
};

/// Flags shared by `run` and `sweep` that describe one experiment.
#[derive(Debug, Clone, clap::Args)]
pub struct ExperimentArgs {
    /// Arm means, comma separated
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub mu: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub horizon: u64,
    #[arg(long, default_value_t = 100)]
    pub runs: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `geometric` or `linear:<k>`
    #[arg(long, default_value = "geometric", value_parser = parse_checkpoints)]
    pub checkpoints: CheckpointSchedule,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    /// Run replications on the calling thread only
    #[arg(long)]
    pub serial: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    /// Play each arm with probability proportional to P(best)^h
    Exact,
    /// Draw from each posterior and play the argmax (ignores --h)
    Baseline,
}

impl ExperimentArgs {
    pub fn execution(&self) -> Execution {
        if self.serial {
            Execution::Serial
        } else {
            Execution::Parallel
        }
    }

    pub fn build(&self, h: f64) -> Result<ExperimentConfig> {
        ensure!(!self.mu.is_empty(), "--mu is required");
        let instance = ProblemInstance::new(self.mu.clone())?;
        let mode = match self.mode {
            ModeArg::Exact => SelectionMode::ExactProbability,
            ModeArg::Baseline => SelectionMode::PosteriorDrawBaseline,
        };
        let policy = PolicyConfig::new(h, mode)?;
        let config = ExperimentConfig::new(instance, policy, self.horizon, self.runs, self.seed)?;
        Ok(config.with_checkpoints(self.checkpoints.points(self.horizon))?)
    }
}

pub fn parse_checkpoints(s: &str) -> Result<CheckpointSchedule, String> {
    match s.split_once(':') {
        None if s == "geometric" => Ok(CheckpointSchedule::Geometric),
        Some(("linear", k)) => match k.parse::<u64>() {
            Ok(k) if k > 0 => Ok(CheckpointSchedule::Linear(k)),
            _ => Err(format!("bad point count in '{s}'")),
        },
        _ => Err(format!("expected 'geometric' or 'linear:<k>', got '{s}'")),
    }
}

/// Reads the `config` field back out of a previously written envelope.
fn load_config<C: serde::de::DeserializeOwned>(path: &Path) -> Result<C> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let config = value
        .get("config")
        .with_context(|| format!("{} has no 'config' field", path.display()))?;
    Ok(C::deserialize(config)?)
}

fn revalidate(config: ExperimentConfig) -> Result<ExperimentConfig> {
    ProblemInstance::new(config.instance.means().to_vec())?;
    config.validate()?;
    Ok(config)
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub h: f64,
    /// Curve CSV path; the envelope goes next to it with a .json extension
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the JSON envelope to stdout
    #[arg(long)]
    pub json: bool,
    /// Replay the config embedded in an earlier envelope
    #[arg(long, conflicts_with = "mu")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct RunResults<'a> {
    curve: &'a RegretCurve,
    final_regret_mean: f64,
    final_stderr: f64,
    log_slope: Option<f64>,
    power_exponent: Option<f64>,
    growth_ratio: Option<f64>,
    predicted_regime: Option<RegimeLabel>,
}

fn predicted(config: &ExperimentConfig) -> Option<RegimeLabel> {
    match (config.instance.means(), config.policy.mode()) {
        ([mu1, mu2], SelectionMode::ExactProbability) => {
            classify_regime(*mu1, *mu2, config.policy.h()).ok()
        }
        _ => None,
    }
}

pub fn cmd_run(args: &RunArgs) -> Result<()> {
    let config = match &args.config {
        Some(path) => revalidate(load_config(path)?)?,
        None => args.experiment.build(args.h)?,
    };
    let started = Instant::now();
    let outcome = run_experiment_with(&config, args.experiment.execution())?;
    let wall_time = started.elapsed().as_secs_f64();

    let curve = &outcome.curve;
    let last = curve.last().expect("curve ends at the horizon");
    let results = RunResults {
        curve,
        final_regret_mean: last.mean_regret,
        final_stderr: last.stderr,
        log_slope: fit_log_slope(curve, DEFAULT_TAIL_FRACTION)
            .ok()
            .map(|f| f.slope),
        power_exponent: fit_power_exponent(curve, DEFAULT_TAIL_FRACTION).ok(),
        growth_ratio: log_growth_ratio(curve).ok(),
        predicted_regime: predicted(&config),
    };
    let envelope = Envelope::new("run", &config, results, wall_time);
    let csv = curve_csv(curve);

    match &args.out {
        Some(path) => {
            write_file(path, &csv)?;
            write_file(&path.with_extension("json"), &to_json(&envelope)?)?;
        }
        None if !args.json => print!("{csv}"),
        None => {}
    }
    if args.json {
        print!("{}", to_json(&envelope)?);
    } else if args.out.is_some() {
        eprintln!(
            "T = {}: mean regret {} (se {}), {} runs in {:.2}s",
            last.t,
            num(last.mean_regret),
            num(last.stderr),
            last.runs,
            wall_time
        );
    }
    Ok(())
}

#[derive(Debug, clap::Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// `start:stop:step`, both ends inclusive
    #[arg(long, value_parser = parse_grid_spec)]
    pub h_grid: GridSpec,
    /// Output directory
    #[arg(long, default_value = "sweep")]
    pub out: PathBuf,
    /// Also write a gnuplot script plotting every curve
    #[arg(long)]
    pub gnuplot: bool,
    /// Print the JSON envelope to stdout instead of the summary table
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

pub fn parse_grid_spec(s: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, step] = parts[..] else {
        return Err(format!("expected start:stop:step, got '{s}'"));
    };
    let f = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("'{v}': {e}"));
    Ok(GridSpec {
        start: f(start)?,
        stop: f(stop)?,
        step: f(step)?,
    })
}

const MAX_GRID_POINTS: usize = 10_000;

impl GridSpec {
    /// Grid values rounded to twelve significant digits, so `0.1:0.3:0.1`
    /// yields exactly `0.1, 0.2, 0.3`.
    pub fn values(&self) -> Result<Vec<f64>> {
        let GridSpec { start, stop, step } = *self;
        ensure!(
            start.is_finite() && stop.is_finite() && step.is_finite(),
            "h grid bounds must be finite"
        );
        ensure!(step > 0.0, "h grid step must be positive, got {step}");
        if start > stop {
            bail!("h grid {start}:{stop}:{step} is empty");
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        ensure!(
            count <= MAX_GRID_POINTS,
            "h grid has {count} points, limit is {MAX_GRID_POINTS}"
        );
        Ok((0..count)
            .map(|i| {
                num(start + i as f64 * step)
                    .parse()
                    .expect("formatted float parses")
            })
            .collect())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SweepConfig {
    base: ExperimentConfig,
    h_grid: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct SweepResults<'a> {
    rows: &'a [SweepRow],
}

fn curve_file_name(h: f64) -> String {
    format!("curve_h{}.csv", num(h))
}

fn summary_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for row in rows {
        let last = row.curve.last().expect("curve ends at the horizon");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            num(row.h),
            num(last.mean_regret),
            num(last.stderr),
            opt_num(row.log_slope),
            opt_num(row.power_exponent),
            row.predicted.map(|r| r.name()).unwrap_or("")
        );
    }
    out
}

fn long_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(LONG_HEADER);
    out.push('\n');
    for row in rows {
        for p in &row.curve.points {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                num(row.h),
                p.t,
                num(p.mean_regret),
                num(p.stderr)
            );
        }
    }
    out
}

fn gnuplot_script(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "set datafile separator ','\nset key left top\nset logscale x\n\
         set xlabel 't'\nset ylabel 'mean cumulative regret'\nplot \\\n",
    );
    let lines: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "  '{}' skip 1 using 1:2 with linespoints title 'h={}'",
                curve_file_name(r.h),
                num(r.h)
            )
        })
        .collect();
    out.push_str(&lines.join(", \\\n"));
    out.push('\n');
    out
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let h_grid = args.h_grid.values()?;
    let base = args.experiment.build(h_grid[0])?;
    let started = Instant::now();
    let rows = sweep_h(&base, &h_grid, args.experiment.execution())?;
    let wall_time = started.elapsed().as_secs_f64();

    let dir = &args.out;
    for row in &rows {
        write_file(&dir.join(curve_file_name(row.h)), &curve_csv(&row.curve))?;
    }
    let summary = summary_csv(&rows);
    write_file(&dir.join("summary.csv"), &summary)?;
    write_file(&dir.join("long.csv"), &long_csv(&rows))?;
    if args.gnuplot {
        write_file(&dir.join("plot.gp"), &gnuplot_script(&rows))?;
    }
    let envelope = Envelope::new(
        "sweep",
        SweepConfig {
            base,
            h_grid: h_grid.clone(),
        },
        SweepResults { rows: &rows },
        wall_time,
    );
    let json = to_json(&envelope)?;
    write_file(&dir.join("sweep.json"), &json)?;
    if args.json {
        print!("{json}");
    } else {
        print!("{summary}");
        eprintln!(
            "{} rows written to {} in {:.2}s",
            rows.len(),
            dir.display(),
            wall_time
        );
    }
    Ok(())
}
