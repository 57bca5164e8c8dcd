//! Seeded Monte Carlo experiments over the h-perturbed policy.
//!
//! Each run owns two streams, one for rewards and one for the policy, keyed by
//! `(master_seed, run_index)`. Runs are independent work units, and their
//! results are reduced in `run_index` order, so serial and parallel execution
//! produce identical curves.

mod fit;
pub mod stats;

pub use fit::{fit_log_slope, fit_power_exponent, log_growth_ratio, LogFit};

use serde::{Deserialize, Serialize};

use crate::bandit::{
    mix64, pull, PosteriorState, ProblemInstance, RandomStream, StepRecord, StreamPurpose,
};
use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::policy::{select_arm, selection_from_ln_pair, PolicyConfig, SelectionMode};
use crate::posterior::ExceedanceTracker;
use crate::theory::{classify_regime, phase_length, RegimeLabel};
use crate::Execution;

/// Tail fraction used by sweeps for the growth fits.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;

/// How checkpoint times are laid out over `[1, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckpointSchedule {
    /// Powers of two below `T`, plus `floor(T/2)` and `T`.
    Geometric,
    /// `k` evenly spaced points ending at `T`.
    Linear(u64),
}

impl CheckpointSchedule {
    pub fn points(self, horizon: u64) -> Vec<u64> {
        let mut pts = match self {
            CheckpointSchedule::Geometric => {
                let mut v: Vec<u64> = std::iter::successors(Some(1u64), |t| t.checked_mul(2))
                    .take_while(|&t| t < horizon)
                    .collect();
                if horizon >= 2 {
                    v.push(horizon / 2);
                }
                v.push(horizon);
                v
            }
            CheckpointSchedule::Linear(k) => {
                let k = k.max(1);
                (1..=k)
                    .map(|i| ((i as u128 * horizon as u128) / k as u128) as u64)
                    .filter(|&t| t >= 1)
                    .collect()
            }
        };
        pts.sort_unstable();
        pts.dedup();
        pts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub instance: ProblemInstance,
    pub policy: PolicyConfig,
    pub horizon: u64,
    pub runs: u64,
    pub master_seed: u64,
    pub checkpoints: Vec<u64>,
}

impl ExperimentConfig {
    /// Config with the geometric checkpoint schedule.
    pub fn new(
        instance: ProblemInstance,
        policy: PolicyConfig,
        horizon: u64,
        runs: u64,
        master_seed: u64,
    ) -> Result<Self> {
        let config = Self {
            instance,
            policy,
            horizon,
            runs,
            master_seed,
            checkpoints: CheckpointSchedule::Geometric.points(horizon),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_checkpoints(mut self, checkpoints: Vec<u64>) -> Result<Self> {
        self.checkpoints = checkpoints;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidConfig("horizon must be at least 1".into()));
        }
        if self.runs == 0 {
            return Err(Error::InvalidConfig("runs must be at least 1".into()));
        }
        let cps = &self.checkpoints;
        if cps.is_empty() || cps[0] == 0 || cps.last() != Some(&self.horizon) {
            return Err(Error::InvalidConfig(format!(
                "checkpoints must lie in [1, {}] and end at the horizon",
                self.horizon
            )));
        }
        if cps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "checkpoints must be strictly increasing".into(),
            ));
        }
        PolicyConfig::new(self.policy.h(), self.policy.mode())?;
        Ok(())
    }
}

/// Arm-2 play counts between consecutive arm-1 plays for one episode.
///
/// "Arm 1" is the optimal arm of the instance; every other arm counts as
/// "arm 2". `gaps[j]` is the number of non-optimal plays just before the
/// `(j+1)`-th optimal play, so `gaps[0]` is the run before the first optimal
/// play and `gaps[1..]` are the between-play gaps. Always
/// `optimal_plays + sum(gaps) + trailing = T`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapStatistics {
    pub gaps: Vec<u64>,
    pub trailing: u64,
    pub optimal_plays: u64,
    /// `N(T)` for this instance, when the gap is positive and `T >= 2`.
    pub phase_length: Option<u64>,
    /// Optimal plays at the step where non-optimal plays reached `N(T)`.
    pub optimal_plays_at_phase_end: Option<u64>,
}

impl GapStatistics {
    pub fn total_steps(&self) -> u64 {
        self.optimal_plays + self.gaps.iter().sum::<u64>() + self.trailing
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub records: Vec<StepRecord>,
    pub gaps: GapStatistics,
}

/// Runs one episode, calling `on_step` after each update.
fn simulate<F>(config: &ExperimentConfig, run_index: u64, mut on_step: F) -> Result<PosteriorState>
where
    F: FnMut(&StepRecord, &PosteriorState),
{
    let instance = &config.instance;
    let gaps = instance.gaps();
    let mut rewards = RandomStream::new(config.master_seed, run_index, StreamPurpose::Rewards);
    let mut choices = RandomStream::new(config.master_seed, run_index, StreamPurpose::Policy);
    let mut state = PosteriorState::new(instance.arms());
    let fast_path = instance.arms() == 2 && config.policy.mode() == SelectionMode::ExactProbability;
    let mut tracker = ExceedanceTracker::default();
    let h = config.policy.h();

    for t in 1..=config.horizon {
        let arm = if fast_path {
            let s = tracker.state();
            let w = selection_from_ln_pair(s.ln_prob(), s.ln_complement(), h);
            if choices.uniform() < w {
                0
            } else {
                1
            }
        } else {
            select_arm(&state, &config.policy, &mut choices)?
        };
        let reward = pull(instance, arm, &mut rewards)?;
        state.update(arm, reward)?;
        if fast_path {
            tracker.observe(arm, reward)?;
        }
        let record = StepRecord {
            t,
            chosen_arm: arm,
            reward,
            instant_pseudo_regret: gaps[arm],
        };
        on_step(&record, &state);
    }
    Ok(state)
}

/// Simulates `config.horizon` steps for one run.
pub fn run_episode(config: &ExperimentConfig, run_index: u64) -> Result<Episode> {
    config.validate()?;
    let best = config.instance.best_arm();
    let n_phase = (config.instance.arms() == 2)
        .then(|| phase_length(config.horizon as f64, config.instance.max_gap()).ok())
        .flatten();

    let mut records = Vec::with_capacity(config.horizon as usize);
    let mut gaps = Vec::new();
    let mut current_gap = 0u64;
    let mut other_plays = 0u64;
    let mut optimal_plays = 0u64;
    let mut phase_end = None;
    simulate(config, run_index, |record, _| {
        records.push(*record);
        if record.chosen_arm == best {
            gaps.push(current_gap);
            current_gap = 0;
            optimal_plays += 1;
        } else {
            current_gap += 1;
            other_plays += 1;
            if Some(other_plays) == n_phase {
                phase_end = Some(optimal_plays);
            }
        }
    })?;
    Ok(Episode {
        records,
        gaps: GapStatistics {
            gaps,
            trailing: current_gap,
            optimal_plays,
            phase_length: n_phase,
            optimal_plays_at_phase_end: phase_end,
        },
    })
}

/// Cumulative pseudo-regret of one run at each checkpoint.
pub fn run_regret_path(config: &ExperimentConfig, run_index: u64) -> Result<Vec<f64>> {
    let gaps = config.instance.gaps();
    let mut out = Vec::with_capacity(config.checkpoints.len());
    let mut next = 0usize;
    simulate(config, run_index, |record, state| {
        if config.checkpoints.get(next) == Some(&record.t) {
            // sum of plays * gap, exactly zero on zero-gap instances
            let regret = state
                .plays()
                .iter()
                .zip(&gaps)
                .map(|(&j, &g)| j as f64 * g)
                .sum();
            out.push(regret);
            next += 1;
        }
    })?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: u64,
    pub mean_regret: f64,
    pub stderr: f64,
    pub runs: u64,
}

/// Mean cumulative pseudo-regret per checkpoint across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretCurve {
    pub points: Vec<CurvePoint>,
}

impl RegretCurve {
    /// Aggregates a runs-by-checkpoints matrix, reducing rows in order.
    pub fn from_paths(checkpoints: &[u64], paths: &[Vec<f64>]) -> Self {
        let runs = paths.len();
        let points = checkpoints
            .iter()
            .enumerate()
            .map(|(k, &t)| {
                let mean = paths.iter().map(|p| p[k]).sum::<f64>() / runs as f64;
                let stderr = if runs > 1 {
                    let ss: f64 = paths.iter().map(|p| (p[k] - mean).powi(2)).sum();
                    (ss / (runs - 1) as f64).sqrt() / (runs as f64).sqrt()
                } else {
                    0.0
                };
                CurvePoint {
                    t,
                    mean_regret: mean,
                    stderr,
                    runs: runs as u64,
                }
            })
            .collect();
        Self { points }
    }

    pub fn at(&self, t: u64) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.t == t)
    }

    pub fn last(&self) -> Option<&CurvePoint> {
        self.points.last()
    }
}

/// Curve plus the per-run checkpoint values it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub curve: RegretCurve,
    /// `paths[run_index][checkpoint]`.
    pub paths: Vec<Vec<f64>>,
}

impl ExperimentOutcome {
    pub fn final_regrets(&self) -> Vec<f64> {
        self.paths
            .iter()
            .map(|p| *p.last().expect("at least one checkpoint"))
            .collect()
    }
}

pub fn run_experiment_with(
    config: &ExperimentConfig,
    mode: Execution,
) -> Result<ExperimentOutcome> {
    config.validate()?;
    let paths = map_indexed(config.runs as usize, mode, |run| {
        run_regret_path(config, run as u64)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentOutcome {
        curve: RegretCurve::from_paths(&config.checkpoints, &paths),
        paths,
    })
}

/// Runs every replication (in parallel when available) and aggregates them.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RegretCurve> {
    Ok(run_experiment_with(config, Execution::Parallel)?.curve)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub h: f64,
    /// Resolved config of this row, including its derived seed.
    pub config: ExperimentConfig,
    pub curve: RegretCurve,
    pub log_slope: Option<f64>,
    pub power_exponent: Option<f64>,
    /// `None` unless the instance has two arms with `1 > mu1 > mu2 > 0`.
    pub predicted: Option<RegimeLabel>,
}

/// Seed for the sweep row with exponent `h`. Keyed by the value rather than
/// its position, so editing the grid leaves other rows unchanged.
pub fn sweep_row_seed(master_seed: u64, h: f64) -> u64 {
    mix64(master_seed ^ mix64(h.to_bits()))
}

/// One experiment per `h`, each on its own derived seed.
pub fn sweep_h(base: &ExperimentConfig, h_list: &[f64], mode: Execution) -> Result<Vec<SweepRow>> {
    h_list
        .iter()
        .map(|&h| {
            let config = ExperimentConfig {
                policy: base.policy.with_h(h)?,
                master_seed: sweep_row_seed(base.master_seed, h),
                ..base.clone()
            };
            let curve = run_experiment_with(&config, mode)?.curve;
            let means = config.instance.means();
            let predicted = (means.len() == 2)
                .then(|| classify_regime(means[0], means[1], h).ok())
                .flatten();
            Ok(SweepRow {
                h,
                log_slope: fit_log_slope(&curve, DEFAULT_TAIL_FRACTION)
                    .ok()
                    .map(|f| f.slope),
                power_exponent: fit_power_exponent(&curve, DEFAULT_TAIL_FRACTION).ok(),
                predicted,
                config,
                curve,
            })
        })
        .collect()
}
