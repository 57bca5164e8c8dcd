//! Bernoulli bandit environment, posterior bookkeeping and seeded streams.
//!
//! Arms are indexed from zero. Arm `0` plays the role of the optimal arm in
//! every two-arm result of the theory module.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::posterior::BetaParams;

/// True arm means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    means: Vec<f64>,
}

impl ProblemInstance {
    pub fn new(means: Vec<f64>) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::TooFewArms(means.len()));
        }
        for &m in &means {
            check_probability("mu", m)?;
        }
        Ok(Self { means })
    }

    pub fn two_arm(mu1: f64, mu2: f64) -> Result<Self> {
        Self::new(vec![mu1, mu2])
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn arms(&self) -> usize {
        self.means.len()
    }

    pub fn best_mean(&self) -> f64 {
        self.means.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the highest mean; ties go to the lowest index.
    pub fn best_arm(&self) -> usize {
        let best = self.best_mean();
        self.means.iter().position(|&m| m == best).unwrap_or(0)
    }

    /// Per-arm gaps `mu_best - mu_i`.
    pub fn gaps(&self) -> Vec<f64> {
        let best = self.best_mean();
        self.means.iter().map(|m| best - m).collect()
    }

    pub fn max_gap(&self) -> f64 {
        self.gaps().into_iter().fold(0.0, f64::max)
    }

    /// `mu1 - mu2` for a two-arm instance.
    pub fn delta(&self) -> f64 {
        self.means[0] - self.means[1]
    }

    /// Midpoint `(mu1 + mu2) / 2` for a two-arm instance.
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.means[0] + self.means[1])
    }

    /// True when arm 0 strictly beats every other arm.
    pub fn first_arm_unique_optimum(&self) -> bool {
        self.means[1..].iter().all(|&m| self.means[0] > m)
    }
}

/// Play and success counts per arm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosteriorState {
    plays: Vec<u64>,
    successes: Vec<u64>,
}

impl PosteriorState {
    pub fn new(arms: usize) -> Self {
        Self {
            plays: vec![0; arms],
            successes: vec![0; arms],
        }
    }

    pub fn from_counts(plays: Vec<u64>, successes: Vec<u64>) -> Result<Self> {
        if plays.len() != successes.len() {
            return Err(Error::InvalidConfig(
                "plays and successes differ in length".into(),
            ));
        }
        if plays.iter().zip(&successes).any(|(j, s)| s > j) {
            return Err(Error::InvalidConfig("successes exceed plays".into()));
        }
        Ok(Self { plays, successes })
    }

    pub fn arms(&self) -> usize {
        self.plays.len()
    }

    pub fn plays(&self) -> &[u64] {
        &self.plays
    }

    pub fn successes(&self) -> &[u64] {
        &self.successes
    }

    pub fn total_plays(&self) -> u64 {
        self.plays.iter().sum()
    }

    pub fn posterior(&self, arm: usize) -> BetaParams {
        BetaParams::from_counts(self.successes[arm], self.plays[arm] - self.successes[arm])
    }

    pub fn posteriors(&self) -> Vec<BetaParams> {
        (0..self.arms()).map(|i| self.posterior(i)).collect()
    }

    /// Records one reward for `arm`.
    pub fn update(&mut self, arm: usize, reward: bool) -> Result<()> {
        if arm >= self.arms() {
            return Err(Error::ArmOutOfRange {
                arm,
                arms: self.arms(),
            });
        }
        self.plays[arm] += 1;
        if reward {
            self.successes[arm] += 1;
        }
        Ok(())
    }
}

/// What a stream is used for within one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StreamPurpose {
    Rewards,
    Policy,
    Reference,
}

impl StreamPurpose {
    fn tag(self) -> u64 {
        match self {
            StreamPurpose::Rewards => 0x5245_5741_5244_5321, // "REWARDS!"
            StreamPurpose::Policy => 0x504f_4c49_4359_2121,  // "POLICY!!"
            StreamPurpose::Reference => 0x5245_4645_5245_4e43, // "REFERENC"
        }
    }
}

/// SplitMix64 finalizer. Used to derive stream identifiers from
/// `(run_index, purpose)` and sub-seeds from a master seed.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A reproducible random stream keyed by `(master_seed, run_index, purpose)`.
///
/// The master seed keys a ChaCha8 generator; `mix64(mix64(run_index) ^ tag)`
/// selects one of its 2^64 independent streams.
#[derive(Debug, Clone)]
pub struct RandomStream {
    master_seed: u64,
    run_index: u64,
    purpose: StreamPurpose,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(master_seed: u64, run_index: u64, purpose: StreamPurpose) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(mix64(mix64(run_index) ^ purpose.tag()));
        Self {
            master_seed,
            run_index,
            purpose,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn run_index(&self) -> u64 {
        self.run_index
    }

    pub fn purpose(&self) -> StreamPurpose {
        self.purpose
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Draws a Bernoulli(`mu_arm`) reward.
pub fn pull(instance: &ProblemInstance, arm: usize, rng: &mut RandomStream) -> Result<bool> {
    let mu = *instance.means.get(arm).ok_or(Error::ArmOutOfRange {
        arm,
        arms: instance.arms(),
    })?;
    Ok(rng.uniform() < mu)
}

/// One simulated step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based time index.
    pub t: u64,
    pub chosen_arm: usize,
    pub reward: bool,
    /// `mu_best - mu_chosen`.
    pub instant_pseudo_regret: f64,
}
