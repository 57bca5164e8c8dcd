//! Thompson Sampling with an exponent `h` on the best-arm probabilities.
//!
//! Arm `i` is played with probability `P_i^h / sum_j P_j^h`, where `P_i` is
//! the posterior probability that arm `i` has the largest mean. `h = 1` is
//! standard Thompson Sampling; larger `h` exploits the current leader harder.

use serde::{Deserialize, Serialize};

use crate::bandit::{PosteriorState, RandomStream};
use crate::error::{Error, Result};
use crate::posterior::{best_arm_probabilities, beta_sample, ln_exceedance_pair};

/// Normalized weights below this are flushed to zero.
const WEIGHT_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    /// Categorical draw from the exact `P_i^h` weights.
    ExactProbability,
    /// Classic Thompson Sampling: argmax of one posterior draw per arm. Ignores `h`.
    PosteriorDrawBaseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    h: f64,
    mode: SelectionMode,
}

impl PolicyConfig {
    pub fn new(h: f64, mode: SelectionMode) -> Result<Self> {
        check_exponent(h)?;
        Ok(Self { h, mode })
    }

    pub fn exact(h: f64) -> Result<Self> {
        Self::new(h, SelectionMode::ExactProbability)
    }

    pub fn baseline() -> Self {
        Self {
            h: 1.0,
            mode: SelectionMode::PosteriorDrawBaseline,
        }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn mode(&self) -> SelectionMode {
        self.mode
    }

    pub fn with_h(self, h: f64) -> Result<Self> {
        Self::new(h, self.mode)
    }
}

fn check_exponent(h: f64) -> Result<()> {
    if h.is_finite() && h >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(h))
    }
}

/// `p_i^h / sum_j p_j^h`, computed from `h ln p_i` with the maximum subtracted.
///
/// With `h = 0` the result is uniform over the arms whose probability is
/// positive; zero entries stay zero for every `h`.
pub fn selection_weights(best_probs: &[f64], h: f64) -> Result<Vec<f64>> {
    check_exponent(h)?;
    for &p in best_probs {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability {
                name: "best-arm probability",
                value: p,
            });
        }
    }
    let total: f64 = best_probs.iter().sum();
    if total == 0.0 {
        return Err(Error::DegenerateWeights);
    }
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidProbability {
            name: "sum of best-arm probabilities",
            value: total,
        });
    }

    if h == 1.0 {
        return Ok(best_probs.iter().map(|p| p / total).collect());
    }
    if h == 0.0 {
        let support = best_probs.iter().filter(|&&p| p > 0.0).count() as f64;
        return Ok(best_probs
            .iter()
            .map(|&p| if p > 0.0 { 1.0 / support } else { 0.0 })
            .collect());
    }

    let logs: Vec<f64> = best_probs
        .iter()
        .map(|&p| {
            if p > 0.0 {
                h * p.ln()
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut weights: Vec<f64> = logs.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
        if *w < WEIGHT_FLOOR {
            *w = 0.0;
        }
    }
    let sum: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / sum).collect())
}

/// Probability of playing arm 1 of two, `1 / (1 + (1/p - 1)^h)`, where `p` is
/// the probability that arm 1 is the posterior best.
pub fn two_arm_selection(p: f64, h: f64) -> Result<f64> {
    check_exponent(h)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability {
            name: "p",
            value: p,
        });
    }
    if p == 0.0 || p == 1.0 || h == 1.0 {
        return Ok(p);
    }
    Ok(selection_from_ln_pair(p.ln(), (-p).ln_1p(), h))
}

/// Two-arm selection probability from `ln P(arm 1 best)` and
/// `ln P(arm 2 best)`, keeping either side meaningful when it is far below
/// machine epsilon.
pub(crate) fn selection_from_ln_pair(ln_p: f64, ln_q: f64, h: f64) -> f64 {
    if h == 0.0 {
        return 0.5;
    }
    // logistic(h (ln p - ln q))
    let z = h * (ln_p - ln_q);
    let w = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    if w < WEIGHT_FLOOR {
        0.0
    } else if 1.0 - w < WEIGHT_FLOOR {
        1.0
    } else {
        w
    }
}

/// Expected number of arm-2 plays before the next arm-1 play when arm 1 is
/// the posterior best with probability `p`: `(1/p - 1)^h`.
///
/// Returns `f64::INFINITY` for `p = 0` (unbounded) and `0` for `p = 1`.
pub fn expected_gap_plays(p: f64, h: f64) -> Result<f64> {
    check_exponent(h)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability {
            name: "p",
            value: p,
        });
    }
    if p == 0.0 {
        return Ok(f64::INFINITY);
    }
    if p == 1.0 {
        return Ok(0.0);
    }
    Ok((h * ((-p).ln_1p() - p.ln())).exp())
}

/// Picks the next arm.
pub fn select_arm(
    state: &PosteriorState,
    config: &PolicyConfig,
    rng: &mut RandomStream,
) -> Result<usize> {
    let posteriors = state.posteriors();
    if posteriors.len() < 2 {
        return Err(Error::TooFewArms(posteriors.len()));
    }
    match config.mode {
        SelectionMode::PosteriorDrawBaseline => {
            let mut best = 0;
            let mut best_draw = f64::NEG_INFINITY;
            for (i, p) in posteriors.iter().enumerate() {
                let draw = beta_sample(*p, rng);
                if draw > best_draw {
                    best = i;
                    best_draw = draw;
                }
            }
            Ok(best)
        }
        SelectionMode::ExactProbability if posteriors.len() == 2 => {
            let (ln_p, ln_q) = ln_exceedance_pair(posteriors[0], posteriors[1]);
            let w = selection_from_ln_pair(ln_p, ln_q, config.h);
            Ok(if rng.uniform() < w { 0 } else { 1 })
        }
        SelectionMode::ExactProbability => {
            let weights = selection_weights(&best_arm_probabilities(&posteriors)?, config.h)?;
            Ok(categorical(&weights, rng.uniform()))
        }
    }
}

/// Index `i` with `u` in the `i`-th cumulative bucket, skipping zero weights.
pub(crate) fn categorical(weights: &[f64], u: f64) -> usize {
    let mut cum = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            cum += w;
            last = i;
            if u < cum {
                return i;
            }
        }
    }
    last
}
