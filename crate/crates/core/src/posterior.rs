//! Distribution functions for integer-parameter Beta posteriors and Binomials.
//!
//! Every arm starts from a `Beta(1, 1)` prior, so after `s` successes in `j`
//! plays its posterior is `Beta(s + 1, j - s + 1)`. All parameters here are
//! therefore positive integers, which is what makes the exact finite-sum
//! expressions for `P(X1 > X2)` usable.
//!
//! The exceedance probability is carried in log space together with its
//! complement. The sampling rule raises the odds `P(X2 > X1) / P(X1 > X2)` to
//! a power `h`, and for small `h` a complement of `1e-80` still matters, so it
//! cannot be recovered as `1 - p`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use statrs::function::beta::{beta_reg, ln_beta};

use crate::error::{check_probability, Error, Result};

/// Number of increments between full recomputations in [`ExceedanceTracker`].
pub const RESYNC_INTERVAL: u32 = 1024;

/// Above this parameter value `best_arm_probabilities` with three or more arms
/// switches from quadrature to Monte Carlo.
pub const QUADRATURE_PARAM_LIMIT: u64 = 10_000;

/// Draw count of the Monte Carlo fallback for three or more arms.
pub const MONTE_CARLO_DRAWS: usize = 1_000_000;

const QUADRATURE_TOLERANCE: f64 = 1e-10;

/// Parameters of an integer Beta posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct BetaParams {
    alpha: u64,
    beta: u64,
}

impl BetaParams {
    pub const UNIFORM: BetaParams = BetaParams { alpha: 1, beta: 1 };

    pub fn new(alpha: u64, beta: u64) -> Result<Self> {
        if alpha == 0 || beta == 0 {
            return Err(Error::InvalidBetaParams { alpha, beta });
        }
        Ok(Self { alpha, beta })
    }

    /// Posterior after `successes` and `failures` under the uniform prior.
    pub fn from_counts(successes: u64, failures: u64) -> Self {
        Self {
            alpha: successes + 1,
            beta: failures + 1,
        }
    }

    pub fn alpha(&self) -> u64 {
        self.alpha
    }

    pub fn beta(&self) -> u64 {
        self.beta
    }

    pub fn mean(&self) -> f64 {
        self.alpha as f64 / (self.alpha + self.beta) as f64
    }

    pub fn std_dev(&self) -> f64 {
        let (a, b) = (self.alpha as f64, self.beta as f64);
        let s = a + b;
        (a * b / (s * s * (s + 1.0))).sqrt()
    }

    fn max_param(&self) -> u64 {
        self.alpha.max(self.beta)
    }
}

/// `C(n, k) p^k (1 - p)^(n - k)`, evaluated in log space.
pub fn binomial_pmf(n: u64, p: f64, k: u64) -> Result<f64> {
    check_probability("p", p)?;
    if k > n {
        return Err(Error::CountOutOfRange { k, n });
    }
    Ok(pmf_unchecked(n, p, k))
}

fn pmf_unchecked(n: u64, p: f64, k: u64) -> f64 {
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    ln_pmf(n, p, k).exp()
}

fn ln_pmf(n: u64, p: f64, k: u64) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    ln_choose(n, k) + kf * p.ln() + (nf - kf) * (-p).ln_1p()
}

fn ln_choose(n: u64, k: u64) -> f64 {
    if k == 0 || k == n {
        return 0.0;
    }
    // ln C(n, k) = -ln(n + 1) - ln B(k + 1, n - k + 1)
    -((n + 1) as f64).ln() - ln_beta((k + 1) as f64, (n - k + 1) as f64)
}

/// `P(Bin(n, p) <= k)`. Negative `k` gives 0 and `k >= n` gives 1.
///
/// The sum runs over whichever tail lies on the far side of the mean, so the
/// terms decrease away from the starting index and no value close to 1 is
/// ever built up by accumulation.
pub fn binomial_cdf(n: u64, p: f64, k: i64) -> Result<f64> {
    check_probability("p", p)?;
    if k < 0 {
        return Ok(0.0);
    }
    let k = k as u64;
    if k >= n {
        return Ok(1.0);
    }
    if p == 0.0 {
        return Ok(1.0);
    }
    if p == 1.0 {
        return Ok(0.0);
    }
    if (k as f64) < n as f64 * p {
        Ok(lower_tail(n, p, k))
    } else {
        Ok(1.0 - upper_tail(n, p, k + 1))
    }
}

/// Sum of pmf over `0..=k`, walking down from `k`. Requires `k <= mode`.
fn lower_tail(n: u64, p: f64, k: u64) -> f64 {
    let odds = (1.0 - p) / p;
    let mut term = ln_pmf(n, p, k).exp();
    let mut sum = 0.0;
    let mut i = k;
    loop {
        sum += term;
        if i == 0 || term < sum * 1e-18 {
            break;
        }
        // pmf(i - 1) = pmf(i) * i / (n - i + 1) * (1 - p) / p
        term *= i as f64 / (n - i + 1) as f64 * odds;
        i -= 1;
    }
    sum
}

/// Sum of pmf over `k..=n`, walking up from `k`. Requires `k > mode`.
fn upper_tail(n: u64, p: f64, k: u64) -> f64 {
    let odds = p / (1.0 - p);
    let mut term = ln_pmf(n, p, k).exp();
    let mut sum = 0.0;
    let mut i = k;
    loop {
        sum += term;
        if i == n || term < sum * 1e-18 {
            break;
        }
        term *= (n - i) as f64 / (i + 1) as f64 * odds;
        i += 1;
    }
    sum
}

/// Beta CDF (regularized incomplete beta function).
///
/// Evaluated by continued fraction rather than through the binomial identity
/// `F_Beta(a, b; x) = 1 - F_Bin(a + b - 1, x; a - 1)`, so that identity can
/// serve as an independent check of both functions.
pub fn beta_cdf(params: BetaParams, x: f64) -> Result<f64> {
    check_probability("x", x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    if params == BetaParams::UNIFORM {
        return Ok(x);
    }
    Ok(beta_reg(params.alpha as f64, params.beta as f64, x))
}

/// Beta density. Zero outside `[0, 1]`.
pub fn beta_pdf(params: BetaParams, x: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    let (a, b) = (params.alpha as f64, params.beta as f64);
    let mut ln = -ln_beta(a, b);
    if params.alpha > 1 {
        if x == 0.0 {
            return 0.0;
        }
        ln += (a - 1.0) * x.ln();
    }
    if params.beta > 1 {
        if x == 1.0 {
            return 0.0;
        }
        ln += (b - 1.0) * (-x).ln_1p();
    }
    ln.exp()
}

/// One draw from `Beta(alpha, beta)`.
///
/// `Beta(1, 1)` consumes exactly one uniform from the stream and returns it.
pub fn beta_sample<R: Rng + ?Sized>(params: BetaParams, rng: &mut R) -> f64 {
    if params == BetaParams::UNIFORM {
        return rng.random::<f64>();
    }
    Beta::new(params.alpha as f64, params.beta as f64)
        .expect("integer parameters >= 1 are valid")
        .sample(rng)
}

// ---------------------------------------------------------------------------
// Log-space helpers
// ---------------------------------------------------------------------------

pub(crate) fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(1 - e^x)` for `x <= 0`.
pub(crate) fn ln_1m_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// Running log-sum-exp.
struct LnSum {
    max: f64,
    scaled: f64,
}

impl LnSum {
    fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    fn add(&mut self, ln_term: f64) {
        if ln_term == f64::NEG_INFINITY {
            return;
        }
        if ln_term > self.max {
            self.scaled = self.scaled * (self.max - ln_term).exp() + 1.0;
            self.max = ln_term;
        } else {
            self.scaled += (ln_term - self.max).exp();
        }
    }

    fn ln(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

// ---------------------------------------------------------------------------
// P(X1 > X2)
// ---------------------------------------------------------------------------

/// `ln P(Y > X)` for `X ~ Beta(a, b)`, `Y ~ Beta(c, d)`, as a sum of `c`
/// positive terms:
///
/// `t_0 = B(a, b + d) / B(a, b)`,
/// `t_{i+1} = t_i (a + i)(d + i) / ((i + 1)(a + b + d + i))`.
fn ln_exceed_series(a: u64, b: u64, c: u64, d: u64) -> f64 {
    let (af, bf, df) = (a as f64, b as f64, d as f64);
    let mut ln_term = ln_beta(af, bf + df) - ln_beta(af, bf);
    let mut acc = LnSum::new();
    for i in 0..c {
        acc.add(ln_term);
        let num = (a + i) as f64 * (d + i) as f64;
        let den = (i + 1) as f64 * (a + b + d + i) as f64;
        // num - den = ad - a - b - d - i(1 + b), exact in i128
        let diff = (a as i128) * (d as i128) - (a + b + d + i) as i128 - (i as i128) * (b as i128);
        debug_assert_eq!(diff as f64, num - den);
        ln_term += (diff as f64 / den).ln_1p();
    }
    acc.ln()
}

/// `(ln P(X1 > X2), ln P(X2 > X1))` for independent `X1 ~ p1`, `X2 ~ p2`.
///
/// The probability expected to be the smaller one (judged by posterior means)
/// is summed directly over the cheapest of its two series; the other one is
/// its log-complement.
pub fn ln_exceedance_pair(p1: BetaParams, p2: BetaParams) -> (f64, f64) {
    let (a1, b1, a2, b2) = (p1.alpha, p1.beta, p2.alpha, p2.beta);
    if p1.mean() >= p2.mean() {
        // P(X2 > X1): sum over a2 terms, or over b1 terms via X -> 1 - X.
        let ln_less = if a2 <= b1 {
            ln_exceed_series(a1, b1, a2, b2)
        } else {
            ln_exceed_series(b2, a2, b1, a1)
        };
        (ln_1m_exp(ln_less), ln_less)
    } else {
        let ln_greater = if a1 <= b2 {
            ln_exceed_series(a2, b2, a1, b1)
        } else {
            ln_exceed_series(b1, a1, b2, a2)
        };
        (ln_greater, ln_1m_exp(ln_greater))
    }
}

/// `P(X1 > X2)` for independent `X1 ~ p1`, `X2 ~ p2`.
pub fn beta_exceedance(p1: BetaParams, p2: BetaParams) -> f64 {
    ln_exceedance_pair(p1, p2).0.exp()
}

/// `ln [B(a1 + a2, b1 + b2) / (B(a1, b1) B(a2, b2))]`, the overlap term that
/// drives every one-parameter step of `P(X1 > X2)`.
fn ln_overlap(p1: BetaParams, p2: BetaParams) -> f64 {
    let (a1, b1, a2, b2) = (
        p1.alpha as f64,
        p1.beta as f64,
        p2.alpha as f64,
        p2.beta as f64,
    );
    ln_beta(a1 + a2, b1 + b2) - ln_beta(a1, b1) - ln_beta(a2, b2)
}

/// `P(X1 > X2)` together with the posteriors that produced it.
///
/// Arms are indexed from zero: arm `0` is `params1`, arm `1` is `params2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExceedanceState {
    pub params1: BetaParams,
    pub params2: BetaParams,
    /// `P(X1 > X2)`.
    pub prob: f64,
    ln_prob: f64,
    ln_complement: f64,
    ln_overlap: f64,
    /// Running bound on the relative error of both sides.
    drift: f64,
}

/// Relative error bound above which an increment recomputes from scratch.
const DRIFT_LIMIT: f64 = 1e-9;

/// Rounding added to the drift bound by one increment.
const STEP_ROUNDING: f64 = 4.0 * f64::EPSILON;

impl ExceedanceState {
    /// Computes the state from scratch.
    pub fn new(params1: BetaParams, params2: BetaParams) -> Self {
        let (ln_prob, ln_complement) = ln_exceedance_pair(params1, params2);
        Self {
            params1,
            params2,
            prob: ln_prob.exp(),
            ln_prob,
            ln_complement,
            ln_overlap: ln_overlap(params1, params2),
            drift: 0.0,
        }
    }

    /// Builds a state from an externally supplied probability, e.g. one read
    /// back from storage. The complement is recovered as `1 - prob`.
    pub fn from_parts(params1: BetaParams, params2: BetaParams, prob: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&prob) {
            return Err(Error::InconsistentState(format!(
                "probability {prob} outside [0, 1]"
            )));
        }
        Ok(Self {
            params1,
            params2,
            prob,
            ln_prob: prob.ln(),
            ln_complement: (-prob).ln_1p(),
            ln_overlap: ln_overlap(params1, params2),
            drift: 0.0,
        })
    }

    pub fn prior() -> Self {
        Self::new(BetaParams::UNIFORM, BetaParams::UNIFORM)
    }

    /// `P(X2 > X1)`, accurate even when it is far below machine epsilon.
    pub fn complement(&self) -> f64 {
        self.ln_complement.exp()
    }

    pub fn ln_prob(&self) -> f64 {
        self.ln_prob
    }

    pub fn ln_complement(&self) -> f64 {
        self.ln_complement
    }

    fn check(&self) -> Result<()> {
        let ok = self.prob.is_finite()
            && (0.0..=1.0).contains(&self.prob)
            && self.ln_prob <= 0.0
            && self.ln_complement <= 0.0
            && (self.ln_prob.exp() + self.ln_complement.exp() - 1.0).abs() <= 1e-9
            && (self.ln_prob.exp() - self.prob).abs() <= 1e-12;
        if ok {
            Ok(())
        } else {
            Err(Error::InconsistentState(format!(
                "prob = {}, ln_prob = {}, ln_complement = {}",
                self.prob, self.ln_prob, self.ln_complement
            )))
        }
    }

    /// Applies one observation with the one-parameter recurrences
    ///
    /// `g(a+1) = g + H/a`, `g(b+1) = g - H/b`, `g(c+1) = g - H/c`,
    /// `g(d+1) = g + H/d`,
    ///
    /// where `g = P(X1 > X2)` with `X1 ~ Beta(a, b)`, `X2 ~ Beta(c, d)` and
    /// `H = B(a + c, b + d) / (B(a, b) B(c, d))`. `H` itself moves by an exact
    /// rational factor, so each step costs a couple of logarithms.
    ///
    /// The side that shrinks loses relative accuracy by a factor of about
    /// `(1 + r) / (1 - r)`, with `r` the ratio of the step to that side. A
    /// running bound of that loss is kept, and the state is recomputed from
    /// scratch once the bound would pass `1e-9`.
    pub fn increment(&self, arm: usize, success: bool) -> Result<Self> {
        if arm > 1 {
            return Err(Error::ArmOutOfRange { arm, arms: 2 });
        }
        self.check()?;

        let (a, b, c, d) = (
            self.params1.alpha,
            self.params1.beta,
            self.params2.alpha,
            self.params2.beta,
        );
        let total = (a + b + c + d) as f64;
        let cross = (b as i128) * (c as i128) - (a as i128) * (d as i128);
        // (incremented parameter, sign of the change in g, numerator of the
        // overlap ratio minus its denominator)
        let (param, raises_prob, ratio_diff) = match (arm, success) {
            (0, true) => (a, true, cross),
            (0, false) => (b, false, -cross),
            (1, true) => (c, false, -cross),
            (1, false) => (d, true, cross),
            _ => unreachable!(),
        };
        let param_f = param as f64;
        let ln_step = self.ln_overlap - param_f.ln();

        let (mut params1, mut params2) = (self.params1, self.params2);
        match (arm, success) {
            (0, true) => params1.alpha += 1,
            (0, false) => params1.beta += 1,
            (1, true) => params2.alpha += 1,
            _ => params2.beta += 1,
        }

        let (grow, shrink) = if raises_prob {
            (self.ln_prob, self.ln_complement)
        } else {
            (self.ln_complement, self.ln_prob)
        };
        let rel = (ln_step - shrink).exp();
        let drift = (self.drift + STEP_ROUNDING) * (1.0 + rel) / (1.0 - rel);
        if !(rel < 1.0 && drift <= DRIFT_LIMIT) {
            return Ok(Self::new(params1, params2));
        }
        let grown = ln_add_exp(grow, ln_step).min(0.0);
        let shrunk = shrink + (-rel).ln_1p();
        let (ln_prob, ln_complement) = if raises_prob {
            (grown, shrunk)
        } else {
            (shrunk, grown)
        };
        let ln_overlap = self.ln_overlap + (ratio_diff as f64 / (param_f * total)).ln_1p();

        Ok(Self {
            params1,
            params2,
            prob: ln_prob.exp(),
            ln_prob,
            ln_complement,
            ln_overlap,
            drift,
        })
    }
}

/// Applies one observation to `state`. See [`ExceedanceState::increment`].
pub fn exceedance_increment(
    state: &ExceedanceState,
    which_arm: usize,
    success: bool,
) -> Result<ExceedanceState> {
    state.increment(which_arm, success)
}

/// Incremental `P(X1 > X2)` with a full recomputation every
/// [`RESYNC_INTERVAL`] steps.
#[derive(Debug, Clone)]
pub struct ExceedanceTracker {
    state: ExceedanceState,
    since_resync: u32,
}

impl Default for ExceedanceTracker {
    fn default() -> Self {
        Self::new(ExceedanceState::prior())
    }
}

impl ExceedanceTracker {
    pub fn new(state: ExceedanceState) -> Self {
        Self {
            state,
            since_resync: 0,
        }
    }

    pub fn state(&self) -> &ExceedanceState {
        &self.state
    }

    pub fn observe(&mut self, arm: usize, success: bool) -> Result<()> {
        self.state = self.state.increment(arm, success)?;
        self.since_resync += 1;
        if self.since_resync >= RESYNC_INTERVAL {
            self.state = ExceedanceState::new(self.state.params1, self.state.params2);
            self.since_resync = 0;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// P(arm i is the posterior best)
// ---------------------------------------------------------------------------

/// `P(X_i = max_j X_j)` for independent Beta draws, one entry per arm.
///
/// Two arms use the exact sum. With three or more, each entry is the integral
/// of `pdf_i(x) * prod_{j != i} F_j(x)`, done by adaptive Gauss-Kronrod while
/// every parameter stays at or below [`QUADRATURE_PARAM_LIMIT`] and by a
/// seeded Monte Carlo estimate otherwise.
pub fn best_arm_probabilities(posteriors: &[BetaParams]) -> Result<Vec<f64>> {
    let n = posteriors.len();
    if n < 2 {
        return Err(Error::TooFewArms(n));
    }
    if posteriors.iter().all(|p| *p == posteriors[0]) {
        return Ok(vec![1.0 / n as f64; n]);
    }
    if n == 2 {
        let (ln_p, ln_q) = ln_exceedance_pair(posteriors[0], posteriors[1]);
        return Ok(vec![ln_p.exp(), ln_q.exp()]);
    }
    let raw = if posteriors
        .iter()
        .any(|p| p.max_param() > QUADRATURE_PARAM_LIMIT)
    {
        best_arm_monte_carlo(posteriors)
    } else {
        (0..n)
            .map(|i| best_arm_quadrature(posteriors, i))
            .collect::<Vec<_>>()
    };
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|v| v / total).collect())
}

fn best_arm_quadrature(posteriors: &[BetaParams], i: usize) -> f64 {
    let target = posteriors[i];
    let integrand = |x: f64| {
        let mut v = beta_pdf(target, x);
        if v == 0.0 {
            return 0.0;
        }
        for (j, p) in posteriors.iter().enumerate() {
            if j != i {
                v *= beta_cdf(*p, x).unwrap_or(0.0);
                if v == 0.0 {
                    break;
                }
            }
        }
        v
    };
    let sd = target.std_dev();
    let lo = (target.mean() - 14.0 * sd).max(0.0);
    let hi = (target.mean() + 14.0 * sd).min(1.0);
    const PANELS: usize = 8;
    let width = (hi - lo) / PANELS as f64;
    (0..PANELS)
        .map(|k| {
            let a = lo + k as f64 * width;
            let b = if k + 1 == PANELS { hi } else { a + width };
            adaptive_gk15(&integrand, a, b, QUADRATURE_TOLERANCE / PANELS as f64, 24)
        })
        .sum()
}

fn best_arm_monte_carlo(posteriors: &[BetaParams]) -> Vec<f64> {
    // Seed from the parameters so the result stays a pure function.
    let seed = posteriors.iter().fold(0x9e37_79b9_7f4a_7c15_u64, |h, p| {
        crate::bandit::mix64(crate::bandit::mix64(h ^ p.alpha) ^ p.beta)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wins = vec![0u64; posteriors.len()];
    for _ in 0..MONTE_CARLO_DRAWS {
        let mut best = 0;
        let mut best_v = f64::NEG_INFINITY;
        for (j, p) in posteriors.iter().enumerate() {
            let v = beta_sample(*p, &mut rng);
            if v > best_v {
                best_v = v;
                best = j;
            }
        }
        wins[best] += 1;
    }
    wins.into_iter()
        .map(|w| w as f64 / MONTE_CARLO_DRAWS as f64)
        .collect()
}

const GK15_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * GK15_WEIGHTS[7];
    let mut gauss = fc * G7_WEIGHTS[3];
    for (k, (&x, &w)) in GK15_NODES
        .iter()
        .zip(GK15_WEIGHTS.iter())
        .take(7)
        .enumerate()
    {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if k % 2 == 1 {
            gauss += G7_WEIGHTS[k / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adaptive_gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gk15(f, a, b);
    if err <= tol || depth == 0 {
        return value;
    }
    let mid = 0.5 * (a + b);
    adaptive_gk15(f, a, mid, 0.5 * tol, depth - 1) + adaptive_gk15(f, mid, b, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn bp(a: u64, b: u64) -> BetaParams {
        BetaParams::new(a, b).unwrap()
    }

    #[test]
    fn pmf_examples() {
        assert!(close(binomial_pmf(2, 0.5, 1).unwrap(), 0.5, 1e-13));
        assert_eq!(binomial_pmf(5, 0.0, 0).unwrap(), 1.0);
        assert_eq!(binomial_pmf(5, 1.0, 5).unwrap(), 1.0);
        assert_eq!(binomial_pmf(5, 1.0, 4).unwrap(), 0.0);
        assert!(close(binomial_pmf(6, 0.3, 2).unwrap(), 0.324135, 1e-13));
    }

    #[test]
    fn pmf_rejects_bad_input() {
        assert_eq!(
            binomial_pmf(3, 0.5, 4),
            Err(Error::CountOutOfRange { k: 4, n: 3 })
        );
        assert!(matches!(
            binomial_pmf(3, 1.5, 1),
            Err(Error::InvalidProbability { .. })
        ));
        assert!(binomial_cdf(3, -0.1, 1).is_err());
    }

    #[test]
    fn pmf_large_n_does_not_overflow() {
        let v = binomial_pmf(1_000_000, 0.5, 500_000).unwrap();
        // Stirling: ~ sqrt(2 / (pi n))
        assert!(close(v, (2.0 / (std::f64::consts::PI * 1e6)).sqrt(), 1e-9));
    }

    #[test]
    fn cdf_examples() {
        let y = 0.37;
        assert!(close(binomial_cdf(1, y, 0).unwrap(), 1.0 - y, 1e-13));
        assert!(close(binomial_cdf(6, 0.5, 2).unwrap(), 22.0 / 64.0, 1e-13));
        assert_eq!(binomial_cdf(10, 0.2, -1).unwrap(), 0.0);
        assert_eq!(binomial_cdf(10, 0.2, 10).unwrap(), 1.0);
        assert_eq!(binomial_cdf(10, 0.0, 0).unwrap(), 1.0);
        assert_eq!(binomial_cdf(10, 1.0, 9).unwrap(), 0.0);
    }

    #[test]
    fn cdf_monotone_in_k() {
        for &p in &[0.01, 0.3, 0.5, 0.77, 0.99] {
            let mut prev = 0.0;
            for k in -1..=60 {
                let v = binomial_cdf(60, p, k).unwrap();
                assert!(v >= prev - 1e-15, "p={p} k={k}");
                prev = v;
            }
        }
    }

    #[test]
    fn beta_cdf_examples() {
        for &x in &[0.0, 0.1, 0.5, 0.93, 1.0] {
            assert_eq!(beta_cdf(BetaParams::UNIFORM, x).unwrap(), x);
        }
        assert!(close(beta_cdf(bp(2, 1), 0.5).unwrap(), 0.25, 1e-14));
        assert!(close(beta_cdf(bp(3, 4), 0.5).unwrap(), 42.0 / 64.0, 1e-14));
        assert!(beta_cdf(bp(3, 4), 1.2).is_err());
    }

    #[test]
    fn exceedance_examples() {
        let u = BetaParams::UNIFORM;
        assert!(close(beta_exceedance(u, u), 0.5, 1e-13));
        assert!(close(beta_exceedance(bp(2, 1), u), 2.0 / 3.0, 1e-13));
        let (a, b) = (bp(5, 2), bp(2, 5));
        assert!(close(
            beta_exceedance(a, b) + beta_exceedance(b, a),
            1.0,
            1e-12
        ));
    }

    #[test]
    fn all_routes_agree() {
        // The four series must give the same value regardless of which is cheapest.
        let (p1, p2) = (bp(7, 3), bp(4, 9));
        let (a1, b1, a2, b2) = (7, 3, 4, 9);
        let direct_a = ln_exceed_series(a2, b2, a1, b1).exp();
        let direct_b = ln_exceed_series(b1, a1, b2, a2).exp();
        let via_c = 1.0 - ln_exceed_series(a1, b1, a2, b2).exp();
        let via_d = 1.0 - ln_exceed_series(b2, a2, b1, a1).exp();
        let p = beta_exceedance(p1, p2);
        for v in [direct_a, direct_b, via_c, via_d] {
            assert!(close(v, p, 1e-13), "{v} vs {p}");
        }
    }

    #[test]
    fn tiny_complement_is_kept() {
        let state = ExceedanceState::new(BetaParams::from_counts(9000, 1000), bp(201, 201));
        assert_eq!(state.prob, 1.0);
        let c = state.complement();
        assert!(c > 0.0 && c < 1e-30, "{c}");
    }

    #[test]
    fn increment_from_prior() {
        let s = ExceedanceState::prior().increment(0, true).unwrap();
        assert_eq!(s.params1, bp(2, 1));
        assert!(close(s.prob, 2.0 / 3.0, 1e-13));
        let s = ExceedanceState::prior().increment(1, false).unwrap();
        assert!(close(s.prob, 2.0 / 3.0, 1e-13));
    }

    #[test]
    fn increment_directions() {
        let base = ExceedanceState::new(bp(4, 6), bp(3, 2));
        assert!(base.increment(0, true).unwrap().prob > base.prob);
        assert!(base.increment(0, false).unwrap().prob < base.prob);
        assert!(base.increment(1, true).unwrap().prob < base.prob);
        assert!(base.increment(1, false).unwrap().prob > base.prob);
    }

    #[test]
    fn increment_rejects_inconsistent_state() {
        let mut bad = ExceedanceState::prior();
        bad.prob = 0.9;
        assert!(matches!(
            bad.increment(0, true),
            Err(Error::InconsistentState(_))
        ));
        assert!(ExceedanceState::from_parts(bp(1, 1), bp(1, 1), 1.5).is_err());
        assert!(ExceedanceState::prior().increment(2, true).is_err());
    }

    #[test]
    fn best_arm_small_cases() {
        let u = BetaParams::UNIFORM;
        assert_eq!(
            best_arm_probabilities(&[u, u, u]).unwrap(),
            vec![1.0 / 3.0; 3]
        );
        let v = best_arm_probabilities(&[bp(2, 1), u]).unwrap();
        assert!(close(v[0], 2.0 / 3.0, 1e-13) && close(v[1], 1.0 / 3.0, 1e-13));
        assert_eq!(best_arm_probabilities(&[u]), Err(Error::TooFewArms(1)));
    }

    #[test]
    fn best_arm_quadrature_matches_pairwise_for_two_arms() {
        let ps = [bp(12, 5), bp(3, 8)];
        let q = best_arm_quadrature(&ps, 0);
        assert!(close(q, beta_exceedance(ps[0], ps[1]), 1e-11), "{q}");
    }

    #[test]
    fn beta_uniform_sample_is_next_uniform() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = a.clone();
        let u: f64 = b.random();
        assert_eq!(beta_sample(BetaParams::UNIFORM, &mut a), u);
    }

    #[test]
    fn log_helpers() {
        assert!(close(
            ln_add_exp(0.5f64.ln(), 0.25f64.ln()),
            0.75f64.ln(),
            1e-13
        ));
        assert!(close(ln_1m_exp(0.25f64.ln()), 0.75f64.ln(), 1e-13));
        assert!(close(ln_1m_exp(-1e-20), (1e-20f64).ln(), 1e-12));
        let mut s = LnSum::new();
        for v in [1e-300f64, 1e-300, 2e-300] {
            s.add(v.ln());
        }
        assert!(close(s.ln(), (4e-300f64).ln(), 1e-12));
    }
}
