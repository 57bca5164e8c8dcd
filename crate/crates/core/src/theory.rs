//! Closed-form quantities from the two-arm regret analysis.
//!
//! Notation, for means `mu1 > mu2` and exponent `h`:
//!
//! - `delta = mu1 - mu2`, `y = (mu1 + mu2) / 2`
//! - `N(T) = ceil(16 ln T / delta^2)`, the arm-2 play count that ends the
//!   information-gathering phase
//! - `R = mu1 (1 - y)^h / (y^h (1 - mu1))`
//! - `S = (1 - mu1) / (1 - y)^h`
//! - `U = R^y S`
//!
//! `ln U` is affine in `h` with slope equal to the binary entropy `H(y)`, so
//! `U(h) = 1` has exactly one root. Regret is logarithmic for
//! `1/2 <= h <= h_max`, where `h_max` is that root, further capped for
//! `y > 1/2` by the point where `R` drops below one.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::posterior::{
    beta_cdf, beta_exceedance, binomial_cdf, binomial_pmf, BetaParams, ExceedanceState,
};
use crate::Execution;

/// Bernoulli KL divergence `D(y || mu)` in nats.
///
/// Returns `f64::INFINITY` when `mu` is 0 or 1 and `y` differs from it.
pub fn kl_bernoulli(y: f64, mu: f64) -> Result<f64> {
    crate::error::check_probability("y", y)?;
    crate::error::check_probability("mu", mu)?;
    if y == mu {
        return Ok(0.0);
    }
    let term = |p: f64, q: f64| -> f64 {
        if p == 0.0 {
            0.0
        } else if q == 0.0 {
            f64::INFINITY
        } else {
            p * (p / q).ln()
        }
    };
    Ok((term(y, mu) + term(1.0 - y, 1.0 - mu)).max(0.0))
}

/// `ceil(16 ln T / delta^2)`.
pub fn phase_length(horizon: f64, delta: f64) -> Result<u64> {
    if horizon.is_nan() || horizon < 2.0 {
        return Err(Error::HorizonTooShort {
            min: 2,
            got: horizon as u64,
        });
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidGap(delta));
    }
    Ok((16.0 * horizon.ln() / (delta * delta)).ceil() as u64)
}

/// Binary entropy in nats, `-(1 - y) ln(1 - y) - y ln y`.
pub fn binary_entropy(y: f64) -> f64 {
    let xlx = |x: f64| if x == 0.0 { 0.0 } else { x * x.ln() };
    -(xlx(y) + xlx(1.0 - y))
}

fn check_interior(v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::BoundaryMean(v))
    }
}

fn check_mu1_y(mu1: f64, y: f64, h: f64) -> Result<()> {
    check_interior(mu1)?;
    check_interior(y)?;
    if mu1.is_nan() || y.is_nan() || mu1 <= y {
        return Err(Error::NotUniqueOptimum { mu1, mu2: y });
    }
    if !(h.is_finite() && h >= 0.0) {
        return Err(Error::InvalidExponent(h));
    }
    Ok(())
}

/// Validates `1 > mu1 > mu2 > 0` and returns `(delta, y)`.
pub fn check_pair(mu1: f64, mu2: f64) -> Result<(f64, f64)> {
    check_interior(mu1)?;
    check_interior(mu2)?;
    if mu1.is_nan() || mu2.is_nan() || mu1 <= mu2 {
        return Err(Error::NotUniqueOptimum { mu1, mu2 });
    }
    Ok((mu1 - mu2, 0.5 * (mu1 + mu2)))
}

pub fn ln_quantity_r(mu1: f64, y: f64, h: f64) -> f64 {
    mu1.ln() - (-mu1).ln_1p() + h * ((-y).ln_1p() - y.ln())
}

pub fn ln_quantity_s(mu1: f64, y: f64, h: f64) -> f64 {
    (-mu1).ln_1p() - h * (-y).ln_1p()
}

pub fn ln_quantity_u(mu1: f64, y: f64, h: f64) -> f64 {
    y * ln_quantity_r(mu1, y, h) + ln_quantity_s(mu1, y, h)
}

/// `R = mu1 (1 - y)^h / (y^h (1 - mu1))`.
pub fn quantity_r(mu1: f64, y: f64, h: f64) -> Result<f64> {
    check_mu1_y(mu1, y, h)?;
    Ok(ln_quantity_r(mu1, y, h).exp())
}

/// `S = (1 - mu1) / (1 - y)^h`.
pub fn quantity_s(mu1: f64, y: f64, h: f64) -> Result<f64> {
    check_mu1_y(mu1, y, h)?;
    Ok(ln_quantity_s(mu1, y, h).exp())
}

/// `U = R^y S`.
pub fn quantity_u(mu1: f64, y: f64, h: f64) -> Result<f64> {
    check_mu1_y(mu1, y, h)?;
    Ok(ln_quantity_u(mu1, y, h).exp())
}

/// The exponent at which `R = 1` when `y > 1/2`:
/// `ln((1 - mu1) / mu1) / ln((1 - y) / y)`. `None` for `y <= 1/2`.
pub fn r_unit_crossing(mu1: f64, y: f64) -> Option<f64> {
    (y > 0.5).then(|| ((-mu1).ln_1p() - mu1.ln()) / ((-y).ln_1p() - y.ln()))
}

/// Closed-form root of `U(h) = 1`:
/// `[ln(1 - mu1) + y ln(mu1 / (1 - mu1))] / [(1 - y) ln(1 - y) + y ln y]`.
pub fn u_unit_crossing(mu1: f64, y: f64) -> f64 {
    let num = (-mu1).ln_1p() + y * (mu1.ln() - (-mu1).ln_1p());
    let den = (1.0 - y) * (-y).ln_1p() + y * y.ln();
    num / den
}

/// Root of `ln U(h) = 0` by bisection.
pub fn h_max_via_root(mu1: f64, mu2: f64) -> Result<f64> {
    let (_, y) = check_pair(mu1, mu2)?;
    let f = |h: f64| ln_quantity_u(mu1, y, h);
    // ln U(1) = -D(y || mu1) < 0 and ln U grows like H(y) h.
    let mut lo = 1.0;
    let mut hi = 2.0;
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::InvalidConfig(
                "no root of U(h) = 1 below 1e12".into(),
            ));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Range of `h` with logarithmic regret.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HRange {
    pub lower: f64,
    pub upper: f64,
    /// `R = 1` crossing; only constrains the range when `y > 1/2`.
    pub r_crossing: Option<f64>,
    /// `U = 1` crossing (closed form).
    pub u_crossing: f64,
}

impl HRange {
    pub fn contains(&self, h: f64) -> bool {
        h >= self.lower && h <= self.upper
    }
}

/// `[1/2, h_max]` with `h_max = min(r_crossing, u_crossing)` for `y > 1/2` and
/// `h_max = u_crossing` otherwise.
pub fn theorem1_h_range(mu1: f64, mu2: f64) -> Result<HRange> {
    let (_, y) = check_pair(mu1, mu2)?;
    let u_crossing = u_unit_crossing(mu1, y);
    let r_crossing = r_unit_crossing(mu1, y);
    let upper = r_crossing.map_or(u_crossing, |r| r.min(u_crossing));
    debug_assert!(upper >= 1.0 - 1e-12, "h = 1 must lie in the range");
    Ok(HRange {
        lower: 0.5,
        upper,
        r_crossing,
        u_crossing,
    })
}

/// Predicted order of the expected regret.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RegimeLabel {
    /// `O(ln T)`.
    Logarithmic,
    /// `O(T^(1 - 2h))` upper bound for `h < 1/2`.
    PolynomialSmallH { exponent: f64 },
    /// `O(T^(16 ln X / delta^2))` with `X = S` when `R < 1`, else `X = U`.
    PolynomialLargeH { exponent: f64, via: LargeHBranch },
    /// Nothing better than the trivial `O(T)` bound.
    TrivialBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LargeHBranch {
    S,
    U,
}

impl RegimeLabel {
    pub fn name(&self) -> &'static str {
        match self {
            RegimeLabel::Logarithmic => "Logarithmic",
            RegimeLabel::PolynomialSmallH { .. } => "PolynomialSmallH",
            RegimeLabel::PolynomialLargeH { .. } => "PolynomialLargeH",
            RegimeLabel::TrivialBound => "TrivialBound",
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match self {
            RegimeLabel::PolynomialSmallH { exponent }
            | RegimeLabel::PolynomialLargeH { exponent, .. } => Some(*exponent),
            _ => None,
        }
    }
}

impl std::fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.exponent() {
            Some(e) => write!(f, "{}({e:.6})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

/// Regret regime for `(mu1, mu2, h)`.
///
/// Boundaries follow the closed intervals of the analysis: `h = 1/2` and
/// `h = h_max` are logarithmic, and `S` or `U` exactly at `e^(delta^2/16)`
/// still counts as polynomial.
pub fn classify_regime(mu1: f64, mu2: f64, h: f64) -> Result<RegimeLabel> {
    let (delta, y) = check_pair(mu1, mu2)?;
    if !(h.is_finite() && h >= 0.0) {
        return Err(Error::InvalidExponent(h));
    }
    if h < 0.5 {
        return Ok(RegimeLabel::PolynomialSmallH {
            exponent: 1.0 - 2.0 * h,
        });
    }
    let range = theorem1_h_range(mu1, mu2)?;
    if range.contains(h) {
        return Ok(RegimeLabel::Logarithmic);
    }
    let r_below_one = ln_quantity_r(mu1, y, h) < 0.0;
    let (ln_x, via) = if r_below_one {
        (ln_quantity_s(mu1, y, h), LargeHBranch::S)
    } else {
        (ln_quantity_u(mu1, y, h), LargeHBranch::U)
    };
    let threshold = delta * delta / 16.0;
    if ln_x <= threshold {
        Ok(RegimeLabel::PolynomialLargeH {
            exponent: 16.0 * ln_x / (delta * delta),
            via,
        })
    } else {
        Ok(RegimeLabel::TrivialBound)
    }
}

/// Points in `h` where [`classify_regime`] can change, ascending.
pub fn regime_breakpoints(mu1: f64, mu2: f64) -> Result<Vec<f64>> {
    let (delta, y) = check_pair(mu1, mu2)?;
    let range = theorem1_h_range(mu1, mu2)?;
    let threshold = delta * delta / 16.0;
    let entropy = binary_entropy(y);
    // ln U(h) = ln U(0) + H(y) h;  ln S(h) = ln(1 - mu1) - h ln(1 - y)
    let u_trivial = (threshold - ln_quantity_u(mu1, y, 0.0)) / entropy;
    let s_trivial = ((-mu1).ln_1p() - threshold) / (-y).ln_1p();

    let mut points = vec![0.5, range.upper];
    match range.r_crossing {
        Some(r) if r > range.upper => {
            // U branch on (upper, r], S branch beyond r.
            if u_trivial < r {
                points.push(u_trivial);
            }
            points.push(r);
            if s_trivial > r {
                points.push(s_trivial);
            }
        }
        Some(_) => {
            if s_trivial > range.upper {
                points.push(s_trivial);
            }
        }
        None => points.push(u_trivial),
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    Ok(points)
}

/// Every analysis quantity for one `(mu1, mu2, h)` and horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub mu1: f64,
    pub mu2: f64,
    pub h: f64,
    pub horizon: u64,
    pub y: f64,
    pub delta: f64,
    pub phase_length: u64,
    pub r: f64,
    pub s: f64,
    pub u: f64,
    pub kl: f64,
    pub h_range: HRange,
    pub h_max_root: f64,
    pub regime: RegimeLabel,
}

pub fn threshold_report(mu1: f64, mu2: f64, h: f64, horizon: u64) -> Result<ThresholdReport> {
    let (delta, y) = check_pair(mu1, mu2)?;
    Ok(ThresholdReport {
        mu1,
        mu2,
        h,
        horizon,
        y,
        delta,
        phase_length: phase_length(horizon as f64, delta)?,
        r: quantity_r(mu1, y, h)?,
        s: quantity_s(mu1, y, h)?,
        u: quantity_u(mu1, y, h)?,
        kl: kl_bernoulli(y, mu1)?,
        h_range: theorem1_h_range(mu1, mu2)?,
        h_max_root: h_max_via_root(mu1, mu2)?,
        regime: classify_regime(mu1, mu2, h)?,
    })
}

// ---------------------------------------------------------------------------
// Numeric verification suites
// ---------------------------------------------------------------------------

/// How `lhs` and `rhs` of a verification entry are compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Relation {
    /// `|lhs - rhs| <= tolerance`.
    Equal { tolerance: f64 },
    /// `lhs >= rhs`.
    AtLeast,
    /// `lhs <= rhs`.
    AtMost,
}

/// One checked grid point. Coordinates follow [`VerificationReport::coordinates`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationEntry {
    pub point: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// One JSON line of a report: `{lemma, grid_point, lhs, rhs, pass}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryRecord {
    pub lemma: String,
    pub grid_point: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Which entries a suite keeps in its report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Retain {
    All,
    #[default]
    Violations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub lemma: &'static str,
    pub coordinates: &'static [&'static str],
    pub relation: Relation,
    pub points: usize,
    pub violations: usize,
    /// Largest `|lhs - rhs|` for identities, smallest margin for inequalities.
    pub worst: f64,
    pub entries: Vec<VerificationEntry>,
}

impl VerificationReport {
    fn assemble(
        lemma: &'static str,
        coordinates: &'static [&'static str],
        relation: Relation,
        all: Vec<VerificationEntry>,
        retain: Retain,
    ) -> Self {
        let points = all.len();
        let violations = all.iter().filter(|e| !e.pass).count();
        let worst = match relation {
            Relation::Equal { .. } => all
                .iter()
                .map(|e| (e.lhs - e.rhs).abs())
                .fold(0.0, f64::max),
            Relation::AtLeast => all
                .iter()
                .map(|e| e.lhs - e.rhs)
                .fold(f64::INFINITY, f64::min),
            Relation::AtMost => all
                .iter()
                .map(|e| e.rhs - e.lhs)
                .fold(f64::INFINITY, f64::min),
        };
        let entries = match retain {
            Retain::All => all,
            Retain::Violations => all.into_iter().filter(|e| !e.pass).collect(),
        };
        Self {
            lemma,
            coordinates,
            relation,
            points,
            violations,
            worst,
            entries,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn records(&self) -> impl Iterator<Item = EntryRecord> + '_ {
        self.entries.iter().map(|e| EntryRecord {
            lemma: self.lemma.to_string(),
            grid_point: self
                .coordinates
                .iter()
                .zip(&e.point)
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            lhs: e.lhs,
            rhs: e.rhs,
            pass: e.pass,
        })
    }
}

fn entry(point: Vec<f64>, lhs: f64, rhs: f64, relation: Relation) -> VerificationEntry {
    let pass = match relation {
        Relation::Equal { tolerance } => (lhs - rhs).abs() <= tolerance,
        Relation::AtLeast => lhs >= rhs,
        Relation::AtMost => lhs <= rhs,
    };
    VerificationEntry {
        point,
        lhs,
        rhs,
        pass,
    }
}

/// Slack for inequalities whose exact sides can coincide.
const ROUNDING_SLACK: f64 = 1e-12;

/// `F_Beta(a, b; x) = 1 - F_Bin(a + b - 1, x; a - 1)` for integer `a, b` in
/// `1..=max_param` and `x = k/100`, `k = 1..=99`.
pub fn verify_lemma3(
    max_param: u64,
    tolerance: f64,
    retain: Retain,
    mode: Execution,
) -> VerificationReport {
    let relation = Relation::Equal { tolerance };
    let m = max_param as usize;
    let rows = map_indexed(m * m, mode, |idx| {
        let a = (idx / m + 1) as u64;
        let b = (idx % m + 1) as u64;
        let params = BetaParams::new(a, b).expect("a, b >= 1");
        (1..=99)
            .map(|k| {
                let x = k as f64 / 100.0;
                let lhs = beta_cdf(params, x).expect("x in [0, 1]");
                let rhs = 1.0 - binomial_cdf(a + b - 1, x, a as i64 - 1).expect("x in [0, 1]");
                entry(vec![a as f64, b as f64, x], lhs, rhs, relation)
            })
            .collect::<Vec<_>>()
    });
    VerificationReport::assemble(
        "lemma3",
        &["alpha", "beta", "x"],
        relation,
        rows.into_iter().flatten().collect(),
        retain,
    )
}

/// A median of `Bin(n, p)` lies in `{floor(np), ceil(np)}` for `n <= n_max`
/// and `p = k/100`. `lhs` is the better of the two candidates' smaller tail
/// mass, which must reach one half.
pub fn verify_fact2(n_max: u64, retain: Retain, mode: Execution) -> VerificationReport {
    let relation = Relation::AtLeast;
    let rows = map_indexed(n_max as usize, mode, |i| {
        let n = i as u64 + 1;
        (1..=99u64)
            .map(|k| {
                let p = k as f64 / 100.0;
                let floor = (n * k) / 100;
                let ceil = (n * k).div_ceil(100);
                let score = |m: u64| {
                    let below = binomial_cdf(n, p, m as i64).expect("p valid");
                    let above = 1.0 - binomial_cdf(n, p, m as i64 - 1).expect("p valid");
                    below.min(above)
                };
                let best = score(floor).max(score(ceil));
                entry(vec![n as f64, p], best + ROUNDING_SLACK, 0.5, relation)
            })
            .collect::<Vec<_>>()
    });
    VerificationReport::assemble(
        "fact2",
        &["n", "p"],
        relation,
        rows.into_iter().flatten().collect(),
        retain,
    )
}

/// `F_Bin(n + 1, p; floor(np + n Delta)) >= 1 - e^(4 Delta) / e^(2 n Delta^2)`
/// for `n = 1..=n_max` and `p`, `Delta` in steps of `1/steps` over `[0, 1]`.
pub fn verify_lemma4(
    n_max: u64,
    steps: u64,
    retain: Retain,
    mode: Execution,
) -> VerificationReport {
    let relation = Relation::AtLeast;
    let rows = map_indexed(n_max as usize, mode, |i| {
        let n = i as u64 + 1;
        let mut out = Vec::with_capacity(((steps + 1) * (steps + 1)) as usize);
        for ip in 0..=steps {
            let p = ip as f64 / steps as f64;
            for id in 0..=steps {
                let delta = id as f64 / steps as f64;
                // floor(n p + n Delta) in exact integer arithmetic
                let arg = (n * (ip + id)) / steps;
                let lhs = binomial_cdf(n + 1, p, arg as i64).expect("p valid");
                let rhs = 1.0 - (4.0 * delta - 2.0 * n as f64 * delta * delta).exp();
                out.push(entry(
                    vec![n as f64, p, delta],
                    lhs + ROUNDING_SLACK,
                    rhs,
                    relation,
                ));
            }
        }
        out
    });
    VerificationReport::assemble(
        "lemma4",
        &["n", "p", "delta"],
        relation,
        rows.into_iter().flatten().collect(),
        retain,
    )
}

/// Hoeffding tails for `Bin(n, p)`: `P(S >= np + a) <= e^(-2a^2/n)` and
/// `P(S <= np - a) <= e^(-2a^2/n)` at every integer threshold, for
/// `n = 1..=n_max` and `p = k/20`, `k = 1..=19`.
pub fn verify_chernoff(n_max: u64, retain: Retain, mode: Execution) -> VerificationReport {
    let relation = Relation::AtMost;
    let rows = map_indexed(n_max as usize, mode, |i| {
        let n = i as u64 + 1;
        let nf = n as f64;
        let mut out = Vec::new();
        for k in 1..20u64 {
            let p = k as f64 / 20.0;
            let pmf: Vec<f64> = (0..=n)
                .map(|j| binomial_pmf(n, p, j).expect("valid"))
                .collect();
            let mean = nf * p;
            // lower tails, accumulated upward from 0
            let mut acc = 0.0;
            for (j, &v) in pmf.iter().enumerate() {
                acc += v;
                let a = mean - j as f64;
                if a <= 0.0 {
                    break;
                }
                let bound = (-2.0 * a * a / nf).exp();
                out.push(entry(
                    vec![n as f64, p, -a],
                    acc,
                    bound + ROUNDING_SLACK,
                    relation,
                ));
            }
            // upper tails, accumulated downward from n
            let mut acc = 0.0;
            for (j, &v) in pmf.iter().enumerate().rev() {
                acc += v;
                let a = j as f64 - mean;
                if a <= 0.0 {
                    break;
                }
                let bound = (-2.0 * a * a / nf).exp();
                out.push(entry(
                    vec![n as f64, p, a],
                    acc,
                    bound + ROUNDING_SLACK,
                    relation,
                ));
            }
        }
        out
    });
    VerificationReport::assemble(
        "chernoff",
        &["n", "p", "a"],
        relation,
        rows.into_iter().flatten().collect(),
        retain,
    )
}

/// Grid for [`verify_lemma567`].
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma567Grid {
    pub mu1: Vec<f64>,
    /// Midpoints; only values strictly between 0 and `mu1` are used.
    pub y: Vec<f64>,
    /// Exponents; only values above 1 are used.
    pub h: Vec<f64>,
}

impl Default for Lemma567Grid {
    fn default() -> Self {
        let steps =
            |from: u32, to: u32, scale: f64| (from..=to).map(|k| k as f64 * scale).collect();
        Self {
            mu1: steps(1, 19, 0.05),
            y: steps(1, 19, 0.05),
            h: (1..=60).map(|k| 1.0 + 0.1 * k as f64 - 0.05).collect(),
        }
    }
}

/// Checks, for each `(mu1, y, h)` with `mu1 > y` and `h > 1`:
///
/// - `R < 1` iff `y > 1/2` and `h > ln((1-mu1)/mu1) / ln((1-y)/y)`;
/// - under those conditions `S > 1`;
/// - `U <= 1` iff `h` is at most the closed-form bound.
///
/// Boolean sides are encoded as 0/1. Points within `1e-9` (in log space) of an
/// iff boundary are skipped, since either answer is correct there.
pub fn verify_lemma567(grid: &Lemma567Grid, retain: Retain) -> VerificationReport {
    let relation = Relation::Equal { tolerance: 0.0 };
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    let mut all = Vec::new();
    for &mu1 in &grid.mu1 {
        for &y in grid.y.iter().filter(|&&y| y > 0.0 && y < mu1) {
            for &h in grid.h.iter().filter(|&&h| h > 1.0) {
                let ln_r = ln_quantity_r(mu1, y, h);
                let ln_s = ln_quantity_s(mu1, y, h);
                let ln_u = ln_quantity_u(mu1, y, h);
                let ratio = r_unit_crossing(mu1, y);
                let cond5 = ratio.is_some_and(|r| h > r);
                if ln_r.abs() > 1e-9 {
                    all.push(entry(
                        vec![5.0, mu1, y, h],
                        flag(ln_r < 0.0),
                        flag(cond5),
                        relation,
                    ));
                }
                if cond5 {
                    all.push(entry(vec![6.0, mu1, y, h], flag(ln_s > 0.0), 1.0, relation));
                }
                if ln_u.abs() > 1e-9 {
                    let cond7 = h <= u_unit_crossing(mu1, y);
                    all.push(entry(
                        vec![7.0, mu1, y, h],
                        flag(ln_u <= 0.0),
                        flag(cond7),
                        relation,
                    ));
                }
            }
        }
    }
    VerificationReport::assemble(
        "lemma567",
        &["lemma", "mu1", "y", "h"],
        relation,
        all,
        retain,
    )
}

/// Incremental `P(X1 > X2)` against scratch recomputation along seeded random
/// trajectories, plus complement symmetry on random parameter pairs.
pub fn verify_exceedance(
    trajectories: usize,
    steps: usize,
    seed: u64,
    retain: Retain,
) -> VerificationReport {
    let relation = Relation::Equal { tolerance: 1e-10 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all = Vec::new();
    for traj in 0..trajectories {
        let mut state = ExceedanceState::prior();
        for step in 0..steps {
            let arm = rng.random_range(0..2usize);
            let success = rng.random::<bool>();
            state = state
                .increment(arm, success)
                .expect("state produced by increment is consistent");
            let scratch = beta_exceedance(state.params1, state.params2);
            all.push(entry(
                vec![0.0, traj as f64, step as f64],
                state.prob,
                scratch,
                relation,
            ));
        }
    }
    for pair in 0..trajectories * 4 {
        let a = BetaParams::new(rng.random_range(1..150), rng.random_range(1..150)).expect(">= 1");
        let b = BetaParams::new(rng.random_range(1..150), rng.random_range(1..150)).expect(">= 1");
        let sum = beta_exceedance(a, b) + beta_exceedance(b, a);
        all.push(entry(
            vec![1.0, pair as f64, 0.0],
            sum,
            1.0,
            Relation::Equal { tolerance: 1e-12 },
        ));
    }
    VerificationReport::assemble(
        "exceedance",
        &["check", "index", "step"],
        relation,
        all,
        retain,
    )
}
