use serde::{Deserialize, Serialize};

use super::{CurvePoint, RegretCurve};
use crate::error::{Error, Result};

const MIN_POINTS: usize = 4;

/// Least-squares line `mean_regret ~ slope * ln t + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

fn tail(curve: &RegretCurve, tail_fraction: f64) -> Result<&[CurvePoint]> {
    let len = curve.points.len();
    let take = ((tail_fraction.clamp(0.0, 1.0) * len as f64).ceil() as usize).min(len);
    if take < MIN_POINTS {
        return Err(Error::InsufficientPoints {
            needed: MIN_POINTS,
            got: take,
        });
    }
    Ok(&curve.points[len - take..])
}

fn least_squares(xs: &[f64], ys: &[f64]) -> LogFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    LogFit {
        slope,
        intercept,
        residual: (sse / n).sqrt(),
    }
}

/// Fits mean regret against `ln t` over the last `tail_fraction` of checkpoints.
pub fn fit_log_slope(curve: &RegretCurve, tail_fraction: f64) -> Result<LogFit> {
    let pts = tail(curve, tail_fraction)?;
    let xs: Vec<f64> = pts.iter().map(|p| (p.t as f64).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.mean_regret).collect();
    Ok(least_squares(&xs, &ys))
}

/// Slope of `ln(mean regret)` against `ln t` over the tail window.
pub fn fit_power_exponent(curve: &RegretCurve, tail_fraction: f64) -> Result<f64> {
    let pts = tail(curve, tail_fraction)?;
    if let Some(p) = pts
        .iter()
        .find(|p| p.mean_regret.is_nan() || p.mean_regret <= 0.0)
    {
        return Err(Error::NonPositiveValue(p.mean_regret, p.t));
    }
    let xs: Vec<f64> = pts.iter().map(|p| (p.t as f64).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.mean_regret.ln()).collect();
    Ok(least_squares(&xs, &ys).slope)
}

/// `[R(T) / ln T] / [R(T/2) / ln(T/2)]` with `T` the last checkpoint.
///
/// Stays near 1 under logarithmic growth and approaches `2 ln(T/2) / ln T`
/// under linear growth. Needs `floor(T/2)` among the checkpoints.
pub fn log_growth_ratio(curve: &RegretCurve) -> Result<f64> {
    let last = curve
        .last()
        .ok_or(Error::InsufficientPoints { needed: 2, got: 0 })?;
    let half_t = last.t / 2;
    let half = curve
        .at(half_t)
        .filter(|_| half_t >= 2)
        .ok_or(Error::InsufficientPoints { needed: 2, got: 1 })?;
    if half.mean_regret.is_nan() || half.mean_regret <= 0.0 {
        return Err(Error::NonPositiveValue(half.mean_regret, half.t));
    }
    let full = last.mean_regret / (last.t as f64).ln();
    let halfway = half.mean_regret / (half.t as f64).ln();
    Ok(full / halfway)
}
