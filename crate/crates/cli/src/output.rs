use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use tsh_core::harness::RegretCurve;

/// Bumped whenever a CSV column or envelope field changes.
pub const SCHEMA_VERSION: &str = "1";

pub const CURVE_HEADER: &str = "t,mean_regret,stderr,runs";
pub const SUMMARY_HEADER: &str =
    "h,final_regret_mean,stderr,log_slope,power_exponent,predicted_regime";
pub const LONG_HEADER: &str = "h,t,mean_regret,stderr";

#[derive(Debug, Serialize, Deserialize)]
pub struct Envelope<C, R> {
    pub schema_version: String,
    pub command: String,
    pub config: C,
    pub results: R,
    /// Seconds.
    pub wall_time: f64,
}

impl<C, R> Envelope<C, R> {
    pub fn new(command: &str, config: C, results: R, wall_time: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            config,
            results,
            wall_time,
        }
    }
}

/// Twelve significant digits, printed in the shortest form that reads back
/// to the rounded value.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    rounded.to_string()
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn curve_csv(curve: &RegretCurve) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for p in &curve.points {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            p.t,
            num(p.mean_regret),
            num(p.stderr),
            p.runs
        );
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
