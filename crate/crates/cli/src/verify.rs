use std::io::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use tsh_core::theory::{
    verify_chernoff, verify_exceedance, verify_fact2, verify_lemma3, verify_lemma4,
    verify_lemma567, Lemma567Grid, Relation, Retain, VerificationReport,
};
use tsh_core::Execution;

use crate::output::num;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    All,
    Lemma3,
    Lemma4,
    Fact2,
    Lemma567,
    Chernoff,
    Exceedance,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    /// Emit one JSON line per grid point
    #[arg(long)]
    pub json: bool,
    /// Write the JSON lines here instead of stdout
    #[arg(long, requires = "json")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub serial: bool,
    /// Seed for the random trajectories of the exceedance suite
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub const LEMMA3_MAX_PARAM: u64 = 200;
pub const LEMMA3_TOLERANCE: f64 = 1e-10;
pub const FACT2_MAX_N: u64 = 200;
pub const LEMMA4_MAX_N: u64 = 500;
pub const LEMMA4_STEPS: u64 = 20;
pub const CHERNOFF_MAX_N: u64 = 500;
pub const EXCEEDANCE_TRAJECTORIES: usize = 50;
pub const EXCEEDANCE_STEPS: usize = 200;

const ORDER: [Suite; 6] = [
    Suite::Lemma3,
    Suite::Fact2,
    Suite::Lemma4,
    Suite::Chernoff,
    Suite::Lemma567,
    Suite::Exceedance,
];

fn run_suite(suite: Suite, retain: Retain, mode: Execution, seed: u64) -> VerificationReport {
    match suite {
        Suite::Lemma3 => verify_lemma3(LEMMA3_MAX_PARAM, LEMMA3_TOLERANCE, retain, mode),
        Suite::Fact2 => verify_fact2(FACT2_MAX_N, retain, mode),
        Suite::Lemma4 => verify_lemma4(LEMMA4_MAX_N, LEMMA4_STEPS, retain, mode),
        Suite::Chernoff => verify_chernoff(CHERNOFF_MAX_N, retain, mode),
        Suite::Lemma567 => verify_lemma567(&Lemma567Grid::default(), retain),
        Suite::Exceedance => {
            verify_exceedance(EXCEEDANCE_TRAJECTORIES, EXCEEDANCE_STEPS, seed, retain)
        }
        Suite::All => unreachable!("expanded by the caller"),
    }
}

fn worst_label(relation: Relation) -> &'static str {
    match relation {
        Relation::Equal { .. } => "max residual",
        Relation::AtLeast | Relation::AtMost => "min margin",
    }
}

/// Returns whether every selected suite passed.
pub fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    let suites: Vec<Suite> = match args.suite {
        Suite::All => ORDER.to_vec(),
        s => vec![s],
    };
    let retain = if args.json {
        Retain::All
    } else {
        Retain::Violations
    };
    let mode = if args.serial {
        Execution::Serial
    } else {
        Execution::Parallel
    };

    let mut sink: Option<Box<dyn std::io::Write>> = match (&args.json, &args.out) {
        (true, Some(path)) => Some(Box::new(std::io::BufWriter::new(std::fs::File::create(
            path,
        )?))),
        (true, None) => Some(Box::new(std::io::BufWriter::new(std::io::stdout().lock()))),
        _ => None,
    };
    // keep stdout clean for JSON lines
    let table_to_stderr = args.json && args.out.is_none();
    let mut table = String::new();
    table.push_str(&format!(
        "{:<11} {:>9} {:>10} {:>14} {:>22} {:>8}  {}\n",
        "suite", "points", "violations", "measure", "value", "seconds", "status"
    ));

    let mut all_passed = true;
    for suite in suites {
        let started = Instant::now();
        let report = run_suite(suite, retain, mode, args.seed);
        let secs = started.elapsed().as_secs_f64();
        if let Some(w) = sink.as_mut() {
            for record in report.records() {
                serde_json::to_writer(&mut *w, &record)?;
                w.write_all(b"\n")?;
            }
        }
        all_passed &= report.passed();
        table.push_str(&format!(
            "{:<11} {:>9} {:>10} {:>14} {:>22} {:>8.2}  {}\n",
            report.lemma,
            report.points,
            report.violations,
            worst_label(report.relation),
            num(report.worst),
            secs,
            if report.passed() { "ok" } else { "FAILED" }
        ));
    }
    if let Some(mut w) = sink {
        w.flush()?;
    }
    if table_to_stderr {
        eprint!("{table}");
    } else {
        print!("{table}");
    }
    Ok(all_passed)
}
