//! Command-line front end: `run`, `check-poset` and `oracle`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::blocks::{
    agreeing_blocks, e_member, first_agreeing_block, judged_blocks, non_subset_witness_with,
    refines_at, remark_counterexamples, star_dominates_at, BitSeq, BlockError, IncSeq, Thinning,
    Window, Witness,
};
use crate::harness::{read_json, run_scenario, HarnessError, Report, Scenario};
use crate::poset::PosetSpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "meager",
    version,
    about = "Simulated generic extensions with meager-ideal embeddings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a generic chain for a scenario and verify the inclusion matrix.
    Run {
        scenario: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Validate a poset file and print its ranks.
    CheckPoset { poset: PathBuf },
    /// Evaluate a block-level oracle on a JSON input.
    Oracle { op: OracleOp, input: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OracleOp {
    #[value(alias = "refines_at")]
    RefinesAt,
    #[value(alias = "e_member")]
    EMember,
    #[value(alias = "non_subset_witness")]
    NonSubsetWitness,
    #[value(alias = "remark_counterexamples")]
    RemarkCounterexamples,
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_MALFORMED
            } else {
                EXIT_OK
            };
        }
    };
    match cli.command {
        Command::Run {
            scenario,
            out,
            seed,
            resolution,
        } => cmd_run(&scenario, out.as_deref(), seed, resolution),
        Command::CheckPoset { poset } => cmd_check_poset(&poset),
        Command::Oracle { op, input } => cmd_oracle(op, &input),
    }
}

fn report_error(e: &HarnessError) -> i32 {
    eprintln!("error: {e}");
    if e.is_input_error() {
        EXIT_MALFORMED
    } else {
        EXIT_FAILED
    }
}

fn cmd_run(path: &Path, out: Option<&Path>, seed: Option<u64>, resolution: Option<usize>) -> i32 {
    let (mut sc, rp) = match Scenario::load(path) {
        Ok(v) => v,
        Err(e) => return report_error(&e),
    };
    if let Some(seed) = seed {
        sc.seed = seed;
    }
    if let Some(r) = resolution {
        sc.resolution = r;
    }
    let outcome = match run_scenario(&sc, &rp) {
        Ok(o) => o,
        Err(e) => return report_error(&e),
    };
    let report = Report::new(&sc, &outcome);
    let json = report.to_json();
    let summary = format!(
        "chain length {}, {} steps, {} mismatched cells, {} undetermined, coverage {}",
        report.chain_length,
        report.steps,
        report.verdict.mismatches.len(),
        report.verdict.undetermined.len(),
        if report.verdict.coverage_clean && report.verdict.coverage_misses == 0 {
            "clean".to_owned()
        } else if report.verdict.coverage_clean {
            format!(
                "clean ({} misses on unguarded reals)",
                report.verdict.coverage_misses
            )
        } else {
            format!("{} misses", report.verdict.coverage_misses)
        }
    );
    match out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, json + "\n") {
                eprintln!("error: cannot write {}: {e}", p.display());
                return EXIT_MALFORMED;
            }
            println!("{summary}");
        }
        None => {
            println!("{json}");
            eprintln!("{summary}");
        }
    }
    for (a, b) in &report.verdict.mismatches {
        eprintln!("mismatch: E_{a} ⊆ E_{b}");
    }
    if report.verdict.passed {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

fn cmd_check_poset(path: &Path) -> i32 {
    let rp = match read_json::<PosetSpec>(path).and_then(|s| Ok(s.build()?)) {
        Ok(rp) => rp,
        Err(e) => return report_error(&e),
    };
    println!("{rp}");
    EXIT_OK
}

#[derive(Debug, Deserialize)]
struct RefinesInput {
    f: IncSeq,
    g: IncSeq,
    #[serde(default = "whole")]
    window: Window,
}

#[derive(Debug, Deserialize)]
struct EMemberInput {
    z: BitSeq,
    x: BitSeq,
    f: IncSeq,
    #[serde(default)]
    m: usize,
    #[serde(default = "whole")]
    window: Window,
}

#[derive(Debug, Deserialize)]
struct WitnessInput {
    x: BitSeq,
    y: BitSeq,
    f: IncSeq,
    g: IncSeq,
    #[serde(default = "whole")]
    window: Window,
    #[serde(default)]
    thinning: Thinning,
}

#[derive(Debug, Deserialize)]
struct RemarkInput {
    bound: usize,
}

fn whole() -> Window {
    Window::from(0)
}

#[derive(Serialize)]
struct WitnessOutput {
    #[serde(flatten)]
    witness: Witness,
    f_side_member: bool,
    y_blocks_matched: Vec<usize>,
}

fn checked(w: Window) -> Result<Window, BlockError> {
    Window::new(w.threshold, w.limit)
}

fn cmd_oracle(op: OracleOp, input: &Path) -> i32 {
    let text = match std::fs::read_to_string(input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", input.display());
            return EXIT_MALFORMED;
        }
    };
    let result = match op {
        OracleOp::RefinesAt => parse(&text).and_then(|i: RefinesInput| {
            let w = checked(i.window).map_err(bad)?;
            let violations = refines_at(&i.f, &i.g, w).map_err(bad)?;
            Ok(serde_json::json!({
                "refines": violations.is_empty(),
                "violations": violations,
                "judged": judged_blocks(&i.f, &i.g, w),
            }))
        }),
        OracleOp::EMember => parse(&text).and_then(|i: EMemberInput| {
            let w = checked(i.window).map_err(bad)?;
            let member = e_member(&i.z, &i.x, &i.f, i.m, w).map_err(bad)?;
            let first = first_agreeing_block(&i.z, &i.x, &i.f, i.m, w).map_err(bad)?;
            Ok(serde_json::json!({ "member": member, "first_agreeing_block": first }))
        }),
        OracleOp::NonSubsetWitness => parse(&text).and_then(|i: WitnessInput| {
            let w = checked(i.window).map_err(bad)?;
            let witness =
                non_subset_witness_with(&i.x, &i.y, &i.f, &i.g, w, i.thinning).map_err(bad)?;
            let f_side_member = e_member(&witness.z, &i.x, &i.f, 0, w).map_err(bad)?;
            let y_blocks_matched = agreeing_blocks(&witness.z, &i.y, &i.g, &witness.selected);
            serde_json::to_value(WitnessOutput {
                witness,
                f_side_member,
                y_blocks_matched,
            })
            .map_err(|e| e.to_string())
        }),
        OracleOp::RemarkCounterexamples => parse(&text).and_then(|i: RemarkInput| {
            let pairs = remark_counterexamples(i.bound).map_err(bad)?;
            let w = pairs.window;
            let (f1, g1) = &pairs.dominated_not_refined;
            let (f2, g2) = &pairs.refined_not_dominated;
            Ok(serde_json::json!({
                "pairs": pairs,
                "recheck": {
                    "dominated_not_refined": {
                        "star_violations": star_dominates_at(f1, g1, w).map_err(bad)?,
                        "refine_violations": refines_at(f1, g1, w).map_err(bad)?,
                    },
                    "refined_not_dominated": {
                        "star_violations": star_dominates_at(f2, g2, w).map_err(bad)?,
                        "refine_violations": refines_at(f2, g2, w).map_err(bad)?,
                    },
                },
            }))
        }),
    };
    match result {
        Ok(v) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&v).expect("json value serializes")
            );
            EXIT_OK
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_MALFORMED
        }
    }
}

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| format!("malformed oracle input: {e}"))
}

fn bad(e: BlockError) -> String {
    e.to_string()
}
