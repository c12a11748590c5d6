//! Command-line front end.
//!
//! Exit codes: 0 success (for `compare`: invariants equal), 1 malformed
//! input, 2 validation failure, 3 not conjugate, 4 search bounds exceeded.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use chorizo::chains::{ChainBounds, ChainError};
use chorizo::conjugacy::{self, Verdict};
use chorizo::model::{self, PseudoPeriodicData, Validated};
use chorizo::quotient::{self, BuildError};
use chorizo::{catalog, graphs};

#[derive(Parser)]
#[command(name = "chorizo", version, about = "Degenerate-fiber models and conjugacy invariants for pseudoperiodic surface homeomorphisms")]
struct Cli {
    /// Search bounds for annulus chains: max length, max entry.
    #[arg(long, global = true, value_name = "L,N", value_parser = parse_bounds)]
    bounds: Option<ChainBounds>,
    /// Print progress details to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an input file; prints the validation report.
    Validate { file: PathBuf },
    /// Build the generalized quotient; prints chorizo JSON including checks.
    Quotient {
        file: PathBuf,
        /// Also write a DOT rendering of the dual graph here.
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
    },
    /// Print canonical encodings of the invariant triple.
    Invariants {
        file: PathBuf,
        /// Also write DOT renderings (partition graph, refined graph, quotient) into this directory.
        #[arg(long, value_name = "DIR")]
        dot_dir: Option<PathBuf>,
    },
    /// Compare the conjugacy invariants of two inputs.
    Compare { file1: PathBuf, file2: PathBuf },
    /// List built-in examples, print one, or export them as input files.
    Catalog {
        /// Print this entry as input JSON.
        #[arg(long)]
        name: Option<String>,
        /// Write every entry as <name>.json into this directory.
        #[arg(long, value_name = "DIR")]
        export: Option<PathBuf>,
    },
    /// Run all built-in examples through validation and the fiber checks.
    Selfcheck,
}

fn parse_bounds(s: &str) -> Result<ChainBounds, String> {
    let (l, n) = s.split_once(',').ok_or("expected L,N")?;
    let max_len: usize = l.trim().parse().map_err(|e| format!("bad length bound: {e}"))?;
    let max_entry: u64 = n.trim().parse().map_err(|e| format!("bad entry bound: {e}"))?;
    if max_len == 0 || max_entry == 0 {
        return Err("bounds must be positive".into());
    }
    Ok(ChainBounds { max_len, max_entry })
}

const EXIT_MALFORMED: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_NOT_CONJUGATE: u8 = 3;
const EXIT_BOUNDS: u8 = 4;

fn load(path: &Path) -> Result<PseudoPeriodicData, u8> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_MALFORMED
    })?;
    PseudoPeriodicData::from_json(&text).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_MALFORMED
    })
}

fn load_validated(path: &Path) -> Result<Validated, u8> {
    let data = load(path)?;
    Validated::new(data).map_err(|report| {
        eprint!("{report}");
        EXIT_INVALID
    })
}

fn build_error_code(e: &BuildError) -> u8 {
    match e {
        BuildError::Chain { source: ChainError::SearchBoundExceeded { .. }, .. } => EXIT_BOUNDS,
        _ => EXIT_INVALID,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let bounds = cli.bounds.unwrap_or_default();
    match run(cli.command, &bounds, cli.verbose) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}

fn run(command: Command, bounds: &ChainBounds, verbose: bool) -> Result<(), u8> {
    match command {
        Command::Validate { file } => {
            let data = load(&file)?;
            let report = model::validate(&data);
            let doc = json!({
                "valid": report.is_valid(),
                "violations": report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
            if report.is_valid() {
                Ok(())
            } else {
                Err(EXIT_INVALID)
            }
        }
        Command::Quotient { file, dot } => {
            let v = load_validated(&file)?;
            let ch = quotient::build_generalized_quotient(&v, bounds).map_err(|e| {
                eprintln!("error: {e}");
                build_error_code(&e)
            })?;
            let doc = serde_json::to_value(quotient::chorizo_json(&ch, v.genus())).unwrap();
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
            if let Some(path) = dot {
                std::fs::write(&path, quotient::chorizo_dot(&ch)).map_err(|e| {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    EXIT_MALFORMED
                })?;
                if verbose {
                    eprintln!("wrote {}", path.display());
                }
            }
            Ok(())
        }
        Command::Invariants { file, dot_dir } => {
            let v = load_validated(&file)?;
            let triple = conjugacy::invariants(&v, bounds).map_err(|e| {
                eprintln!("error: {e}");
                match e {
                    conjugacy::InvariantError::Build(ref b) => build_error_code(b),
                    _ => EXIT_INVALID,
                }
            })?;
            let doc = json!({
                "genus": triple.genus,
                "chorizo": triple.chorizo_encoding,
                "weighted_graph": triple.weighted_encoding,
                "action_class": triple.action_encoding,
            });
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
            if let Some(dir) = dot_dir {
                std::fs::create_dir_all(&dir).map_err(|e| {
                    eprintln!("error: cannot create {}: {e}", dir.display());
                    EXIT_MALFORMED
                })?;
                let x = graphs::partition_graph(&v);
                let (xbar, action) = graphs::refined_with_action(&v);
                let y = graphs::quotient_weighted_graph(&xbar, &action);
                let writes = [
                    ("partition.dot", graphs::partition_dot(&x, None)),
                    ("refined.dot", graphs::partition_dot(&xbar, Some(&action))),
                    ("quotient.dot", graphs::weighted_dot(&y)),
                ];
                for (name, text) in writes {
                    let path = dir.join(name);
                    std::fs::write(&path, text).map_err(|e| {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        EXIT_MALFORMED
                    })?;
                    if verbose {
                        eprintln!("wrote {}", path.display());
                    }
                }
            }
            Ok(())
        }
        Command::Compare { file1, file2 } => {
            let a = load_validated(&file1)?;
            let b = load_validated(&file2)?;
            let cmp = conjugacy::conjugate(&a, &b, bounds).map_err(|e| {
                eprintln!("error: {e}");
                match e {
                    conjugacy::CompareError::Invariants(conjugacy::InvariantError::Build(ref b)) => build_error_code(b),
                    _ => EXIT_INVALID,
                }
            })?;
            let doc = serde_json::to_value(&cmp).unwrap();
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
            if cmp.verdict == Verdict::InvariantsEqual {
                Ok(())
            } else {
                Err(EXIT_NOT_CONJUGATE)
            }
        }
        Command::Catalog { name, export } => {
            match (name, export) {
                (Some(name), None) => {
                    let entry = catalog::builtin_get(&name).ok_or_else(|| {
                        eprintln!("error: unknown catalog entry {name:?}");
                        EXIT_MALFORMED
                    })?;
                    println!("{}", entry.data.to_json());
                }
                (None, Some(dir)) => {
                    std::fs::create_dir_all(&dir).map_err(|e| {
                        eprintln!("error: cannot create {}: {e}", dir.display());
                        EXIT_MALFORMED
                    })?;
                    for name in catalog::builtin_list() {
                        let entry = catalog::builtin_get(name).unwrap();
                        let path = dir.join(format!("{name}.json"));
                        std::fs::write(&path, entry.data.to_json()).map_err(|e| {
                            eprintln!("error: cannot write {}: {e}", path.display());
                            EXIT_MALFORMED
                        })?;
                        println!("{}", path.display());
                    }
                }
                (None, None) => {
                    for name in catalog::builtin_list() {
                        println!("{name}");
                    }
                }
                (Some(_), Some(_)) => {
                    eprintln!("error: --name and --export are mutually exclusive");
                    return Err(EXIT_MALFORMED);
                }
            }
            Ok(())
        }
        Command::Selfcheck => {
            let mut failed = false;
            for name in catalog::builtin_list() {
                let entry = catalog::builtin_get(name).unwrap();
                let genus = entry.data.genus;
                let result = (|| -> Result<(), String> {
                    let v = Validated::new(entry.data.clone()).map_err(|r| format!("validation: {r}"))?;
                    let ch = quotient::build_generalized_quotient(&v, bounds).map_err(|e| e.to_string())?;
                    if !quotient::euler_balance(&ch, genus) {
                        return Err("euler balance failed".into());
                    }
                    quotient::self_intersections(&ch).map_err(|e| e.to_string())?;
                    if !quotient::intersection_form_semidefinite(&ch).semidefinite {
                        return Err("intersection form not negative semidefinite".into());
                    }
                    if let Some(expected) = &entry.expected_multiplicities {
                        let got = ch.multiplicity_multiset();
                        if &got != expected {
                            return Err(format!("multiplicities {got:?}, expected {expected:?}"));
                        }
                    }
                    conjugacy::invariants(&v, bounds).map_err(|e| e.to_string())?;
                    Ok(())
                })();
                match result {
                    Ok(()) => println!("ok   {name}"),
                    Err(e) => {
                        failed = true;
                        println!("FAIL {name}: {e}");
                    }
                }
            }
            let f1 = Validated::new(catalog::builtin_get("nielsen-f1").unwrap().data).unwrap();
            let f2 = Validated::new(catalog::builtin_get("nielsen-f2").unwrap().data).unwrap();
            match conjugacy::conjugate(&f1, &f2, bounds) {
                Ok(cmp) if cmp.verdict == Verdict::DistinctAction => {
                    println!("ok   nielsen-f1 vs nielsen-f2 -> DISTINCT_ACTION");
                }
                Ok(cmp) => {
                    failed = true;
                    println!("FAIL nielsen-f1 vs nielsen-f2: verdict {}", cmp.verdict.as_str());
                }
                Err(e) => {
                    failed = true;
                    println!("FAIL nielsen-f1 vs nielsen-f2: {e}");
                }
            }
            if failed {
                Err(EXIT_INVALID)
            } else {
                Ok(())
            }
        }
    }
}
