//! `evac`: run, validate, oracle-check and render scenario bundles.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use evac_core::document::PlanDocument;
use evac_core::kb::validate_consistency;
use evac_core::pipeline::SolverChoice;
use evac_core::report::{render_report, ReportFormat};
use evac_core::routing::FallbackPolicy;
use evac_core::scenario::{exit_code, load_scenario, oracle_check, run_scenario, same_plan, ScenarioBundle, ScenarioError, ERROR_EXIT_CODE};

#[derive(Debug, Parser)]
#[command(name = "evac", version, about = "Evacuation vehicle allocation from a scenario bundle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the bundle's request and print the report.
    Run {
        dir: PathBuf,
        #[command(flatten)]
        solve: SolveFlags,
        #[arg(long, default_value = "text")]
        format: ReportFormat,
        /// Also solve by enumeration and fail if the plans differ.
        #[arg(long)]
        oracle: bool,
        /// Write the report here instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Check the bundle's entities against the schema rules.
    Validate { dir: PathBuf },
    /// Compare the exact solver against the brute-force oracle.
    OracleCheck {
        dir: PathBuf,
        #[command(flatten)]
        solve: SolveFlags,
    },
    /// Re-render a structured plan document.
    Render {
        plan: PathBuf,
        #[arg(long, default_value = "text")]
        format: ReportFormat,
    },
}

#[derive(Debug, Args)]
struct SolveFlags {
    /// Overrides the request's solver choice.
    #[arg(long)]
    solver: Option<SolverChoice>,
    /// Overrides the request's fallback policy.
    #[arg(long)]
    fallback: Option<FallbackPolicy>,
    /// Overrides the request's exact-solver cap.
    #[arg(long)]
    exact_cap: Option<usize>,
}

fn load(dir: &Path, flags: &SolveFlags) -> Result<ScenarioBundle, ScenarioError> {
    let mut b = load_scenario(dir)?;
    let options = &mut b.request.options;
    if let Some(s) = flags.solver {
        options.solver = s;
    }
    if flags.fallback.is_some() {
        options.fallback = flags.fallback;
    }
    if flags.exact_cap.is_some() {
        options.exact_cap = flags.exact_cap;
    }
    Ok(b)
}

fn fail(e: &ScenarioError) -> ExitCode {
    eprintln!("evac: error[{}]: {e}", e.code());
    ExitCode::from(ERROR_EXIT_CODE as u8)
}

fn check_oracle(b: &ScenarioBundle) -> Result<PlanDocument, String> {
    let (exact, oracle) = oracle_check(b).map_err(|e| format!("error[{}]: {e}", e.code()))?;
    if same_plan(&exact, &oracle) {
        Ok(exact)
    } else {
        Err(format!(
            "oracle mismatch: solver {:.4} s / {} vehicles, oracle {:.4} s / {} vehicles",
            exact.objective_s, exact.vehicles_used, oracle.objective_s, oracle.vehicles_used
        ))
    }
}

fn main() -> ExitCode {
    // clap exits 2 on usage errors, which here means "infeasible"
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(ERROR_EXIT_CODE as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Run {
            dir,
            solve,
            format,
            oracle,
            output,
        } => {
            let b = match load(&dir, &solve) {
                Ok(b) => b,
                Err(e) => return fail(&e),
            };
            let doc = if oracle {
                match check_oracle(&b) {
                    Ok(d) => d,
                    Err(msg) => {
                        eprintln!("evac: {msg}");
                        return ExitCode::from(ERROR_EXIT_CODE as u8);
                    }
                }
            } else {
                match run_scenario(&b) {
                    Ok(d) => d,
                    Err(e) => return fail(&e),
                }
            };
            let text = render_report(&doc, format);
            match output {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, text) {
                        eprintln!("evac: cannot write {}: {e}", path.display());
                        return ExitCode::from(ERROR_EXIT_CODE as u8);
                    }
                }
                None => print!("{text}"),
            }
            ExitCode::from(exit_code(&doc) as u8)
        }
        Command::Validate { dir } => {
            let b = match load_scenario(&dir) {
                Ok(b) => b,
                Err(e) => return fail(&e),
            };
            let store = match b.entities.to_store() {
                Ok(s) => s,
                Err(e) => return fail(&ScenarioError::Kb(e.to_string())),
            };
            let report = validate_consistency(&store);
            if report.is_ok() {
                println!(
                    "ok: {} triples, {} moving resources, {} rescue points, {} shelters",
                    store.len(),
                    b.entities.moving_resources.len(),
                    b.entities.rescue_points.len(),
                    b.entities.shelters.len()
                );
                ExitCode::SUCCESS
            } else {
                for v in &report.violations {
                    println!("{}\t{}\t{:?}", v.kind.code(), v.subject, v.kind);
                }
                eprintln!("evac: {} violations", report.violations.len());
                ExitCode::from(ERROR_EXIT_CODE as u8)
            }
        }
        Command::OracleCheck { dir, solve } => {
            let b = match load(&dir, &solve) {
                Ok(b) => b,
                Err(e) => return fail(&e),
            };
            match check_oracle(&b) {
                Ok(doc) => {
                    println!(
                        "match: {} s, {} vehicles, status {}",
                        doc.objective_s,
                        doc.vehicles_used,
                        doc.status.as_str()
                    );
                    ExitCode::SUCCESS
                }
                Err(msg) => {
                    eprintln!("evac: {msg}");
                    ExitCode::from(ERROR_EXIT_CODE as u8)
                }
            }
        }
        Command::Render { plan, format } => {
            let parsed = std::fs::read_to_string(&plan)
                .map_err(|e| e.to_string())
                .and_then(|t| PlanDocument::from_json(&t).map_err(|e| e.to_string()));
            match parsed {
                Ok(doc) => {
                    print!("{}", render_report(&doc, format));
                    ExitCode::from(exit_code(&doc) as u8)
                }
                Err(e) => {
                    eprintln!("evac: {}: {e}", plan.display());
                    ExitCode::from(ERROR_EXIT_CODE as u8)
                }
            }
        }
    }
}
