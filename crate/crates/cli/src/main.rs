//! Scenario runner: reproduces every protocol experiment and synthesis
//! certification from declarative JSON files, emitting JSON reports and CSV
//! tables. Outputs are byte-identical across runs for fixed inputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use herald_core::scenario::{
    run_checks, run_loss_sim, run_roundtrip, run_samples, CertSpec, OutputKind, ScenarioFile,
    SweepSpec,
};

#[derive(Parser)]
#[command(
    name = "herald",
    about = "Simulate and verify single-photon-loss detection via controlled squeezing",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario file (JSON)
    #[arg(long)]
    scenario: PathBuf,
    /// Directory for output artifacts; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the scenario's sampling seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the scenario's shot count
    #[arg(long)]
    shots: Option<usize>,
    /// Re-run the embedded invariant checks and fail loudly on violation
    #[arg(long)]
    check: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the no-loss pipeline and report fidelity and vacuum probability
    Roundtrip(CommonArgs),
    /// Inject the scenario's loss event; emit report and count distribution
    LossSim(CommonArgs),
    /// Sweep the coupling strength over a grid; emit a CSV table
    Sweep(CommonArgs),
    /// Run a synthesis certification task; emit the certificate JSON
    Synth(CommonArgs),
    /// Draw seeded photon-count shots; emit one CSV row per shot
    Sample(CommonArgs),
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Roundtrip(args) => {
            let scenario = load_scenario(&args.scenario)?;
            let report = run_roundtrip(&scenario).map_err(|e| e.to_string())?;
            emit(&args.out, "report.json", &to_pretty(&report)?)?;
            finish_with_checks(&args, &scenario)
        }
        Command::LossSim(args) => {
            let scenario = load_scenario(&args.scenario)?;
            let artifacts = run_loss_sim(&scenario, args.seed).map_err(|e| e.to_string())?;
            // the scenario's outputs list selects artifacts; empty means
            // report + distribution
            let wants = |kind: OutputKind| {
                scenario.outputs.is_empty() && kind != OutputKind::Samples
                    || scenario.outputs.contains(&kind)
            };
            if wants(OutputKind::Report) {
                emit(&args.out, "report.json", &to_pretty(&artifacts.report)?)?;
            }
            if wants(OutputKind::Distribution) {
                emit(&args.out, "distribution.csv", &artifacts.distribution_csv)?;
            }
            if wants(OutputKind::Samples) {
                let csv =
                    run_samples(&scenario, args.seed, args.shots).map_err(|e| e.to_string())?;
                emit(&args.out, "samples.csv", &csv)?;
            }
            finish_with_checks(&args, &scenario)
        }
        Command::Sweep(args) => {
            let text = read_file(&args.scenario)?;
            let spec = SweepSpec::from_json(&text).map_err(|e| e.to_string())?;
            let csv = spec.csv().map_err(|e| e.to_string())?;
            emit(&args.out, "sweep.csv", &csv)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth(args) => {
            let text = read_file(&args.scenario)?;
            let spec = CertSpec::from_json(&text).map_err(|e| e.to_string())?;
            let value = spec.run().map_err(|e| e.to_string())?;
            let rendered = serde_json::to_string_pretty(&value).map_err(|e| e.to_string())?;
            emit(&args.out, "certificate.json", &rendered)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sample(args) => {
            let scenario = load_scenario(&args.scenario)?;
            let csv = run_samples(&scenario, args.seed, args.shots).map_err(|e| e.to_string())?;
            emit(&args.out, "samples.csv", &csv)?;
            finish_with_checks(&args, &scenario)
        }
    }
}

fn load_scenario(path: &Path) -> Result<ScenarioFile, String> {
    let text = read_file(path)?;
    ScenarioFile::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn read_file(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn to_pretty<T: serde::Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string_pretty(value).map_err(|e| e.to_string())
}

fn emit(out: &Option<PathBuf>, name: &str, content: &str) -> Result<(), String> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
            let path = dir.join(name);
            fs::write(&path, content).map_err(|e| format!("{}: {e}", path.display()))?;
            println!("wrote {}", path.display());
            Ok(())
        }
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn finish_with_checks(args: &CommonArgs, scenario: &ScenarioFile) -> Result<ExitCode, String> {
    if !args.check {
        return Ok(ExitCode::SUCCESS);
    }
    let results = run_checks(scenario).map_err(|e| e.to_string())?;
    let mut ok = true;
    for check in &results {
        let status = if check.passed { "ok" } else { "FAILED" };
        println!("check {}: {} ({})", check.name, status, check.detail);
        ok &= check.passed;
    }
    if ok {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error: embedded invariant checks failed");
        Ok(ExitCode::FAILURE)
    }
}
