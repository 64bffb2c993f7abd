use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use swe_ofdg_harness::cases::{self, BenchmarkCase, CaseKind};
use swe_ofdg_harness::config::FileConfig;
use swe_ofdg_harness::convergence;
use swe_ofdg_harness::runner::{self, RunSettings};
use swe_ofdg_harness::snapshot::{self, RunMetadata};
use swe_ofdg_harness::{HarnessError, BUILD};

#[derive(Parser)]
#[command(name = "swe-ofdg", version = BUILD, about = "Oscillation-free DG shallow water benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a case and write snapshots plus an error report.
    Run(RunArgs),
    /// A-posteriori convergence study on successively doubled meshes.
    Convergence {
        #[command(flatten)]
        run: RunArgs,
        /// Number of refinements.
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Run a still-water case and report the deviation from the initial state.
    Wellbalance(RunArgs),
    /// List the registered cases.
    ListCases,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Case id (see `list-cases`).
    #[arg(long)]
    case: Option<String>,
    /// Polynomial degree k.
    #[arg(short = 'k', long = "degree")]
    degree: Option<usize>,
    /// Cell counts: N in 1D, "NX,NY" in 2D.
    #[arg(long, value_delimiter = ',')]
    cells: Option<Vec<usize>>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    /// Positivity limiter on/off (default from the case).
    #[arg(long)]
    limiter: Option<bool>,
    /// Oscillation-free damping on/off.
    #[arg(long)]
    damping: Option<bool>,
    /// Run cell loops sequentially.
    #[arg(long)]
    sequential: bool,
    /// Directory for snapshots and reports.
    #[arg(long, short = 'o')]
    output_dir: Option<PathBuf>,
    /// TOML file with any of the above options.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> Result<(BenchmarkCase, RunSettings, FileConfig), HarnessError> {
        let file = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let cli = FileConfig {
            case: self.case.clone(),
            degree: self.degree,
            cells: self.cells.clone(),
            cfl: self.cfl,
            t_final: self.t_final,
            limiter: self.limiter,
            damping: self.damping,
            sequential: self.sequential.then_some(true),
            output_times: None,
            output_dir: self.output_dir.clone(),
        };
        let merged = cli.overlay(file);
        let id = merged
            .case
            .clone()
            .ok_or_else(|| HarnessError::InvalidConfig("no case given (--case or `case` in the config)".into()))?;
        let case = cases::find(&id).ok_or(HarnessError::UnknownCase(id))?;
        let settings = merged.settings(&case)?;
        Ok((case, settings, merged))
    }
}

fn run(args: &RunArgs, require_kind: Option<CaseKind>) -> Result<(), HarnessError> {
    let (case, settings, cfg) = args.resolve()?;
    if let Some(kind) = require_kind {
        if case.kind != kind {
            return Err(HarnessError::InvalidConfig(format!("{} is not a still-water case", case.id)));
        }
    }
    let outcome = runner::run_case(&case, &settings)?;
    let report = runner::analyse(&case, &outcome);
    let dir = cfg.output_dir.unwrap_or_else(|| PathBuf::from("output"));
    for snap in &outcome.snapshots {
        let meta = RunMetadata {
            case: case.id.to_string(),
            degree: settings.degree,
            cells: settings.cells.clone(),
            cfl: settings.cfl,
            t_final: settings.t_final,
            time: snap.time,
            limiter: settings.limiter,
            damping: settings.damping,
            g: case.g,
            build: BUILD.to_string(),
        };
        let stem = snapshot::snapshot_stem(case.id, settings.degree, &settings.cells, snap.time);
        let path = snapshot::write_snapshot(&dir, &stem, &snap.field, &meta)?;
        println!("wrote {}", path.display());
    }
    let stem = snapshot::snapshot_stem(case.id, settings.degree, &settings.cells, settings.t_final);
    let report_path = dir.join(format!("{stem}.report.json"));
    std::fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;
    println!(
        "{}: k={} cells={:?} steps={} wall={:.2}s mass defect={:.3e}",
        case.id, settings.degree, settings.cells, outcome.steps, outcome.wall_seconds, report.relative_mass_defect
    );
    if let Some(m) = report.min_depth {
        println!("  min depth {m:.3e}");
    }
    for e in &report.errors {
        println!(
            "  {:>4} vs {}: L1 {:.3e}  L2 {:.3e}  Linf {:.3e}",
            e.variable, report.reference, e.norms.l1, e.norms.l2, e.norms.linf
        );
    }
    println!("wrote {}", report_path.display());
    Ok(())
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::ListCases => {
            for c in cases::registry() {
                println!("{:<24} {}D  t={:<6} {}", c.id, c.dimension(), c.t_final, c.summary);
            }
            Ok(())
        }
        Command::Run(args) => run(&args, None),
        Command::Wellbalance(args) => run(&args, Some(CaseKind::WellBalance)),
        Command::Convergence { run, levels } => {
            let (case, settings, cfg) = run.resolve()?;
            let table = convergence::study(&case, &settings, levels)?;
            print!("{}", table.render());
            if let Some(dir) = cfg.output_dir {
                std::fs::create_dir_all(&dir)?;
                let path = dir.join(format!("{}_k{}_convergence.json", case.id, settings.degree));
                std::fs::write(&path, serde_json::to_string_pretty(&table)?)?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
