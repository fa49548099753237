use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ldslope::error::Result;
use ldslope::estimators::EstimatorSpec;
use ldslope::family::FamilySpec;
use ldslope::harness::{self, ExperimentConfig, Overrides, RunManifest, EXIT_INVARIANT, OUTPUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "ldslope", version, about = "Large-deviation rates of location estimators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scaling law, limit curve and the two rate bounds.
    Bounds(RunArgs),
    /// Exact and Monte Carlo rates per estimator (rates.csv, slopes.json).
    Rates(RunArgs),
    /// Small-precision slopes compared with the bounds.
    Slopes(RunArgs),
    /// Run the invariant suite; exits 1 if any check fails.
    Verify(RunArgs),
    /// Merge finished runs into summary.csv and summary.json.
    Report {
        /// Run directories, each holding a manifest.json.
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long, env = OUTPUT_DIR_ENV)]
        output_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Family, e.g. `uniform` or `beta(2,3)`.
    #[arg(long)]
    family: Option<FamilySpec>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    eps_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    s_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    #[arg(long)]
    reps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated, e.g. `min_shift,cc(0.5),lr(0.1)`.
    #[arg(long, value_delimiter = ',')]
    estimators: Option<Vec<EstimatorSpec>>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Check tolerance override, `name=value`; repeatable.
    #[arg(long = "tolerance", value_parser = parse_tolerance)]
    tolerances: Vec<(String, f64)>,
    #[arg(long, value_delimiter = ',')]
    rate_epsilons: Option<Vec<f64>>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
}

fn parse_tolerance(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected name=value")?;
    let v: f64 = v.trim().parse().map_err(|_| format!("bad tolerance value `{v}`"))?;
    Ok((k.trim().to_string(), v))
}

impl RunArgs {
    fn load(self) -> Result<ExperimentConfig> {
        let overrides = Overrides {
            family: self.family,
            theta: self.theta,
            eps_grid: self.eps_grid,
            s_grid: self.s_grid,
            n_grid: self.n_grid,
            reps: self.reps,
            master_seed: self.seed,
            estimators: self.estimators,
            output_dir: self.output_dir,
            tolerances: self.tolerances,
            rate_epsilons: self.rate_epsilons,
            workers: self.workers,
        };
        ExperimentConfig::load(self.config.as_deref(), overrides)
    }
}

fn summarize(m: &RunManifest) {
    for w in &m.warnings {
        eprintln!("warning: {w}");
    }
    for f in &m.files {
        println!("{}  {}", f.sha256, f.path);
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Bounds(a) => summarize(&harness::run_bounds(&a.load()?)?),
        Command::Rates(a) => summarize(&harness::run_rates(&a.load()?)?),
        Command::Slopes(a) => summarize(&harness::run_slopes(&a.load()?)?),
        Command::Verify(a) => {
            let (_, report) = harness::run_verify(&a.load()?)?;
            for e in &report.entries {
                let tag = if e.status == harness::Status::Pass { "PASS" } else { "FAIL" };
                println!("{tag} {} measured={:e} tolerance={:e}", e.name, e.measured, e.tolerance);
            }
            println!("{} passed, {} failed", report.passed, report.failed);
            if !report.all_passed() {
                return Ok(EXIT_INVARIANT as u8);
            }
        }
        Command::Report { runs, output_dir } => {
            let out = output_dir.unwrap_or_else(|| PathBuf::from(harness::DEFAULT_OUTPUT_DIR));
            let refs: Vec<&std::path::Path> = runs.iter().map(PathBuf::as_path).collect();
            summarize(&harness::report(&refs, &out)?);
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { harness::EXIT_CONFIG as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(harness::exit_code(&e) as u8)
        }
    }
}

