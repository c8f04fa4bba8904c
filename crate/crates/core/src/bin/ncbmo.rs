use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ncbmo::harness::{self, report, ExperimentConfig, Stage};

#[derive(Parser)]
#[command(name = "ncbmo", version, about = "Schur multipliers, semigroup BMO and Markov dilations at matrix scale")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for report.csv and summary.json.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long = "cap-bmo", global = true)]
    cap_bmo: Option<f64>,
    #[arg(long = "cap-lipschitz", global = true)]
    cap_lipschitz: Option<f64>,
    #[arg(long = "cap-logn", global = true)]
    cap_logn: Option<f64>,
    #[arg(long = "cap-vector", global = true)]
    cap_vector: Option<f64>,
    #[arg(long = "cap-vector-bmo", global = true)]
    cap_vector_bmo: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Property suites over the numerical core.
    Verify,
    /// One experiment.
    Bench {
        #[arg(value_enum)]
        experiment: Bench,
    },
    /// Dilation identity and path-modulus checks.
    Dilation,
    /// Suites and all experiments.
    Run,
    /// Print the effective configuration.
    ShowConfig,
}

#[derive(Clone, Copy, ValueEnum)]
enum Bench {
    Lipschitz,
    Logn,
    Bmo,
    Vector,
}

fn load_config(common: &Common) -> ncbmo::Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
        cfg.bmo.trials = None;
        cfg.lipschitz.trials = None;
        cfg.logn.trials = None;
        cfg.vector.trials = None;
    }
    let caps = [
        ("bmo", common.cap_bmo),
        ("lipschitz", common.cap_lipschitz),
        ("logn", common.cap_logn),
        ("vector", common.cap_vector),
        ("vector_bmo", common.cap_vector_bmo),
    ];
    for (name, value) in caps {
        if let Some(v) = value {
            cfg.caps.set(name, v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(common: &Common, cfg: &ExperimentConfig) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| std::env::var_os("NCBMO_OUT").map(PathBuf::from))
        .or_else(|| cfg.out_dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("ncbmo-out"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let cfg = match load_config(&cli.common) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("ncbmo: {e}");
            return ExitCode::from(2);
        }
    };
    let stages: Vec<Stage> = match cli.command {
        Command::ShowConfig => {
            println!("{}", cfg.to_json());
            return ExitCode::SUCCESS;
        }
        Command::Verify => vec![Stage::Verify],
        Command::Dilation => vec![Stage::Dilation],
        Command::Run => Stage::ALL.to_vec(),
        Command::Bench { experiment } => vec![match experiment {
            Bench::Lipschitz => Stage::Lipschitz,
            Bench::Logn => Stage::Logn,
            Bench::Bmo => Stage::Bmo,
            Bench::Vector => Stage::Vector,
        }],
    };
    let outcome = match harness::run_stages(&cfg, &stages) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("ncbmo: {e}");
            return ExitCode::from(2);
        }
    };
    let dir = out_dir(&cli.common, &cfg);
    if let Err(e) = report::write_reports(&dir, &outcome.rows) {
        eprintln!("ncbmo: cannot write reports to {}: {e}", dir.display());
        return ExitCode::from(2);
    }
    let summary = report::summarize(&outcome.rows);
    for (name, e) in &summary.experiments {
        let max = e.max_asserted.or(e.max_observed).map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into());
        println!(
            "{name:<34} pass {:>5}  fail {:>3}  skipped {:>3}  report {:>5}  max {max}",
            e.passed, e.failed, e.skipped, e.reported
        );
    }
    println!("reports written to {}", dir.display());
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        eprint!("{}", report::failure_dump(&outcome.rows));
        ExitCode::from(1)
    }
}
