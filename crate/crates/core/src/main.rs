use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use torus_she::cli::config::{ExperimentConfig, Suite};
use torus_she::cli::replicate::default_workers;
use torus_she::cli::{self, DEFAULT_CONFIG};
use torus_she::solver::{simulate, NoiseStream};
use torus_she::verification::render_text;
use torus_she::Result;

#[derive(Parser)]
#[command(name = "torus-she", version, about = "Stochastic heat equation on the torus: simulation and verification suites")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Experiment configuration (TOML). Defaults to the built-in sub-critical experiment.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override noise.master_seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override noise.replicas.
    #[arg(long, global = true)]
    replicas: Option<usize>,
    /// Worker threads for replica fan-out (results do not depend on it).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory (overrides `out` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one replica and write its snapshots and per-step summary.
    Simulate {
        /// Replica index within the master seed.
        #[arg(long, default_value_t = 0)]
        replica: u64,
    },
    VerifyKernel,
    VerifyMoments,
    VerifyHolder,
    VerifyComparison,
    VerifyPositivity,
    VerifyCritical,
    VerifySuperlinear,
    /// Run any suite, `all` included.
    Run {
        #[arg(long)]
        suite: Option<Suite>,
    },
    /// Re-render the reports stored in a run directory.
    Report {
        /// Run directory (defaults to --out or the configured output).
        dir: Option<PathBuf>,
    },
}

fn load(g: &Global) -> Result<ExperimentConfig> {
    let mut cfg = match &g.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::from_toml(DEFAULT_CONFIG)?,
    };
    if let Some(seed) = g.seed {
        cfg.noise.master_seed = seed;
    }
    if let Some(r) = g.replicas {
        cfg.noise.replicas = r;
    }
    if let Some(out) = &g.out {
        cfg.out = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_suite(g: &Global, suite: Option<Suite>) -> Result<bool> {
    let cfg = load(g)?;
    let suite = suite.unwrap_or(cfg.suite);
    let workers = g.workers.unwrap_or_else(default_workers);
    let out = cli::run(&cfg, suite, workers, &cfg.out)?;
    let reports: Vec<_> = out.reports().cloned().collect();
    print!("{}", render_text(&reports));
    println!("results written to {}", out.dir.display());
    Ok(out.all_pass())
}

fn simulate_one(g: &Global, replica: u64) -> Result<bool> {
    let cfg = load(g)?;
    let grid = cfg.grid.grid()?;
    let coeff = cfg.coefficients.build()?;
    let u0 = cfg.initial.sample(&grid);
    let traj = simulate(&coeff, &u0, &grid, &NoiseStream::new(cfg.noise.master_seed, replica), cfg.grid.snapshot_stride)?;
    std::fs::create_dir_all(&cfg.out)?;
    let bin = cfg.out.join(format!("replica_{replica}.bin"));
    let csv = cfg.out.join(format!("replica_{replica}_summary.csv"));
    traj.write_binary(std::io::BufWriter::new(std::fs::File::create(&bin)?))?;
    traj.write_summary_csv(std::io::BufWriter::new(std::fs::File::create(&csv)?))?;
    std::fs::write(cfg.out.join("config.toml"), cfg.to_toml()?)?;
    println!(
        "{} steps, final min {:e}, max {:e}; wrote {} and {}",
        traj.steps(),
        traj.running_min()[traj.steps()],
        traj.running_max()[traj.steps()],
        bin.display(),
        csv.display()
    );
    Ok(true)
}

fn report(g: &Global, dir: Option<PathBuf>) -> Result<bool> {
    let dir = match dir.or_else(|| g.out.clone()) {
        Some(d) => d,
        None => load(g)?.out,
    };
    let reports = cli::load_reports(&dir)?;
    print!("{}", render_text(&reports));
    Ok(reports.iter().all(|r| r.pass))
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let g = &args.global;
    let outcome = match args.command {
        Command::Simulate { replica } => simulate_one(g, replica),
        Command::VerifyKernel => run_suite(g, Some(Suite::Kernel)),
        Command::VerifyMoments => run_suite(g, Some(Suite::Moments)),
        Command::VerifyHolder => run_suite(g, Some(Suite::Holder)),
        Command::VerifyComparison => run_suite(g, Some(Suite::Comparison)),
        Command::VerifyPositivity => run_suite(g, Some(Suite::Positivity)),
        Command::VerifyCritical => run_suite(g, Some(Suite::Critical)),
        Command::VerifySuperlinear => run_suite(g, Some(Suite::Superlinear)),
        Command::Run { suite } => run_suite(g, suite),
        Command::Report { dir } => report(g, dir),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
