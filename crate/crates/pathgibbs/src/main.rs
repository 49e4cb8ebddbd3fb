//! Thin command-line front end; the work lives in `pathgibbs::driver`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pathgibbs::driver;
use pathgibbs::runconfig::RunConfig;

#[derive(Parser)]
#[command(
    name = "pathgibbs",
    version,
    about = "Gibbs point processes with Langevin path marks"
)]
struct Cli {
    /// Run configuration file (key = value sections).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel sections (0 = rayon default).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Exit with status 2 when diagnostics fail.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate path marks and export them with a moment check.
    SimulatePaths {
        #[arg(long, default_value_t = 16)]
        n_paths: usize,
    },
    /// Threshold activities and the contraction curve.
    Thresholds {
        #[arg(long)]
        beta: Option<f64>,
        /// Stability constant B_phi.
        #[arg(long = "B")]
        b: Option<f64>,
        /// Regularity constant C(beta).
        #[arg(long = "C")]
        c: Option<f64>,
        /// Estimate the regularity constant from the configured model.
        #[arg(long = "estimate-C")]
        estimate_c: bool,
    },
    /// Ursell function/kernel and the tree dominator on a points file.
    ClusterEval {
        #[arg(long)]
        points: PathBuf,
        /// The first SPLIT points form gamma, the rest xi.
        #[arg(long, default_value_t = 1)]
        split: usize,
    },
    /// Correlation estimates and fixed-point residuals at prefix tuples.
    KsEval {
        #[arg(long)]
        z: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        points: PathBuf,
    },
    /// Run the birth-death-move chain with estimators and GNZ diagnostics.
    Sample,
    /// Emit the potential profiles and contraction-curve data sets.
    ReproduceFigures,
}

fn run(cli: Cli) -> pathgibbs::Result<ExitCode> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::parse(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    cfg.apply_env_overrides(|var| std::env::var(var).ok())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(workers) = cli.workers {
        cfg.workers = workers;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.to_string_lossy().into_owned();
    }
    if cfg.workers > 0 {
        // Ignore failure: the global pool can only be set once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global();
    }
    let out = PathBuf::from(&cfg.out);

    let files = match cli.cmd {
        Cmd::SimulatePaths { n_paths } => driver::simulate_paths(&cfg, &out, n_paths)?,
        Cmd::Thresholds {
            beta,
            b,
            c,
            estimate_c,
        } => driver::thresholds(&cfg, &out, beta, b, c, estimate_c)?,
        Cmd::ClusterEval { points, split } => driver::cluster_eval(&cfg, &out, &points, split)?,
        Cmd::KsEval {
            z,
            beta,
            depth,
            budget,
            points,
        } => driver::ks_eval(&cfg, &out, z, beta, depth, budget, &points)?,
        Cmd::Sample => {
            let (files, diagnostics_ok) = driver::sample(&cfg, &out)?;
            for f in &files {
                println!("{}", f.display());
            }
            if cli.strict && !diagnostics_ok {
                eprintln!("diagnostics failed (GNZ residual beyond 3 standard errors)");
                return Ok(ExitCode::from(2));
            }
            return Ok(ExitCode::SUCCESS);
        }
        Cmd::ReproduceFigures => driver::reproduce_figures(&cfg, &out)?,
    };
    for f in &files {
        println!("{}", f.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
