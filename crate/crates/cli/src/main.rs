use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use mse_tomography::experiment::{
    emit_csv, fit_report, parse_post_processing, read_csv, run_experiment, write_csv,
    ExperimentConfig, Mode,
};
use mse_tomography::metrics::DEFAULT_WINDOWS;
use mse_tomography::Error;

#[derive(Parser)]
#[command(
    name = "msetomo",
    version,
    about = "Monte Carlo experiments for CSPSA + MLE qudit estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an estimation experiment and write the results table as CSV.
    Estimate(EstimateArgs),
    /// Fit mean MSE = p / N_T^a to a results CSV.
    Fit(FitArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    State,
    Unitary,
}

#[derive(clap::Args)]
struct EstimateArgs {
    mode: ModeArg,
    /// Flat key = value config file; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    /// Shots per probe; repeat or comma-separate for a sweep.
    #[arg(long, value_delimiter = ',')]
    shots: Vec<u64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    targets: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Use the exact squared error instead of sampled counts.
    #[arg(long)]
    noiseless: bool,
    /// none, closest or gs.
    #[arg(long)]
    post: Option<String>,
    /// Feed post-processed columns back into the next iteration.
    #[arg(long)]
    re_update: bool,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct FitArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Iteration window `lo:hi`; repeatable. Defaults to 10:45 and 46:100.
    #[arg(long, value_parser = parse_window)]
    window: Vec<(usize, usize)>,
}

fn parse_window(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    let lo = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad lower bound in `{s}`"))?;
    let hi = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad upper bound in `{s}`"))?;
    if lo >= hi {
        return Err(format!("window `{s}` must have lo < hi"));
    }
    Ok((lo, hi))
}

fn build_config(args: &EstimateArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.mode = match args.mode {
        ModeArg::State => Mode::State,
        ModeArg::Unitary => Mode::Unitary,
    };
    if let Some(d) = args.d {
        cfg.dim = d;
    }
    if !args.shots.is_empty() {
        cfg.shots = args.shots.clone();
    }
    if let Some(k) = args.iters {
        cfg.iterations = k;
    }
    if let Some(m) = args.targets {
        cfg.targets = m;
    }
    if let Some(n) = args.runs {
        cfg.runs = n;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.noiseless {
        cfg.noiseless = true;
    }
    if let Some(post) = &args.post {
        cfg.unitary.post_processing = parse_post_processing(post)?;
    }
    if args.re_update {
        cfg.unitary.re_update = true;
    }
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn estimate(args: &EstimateArgs) -> Result<(), Error> {
    let cfg = build_config(args)?;
    info!("running {:?}", cfg);
    let table = run_experiment(&cfg)?;
    if table.diagnostics.restarts > 0 || table.diagnostics.post_processing_fallbacks > 0 {
        info!("diagnostics: {:?}", table.diagnostics);
    }
    match &cfg.out {
        Some(path) => emit_csv(&table, path),
        None => write_csv(&table, io::stdout().lock()).map_err(|source| Error::Csv {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn fit(args: &FitArgs) -> Result<(), Error> {
    let table = read_csv(&args.input)?;
    let windows = if args.window.is_empty() {
        DEFAULT_WINDOWS.to_vec()
    } else {
        args.window.clone()
    };
    let fits = fit_report(&table, &windows)?;
    println!("mode,d,N,variant,k_lo,k_hi,p,a,residual");
    for f in fits {
        println!(
            "{},{},{},{},{},{},{:.6},{:.6},{:.3e}",
            f.mode,
            f.dim,
            f.shots,
            f.variant,
            f.fit.window.0,
            f.fit.window.1,
            f.fit.p,
            f.fit.a,
            f.fit.residual
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Estimate(args) => estimate(args),
        Command::Fit(args) => fit(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = match e {
                Error::Config(_) | Error::Range(_) => 2,
                _ => 1,
            };
            eprintln!("error: {:#}", anyhow::Error::new(e));
            ExitCode::from(code)
        }
    }
}
