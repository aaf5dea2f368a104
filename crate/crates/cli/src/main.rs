use std::path::PathBuf;
use std::process::ExitCode;

use bcm_core::harness::{parse_lambda, run_experiment, ExperimentConfig, Preset, Profile};
use bcm_core::Error;
use clap::{Args, Parser, Subcommand};
use log::error;

#[derive(Parser, Debug)]
#[command(name = "bcm", version, about = "Elliptic ND map reconstruction from hyperbolic boundary data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Euclidean speed, λ = 0, α = 1e-4, noise 0/1/2/5%.
    Exp1(Overrides),
    /// α sweep 1e-1 … 1e-10 on the Experiment 1 data.
    Exp2(Overrides),
    /// Conformal speed, λ = 0, α = 1e-4, noise 0/1/2/5%.
    Exp3(Overrides),
    /// Frequency sweeps over (-8, 8) and (-8i, 8i) with q ≡ π.
    Exp4 {
        /// Which sweep to run.
        #[arg(long, value_parser = ["both", "real", "imag"], default_value = "both")]
        sweep: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Custom job from a config file and flags.
    Run(Overrides),
}

#[derive(Args, Debug, Clone, Default)]
struct Overrides {
    /// key = value config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    t_final: Option<f64>,
    /// Frequency as RE or RE,IM. Repeatable.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Vec<String>,
    /// Repeatable.
    #[arg(long)]
    alpha: Vec<f64>,
    /// Noise level as a fraction. Repeatable.
    #[arg(long)]
    noise: Vec<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also run the wave solver with each control and compare with the elliptic solution.
    #[arg(long)]
    snapshot: bool,
    #[arg(long, value_parser = ["full", "ci"])]
    profile: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    /// Directory for cached hyperbolic maps.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Normal system: weighted (default) or printed.
    #[arg(long, value_parser = ["weighted", "printed"])]
    form: Option<String>,
    /// Ground-truth closure: one-sided (default) or ghost.
    #[arg(long, value_parser = ["one-sided", "ghost"])]
    closure: Option<String>,
    #[arg(long)]
    coefficients: Option<String>,
}

fn build_config(preset: Option<Preset>, o: &Overrides) -> bcm_core::Result<ExperimentConfig> {
    let profile = o.profile.as_deref().map(Profile::parse).transpose()?.unwrap_or_default();
    let mut cfg = match preset {
        Some(p) => ExperimentConfig::preset(p, profile),
        None => ExperimentConfig::default(),
    };
    if let Some(path) = &o.config {
        cfg.apply_text(&std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?)?;
    }
    if let Some(p) = &o.profile {
        cfg.set("profile", p)?;
    }
    if let Some(s) = &o.coefficients {
        cfg.set("coefficients", s)?;
    }
    if let Some(n) = o.nx {
        cfg.n_x = n;
    }
    if let Some(t) = o.t_final {
        cfg.horizon = t;
    }
    if !o.lambda.is_empty() {
        cfg.lambdas = o.lambda.iter().map(|s| parse_lambda(s)).collect::<bcm_core::Result<_>>()?;
    }
    if !o.alpha.is_empty() {
        cfg.alphas = o.alpha.clone();
    }
    if !o.noise.is_empty() {
        cfg.noise = o.noise.clone();
    }
    if o.seed.is_some() {
        cfg.seed = o.seed;
    }
    if o.out.is_some() {
        cfg.out_dir = o.out.clone();
    }
    if o.snapshot {
        cfg.snapshot = true;
    }
    if let Some(w) = o.workers {
        cfg.workers = w;
    }
    if o.cache.is_some() {
        cfg.cache_dir = o.cache.clone();
    }
    if let Some(f) = &o.form {
        cfg.set("form", f)?;
    }
    if let Some(c) = &o.closure {
        cfg.set("closure", c)?;
    }
    if cfg.out_dir.is_none() {
        cfg.out_dir = Some(PathBuf::from(format!("out/{}", cfg.name)));
    }
    Ok(cfg)
}

fn exit_code(e: &Error) -> u8 {
    if e.is_io() {
        4
    } else if e.is_numerical() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (preset, overrides) = match &cli.command {
        Command::Exp1(o) => (Some(Preset::Exp1), o),
        Command::Exp2(o) => (Some(Preset::Exp2), o),
        Command::Exp3(o) => (Some(Preset::Exp3), o),
        Command::Exp4 { sweep, overrides } => {
            let p = match sweep.as_str() {
                "real" => Preset::Exp4Real,
                "imag" => Preset::Exp4Imag,
                _ => Preset::Exp4,
            };
            (Some(p), overrides)
        }
        Command::Run(o) => (None, o),
    };
    let result = build_config(preset, overrides).and_then(|cfg| {
        let out = cfg.out_dir.clone().expect("set above");
        let report = run_experiment(&cfg)?;
        for r in &report.rows {
            let snap = r.snapshot_rel_err.map(|s| format!(" snapshot {:.4}%", 100.0 * s)).unwrap_or_default();
            println!(
                "lambda {:>6} {:+}i alpha {:.0e} noise {:>4}%: rel. Frobenius error {:.4}%{snap}",
                r.lambda.re,
                r.lambda.im,
                r.alpha,
                100.0 * r.noise,
                100.0 * r.metrics.rel_frobenius
            );
        }
        println!("report written to {}", out.join(bcm_core::harness::REPORT_FILE).display());
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
