mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{CheckFlags, EstimateFlags, Fig2Flags, Fig3Flags, Outcome, Run, SimulateFlags};
use config::Config;

/// Indicator variograms and madograms: evaluation, validity checks,
/// simulation and estimation.
///
/// Exit status: 0 on success, 1 on error, 2 when a check finds violations.
#[derive(Parser)]
#[command(name = "indivar", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed (default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default `out`).
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; falls back to INDIVAR_WORKERS, the config, then the core count.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Also write a gnuplot script next to curve outputs.
    #[arg(long, global = true)]
    gnuplot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fig2Model {
    Cubic,
    Exponential,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Model values at every pair of points.
    Eval,
    /// Negative type, pointwise bounds, the integer-weight inequalities and realizability.
    Check {
        /// Largest |weight| enumerated by the bounded families.
        #[arg(long)]
        bound: Option<i64>,
        /// indicator or madogram.
        #[arg(long)]
        profile: Option<String>,
        #[arg(long)]
        no_realizability: bool,
    },
    /// Exact realizability of the model on up to 10 points.
    Realize,
    /// Realization ensemble on points or a grid.
    Simulate {
        #[arg(long)]
        algorithm: Option<String>,
        #[arg(long)]
        n_real: Option<usize>,
    },
    /// Experimental variogram of a simulated or loaded ensemble.
    Estimate {
        #[arg(long)]
        alpha: Option<f64>,
        /// Directory of PGM realizations or an ensemble CSV.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Excursion-set variogram on a (rho, lambda) grid by each method.
    Excursion,
    /// Sequential indicator simulation from cubic and exponential inputs.
    ReproFig2 {
        #[arg(long, value_enum, default_value = "both")]
        model: Fig2Model,
        #[arg(long, default_value_t = 100)]
        n_real: usize,
        /// Practical range in grid spacings.
        #[arg(long, default_value_t = 15.0)]
        range: f64,
        #[arg(long, default_value_t = 120)]
        nx: usize,
        #[arg(long, default_value_t = 80)]
        ny: usize,
        #[arg(long, default_value_t = 20)]
        lags: usize,
    },
    /// Sphere exponential realizations as equirectangular maps.
    ReproFig3 {
        #[arg(long, value_delimiter = ',', default_values_t = [10.0, 30.0, 50.0])]
        t: Vec<f64>,
        #[arg(long, default_value_t = 360)]
        nx: usize,
        #[arg(long, default_value_t = 180)]
        ny: usize,
        #[arg(long, default_value_t = indivar::simulate::DEFAULT_Q)]
        q: usize,
        #[arg(long, default_value_t = 1)]
        n_real: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eval => "eval",
            Command::Check { .. } => "check",
            Command::Realize => "realize",
            Command::Simulate { .. } => "simulate",
            Command::Estimate { .. } => "estimate",
            Command::Excursion => "excursion",
            Command::ReproFig2 { .. } => "repro-fig2",
            Command::ReproFig3 { .. } => "repro-fig3",
        }
    }
}

fn workers(cli: &Cli, cfg: &Config) -> config::Res<Option<usize>> {
    if let Some(w) = cli.workers {
        return Ok(Some(w));
    }
    if let Ok(v) = std::env::var("INDIVAR_WORKERS") {
        return v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("INDIVAR_WORKERS must be a positive integer, got `{v}`"));
    }
    Ok(config::get_u64(&cfg.table, "workers", "top level")?.map(|w| w as usize))
}

fn run(cli: Cli) -> config::Res<Outcome> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::empty(),
    };
    cfg.check_top_level()?;
    if let Some(w) = workers(&cli, &cfg)? {
        if w == 0 {
            return Err("worker count must be positive".into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global().map_err(|e| e.to_string())?;
    }
    let seed = match cli.seed {
        Some(s) => s,
        None => config::get_u64(&cfg.table, "seed", "top level")?.unwrap_or(0),
    };
    let out = match (&cli.out, config::get_str(&cfg.table, "out", "top level")?) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => cfg.base.join(o),
        (None, None) => PathBuf::from("out"),
    };
    let run = Run { cfg, seed, out, gnuplot: cli.gnuplot, command: cli.command.name() };
    match cli.command {
        Command::Eval => commands::eval(&run),
        Command::Check { bound, profile, no_realizability } => {
            commands::check(&run, &CheckFlags { bound, profile, no_realizability })
        }
        Command::Realize => commands::realize(&run),
        Command::Simulate { algorithm, n_real } => commands::simulate(&run, &SimulateFlags { algorithm, n_real }),
        Command::Estimate { alpha, input } => commands::estimate(&run, &EstimateFlags { alpha, input }),
        Command::Excursion => commands::excursion(&run),
        Command::ReproFig2 { model, n_real, range, nx, ny, lags } => {
            let models = match model {
                Fig2Model::Cubic => vec!["cubic".into()],
                Fig2Model::Exponential => vec!["exponential".into()],
                Fig2Model::Both => vec!["cubic".into(), "exponential".into()],
            };
            commands::repro_fig2(&run, &Fig2Flags { models, n_real, range, nx, ny, lags })
        }
        Command::ReproFig3 { t, nx, ny, q, n_real } => commands::repro_fig3(&run, &Fig3Flags { t, nx, ny, q, n_real }),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Violations) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
