mod commands;
mod config;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{EvaluatorKind, RunConfig, Route};

/// Outcome classes with their exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) | Failure::Input(_) => 2,
            Failure::Numerical(_) | Failure::Verification(_) => 1,
        }
    }
}

impl From<knotfield::Error> for Failure {
    fn from(e: knotfield::Error) -> Self {
        use knotfield::Error as E;
        match e {
            E::InvalidSpec(_) | E::InvalidPolicy(_) => Failure::Config(e.to_string()),
            E::CacheFormat(_) | E::LoopTooCloseToSource { .. } => Failure::Input(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "knotfield", version, about = "Flat connections around torus knots")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct GlobalArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    p: Option<i64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    q: Option<i64>,
    #[arg(long, global = true)]
    major_radius: Option<f64>,
    #[arg(long, global = true)]
    minor_radius: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    density: Option<f64>,
    /// Accept the (1, 0) circle fixture.
    #[arg(long, global = true)]
    unknot: bool,
    #[arg(long, global = true)]
    n_max: Option<usize>,
    #[arg(long, global = true)]
    m_max: Option<usize>,
    #[arg(long, global = true)]
    tail_tol: Option<f64>,
    #[arg(long, global = true)]
    hard_cap: Option<usize>,
    #[arg(long, global = true)]
    eta_band: Option<f64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Load coefficient tables from this cache instead of computing them.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Output file (standard output when absent).
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample A (and optionally H) on a Cartesian grid.
    Sample {
        #[arg(long, num_args = 3, allow_negative_numbers = true, value_names = ["X", "Y", "Z"])]
        min: Option<Vec<f64>>,
        #[arg(long, num_args = 3, allow_negative_numbers = true, value_names = ["X", "Y", "Z"])]
        max: Option<Vec<f64>>,
        #[arg(long, num_args = 3, value_names = ["NX", "NY", "NZ"])]
        resolution: Option<Vec<usize>>,
        #[arg(long)]
        hertz: bool,
    },
    /// Holonomy of A around a loop, with linking number and flux.
    Holonomy {
        /// Loop file: "x y z" lines ending in "closed +1" or "closed -1".
        loop_file: Option<PathBuf>,
        #[arg(long, value_enum)]
        evaluator: Option<EvaluatorKind>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Run the verification checks.
    Verify {
        #[arg(long)]
        quick: bool,
    },
    /// Compare the two coefficient routes and write a cache.
    Coeffs {
        #[arg(long, value_enum)]
        route: Option<Route>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Series against line-integral oracle at listed or random points.
    Compare {
        /// File of "x y z" lines.
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

fn merge(cli: &Cli) -> Result<RunConfig, Failure> {
    let g = &cli.global;
    let mut cfg = RunConfig::load(g.config.as_deref())?;
    let set = |slot: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    if let Some(p) = g.p {
        cfg.knot.p = p;
    }
    if let Some(q) = g.q {
        cfg.knot.q = q;
    }
    set(&mut cfg.knot.major_radius, g.major_radius);
    set(&mut cfg.knot.minor_radius, g.minor_radius);
    set(&mut cfg.knot.dipole_density, g.density);
    cfg.knot.unknot |= g.unknot;
    if let Some(n) = g.n_max {
        cfg.truncation.n_max = n;
    }
    if let Some(m) = g.m_max {
        cfg.truncation.m_max = m;
    }
    if let Some(c) = g.hard_cap {
        cfg.truncation.hard_cap = c;
    }
    set(&mut cfg.truncation.tail_tol, g.tail_tol);
    set(&mut cfg.truncation.eta_band, g.eta_band);
    if let Some(t) = g.threads {
        cfg.threads = t;
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if g.cache.is_some() {
        cfg.cache.clone_from(&g.cache);
    }
    if g.output.is_some() {
        cfg.output.clone_from(&g.output);
    }
    match &cli.command {
        Command::Sample { min, max, resolution, hertz } => {
            if let Some(v) = min {
                cfg.sample.min.copy_from_slice(v);
            }
            if let Some(v) = max {
                cfg.sample.max.copy_from_slice(v);
            }
            if let Some(v) = resolution {
                cfg.sample.resolution.copy_from_slice(v);
            }
            cfg.sample.hertz |= hertz;
        }
        Command::Holonomy { loop_file, evaluator, tolerance } => {
            if loop_file.is_some() {
                cfg.holonomy.loop_file.clone_from(loop_file);
            }
            if let Some(e) = evaluator {
                cfg.holonomy.evaluator = *e;
            }
            set(&mut cfg.holonomy.tolerance, *tolerance);
        }
        Command::Verify { quick } => cfg.verify.quick |= quick,
        Command::Coeffs { route, tolerance } => {
            if let Some(r) = route {
                cfg.coeffs.route = *r;
            }
            set(&mut cfg.coeffs.tolerance, *tolerance);
        }
        Command::Compare { points, count, tolerance } => {
            if points.is_some() {
                cfg.compare.points_file.clone_from(points);
            }
            if let Some(c) = count {
                cfg.compare.count = *c;
            }
            set(&mut cfg.compare.tolerance, *tolerance);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = merge(&cli)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build_global()
        .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
    match cli.command {
        Command::Sample { .. } => commands::sample(&cfg),
        Command::Holonomy { .. } => commands::holonomy(&cfg),
        Command::Verify { .. } => commands::verify(&cfg),
        Command::Coeffs { .. } => commands::coeffs(&cfg),
        Command::Compare { .. } => commands::compare(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
