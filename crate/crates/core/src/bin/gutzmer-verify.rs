use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hermite_gutzmer::cli::{run, RawConfig};
use hermite_gutzmer::spectral::HermiteExpansion;
use hermite_gutzmer::Error;

/// Numerical verification of Gutzmer's formula for Hermite expansions and
/// the identities around it.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Both sides of Gutzmer's formula on a phase-space grid.
    Gutzmer(RunArgs),
    /// Mehler closed form against the truncated series.
    Mehler(RunArgs),
    /// Norm of π(z,w)Φ_α, the β-sum of |Φ_{α,β}|², and the projection kernel.
    Lemmas(RunArgs),
    /// The two explicit one-dimensional orthogonality relations.
    Ortho(RunArgs),
    /// Semigroup image norm and the Laguerre–heat integral.
    Image(RunArgs),
    /// K-average of diagonal special Hermite functions.
    Kaverage(RunArgs),
    /// Every suite.
    All(RunArgs),
    /// Inspect or create coefficient-table files.
    #[command(subcommand)]
    Expansion(ExpansionCmd),
}

#[derive(Args)]
struct RunArgs {
    /// TOML file of `key = value` settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    n: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    k_max: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    gh_order: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    torus_points: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    torus_points_nd: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    mc_samples: Option<i64>,
    /// Required by the Monte Carlo suites (gutzmer, kaverage, all).
    #[arg(long, allow_hyphen_values = true)]
    seed: Option<i64>,
    /// Relative tolerance of deterministic checks (default 1e-6).
    #[arg(long, allow_hyphen_values = true)]
    rtol: Option<f64>,
    /// Monte Carlo acceptance in standard errors (default 3).
    #[arg(long, allow_hyphen_values = true)]
    mc_sigma: Option<f64>,
    /// Largest Monte Carlo standard error relative to the right side (default 1e-2).
    #[arg(long, allow_hyphen_values = true)]
    mc_budget: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    tail_tol: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    grid_points: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    grid_extent: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mehler_extent: Option<f64>,
    /// Number of random expansions per phase point (gutzmer suite).
    #[arg(long, allow_hyphen_values = true)]
    functions: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    kaverage_points: Option<i64>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn raw(self, suite: &str) -> RawConfig {
        let mut r = RawConfig::default();
        r.suite = Some(suite.to_string());
        r.n = self.n;
        r.k_max = self.k_max;
        r.gh_order = self.gh_order;
        r.torus_points = self.torus_points;
        r.torus_points_nd = self.torus_points_nd;
        r.mc_samples = self.mc_samples;
        r.seed = self.seed;
        r.rtol = self.rtol;
        r.mc_sigma = self.mc_sigma;
        r.mc_budget = self.mc_budget;
        r.tail_tol = self.tail_tol;
        r.grid_points = self.grid_points;
        r.grid_extent = self.grid_extent;
        r.mehler_extent = self.mehler_extent;
        r.functions = self.functions;
        r.kaverage_points = self.kaverage_points;
        r.out = self.out;
        r
    }
}

#[derive(Subcommand)]
enum ExpansionCmd {
    /// Print dimension, truncation, norm and level norms of a table.
    Show { path: PathBuf },
    /// Write a random expansion with damped complex Gaussian coefficients.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k_max: usize,
        #[arg(long, default_value_t = 0.3)]
        decay: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn expansion(cmd: ExpansionCmd) -> Result<(), Error> {
    match cmd {
        ExpansionCmd::Show { path } => {
            let f = HermiteExpansion::load(&path)?;
            println!("n = {}", f.dim());
            println!("k_max = {}", f.k_max());
            println!("norm^2 = {}", f.norm_sq());
            for (k, r) in f.level_norms().iter().enumerate() {
                println!("level {k}: {r:.12e}");
            }
        }
        ExpansionCmd::Random {
            n,
            k_max,
            decay,
            seed,
            out,
        } => HermiteExpansion::random(n, k_max, decay, seed)?.save(&out)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match cli.command {
        Command::Expansion(cmd) => {
            return match expansion(cmd) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            };
        }
        Command::Gutzmer(a) => ("gutzmer", a),
        Command::Mehler(a) => ("mehler", a),
        Command::Lemmas(a) => ("lemmas", a),
        Command::Ortho(a) => ("ortho", a),
        Command::Image(a) => ("image", a),
        Command::Kaverage(a) => ("kaverage", a),
        Command::All(a) => ("all", a),
    };
    let file = match &args.config {
        None => Ok(RawConfig::default()),
        Some(p) => RawConfig::from_file(p),
    };
    let cfg = file.map(|f| f.merge(args.raw(name))).and_then(|r| r.validate());
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(summary) => {
            for (suite, identity, instance) in &summary.failures {
                eprintln!("FAIL {suite}/{identity} #{instance}");
            }
            eprintln!(
                "{} records, {} failed",
                summary.records,
                summary.failures.len()
            );
            ExitCode::from(summary.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
