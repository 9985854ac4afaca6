use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ij_unlearn::harness::{
    run_bench, run_prox_check, write_lines, write_report, BenchConfig, DatasetKind, Mechanism, NoiseName, RegName,
    StreamName,
};
use ij_unlearn::objectives::{LossKind, SmoothnessConstants};
use ij_unlearn::pitfalls::run_counterexample;
use ij_unlearn::trainer::LAMBDA_INFINITY;
use ij_unlearn::unlearner::{capacity_lower_bound, NonSmoothUpdate, DEFAULT_CAPACITY_GAMMA};
use ij_unlearn::{Error, Result};

#[derive(Parser)]
#[command(name = "ij-unlearn", version, about = "Approximate data removal for regularized convex models")]
struct Cli {
    /// Seed for the data generator, deletion streams and noise.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare removal mechanisms against retraining.
    Bench(Box<BenchArgs>),
    /// Show cross-validated selection breaking approximate removal.
    Counterexample {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = LAMBDA_INFINITY)]
        big_lambda: f64,
    },
    /// Lower bound on the number of supported deletions.
    Capacity(CapacityArgs),
    /// Check the metric prox against brute force.
    ProxCheck {
        #[arg(long, default_value_t = 50)]
        problems: usize,
    },
}

/// Every config key, as an optional override.
#[derive(Args, Default)]
struct BenchArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    dataset: Option<DatasetArg>,
    #[arg(long)]
    csv_path: Option<PathBuf>,
    #[arg(long)]
    label_column: Option<usize>,
    #[arg(long)]
    has_header: Option<bool>,
    #[arg(long)]
    test_fraction: Option<f64>,
    #[arg(long)]
    blobs_n: Option<usize>,
    #[arg(long)]
    blobs_d: Option<usize>,
    #[arg(long)]
    separation: Option<f64>,
    #[arg(long)]
    data_seed: Option<u64>,
    #[arg(long, value_enum)]
    loss: Option<LossArg>,
    #[arg(long, value_enum)]
    reg: Option<RegArg>,
    #[arg(long)]
    mix: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    lambda_grid: Option<Vec<f64>>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, value_delimiter = ',')]
    mechanisms: Option<Vec<MechanismArg>>,
    #[arg(long, value_enum)]
    stream: Option<StreamArg>,
    #[arg(long)]
    deletions: Option<usize>,
    #[arg(long)]
    p_positive: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    delete_ids: Option<Vec<usize>>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_enum)]
    noise: Option<NoiseArg>,
    #[arg(long)]
    noise_c: Option<f64>,
    #[arg(long, value_enum)]
    non_smooth_update: Option<UpdateArg>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    eval_every: Option<usize>,
    #[arg(long)]
    ta_window: Option<usize>,
    #[arg(long)]
    rt_reference: Option<bool>,
}

#[derive(Args)]
struct CapacityArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.005)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_CAPACITY_GAMMA)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    lipschitz: f64,
    #[arg(long, default_value_t = 1.0)]
    hessian_smoothness: f64,
    #[arg(long, default_value_t = 1.0)]
    hessian_lipschitz: f64,
}

macro_rules! value_enum {
    ($name:ident => $target:ty { $($variant:ident => $value:expr),* $(,)? }) => {
        #[derive(Clone, Copy, clap::ValueEnum)]
        enum $name { $($variant),* }
        impl From<$name> for $target {
            fn from(v: $name) -> $target {
                match v { $($name::$variant => $value),* }
            }
        }
    };
}

value_enum!(DatasetArg => DatasetKind { Blobs => DatasetKind::Blobs, Csv => DatasetKind::Csv });
value_enum!(LossArg => LossKind { Logistic => LossKind::Logistic, SquaredError => LossKind::SquaredError });
value_enum!(RegArg => RegName {
    None => RegName::None,
    L2 => RegName::L2,
    L1 => RegName::L1,
    ElasticNet => RegName::ElasticNet,
});
value_enum!(MechanismArg => Mechanism { Ij => Mechanism::Ij, Ta => Mechanism::Ta, Rt => Mechanism::Rt });
value_enum!(StreamArg => StreamName {
    Uniform => StreamName::Uniform,
    LabelBiased => StreamName::LabelBiased,
    Explicit => StreamName::Explicit,
});
value_enum!(NoiseArg => NoiseName { Calibrated => NoiseName::Calibrated, Fixed => NoiseName::Fixed, None => NoiseName::None });
value_enum!(UpdateArg => NonSmoothUpdate {
    LeaveOutProxNewton => NonSmoothUpdate::LeaveOutProxNewton,
    Literal => NonSmoothUpdate::Literal,
});

macro_rules! override_fields {
    ($config:ident, $args:ident; $($field:ident),* $(,)?) => {
        $(if let Some(v) = $args.$field { $config.$field = v.into(); })*
    };
}

impl BenchArgs {
    fn into_config(self, seed: Option<u64>, out: Option<PathBuf>) -> Result<BenchConfig> {
        let mut c = match &self.config {
            Some(path) => BenchConfig::from_file(path)?,
            None => BenchConfig::default(),
        };
        let args = self;
        override_fields!(c, args; label_column, has_header, test_fraction, blobs_n, blobs_d, separation,
            data_seed, mix, lambda_grid, tol, deletions, p_positive, delete_ids, epsilon, delta, noise_c,
            seeds, eval_every, ta_window, rt_reference);
        override_fields!(c, args; dataset, loss, reg, stream, noise, non_smooth_update);
        if let Some(p) = args.csv_path {
            c.csv_path = Some(p);
        }
        if let Some(m) = args.mechanisms {
            c.mechanisms = m.into_iter().map(Into::into).collect();
        }
        if let Some(s) = seed {
            c.data_seed = s;
            c.seeds = vec![s];
        }
        if out.is_some() {
            c.out = out;
        }
        c.validate()?;
        Ok(c)
    }
}

fn emit(value: &impl Serialize, out: Option<&PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io { path: path.clone(), source: e }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io { path: "<stdout>".into(), source: e }),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Bench(args) => {
            let config = args.into_config(cli.seed, cli.out)?;
            let report = run_bench(&config)?;
            match &config.out {
                Some(path) => write_report(&report, path),
                None => write_lines(&report, &mut std::io::stdout().lock()),
            }
        }
        Command::Counterexample { n, big_lambda } => emit(&run_counterexample(n, big_lambda)?, cli.out.as_ref()),
        Command::Capacity(a) => {
            let k = SmoothnessConstants::user(a.mu, a.lipschitz, a.hessian_smoothness, a.hessian_lipschitz);
            let capacity = capacity_lower_bound(a.n, a.d, a.epsilon, a.delta, a.gamma, &k)?;
            emit(&serde_json::json!({ "capacity": capacity }), cli.out.as_ref())
        }
        Command::ProxCheck { problems } => {
            let report = run_prox_check(problems, cli.seed.unwrap_or(0))?;
            emit(&report, cli.out.as_ref())?;
            if report.passed {
                Ok(())
            } else {
                Err(Error::CheckFailed("prox solver exceeded its tolerance".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
