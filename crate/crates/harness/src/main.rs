use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use harness::config::{BudgetRuleSetting, LogArgSetting, ModeSetting};
use harness::{Algorithm, ExperimentConfig, ExperimentOutput, OutputFormat, Result};

#[derive(Parser)]
#[command(name = "repbandit", version, about = "Multi-task and lifelong linear bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Three-stage multi-task algorithm with the moment estimator.
    Mtrl(RunArgs),
    /// Same skeleton with the squared-covariance Stage-1 estimator.
    E2tc(RunArgs),
    /// Per-task explore-then-commit without sharing.
    Independent(RunArgs),
    /// Lifelong learner, tasks processed sequentially.
    Lll(RunArgs),
    /// Several algorithms on identical instances.
    Compare(CompareArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Structured config file (TOML, or JSON by extension); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "M")]
    tasks: Option<usize>,
    #[arg(long = "T")]
    horizon: Option<u64>,
    #[arg(long)]
    noise_std: Option<f64>,
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    master_seed: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<ModeSetting>,
    #[arg(long, value_enum)]
    log_arg: Option<LogArgSetting>,
    #[arg(long, value_enum)]
    budget_rule: Option<BudgetRuleSetting>,
    #[arg(long)]
    trace_stride: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Exact least-squares Stage 1 on noiseless instances (mtrl, independent).
    #[arg(long)]
    noiseless_oracle: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "mtrl,e2tc,independent")]
    algos: Vec<Algorithm>,
}

impl RunArgs {
    fn resolve(&self, algorithm: Algorithm) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        c.algorithm = algorithm;
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {$(
                if let Some(v) = self.$flag.clone() {
                    c.$field = v;
                }
            )*};
        }
        set!(d => d, k => k, tasks => tasks, horizon => horizon, noise_std => noise_std,
             seeds => n_seeds, master_seed => master_seed, epsilon => epsilon, delta => delta,
             mode => mode, log_arg => log_arg, trace_stride => trace_stride, format => output_format);
        if self.budget_rule.is_some() {
            c.budget_rule = self.budget_rule;
        }
        if self.out_dir.is_some() {
            c.out_dir = self.out_dir.clone();
        }
        if self.noiseless_oracle {
            c.noiseless_oracle = true;
        }
        Ok(c)
    }
}

fn report(out: &ExperimentOutput) {
    for s in &out.comparison.summaries {
        let f = &s.final_regret;
        println!(
            "{:<12} n={:<3} final regret mean={:.3} sd={:.3} se={:.3}",
            s.algorithm.tag(),
            f.n,
            f.mean,
            f.sd,
            f.se
        );
        if let Some(l) = &s.lll {
            println!(
                "{:<12} tau_final mean={:.2} max={} exploration samples mean={:.1}",
                "",
                l.mean_tau_final,
                l.max_tau_final,
                l.mean_sample_total
            );
        }
    }
    for p in &out.comparison.pairs {
        let z = p.z.map_or("n/a".to_string(), |z| format!("{z:.2}"));
        println!(
            "{} - {}: {:.3} (pooled se {:.3}, z {z})",
            p.a.tag(),
            p.b.tag(),
            p.difference,
            p.pooled_se
        );
    }
    for f in &out.files {
        println!("wrote {}", f.display());
    }
}

fn execute(cli: Cli) -> Result<ExperimentOutput> {
    let (args, algorithm) = match &cli.command {
        Command::Mtrl(a) => (a, Algorithm::Mtrl),
        Command::E2tc(a) => (a, Algorithm::E2tc),
        Command::Independent(a) => (a, Algorithm::Independent),
        Command::Lll(a) => (a, Algorithm::Lll),
        Command::Compare(c) => {
            let config = c.run.resolve(c.algos.first().copied().unwrap_or_default())?;
            return harness::run_comparison(&config, &c.algos);
        }
    };
    harness::run_experiment(&args.resolve(algorithm)?)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(out) => {
            report(&out);
            ExitCode::SUCCESS
        }
        Err(e) => {
            let json = serde_json::to_string(&e.report()).unwrap_or_else(|_| e.to_string());
            eprintln!("{json}");
            ExitCode::FAILURE
        }
    }
}
