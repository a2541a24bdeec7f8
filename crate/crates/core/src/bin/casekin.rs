use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use casekin::io::{configure_threads_from_env, run_command, BandwidthChoice, Command, RunConfig, SimSettings};
use casekin::FrailtyKind;

#[derive(Parser)]
#[command(name = "casekin", version, about = "Marginal survival from case-control family data")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate S(t) and write a table by age
    Estimate(Common),
    /// Simulate a case-control family study under a shared frailty model
    Simulate(Common),
    /// Bootstrap IMSE bandwidth selection
    SelectBandwidth(Common),
    /// Percentile bootstrap confidence band
    Ci(Common),
    /// Run the estimator on exact frailty-model surfaces and report the error
    OracleCheck(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value = "auto")]
    bandwidth: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 30)]
    b_inner: usize,
    #[arg(long, default_value_t = 100)]
    b_outer: usize,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, default_value_t = 101)]
    s_grid: usize,
    #[arg(long, default_value_t = 200)]
    u_grid: usize,
    #[arg(long, default_value_t = 200)]
    t_grid: usize,
    /// Add bootstrap bounds to the estimate table
    #[arg(long)]
    with_ci: bool,
    #[arg(long, default_value = "gamma")]
    frailty: String,
    /// Kendall's tau of the frailty model
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    #[arg(long, default_value_t = 0.6)]
    event_rate: f64,
    /// Target share of censored relatives
    #[arg(long)]
    censoring: Option<f64>,
    #[arg(long, default_value_t = 500)]
    n1: usize,
    #[arg(long, default_value_t = 1)]
    ratio: usize,
    #[arg(long, default_value_t = 1)]
    relatives: usize,
}

fn build(command: Command, c: Common) -> casekin::Result<RunConfig> {
    let mut cfg = RunConfig {
        command,
        input: c.input,
        output: c.output,
        bandwidth: c.bandwidth.parse::<BandwidthChoice>()?,
        seed: c.seed,
        with_ci: c.with_ci,
        sim: SimSettings {
            frailty: c.frailty.parse::<FrailtyKind>()?,
            kendall_tau: c.tau,
            event_rate: c.event_rate,
            censoring: c.censoring,
            n1: c.n1,
            ratio: c.ratio,
            relatives: c.relatives,
        },
        ..RunConfig::default()
    };
    cfg.estimator.s_points = c.s_grid;
    cfg.estimator.u_points = c.u_grid;
    cfg.estimator.t_points = c.t_grid;
    cfg.selection.b_inner = c.b_inner;
    cfg.ci.b_outer = c.b_outer;
    cfg.ci.level = c.level;
    Ok(cfg)
}

fn main() -> ExitCode {
    configure_threads_from_env();
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Estimate(c) => (Command::Estimate, c),
        Cmd::Simulate(c) => (Command::Simulate, c),
        Cmd::SelectBandwidth(c) => (Command::SelectBandwidth, c),
        Cmd::Ci(c) => (Command::Ci, c),
        Cmd::OracleCheck(c) => (Command::OracleCheck, c),
    };
    match build(command, common).and_then(|cfg| run_command(&cfg)) {
        Ok(outcome) => {
            eprintln!("{}", outcome.summary);
            if outcome.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
