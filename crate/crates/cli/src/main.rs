use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hiertree_cli::commands;
use hiertree_cli::{ConfigError, ExperimentConfig, Format, Report};

#[derive(Parser)]
#[command(name = "hiertree", version, about = "Verification experiments on trees, hierarchomorphisms and boundary measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Positivity, factorization and embedding checks of Gram matrices.
    GramCheck,
    /// Partial norms of a charge against the Gram form.
    NormTable,
    /// Exact cocycle identity of the pseudoderivative on fuzzed elements.
    CocycleFuzz,
    /// Rank of the deviation form over growing balls.
    RankStability,
    /// Bisection for the critical value of λ.
    Sigma,
    /// Action on charges: homomorphism, intertwining and deviation rank.
    TransformCheck,
}

#[derive(Args)]
struct Overrides {
    /// JSON config file; the flags below override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// t<p>, freegroup:<l1>,<l2>, or a family JSON file.
    #[arg(long, global = true)]
    family: Option<String>,
    /// Comma list or start:stop:step.
    #[arg(long, global = true)]
    lambda: Option<String>,
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Element JSON file; fuzzed elements are used when absent.
    #[arg(long, global = true)]
    element: Option<PathBuf>,
    /// uniform, zero, or a charge JSON file.
    #[arg(long, global = true)]
    measure: Option<String>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Expected value for `sigma`.
    #[arg(long, global = true)]
    expect: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<Format>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    match s {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        _ => Err(format!("unknown format {s:?}; expected csv or json")),
    }
}

fn config(o: Overrides) -> Result<ExperimentConfig, ConfigError> {
    let mut c = match &o.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = o.family {
        c.family = v;
    }
    if let Some(v) = o.lambda {
        c.lambda = v;
    }
    if o.depth.is_some() {
        c.depth = o.depth;
    }
    if let Some(v) = o.seed {
        c.seed = v;
    }
    if let Some(v) = o.trials {
        c.trials = v;
    }
    if o.element.is_some() {
        c.element = o.element;
    }
    if let Some(v) = o.measure {
        c.measure = v;
    }
    if o.tol.is_some() {
        c.tol = o.tol;
    }
    if o.expect.is_some() {
        c.expect = o.expect;
    }
    if o.out.is_some() {
        c.out = o.out;
    }
    if let Some(v) = o.format {
        c.format = v;
    }
    Ok(c)
}

fn run(command: &Command, cfg: &ExperimentConfig) -> Result<Report, ConfigError> {
    match command {
        Command::GramCheck => commands::gram_check(cfg),
        Command::NormTable => commands::norm_table(cfg),
        Command::CocycleFuzz => commands::cocycle_fuzz(cfg),
        Command::RankStability => commands::rank_stability(cfg),
        Command::Sigma => commands::sigma(cfg),
        Command::TransformCheck => commands::transform_check(cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config(cli.opts).and_then(|cfg| run(&cli.command, &cfg).map(|r| (cfg, r)));
    let (cfg, report) = match result {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let text = report.table.render(cfg.format);
    match &cfg.out {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if report.passed() {
        eprintln!("PASS {}: {}", report.table.check, report.summary);
        ExitCode::SUCCESS
    } else {
        eprintln!("FAIL {}: {}", report.table.check, report.summary);
        for f in &report.failures {
            eprintln!("  {f}");
        }
        ExitCode::from(1)
    }
}
