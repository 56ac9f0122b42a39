//! `stablelab`: kernel evaluation, identity checks and Monte-Carlo
//! experiments for the isotropic stable process.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod checks;
mod config;
mod error;
mod experiments;
mod grammar;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use stablelab::geometry::{Ball, Point};
use stablelab::kernels;

use config::Resolved;
use error::CliError;

#[derive(Parser)]
#[command(name = "stablelab", version, about = "Kernels, identity checks and experiments for the isotropic stable process")]
struct Cli {
    /// Worker threads for the estimators; results do not depend on it.
    #[arg(long, global = true, env = "STABLELAB_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a kernel at one pair of points.
    Kernel {
        #[command(subcommand)]
        action: KernelAction,
    },
    /// Run an identity check suite and print a table.
    Check(CheckArgs),
    /// Run a Monte-Carlo experiment and write CSV, JSON and a manifest.
    Experiment(ExperimentArgs),
    /// List experiments and check suites with their configuration keys.
    Keys,
}

#[derive(Subcommand)]
enum KernelAction {
    Eval(EvalArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    GreenGlobal,
    GreenBall,
    PoissonBall,
    GradPoisson,
    Jump,
    HEnvelope,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Dimension; defaults to the dimension of --x.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, default_value_t = 0.0)]
    eps0: f64,
    /// Perturbation coefficient, e.g. zero, const:0.3, trunc:1.
    #[arg(long, default_value = "zero")]
    b: String,
    /// Ball radius.
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Ball centre; the origin when omitted.
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    /// Second point; `--z` is accepted for exit points.
    #[arg(long, alias = "z", allow_hyphen_values = true)]
    y: String,
}

#[derive(Args)]
struct CheckArgs {
    /// poisson-normalization, dynkin, scaling, gradient-fd or assumption1.
    suite: String,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Print rows as JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    /// harnack, chained-harnack, bhp, ratio-limit, decay, gradient, barrier
    /// or boundary-decay.
    name: String,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "stablelab-out")]
    out: PathBuf,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("config error: --workers must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Kernel {
            action: KernelAction::Eval(a),
        } => kernel_eval(&a),
        Command::Check(a) => check(&a),
        Command::Experiment(a) => experiment(&a),
        Command::Keys => {
            print!("{}", keys_reference());
            Ok(0)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn point_arg(flag: &str, s: &str) -> Result<Point, CliError> {
    grammar::parse_point(s).map_err(|e| CliError::Config(format!("--{flag}: {e}")))
}

fn kernel_eval(a: &EvalArgs) -> Result<i32, CliError> {
    let x = point_arg("x", &a.x)?;
    let y = point_arg("y", &a.y)?;
    let d = a.d.unwrap_or(x.dim());
    if x.dim() != d || y.dim() != d {
        return Err(CliError::Config(format!("points must have dimension {d}")));
    }
    let center = match &a.center {
        Some(c) => point_arg("center", c)?,
        None => Point::zeros(d),
    };
    let ball = || Ball::new(center.clone(), a.r);
    let values: Vec<f64> = match a.kind {
        Kind::GreenGlobal => vec![kernels::green_global(a.alpha, &x, &y)?],
        Kind::GreenBall => vec![kernels::green_ball(&ball()?, a.alpha, &x, &y)?],
        Kind::PoissonBall => vec![kernels::poisson_ball(&ball()?, a.alpha, &x, &y)?],
        Kind::GradPoisson => kernels::grad_poisson_ball_fixed(&ball()?, a.alpha, &x, &y)?.to_vec(),
        Kind::HEnvelope => vec![kernels::h_envelope(&ball()?, a.alpha, a.beta, &x, &y)?],
        Kind::Jump => {
            let params = kernels::StableParams::new(d, a.alpha, a.beta, a.eps0, 1.0, 1.0)?;
            let b = grammar::parse_b(&a.b).map_err(|e| CliError::Config(format!("--b: {e}")))?;
            b.validate(&params)?;
            vec![kernels::jump_kernel(&params, &b, &x, &y)?.value]
        }
    };
    let text: Vec<String> = values.iter().map(|v| output::sig15(*v)).collect();
    println!("{}", text.join(" "));
    Ok(0)
}

fn resolve(path: Option<&Path>, keys: &[config::Key], seed: Option<u64>) -> Result<(Resolved, u64), CliError> {
    let mut c = Resolved::load(path, keys)?;
    if let Some(s) = seed {
        c.set("run.seed", s);
    }
    let seed = c.u64("run.seed")?;
    Ok((c, seed))
}

fn check(a: &CheckArgs) -> Result<i32, CliError> {
    let suite = checks::find(&a.suite)?;
    let (c, _) = resolve(a.config.as_deref(), &suite.all_keys(), a.seed)?;
    let rows = (suite.run)(&c)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&rows).map_err(|e| CliError::Config(e.to_string()))?);
    } else {
        print!("{}", checks::table(&rows));
    }
    let pass = !rows.is_empty() && rows.iter().all(|r| r.pass);
    println!("{}: {}", suite.name, if pass { "PASS" } else { "FAIL" });
    Ok(if pass { 0 } else { 1 })
}

fn experiment(a: &ExperimentArgs) -> Result<i32, CliError> {
    let exp = experiments::find(&a.name)?;
    let (c, seed) = resolve(a.config.as_deref(), &exp.all_keys(), a.seed)?;
    if a.print_config {
        print!("{}", c.render());
        return Ok(0);
    }
    let hash = output::param_hash(exp.name, &c);
    fs::create_dir_all(&a.out)?;
    let csv = a.out.join(format!("{}.csv", exp.name));
    let json = a.out.join(format!("{}.json", exp.name));
    let manifest = a.out.join(format!("{}.manifest.json", exp.name));

    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let t0 = Instant::now();
    let result = (exp.run)(&c, seed);
    let wall = t0.elapsed().as_secs_f64();

    // config errors stop before any output; estimator errors leave a partial record
    let (report, err, code) = match result {
        Ok(rep) => {
            let code = if rep.pass { 0 } else { 1 };
            (Some(rep), None, code)
        }
        Err(CliError::Config(m)) => return Err(CliError::Config(m)),
        Err(e) => {
            let code = e.exit_code();
            (None, Some(e.to_string()), code)
        }
    };
    output::write_csv(&csv, exp.name, &hash, seed, report.as_ref())?;
    output::write_json(&json, &hash, &c, report.as_ref(), err.as_deref())?;
    output::Manifest {
        artifact: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: format!("experiment {}", exp.name),
        experiment: exp.name.to_string(),
        param_hash: hash.clone(),
        seed,
        workers: rayon::current_num_threads(),
        config: c.values().clone(),
        started_unix: started,
        wall_clock_seconds: wall,
        pass: code == 0,
        exit_code: code,
        error: err.clone(),
        outputs: vec![csv.clone(), json.clone()],
    }
    .write(&manifest)?;

    match (&report, &err) {
        (Some(rep), _) => {
            for s in &rep.statistics {
                println!("{:<28} {:>14} +- {}", s.name, output::sig15(s.value), output::sig15(s.stderr));
            }
            println!("{} [{}]: {} ({})", exp.name, hash, if rep.pass { "PASS" } else { "FAIL" }, rep.tolerance);
        }
        (None, Some(e)) => eprintln!("{e}"),
        (None, None) => unreachable!("either a report or an error"),
    }
    println!("wrote {}", a.out.display());
    Ok(code)
}

/// Every configuration key with its default, per command.
fn keys_reference() -> String {
    let mut out = String::new();
    for e in experiments::registry() {
        out.push_str(&format!("experiment {}: {}\n", e.name, e.about));
        for k in e.all_keys() {
            out.push_str(&format!("  {:<28} {:<44} {}\n", k.name, k.default, k.help));
        }
    }
    for s in checks::suites() {
        out.push_str(&format!("check {}: {}\n", s.name, s.about));
        for k in s.all_keys() {
            out.push_str(&format!("  {:<28} {:<44} {}\n", k.name, k.default, k.help));
        }
    }
    out
}
