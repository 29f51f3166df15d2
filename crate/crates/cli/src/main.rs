use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use hrmax::copula::{empirical_gn, exact_log_gn, survival_log_gn, TailArg, DEFAULT_SURVIVAL_TOL};
use hrmax::harness::{
    correction_auto, emit, exit_code, run_study, selftest, ForcedTheorem, Format, ScheduleSpec,
    StudyConfig, ORACLE_TOL,
};
use hrmax::limits::{g_limit_in, hr_limit, DEFAULT_LIMIT_TOL};
use hrmax::schedule::{classify_regime, Lambda, Schedule, DEFAULT_PROBES};
use hrmax::{Error, Result};

/// Exact and asymptotic distributions of bivariate normal maxima under
/// dynamic correlation.
#[derive(Parser)]
#[command(name = "hrmax", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "HRMAX_THREADS")]
    threads: Option<usize>,
    /// Seed for Monte Carlo draws; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the limit G(x, y).
    Limit(LimitArgs),
    /// Exact G_n(x, y) at one cell.
    Exact(ExactArgs),
    /// Second-order approximation at one cell.
    Expand(ExpandArgs),
    /// Run a convergence study from a config file.
    Study(StudyArgs),
    /// Monte Carlo estimate of G_n against the exact value.
    Mc(McArgs),
    /// Run the built-in invariant checks.
    Selftest,
}

#[derive(Args)]
struct Tail {
    #[arg(long, allow_hyphen_values = true)]
    x: f64,
    #[arg(long, allow_hyphen_values = true)]
    y: f64,
}

impl Tail {
    fn arg(&self) -> Result<TailArg> {
        TailArg::new(self.x, self.y)
    }
}

#[derive(Args)]
struct ScheduleArg {
    /// example21, example22, example23, independence, constant:V, expr:EXPR or table:PATH.
    #[arg(long, default_value = "example21")]
    schedule: String,
}

impl ScheduleArg {
    fn build(&self) -> Result<Schedule> {
        self.schedule.parse::<ScheduleSpec>()?.build(&PathBuf::from("."))
    }
}

#[derive(Args)]
struct LimitArgs {
    #[command(flatten)]
    tail: Tail,
    /// Constant λ (a number, 0 or inf); takes precedence over --schedule.
    #[arg(long)]
    lambda: Option<String>,
    #[command(flatten)]
    schedule: ScheduleArg,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    tail: Tail,
    #[arg(long)]
    n: u64,
    #[command(flatten)]
    schedule: ScheduleArg,
    /// orthant, survival_integral or both.
    #[arg(long, default_value = "orthant")]
    oracle: String,
}

#[derive(Args)]
struct ExpandArgs {
    #[command(flatten)]
    tail: Tail,
    #[arg(long)]
    n: u64,
    #[command(flatten)]
    schedule: ScheduleArg,
    /// t21, t22 or t23.
    #[arg(long)]
    force_theorem: Option<String>,
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output path; overrides the config (use - for standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json; overrides the config.
    #[arg(long)]
    format: Option<String>,
    /// t21, t22 or t23; overrides the config.
    #[arg(long)]
    force_theorem: Option<String>,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    tail: Tail,
    #[arg(long)]
    n: u64,
    #[command(flatten)]
    schedule: ScheduleArg,
    #[arg(long, default_value_t = 100_000)]
    replications: u64,
}

fn parse_lambda(s: &str) -> Result<Lambda> {
    match s {
        "inf" | "infinity" => Ok(Lambda::Infinite),
        _ => {
            let v: f64 = s.parse().map_err(|_| Error::Config(format!("bad lambda {s:?}")))?;
            Lambda::from_value(v)
        }
    }
}

fn print(v: serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
}

fn limit(a: &LimitArgs) -> Result<()> {
    let t = a.tail.arg()?;
    if let Some(l) = &a.lambda {
        let lambda = parse_lambda(l)?;
        let g = hr_limit(&t, lambda);
        print(json!({ "x": t.x, "y": t.y, "lambda": lambda.to_string(), "g": g, "log_g": g.ln() }));
        return Ok(());
    }
    let s = a.schedule.build()?;
    let regime = classify_regime(&s, &DEFAULT_PROBES);
    let v = g_limit_in(&t, &s, regime, DEFAULT_LIMIT_TOL)?;
    print(json!({
        "x": t.x,
        "y": t.y,
        "schedule": s.to_string(),
        "regime": format!("{:?}", regime.tag),
        "g": v.g,
        "log_g": v.log_g,
        "integral_terms": v.integral_terms,
    }));
    Ok(())
}

fn exact(a: &ExactArgs) -> Result<()> {
    let t = a.tail.arg()?;
    let s = a.schedule.build()?;
    let (orthant, survival) = match a.oracle.as_str() {
        "orthant" => (true, false),
        "survival_integral" => (false, true),
        "both" => (true, true),
        other => return Err(Error::Config(format!("unknown oracle {other:?}"))),
    };
    let o = orthant.then(|| exact_log_gn(&t, a.n, &s)).transpose()?;
    let v = survival.then(|| survival_log_gn(&t, a.n, &s, DEFAULT_SURVIVAL_TOL)).transpose()?;
    if let (Some(o), Some(v)) = (&o, &v) {
        if (o.log_gn - v.log_gn).abs() > ORACLE_TOL * o.log_gn.abs() {
            return Err(Error::OracleDisagreement { n: a.n, x: t.x, y: t.y, orthant: o.log_gn, survival: v.log_gn });
        }
    }
    let best = o.as_ref().or(v.as_ref()).expect("one oracle ran");
    print(json!({
        "n": a.n,
        "x": t.x,
        "y": t.y,
        "log_gn": best.log_gn,
        "gn": best.gn,
        "oracle": best.oracle,
        "orthant_log_gn": o.as_ref().map(|r| r.log_gn),
        "survival_log_gn": v.as_ref().map(|r| r.log_gn),
        "clamped": best.clamped,
    }));
    Ok(())
}

fn expand(a: &ExpandArgs) -> Result<()> {
    let t = a.tail.arg()?;
    let s = a.schedule.build()?;
    let forced = a.force_theorem.as_deref().map(str::parse::<ForcedTheorem>).transpose()?;
    let c = correction_auto(&t, a.n, &s, forced, DEFAULT_LIMIT_TOL)?;
    print(json!({ "n": a.n, "x": t.x, "y": t.y, "correction": c }));
    Ok(())
}

fn study(a: &StudyArgs, seed: Option<u64>) -> Result<()> {
    let mut c = StudyConfig::from_path(&a.config)?;
    if let Some(s) = seed {
        c.seed = s;
    }
    if let Some(f) = &a.format {
        c.output.format = f.parse::<Format>()?;
    }
    if let Some(p) = &a.out {
        c.output.path = (p.as_os_str() != "-").then(|| p.clone());
    } else if let Some(p) = &c.output.path {
        if p.is_relative() {
            c.output.path = Some(c.base_dir.join(p));
        }
    }
    if let Some(t) = &a.force_theorem {
        c.force_theorem = Some(t.parse()?);
    }
    let report = run_study(&c)?;
    emit(&report.records, &c.output)?;
    for m in &report.monte_carlo {
        eprintln!(
            "monte carlo n={} x={} y={}: estimate {:.6} ± {:.6}, exact {:.6}, {:.2} s.e.",
            m.n, m.x, m.y, m.estimate.p, m.estimate.std_error, m.gn_exact, m.z
        );
    }
    Ok(())
}

fn mc(a: &McArgs, seed: Option<u64>) -> Result<()> {
    let t = a.tail.arg()?;
    let s = a.schedule.build()?;
    let e = empirical_gn(&t, a.n, &s, a.replications, seed.unwrap_or(0))?;
    let g = exact_log_gn(&t, a.n, &s)?.gn;
    let z = if e.std_error > 0.0 { (e.p - g).abs() / e.std_error } else { f64::NAN };
    print(json!({ "n": a.n, "x": t.x, "y": t.y, "estimate": e, "gn_exact": g, "std_errors": z }));
    Ok(())
}

fn run_selftest() -> Result<bool> {
    let checks = selftest();
    for c in &checks {
        println!("{:4}  {:<22} {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match &cli.command {
        Command::Limit(a) => limit(a),
        Command::Exact(a) => exact(a),
        Command::Expand(a) => expand(a),
        Command::Study(a) => study(a, cli.seed),
        Command::Mc(a) => mc(a, cli.seed),
        Command::Selftest => match run_selftest() {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(4),
            Err(e) => Err(e),
        },
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
