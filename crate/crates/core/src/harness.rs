//! Convergence studies: configuration, the study runner, rate fitting and
//! table output.
//!
//! A study is described by a TOML document:
//!
//! ```toml
//! tail_grid = [[-1.0, -1.0], [-2.0, -1.0]]
//! n_grid = [100, 1000, 10000]
//! oracles = ["orthant", "survival_integral"]
//! seed = 1
//!
//! [schedule]
//! preset = "example21"
//!
//! [output]
//! path = "example21.csv"
//! format = "csv"
//! ```
//!
//! See [`StudyConfig`] for every key and its default.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::copula::{empirical_gn, exact_log_gn, survival_log_gn, EmpiricalGn, TailArg, DEFAULT_SURVIVAL_TOL};
use crate::error::{Error, Result};
use crate::expansion::{thm1_approx, thm2_approx, thm3_approx, CorrectionTerm};
use crate::schedule::{classify_regime, Monotone, RegimeTag, Schedule, DEFAULT_PROBES};

/// n-grid used when a config does not give one.
pub const DEFAULT_N_GRID: [u64; 5] = [100, 1_000, 10_000, 100_000, 1_000_000];

/// Sizes above this need `allow_large_n = true`.
pub const LARGE_N: u64 = 1_000_000;

/// Largest relative difference in log G_n tolerated between the two exact oracles.
pub const ORACLE_TOL: f64 = 1e-6;

/// CSV header of [`ConvergenceRecord`] tables.
pub const CSV_HEADER: [&str; 10] =
    ["n", "x", "y", "gn_exact", "g_limit", "diff", "scale", "scaled_diff", "predicted", "ratio"];

/// How a schedule is named in a config file or on the command line.
///
/// Exactly one of `preset`, `constant`, `expression` and `table` is set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    /// `example21`, `example22`, `example23` or `independence`.
    pub preset: Option<String>,
    /// m ≡ constant.
    pub constant: Option<f64>,
    /// An expression in s (or i and n), e.g. `"1 + s"`.
    pub expression: Option<String>,
    /// File with one value of m per line; relative paths resolve against the config file.
    pub table: Option<PathBuf>,
    /// `increasing`, `decreasing` or `none`; checked on construction.
    pub monotone: Option<String>,
}

impl ScheduleSpec {
    /// Builds the schedule, resolving a relative table path against `base`.
    pub fn build(&self, base: &Path) -> Result<Schedule> {
        let set = [self.preset.is_some(), self.constant.is_some(), self.expression.is_some(), self.table.is_some()];
        if set.iter().filter(|b| **b).count() != 1 {
            return Err(Error::Config("schedule needs exactly one of preset, constant, expression, table".into()));
        }
        let s = if let Some(p) = &self.preset {
            match p.as_str() {
                "example21" => Schedule::example21(),
                "example22" => Schedule::example22(),
                "example23" => Schedule::example23(),
                "independence" => Schedule::independence(),
                other => return Err(Error::Config(format!("unknown schedule preset {other:?}"))),
            }
        } else if let Some(v) = self.constant {
            Schedule::constant(v)?
        } else if let Some(e) = &self.expression {
            Schedule::expression(e)?
        } else {
            let p = self.table.as_ref().expect("checked above");
            let p = if p.is_relative() { base.join(p) } else { p.clone() };
            Schedule::from_table_file(&p)?
        };
        match self.monotone.as_deref() {
            None => Ok(s),
            Some("increasing") => s.with_monotone(Monotone::Increasing),
            Some("decreasing") => s.with_monotone(Monotone::Decreasing),
            Some("none") => s.with_monotone(Monotone::None),
            Some(other) => Err(Error::Config(format!("unknown monotone flag {other:?}"))),
        }
    }
}

impl FromStr for ScheduleSpec {
    type Err = Error;

    /// `example21`, `constant:1.5`, `expr:1 + s` or `table:PATH`.
    fn from_str(src: &str) -> Result<Self> {
        let mut spec = ScheduleSpec::default();
        match src.split_once(':') {
            Some(("constant", v)) => {
                spec.constant = Some(v.trim().parse().map_err(|_| Error::Config(format!("bad constant {v:?}")))?);
            }
            Some(("expr", e)) => spec.expression = Some(e.to_string()),
            Some(("table", p)) => spec.table = Some(PathBuf::from(p)),
            Some((kind, _)) => return Err(Error::Config(format!("unknown schedule kind {kind:?}"))),
            None => spec.preset = Some(src.to_string()),
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    Orthant,
    SurvivalIntegral,
    MonteCarlo,
}

/// Which second-order expansion to apply, overriding the regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForcedTheorem {
    T21,
    T22,
    T23,
}

impl FromStr for ForcedTheorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t21" => Ok(ForcedTheorem::T21),
            "t22" => Ok(ForcedTheorem::T22),
            "t23" => Ok(ForcedTheorem::T23),
            other => Err(Error::Config(format!("unknown theorem tag {other:?}; use t21, t22 or t23"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format {other:?}; use csv or json"))),
        }
    }
}

/// Where a table goes; no path means standard output.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

fn default_n_grid() -> Vec<u64> {
    DEFAULT_N_GRID.to_vec()
}
fn default_oracles() -> Vec<OracleKind> {
    vec![OracleKind::Orthant]
}
fn default_replications() -> u64 {
    100_000
}
fn default_quad_tol() -> f64 {
    DEFAULT_SURVIVAL_TOL
}
fn default_mc_max_n() -> u64 {
    10_000
}

/// A declarative convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub schedule: ScheduleSpec,
    /// Pairs [x, y], both negative.
    pub tail_grid: Vec<[f64; 2]>,
    /// Strictly increasing sample sizes.
    #[serde(default = "default_n_grid")]
    pub n_grid: Vec<u64>,
    #[serde(default = "default_oracles")]
    pub oracles: Vec<OracleKind>,
    #[serde(default = "default_replications")]
    pub mc_replications: u64,
    /// Monte Carlo is skipped for n above this.
    #[serde(default = "default_mc_max_n")]
    pub mc_max_n: u64,
    #[serde(default)]
    pub seed: u64,
    /// Absolute tolerance of the survival-integral oracle and the s-integrals.
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    #[serde(default)]
    pub force_theorem: Option<ForcedTheorem>,
    /// Permit n above 10⁶.
    #[serde(default)]
    pub allow_large_n: bool,
    #[serde(default)]
    pub output: Output,
    /// Directory against which relative table paths resolve.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl StudyConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut c: StudyConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.base_dir = base_dir.to_path_buf();
        c.validate()?;
        Ok(c)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn tails(&self) -> Result<Vec<TailArg>> {
        self.tail_grid.iter().map(|[x, y]| TailArg::new(*x, *y)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if self.tail_grid.is_empty() {
            return cfg("tail_grid is empty".into());
        }
        let tails = self.tails().map_err(|e| Error::Config(e.to_string()))?;
        if self.n_grid.is_empty() {
            return cfg("n_grid is empty".into());
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return cfg(format!("n_grid must be strictly increasing, got {:?}", self.n_grid));
        }
        let reach = tails.iter().map(|t| (-t.x).max(-t.y)).fold(0.0, f64::max);
        if let Some(&n) = self.n_grid.iter().find(|&&n| (n as f64) < 2.0 * reach) {
            return cfg(format!("n = {n} is below 2·max(-x, -y) = {}", 2.0 * reach));
        }
        if !self.allow_large_n {
            if let Some(&n) = self.n_grid.iter().find(|&&n| n > LARGE_N) {
                return cfg(format!("n = {n} exceeds {LARGE_N}; set allow_large_n = true"));
            }
        }
        if self.oracles.is_empty() {
            return cfg("at least one oracle must be selected".into());
        }
        if !(self.quad_tol > 0.0 && self.quad_tol <= 1e-6) {
            return cfg(format!("quad_tol = {} outside (0, 1e-6]", self.quad_tol));
        }
        if self.oracles.contains(&OracleKind::MonteCarlo) && self.mc_replications < 100 {
            return cfg(format!("mc_replications = {} below 100", self.mc_replications));
        }
        self.schedule.build(&self.base_dir).map_err(|e| match e {
            Error::Config(m) => Error::Config(m),
            other => Error::Config(other.to_string()),
        })?;
        Ok(())
    }
}

/// One row of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub n: u64,
    pub x: f64,
    pub y: f64,
    pub gn_exact: f64,
    pub g_limit: f64,
    pub diff: f64,
    pub scale: f64,
    pub scaled_diff: f64,
    pub predicted: f64,
    pub ratio: f64,
}

impl ConvergenceRecord {
    /// The second-order approximation g_limit + scale·predicted.
    pub fn approx_gn(&self) -> f64 {
        self.g_limit + self.scale * self.predicted
    }
}

/// A Monte Carlo estimate set against the exact value of its cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McCheck {
    pub n: u64,
    pub x: f64,
    pub y: f64,
    pub gn_exact: f64,
    pub estimate: EmpiricalGn,
    /// |estimate − exact| in standard errors; infinite for a degenerate estimate that misses.
    pub z: f64,
}

impl McCheck {
    pub fn within(&self, k: f64) -> bool {
        self.z <= k
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub records: Vec<ConvergenceRecord>,
    pub monte_carlo: Vec<McCheck>,
}

fn theorem_for(s: &Schedule, forced: Option<ForcedTheorem>) -> Result<ForcedTheorem> {
    if let Some(t) = forced {
        return Ok(t);
    }
    match classify_regime(s, &DEFAULT_PROBES).tag {
        RegimeTag::ContinuousPositive => Ok(ForcedTheorem::T21),
        RegimeTag::Diverging => Ok(ForcedTheorem::T22),
        RegimeTag::Vanishing => Ok(ForcedTheorem::T23),
        RegimeTag::Unclassified => {
            Err(Error::Config(format!("schedule {s} is unclassified; set force_theorem to choose an expansion")))
        }
    }
}

/// The second-order approximation of G_n for the chosen theorem.
pub fn correction(t: &TailArg, n: u64, s: &Schedule, theorem: ForcedTheorem, tol: f64) -> Result<CorrectionTerm> {
    match theorem {
        ForcedTheorem::T21 => thm1_approx(t, n, s, tol.max(1e-13)),
        ForcedTheorem::T22 => thm2_approx(t, n, s),
        ForcedTheorem::T23 => thm3_approx(t, n, s),
    }
}

/// The second-order approximation with the theorem chosen from the regime.
pub fn correction_auto(t: &TailArg, n: u64, s: &Schedule, forced: Option<ForcedTheorem>, tol: f64) -> Result<CorrectionTerm> {
    correction(t, n, s, theorem_for(s, forced)?, tol)
}

/// Exact G_n from the selected oracles, cross-checked when both run.
pub fn exact_cell(t: &TailArg, n: u64, s: &Schedule, oracles: &[OracleKind], tol: f64) -> Result<Option<f64>> {
    let orthant = if oracles.contains(&OracleKind::Orthant) { Some(exact_log_gn(t, n, s)?.log_gn) } else { None };
    let survival =
        if oracles.contains(&OracleKind::SurvivalIntegral) { Some(survival_log_gn(t, n, s, tol)?.log_gn) } else { None };
    if let (Some(a), Some(b)) = (orthant, survival) {
        if (a - b).abs() > ORACLE_TOL * a.abs() {
            return Err(Error::OracleDisagreement { n, x: t.x, y: t.y, orthant: a, survival: b });
        }
    }
    Ok(orthant.or(survival).map(f64::exp))
}

/// Runs every (tail, n) cell; rows come out in that lexicographic order.
pub fn run_study(c: &StudyConfig) -> Result<StudyReport> {
    c.validate()?;
    let s = c.schedule.build(&c.base_dir)?;
    let theorem = theorem_for(&s, c.force_theorem)?;
    let tails = c.tails()?;
    let mc = c.oracles.contains(&OracleKind::MonteCarlo);
    let mut records = Vec::with_capacity(tails.len() * c.n_grid.len());
    let mut monte_carlo = Vec::new();
    for t in &tails {
        for &n in &c.n_grid {
            log::info!("cell n = {n}, (x, y) = ({}, {})", t.x, t.y);
            let exact = exact_cell(t, n, &s, &c.oracles, c.quad_tol)?;
            let est = if mc && n <= c.mc_max_n {
                Some(empirical_gn(t, n, &s, c.mc_replications, c.seed)?)
            } else {
                if mc {
                    log::info!("Monte Carlo skipped at n = {n} > mc_max_n = {}", c.mc_max_n);
                }
                None
            };
            let gn = match (exact, est) {
                (Some(g), _) => g,
                (None, Some(e)) => e.p,
                (None, None) => {
                    return Err(Error::Config(format!("no oracle can evaluate n = {n}; raise mc_max_n or add orthant")));
                }
            };
            if let (Some(g), Some(e)) = (exact, est) {
                let z = if e.std_error > 0.0 {
                    (e.p - g).abs() / e.std_error
                } else if e.p == g {
                    0.0
                } else {
                    f64::INFINITY
                };
                if z > 3.0 && !e.degenerate {
                    log::warn!("Monte Carlo at n = {n}, ({}, {}) is {z:.2} standard errors from exact", t.x, t.y);
                }
                monte_carlo.push(McCheck { n, x: t.x, y: t.y, gn_exact: g, estimate: e, z });
            }
            let corr = correction(t, n, &s, theorem, c.quad_tol)?;
            records.push(record(n, t, gn, &corr));
        }
    }
    Ok(StudyReport { records, monte_carlo })
}

fn record(n: u64, t: &TailArg, gn: f64, corr: &CorrectionTerm) -> ConvergenceRecord {
    let diff = gn - corr.limit;
    let scaled_diff = diff / corr.scale;
    ConvergenceRecord {
        n,
        x: t.x,
        y: t.y,
        gn_exact: gn,
        g_limit: corr.limit,
        diff,
        scale: corr.scale,
        scaled_diff,
        predicted: corr.constant,
        ratio: scaled_diff / corr.constant,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModel {
    /// log|diff| against log n.
    PowerLawN,
    /// log|diff| against log(scale).
    PaperScale,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
    /// Records dropped because diff was 0.
    pub excluded: usize,
}

/// Least-squares line through (log n or log scale, log|diff|).
pub fn fit_rate(records: &[ConvergenceRecord], model: RateModel) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.diff != 0.0)
        .map(|r| {
            let u = match model {
                RateModel::PowerLawN => (r.n as f64).ln(),
                RateModel::PaperScale => r.scale.ln(),
            };
            (u, r.diff.abs().ln())
        })
        .collect();
    let excluded = records.len() - pts.len();
    if excluded > 0 {
        log::warn!("fit_rate: {excluded} records with diff = 0 excluded");
    }
    if pts.len() < 4 {
        return Err(Error::domain("fit_rate", format!("need at least 4 records with nonzero diff, got {}", pts.len())));
    }
    let k = pts.len() as f64;
    let mu = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let mv = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mu).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("fit_rate", "all abscissae coincide"));
    }
    let slope = pts.iter().map(|p| (p.0 - mu) * (p.1 - mv)).sum::<f64>() / sxx;
    let intercept = mv - slope * mu;
    let max_residual = pts.iter().map(|p| (p.1 - intercept - slope * p.0).abs()).fold(0.0, f64::max);
    Ok(RateFit { slope, intercept, max_residual, excluded })
}

struct Sci(f64);

impl fmt::Display for Sci {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_finite() {
            write!(f, "{:.16e}", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Renders records as a table; identical input gives identical bytes.
pub fn render(records: &[ConvergenceRecord], format: Format) -> Result<String> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Parse(e.to_string());
            w.write_record(CSV_HEADER).map_err(io)?;
            for r in records {
                let floats = [r.x, r.y, r.gn_exact, r.g_limit, r.diff, r.scale, r.scaled_diff, r.predicted, r.ratio];
                let mut row = vec![r.n.to_string()];
                row.extend(floats.iter().map(|v| Sci(*v).to_string()));
                w.write_record(&row).map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("ASCII output"))
        }
        Format::Json => {
            let mut s = serde_json::to_string_pretty(records).map_err(|e| Error::Parse(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
    }
}

/// Reads back a CSV table written by [`render`].
pub fn parse_csv(text: &str) -> Result<Vec<ConvergenceRecord>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| Error::Parse(e.to_string()))?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(|e| Error::Parse(e.to_string()))).collect()
}

/// Writes records to the sink: a file, or standard output without a path.
pub fn emit(records: &[ConvergenceRecord], sink: &Output) -> Result<()> {
    let text = render(records, sink.format)?;
    match &sink.path {
        Some(p) => fs::write(p, text).map_err(|source| Error::Io { path: p.clone(), source }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| Error::Io { path: PathBuf::from("<stdout>"), source }),
    }
}

/// Process exit code for an error: 2 configuration, 3 oracle disagreement, 4 numeric.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::OracleDisagreement { .. } => 3,
        Error::Numeric { .. } => 4,
        Error::Domain { .. } | Error::Classification(_) | Error::Config(_) | Error::Parse(_) | Error::Io { .. } => 2,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Quick invariant checks across all modules; each runs in well under a second.
pub fn selftest() -> Vec<Check> {
    use crate::expansion::{ik_closed_form, ik_quadrature, IkArgs};
    use crate::gauss::{bvn_upper_orthant, cdf, quantile, upper_tail, OrthantQuery};
    use crate::limits::{g_limit, hr_limit};
    use crate::schedule::Lambda;

    let mut out = Vec::new();
    let mut check = |name: &'static str, f: &dyn Fn() -> Result<(bool, String)>| {
        let (passed, detail) = f().unwrap_or_else(|e| (false, e.to_string()));
        out.push(Check { name, passed, detail });
    };
    check("cdf symmetry", &|| {
        let worst = (0..2000)
            .map(|k| -37.0 + 74.0 * k as f64 / 1999.0)
            .map(|z| (cdf(z) + cdf(-z) - 1.0).abs())
            .fold(0.0, f64::max);
        Ok((worst <= 2.0 * f64::EPSILON, format!("max |Φ(z) + Φ(−z) − 1| = {worst:e}")))
    });
    check("quantile round trip", &|| {
        let worst = [1e-300, 1e-100, 1e-20, 1e-6, 0.01, 0.3, 0.5, 0.9]
            .iter()
            .map(|&p| (cdf(quantile(p).unwrap()) - p).abs() / p)
            .fold(0.0, f64::max);
        Ok((worst <= 1e-12, format!("max relative error {worst:e}")))
    });
    check("median orthant", &|| {
        let v = bvn_upper_orthant(&OrthantQuery::new(0.0, 0.0, 0.5)?);
        Ok(((v - 1.0 / 3.0).abs() < 1e-15, format!("P = {v}")))
    });
    check("independent orthant", &|| {
        let v = bvn_upper_orthant(&OrthantQuery::new(2.0, 3.0, 0.0)?);
        let w = upper_tail(2.0) * upper_tail(3.0);
        Ok(((v / w - 1.0).abs() < 1e-14, format!("{v:e} vs {w:e}")))
    });
    check("dual oracle", &|| {
        let t = TailArg::new(-1.0, -2.0)?;
        let s = Schedule::example21();
        let a = exact_log_gn(&t, 1000, &s)?.log_gn;
        let b = survival_log_gn(&t, 1000, &s, DEFAULT_SURVIVAL_TOL)?.log_gn;
        let rel = (a - b).abs() / a.abs();
        Ok((rel <= 1e-8, format!("relative difference {rel:e}")))
    });
    check("I_k closed forms", &|| {
        let mut worst: f64 = 0.0;
        for k in 0..4 {
            for (x, y, m) in [(-1.0, -2.0, 1.0), (-0.5, -3.0, 2.0), (-5.0, -0.5, 0.1)] {
                let a = IkArgs::new(k, x, y, m, 10_000)?;
                let (c, q) = (ik_closed_form(&a)?, ik_quadrature(&a, 1e-13)?);
                worst = worst.max((c - q).abs() / q.abs().max(1.0));
            }
        }
        Ok((worst <= 1e-9, format!("max scaled difference {worst:e}")))
    });
    check("limit law endpoints", &|| {
        let t = TailArg::new(-2.0, -1.0)?;
        let ok = hr_limit(&t, Lambda::Infinite) == (-3.0f64).exp() && hr_limit(&t, Lambda::Zero) == (-2.0f64).exp();
        let g = g_limit(&t, &Schedule::constant(1.0)?, 1e-12)?.g;
        let d = (g - hr_limit(&t, Lambda::Finite(1.0))).abs();
        Ok((ok && d < 1e-12, format!("constant-schedule gap {d:e}")))
    });
    out
}
