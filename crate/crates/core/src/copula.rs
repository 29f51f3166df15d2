//! Exact finite-n distribution of normalized componentwise maxima.
//!
//! G_n(x, y) = Π_i C(1 + x/n, 1 + y/n; ρ_ni) is evaluated in log form by two
//! independent routes for the joint exceedance p₁₂: the bivariate orthant
//! integral, and a one-dimensional integral of the conditional tail.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::{bvn_upper_orthant, upper_quantile, upper_tail, OrthantQuery};
use crate::quad::{Quadrature, MAX_PANELS};
use crate::schedule::{rho_at, Correlation, Schedule};
use crate::sum::NeumaierSum;

/// Default absolute tolerance for the survival-integral oracle.
pub const DEFAULT_SURVIVAL_TOL: f64 = 1e-11;

/// Memoize per distinct m when there are at most n / MEMO_RATIO of them.
const MEMO_RATIO: usize = 4;

/// m values closer than this (relative) share one evaluation.
const MEMO_TOL: f64 = 1e-15;

/// Arguments (x, y) of G_n and G; both strictly negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailArg {
    pub x: f64,
    pub y: f64,
}

impl TailArg {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x < 0.0 && y < 0.0 && x.is_finite() && y.is_finite()) {
            return Err(Error::domain("TailArg", format!("need finite x, y < 0, got ({x}, {y})")));
        }
        Ok(TailArg { x, y })
    }

    /// log(x/y) = log((−x)/(−y)).
    pub fn log_ratio(&self) -> f64 {
        ((-self.x).ln()) - ((-self.y).ln())
    }

    /// log(xy) = log((−x)(−y)).
    pub fn log_product(&self) -> f64 {
        (-self.x).ln() + (-self.y).ln()
    }

    pub fn swapped(&self) -> Self {
        TailArg { x: self.y, y: self.x }
    }

    fn check_n(&self, n: u64, op: &'static str) -> Result<()> {
        let half = n as f64 / 2.0;
        if n == 0 || -self.x > half || -self.y > half {
            return Err(Error::domain(op, format!("need -x, -y <= n/2, got ({}, {}) at n = {n}", self.x, self.y)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Oracle {
    Orthant,
    SurvivalIntegral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    pub log_gn: f64,
    pub gn: f64,
    /// Per-index log C values, in index order, when requested.
    pub per_index_terms: Option<Vec<f64>>,
    pub oracle: Oracle,
    /// Number of indices whose correlation was clamped to 1 − ε.
    pub clamped: u64,
}

/// Options shared by both exact oracles.
#[derive(Debug, Clone, Copy)]
pub struct ExactOptions {
    pub keep_terms: bool,
    /// Survival-integral absolute tolerance per index (ignored by the orthant oracle).
    pub tol: f64,
    pub memoize: bool,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions { keep_terms: false, tol: DEFAULT_SURVIVAL_TOL, memoize: true }
    }
}

/// Normal copula C(u, v; ρ).
pub fn copula_cdf(u: f64, v: f64, rho: f64) -> f64 {
    if u <= 0.0 || v <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return v.min(1.0);
    }
    if v >= 1.0 {
        return u;
    }
    if rho >= 1.0 {
        return u.min(v);
    }
    if rho <= -1.0 {
        return (u + v - 1.0).max(0.0);
    }
    if u >= 0.5 && v >= 0.5 {
        let (tu, tv) = (1.0 - u, 1.0 - v);
        let q = OrthantQuery::new(upper_quantile(tu), upper_quantile(tv), rho).expect("interior thresholds");
        return 1.0 - ((tu + tv) - bvn_upper_orthant(&q));
    }
    // P(Z₁ ≤ a, Z₂ ≤ b) = P(−Z₁ ≥ −a, −Z₂ ≥ −b)
    let q = OrthantQuery::new(upper_quantile(u), upper_quantile(v), rho).expect("interior thresholds");
    bvn_upper_orthant(&q)
}

/// Normal copula density c(u, v; ρ).
pub fn copula_density(u: f64, v: f64, rho: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0) {
        return Err(Error::domain("copula_density", format!("(u, v) = ({u}, {v}) not interior")));
    }
    if !(rho > -1.0 && rho < 1.0) {
        return Err(Error::domain("copula_density", format!("rho = {rho} outside (-1, 1)")));
    }
    if rho == 0.0 {
        return Ok(1.0);
    }
    let a = -upper_quantile(u);
    let b = -upper_quantile(v);
    let d = (1.0 - rho) * (1.0 + rho);
    let e = (2.0 * rho * a * b - rho * rho * (a * a + b * b)) / (2.0 * d);
    Ok(e.exp() / d.sqrt())
}

struct Cell {
    p1: f64,
    p2: f64,
    a: f64,
    b: f64,
}

impl Cell {
    fn new(t: &TailArg, n: u64) -> Self {
        let nf = n as f64;
        let (p1, p2) = (-t.x / nf, -t.y / nf);
        Cell { p1, p2, a: upper_quantile(p1), b: upper_quantile(p2) }
    }

    fn log_term(&self, p12: f64) -> f64 {
        (-((self.p1 + self.p2) - p12)).ln_1p()
    }
}

fn correlations(s: &Schedule, n: u64) -> Result<Vec<Correlation>> {
    (1..=n).map(|i| rho_at(s, i, n)).collect()
}

/// Builds per-index log terms, evaluating `term` once per distinct 1 − ρ
/// when the schedule has few distinct values.
fn per_index<F>(corr: &[Correlation], memoize: bool, term: F) -> Result<Vec<f64>>
where
    F: Fn(Option<usize>, f64) -> Result<f64> + Sync,
{
    if memoize {
        let mut distinct: Vec<f64> = corr.iter().map(|c| c.one_minus_rho).collect();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup_by(|b, a| (*b - *a).abs() <= MEMO_TOL * a.abs());
        if distinct.len() * MEMO_RATIO <= corr.len() {
            let values: Vec<f64> = distinct
                .par_iter()
                .enumerate()
                .map(|(_, &c)| term(None, c))
                .collect::<Result<_>>()?;
            return Ok(corr
                .iter()
                .map(|c| {
                    // index of the last representative <= c
                    let k = distinct.partition_point(|&d| d <= c.one_minus_rho).saturating_sub(1);
                    values[k]
                })
                .collect());
        }
    }
    corr.par_iter()
        .enumerate()
        .with_min_len(256)
        .map(|(i, c)| term(Some(i + 1), c.one_minus_rho))
        .collect()
}

fn assemble(terms: Vec<f64>, corr: &[Correlation], keep: bool, oracle: Oracle) -> ExactResult {
    // sequential compensated sum: identical bits for any worker count
    let log_gn = terms.iter().copied().collect::<NeumaierSum>().total();
    let log_gn = log_gn.min(0.0);
    ExactResult {
        log_gn,
        gn: log_gn.exp(),
        per_index_terms: keep.then_some(terms),
        oracle,
        clamped: corr.iter().filter(|c| c.clamped).count() as u64,
    }
}

/// log G_n through bivariate orthant probabilities.
pub fn exact_log_gn(t: &TailArg, n: u64, s: &Schedule) -> Result<ExactResult> {
    exact_log_gn_with(t, n, s, &ExactOptions::default())
}

pub fn exact_log_gn_with(t: &TailArg, n: u64, s: &Schedule, opts: &ExactOptions) -> Result<ExactResult> {
    t.check_n(n, "exact_log_gn")?;
    let corr = correlations(s, n)?;
    let cell = Cell::new(t, n);
    let terms = per_index(&corr, opts.memoize, |_, c| {
        let q = OrthantQuery::with_complement(cell.a, cell.b, c)?;
        Ok(cell.log_term(bvn_upper_orthant(&q)))
    })?;
    Ok(assemble(terms, &corr, opts.keep_terms, Oracle::Orthant))
}

/// The joint exceedance (1/n)∫_y^0 (1 − Φ((a − ρ b(t))/σ)) dt, b(t) = Φ⁻(1 + t/n).
pub fn survival_joint_exceedance(t: &TailArg, n: u64, one_minus_rho: f64, tol: f64) -> Result<f64> {
    let cell = Cell::new(t, n);
    survival_p12(&cell, t, n, one_minus_rho, tol)
}

fn survival_p12(cell: &Cell, t: &TailArg, n: u64, c: f64, tol: f64) -> Result<f64> {
    if !(c > 0.0 && c < 2.0) {
        return Err(Error::domain("survival_log_gn", format!("1 - rho = {c} outside (0, 2)")));
    }
    let nf = n as f64;
    let sigma = (c * (2.0 - c)).sqrt();
    let a = cell.a;
    let integrand = |u: f64| -> f64 {
        let q = (-u / nf).max(f64::MIN_POSITIVE);
        let b = upper_quantile(q);
        // a − ρb without cancelling the two large quantiles
        let num = (a - b) + c * b;
        upper_tail(num / sigma)
    };
    // t = −e^w removes the logarithmic endpoint behaviour at t = 0; the
    // sliver (−e^{w₀}, 0) contributes at most e^{w₀} ≤ tol/1000
    let w0 = (1e-3 * tol).ln();
    let w1 = (-t.y).ln();
    if w1 <= w0 {
        return Ok(-t.y * integrand(0.5 * t.y) / nf);
    }
    let m = c * nf.ln();
    let candidates = [t.x, t.x * (2.0 * m).exp(), t.x * (-2.0 * m).exp(), -1.0 / nf.ln()];
    let mut points: Vec<f64> = candidates
        .iter()
        .map(|p| (-p).ln())
        .filter(|w| *w > w0 && *w < w1 && w.is_finite())
        .collect();
    points.push(w0);
    points.push(w1);
    points.sort_by(f64::total_cmp);
    points.dedup();
    let quad = Quadrature { abs_tol: tol, rel_tol: 0.0, max_panels: MAX_PANELS };
    let r = quad.integrate_pieces(
        |w: f64| {
            let e = w.exp();
            e * integrand(-e)
        },
        &points,
    )?;
    let sliver = w0.exp() * integrand(-0.5 * w0.exp());
    Ok((r.value + sliver) / nf)
}

/// log G_n through the conditional-tail integral; an independent check on
/// [`exact_log_gn`].
pub fn survival_log_gn(t: &TailArg, n: u64, s: &Schedule, tol: f64) -> Result<ExactResult> {
    survival_log_gn_with(t, n, s, &ExactOptions { tol, ..ExactOptions::default() })
}

pub fn survival_log_gn_with(t: &TailArg, n: u64, s: &Schedule, opts: &ExactOptions) -> Result<ExactResult> {
    t.check_n(n, "survival_log_gn")?;
    if !(opts.tol > 0.0 && opts.tol <= 1e-6) {
        return Err(Error::domain("survival_log_gn", format!("tol = {} outside (0, 1e-6]", opts.tol)));
    }
    let corr = correlations(s, n)?;
    let cell = Cell::new(t, n);
    let terms = per_index(&corr, opts.memoize, |i, c| {
        let p12 = survival_p12(&cell, t, n, c, opts.tol).map_err(|e| match e {
            Error::Numeric { op, detail } => {
                let at = i.map_or_else(|| format!("1 - rho = {c:e}"), |i| format!("index {i}"));
                Error::Numeric { op, detail: format!("{at}: {detail}") }
            }
            other => other,
        })?;
        Ok(cell.log_term(p12))
    })?;
    Ok(assemble(terms, &corr, opts.keep_terms, Oracle::SurvivalIntegral))
}

/// Correlations prepared once for repeated sampling.
#[derive(Debug, Clone)]
pub struct Sampler {
    n: u64,
    rho: Vec<f64>,
    sigma: Vec<f64>,
}

impl Sampler {
    pub fn new(n: u64, s: &Schedule) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("sample_maxima", "n must be >= 1"));
        }
        let corr = correlations(s, n)?;
        Ok(Sampler {
            n,
            rho: corr.iter().map(|c| c.rho()).collect(),
            sigma: corr.iter().map(|c| (c.one_minus_rho * (2.0 - c.one_minus_rho)).sqrt()).collect(),
        })
    }

    /// One draw of (n(max U − 1), n(max V − 1)) from stream `replication` of `seed`.
    pub fn draw(&self, seed: u64, replication: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(replication);
        let mut zmax = f64::NEG_INFINITY;
        let mut wmax = f64::NEG_INFINITY;
        for (r, s) in self.rho.iter().zip(&self.sigma) {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            zmax = zmax.max(z1);
            wmax = wmax.max(r * z1 + s * z2);
        }
        let nf = self.n as f64;
        (-nf * upper_tail(zmax), -nf * upper_tail(wmax))
    }
}

/// One replication of the normalized maxima; deterministic in `seed`.
pub fn sample_maxima(n: u64, s: &Schedule, seed: u64) -> Result<(f64, f64)> {
    Ok(Sampler::new(n, s)?.draw(seed, 0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalGn {
    pub p: f64,
    pub std_error: f64,
    pub replications: u64,
    /// No draw (or every draw) fell in the region, so the standard error is 0.
    pub degenerate: bool,
}

/// Fraction of R replications with both maxima inside (−∞, x] × (−∞, y].
pub fn empirical_gn(t: &TailArg, n: u64, s: &Schedule, r: u64, seed: u64) -> Result<EmpiricalGn> {
    if r < 100 {
        return Err(Error::domain("empirical_gn", format!("need R >= 100 replications, got {r}")));
    }
    let sampler = Sampler::new(n, s)?;
    let hits: u64 = (0..r)
        .into_par_iter()
        .map(|k| {
            let (u, v) = sampler.draw(seed, k);
            u64::from(u <= t.x && v <= t.y)
        })
        .sum();
    let rf = r as f64;
    let p = hits as f64 / rf;
    Ok(EmpiricalGn {
        p,
        std_error: (p * (1.0 - p) / rf).sqrt(),
        replications: r,
        degenerate: hits == 0 || hits == r,
    })
}
