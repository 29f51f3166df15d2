//! Correlation schedules ρ_ni = 1 − m(i/n)/log n and their regimes.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::sum::NeumaierSum;

/// Default probe sizes for [`classify_regime`].
pub const DEFAULT_PROBES: [u64; 4] = [1_000, 10_000, 100_000, 1_000_000];

/// Minimum trend factor across probes for a Diverging/Vanishing verdict.
const TREND_FACTOR: f64 = 1.2;

/// Grid size used to scan functions of s on [0, 1].
const S_GRID: usize = 1_000;

/// Smallest n for which Example 2.2 is defined at every index.
pub const EXAMPLE22_MIN_N: u64 = 230;
/// Smallest n for which Example 2.3 is defined at every index.
pub const EXAMPLE23_MIN_N: u64 = 16;
/// Example 2.3 evaluates log log i at max(i, 3) so the root stays real.
pub const EXAMPLE23_MIN_I: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotone {
    Increasing,
    Decreasing,
    None,
}

/// Extended nonnegative λ: zero and infinity are genuine cases, not floats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda {
    Zero,
    Finite(f64),
    Infinite,
}

impl Lambda {
    /// Maps a finite nonnegative float, with 0 becoming [`Lambda::Zero`].
    pub fn from_value(v: f64) -> Result<Self> {
        if v == 0.0 {
            Ok(Lambda::Zero)
        } else if v.is_finite() && v > 0.0 {
            Ok(Lambda::Finite(v))
        } else if v == f64::INFINITY {
            Ok(Lambda::Infinite)
        } else {
            Err(Error::domain("Lambda", format!("{v} is not in [0, ∞]")))
        }
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lambda::Zero => f.write_str("0"),
            Lambda::Finite(v) => write!(f, "{v}"),
            Lambda::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeTag {
    ContinuousPositive,
    Diverging,
    Vanishing,
    Unclassified,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime {
    pub tag: RegimeTag,
    /// Set only for schedules constant in s.
    pub lambda: Option<Lambda>,
}

impl Regime {
    fn plain(tag: RegimeTag) -> Self {
        Regime { tag, lambda: None }
    }

    fn constant(lambda: Lambda) -> Self {
        let tag = match lambda {
            Lambda::Zero => RegimeTag::Vanishing,
            Lambda::Finite(_) => RegimeTag::ContinuousPositive,
            Lambda::Infinite => RegimeTag::Diverging,
        };
        Regime { tag, lambda: Some(lambda) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Analytic {
    /// m(s) = s + 1.
    Example21,
    /// Triple-log schedule whose minimum diverges.
    Example22,
    /// Iterated-log schedule whose maximum vanishes.
    Example23,
    /// m ≡ λ.
    Constant(f64),
    /// m ≡ log n, i.e. ρ ≡ 0.
    Independence,
    Expression(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    Analytic(Analytic),
    /// Step function m(s) = values[⌈sL⌉ − 1] for a table of length L.
    Tabulated(Vec<f64>),
}

/// An immutable correlation schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    kind: Kind,
    monotone: Option<Monotone>,
}

/// ρ together with 1 − ρ, which is what the orthant routines consume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub one_minus_rho: f64,
    /// m was below ε·log n and 1 − ρ was raised to ε.
    pub clamped: bool,
}

impl Correlation {
    pub fn rho(&self) -> f64 {
        1.0 - self.one_minus_rho
    }
}

fn lll(v: f64) -> f64 {
    v.ln().ln().ln()
}

impl Schedule {
    pub fn analytic(a: Analytic) -> Result<Self> {
        match &a {
            Analytic::Constant(v) if !(v.is_finite() && *v >= 0.0) => {
                return Err(Error::domain("Schedule", format!("constant m = {v} must be finite and >= 0")));
            }
            _ => {}
        }
        Ok(Schedule { kind: Kind::Analytic(a), monotone: None })
    }

    pub fn example21() -> Self {
        Schedule { kind: Kind::Analytic(Analytic::Example21), monotone: None }
    }

    pub fn example22() -> Self {
        Schedule { kind: Kind::Analytic(Analytic::Example22), monotone: None }
    }

    pub fn example23() -> Self {
        Schedule { kind: Kind::Analytic(Analytic::Example23), monotone: None }
    }

    pub fn constant(m: f64) -> Result<Self> {
        Self::analytic(Analytic::Constant(m))
    }

    pub fn independence() -> Self {
        Schedule { kind: Kind::Analytic(Analytic::Independence), monotone: None }
    }

    pub fn expression(src: &str) -> Result<Self> {
        Self::analytic(Analytic::Expression(Expr::parse(src)?))
    }

    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("Schedule", "empty table"));
        }
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::domain("Schedule", format!("table entry {} is {v}, must be finite and >= 0", k + 1)));
        }
        Ok(Schedule { kind: Kind::Tabulated(values), monotone: None })
    }

    /// Reads one nonnegative decimal per line; blank lines and `#` comments are skipped.
    pub fn from_table_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::tabulated(parse_table(&text)?)
    }

    /// Declares monotonicity; verified on a 10³-point grid or the full table.
    pub fn with_monotone(mut self, m: Monotone) -> Result<Self> {
        self.check_monotone(m)?;
        self.monotone = Some(m);
        Ok(self)
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn monotone(&self) -> Option<Monotone> {
        self.monotone
    }

    /// True if m depends on s only, so that m(s) on [0, 1] is meaningful.
    pub fn is_s_only(&self) -> bool {
        match &self.kind {
            Kind::Tabulated(_) => true,
            Kind::Analytic(a) => match a {
                Analytic::Example21 | Analytic::Constant(_) => true,
                Analytic::Example22 | Analytic::Example23 | Analytic::Independence => false,
                Analytic::Expression(e) => !e.depends_on_size(),
            },
        }
    }

    /// The constant value when m does not vary with s (it may still vary with n).
    pub fn constant_value(&self) -> Option<f64> {
        match &self.kind {
            Kind::Analytic(Analytic::Constant(v)) => Some(*v),
            Kind::Analytic(Analytic::Expression(e)) if e.is_constant() => Some(e.eval(0.0, 0.0, 0.0)),
            Kind::Tabulated(v) if v.iter().all(|x| *x == v[0]) => Some(v[0]),
            _ => None,
        }
    }

    /// Smallest n at which every index is admissible.
    pub fn min_n(&self) -> u64 {
        match &self.kind {
            Kind::Analytic(Analytic::Example22) => EXAMPLE22_MIN_N,
            Kind::Analytic(Analytic::Example23) => EXAMPLE23_MIN_N,
            _ => 1,
        }
    }

    /// m(s) for s-only schedules.
    pub fn m_at(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::domain("m_at", format!("s = {s} outside [0, 1]")));
        }
        let v = match &self.kind {
            Kind::Tabulated(t) => {
                let l = t.len();
                let k = ((s * l as f64).ceil() as usize).clamp(1, l);
                t[k - 1]
            }
            Kind::Analytic(Analytic::Example21) => s + 1.0,
            Kind::Analytic(Analytic::Constant(v)) => *v,
            Kind::Analytic(Analytic::Expression(e)) if !e.depends_on_size() => e.eval(s, f64::NAN, f64::NAN),
            Kind::Analytic(_) => {
                return Err(Error::domain("m_at", "schedule depends on n; m(s) alone is undefined"));
            }
        };
        check_m(v, "m_at")
    }

    /// Break points of m(s) in (0, 1) that quadrature should not straddle.
    pub fn knots(&self) -> Vec<f64> {
        match &self.kind {
            Kind::Tabulated(t) if t.len() > 1 => {
                let l = t.len() as f64;
                (1..t.len()).filter(|&k| t[k] != t[k - 1]).map(|k| k as f64 / l).collect()
            }
            _ => Vec::new(),
        }
    }

    /// m(i/n) at sample size n.
    pub fn m(&self, i: u64, n: u64) -> Result<f64> {
        if n == 0 || i == 0 || i > n {
            return Err(Error::domain("m", format!("index i = {i} outside 1..={n}")));
        }
        let (fi, fn_) = (i as f64, n as f64);
        let v = match &self.kind {
            Kind::Tabulated(t) => {
                // entry ⌈i·L/n⌉ in exact integer arithmetic
                let l = t.len() as u128;
                let k = (i as u128 * l).div_ceil(n as u128) as usize;
                t[k.clamp(1, t.len()) - 1]
            }
            Kind::Analytic(a) => match a {
                Analytic::Example21 => fi / fn_ + 1.0,
                Analytic::Constant(v) => *v,
                Analytic::Independence => fn_.ln(),
                Analytic::Expression(e) => e.eval(fi / fn_, fi, fn_),
                Analytic::Example22 => {
                    if n < EXAMPLE22_MIN_N {
                        return Err(Error::domain("m", format!("Example 2.2 needs n >= {EXAMPLE22_MIN_N}, got {n}")));
                    }
                    let r = fn_ / fi;
                    // boundary i = √n belongs to the first branch
                    if i.checked_mul(i).is_some_and(|sq| sq <= n) {
                        4.0 * lll(r)
                    } else if r > std::f64::consts::E.exp() {
                        2.0 * lll(fn_).max(lll(r))
                    } else {
                        2.0 * lll(fn_)
                    }
                }
                Analytic::Example23 => {
                    if n < EXAMPLE23_MIN_N {
                        return Err(Error::domain("m", format!("Example 2.3 needs n >= {EXAMPLE23_MIN_N}, got {n}")));
                    }
                    let l3 = lll(fn_);
                    let root = (i.max(EXAMPLE23_MIN_I) as f64).ln().ln().sqrt();
                    // boundary i = log n belongs to the first branch
                    if fi <= fn_.ln() {
                        root / l3
                    } else {
                        (1.0 / l3).min(root / l3)
                    }
                }
            },
        };
        check_m(v, "m")
    }

    fn check_monotone(&self, want: Monotone) -> Result<()> {
        if want == Monotone::None {
            return Ok(());
        }
        let values: Vec<f64> = match &self.kind {
            Kind::Tabulated(t) => t.clone(),
            _ if self.is_s_only() => (0..=S_GRID).map(|k| self.m_at(k as f64 / S_GRID as f64)).collect::<Result<_>>()?,
            _ => {
                let n = 1_000u64.max(self.min_n());
                (1..=n).map(|i| self.m(i, n)).collect::<Result<_>>()?
            }
        };
        let ok = values.windows(2).all(|w| match want {
            Monotone::Increasing => w[1] >= w[0],
            Monotone::Decreasing => w[1] <= w[0],
            Monotone::None => true,
        });
        if ok {
            Ok(())
        } else {
            Err(Error::domain("Schedule", format!("declared {want:?} but the grid scan disagrees")))
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Tabulated(t) => write!(f, "tabulated({} values)", t.len()),
            Kind::Analytic(a) => match a {
                Analytic::Example21 => f.write_str("example21"),
                Analytic::Example22 => f.write_str("example22"),
                Analytic::Example23 => f.write_str("example23"),
                Analytic::Constant(v) => write!(f, "constant({v})"),
                Analytic::Independence => f.write_str("independence"),
                Analytic::Expression(e) => write!(f, "expr({e})"),
            },
        }
    }
}

fn check_m(v: f64, op: &'static str) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::domain(op, format!("m evaluated to {v}; must be finite and >= 0")))
    }
}

pub fn parse_table(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: {line:?} is not a number", k + 1)))?;
        out.push(v);
    }
    Ok(out)
}

/// ρ_ni = 1 − m(i/n)/log n, returned with its complement.
///
/// m below ε·log n (including m = 0) is clamped to 1 − ρ = ε and flagged.
/// The independence schedule gives ρ = 0 exactly for every n, including n = 1.
pub fn rho_at(s: &Schedule, i: u64, n: u64) -> Result<Correlation> {
    if let Kind::Analytic(Analytic::Independence) = s.kind {
        s.m(i, n)?;
        return Ok(Correlation { one_minus_rho: 1.0, clamped: false });
    }
    if n < 2 {
        return Err(Error::domain("rho_at", format!("n must be >= 2, got {n}")));
    }
    correlation(s.m(i, n)?, (n as f64).ln())
}

/// Maps an m value to the correlation at log n = `log_n`.
pub fn correlation(m: f64, log_n: f64) -> Result<Correlation> {
    let c = m / log_n;
    if !(c < 2.0) {
        return Err(Error::domain(
            "rho_at",
            format!("m = {m} >= 2 log n = {}; correlation would leave (-1, 1)", 2.0 * log_n),
        ));
    }
    if c < f64::EPSILON {
        return Ok(Correlation { one_minus_rho: f64::EPSILON, clamped: true });
    }
    Ok(Correlation { one_minus_rho: c, clamped: false })
}

fn min_max(s: &Schedule, n: u64) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 1..=n {
        let v = s.m(i, n)?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

/// Sorts a schedule into one of the three regimes.
///
/// Functions of s alone are scanned on a dense grid; schedules that depend
/// on n must show a monotone trend of min m (Diverging) or max m
/// (Vanishing) across the probe sizes, by at least a factor 1.2 end to end.
/// Anything else is Unclassified.
pub fn classify_regime(s: &Schedule, probe_sizes: &[u64]) -> Regime {
    if let Kind::Analytic(Analytic::Independence) = s.kind {
        return Regime::constant(Lambda::Infinite);
    }
    if let Some(v) = s.constant_value() {
        return match Lambda::from_value(v) {
            Ok(l) => Regime::constant(l),
            Err(_) => Regime::plain(RegimeTag::Unclassified),
        };
    }
    if s.is_s_only() {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut points: Vec<f64> = (0..=S_GRID).map(|k| k as f64 / S_GRID as f64).collect();
        if let Kind::Tabulated(t) = &s.kind {
            points.extend((1..=t.len()).map(|k| k as f64 / t.len() as f64));
        }
        for p in points {
            match s.m_at(p) {
                Ok(v) => {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                Err(_) => return Regime::plain(RegimeTag::Unclassified),
            }
        }
        return if hi == 0.0 {
            Regime::constant(Lambda::Zero)
        } else if lo > 0.0 && hi.is_finite() {
            Regime::plain(RegimeTag::ContinuousPositive)
        } else {
            Regime::plain(RegimeTag::Unclassified)
        };
    }
    if probe_sizes.is_empty() || !probe_sizes.windows(2).all(|w| w[1] > w[0]) {
        return Regime::plain(RegimeTag::Unclassified);
    }
    let mut mins = Vec::with_capacity(probe_sizes.len());
    let mut maxs = Vec::with_capacity(probe_sizes.len());
    for &n in probe_sizes {
        match min_max(s, n) {
            Ok((lo, hi)) => {
                mins.push(lo);
                maxs.push(hi);
            }
            Err(_) => return Regime::plain(RegimeTag::Unclassified),
        }
    }
    let first_min = mins[0];
    let last_min = *mins.last().unwrap();
    let first_max = maxs[0];
    let last_max = *maxs.last().unwrap();
    let diverging = mins.len() >= 2 && strictly_increasing(&mins) && first_min > 0.0 && last_min >= TREND_FACTOR * first_min;
    let max_rev: Vec<f64> = maxs.iter().rev().copied().collect();
    let vanishing = maxs.len() >= 2 && strictly_increasing(&max_rev) && first_max >= TREND_FACTOR * last_max;
    match (diverging, vanishing) {
        (true, false) => Regime::plain(RegimeTag::Diverging),
        (false, true) => Regime::plain(RegimeTag::Vanishing),
        _ => Regime::plain(RegimeTag::Unclassified),
    }
}

/// (1/n) Σ g(m(i/n)), compensated.
pub fn riemann_mean<G>(s: &Schedule, n: u64, mut g: G) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    if n == 0 {
        return Err(Error::domain("riemann_mean", "n must be >= 1"));
    }
    if s.constant_value().is_some() {
        // one summand, returned exactly
        return g(s.m(1, n)?);
    }
    let mut acc = NeumaierSum::new();
    for i in 1..=n {
        acc.add(g(s.m(i, n)?)?);
    }
    Ok(acc.total() / n as f64)
}

/// A rate sum together with the number of summands that underflowed to 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSum {
    pub value: f64,
    pub underflowed: u64,
}

fn positive_m(m: f64, op: &'static str) -> Result<f64> {
    if m > 0.0 {
        Ok(m)
    } else {
        Err(Error::domain(op, "rate is undefined where m(i/n) = 0"))
    }
}

/// (1/n) Σ exp(−m/2)/√m.
pub fn rate_thm2(s: &Schedule, n: u64) -> Result<f64> {
    riemann_mean(s, n, |m| {
        let m = positive_m(m, "rate_thm2")?;
        Ok((-0.5 * m).exp() / m.sqrt())
    })
}

/// Exponents below this evaluate their factor as exact 0.
pub const UNDERFLOW_EXPONENT: f64 = -745.0;

/// (1/n) Σ m^{3/2} exp(−(log(min/max))²/(8m)) for x ≠ y, (1/n) Σ √m for x = y.
pub fn rate_thm3_detailed(s: &Schedule, n: u64, x: f64, y: f64) -> Result<RateSum> {
    if !(x < 0.0 && y < 0.0) {
        return Err(Error::domain("rate_thm3", format!("x and y must be negative, got ({x}, {y})")));
    }
    let mut underflowed = 0;
    let value = if x == y {
        riemann_mean(s, n, |m| Ok(positive_m(m, "rate_thm3")?.sqrt()))?
    } else {
        let l = (x.min(y) / x.max(y)).ln();
        riemann_mean(s, n, |m| {
            let m = positive_m(m, "rate_thm3")?;
            let e = -l * l / (8.0 * m);
            if e < UNDERFLOW_EXPONENT {
                underflowed += 1;
                return Ok(0.0);
            }
            Ok(m * m.sqrt() * e.exp())
        })?
    };
    if underflowed > 0 && s.constant_value().is_some() {
        // the constant shortcut evaluates a single summand for all n
        underflowed = n;
    }
    if underflowed > 0 {
        log::warn!("rate_thm3: {underflowed} of {n} summands underflowed to 0");
    }
    Ok(RateSum { value, underflowed })
}

pub fn rate_thm3(s: &Schedule, n: u64, x: f64, y: f64) -> Result<f64> {
    Ok(rate_thm3_detailed(s, n, x, y)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_examples() {
        let n = 1_000u64;
        let s = Schedule::independence();
        for i in [1, 500, 1000] {
            assert_eq!(rho_at(&s, i, n).unwrap().rho(), 0.0);
        }
        let n = 10f64.exp().round() as u64;
        let r = rho_at(&Schedule::example21(), n, n).unwrap();
        assert!((r.rho() - (1.0 - 2.0 / (n as f64).ln())).abs() < 1e-15);
        assert!((r.rho() - 0.8).abs() < 1e-5);
        let r = rho_at(&Schedule::constant(0.0).unwrap(), 3, 10).unwrap();
        assert!(r.clamped);
        assert_eq!(r.rho(), 1.0 - f64::EPSILON);
    }

    #[test]
    fn rho_rejects_out_of_range() {
        let s = Schedule::constant(20.0).unwrap();
        assert!(rho_at(&s, 1, 100).is_err()); // 2 log 100 = 9.2
        assert!(rho_at(&s, 0, 100).is_err());
        assert!(rho_at(&s, 101, 100).is_err());
    }

    #[test]
    fn example22_pieces() {
        let n = 10_000u64;
        let s = Schedule::example22();
        assert!((s.m(100, n).unwrap() - 4.0 * lll(100.0)).abs() < 1e-15);
        assert!((s.m(101, n).unwrap() - 2.0 * lll(1e4)).abs() < 1e-15);
        assert!((s.m(1, n).unwrap() - 4.0 * lll(1e4)).abs() < 1e-15);
        assert!(s.m(1, 229).is_err());
        assert!(s.m(15, 230).unwrap() > 0.0);
    }

    #[test]
    fn example23_pieces() {
        let n = 1_000_000u64;
        let s = Schedule::example23();
        let l3 = lll(1e6);
        assert_eq!(s.m(1, n).unwrap(), s.m(3, n).unwrap());
        assert!((s.m(13, n).unwrap() - 13f64.ln().ln().sqrt() / l3).abs() < 1e-15);
        assert!((s.m(14, n).unwrap() - (1.0 / l3).min(14f64.ln().ln().sqrt() / l3)).abs() < 1e-15);
        assert!(s.m(1, 15).is_err());
    }

    #[test]
    fn classify_examples() {
        let p = DEFAULT_PROBES;
        assert_eq!(classify_regime(&Schedule::example21(), &p).tag, RegimeTag::ContinuousPositive);
        assert_eq!(classify_regime(&Schedule::example22(), &p).tag, RegimeTag::Diverging);
        assert_eq!(classify_regime(&Schedule::example23(), &p).tag, RegimeTag::Vanishing);
        let c = classify_regime(&Schedule::constant(1.5).unwrap(), &p);
        assert_eq!(c, Regime { tag: RegimeTag::ContinuousPositive, lambda: Some(Lambda::Finite(1.5)) });
        let z = classify_regime(&Schedule::constant(0.0).unwrap(), &p);
        assert_eq!(z, Regime { tag: RegimeTag::Vanishing, lambda: Some(Lambda::Zero) });
        let ind = classify_regime(&Schedule::independence(), &p);
        assert_eq!(ind, Regime { tag: RegimeTag::Diverging, lambda: Some(Lambda::Infinite) });
    }

    #[test]
    fn classify_ambiguous_is_unclassified() {
        let p = DEFAULT_PROBES;
        // touches zero at s = 0 but is not identically zero
        assert_eq!(classify_regime(&Schedule::expression("s").unwrap(), &p).tag, RegimeTag::Unclassified);
        // depends on n but trends too weakly
        let weak = Schedule::expression("1 + 0.01 * loglog(n)").unwrap();
        assert_eq!(classify_regime(&weak, &p).tag, RegimeTag::Unclassified);
        let div = Schedule::expression("loglog(n)").unwrap();
        assert_eq!(classify_regime(&div, &p).tag, RegimeTag::Diverging);
    }

    #[test]
    fn tabulated_step_function() {
        let s = Schedule::tabulated(vec![1.0, 4.0]).unwrap();
        assert_eq!(s.m(1, 2).unwrap(), 1.0);
        assert_eq!(s.m(2, 2).unwrap(), 4.0);
        assert_eq!(s.m_at(0.0).unwrap(), 1.0);
        assert_eq!(s.m_at(0.5).unwrap(), 1.0);
        assert_eq!(s.m_at(0.51).unwrap(), 4.0);
        assert_eq!(s.knots(), vec![0.5]);
        assert!(Schedule::tabulated(vec![]).is_err());
        assert!(Schedule::tabulated(vec![1.0, -1.0]).is_err());
        assert_eq!(parse_table("1\n\n# c\n 2.5 # x\n").unwrap(), vec![1.0, 2.5]);
        assert!(parse_table("1\nfoo\n").is_err());
    }

    #[test]
    fn monotone_declarations_are_checked() {
        assert!(Schedule::example21().with_monotone(Monotone::Increasing).is_ok());
        assert!(Schedule::example21().with_monotone(Monotone::Decreasing).is_err());
        let t = Schedule::tabulated(vec![3.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(t.clone().with_monotone(Monotone::Decreasing).is_ok());
        assert!(t.with_monotone(Monotone::Increasing).is_err());
    }

    #[test]
    fn rate_examples() {
        let c2 = Schedule::constant(2.0).unwrap();
        let want = (-1.0f64).exp() / 2f64.sqrt();
        assert_eq!(rate_thm2(&c2, 17).unwrap(), want);
        let t = Schedule::tabulated(vec![1.0, 4.0]).unwrap();
        let want = ((-0.5f64).exp() + (-2.0f64).exp() / 2.0) / 2.0;
        assert!((rate_thm2(&t, 2).unwrap() - want).abs() < 1e-16);
        assert!(rate_thm2(&Schedule::constant(0.0).unwrap(), 3).is_err());

        let c = Schedule::constant(0.04).unwrap();
        assert!((rate_thm3(&c, 9, -1.0, -1.0).unwrap() - 0.2).abs() < 1e-16);
        let m = 0.3f64;
        let c = Schedule::constant(m).unwrap();
        let l2 = 2f64.ln();
        let want = m.powf(1.5) * (-l2 * l2 / (8.0 * m)).exp();
        assert!((rate_thm3(&c, 5, -2.0, -1.0).unwrap() - want).abs() < 1e-16);
        let t = Schedule::tabulated(vec![0.1, 0.2]).unwrap();
        let f = |m: f64| m.powf(1.5) * (-l2 * l2 / (8.0 * m)).exp();
        assert!((rate_thm3(&t, 2, -2.0, -1.0).unwrap() - (f(0.1) + f(0.2)) / 2.0).abs() < 1e-16);
    }

    #[test]
    fn rate_underflow_is_flagged() {
        let c = Schedule::constant(1e-5).unwrap();
        let r = rate_thm3_detailed(&c, 4, -5.0, -1.0).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.underflowed, 4);
    }

    #[test]
    fn riemann_mean_examples() {
        let s = Schedule::example21();
        assert_eq!(riemann_mean(&s, 37, |_| Ok(1.0)).unwrap(), 1.0);
        let v = riemann_mean(&s, 10_000, Ok).unwrap();
        assert!((v - 1.5).abs() < 2e-4);
        let e8 = (riemann_mean(&s, 1 << 8, Ok).unwrap() - 1.5).abs();
        let e16 = (riemann_mean(&s, 1 << 16, Ok).unwrap() - 1.5).abs();
        let ratio = e8 / e16;
        assert!((128.0..=512.0).contains(&ratio), "{ratio}");
    }
}
