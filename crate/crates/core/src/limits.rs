//! First-order limit laws of the normalized maxima.

use crate::copula::TailArg;
use crate::error::{Error, Result};
use crate::gauss::cdf;
use crate::quad::Quadrature;
use crate::schedule::{classify_regime, Lambda, Regime, RegimeTag, Schedule, DEFAULT_PROBES};

/// Default absolute tolerance of the s-integrals.
pub const DEFAULT_LIMIT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitValue {
    pub g: f64,
    pub log_g: f64,
    pub regime: Regime,
    /// ∫Φ(√m + log(x/y)/(2√m)) ds and ∫Φ(√m + log(y/x)/(2√m)) ds.
    pub integral_terms: Option<(f64, f64)>,
}

/// Hüsler–Reiss weights (Φ(√λ + log(x/y)/(2√λ)), Φ(√λ + log(y/x)/(2√λ))).
fn hr_weights(m: f64, log_ratio: f64) -> (f64, f64) {
    let r = m.sqrt();
    let d = log_ratio / (2.0 * r);
    (cdf(r + d), cdf(r - d))
}

/// log of the Hüsler–Reiss limit.
pub fn hr_log_limit(t: &TailArg, lambda: Lambda) -> f64 {
    match lambda {
        Lambda::Zero => t.x.min(t.y),
        Lambda::Infinite => t.x + t.y,
        Lambda::Finite(l) => {
            let (w1, w2) = hr_weights(l, t.log_ratio());
            t.x * w1 + t.y * w2
        }
    }
}

/// The bivariate Hüsler–Reiss limit for (1 − ρ_n) log n → λ.
pub fn hr_limit(t: &TailArg, lambda: Lambda) -> f64 {
    hr_log_limit(t, lambda).exp()
}

/// G(x, y) for the regime returned by [`classify_regime`].
pub fn g_limit(t: &TailArg, s: &Schedule, tol: f64) -> Result<LimitValue> {
    g_limit_in(t, s, classify_regime(s, &DEFAULT_PROBES), tol)
}

/// G(x, y) with the regime supplied by the caller.
pub fn g_limit_in(t: &TailArg, s: &Schedule, regime: Regime, tol: f64) -> Result<LimitValue> {
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(Error::domain("g_limit", format!("tol = {tol} outside (0, 1e-6]")));
    }
    let log_g;
    let mut integral_terms = None;
    match regime.tag {
        RegimeTag::Diverging => log_g = t.x + t.y,
        RegimeTag::Vanishing => log_g = t.x.min(t.y),
        RegimeTag::Unclassified => {
            return Err(Error::Classification(format!("schedule {s} has no recognised regime")));
        }
        RegimeTag::ContinuousPositive => {
            let (i1, i2) = limit_integrals(t, s, tol)?;
            log_g = t.x * i1 + t.y * i2;
            integral_terms = Some((i1, i2));
        }
    }
    Ok(LimitValue { g: log_g.exp(), log_g, regime, integral_terms })
}

/// The two s-integrals of the continuous-positive limit.
pub fn limit_integrals(t: &TailArg, s: &Schedule, tol: f64) -> Result<(f64, f64)> {
    if !s.is_s_only() {
        return Err(Error::Classification(format!("schedule {s} depends on n; no limit function m(s)")));
    }
    let lr = t.log_ratio();
    let mut points = vec![0.0];
    points.extend(s.knots());
    points.push(1.0);
    let quad = Quadrature::absolute(tol);
    let weight = |s_: f64, first: bool| -> f64 {
        match s.m_at(s_) {
            Ok(m) if m > 0.0 => {
                let (w1, w2) = hr_weights(m, lr);
                if first {
                    w1
                } else {
                    w2
                }
            }
            _ => f64::NAN,
        }
    };
    let i1 = quad
        .integrate_pieces(|u| weight(u, true), &points)
        .map_err(|e| positive_hint(e, s))?
        .value;
    let i2 = quad
        .integrate_pieces(|u| weight(u, false), &points)
        .map_err(|e| positive_hint(e, s))?
        .value;
    Ok((i1, i2))
}

fn positive_hint(e: Error, s: &Schedule) -> Error {
    match e {
        Error::Numeric { op, detail } => Error::Numeric {
            op,
            detail: format!("{detail} (schedule {s} must satisfy inf m > 0 on [0, 1])"),
        },
        other => other,
    }
}
