//! Second-order corrections: the I_k integrals, the three theorem
//! approximants, and fixed-m per-index tail factors.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::copula::TailArg;
use crate::error::{Error, Result};
use crate::gauss::{cdf, density, upper_quantile, upper_tail, SQRT_2PI};
use crate::limits::g_limit_in;
use crate::quad::Quadrature;
pub use crate::quad::adaptive_integrate;
use crate::schedule::{
    classify_regime, correlation, rate_thm2, rate_thm3_detailed, Regime, RegimeTag, Schedule, DEFAULT_PROBES,
    UNDERFLOW_EXPONENT,
};

/// Arguments of I_k(x, y; m) at sample size n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkArgs {
    pub k: u8,
    pub x: f64,
    pub y: f64,
    pub m: f64,
    pub n: u64,
}

impl IkArgs {
    pub fn new(k: u8, x: f64, y: f64, m: f64, n: u64) -> Result<Self> {
        if k > 3 {
            return Err(Error::domain("IkArgs", format!("k = {k} not in 0..=3")));
        }
        if !(x < 0.0 && y < 0.0 && x.is_finite() && y.is_finite()) {
            return Err(Error::domain("IkArgs", format!("need x, y < 0, got ({x}, {y})")));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::domain("IkArgs", format!("need m > 0, got {m}")));
        }
        if n < 3 {
            return Err(Error::domain("IkArgs", format!("need n >= 3, got {n}")));
        }
        Ok(IkArgs { k, x, y, m, n })
    }

    /// Upper integration limit −1/log n.
    pub fn upper(&self) -> f64 {
        -1.0 / (self.n as f64).ln()
    }
}

/// φ(√m + log(t/x)/(2√m)).
fn hr_kernel(t: f64, x: f64, m: f64) -> f64 {
    let r = m.sqrt();
    density(r + ((-t).ln() - (-x).ln()) / (2.0 * r))
}

/// Closed forms of I₀..I₃.
pub fn ik_closed_form(a: &IkArgs) -> Result<f64> {
    let upper = a.upper();
    if a.y > upper {
        return Err(Error::domain("ik_closed_form", format!("y = {} above -1/log n = {upper}", a.y)));
    }
    let (x, m) = (a.x, a.m);
    let r = m.sqrt();
    let ln_n = (a.n as f64).ln();
    let ll = ln_n.ln();
    let lx = (-x).ln();
    let ly = (-a.y).ln();
    // upper endpoint argument log(−x log n), lower endpoint log(x/y)
    let z1 = r + (lx + ll) / (2.0 * r);
    let z2 = r + (lx - ly) / (2.0 * r);
    let d = if z1 > 0.0 { upper_tail(z2) - upper_tail(z1) } else { cdf(z1) - cdf(z2) };
    let (p1, p2) = (density(z1), density(z2));
    let m2 = m * m;
    let m3 = m2 * m;
    let v = match a.k {
        0 => -2.0 * x * r * d,
        1 => 4.0 * x * m * (p1 - p2) + 2.0 * x * r * (lx + 2.0 * m) * d,
        2 => {
            -2.0 * x * r * (4.0 * m2 + 4.0 * m + 4.0 * m * lx + lx * lx) * d
                - 4.0 * x * (2.0 * m2 + m * (lx - ll)) * p1
                + 4.0 * x * (2.0 * m2 + m * (lx + ly)) * p2
        }
        _ => {
            let poly = 8.0 * m3 + (24.0 + 12.0 * lx) * m2 + (6.0 * lx * lx + 12.0 * lx) * m + lx * lx * lx;
            let c1 = 8.0 * m3 + m2 * (8.0 * lx - 4.0 * ll + 16.0) + 2.0 * m * (lx * lx - ll * lx + ll * ll);
            let c2 = 8.0 * m3 + m2 * (8.0 * lx + 4.0 * ly + 16.0) + 2.0 * m * (lx * lx + ly * lx + ly * ly);
            2.0 * x * r * poly * d + 2.0 * x * c1 * p1 - 2.0 * x * c2 * p2
        }
    };
    Ok(v)
}

/// I_k by adaptive quadrature of its defining integral.
pub fn ik_quadrature(a: &IkArgs, tol: f64) -> Result<f64> {
    let upper = a.upper();
    if a.y >= upper {
        return Ok(0.0);
    }
    let k = a.k as i32;
    let f = |t: f64| (-(-t).ln()).powi(k) * hr_kernel(t, a.x, a.m);
    let mut points = vec![a.y];
    // peak of the kernel and the sign change of −log(−t)
    for p in [a.x * (-2.0 * a.m).exp(), -1.0] {
        if p > a.y && p < upper {
            points.push(p);
        }
    }
    points.push(upper);
    points.sort_by(f64::total_cmp);
    Ok(Quadrature::absolute(tol).integrate_pieces(f, &points)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    T21,
    T22,
    T23Neq,
    T23Eq,
}

/// A second-order approximation G + scale·constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrectionTerm {
    pub theorem: Theorem,
    pub scale: f64,
    pub constant: f64,
    pub limit: f64,
    pub approx_gn: f64,
    /// Rate summands evaluated as 0 because their exponent was below −745.
    pub underflowed: u64,
}

fn require_continuous_positive(s: &Schedule) -> Result<Regime> {
    let regime = classify_regime(s, &DEFAULT_PROBES);
    if regime.tag != RegimeTag::ContinuousPositive {
        return Err(Error::Classification(format!(
            "schedule {s} is {:?}; the log log n / log n expansion needs a continuous positive m",
            regime.tag
        )));
    }
    Ok(regime)
}

/// √m·exp(−(m − log(xy) + (log(x/y))²/(4m))/2).
pub fn thm1_integrand(t: &TailArg, m: f64) -> f64 {
    let lr = t.log_ratio();
    m.sqrt() * (-(m - t.log_product() + lr * lr / (4.0 * m)) / 2.0).exp()
}

/// G(x, y)/(2√(2π)) · ∫₀¹ √m(s)·exp(−(m(s) − log(xy) + (log(x/y))²/(4m(s)))/2) ds.
pub fn thm1_coefficient(t: &TailArg, s: &Schedule, tol: f64) -> Result<f64> {
    let regime = require_continuous_positive(s)?;
    let g = g_limit_in(t, s, regime, tol)?.g;
    let mut points = vec![0.0];
    points.extend(s.knots());
    points.push(1.0);
    let f = |u: f64| match s.m_at(u) {
        Ok(m) if m > 0.0 => thm1_integrand(t, m),
        _ => f64::NAN,
    };
    let integral = Quadrature::absolute(tol).integrate_pieces(f, &points)?.value;
    Ok(g * integral / (2.0 * SQRT_2PI))
}

/// The coefficient for m(s) = s + 1 after u = √(s + 1):
/// ((−x)G/√(2π)) ∫₁^{√2} u²·exp(−(u + log(x/y)/(2u))²/2) du.
pub fn thm1_coefficient_example21(t: &TailArg, g: f64, tol: f64) -> Result<f64> {
    let lr = t.log_ratio();
    let f = |u: f64| {
        let w = u + lr / (2.0 * u);
        u * u * (-0.5 * w * w).exp()
    };
    let integral = adaptive_integrate(f, 1.0, 2f64.sqrt(), tol)?;
    Ok(-t.x * g * integral / SQRT_2PI)
}

/// G_n ≈ G + (log log n/log n)·coefficient.
pub fn thm1_approx(t: &TailArg, n: u64, s: &Schedule, tol: f64) -> Result<CorrectionTerm> {
    if n < 16 {
        return Err(Error::domain("thm1_approx", format!("need n >= 16 so that log log n > 1, got {n}")));
    }
    let regime = require_continuous_positive(s)?;
    let limit = g_limit_in(t, s, regime, tol)?.g;
    let constant = thm1_coefficient(t, s, tol)?;
    let ln_n = (n as f64).ln();
    let scale = ln_n.ln() / ln_n;
    Ok(CorrectionTerm {
        theorem: Theorem::T21,
        scale,
        constant,
        limit,
        approx_gn: limit + scale * constant,
        underflowed: 0,
    })
}

/// √(2/π)·√(xy)·e^{x+y}.
pub fn thm2_constant(t: &TailArg) -> f64 {
    (2.0 / PI).sqrt() * (t.x * t.y).sqrt() * (t.x + t.y).exp()
}

/// G_n ≈ e^{x+y} + rate·√(2/π)√(xy)e^{x+y}. The regime is not checked.
pub fn thm2_approx(t: &TailArg, n: u64, s: &Schedule) -> Result<CorrectionTerm> {
    let scale = rate_thm2(s, n)?;
    let constant = thm2_constant(t);
    let limit = (t.x + t.y).exp();
    Ok(CorrectionTerm {
        theorem: Theorem::T22,
        scale,
        constant,
        limit,
        approx_gn: limit + scale * constant,
        underflowed: 0,
    })
}

/// −8√(xy)e^{min}/(√(2π) log(min/max)) for x ≠ y, −(2x/π)eˣ for x = y.
pub fn thm3_constant(t: &TailArg) -> f64 {
    if t.x == t.y {
        -2.0 * t.x / PI * t.x.exp()
    } else {
        let (lo, hi) = (t.x.min(t.y), t.x.max(t.y));
        -8.0 * (t.x * t.y).sqrt() * lo.exp() / (SQRT_2PI * (lo / hi).ln())
    }
}

/// G_n ≈ e^{min(x, y)} + rate·constant. The regime is not checked; the
/// branch is chosen by exact equality of x and y.
pub fn thm3_approx(t: &TailArg, n: u64, s: &Schedule) -> Result<CorrectionTerm> {
    let rate = rate_thm3_detailed(s, n, t.x, t.y)?;
    let constant = thm3_constant(t);
    let limit = t.x.min(t.y).exp();
    Ok(CorrectionTerm {
        theorem: if t.x == t.y { Theorem::T23Eq } else { Theorem::T23Neq },
        scale: rate.value,
        constant,
        limit,
        approx_gn: limit + rate.value * constant,
        underflowed: rate.underflowed,
    })
}

/// √(2/π)·√(xy)·e^{−m/2}/√m.
pub fn tail_factor_thm2(t: &TailArg, m: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::domain("tail_factor_thm2", format!("need m > 0, got {m}")));
    }
    Ok((2.0 / PI).sqrt() * (t.x * t.y).sqrt() * (-0.5 * m).exp() / m.sqrt())
}

/// 8·m^{3/2}·√(xy)·exp(−(log(min/max))²/(8m))/(√(2π)·log(min/max)).
pub fn tail_factor_thm3(t: &TailArg, m: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::domain("tail_factor_thm3", format!("need m > 0, got {m}")));
    }
    if t.x == t.y {
        return Err(Error::domain("tail_factor_thm3", "x = y; the factor degenerates"));
    }
    let l = (t.x.min(t.y) / t.x.max(t.y)).ln();
    let e = -l * l / (8.0 * m);
    if e < UNDERFLOW_EXPONENT {
        return Ok(0.0);
    }
    Ok(8.0 * m * m.sqrt() * (t.x * t.y).sqrt() * e.exp() / (SQRT_2PI * l))
}

/// ∫_y^0 (1 − Φ(√m + log(t/x)/(2√m))) dt, the per-index joint exceedance
/// (scaled by n) with the argument replaced by its fixed-m limit.
///
/// Integrated in w = log(−t); the integrand is e^w times a tail that tends
/// to 1 as w → −∞, so the range below w = −745 contributes nothing.
pub fn fixed_m_exceedance(t: &TailArg, m: f64, rel_tol: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::domain("fixed_m_exceedance", format!("need m > 0, got {m}")));
    }
    let r = m.sqrt();
    let lx = (-t.x).ln();
    let hi = (-t.y).ln();
    let lo = UNDERFLOW_EXPONENT;
    let f = |w: f64| w.exp() * upper_tail(r + (w - lx) / (2.0 * r));
    let mut points = vec![lo];
    let centre = lx - 2.0 * m;
    for p in [centre - 8.0 * r, centre, centre + 8.0 * r, lx] {
        if p > lo && p < hi {
            points.push(p);
        }
    }
    points.push(hi);
    points.sort_by(f64::total_cmp);
    Ok(Quadrature::relative(rel_tol).integrate_pieces(f, &points)?.value)
}

/// ∫_{max(x,y)}^{−1/log n} Φ((Φ⁻(1 + min/n) − ρΦ⁻(1 + t/n))/√(1 − ρ²)) dt
/// at ρ = 1 − m/log n, with exact quantiles.
pub fn vanishing_exceedance(t: &TailArg, m: f64, n: u64, rel_tol: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::domain("vanishing_exceedance", format!("need n >= 3, got {n}")));
    }
    let nf = n as f64;
    let (lo, hi) = (t.x.min(t.y), t.x.max(t.y));
    let upper = -1.0 / nf.ln();
    if hi >= upper {
        return Ok(0.0);
    }
    let c = correlation(m, nf.ln())?.one_minus_rho;
    let sigma = (c * (2.0 - c)).sqrt();
    let a = upper_quantile(-lo / nf);
    let f = |u: f64| {
        let b = upper_quantile(-u / nf);
        cdf(((a - b) + c * b) / sigma)
    };
    Ok(Quadrature::relative(rel_tol).integrate(f, hi, upper)?.value)
}
