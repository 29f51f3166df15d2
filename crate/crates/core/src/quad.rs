//! Adaptive Gauss–Kronrod quadrature (21-point Kronrod extension of the
//! 10-point Gauss rule) with global error-driven bisection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Hard cap on the number of panels an integration may use.
pub const MAX_PANELS: usize = 1 << 16;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err.abs();
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    // Both rules integrate constants exactly; accumulating deviations from
    // fc keeps that property in floating point.
    let mut dev_g = 0.0;
    let mut dev_k = 0.0;
    let mut res_abs = WGK[10] * fc.abs();
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        let d = (f1 - fc) + (f2 - fc);
        if j % 2 == 1 {
            dev_g += WG[j / 2] * d;
        }
        dev_k += WGK[j] * d;
        res_abs += WGK[j] * (f1.abs() + f2.abs());
    }
    let res_k = 2.0 * fc + dev_k;
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    if !value.is_finite() {
        return Err(Error::numeric(
            "adaptive_integrate",
            format!("non-finite integrand on [{a:e}, {b:e}]"),
        ));
    }
    let hl = half.abs();
    Ok(Panel {
        a,
        b,
        value,
        error: rescale_error((dev_k - dev_g) * half, res_abs * hl, res_asc * hl),
        abs: res_abs * hl,
    })
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Adaptive integrator with absolute and relative tolerances.
///
/// Refinement stops once the summed error estimate is below
/// `max(abs_tol, rel_tol·|I|)` or has reached the rounding floor of the
/// Kronrod rule.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Quadrature {
    pub fn absolute(tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: 0.0,
            max_panels: MAX_PANELS,
        }
    }

    pub fn relative(tol: f64) -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: tol,
            max_panels: MAX_PANELS,
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<QuadResult> {
        self.integrate_pieces(f, &[a, b])
    }

    /// Integrates over `[points[0], points[last]]`, starting with one panel
    /// per consecutive pair. Points must be nondecreasing; repeated points are
    /// skipped.
    pub fn integrate_pieces<F: Fn(f64) -> f64>(&self, f: F, points: &[f64]) -> Result<QuadResult> {
        if points.len() < 2 {
            return Ok(QuadResult {
                value: 0.0,
                error: 0.0,
                panels: 0,
            });
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::domain("adaptive_integrate", "non-finite limit"));
        }
        if points.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::domain(
                "adaptive_integrate",
                format!("limits not ordered: {points:?}"),
            ));
        }
        let mut heap = BinaryHeap::new();
        for w in points.windows(2) {
            if w[1] > w[0] {
                heap.push(gk21(&f, w[0], w[1])?);
            }
        }
        if heap.is_empty() {
            return Ok(QuadResult {
                value: 0.0,
                error: 0.0,
                panels: 0,
            });
        }
        let (mut value, mut error, mut abs) = heap.iter().fold((0.0, 0.0, 0.0), |acc, p| {
            (acc.0 + p.value, acc.1 + p.error, acc.2 + p.abs)
        });
        loop {
            let target = self
                .abs_tol
                .max(self.rel_tol * value.abs())
                .max(100.0 * f64::EPSILON * abs);
            if error <= target {
                // re-sum to rule out drift in the running total
                let exact: f64 = heap.iter().map(|p| p.error).sum();
                if exact <= target {
                    return Ok(finish(heap));
                }
                error = exact;
                continue;
            }
            if heap.len() >= self.max_panels {
                let worst = heap.peek().copied().unwrap();
                return Err(Error::numeric(
                    "adaptive_integrate",
                    format!(
                        "panel cap {} reached: estimate {value:e} ± {error:e}, worst panel [{:e}, {:e}] error {:e}",
                        self.max_panels, worst.a, worst.b, worst.error
                    ),
                ));
            }
            let worst = heap.pop().unwrap();
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // Panel cannot be split further in floating point.
                heap.push(worst);
                return Ok(finish(heap));
            }
            let left = gk21(&f, worst.a, mid)?;
            let right = gk21(&f, mid, worst.b)?;
            value += left.value + right.value - worst.value;
            error = (error + left.error + right.error - worst.error).max(0.0);
            abs += left.abs + right.abs - worst.abs;
            heap.push(left);
            heap.push(right);
        }
    }
}

fn finish(heap: BinaryHeap<Panel>) -> QuadResult {
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = crate::sum::compensated_sum(&panels.iter().map(|p| p.value).collect::<Vec<_>>());
    let error = panels.iter().map(|p| p.error).sum();
    QuadResult {
        value,
        error,
        panels: panels.len(),
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a <= b) {
        return Err(Error::domain(
            "adaptive_integrate",
            format!("need a <= b, got a={a}, b={b}"),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("adaptive_integrate", "tolerance must be positive"));
    }
    Quadrature::absolute(tol).integrate(f, a, b).map(|r| r.value)
}
