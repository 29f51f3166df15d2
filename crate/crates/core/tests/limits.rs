use hrmax::copula::{exact_log_gn, TailArg};
use hrmax::gauss::cdf;
use hrmax::limits::*;
use hrmax::quad::Quadrature;
use hrmax::schedule::{Lambda, Schedule};
use proptest::prelude::*;

const GRID: [f64; 5] = [-0.25, -0.5, -1.0, -2.0, -4.0];

fn tails() -> impl Iterator<Item = TailArg> {
    GRID.iter().flat_map(|&x| GRID.iter().map(move |&y| TailArg::new(x, y).unwrap()))
}

#[test]
fn continuous_in_lambda() {
    for t in tails() {
        for l in [0.01, 0.3, 1.0, 7.0, 50.0] {
            let v = hr_limit(&t, Lambda::Finite(l));
            for d in [-1e-6, 1e-6] {
                assert!((v - hr_limit(&t, Lambda::Finite(l + d))).abs() <= 1e-5);
            }
        }
    }
}

#[test]
fn endpoint_limits() {
    for t in tails() {
        let hi = hr_limit(&t, Lambda::Finite(1e4));
        assert!((hi - (t.x + t.y).exp()).abs() <= 1e-6);
        let lo = hr_limit(&t, Lambda::Finite(1e-6));
        assert!((lo - t.x.min(t.y).exp()).abs() <= 1e-3);
        assert_eq!(hr_limit(&t, Lambda::Infinite), (t.x + t.y).exp());
        assert_eq!(hr_limit(&t, Lambda::Zero), t.x.min(t.y).exp());
    }
}

#[test]
fn exchange_symmetry() {
    let schedules = [Schedule::example21(), Schedule::constant(0.8).unwrap(), Schedule::expression("0.5 + 2*s").unwrap()];
    for t in tails() {
        for l in [0.2, 1.0, 5.0] {
            assert_eq!(hr_limit(&t, Lambda::Finite(l)), hr_limit(&t.swapped(), Lambda::Finite(l)));
        }
        for s in &schedules {
            let a = g_limit(&t, s, 1e-12).unwrap().g;
            let b = g_limit(&t.swapped(), s, 1e-12).unwrap().g;
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn stored_integrals_in_unit_interval() {
    for t in tails() {
        let g = g_limit(&t, &Schedule::example21(), DEFAULT_LIMIT_TOL).unwrap();
        let (i1, i2) = g.integral_terms.unwrap();
        assert!((0.0..=1.0).contains(&i1) && (0.0..=1.0).contains(&i2));
        assert!((g.log_g - (t.x * i1 + t.y * i2)).abs() < 1e-15);
        assert!(g.g > 0.0 && g.g <= 1.0);
    }
}

#[test]
fn symmetric_example21_value() {
    let q = Quadrature::absolute(1e-14);
    let i = q.integrate(|s| cdf((s + 1.0).sqrt()), 0.0, 1.0).unwrap().value;
    let g = g_limit(&TailArg::new(-1.0, -1.0).unwrap(), &Schedule::example21(), 1e-12).unwrap();
    assert!((g.g - (-2.0 * i).exp()).abs() < 1e-12);
}

#[test]
fn exact_distribution_approaches_limit() {
    let s = Schedule::example21();
    let t = TailArg::new(-1.0, -1.0).unwrap();
    let g = g_limit(&t, &s, 1e-12).unwrap().g;
    // at n = 100 finite-n terms of both signs nearly cancel; the decay starts at 10³
    let d100 = (exact_log_gn(&t, 100, &s).unwrap().gn - g).abs();
    assert!(d100 < 5e-3);
    let mut prev = f64::INFINITY;
    for n in [1_000u64, 10_000, 100_000, 1_000_000] {
        let d = (exact_log_gn(&t, n, &s).unwrap().gn - g).abs();
        assert!(d < prev, "n = {n}: {d} not below {prev}");
        prev = d;
    }
}

fn schedule_strategy() -> impl Strategy<Value = Schedule> {
    prop_oneof![
        (0.05f64..6.0).prop_map(|l| Schedule::constant(l).unwrap()),
        Just(Schedule::example21()),
        (0.1f64..2.0, 0.0f64..3.0).prop_map(|(a, b)| Schedule::expression(&format!("{a} + {b}*s")).unwrap()),
        prop::collection::vec(0.1f64..5.0, 1..6).prop_map(|v| Schedule::tabulated(v).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // x I₁ + y I₂ = x + ∫₀¹∫₀ʸ Φ(√m + log(t/x)/(2√m)) dt ds
    #[test]
    fn integration_by_parts_identity(x in -4.0f64..-0.1, y in -4.0f64..-0.1, s in schedule_strategy()) {
        let t = TailArg::new(x, y).unwrap();
        let (i1, i2) = limit_integrals(&t, &s, 1e-12).unwrap();
        let lhs = x * i1 + y * i2;
        let inner = |m: f64| {
            let r = m.sqrt();
            let f = |u: f64| cdf(r + ((-u).ln() - (-x).ln()) / (2.0 * r));
            -Quadrature::absolute(1e-12).integrate(f, y, 0.0).unwrap().value
        };
        let mut pts = vec![0.0];
        pts.extend(s.knots());
        pts.push(1.0);
        let outer = Quadrature::absolute(1e-11)
            .integrate_pieces(|u| inner(s.m_at(u).unwrap()), &pts)
            .unwrap()
            .value;
        prop_assert!((lhs - (x + outer)).abs() < 1e-9, "{} vs {}", lhs, x + outer);
    }
}
