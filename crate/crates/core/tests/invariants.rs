use hkquad::gauge::is_fine_division;
use hkquad::integrate::{henstock_residual, integrate, riemann_sum, IntegrateConfig, IntervalIntegrand, PointIntegrand};
use hkquad::{cousin_bisect, validate_division, Brick, BuilderConfig, Gauge, TagRule};
use proptest::prelude::*;

fn brick() -> impl Strategy<Value = Brick> {
    prop::collection::vec((-5.0f64..5.0, 0.1f64..3.0), 1..=3)
        .prop_map(|b| Brick::from_bounds(&b.iter().map(|&(lo, w)| (lo, lo + w)).collect::<Vec<_>>()).unwrap())
}

fn rule() -> impl Strategy<Value = TagRule> {
    prop_oneof![Just(TagRule::Center), Just(TagRule::Corner), Just(TagRule::SplitCenter)]
}

fn cubic(c: [f64; 4]) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
    move |x| ((c[3] * x + c[2]) * x + c[1]) * x + c[0]
}

fn cubic_primitive(c: [f64; 4], a: f64, b: f64) -> f64 {
    let p = |x: f64| x * (c[0] + x * (c[1] / 2.0 + x * (c[2] / 3.0 + x * c[3] / 4.0)));
    p(b) - p(a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn built_divisions_are_valid_fine_and_cover_the_volume(d in brick(), scale in 0.15f64..1.0, r in rule(), seed in any::<u64>()) {
        let g = Gauge::new(d.clone(), move |p| scale * (1.0 + 0.5 * p[0].sin()));
        let div = cousin_bisect(&d, &g, &BuilderConfig::with_rule(r).seeded(seed)).unwrap();
        prop_assert!(validate_division(&div).is_ok());
        prop_assert!(is_fine_division(&div, &g).unwrap());
        let ones = riemann_sum(&IntervalIntegrand::new(|_, b| b.volume()), &div).unwrap();
        prop_assert!((ones - d.volume()).abs() <= 1e-12 * d.volume().max(1.0) * div.len() as f64);
    }

    #[test]
    fn min_combined_gauge_is_below_each_part(d in brick(), a in 0.01f64..1.0, b in 0.01f64..1.0, t in 0.0f64..1.0) {
        let g1 = Gauge::constant(d.clone(), a).unwrap();
        let g2 = Gauge::new(d.clone(), move |p| b * (1.0 + p.iter().map(|x| x.abs()).sum::<f64>()));
        let m = Gauge::min_combine(&[g1.clone(), g2.clone()]).unwrap();
        let p: Vec<f64> = d.lower().coords().iter().zip(d.upper().coords()).map(|(l, u)| l + t * (u - l)).collect();
        let v = m.eval(&p).unwrap();
        prop_assert!(v <= g1.eval(&p).unwrap() && v <= g2.eval(&p).unwrap());
        prop_assert!(v == g1.eval(&p).unwrap() || v == g2.eval(&p).unwrap());
    }

    #[test]
    fn constant_integrands_have_no_residual(d in brick(), c in -10.0f64..10.0) {
        let g = Gauge::constant(d.clone(), 0.3).unwrap();
        let div = cousin_bisect(&d, &g, &BuilderConfig::default()).unwrap();
        let (signed, abs) = henstock_residual(&PointIntegrand::new(move |_| c), |b: &Brick| c * b.volume(), &div);
        prop_assert!(signed.abs() <= 1e-12 && abs <= 1e-12 * div.len() as f64 * c.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cubics_integrate_exactly_and_additively(c in prop::array::uniform4(-3.0f64..3.0), a in -2.0f64..0.0, w in 0.5f64..3.0, s in 0.05f64..0.95) {
        let tol = 1e-8;
        let b = a + w;
        let mid = a + s * w;
        let cfg = IntegrateConfig::default();
        let run = |lo: f64, hi: f64| integrate(&PointIntegrand::of_x(cubic(c)), &Brick::interval(lo, hi).unwrap(), tol, &cfg).unwrap();
        let (whole, left, right) = (run(a, b), run(a, mid), run(mid, b));
        prop_assert!(whole.converged());
        prop_assert!((whole.value - cubic_primitive(c, a, b)).abs() <= tol * 4.0);
        prop_assert!((whole.value - left.value - right.value).abs() <= whole.err_estimate + left.err_estimate + right.err_estimate);
    }

    #[test]
    fn integrals_are_linear(c in prop::array::uniform4(-3.0f64..3.0), alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
        let tol = 1e-8;
        let d = Brick::interval(0.0, 1.0).unwrap();
        let cfg = IntegrateConfig::default();
        let f = cubic(c);
        let run = |g: PointIntegrand| integrate(&g, &d, tol, &cfg).unwrap();
        let u = run(PointIntegrand::of_x(cubic(c)));
        let v = run(PointIntegrand::of_x(|x: f64| (3.0 * x).sin()));
        let both = run(PointIntegrand::of_x(move |x| alpha * f(x) + beta * (3.0 * x).sin()));
        let bound = both.err_estimate + alpha.abs() * u.err_estimate + beta.abs() * v.err_estimate;
        prop_assert!((both.value - alpha * u.value - beta * v.value).abs() <= bound);
    }

    #[test]
    fn seeds_agree_within_their_estimates(s1 in any::<u64>(), s2 in any::<u64>(), k in 1.0f64..8.0) {
        let d = Brick::unit(2);
        let f = PointIntegrand::new(move |p| (k * p[0]).cos() * (p[1] + 0.5).sqrt());
        let r1 = integrate(&f, &d, 1e-6, &IntegrateConfig::gauss().seeded(s1)).unwrap();
        let r2 = integrate(&f, &d, 1e-6, &IntegrateConfig::gauss().seeded(s2)).unwrap();
        prop_assert!((r1.value - r2.value).abs() <= r1.err_estimate + r2.err_estimate);
    }

    #[test]
    fn pointwise_order_survives_integration(c in prop::array::uniform4(-3.0f64..3.0), bump in 0.0f64..1.0) {
        let d = Brick::interval(-1.0, 1.0).unwrap();
        let cfg = IntegrateConfig::default();
        let (f, g) = (cubic(c), cubic(c));
        let lo = integrate(&PointIntegrand::of_x(f), &d, 1e-8, &cfg).unwrap();
        let hi = integrate(&PointIntegrand::of_x(move |x| g(x) + bump * x * x), &d, 1e-8, &cfg).unwrap();
        prop_assert!(lo.value <= hi.value + lo.err_estimate + hi.err_estimate);
    }
}
