use proptest::prelude::*;

use cavlab::averaging::CutoffBump;
use cavlab::curves::Curve;
use cavlab::fit::loglog;
use cavlab::pq_geometry::{
    line_condition, necessary_region_contains, theorem1_region_contains, trapezium_contains, triangle_contains,
    ExponentPair, Omega,
};
use cavlab::sampling::{compensated_sum, lp_norm, GridSpec, SampledField};
use cavlab::sharpness::{fit_exponent, Sample};

fn pair() -> impl Strategy<Value = (i64, i64, i64)> {
    (1i64..=60).prop_flat_map(|n| (0..=n, 0..=n, Just(n)))
}

proptest! {
    #[test]
    fn sufficient_region_is_inside_necessary((a, b, n) in pair(), omega in 1.0f64..8.0) {
        let p = ExponentPair::fractions(a, n, b, n).unwrap();
        let v = necessary_region_contains(&p, Omega::Finite(omega));
        if theorem1_region_contains(&p, Omega::Finite(omega)).unwrap() {
            prop_assert!(v.in_necessary, "{:?}", v);
        }
        prop_assert_eq!(v.in_necessary, v.violated_conditions.is_empty());
    }

    #[test]
    fn line_value_formula((a, b, n) in pair(), omega in 1.0f64..8.0) {
        let p = ExponentPair::fractions(a, n, b, n).unwrap();
        let v = line_condition(&p, Omega::Finite(omega)).unwrap();
        let (x, y) = (a as f64 / n as f64, b as f64 / n as f64);
        prop_assert!((v - (1.0 + (1.0 + omega) * (y - x))).abs() < 1e-12);
    }

    #[test]
    fn trapezium_is_strict_on_lower_edges(n in 1i64..100) {
        // the edge 1/q = 1/(3p) and the edge 1/q = 1/p - 1/3 are excluded
        let c = ExponentPair::fractions(3, 6 * n, 1, 6 * n).unwrap();
        prop_assert!(!trapezium_contains(&c));
        let x = 2 * n + 1;
        let on = ExponentPair::fractions(x, 3 * n + 3, x - n - 1, 3 * n + 3).unwrap();
        prop_assert!(!trapezium_contains(&on));
    }

    #[test]
    fn trapezium_within_square_and_triangle_constraints((a, b, n) in pair()) {
        let p = ExponentPair::fractions(a, n, b, n).unwrap();
        let (x, y) = (a as f64 / n as f64, b as f64 / n as f64);
        if trapezium_contains(&p) {
            prop_assert!(y <= x + 1e-15 && y >= 2.0 * x - 1.0 - 1e-15 && 3.0 * y > x);
        }
        if triangle_contains(&p) {
            prop_assert!(2.0 * y >= x - 1e-15);
        }
    }

    #[test]
    fn lp_norm_homogeneous_and_monotone(c in 0.1f64..10.0, p in 1.0f64..6.0, seed in 0u64..1000) {
        let spec = GridSpec::square(1.0, 32).unwrap();
        let f = SampledField::from_fn(spec, |x, y| ((x * 13.0 + y * 7.0 + seed as f64).sin()).abs());
        let n = lp_norm(&f, p).unwrap();
        prop_assert!((lp_norm(&f.scaled(c), p).unwrap() - c * n).abs() <= 1e-12 * c * n);
        // on a probability-sized domain of area 4, ||f||_p / 4^(1/p) grows with p
        let q = p + 1.0;
        prop_assert!(n / 4f64.powf(1.0 / p) <= lp_norm(&f, q).unwrap() / 4f64.powf(1.0 / q) * (1.0 + 1e-12));
        prop_assert!(lp_norm(&f, f64::INFINITY).unwrap() <= 1.0);
    }

    #[test]
    fn compensated_sum_cancels(big in 1e10f64..1e15, xs in proptest::collection::vec(-1.0f64..1.0, 1..50)) {
        let exact: f64 = xs.iter().sum();
        let mut seq = vec![big];
        seq.extend(&xs);
        seq.push(-big);
        prop_assert!((compensated_sum(seq) - exact).abs() < 1e-9);
    }

    #[test]
    fn psi_partition(t in 1e-6f64..1.0) {
        let s: f64 = (-25..=0).map(|j| CutoffBump::psi_j(j, t)).sum();
        prop_assert!((s - 1.0).abs() < 1e-14);
        prop_assert!((0.0..=1.0).contains(&CutoffBump::psi(t * 3.0)));
    }

    #[test]
    fn loglog_recovers_power_law(a in -3.0f64..3.0, c in 0.1f64..10.0) {
        let x: Vec<f64> = (1..8).map(|k| (k as f64).exp2()).collect();
        let y: Vec<f64> = x.iter().map(|x| c * x.powf(a)).collect();
        let f = loglog(&x, &y).unwrap();
        prop_assert!((f.slope - a).abs() < 1e-10 && (f.intercept - c.ln()).abs() < 1e-9);
        let samples: Vec<Sample> = x.iter().zip(&y).map(|(&eps, &ratio)| Sample { eps: 1.0 / eps, ratio }).collect();
        let s = fit_exponent(&samples, -a, 0.15).unwrap();
        prop_assert!((s.slope + a).abs() < 1e-10 && s.consistent);
    }

    #[test]
    fn power_curve_eval_and_parse(d in 1.5f64..6.0, t in 0.01f64..1.0) {
        let c: Curve = format!("kind=power d={d}").parse().unwrap();
        prop_assert!((c.eval(t, 0).unwrap() - t.powf(d)).abs() <= 1e-14 * t.powf(d).max(1e-300));
        prop_assert!((c.eval(t, 1).unwrap() - d * t.powf(d - 1.0)).abs() <= 1e-12 * d * t.powf(d - 1.0));
        let back: Curve = c.spec_string().parse().unwrap();
        prop_assert_eq!(back.eval(t, 0).unwrap(), c.eval(t, 0).unwrap());
    }
}
