mod common;

use common::*;
use confocal::billiard::{jr_step, BilliardSpec};
use confocal::cli::output::fmt_f64;
use confocal::dynamics::dirac_bracket;
use confocal::geometry::{coords_from_elliptic, elliptic_coords};
use confocal::lax::det_l;
use confocal::sampling::{random_impact, random_state, rng};
use proptest::prelude::*;

fn nonzero() -> impl Strategy<Value = f64> {
    prop_oneof![0.05..2.0f64, -2.0..-0.05f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn elliptic_coords_round_trip(x in proptest::collection::vec(nonzero(), 4)) {
        let e = spec(&AXES4);
        let ec = elliptic_coords(&e, &x).unwrap();
        let back = coords_from_elliptic(&e, &ec).unwrap();
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-8 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn dirac_bracket_is_antisymmetric(seed in any::<u64>(), i in 0usize..8, j in 0usize..8) {
        let sys = jacobi(0.0);
        let s = random_state(&mut rng(seed), &sys).unwrap();
        let f = |z: &[f64]| z[i] * z[(i + 1) % 8];
        let g = |z: &[f64]| z[j] * z[j] + z[(j + 3) % 8];
        let fg = dirac_bracket(&sys.spec, &f, &g, &s, 1e-6).unwrap();
        let gf = dirac_bracket(&sys.spec, &g, &f, &s, 1e-6).unwrap();
        prop_assert!((fg + gf).abs() < 1e-8 * (1.0 + fg.abs()));
    }

    #[test]
    fn impacts_stay_on_the_boundary(seed in any::<u64>(), sigma in -1.0..1.0f64, charged in any::<bool>()) {
        let mu = if charged { vec![0.2, 0.0, 0.3] } else { vec![0.0; 3] };
        let spec = BilliardSpec::new(vec![3.0, 2.0, 1.0], sigma, mu).unwrap();
        let mut s = random_impact(&mut rng(seed), &spec);
        for _ in 0..20 {
            s = jr_step(&spec, &s).unwrap();
            prop_assert!(spec.boundary_value(&s.x).abs() < 1e-10);
        }
    }

    #[test]
    fn det_l_is_even_in_momentum(seed in any::<u64>(), lambda in 0.1..0.9f64) {
        let sys = jr();
        let s = random_state(&mut rng(seed), &sys).unwrap();
        let mut flipped = s.clone();
        flipped.y.iter_mut().for_each(|v| *v = -*v);
        let (a, b) = (det_l(&sys, &s, lambda).unwrap(), det_l(&sys, &flipped, lambda).unwrap());
        prop_assert!(rel(a, b) < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn csv_float_format_round_trips(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
    }
}
