use proptest::prelude::*;

use gko::czdecomp::{cz_decompose, cz_verify, Samples};
use gko::metric::{dist, dist_orbit, dist_orbit_brute, generalized_dist};
use gko::semigroup::{bkernel, heat_kernel_real};
use gko::translate::translate_exponential;
use gko::Setting;

fn coord() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), -50.0..50.0f64, -1e-3..1e-3f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn metric_is_symmetric_and_orbit_minimal(x in prop::collection::vec(coord(), 3), y in prop::collection::vec(coord(), 3)) {
        prop_assert_eq!(dist(&x, &y), dist(&y, &x));
        let d = dist_orbit(&x, &y);
        prop_assert!((d - dist_orbit_brute(&x, &y)).abs() <= 1e-12 * (1.0 + d));
        prop_assert!(d <= dist(&x, &y) + 1e-15);
    }

    #[test]
    fn generalized_distance_dominates_orbit_distance(
        x in prop::collection::vec(coord(), 2),
        y in prop::collection::vec(coord(), 2),
        t in prop::collection::vec(-1.0..=1.0f64, 2),
        u in -1.0..=1.0f64,
    ) {
        let eta: Vec<f64> = x.iter().zip(&t).map(|(a, s)| a * s).collect();
        prop_assert!(generalized_dist(&x, &y, &eta, u).unwrap() >= dist_orbit(&x, &y) - 1e-12);
    }

    #[test]
    fn heat_kernel_is_positive_and_symmetric(
        k in 0.55..2.0f64,
        x in -5.0..5.0f64,
        y in -5.0..5.0f64,
        t in 0.05..4.0f64,
    ) {
        let s = Setting::rank_one(k).unwrap();
        let a = heat_kernel_real(&s, &[x], &[y], t).unwrap();
        let b = heat_kernel_real(&s, &[y], &[x], t).unwrap();
        prop_assert!(a > 0.0);
        prop_assert!((a - b).abs() <= 1e-10 * a);
        // the majorant sinh(t)^{−q} e^{−tanh(t/2)(|x|+|y|)}
        let major = t.sinh().powf(-s.q()) * (-(t / 2.0).tanh() * (x.abs() + y.abs())).exp();
        prop_assert!(a <= major * (1.0 + 1e-12));
    }

    #[test]
    fn transform_kernel_is_bounded(k in 0.55..2.0f64, x in -30.0..30.0f64, y in -30.0..30.0f64) {
        let s = Setting::rank_one(k).unwrap();
        prop_assert!(bkernel(&s, &[x], &[y]).unwrap().abs() <= 1.0 + 1e-10);
    }

    #[test]
    fn translated_exponential_stays_below_one(
        lambda in 0.1..3.0f64,
        x in prop::collection::vec(-4.0..4.0f64, 2),
        y in prop::collection::vec(-4.0..4.0f64, 2),
    ) {
        let s = Setting::new(vec![0.7, 1.2]).unwrap();
        let v = translate_exponential(&s, lambda, &x, &y).unwrap();
        prop_assert!(v > 0.0 && v <= 1.0 + 1e-12);
    }

    #[test]
    fn cz_decomposition_reconstructs(values in prop::collection::vec(0.0..100.0f64, 16..200), factor in 1.5..20.0f64) {
        let n = values.len();
        let grid: Vec<f64> = (0..n).map(|i| -5.0 + 10.0 * i as f64 / n as f64).collect();
        let f = Samples::new(grid, values).unwrap();
        let s = Setting::rank_one(1.0).unwrap();
        let (mass, total) = f.mass(1.0);
        prop_assume!(mass > 0.0);
        let r = cz_verify(&cz_decompose(&s, &f, factor * mass / total).unwrap()).unwrap();
        prop_assert!(r.holds(64.0, 1e-10), "{:?}", r);
    }
}
