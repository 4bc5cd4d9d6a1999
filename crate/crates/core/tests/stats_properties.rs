use aggint::stats::{empirical_cdf, ks_distance, EmpiricalSample};
use proptest::prelude::*;

fn weighted() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0f64..10.0, 0.1f64..5.0), 1..40)
}

fn cdf(obs: Vec<(f64, f64)>) -> aggint::stats::EmpiricalCdf {
    empirical_cdf(&EmpiricalSample::new(obs).unwrap()).unwrap()
}

proptest! {
    #[test]
    fn cdf_ignores_order(obs in weighted(), seed in any::<u64>()) {
        let mut shuffled = obs.clone();
        // Deterministic rotation-plus-reverse permutation.
        let k = (seed as usize) % shuffled.len();
        shuffled.rotate_left(k);
        shuffled.reverse();
        let a = cdf(obs);
        let b = cdf(shuffled);
        prop_assert!(ks_distance(&a, &b) < 1e-12);
    }

    #[test]
    fn cdf_ignores_common_weight_scale(obs in weighted(), scale in 0.01f64..100.0) {
        let scaled: Vec<_> = obs.iter().map(|&(x, w)| (x, w * scale)).collect();
        prop_assert!(ks_distance(&cdf(obs), &cdf(scaled)) < 1e-12);
    }

    #[test]
    fn ks_is_a_metric(a in weighted(), b in weighted(), c in weighted()) {
        let (a, b, c) = (cdf(a), cdf(b), cdf(c));
        prop_assert_eq!(ks_distance(&a, &b), ks_distance(&b, &a));
        prop_assert!(ks_distance(&a, &a) == 0.0);
        prop_assert!(ks_distance(&a, &c) <= ks_distance(&a, &b) + ks_distance(&b, &c) + 1e-12);
        let d = ks_distance(&a, &b);
        prop_assert!((0.0..=1.0).contains(&d));
    }
}

#[test]
fn cdf_examples() {
    let one = cdf(vec![(3.0, 2.0)]);
    assert_eq!(one.eval(2.9), 0.0);
    assert_eq!(one.eval(3.0), 1.0);
    let two = cdf(vec![(1.0, 1.0), (2.0, 3.0)]);
    assert_eq!(two.cumulative(), &[0.25, 1.0]);
    let point = cdf(vec![(5.0, 1.0)]);
    assert_eq!(ks_distance(&one, &point), 1.0);
}
