use aggint::analytic::{mhc_density_baseline, InterferenceLaw};
use aggint::point_process::{monte_carlo_run, sample_ppp, MonteCarloConfig, ProcessKind};
use aggint::stats::{empirical_cdf, ks_distance_to_law};

#[test]
fn ppp_counts_are_poisson() {
    let cfg = MonteCarloConfig::reference_disk(ProcessKind::Ppp, 1e-4, 42);
    let counts: Vec<f64> = (0..100_000u64)
        .map(|i| sample_ppp(&cfg, &mut cfg.iteration_rng(i)).len() as f64)
        .collect();
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let expected = 1e-4 * std::f64::consts::PI * 282.0 * 282.0;
    assert!((expected - 24.98).abs() < 0.01);
    assert!((mean / expected - 1.0).abs() < 0.01, "{mean}");
    assert!((var / mean - 1.0).abs() < 0.03, "{var}");
}

#[test]
fn ppp_on_a_wide_disk_follows_the_closed_form_law() {
    // A wide disk keeps the truncated far field negligible.
    let cfg = MonteCarloConfig {
        region_radius_m: 1500.0,
        iterations: 20_000,
        ..MonteCarloConfig::reference_disk(ProcessKind::Ppp, 5e-5, 3)
    };
    let run = monte_carlo_run(&cfg).unwrap();
    let law = InterferenceLaw::new(5e-5, 1e-3).unwrap();
    let ks = ks_distance_to_law(&empirical_cdf(&run.sample).unwrap(), &law);
    // 99% KS critical value at n = 20 000 is 1.63 / sqrt(n) ~ 0.0115.
    assert!(ks < 0.0115, "{ks}");
}

#[test]
fn hardcore_processes_thin_below_the_ppp() {
    let run = |process| {
        let cfg = MonteCarloConfig {
            iterations: 4_000,
            ..MonteCarloConfig::reference_disk(process, 3e-4, 5)
        };
        monte_carlo_run(&cfg).unwrap()
    };
    let (ppp, mhc, ssi) = (
        run(ProcessKind::Ppp),
        run(ProcessKind::Mhc),
        run(ProcessKind::Ssi),
    );
    assert!(mhc.mean_count < ssi.mean_count && ssi.mean_count < ppp.mean_count);
    assert!(mhc.sample.mean() < ssi.sample.mean() && ssi.sample.mean() < ppp.sample.mean());
    let baseline = mhc_density_baseline(3e-4, 70.0).unwrap();
    assert!(
        (mhc.inner_density / baseline - 1.0).abs() < 0.05,
        "{} vs {baseline}",
        mhc.inner_density
    );
}
