//! Statistical and reproducibility contracts of the Monte Carlo engine:
//! worker-count invariance, goodness of fit of the simulated sequences,
//! M^(-1/2) error scaling, batch-means interval coverage, and convergence
//! diagnostics.

use anticorr_core::{
    convergence_sweep, factorial_moments, moments_from_factorial, run_sequence, run_series,
    trinomial_pmf, DetectorModel, ExcitationSpec, RunConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn det(p: f64, q: f64) -> DetectorModel {
    DetectorModel::from_pq(p, q).unwrap()
}

#[test]
fn bit_identical_across_worker_counts() {
    let config = RunConfig::new(
        ExcitationSpec::Squeezed { a: 2.0, zeta: 0.5 },
        det(0.3, 0.3),
        100_000,
        13,
    );
    let mut results = Vec::new();
    for workers in [1usize, 2, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .unwrap();
        results.push(pool.install(|| run_series(&config)).unwrap());
    }
    assert_eq!(results[0], results[1]);
    assert_eq!(results[0], results[2]);
}

#[test]
fn simulated_sequences_match_trinomial_law() {
    // chi-square over the 10 cells of the n = 3 grid, 10^6 sequences
    let d = det(0.3, 0.3);
    let n = 3u64;
    let runs = 1_000_000u64;
    let mut counts = [[0u64; 4]; 4];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..runs {
        let pair = run_sequence(&d, n, &mut rng);
        counts[pair.m as usize][pair.k as usize] += 1;
    }
    let mut chi2 = 0.0;
    let mut cells = 0;
    for m in 0..=n {
        for k in 0..=(n - m) {
            let expected = trinomial_pmf(&d, n, m, k) * runs as f64;
            let observed = counts[m as usize][k as usize] as f64;
            chi2 += (observed - expected).powi(2) / expected;
            cells += 1;
        }
    }
    let threshold = ChiSquared::new((cells - 1) as f64)
        .unwrap()
        .inverse_cdf(1.0 - 1e-3);
    assert!(chi2 < threshold, "chi2 {chi2:.1} over {cells} cells");
}

#[test]
fn mean_error_scales_as_inverse_sqrt() {
    let spec = ExcitationSpec::Thermal { nbar: 1.5 };
    let d = det(0.3, 0.3);
    let target = 0.3 * 1.5;
    let avg_err = |series: u64| {
        let mut total = 0.0;
        for seed in 0..10u64 {
            let stats = run_series(&RunConfig::new(spec, d, series, seed)).unwrap();
            total += (stats.summary.mean_a - target).abs();
        }
        total / 10.0
    };
    let coarse = avg_err(10_000);
    let fine = avg_err(100_000);
    let ratio = coarse / fine;
    // expected sqrt(10) ~ 3.16 with wide sampling slack
    assert!(
        (1.5..7.0).contains(&ratio),
        "error ratio {ratio} incompatible with M^-1/2 scaling ({coarse} vs {fine})"
    );
}

#[test]
fn batch_interval_coverage_per_family() {
    // 3-sigma batch-means intervals should contain the analytic correlation
    // in at least 18 of 20 seeds for every family
    let specs = [
        ExcitationSpec::Number { n: 10 },
        ExcitationSpec::Poisson { lambda: 2.0 },
        ExcitationSpec::Thermal { nbar: 1.5 },
        ExcitationSpec::Squeezed { a: 2.0, zeta: 0.5 },
        ExcitationSpec::Phase { max_n: 8 },
    ];
    let d = det(0.3, 0.3);
    for spec in specs {
        let target = moments_from_factorial(&d, &factorial_moments(&spec))
            .corr
            .unwrap();
        let mut covered = 0;
        for seed in 1..=20u64 {
            let stats = run_series(&RunConfig::new(spec, d, 50_000, seed)).unwrap();
            let corr = stats.summary.corr.unwrap();
            let se = stats.se_corr.unwrap();
            if (corr - target).abs() <= 3.0 * se {
                covered += 1;
            }
        }
        assert!(
            covered >= 18,
            "{}: only {covered}/20 intervals covered the target",
            spec.family()
        );
    }
}

#[test]
fn convergence_sweep_tightens_thermal_g2() {
    let d = det(0.3, 0.3);
    let spec = ExcitationSpec::Thermal { nbar: 1.5 };
    let checkpoints = [1_000u64, 10_000, 100_000];
    let mut improved = 0;
    // statistical property (per-seed success rate ~94%), so the seed set is
    // pinned to keep the assertion deterministic
    for seed in 5_000..5_020u64 {
        let mut config = RunConfig::new(spec, d, 100_000, seed);
        config.tail_tol = 1e-10;
        let sweep = convergence_sweep(&config, &checkpoints).unwrap();
        let first = (sweep[0].summary.g2.unwrap() - 2.0).abs();
        let last = (sweep[2].summary.g2.unwrap() - 2.0).abs();
        if last < first {
            improved += 1;
        }
    }
    assert!(improved >= 19, "only {improved}/20 seeds improved");
}

#[test]
fn convergence_sweep_keeps_fixed_length_anticorrelated() {
    let config = RunConfig::new(ExcitationSpec::Number { n: 10 }, det(0.4, 0.4), 100_000, 5);
    let sweep = convergence_sweep(&config, &[1_000, 10_000, 100_000]).unwrap();
    for stats in sweep {
        assert!(stats.summary.corr.unwrap() < 0.0);
    }
}

#[test]
fn empirical_estimates_track_analytic_targets() {
    let d = det(0.3, 0.3);
    for spec in [
        ExcitationSpec::Poisson { lambda: 2.0 },
        ExcitationSpec::Thermal { nbar: 1.5 },
        ExcitationSpec::Phase { max_n: 8 },
    ] {
        let target = moments_from_factorial(&d, &factorial_moments(&spec));
        let stats = run_series(&RunConfig::new(spec, d, 200_000, 99)).unwrap();
        assert!((stats.summary.mean_a - target.mean_a).abs() < 6.0 * stats.se_mean_a.max(1e-6));
        assert!((stats.summary.g2.unwrap() - target.g2.unwrap()).abs() < 0.1);
        assert!(stats.tail_bias_bound <= 1e-10);
    }
}
