//! Distribution-level checks of the excitation weights: moment agreement
//! against direct table summation, the Mandel-style sign identity, and
//! chi-square goodness of fit of the inverse-CDF sampler.

use anticorr_core::{
    build_weight_table, factorial_moments, sample_n, squeezed_alpha_beta, weight_pmf,
    ExcitationSpec, WeightTable,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn length_moments(table: &WeightTable) -> (f64, f64, f64) {
    // (E[n], E[n(n-1)], Var(n)) by direct summation
    let (mut e1, mut e2, mut esq) = (0.0, 0.0, 0.0);
    for (n, w) in table.weights().iter().enumerate() {
        let nf = n as f64;
        e1 += w * nf;
        e2 += w * nf * (nf - 1.0);
        esq += w * nf * nf;
    }
    (e1, e2, esq - e1 * e1)
}

fn three_points_per_family() -> Vec<ExcitationSpec> {
    vec![
        ExcitationSpec::Number { n: 1 },
        ExcitationSpec::Number { n: 7 },
        ExcitationSpec::Number { n: 40 },
        ExcitationSpec::Poisson { lambda: 0.2 },
        ExcitationSpec::Poisson { lambda: 1.0 },
        ExcitationSpec::Poisson { lambda: 9.0 },
        ExcitationSpec::Thermal { nbar: 0.25 },
        ExcitationSpec::Thermal { nbar: 1.0 },
        ExcitationSpec::Thermal { nbar: 5.0 },
        ExcitationSpec::Squeezed { a: 0.0, zeta: 0.5 },
        ExcitationSpec::Squeezed { a: 2.0, zeta: 0.5 },
        ExcitationSpec::Squeezed { a: 1.0, zeta: 0.9 },
        ExcitationSpec::Phase { max_n: 1 },
        ExcitationSpec::Phase { max_n: 4 },
        ExcitationSpec::Phase { max_n: 33 },
    ]
}

#[test]
fn factorial_moments_match_table_summation() {
    for spec in three_points_per_family() {
        let table = build_weight_table(&spec, 1e-12).unwrap();
        let fm = factorial_moments(&spec);
        let (e1, e2, _) = length_moments(&table);
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-30);
        assert!(
            rel(fm.mu1, e1) < 1e-8 || (fm.mu1 - e1).abs() < 1e-10,
            "{}: mu1 {} vs {}",
            spec.family(),
            fm.mu1,
            e1
        );
        assert!(
            rel(fm.mu2, e2) < 1e-8 || (fm.mu2 - e2).abs() < 1e-10,
            "{}: mu2 {} vs {}",
            spec.family(),
            fm.mu2,
            e2
        );
    }
}

#[test]
fn mandel_sign_identity() {
    // sign(mu2 - mu1^2) = sign(Var(n) - E[n]); for the squeezed family this
    // equals the sign of beta
    for spec in three_points_per_family() {
        let table = build_weight_table(&spec, 1e-12).unwrap();
        let fm = factorial_moments(&spec);
        let (e1, _, var) = length_moments(&table);
        let closed = fm.mu2 - fm.mu1 * fm.mu1;
        let summed = var - e1;
        let scale = fm.mu1.max(1.0);
        let sign_of = |v: f64| {
            if v.abs() < 1e-7 * scale {
                0i8
            } else if v > 0.0 {
                1
            } else {
                -1
            }
        };
        assert_eq!(
            sign_of(closed),
            sign_of(summed),
            "{}: {closed} vs {summed}",
            spec.family()
        );
        if let ExcitationSpec::Squeezed { a, zeta } = spec {
            let (_, beta) = squeezed_alpha_beta(a, zeta);
            assert_eq!(sign_of(closed), sign_of(beta));
        }
    }
}

/// Chi-square goodness of fit of 10^6 inverse-CDF samples per family at
/// significance 1e-3. Bins with expected count below 10 are pooled.
#[test]
fn sampler_distribution_matches_pmf() {
    let specs = [
        ExcitationSpec::Poisson { lambda: 2.0 },
        ExcitationSpec::Thermal { nbar: 1.5 },
        ExcitationSpec::Squeezed { a: 1.5, zeta: 0.6 },
        ExcitationSpec::Phase { max_n: 12 },
    ];
    let samples = 1_000_000u64;
    for (i, spec) in specs.iter().enumerate() {
        let table = build_weight_table(spec, 1e-10).unwrap();
        let mut counts = vec![0u64; table.weights().len()];
        let mut rng = ChaCha8Rng::seed_from_u64(900 + i as u64);
        for _ in 0..samples {
            counts[sample_n(&table, rng.gen::<f64>()) as usize] += 1;
        }

        // pool the sparse upper bins so every cell has expectation >= 10
        let mut chi2 = 0.0;
        let mut bins = 0usize;
        let (mut pool_obs, mut pool_exp) = (0.0f64, 0.0f64);
        for (n, &w) in table.weights().iter().enumerate() {
            let expected = w * samples as f64;
            let observed = counts[n] as f64;
            if expected >= 10.0 {
                chi2 += (observed - expected).powi(2) / expected;
                bins += 1;
            } else {
                pool_obs += observed;
                pool_exp += expected;
            }
        }
        pool_exp += table.tail_bound() * samples as f64;
        if pool_exp >= 10.0 {
            chi2 += (pool_obs - pool_exp).powi(2) / pool_exp;
            bins += 1;
        }
        let dof = (bins - 1) as f64;
        let threshold = ChiSquared::new(dof).unwrap().inverse_cdf(1.0 - 1e-3);
        assert!(
            chi2 < threshold,
            "{}: chi2 {chi2:.1} over {bins} bins exceeds {threshold:.1}",
            spec.family()
        );
    }

    // the point mass needs no test statistic: every draw is the fixed length
    let table = build_weight_table(&ExcitationSpec::Number { n: 7 }, 1e-10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(904);
    for _ in 0..10_000 {
        assert_eq!(sample_n(&table, rng.gen::<f64>()), 7);
    }
}

#[test]
fn pointwise_pmf_matches_table_entries() {
    for spec in [
        ExcitationSpec::Poisson { lambda: 3.0 },
        ExcitationSpec::Squeezed { a: 1.0, zeta: 0.4 },
        ExcitationSpec::Thermal { nbar: 0.8 },
    ] {
        let table = build_weight_table(&spec, 1e-10).unwrap();
        for (n, &w) in table.weights().iter().enumerate().step_by(3) {
            let direct = weight_pmf(&spec, n as u64);
            assert!(
                (direct - w).abs() <= 1e-15 * direct.abs().max(1.0),
                "{} at n = {n}",
                spec.family()
            );
        }
    }
}
