//! Seedable, reproducible Monte Carlo simulation of serieses of
//! single-photon sequences.
//!
//! Each repetition draws a sequence length from the excitation weights and
//! then walks that many elementary experiments, one exclusive outcome each.
//! Every repetition owns an independent ChaCha stream keyed by
//! (seed, repetition index), so the draws do not depend on scheduling, and
//! counts are accumulated as 128-bit integer power sums, which makes the
//! parallel merge exact: any worker count produces bit-identical results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::excitation::{build_weight_table, sample_n, ExcitationSpec};
use crate::trinomial::{CountPair, DetectorModel, MomentSummary};

/// Outcome of one elementary experiment: exactly one of detector A firing,
/// detector B firing, or no detection. Both detectors can never fire in the
/// same elementary experiment; that exclusivity is structural here, not a
/// sampled property.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementaryOutcome {
    DetectorA,
    DetectorB,
    NoDetection,
}

/// Maps a uniform deviate in [0, 1) to an elementary outcome by thresholding
/// at p and p + q.
pub fn run_elementary(det: &DetectorModel, u: f64) -> ElementaryOutcome {
    if u < det.p() {
        ElementaryOutcome::DetectorA
    } else if u < det.p() + det.q() {
        ElementaryOutcome::DetectorB
    } else {
        ElementaryOutcome::NoDetection
    }
}

/// Runs n independent elementary experiments and counts the detections.
/// m + k <= n always holds.
pub fn run_sequence<R: Rng>(det: &DetectorModel, n: u64, rng: &mut R) -> CountPair {
    let (mut m, mut k) = (0u64, 0u64);
    for _ in 0..n {
        match run_elementary(det, rng.gen::<f64>()) {
            ElementaryOutcome::DetectorA => m += 1,
            ElementaryOutcome::DetectorB => k += 1,
            ElementaryOutcome::NoDetection => {}
        }
    }
    CountPair { m, k }
}

/// Configuration of one Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunConfig {
    pub spec: ExcitationSpec,
    pub det: DetectorModel,
    /// Number of sequence repetitions M.
    pub series_count: u64,
    pub seed: u64,
    /// Batches for batch-means standard errors (default 32).
    pub batch_count: u32,
    /// Tail tolerance of the excitation weight table.
    pub tail_tol: f64,
}

impl RunConfig {
    pub fn new(spec: ExcitationSpec, det: DetectorModel, series_count: u64, seed: u64) -> Self {
        Self {
            spec,
            det,
            series_count,
            seed,
            batch_count: 32,
            tail_tol: 1e-10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.batch_count < 2 {
            return Err(Error::InvalidParameter(
                "batch count must be at least 2".into(),
            ));
        }
        if self.series_count < self.batch_count as u64 {
            return Err(Error::InvalidParameter(format!(
                "series count {} must be at least the batch count {}",
                self.series_count, self.batch_count
            )));
        }
        Ok(())
    }
}

/// Monte Carlo estimates of the count statistics with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalStats {
    /// Point estimates of all moment-summary fields.
    pub summary: MomentSummary,
    pub se_mean_a: f64,
    pub se_mean_b: f64,
    /// Batch-means standard errors of the ratio statistics; absent when any
    /// batch leaves them undefined.
    pub se_corr: Option<f64>,
    pub se_g2: Option<f64>,
    /// Number of repetitions that went into the estimates.
    pub samples: u64,
    /// Tail bound of the weight table, propagated as a bias bound on the
    /// sampled length distribution.
    pub tail_bias_bound: f64,
}

/// Exact integer power sums of the count pairs. Merging two accumulators is
/// plain integer addition, so the result cannot depend on how repetitions
/// were partitioned across workers.
#[derive(Debug, Default, Clone, Copy)]
struct MomentAccum {
    count: u64,
    sum_m: u128,
    sum_k: u128,
    sum_mm: u128,
    sum_kk: u128,
    sum_mk: u128,
}

impl MomentAccum {
    fn push(&mut self, pair: CountPair) {
        let (m, k) = (pair.m as u128, pair.k as u128);
        self.count += 1;
        self.sum_m += m;
        self.sum_k += k;
        self.sum_mm += m * m;
        self.sum_kk += k * k;
        self.sum_mk += m * k;
    }

    fn merge(self, other: Self) -> Self {
        Self {
            count: self.count + other.count,
            sum_m: self.sum_m + other.sum_m,
            sum_k: self.sum_k + other.sum_k,
            sum_mm: self.sum_mm + other.sum_mm,
            sum_kk: self.sum_kk + other.sum_kk,
            sum_mk: self.sum_mk + other.sum_mk,
        }
    }

    fn summarize(&self) -> MomentSummary {
        let c = self.count as f64;
        let mean_a = self.sum_m as f64 / c;
        let mean_b = self.sum_k as f64 / c;
        let var_a = (self.sum_mm as f64 / c - mean_a * mean_a).max(0.0);
        let var_b = (self.sum_kk as f64 / c - mean_b * mean_b).max(0.0);
        let cov = self.sum_mk as f64 / c - mean_a * mean_b;
        // g2 is absent when the empirical mean product is zero
        let g2 = (self.sum_m > 0 && self.sum_k > 0)
            .then(|| (self.sum_mk as f64 / c) / (mean_a * mean_b));
        MomentSummary::from_moments(mean_a, mean_b, var_a, var_b, cov, g2)
    }
}

/// The stream of repetition `index` under the given seed. ChaCha streams are
/// independent by construction, so a repetition's draws depend only on
/// (seed, index), never on scheduling or worker count.
fn repetition_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs the configured series: M repetitions of (draw a length, run the
/// sequence), accumulated into point estimates plus batch-means standard
/// errors over `batch_count` contiguous batches.
///
/// Deterministic given the config alone. Repetitions are partitioned across
/// rayon workers by batch; the integer accumulators make the merged sums
/// exact, so the output is bit-identical for any worker count.
pub fn run_series(config: &RunConfig) -> Result<EmpiricalStats> {
    config.validate()?;
    let table = build_weight_table(&config.spec, config.tail_tol)?;
    let total_reps = config.series_count;
    let batches = config.batch_count as u64;

    let accums: Vec<MomentAccum> = (0..batches)
        .into_par_iter()
        .map(|j| {
            let lo = j * total_reps / batches;
            let hi = (j + 1) * total_reps / batches;
            let mut acc = MomentAccum::default();
            for index in lo..hi {
                let mut rng = repetition_rng(config.seed, index);
                // the first deviate of each repetition is always the length draw
                let n = sample_n(&table, rng.gen::<f64>());
                acc.push(run_sequence(&config.det, n, &mut rng));
            }
            acc
        })
        .collect();

    let total = accums
        .iter()
        .copied()
        .fold(MomentAccum::default(), MomentAccum::merge);
    let summary = total.summarize();

    // batch sizes differ by at most one; treat the batch means as equally weighted
    let batch_summaries: Vec<MomentSummary> = accums.iter().map(MomentAccum::summarize).collect();
    let se_of = |f: &dyn Fn(&MomentSummary) -> f64| {
        batch_standard_error(&batch_summaries.iter().map(|s| f(s)).collect::<Vec<_>>())
    };
    let se_mean_a = se_of(&|s| s.mean_a);
    let se_mean_b = se_of(&|s| s.mean_b);
    let se_corr = batch_summaries
        .iter()
        .map(|s| s.corr)
        .collect::<Option<Vec<_>>>()
        .map(|v| batch_standard_error(&v));
    let se_g2 = batch_summaries
        .iter()
        .map(|s| s.g2)
        .collect::<Option<Vec<_>>>()
        .map(|v| batch_standard_error(&v));

    Ok(EmpiricalStats {
        summary,
        se_mean_a,
        se_mean_b,
        se_corr,
        se_g2,
        samples: total.count,
        tail_bias_bound: table.tail_bound(),
    })
}

fn batch_standard_error(values: &[f64]) -> f64 {
    let b = values.len() as f64;
    let mean = values.iter().sum::<f64>() / b;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (b - 1.0);
    (var / b).sqrt()
}

/// Snapshots of the estimates at increasing sample counts.
///
/// Per-repetition streams make each snapshot a literal prefix of the full
/// run: the estimate at checkpoint c uses exactly the draws the first c
/// repetitions of `run_series` would use.
pub fn convergence_sweep(config: &RunConfig, checkpoints: &[u64]) -> Result<Vec<EmpiricalStats>> {
    config.validate()?;
    if checkpoints.is_empty() {
        return Err(Error::InvalidParameter("no checkpoints given".into()));
    }
    let ascending = checkpoints.windows(2).all(|w| w[0] < w[1]);
    if !ascending {
        return Err(Error::InvalidParameter(
            "checkpoints must be strictly ascending".into(),
        ));
    }
    if *checkpoints.last().unwrap() > config.series_count {
        return Err(Error::InvalidParameter(
            "checkpoints cannot exceed the series count".into(),
        ));
    }
    if checkpoints[0] < config.batch_count as u64 {
        return Err(Error::InvalidParameter(
            "checkpoints must be at least the batch count".into(),
        ));
    }
    checkpoints
        .iter()
        .map(|&c| {
            run_series(&RunConfig {
                series_count: c,
                ..*config
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn det(p: f64, q: f64) -> DetectorModel {
        DetectorModel::from_pq(p, q).unwrap()
    }

    #[test]
    fn elementary_thresholds() {
        let d = det(0.3, 0.3);
        assert_eq!(run_elementary(&d, 0.1), ElementaryOutcome::DetectorA);
        assert_eq!(run_elementary(&d, 0.45), ElementaryOutcome::DetectorB);
        assert_eq!(run_elementary(&d, 0.95), ElementaryOutcome::NoDetection);
        // boundary: p = 1 fires A for every admissible deviate
        let certain = DetectorModel::new(1.0, 0.0, 0.0).unwrap();
        for u in [0.0, 0.5, 0.999_999_9] {
            assert_eq!(run_elementary(&certain, u), ElementaryOutcome::DetectorA);
        }
    }

    #[test]
    fn sequence_count_bounds() {
        let d = det(0.3, 0.3);
        let mut rng = repetition_rng(1, 0);
        assert_eq!(run_sequence(&d, 0, &mut rng), CountPair { m: 0, k: 0 });
        for n in [1u64, 5, 40] {
            let pair = run_sequence(&d, n, &mut rng);
            assert!(pair.m + pair.k <= n);
        }
        // r = 0: every experiment fires one of the detectors
        let diag = det(0.5, 0.5);
        for _ in 0..50 {
            let pair = run_sequence(&diag, 9, &mut rng);
            assert_eq!(pair.m + pair.k, 9);
        }
    }

    #[test]
    fn run_series_is_deterministic() {
        let config = RunConfig::new(
            ExcitationSpec::Thermal { nbar: 1.5 },
            det(0.3, 0.3),
            20_000,
            7,
        );
        let a = run_series(&config).unwrap();
        let b = run_series(&config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn run_series_validates_config() {
        let mut config = RunConfig::new(ExcitationSpec::Poisson { lambda: 1.0 }, det(0.3, 0.3), 10, 0);
        config.batch_count = 32;
        assert!(run_series(&config).is_err()); // M < B
        config.batch_count = 1;
        assert!(run_series(&config).is_err()); // B < 2
    }

    #[test]
    fn fixed_length_series_recovers_anticorrelation() {
        let config = RunConfig::new(
            ExcitationSpec::Number { n: 10 },
            det(0.4, 0.4),
            100_000,
            42,
        );
        let stats = run_series(&config).unwrap();
        assert!((stats.summary.corr.unwrap() + 2.0 / 3.0).abs() < 0.02);
        assert_relative_eq!(stats.summary.mean_a, 4.0, max_relative = 0.02);
        assert_eq!(stats.samples, 100_000);
        assert_eq!(stats.tail_bias_bound, 0.0);
    }

    #[test]
    fn convergence_sweep_prefix_property() {
        let config = RunConfig::new(
            ExcitationSpec::Thermal { nbar: 1.0 },
            det(0.3, 0.3),
            5_000,
            3,
        );
        let sweep = convergence_sweep(&config, &[5_000]).unwrap();
        assert_eq!(sweep[0], run_series(&config).unwrap());
        assert!(convergence_sweep(&config, &[]).is_err());
        assert!(convergence_sweep(&config, &[100, 100]).is_err());
        assert!(convergence_sweep(&config, &[100, 10_000]).is_err());
    }
}
