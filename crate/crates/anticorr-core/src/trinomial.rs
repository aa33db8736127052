//! Exact statistics of a fixed-length sequence of elementary experiments.
//!
//! One elementary experiment has three mutually exclusive outcomes: detector A
//! fires (probability `p`), detector B fires (`q`), or nothing is detected
//! (`r`). Over `n` independent repetitions the count pair (m, k) follows the
//! trinomial law; everything here is either a closed form of that law or a
//! direct enumeration of its grid.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Largest sequence length accepted by [`enumerate_exact_moments`].
pub const ENUMERATION_LIMIT: u64 = 200;

const SIMPLEX_TOL: f64 = 1e-12;

/// ln(n!), exact for the 0! = 1! = 1 cases the Lanczos approximation
/// would otherwise perturb at the 1e-16 level.
pub(crate) fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// Outcome probabilities (p, q, r) of one elementary experiment.
///
/// The probabilities must form a simplex point: each in [0, 1] and
/// p + q + r = 1 to within 1e-12. `r = 0` is accepted; it pins the count
/// pair to the m + k = n diagonal and yields the maximally anticorrelated
/// boundary case (corr = -1 at p = q).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectorModel {
    p: f64,
    q: f64,
    r: f64,
}

impl DetectorModel {
    pub fn new(p: f64, q: f64, r: f64) -> Result<Self> {
        for (name, v) in [("p", p), ("q", q), ("r", r)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidDetector(format!(
                    "{name} = {v} is outside [0, 1]"
                )));
            }
        }
        let sum = p + q + r;
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidDetector(format!(
                "p + q + r = {sum} must equal 1 within {SIMPLEX_TOL:e}"
            )));
        }
        Ok(Self { p, q, r })
    }

    /// Builds the model from (p, q) alone, with r = 1 - p - q implied.
    pub fn from_pq(p: f64, q: f64) -> Result<Self> {
        if p + q > 1.0 + SIMPLEX_TOL {
            return Err(Error::InvalidDetector(format!(
                "p + q = {} exceeds 1; the no-detection probability r = 1 - p - q must be non-negative",
                p + q
            )));
        }
        Self::new(p, q, (1.0 - p - q).max(0.0))
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

/// Realised detector counts over one sequence: `m` A-counts and `k` B-counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CountPair {
    pub m: u64,
    pub k: u64,
}

/// First and second order statistics of the count pair.
///
/// `corr` is the normalized correlation coefficient, absent when either
/// variance vanishes; `g2` is the normalized intensity-intensity correlation
/// E[mk] / (E[m] E[k]), absent when the mean product is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSummary {
    pub mean_a: f64,
    pub mean_b: f64,
    pub var_a: f64,
    pub var_b: f64,
    pub cov: f64,
    pub corr: Option<f64>,
    pub g2: Option<f64>,
}

impl MomentSummary {
    /// Builds a summary, deriving `corr` from the covariance and flagging it
    /// absent (rather than NaN) in the degenerate zero-variance case.
    pub fn from_moments(
        mean_a: f64,
        mean_b: f64,
        var_a: f64,
        var_b: f64,
        cov: f64,
        g2: Option<f64>,
    ) -> Self {
        let vp = var_a * var_b;
        let corr = (vp > 0.0).then(|| (cov / vp.sqrt()).clamp(-1.0, 1.0));
        Self {
            mean_a,
            mean_b,
            var_a,
            var_b,
            cov,
            corr,
            g2,
        }
    }

    /// Largest relative deviation from `other` over all shared fields.
    ///
    /// The denominator has an absolute floor of 1 so that near-zero entries
    /// (e.g. a vanishing covariance) compare absolutely. A field present on
    /// one side but absent on the other counts as infinite deviation.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        fn rel(a: f64, b: f64) -> f64 {
            (a - b).abs() / a.abs().max(b.abs()).max(1.0)
        }
        let mut worst: f64 = [
            rel(self.mean_a, other.mean_a),
            rel(self.mean_b, other.mean_b),
            rel(self.var_a, other.var_a),
            rel(self.var_b, other.var_b),
            rel(self.cov, other.cov),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        for (a, b) in [(self.corr, other.corr), (self.g2, other.g2)] {
            match (a, b) {
                (Some(a), Some(b)) => worst = worst.max(rel(a, b)),
                (None, None) => {}
                _ => return f64::INFINITY,
            }
        }
        worst
    }
}

/// Probability of `m` A-counts and `k` B-counts in a length-`n` sequence,
/// n! / (m! k! (n-m-k)!) p^m q^k r^(n-m-k), and 0 when m + k > n.
///
/// Evaluated in log space (log-gamma factorials), so sequence lengths of
/// 10^4 and beyond neither overflow nor underflow.
pub fn trinomial_pmf(det: &DetectorModel, n: u64, m: u64, k: u64) -> f64 {
    if m.checked_add(k).map_or(true, |s| s > n) {
        return 0.0;
    }
    let c = n - m - k;
    // A zero-probability category contributes only when its count is zero.
    let mut log_p = 0.0;
    for (count, prob) in [(m, det.p), (k, det.q), (c, det.r)] {
        if count > 0 {
            if prob == 0.0 {
                return 0.0;
            }
            log_p += count as f64 * prob.ln();
        }
    }
    let log_coef = ln_factorial(n) - ln_factorial(m) - ln_factorial(k) - ln_factorial(c);
    (log_coef + log_p).exp()
}

/// Two-variable probability generating function of the count pair,
/// G_n(x, y) = (p x + q y + r)^n.
pub fn sequence_gf(det: &DetectorModel, n: u64, x: f64, y: f64) -> f64 {
    let z = det.p * x + det.q * y + det.r;
    if n <= i32::MAX as u64 {
        z.powi(n as i32)
    } else {
        z.powf(n as f64)
    }
}

/// Closed-form count moments for a fixed sequence length:
/// means (np, nq), variances np(1-p), nq(1-q), covariance -npq.
///
/// The correlation coefficient -sqrt(pq / ((1-p)(1-q))) does not depend on
/// n, and g2 = 1 - 1/n does not depend on the detector; both facts are
/// load-bearing for the cross-checks downstream.
pub fn fixed_n_moments(det: &DetectorModel, n: u64) -> Result<MomentSummary> {
    if n == 0 {
        return Err(Error::Guard("fixed-length moments need n >= 1".into()));
    }
    let (p, q) = (det.p, det.q);
    let nf = n as f64;
    let corr = (p > 0.0 && q > 0.0 && p < 1.0 && q < 1.0)
        .then(|| -(p * q / ((1.0 - p) * (1.0 - q))).sqrt());
    let g2 = (p > 0.0 && q > 0.0).then(|| 1.0 - 1.0 / nf);
    Ok(MomentSummary {
        mean_a: nf * p,
        mean_b: nf * q,
        var_a: nf * p * (1.0 - p),
        var_b: nf * q * (1.0 - q),
        cov: -nf * p * q,
        corr,
        g2,
    })
}

/// Brute-force moments by direct double summation over the trinomial grid
/// {(m, k) : m + k <= n}. Independent of the closed forms above; this is the
/// oracle they are checked against. Guarded to n <= [`ENUMERATION_LIMIT`].
pub fn enumerate_exact_moments(det: &DetectorModel, n: u64) -> Result<MomentSummary> {
    if n > ENUMERATION_LIMIT {
        return Err(Error::Guard(format!(
            "enumeration grid limited to n <= {ENUMERATION_LIMIT}, got {n}"
        )));
    }
    let (mut em, mut ek, mut emm, mut ekk, mut emk) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for m in 0..=n {
        for k in 0..=(n - m) {
            let w = trinomial_pmf(det, n, m, k);
            let (mf, kf) = (m as f64, k as f64);
            em += w * mf;
            ek += w * kf;
            emm += w * mf * mf;
            ekk += w * kf * kf;
            emk += w * mf * kf;
        }
    }
    let var_a = (emm - em * em).max(0.0);
    let var_b = (ekk - ek * ek).max(0.0);
    let g2 = (em * ek > 0.0).then(|| emk / (em * ek));
    Ok(MomentSummary::from_moments(
        em,
        ek,
        var_a,
        var_b,
        emk - em * ek,
        g2,
    ))
}
