//! The five sequence-length distributions, their factorial moments,
//! certified-tail weight tables, and inverse-CDF sampling.
//!
//! An excitation assigns weights W_n to the number of elementary experiments
//! in one run. All count statistics of the mixed experiment follow from the
//! first two factorial moments mu1 = E[n], mu2 = E[n(n-1)] by multinomial
//! thinning, so each family carries those in closed form alongside a stable
//! pointwise pmf.

use serde::Serialize;
use crate::trinomial::ln_factorial;

use crate::error::{Error, Result};
use crate::hermite::{hermite_log, HermiteLogSeq};

/// Default hard cap on the weight-table cutoff.
pub const DEFAULT_CUTOFF_CAP: u64 = 1_000_000;

/// Squared Cramer constant: |H_n(x)| < K 2^(n/2) sqrt(n!) exp(x^2/2) with
/// K < 1.086435, hence H_n(x)^2 / (2^n n!) < K^2 exp(x^2). This turns the
/// squeezed weights into a geometric series, giving a certified tail bound.
const CRAMER_K2: f64 = 1.086435 * 1.086435;

const MEHLER_MAX_TERMS: u64 = 100_000;

/// Distribution family of the sequence length n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ExcitationSpec {
    /// Exactly `n` elementary experiments per run (point mass, n >= 1).
    Number { n: u64 },
    /// Poisson-distributed length with mean `lambda` (coherent excitation).
    Poisson { lambda: f64 },
    /// Bose/geometric length with mean occupation `nbar` (thermal excitation).
    Thermal { nbar: f64 },
    /// Photon-number distribution of a squeezed coherent state with
    /// displacement `a` >= 0 and squeezing `zeta` in (0, 1). `a = 0` is
    /// admitted (squeezed vacuum; only even lengths occur).
    Squeezed { a: f64, zeta: f64 },
    /// Uniform length on {0, ..., max_n} (phase excitation).
    Phase { max_n: u64 },
}

impl ExcitationSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ExcitationSpec::Number { n } => {
                if n == 0 {
                    return Err(Error::InvalidParameter(
                        "number excitation needs n >= 1".into(),
                    ));
                }
            }
            ExcitationSpec::Poisson { lambda } => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "poisson mean must be positive and finite, got {lambda}"
                    )));
                }
            }
            ExcitationSpec::Thermal { nbar } => {
                if !(nbar > 0.0 && nbar.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "thermal mean occupation must be positive and finite, got {nbar}"
                    )));
                }
            }
            ExcitationSpec::Squeezed { a, zeta } => {
                if !(a >= 0.0 && a.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "squeezed displacement must be >= 0, got {a}"
                    )));
                }
                if !(zeta > 0.0 && zeta < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "squeezing parameter must lie in (0, 1), got {zeta}"
                    )));
                }
            }
            ExcitationSpec::Phase { .. } => {}
        }
        Ok(())
    }

    /// Lowercase family tag, e.g. `"thermal"`.
    pub fn family(&self) -> &'static str {
        match self {
            ExcitationSpec::Number { .. } => "number",
            ExcitationSpec::Poisson { .. } => "poisson",
            ExcitationSpec::Thermal { .. } => "thermal",
            ExcitationSpec::Squeezed { .. } => "squeezed",
            ExcitationSpec::Phase { .. } => "phase",
        }
    }
}

/// Success parameter b = nbar / (1 + nbar) of the Bose distribution, so that
/// W_n = (1 - b) b^n and nbar = b / (1 - b).
pub fn bose_parameter(nbar: f64) -> f64 {
    nbar / (1.0 + nbar)
}

/// High-squeezing parametrization (s, eps) of the squeezing parameter:
/// s = (1 + zeta) / (1 - zeta), eps = 2 / s. Strong squeezing is eps << 1.
pub fn schleich_wheeler(zeta: f64) -> (f64, f64) {
    let s = (1.0 + zeta) / (1.0 - zeta);
    (s, 2.0 / s)
}

/// Inverse of [`schleich_wheeler`]: zeta = (2 - eps) / (2 + eps).
pub fn zeta_from_epsilon(epsilon: f64) -> f64 {
    (2.0 - epsilon) / (2.0 + epsilon)
}

/// First two factorial moments of the sequence length:
/// mu1 = E[n] and mu2 = E[n(n-1)].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FactorialMoments {
    pub mu1: f64,
    pub mu2: f64,
}

fn squeezed_hermite_arg(a: f64, zeta: f64) -> f64 {
    a * (1.0 + zeta) / (2.0 * zeta).sqrt()
}

/// log W_n of the squeezed family given the Hermite log-value at the
/// evaluation point; -inf where the polynomial vanishes (odd n at a = 0).
fn squeezed_log_weight(a: f64, zeta: f64, n: u64, hermite: (f64, i8)) -> f64 {
    let (h_log, h_sign) = hermite;
    if h_sign == 0 {
        return f64::NEG_INFINITY;
    }
    0.5 * (1.0 - zeta * zeta).ln() - a * a * (1.0 + zeta) + n as f64 * (zeta / 2.0).ln()
        - ln_factorial(n)
        + 2.0 * h_log
}

/// Probability W_n that one run contains exactly n elementary experiments.
///
/// The squeezed family is evaluated entirely in log space; its Hermite factor
/// enters squared, so the polynomial's sign is irrelevant.
pub fn weight_pmf(spec: &ExcitationSpec, n: u64) -> f64 {
    debug_assert!(spec.validate().is_ok());
    match *spec {
        ExcitationSpec::Number { n: fixed } => {
            if n == fixed {
                1.0
            } else {
                0.0
            }
        }
        ExcitationSpec::Poisson { lambda } => {
            (n as f64 * lambda.ln() - lambda - ln_factorial(n)).exp()
        }
        ExcitationSpec::Thermal { nbar } => {
            let b = bose_parameter(nbar);
            ((1.0 - b).ln() + n as f64 * b.ln()).exp()
        }
        ExcitationSpec::Squeezed { a, zeta } => {
            let arg = squeezed_hermite_arg(a, zeta);
            squeezed_log_weight(a, zeta, n, hermite_log(n, arg)).exp()
        }
        ExcitationSpec::Phase { max_n } => {
            if n <= max_n {
                1.0 / (max_n as f64 + 1.0)
            } else {
                0.0
            }
        }
    }
}

/// Mean E[n] = alpha and excess beta = Var(n) - E[n] of the squeezed
/// photon-number distribution:
/// alpha = a^2 + zeta^2/(1 - zeta^2),
/// beta  = zeta^2 (1 + zeta^2)/(1 - zeta^2)^2 - 2 zeta a^2/(1 + zeta).
///
/// beta's sign decides bunching (> 0) versus anti-bunching (< 0) of the
/// mixed counts; beta = 0 makes the counts uncorrelated but not independent.
pub fn squeezed_alpha_beta(a: f64, zeta: f64) -> (f64, f64) {
    let z2 = zeta * zeta;
    let om = 1.0 - z2;
    let alpha = a * a + z2 / om;
    let beta = z2 * (1.0 + z2) / (om * om) - 2.0 * zeta * a * a / (1.0 + zeta);
    (alpha, beta)
}

/// Closed-form factorial moments per family.
pub fn factorial_moments(spec: &ExcitationSpec) -> FactorialMoments {
    debug_assert!(spec.validate().is_ok());
    let (mu1, mu2) = match *spec {
        ExcitationSpec::Number { n } => {
            let nf = n as f64;
            (nf, nf * (nf - 1.0))
        }
        ExcitationSpec::Poisson { lambda } => (lambda, lambda * lambda),
        ExcitationSpec::Thermal { nbar } => (nbar, 2.0 * nbar * nbar),
        ExcitationSpec::Squeezed { a, zeta } => {
            let (alpha, beta) = squeezed_alpha_beta(a, zeta);
            (alpha, alpha * alpha + beta)
        }
        ExcitationSpec::Phase { max_n } => {
            let nf = max_n as f64;
            (nf / 2.0, nf * (nf - 1.0) / 3.0)
        }
    };
    FactorialMoments { mu1, mu2 }
}

/// Alternative second factorial moment of the phase family, N(4N - 1)/12,
/// that a published derivation quotes for the cross moment. It contradicts
/// the direct enumeration already at N = 1 (two possible lengths force
/// E[mk] = 0, hence mu2 = 0, while this form gives 1/4); the exact value is
/// N(N - 1)/3. Exposed for side-by-side reporting only.
pub fn phase_mu2_as_printed(max_n: u64) -> f64 {
    let nf = max_n as f64;
    nf * (4.0 * nf - 1.0) / 12.0
}

/// Truncated excitation weights with a certified bound on the discarded tail.
///
/// Weights are stored raw, not renormalised; the explicit `tail_bound` keeps
/// every downstream truncation error auditable.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    weights: Vec<f64>,
    tail_bound: f64,
    cdf: Vec<f64>, // running partial sums, used by inverse-CDF sampling
}

impl WeightTable {
    /// Weights W_0 ..= W_cutoff.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Upper bound on the probability mass beyond the cutoff.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Largest tabulated sequence length.
    pub fn cutoff(&self) -> u64 {
        (self.weights.len() - 1) as u64
    }

    /// Sum of the tabulated weights (1 - truncated mass).
    pub fn total(&self) -> f64 {
        self.cdf.last().copied().unwrap_or(0.0)
    }
}

/// Smallest k with b^k <= tol, adjusted upward for rounding in the log ratio.
fn geometric_exceedance(b: f64, tol: f64) -> u64 {
    let mut k = (tol.ln() / b.ln()).ceil().max(1.0) as u64;
    while b.powf(k as f64) > tol {
        k += 1;
    }
    k
}

fn cutoff_for(spec: &ExcitationSpec, tail_tol: f64) -> (u64, f64) {
    match *spec {
        ExcitationSpec::Number { n } => (n, 0.0),
        ExcitationSpec::Phase { max_n } => (max_n, 0.0),
        ExcitationSpec::Thermal { nbar } => {
            // geometric tail is exactly b^(cutoff+1)
            let b = bose_parameter(nbar);
            let k = geometric_exceedance(b, tail_tol);
            (k - 1, b.powf(k as f64))
        }
        ExcitationSpec::Poisson { lambda } => {
            // Chernoff bound P(n >= k) <= exp(-lambda) (e lambda / k)^k, k > lambda
            let bound = |k: u64| {
                let kf = k as f64;
                (-lambda + kf * (1.0 + lambda.ln() - kf.ln())).exp()
            };
            let mut k = lambda.floor() as u64 + 1;
            while bound(k) > tail_tol {
                k += 1;
            }
            (k - 1, bound(k))
        }
        ExcitationSpec::Squeezed { a, zeta } => {
            // Cramer's inequality dominates W_n by amp * zeta^n, so the tail
            // past the cutoff is below amp * zeta^(cutoff+1) / (1 - zeta).
            let xs2 = squeezed_hermite_arg(a, zeta).powi(2);
            let ln_amp =
                0.5 * (1.0 - zeta * zeta).ln() - a * a * (1.0 + zeta) + CRAMER_K2.ln() + xs2;
            let ln_tail = |k: u64| ln_amp + k as f64 * zeta.ln() - (1.0 - zeta).ln();
            let mut k = ((tail_tol.ln() - ln_amp + (1.0 - zeta).ln()) / zeta.ln())
                .ceil()
                .max(1.0) as u64;
            while ln_tail(k) > tail_tol.ln() {
                k += 1;
            }
            (k - 1, ln_tail(k).exp())
        }
    }
}

fn tabulate(spec: &ExcitationSpec, cutoff: u64) -> Vec<f64> {
    match *spec {
        ExcitationSpec::Squeezed { a, zeta } => {
            // one recurrence pass instead of O(cutoff^2) point evaluations
            let arg = squeezed_hermite_arg(a, zeta);
            HermiteLogSeq::new(arg)
                .take(cutoff as usize + 1)
                .enumerate()
                .map(|(n, h)| squeezed_log_weight(a, zeta, n as u64, h).exp())
                .collect()
        }
        _ => (0..=cutoff).map(|n| weight_pmf(spec, n)).collect(),
    }
}

/// Builds a weight table whose certified truncation error is at most
/// `tail_tol`, with the default cutoff cap of 10^6.
pub fn build_weight_table(spec: &ExcitationSpec, tail_tol: f64) -> Result<WeightTable> {
    build_weight_table_capped(spec, tail_tol, DEFAULT_CUTOFF_CAP)
}

/// As [`build_weight_table`] with an explicit cutoff cap.
///
/// The cutoff is chosen from an analytic tail bound per family (exact
/// geometric for thermal, Chernoff for Poisson, a Cramer-inequality geometric
/// dominator for squeezed, exact finite support for number and phase). The
/// stored `tail_bound` is the numerical complement 1 - sum(weights), clamped
/// to the certified bound, so table mass plus tail always reconstructs 1.
pub fn build_weight_table_capped(
    spec: &ExcitationSpec,
    tail_tol: f64,
    cutoff_cap: u64,
) -> Result<WeightTable> {
    spec.validate()?;
    if !(tail_tol > 0.0 && tail_tol <= 1e-3) {
        return Err(Error::InvalidParameter(format!(
            "tail tolerance must lie in (0, 1e-3], got {tail_tol}"
        )));
    }
    let (cutoff, certified) = cutoff_for(spec, tail_tol);
    if cutoff > cutoff_cap {
        return Err(Error::Guard(format!(
            "weight table for the {} excitation needs cutoff {cutoff}, above the cap {cutoff_cap}; \
             loosen tail_tol or raise the cap",
            spec.family()
        )));
    }
    let weights = tabulate(spec, cutoff);
    let total: f64 = weights.iter().sum();
    let tail_bound = (1.0 - total).clamp(0.0, certified);
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cdf.push(acc);
    }
    Ok(WeightTable {
        weights,
        tail_bound,
        cdf,
    })
}

/// Inverse-CDF draw of a sequence length: the smallest n with CDF(n) > u.
///
/// Deviates landing in the truncated tail map to the cutoff, a bias bounded
/// by the table's `tail_bound`.
pub fn sample_n(table: &WeightTable, u: f64) -> u64 {
    let idx = table.cdf.partition_point(|&c| c <= u);
    idx.min(table.cdf.len() - 1) as u64
}

/// Result of one Mehler-identity verification point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MehlerCheck {
    pub partial_sum: f64,
    pub closed_form: f64,
    pub terms_used: u64,
}

/// Adaptive verification of the equal-argument Mehler identity
/// sum_n t^n H_n(alpha)^2 / (2^n n!) = (1 - t^2)^(-1/2) exp(2 alpha^2 t/(1+t)).
///
/// Sums until two consecutive increments fall below tol * |closed_form|
/// (single-term stopping would trip over Hermite zeros, which null isolated
/// terms). Errors if 10^5 terms do not suffice.
pub fn mehler_check(alpha: f64, t: f64, tol: f64) -> Result<MehlerCheck> {
    if !(t.abs() <= 0.95) {
        return Err(Error::Guard(format!(
            "mehler summation requires |t| <= 0.95, got {t}"
        )));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let closed_form = (1.0 - t * t).powf(-0.5) * (2.0 * alpha * alpha * t / (1.0 + t)).exp();
    let threshold = tol * closed_form.abs();
    let mut partial_sum = 0.0;
    let mut small_run = 0u32;
    let mut seq = HermiteLogSeq::new(alpha);
    for n in 0..MEHLER_MAX_TERMS {
        let (h_log, h_sign) = seq.next().expect("sequence is infinite");
        let term = if n == 0 {
            1.0
        } else if h_sign == 0 || t == 0.0 {
            0.0
        } else {
            let ln_mag = n as f64 * (t.abs().ln() - std::f64::consts::LN_2)
                - ln_factorial(n)
                + 2.0 * h_log;
            let sign = if t < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
            sign * ln_mag.exp()
        };
        partial_sum += term;
        if term.abs() < threshold {
            small_run += 1;
            if small_run >= 2 && n >= 1 {
                return Ok(MehlerCheck {
                    partial_sum,
                    closed_form,
                    terms_used: n + 1,
                });
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::NonConvergence(format!(
        "mehler sum at alpha = {alpha}, t = {t} did not settle within {MEHLER_MAX_TERMS} terms"
    )))
}
