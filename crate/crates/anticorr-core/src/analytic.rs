//! Per-family closed-form count statistics, the high-squeezing
//! approximations, and the five-family summary table.
//!
//! These are hand-written closed forms, deliberately independent of the
//! factorial-moment composition in [`crate::gf`]; the two routes are
//! algebraically identical and the test suites hold them to 1e-12 of each
//! other. Where a published closed form fails the small-instance enumeration
//! oracle (the phase cross moment, the high-squeezing expansion), both the
//! derived-exact and the as-printed variants are exposed, defaulting to the
//! derived-exact one.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::excitation::{squeezed_alpha_beta, zeta_from_epsilon};
use crate::trinomial::{DetectorModel, MomentSummary};

/// Which closed-form variant to evaluate where the two disagree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMode {
    /// Moments recomputed from the weights; matches the enumeration oracle.
    DerivedExact,
    /// The as-printed cross moment E[mk] = (N/2)((4N-1)/6) pq; fails the
    /// N = 1 oracle. Kept for comparison.
    AsPrinted,
}

/// Count statistics under Poisson excitation: means and variances are both
/// lambda p (resp. lambda q), the counts are independent, corr = 0, g2 = 1.
pub fn poisson_summary(det: &DetectorModel, lambda: f64) -> Result<MomentSummary> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "poisson mean must be positive, got {lambda}"
        )));
    }
    let (p, q) = (det.p(), det.q());
    let both = p > 0.0 && q > 0.0;
    Ok(MomentSummary {
        mean_a: lambda * p,
        mean_b: lambda * q,
        var_a: lambda * p,
        var_b: lambda * q,
        cov: 0.0,
        corr: both.then_some(0.0),
        g2: both.then_some(1.0),
    })
}

/// Count statistics under thermal excitation: mean p nbar, variance
/// mean + mean^2 (particle plus wave fluctuation terms), covariance
/// p q nbar^2, and g2 = 2 (the classic bunching value). At p = q the
/// correlation reduces to p nbar / (1 + p nbar).
pub fn thermal_summary(det: &DetectorModel, nbar: f64) -> Result<MomentSummary> {
    if !(nbar > 0.0 && nbar.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "thermal mean occupation must be positive, got {nbar}"
        )));
    }
    let (p, q) = (det.p(), det.q());
    let mean_a = p * nbar;
    let mean_b = q * nbar;
    let var_a = mean_a + mean_a * mean_a;
    let var_b = mean_b + mean_b * mean_b;
    let cov = p * q * nbar * nbar;
    let both = p > 0.0 && q > 0.0;
    Ok(MomentSummary::from_moments(
        mean_a,
        mean_b,
        var_a,
        var_b,
        cov,
        both.then_some(2.0),
    ))
}

/// Count statistics of the squeezed family along with its (alpha, beta).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezedSummary {
    pub summary: MomentSummary,
    pub alpha: f64,
    pub beta: f64,
}

/// Count statistics under squeezed excitation in exact form:
/// mean p alpha, variance p alpha + p^2 beta, covariance p q beta,
/// g2 = 1 + beta / alpha^2. Bunching follows the sign of beta.
pub fn squeezed_summary(det: &DetectorModel, a: f64, zeta: f64) -> Result<SqueezedSummary> {
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
    let (p, q) = (det.p(), det.q());
    let (alpha, beta) = squeezed_alpha_beta(a, zeta);
    let both = p > 0.0 && q > 0.0 && alpha > 0.0;
    let summary = MomentSummary::from_moments(
        p * alpha,
        q * alpha,
        p * alpha + p * p * beta,
        q * alpha + q * q * beta,
        p * q * beta,
        both.then(|| 1.0 + beta / (alpha * alpha)),
    );
    Ok(SqueezedSummary {
        summary,
        alpha,
        beta,
    })
}

/// The high-squeezing approximations next to the exact route they replace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HighSqueezeReport {
    /// Approximate mean count p (a^2 + 1/(2 eps)).
    pub mean_printed: f64,
    /// Approximate g2 = 1 + 4 (1 - eps^2 a^2) / (1 + 2 eps a^2)^2.
    pub g2_printed: f64,
    /// Approximate corr = p (1 - eps^2 a^2) / (eps/2 + eps^2 a^2 + p (1 - eps^2 a^2));
    /// uses the p = q convention of the summary table.
    pub corr_printed: f64,
    /// Squeezing parameter implied by eps: zeta = (2 - eps)/(2 + eps).
    pub zeta: f64,
    /// Exact statistics at that zeta.
    pub exact: SqueezedSummary,
    /// printed - exact, where the exact side is defined.
    pub mean_deviation: f64,
    pub g2_deviation: Option<f64>,
    pub corr_deviation: Option<f64>,
    /// Whether eps < 0.1; outside that the approximations are advisory only.
    pub in_high_squeeze_regime: bool,
    /// The quantity 2 eps a^2 the approximations additionally assume to be
    /// large. Reported, not enforced.
    pub displacement_condition: f64,
}

/// Evaluates the high-squeezing closed forms as printed in the summary-table
/// convention and reports their deviation from the exact route.
///
/// The printed g2 corresponds to the series value beta ~ 1/eps^2 - a^2; the
/// exact expansion gives 1/(2 eps^2) - a^2. That factor-of-two tension is
/// deliberately surfaced through the deviation fields rather than resolved.
pub fn squeezed_highsqueeze(
    det: &DetectorModel,
    a: f64,
    epsilon: f64,
) -> Result<HighSqueezeReport> {
    if !(epsilon > 0.0 && epsilon < 2.0) {
        return Err(Error::InvalidParameter(format!(
            "high-squeeze parameter must lie in (0, 2), got {epsilon}"
        )));
    }
    let p = det.p();
    let ea2 = epsilon * epsilon * a * a;
    let mean_printed = p * (a * a + 1.0 / (2.0 * epsilon));
    let g2_printed = 1.0 + 4.0 * (1.0 - ea2) / (1.0 + 2.0 * epsilon * a * a).powi(2);
    let corr_printed =
        p * (1.0 - ea2) / (epsilon / 2.0 + ea2 + p * (1.0 - ea2));
    let zeta = zeta_from_epsilon(epsilon);
    let exact = squeezed_summary(det, a, zeta)?;
    Ok(HighSqueezeReport {
        mean_printed,
        g2_printed,
        corr_printed,
        zeta,
        exact,
        mean_deviation: mean_printed - exact.summary.mean_a,
        g2_deviation: exact.summary.g2.map(|g| g2_printed - g),
        corr_deviation: exact.summary.corr.map(|c| corr_printed - c),
        in_high_squeeze_regime: epsilon < 0.1,
        displacement_condition: 2.0 * epsilon * a * a,
    })
}

/// Count statistics under phase (uniform-length) excitation.
///
/// Derived-exact composes from mu1 = N/2, mu2 = N(N-1)/3, giving
/// cov = pq N(N-4)/12: negative for N in {1, 2, 3}, zero at N = 4, positive
/// beyond. As-printed uses E[mk] = (N/2)((4N-1)/6) pq and g2 = 4/3 - 1/(3N),
/// which the N = 1 enumeration contradicts (it forces cov = -pq/4). Both
/// modes share the same means and variances. N = 0 yields the all-zero
/// summary with corr and g2 absent.
pub fn phase_summary(det: &DetectorModel, max_n: u64, mode: PhaseMode) -> MomentSummary {
    let (p, q) = (det.p(), det.q());
    if max_n == 0 {
        return MomentSummary {
            mean_a: 0.0,
            mean_b: 0.0,
            var_a: 0.0,
            var_b: 0.0,
            cov: 0.0,
            corr: None,
            g2: None,
        };
    }
    let nf = max_n as f64;
    let mean_a = p * nf / 2.0;
    let mean_b = q * nf / 2.0;
    let var_a = (p * nf * (6.0 - 4.0 * p) + p * p * nf * nf) / 12.0;
    let var_b = (q * nf * (6.0 - 4.0 * q) + q * q * nf * nf) / 12.0;
    let both = p > 0.0 && q > 0.0;
    match mode {
        PhaseMode::DerivedExact => {
            let cov = p * q * nf * (nf - 4.0) / 12.0;
            let g2 = both.then(|| 4.0 / 3.0 - 4.0 / (3.0 * nf));
            MomentSummary::from_moments(mean_a, mean_b, var_a, var_b, cov, g2)
        }
        PhaseMode::AsPrinted => {
            let cross = (nf / 2.0) * ((4.0 * nf - 1.0) / 6.0) * p * q;
            let cov = cross - mean_a * mean_b;
            let g2 = both.then(|| 4.0 / 3.0 - 1.0 / (3.0 * nf));
            MomentSummary::from_moments(mean_a, mean_b, var_a, var_b, cov, g2)
        }
    }
}

/// One parameter set per excitation family for the summary table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryTableParams {
    pub n: u64,
    pub lambda: f64,
    pub nbar: f64,
    pub a: f64,
    pub epsilon: f64,
    pub max_n: u64,
}

impl Default for SummaryTableParams {
    fn default() -> Self {
        Self {
            n: 10,
            lambda: 2.0,
            nbar: 1.5,
            a: 2.0,
            epsilon: 0.1,
            max_n: 20,
        }
    }
}

/// One column of the summary table: mean count, g2 and corr for a family,
/// plus the as-printed variants where they differ from the derived-exact
/// values (squeezed and phase only).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryTableRow {
    pub family: &'static str,
    pub mean: f64,
    pub g2: Option<f64>,
    pub corr: Option<f64>,
    pub mean_printed: Option<f64>,
    pub g2_printed: Option<f64>,
    pub corr_printed: Option<f64>,
}

/// The five-family summary table at p = q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryTable {
    pub p: f64,
    pub rows: [SummaryTableRow; 5],
}

/// Evaluates the five-family summary: mean counts, g2 and the p = q
/// correlation coefficients, derived-exact and as-printed side by side.
///
/// Defined only for p = q (the correlation entries use that reduction);
/// anything else is rejected with a diagnostic.
pub fn summary_table(det: &DetectorModel, params: &SummaryTableParams) -> Result<SummaryTable> {
    let (p, q) = (det.p(), det.q());
    if (p - q).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "the summary table is defined for p = q; got p = {p}, q = {q}"
        )));
    }
    if params.n == 0 {
        return Err(Error::InvalidParameter(
            "number excitation needs n >= 1".into(),
        ));
    }
    if !(params.lambda > 0.0) || !(params.nbar > 0.0) {
        return Err(Error::InvalidParameter(
            "poisson and thermal means must be positive".into(),
        ));
    }

    let number = SummaryTableRow {
        family: "number",
        mean: p * params.n as f64,
        g2: Some(1.0 - 1.0 / params.n as f64),
        corr: Some(-p / (1.0 - p)),
        mean_printed: None,
        g2_printed: None,
        corr_printed: None,
    };
    let poisson = SummaryTableRow {
        family: "poisson",
        mean: p * params.lambda,
        g2: Some(1.0),
        corr: Some(0.0),
        mean_printed: None,
        g2_printed: None,
        corr_printed: None,
    };
    let thermal = SummaryTableRow {
        family: "thermal",
        mean: p * params.nbar,
        g2: Some(2.0),
        corr: Some(p * params.nbar / (1.0 + p * params.nbar)),
        mean_printed: None,
        g2_printed: None,
        corr_printed: None,
    };

    let high = squeezed_highsqueeze(det, params.a, params.epsilon)?;
    let squeezed = SummaryTableRow {
        family: "squeezed",
        mean: high.exact.summary.mean_a,
        g2: high.exact.summary.g2,
        corr: Some(p * high.exact.beta / (high.exact.alpha + p * high.exact.beta)),
        mean_printed: Some(high.mean_printed),
        g2_printed: Some(high.g2_printed),
        corr_printed: Some(high.corr_printed),
    };

    let nf = params.max_n as f64;
    let phase_defined = params.max_n >= 1;
    let phase_denom = (6.0 - 4.0 * p) * nf + p * nf * nf;
    let phase = SummaryTableRow {
        family: "phase",
        mean: p * nf / 2.0,
        g2: phase_defined.then(|| 4.0 / 3.0 - 4.0 / (3.0 * nf)),
        corr: phase_defined.then(|| p * nf * (nf - 4.0) / phase_denom),
        mean_printed: None,
        g2_printed: phase_defined.then(|| 4.0 / 3.0 - 1.0 / (3.0 * nf)),
        corr_printed: phase_defined.then(|| p * (nf * nf - nf) / phase_denom),
    };

    Ok(SummaryTable {
        p,
        rows: [number, poisson, thermal, squeezed, phase],
    })
}
