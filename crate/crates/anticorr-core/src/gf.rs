//! Mixture generating-function machinery.
//!
//! Randomising the sequence length n over weights W_n turns the per-length
//! generating function (p x + q y + r)^n into G(x, y) = Phi(p x + q y + r),
//! where Phi is the ordinary generating function of the weights. Each family
//! has a closed form for G; count moments follow either by composing the
//! factorial moments (the analytic route used everywhere) or by numerically
//! differentiating G at (1, 1) (an independent oracle kept for cross-checks).

use crate::error::{Error, Result};
use crate::excitation::{bose_parameter, build_weight_table, ExcitationSpec, FactorialMoments, WeightTable};
use crate::trinomial::{trinomial_pmf, DetectorModel, MomentSummary};

/// Step-size bounds for the finite-difference oracle.
const STEP_MIN: f64 = 1e-6;
const STEP_MAX: f64 = 1e-2;

/// A mixture generating function: an excitation family composed with a
/// detector model through z = p x + q y + r.
#[derive(Debug, Clone, Copy)]
pub struct MixtureGF {
    spec: ExcitationSpec,
    det: DetectorModel,
}

impl MixtureGF {
    pub fn new(spec: ExcitationSpec, det: DetectorModel) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec, det })
    }

    pub fn spec(&self) -> &ExcitationSpec {
        &self.spec
    }

    pub fn det(&self) -> &DetectorModel {
        &self.det
    }

    /// Evaluates G(x, y).
    ///
    /// Pole guards: the thermal form requires b z < 1 and the squeezed form
    /// |zeta z| < 1. The phase form has a removable singularity at z = 1,
    /// evaluated through expm1/ln1p.
    ///
    /// Internally everything is assembled from the exact offset
    /// w = z - 1 = p (x - 1) + q (y - 1), so evaluations near (1, 1) keep
    /// the digits the finite-difference oracle feeds on; the naive forms
    /// lose ~1/|1-z| of their precision there.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let (p, q) = (self.det.p(), self.det.q());
        let w = p * (x - 1.0) + q * (y - 1.0);
        let z = 1.0 + w;
        match self.spec {
            ExcitationSpec::Number { n } => Ok(if n <= i32::MAX as u64 {
                z.powi(n as i32)
            } else {
                z.powf(n as f64)
            }),
            ExcitationSpec::Poisson { lambda } => {
                // equals exp(lambda p (x-1)) * exp(lambda q (y-1)): the
                // mixture factorizes, i.e. the two counts are independent
                Ok((lambda * w).exp())
            }
            ExcitationSpec::Thermal { nbar } => {
                let b = bose_parameter(nbar);
                let denom = (1.0 - b) - b * w; // = 1 - b z, cancellation-free
                if denom <= 0.0 {
                    return Err(Error::Guard(format!(
                        "thermal generating function has a pole at z = 1/b; got b z = {}",
                        b * z
                    )));
                }
                Ok((1.0 - b) / denom)
            }
            ExcitationSpec::Squeezed { a, zeta } => {
                let t = zeta * z;
                if t.abs() >= 1.0 {
                    return Err(Error::Guard(format!(
                        "squeezed generating function needs |zeta z| < 1; got {t}"
                    )));
                }
                let one_minus_t = (1.0 - zeta) - zeta * w; // = 1 - t
                let u = a * a * (1.0 + zeta) * (1.0 + zeta) / zeta;
                // single exponential: the two exp factors would otherwise
                // overflow/underflow separately at large displacement
                let exponent = u * t / (1.0 + t) - a * a * (1.0 + zeta);
                Ok(((1.0 - zeta * zeta) / (one_minus_t * (1.0 + t))).sqrt() * exponent.exp())
            }
            ExcitationSpec::Phase { max_n } => {
                let count = max_n as f64 + 1.0;
                if w == 0.0 {
                    Ok(1.0)
                } else if w > -0.5 {
                    // (1 - z^(N+1)) / (1 - z) = expm1((N+1) ln(1+w)) / w
                    Ok((count * w.ln_1p()).exp_m1() / (w * count))
                } else {
                    // far from the singularity the plain form is well conditioned
                    let zpow = if max_n < i32::MAX as u64 {
                        z.powi(max_n as i32 + 1)
                    } else {
                        z.powf(count)
                    };
                    Ok((1.0 - zpow) / (1.0 - z) / count)
                }
            }
        }
    }
}

/// Composes count moments from the excitation's factorial moments by
/// multinomial thinning:
/// E[m] = p mu1, E[mk] = p q mu2, Var(m) = p(1-p) mu1 + p^2 (mu2 + mu1 - mu1^2),
/// cov = p q (mu2 - mu1^2), g2 = mu2 / mu1^2.
///
/// g2 is computed from the factorial moments alone, so it is bit-identical
/// across detector models by construction.
pub fn moments_from_factorial(det: &DetectorModel, fm: &FactorialMoments) -> MomentSummary {
    let (p, q) = (det.p(), det.q());
    let (mu1, mu2) = (fm.mu1, fm.mu2);
    let length_var = mu2 + mu1 - mu1 * mu1; // Var(n)
    let mean_a = p * mu1;
    let mean_b = q * mu1;
    let var_a = p * (1.0 - p) * mu1 + p * p * length_var;
    let var_b = q * (1.0 - q) * mu1 + q * q * length_var;
    let cov = p * q * (mu2 - mu1 * mu1);
    let g2 = (mu1 > 0.0 && p > 0.0 && q > 0.0).then(|| mu2 / (mu1 * mu1));
    MomentSummary::from_moments(mean_a, mean_b, var_a, var_b, cov, g2)
}

fn pole_adjusted_step(gf: &MixtureGF, h: f64) -> Result<f64> {
    let modulus = match *gf.spec() {
        ExcitationSpec::Thermal { nbar } => bose_parameter(nbar),
        ExcitationSpec::Squeezed { zeta, .. } => zeta,
        _ => return Ok(h),
    };
    // keep 1 + 2h at most halfway towards the pole at z = 1/modulus
    let h_max = (1.0 / modulus - 1.0) / 4.0;
    let shrunk = h.min(h_max);
    if shrunk < STEP_MIN {
        return Err(Error::Guard(format!(
            "pole at z = {} leaves no room for finite differences at (1, 1)",
            1.0 / modulus
        )));
    }
    Ok(shrunk)
}

/// Finite-difference moment oracle: first and second partials of G at (1, 1)
/// by central differences with one Richardson extrapolation level.
///
/// Never the primary route (conditioning degrades near the thermal and
/// squeezed poles, which is why the step shrinks automatically there); it
/// exists to cross-check every closed form through an independent path.
pub fn numeric_moments(gf: &MixtureGF, h: f64) -> Result<MomentSummary> {
    if !(STEP_MIN..=STEP_MAX).contains(&h) {
        return Err(Error::Guard(format!(
            "step size must lie in [{STEP_MIN:e}, {STEP_MAX:e}], got {h}"
        )));
    }
    let h = pole_adjusted_step(gf, h)?;

    let center = gf.eval(1.0, 1.0)?;
    let richardson = |coarse: f64, fine: f64| (4.0 * fine - coarse) / 3.0;

    let d1 = |along_x: bool, step: f64| -> Result<f64> {
        let (hi, lo) = if along_x {
            (gf.eval(1.0 + step, 1.0)?, gf.eval(1.0 - step, 1.0)?)
        } else {
            (gf.eval(1.0, 1.0 + step)?, gf.eval(1.0, 1.0 - step)?)
        };
        Ok((hi - lo) / (2.0 * step))
    };
    let d2 = |along_x: bool, step: f64| -> Result<f64> {
        let (hi, lo) = if along_x {
            (gf.eval(1.0 + step, 1.0)?, gf.eval(1.0 - step, 1.0)?)
        } else {
            (gf.eval(1.0, 1.0 + step)?, gf.eval(1.0, 1.0 - step)?)
        };
        Ok((hi - 2.0 * center + lo) / (step * step))
    };
    let cross = |step: f64| -> Result<f64> {
        Ok((gf.eval(1.0 + step, 1.0 + step)? - gf.eval(1.0 + step, 1.0 - step)?
            - gf.eval(1.0 - step, 1.0 + step)?
            + gf.eval(1.0 - step, 1.0 - step)?)
            / (4.0 * step * step))
    };

    let g_x = richardson(d1(true, h)?, d1(true, h / 2.0)?);
    let g_y = richardson(d1(false, h)?, d1(false, h / 2.0)?);
    let g_xx = richardson(d2(true, h)?, d2(true, h / 2.0)?);
    let g_yy = richardson(d2(false, h)?, d2(false, h / 2.0)?);
    let g_xy = richardson(cross(h)?, cross(h / 2.0)?);

    for v in [g_x, g_y, g_xx, g_yy, g_xy] {
        if !v.is_finite() {
            return Err(Error::Guard(
                "finite differences produced a non-finite intermediate".into(),
            ));
        }
    }

    // G_x = E[m], G_xx = E[m(m-1)], G_xy = E[mk]
    let mean_a = g_x;
    let mean_b = g_y;
    let var_a = (g_xx + mean_a - mean_a * mean_a).max(0.0);
    let var_b = (g_yy + mean_b - mean_b * mean_b).max(0.0);
    let cov = g_xy - mean_a * mean_b;
    let g2 = (gf.det.p() > 0.0 && gf.det.q() > 0.0 && mean_a * mean_b > 0.0)
        .then(|| g_xy / (mean_a * mean_b));
    Ok(MomentSummary::from_moments(
        mean_a, mean_b, var_a, var_b, cov, g2,
    ))
}

/// Joint count probability P(m, k) = sum_n W_n * trinomial(n; m, k) over a
/// prebuilt table. The truncation error is at most the table's tail bound.
pub fn joint_pmf_from_table(table: &WeightTable, det: &DetectorModel, m: u64, k: u64) -> f64 {
    let start = (m + k) as usize; // shorter sequences cannot produce these counts
    table
        .weights()
        .iter()
        .enumerate()
        .skip(start)
        .map(|(n, w)| w * trinomial_pmf(det, n as u64, m, k))
        .sum()
}

/// Joint count probability of the mixed experiment, building a fresh weight
/// table with the given tail tolerance. Prefer [`joint_pmf_from_table`] when
/// evaluating a whole grid.
pub fn joint_pmf_mixture(
    spec: &ExcitationSpec,
    det: &DetectorModel,
    m: u64,
    k: u64,
    tail_tol: f64,
) -> Result<f64> {
    let table = build_weight_table(spec, tail_tol)?;
    Ok(joint_pmf_from_table(&table, det, m, k))
}
