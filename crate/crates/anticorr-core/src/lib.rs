//! Counting statistics for single-photon beam-splitter experiments.
//!
//! A sequence of elementary detection experiments, each with exclusive
//! outcomes (detector A, detector B, no detection) at probabilities
//! (p, q, r), produces a trinomially distributed count pair with strictly
//! negative correlation. Randomising the sequence length over an excitation
//! family — fixed number, Poisson, thermal, squeezed, or uniform ("phase") —
//! changes that picture entirely: the mixed counts can anti-bunch, decouple,
//! or bunch, governed solely by the length distribution's factorial moments.
//!
//! The crate provides three independent routes to the same statistics —
//! closed forms, generating-function differentiation, and mixture summation —
//! plus a reproducible Monte Carlo engine that recovers them empirically.

pub mod analytic;
pub mod error;
pub mod excitation;
pub mod gf;
pub mod hermite;
pub mod montecarlo;
pub mod trinomial;

pub use analytic::{
    phase_summary, poisson_summary, squeezed_highsqueeze, squeezed_summary, summary_table,
    thermal_summary, HighSqueezeReport, PhaseMode, SqueezedSummary, SummaryTable,
    SummaryTableParams, SummaryTableRow,
};
pub use error::{Error, Result};
pub use excitation::{
    bose_parameter, build_weight_table, build_weight_table_capped, factorial_moments,
    mehler_check, phase_mu2_as_printed, sample_n, schleich_wheeler, squeezed_alpha_beta,
    weight_pmf, zeta_from_epsilon, ExcitationSpec, FactorialMoments, MehlerCheck, WeightTable,
};
pub use gf::{
    joint_pmf_from_table, joint_pmf_mixture, moments_from_factorial, numeric_moments, MixtureGF,
};
pub use hermite::{hermite_log, HermiteLogSeq};
pub use montecarlo::{
    convergence_sweep, run_elementary, run_sequence, run_series, ElementaryOutcome,
    EmpiricalStats, RunConfig,
};
pub use trinomial::{
    enumerate_exact_moments, fixed_n_moments, sequence_gf, trinomial_pmf, CountPair,
    DetectorModel, MomentSummary,
};
