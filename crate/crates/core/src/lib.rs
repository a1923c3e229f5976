//! Numerical laboratory for lower bounds on Kolmogorov widths of `W^1_1`
//! in `L_q`, `2 < q < ∞`.
//!
//! The step functions `chi_t` are analysed in the `L_inf`-normalised Haar
//! system across a band of dyadic levels. Their coefficient profiles
//! `X(t)`, the certificate family `Z(t)` and any approximant family `H(t)`
//! drawn from an `n`-dimensional subspace feed a Hölder duality bound on the
//! `q`-average approximation error.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod certificate;
pub mod error;
pub mod experiment;
pub mod haar;
pub mod oracle;
pub mod profiles;

pub use approx::{
    best_l2_family, orthonormalize, project, sup_error_scan, ApproximantFamily, ApproximantRule,
    ErrorScan, ScanGrid, Subspace,
};
pub use certificate::{
    certify_subspace, compute_i1, compute_i2, compute_i3, holder_lower_bound, i3_growth_constant, level_range,
    projected_isotropy, CertificateConfig, CertificateReport, Dichotomy,
};
pub use error::{Error, Result};
pub use haar::{
    haar_coefficient, pack_lq_norm_q, weighted_inner, weighted_norm, CoefVector, DyadicIndex,
    LevelRange, PiecewisePolynomial,
};
pub use profiles::{x_profile, x_vector, z_gram, z_moments, z_profile, z_vector, StepParam, ZConstants};
