//! Almost-banded QR, triangular solves, dense oracles and conditioning.

pub mod conditioning;
pub mod dense;
pub mod qr;

pub use conditioning::{
    abs_inverse_e_norm, cond_componentwise, conditioning_report, forward_error_bound, kappa_2,
    kappa_inf, ConditioningReport,
};
pub use qr::{q_tail_norm, qr_factor, solve, GivensRotation, QrFactorization, DENSE_CUTOFF};
