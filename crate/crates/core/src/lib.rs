//! Two-dimensional scalar inverse-scattering toolkit.
//!
//! Implements the full desk-scale pipeline for TM microwave imaging:
//! method-of-moments forward solves of the Lippmann-Schwinger state
//! equation, a Green's-function split of the internal radiation operator
//! into its entire (J_0) and singular (Y_0) parts, extraction of the
//! J_0 field contribution directly from measured data, linearized
//! (Born-type) inversions with TSVD regularization, and full nonlinear
//! contrast source inversion under either field model.

pub mod cli;
pub mod csi;
pub mod forward;
pub mod linalg;
pub mod linear_inv;
pub mod operators;
pub mod reduced_field;
pub mod scene;
pub mod specfun;
