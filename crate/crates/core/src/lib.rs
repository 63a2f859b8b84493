#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Symplectic spectral computations on dense real matrices.
//!
//! The crate is `no_std` (it needs `alloc`) and has no IO. It provides:
//!
//! * dense symmetric linear algebra ([`linalg`]): Jacobi eigensolver, PSD
//!   square root, Cholesky positive-definiteness test, Hermitian PSD test via
//!   the real embedding;
//! * symplectic eigenvalues and a constructive Williamson normal form
//!   ([`symplectic`]);
//! * the eigenvalue / symplectic-eigenvalue interlacing inequalities
//!   ([`interlacing`]);
//! * a small expression language for sequences and kernels ([`expr`]);
//! * operator models (diagonal pairs, infinite matrices, integral kernels)
//!   and their finite sections ([`model`]);
//! * Gaussian-covariance and positive-AN classification heuristics
//!   ([`classify`]);
//! * randomized min-max / max-min and identity oracles ([`oracles`]).

extern crate alloc;

pub mod classify;
pub mod expr;
pub mod interlacing;
pub mod linalg;
pub mod matrix;
pub mod model;
pub mod oracles;
pub mod quadrature;
pub mod sample;
pub mod symplectic;

pub use classify::{ClassificationReport, ConditionVerdict, VerdictStatus};
pub use expr::Expr;
pub use interlacing::InterlacingReport;
pub use linalg::{EigenDecomposition, LinalgError};
pub use matrix::{Matrix, SymmetricMatrix};
pub use model::{OperatorModel, TruncationReport};
pub use oracles::{IdentityResiduals, ProbeResult};
pub use symplectic::WilliamsonForm;
