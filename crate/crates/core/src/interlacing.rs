//! Interlacing between ordinary and symplectic eigenvalues.
//!
//! For a positive definite matrix of order `2n` with eigenvalues `λ` and
//! symplectic eigenvalues `d`,
//!
//! ```text
//! d_j↓ <= λ_j↓   and   λ_j↑ <= d_j↑,   j = 1..n
//! ```
//!
//! where `↓` sorts descending and `↑` ascending. The ascending lists here are
//! reversals of the descending ones.

use alloc::vec::Vec;
use core::fmt;

use crate::linalg;
use crate::matrix::SymmetricMatrix;
use crate::symplectic::{self, SymplecticError};

#[derive(Debug, Clone, PartialEq)]
pub struct InterlacingReport {
    pub order: usize,
    pub lambda_desc: Vec<f64>,
    pub d_desc: Vec<f64>,
    /// `d_desc[j] <= lambda_desc[j] + slack`.
    pub down_ok: Vec<bool>,
    /// `lambda_asc[j] <= d_asc[j] + slack`.
    pub up_ok: Vec<bool>,
    pub slack: f64,
    pub all_ok: bool,
}

impl InterlacingReport {
    pub fn lambda_asc(&self) -> Vec<f64> {
        self.lambda_desc.iter().rev().copied().collect()
    }

    pub fn d_asc(&self) -> Vec<f64> {
        self.d_desc.iter().rev().copied().collect()
    }

    /// Worst violation margin over both families; negative or zero when every
    /// inequality holds without slack.
    pub fn worst_margin(&self) -> f64 {
        let n = self.d_desc.len();
        let lambda_asc = self.lambda_asc();
        let d_asc = self.d_asc();
        (0..n)
            .map(|j| (self.d_desc[j] - self.lambda_desc[j]).max(lambda_asc[j] - d_asc[j]))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InterlacingError {
    /// `lambda` must have exactly twice as many entries as `d`.
    Length {
        lambda: usize,
        d: usize,
    },
    NegativeSlack(f64),
    Symplectic(SymplecticError),
}

impl fmt::Display for InterlacingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InterlacingError::Length { lambda, d } => write!(
                f,
                "expected 2n eigenvalues for n symplectic eigenvalues, got {lambda} and {d}"
            ),
            InterlacingError::NegativeSlack(s) => write!(f, "slack must be >= 0, got {s}"),
            InterlacingError::Symplectic(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for InterlacingError {}

impl From<SymplecticError> for InterlacingError {
    fn from(e: SymplecticError) -> Self {
        InterlacingError::Symplectic(e)
    }
}

fn sorted_desc(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// Checks both inequality families on supplied spectra (any input order).
pub fn interlacing_check(
    lambda: &[f64],
    d: &[f64],
    slack: f64,
) -> Result<InterlacingReport, InterlacingError> {
    if lambda.len() != 2 * d.len() {
        return Err(InterlacingError::Length {
            lambda: lambda.len(),
            d: d.len(),
        });
    }
    if !(slack >= 0.0) {
        return Err(InterlacingError::NegativeSlack(slack));
    }
    let lambda_desc = sorted_desc(lambda);
    let d_desc = sorted_desc(d);
    let n = d_desc.len();

    let down_ok: Vec<bool> = (0..n)
        .map(|j| d_desc[j] <= lambda_desc[j] + slack)
        .collect();
    let up_ok: Vec<bool> = (0..n)
        .map(|j| lambda_desc[2 * n - 1 - j] <= d_desc[n - 1 - j] + slack)
        .collect();
    let all_ok = down_ok.iter().chain(&up_ok).all(|&b| b);
    Ok(InterlacingReport {
        order: 2 * n,
        lambda_desc,
        d_desc,
        down_ok,
        up_ok,
        slack,
        all_ok,
    })
}

/// Slack used for matrix checks: `1e-10·(1 + ‖A‖_max)`.
pub fn default_slack(a: &SymmetricMatrix) -> f64 {
    1e-10 * (1.0 + a.max_abs())
}

/// Computes both spectra of a positive definite matrix and checks them.
///
/// `all_ok == false` on a positive definite input contradicts the inequalities
/// and points at a numerical problem; it is reported, never corrected.
pub fn interlace_matrix(a: &SymmetricMatrix) -> Result<InterlacingReport, InterlacingError> {
    linalg::cholesky_pd(a).map_err(SymplecticError::from)?;
    let lambda = linalg::eigenvalues(a).map_err(SymplecticError::from)?;
    let d = symplectic::symplectic_eigenvalues(a)?;
    interlacing_check(&lambda, &d, default_slack(a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    #[test]
    fn single_mode_closed_form() {
        let r = interlacing_check(&[4.0, 1.0], &[2.0], 0.0).unwrap();
        assert_eq!(r.down_ok, vec![true]);
        assert_eq!(r.up_ok, vec![true]);
        assert!(r.all_ok);
    }

    #[test]
    fn scalar_spectra_hold_with_equality() {
        let r = interlacing_check(&[1.5; 6], &[1.5; 3], 0.0).unwrap();
        assert!(r.all_ok);
        assert_eq!(r.worst_margin(), 0.0);
    }

    #[test]
    fn impossible_spectra_fail() {
        let r = interlacing_check(&[1.0, 1.0], &[2.0], 0.0).unwrap();
        assert_eq!(r.down_ok, vec![false]);
        assert!(!r.all_ok);
    }

    #[test]
    fn input_order_does_not_matter() {
        let a = interlacing_check(&[1.0, 5.0, 3.0, 2.0], &[1.5, 4.0], 0.0).unwrap();
        let b = interlacing_check(&[5.0, 3.0, 2.0, 1.0], &[4.0, 1.5], 0.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn errors() {
        assert_eq!(
            interlacing_check(&[1.0, 2.0, 3.0], &[1.0], 0.0),
            Err(InterlacingError::Length { lambda: 3, d: 1 })
        );
        assert!(matches!(
            interlacing_check(&[1.0, 2.0], &[1.0], -1.0),
            Err(InterlacingError::NegativeSlack(_))
        ));
    }

    #[test]
    fn matrix_fixtures() {
        let r = interlace_matrix(&SymmetricMatrix::identity(4).unwrap()).unwrap();
        assert!(r.all_ok);
        assert!(r.worst_margin().abs() < 1e-14);

        let a = SymmetricMatrix::from_diagonal(&[0.75, 1.5]).unwrap();
        let r = interlace_matrix(&a).unwrap();
        assert_eq!(r.lambda_desc, vec![1.5, 0.75]);
        assert!((r.d_desc[0] - libm::sqrt(1.125)).abs() < 1e-14);
        assert!(r.all_ok);

        let bad = SymmetricMatrix::new(Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]])).unwrap();
        assert!(interlace_matrix(&bad).is_err());
    }
}
