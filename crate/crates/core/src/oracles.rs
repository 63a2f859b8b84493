//! Randomized checks of the min-max and max-min characterizations, the
//! eigenvalue comparison lemma, and finite-order algebraic identities behind
//! compactness arguments.
//!
//! Compactness itself has no finite witness; [`compactness_identity_check`]
//! verifies the exact matrix identities that the infinite-dimensional
//! arguments rest on.
//!
//! Trials are reproducible: trial `t` draws from a ChaCha8 stream seeded with
//! `seed + t`.

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, LinalgError, PSD_TOL};
use crate::matrix::{Matrix, SymmetricMatrix};
use crate::sample::{dot, gaussian_vec};
use crate::symplectic::standard_j;

/// Absolute tolerance of the one-sided bounds and the equality checks.
pub const PROBE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    /// `j` must lie in `1..=order`.
    Index {
        j: usize,
        order: usize,
    },
    NoTrials,
    ShapeMismatch {
        left: usize,
        right: usize,
    },
    /// `A − B` is not positive semidefinite.
    NotOrdered {
        min_eigenvalue: f64,
    },
    ZeroAlpha,
    Linalg(LinalgError),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::Index { j, order } => write!(f, "index {j} outside 1..={order}"),
            OracleError::NoTrials => write!(f, "at least one trial is required"),
            OracleError::ShapeMismatch { left, right } => {
                write!(f, "orders differ: {left} vs {right}")
            }
            OracleError::NotOrdered { min_eigenvalue } => {
                write!(
                    f,
                    "A - B is not positive semidefinite (min eigenvalue {min_eigenvalue:e})"
                )
            }
            OracleError::ZeroAlpha => write!(f, "alpha must be nonzero"),
            OracleError::Linalg(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for OracleError {}

impl From<LinalgError> for OracleError {
    fn from(e: LinalgError) -> Self {
        OracleError::Linalg(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    /// 1-based index `j`.
    pub target_index: usize,
    /// `λ_j` (descending order).
    pub reference_value: f64,
    /// Worst sampled bound: the smallest sampled maximum for min-max probes,
    /// the largest sampled minimum for max-min probes.
    pub sampled_bound: f64,
    /// Bound attained by the eigenvector-aligned subspace.
    pub optimal_bound: f64,
    pub achieved_equality: bool,
    pub trials: usize,
    /// Trials whose bound fell on the wrong side of `λ_j` by more than
    /// [`PROBE_TOL`].
    pub violations: usize,
}

impl ProbeResult {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.achieved_equality
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64))
}

/// Orthonormal basis of `count` random directions, orthogonal to `against`.
fn random_frame<R: Rng + ?Sized>(
    rng: &mut R,
    order: usize,
    count: usize,
    against: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = against.to_vec();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut v = gaussian_vec(rng, order);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = libm::sqrt(dot(&v, &v));
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v.clone());
            out.push(v);
        }
    }
    out
}

/// Spectrum of `QᵀAQ` for orthonormal columns `Q`.
fn compressed(a: &Matrix, q: &[Vec<f64>]) -> Result<Vec<f64>, LinalgError> {
    let q = Matrix::from_columns(q);
    linalg::eigenvalues(&q.tr_matmul(&a.matmul(&q)))
}

fn check_probe(a: &SymmetricMatrix, j: usize, trials: usize) -> Result<(), OracleError> {
    if j == 0 || j > a.order() {
        return Err(OracleError::Index {
            j,
            order: a.order(),
        });
    }
    if trials == 0 {
        return Err(OracleError::NoTrials);
    }
    Ok(())
}

/// `λ_j = min over (j−1)-dim M of max over unit x ⊥ M of ⟨Ax, x⟩`.
///
/// Each trial samples `M` and records the maximum over `M⊥` (the top
/// eigenvalue of the compression), which must not fall below `λ_j`.
pub fn minmax_probe(
    a: &SymmetricMatrix,
    j: usize,
    trials: usize,
    seed: u64,
) -> Result<ProbeResult, OracleError> {
    check_probe(a, j, trials)?;
    let order = a.order();
    let eig = linalg::sym_eigen(a)?;
    let lambda = eig.values[j - 1];

    let mut sampled_bound = f64::INFINITY;
    let mut violations = 0;
    for t in 0..trials {
        let bound = if j == 1 {
            eig.max()
        } else {
            let mut rng = trial_rng(seed, t);
            let m = random_frame(&mut rng, order, j - 1, &[]);
            let complement = random_frame(&mut rng, order, order - j + 1, &m);
            compressed(a, &complement)?[0]
        };
        if bound < lambda - PROBE_TOL {
            violations += 1;
        }
        sampled_bound = sampled_bound.min(bound);
    }

    let tail: Vec<Vec<f64>> = (j - 1..order).map(|k| eig.vectors.column(k)).collect();
    let optimal_bound = compressed(a, &tail)?[0];
    Ok(ProbeResult {
        target_index: j,
        reference_value: lambda,
        sampled_bound,
        optimal_bound,
        achieved_equality: (optimal_bound - lambda).abs() <= PROBE_TOL,
        trials,
        violations,
    })
}

/// `λ_j = max over j-dim N of min over unit x ∈ N of ⟨Ax, x⟩`.
///
/// Each trial samples `N` and records the minimum over it (the bottom
/// eigenvalue of the compression), which must not exceed `λ_j`.
pub fn maxmin_probe(
    a: &SymmetricMatrix,
    j: usize,
    trials: usize,
    seed: u64,
) -> Result<ProbeResult, OracleError> {
    check_probe(a, j, trials)?;
    let order = a.order();
    let eig = linalg::sym_eigen(a)?;
    let lambda = eig.values[j - 1];

    let mut sampled_bound = f64::NEG_INFINITY;
    let mut violations = 0;
    for t in 0..trials {
        let bound = if j == order {
            eig.min()
        } else {
            let mut rng = trial_rng(seed, t);
            let n = random_frame(&mut rng, order, j, &[]);
            *compressed(a, &n)?.last().expect("j >= 1")
        };
        if bound > lambda + PROBE_TOL {
            violations += 1;
        }
        sampled_bound = sampled_bound.max(bound);
    }

    let head: Vec<Vec<f64>> = (0..j).map(|k| eig.vectors.column(k)).collect();
    let optimal_bound = *compressed(a, &head)?.last().expect("j >= 1");
    Ok(ProbeResult {
        target_index: j,
        reference_value: lambda,
        sampled_bound,
        optimal_bound,
        achieved_equality: (optimal_bound - lambda).abs() <= PROBE_TOL,
        trials,
        violations,
    })
}

/// If `A − B ⪰ 0` then `λ_j(A) ≥ λ_j(B)` for every `j`. Returns whether the
/// conclusion holds within `1e-8·(1 + ‖A‖_max)`; an unordered pair is a
/// precondition error.
pub fn monotone_eig_check(a: &SymmetricMatrix, b: &SymmetricMatrix) -> Result<bool, OracleError> {
    if a.order() != b.order() {
        return Err(OracleError::ShapeMismatch {
            left: a.order(),
            right: b.order(),
        });
    }
    let scale = 1.0 + a.max_abs().max(b.max_abs());
    let gap_min = linalg::sym_eigen(&a.sub(b))?.min();
    if gap_min < -PSD_TOL * scale {
        return Err(OracleError::NotOrdered {
            min_eigenvalue: gap_min,
        });
    }
    let la = linalg::eigenvalues(a)?;
    let lb = linalg::eigenvalues(b)?;
    let tol = 1e-8 * (1.0 + a.max_abs());
    Ok(la.iter().zip(&lb).all(|(x, y)| *x >= y - tol))
}

/// Max-norm residuals of three identities for positive definite `T` and
/// `alpha ≠ 0`:
///
/// ```text
/// (i)   (JT)² + α²I = J(T−αI)J(T+αI) − αJ(T−αI)J − α(T−αI)
/// (ii)  T⁻¹ − α⁻¹I = −α⁻¹T⁻¹(T−αI)
/// (iii) (√T J √T)ᵀ(√T J √T) = −√T (JT)² (√T)⁻¹
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals {
    pub shifted_square: f64,
    pub inverse: f64,
    pub similarity: f64,
    /// `1e-8·(1 + ‖T‖_max²)`.
    pub bound: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.shifted_square.max(self.inverse).max(self.similarity)
    }

    pub fn within_bound(&self) -> bool {
        self.max() <= self.bound
    }
}

pub fn compactness_identity_check(
    t: &SymmetricMatrix,
    alpha: f64,
) -> Result<IdentityResiduals, OracleError> {
    if alpha == 0.0 {
        return Err(OracleError::ZeroAlpha);
    }
    linalg::cholesky_pd(t)?;
    let n = t.modes();
    let order = t.order();
    let j = standard_j(n);
    let id = Matrix::identity(order);
    let eig = linalg::sym_eigen(t)?;
    let t_inv = eig.map_spectrum(|x| 1.0 / x);
    let root = eig.map_spectrum(libm::sqrt);
    let root_inv = eig.map_spectrum(|x| 1.0 / libm::sqrt(x));

    let jt = j.matmul(t);
    let jt2 = jt.matmul(&jt);
    let minus = t.shift(-alpha);
    let plus = t.shift(alpha);

    let lhs = jt2.shift(alpha * alpha);
    let jm = j.matmul(&minus);
    let rhs = jm
        .matmul(&j)
        .matmul(&plus)
        .sub(&jm.matmul(&j).scale(alpha))
        .sub(&minus.scale(alpha));
    let shifted_square = lhs.max_abs_diff(&rhs);

    let lhs = t_inv.sub(&id.scale(1.0 / alpha));
    let rhs = t_inv.matmul(&minus).scale(-1.0 / alpha);
    let inverse = lhs.max_abs_diff(&rhs);

    let s = root.matmul(&j).matmul(&root);
    let lhs = s.tr_matmul(&s);
    let rhs = root.matmul(&jt2).matmul(&root_inv).scale(-1.0);
    let similarity = lhs.max_abs_diff(&rhs);

    let tm = t.max_abs();
    Ok(IdentityResiduals {
        shifted_square,
        inverse,
        similarity,
        bound: 1e-8 * (1.0 + tm * tm),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;

    fn diag(v: &[f64]) -> SymmetricMatrix {
        SymmetricMatrix::from_diagonal(v).unwrap()
    }

    #[test]
    fn first_index_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = SymmetricMatrix::new(sample::random_symmetric(&mut rng, 6, 1.0)).unwrap();
        let r = minmax_probe(&a, 1, 5, 0).unwrap();
        assert_eq!(r.sampled_bound, r.reference_value);
        assert!(r.achieved_equality);
        let r = maxmin_probe(&a, 6, 5, 0).unwrap();
        assert_eq!(r.sampled_bound, r.reference_value);
    }

    #[test]
    fn diagonal_fixtures() {
        let a = diag(&[3.0, 2.0, 1.0, 0.0]);
        let r = minmax_probe(&a, 2, 20, 7).unwrap();
        assert!((r.optimal_bound - 2.0).abs() < 1e-12);
        assert!(r.passed());
        let r = maxmin_probe(&a, 2, 20, 7).unwrap();
        assert!((r.optimal_bound - 2.0).abs() < 1e-12);
        assert!(r.passed());
    }

    #[test]
    fn random_probes_are_one_sided() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = SymmetricMatrix::new(sample::random_symmetric(&mut rng, 8, 1.0)).unwrap();
        let up = minmax_probe(&a, 3, 100, 42).unwrap();
        assert_eq!(up.violations, 0);
        assert!(up.sampled_bound >= up.reference_value - PROBE_TOL);
        let down = maxmin_probe(&a, 3, 100, 42).unwrap();
        assert_eq!(down.violations, 0);
        assert!(down.sampled_bound <= down.reference_value + PROBE_TOL);
        assert_eq!(minmax_probe(&a, 3, 100, 42).unwrap(), up);
    }

    #[test]
    fn probe_errors() {
        let a = diag(&[1.0, 2.0]);
        assert_eq!(
            minmax_probe(&a, 0, 1, 0),
            Err(OracleError::Index { j: 0, order: 2 })
        );
        assert_eq!(
            maxmin_probe(&a, 3, 1, 0),
            Err(OracleError::Index { j: 3, order: 2 })
        );
        assert_eq!(minmax_probe(&a, 1, 0, 0), Err(OracleError::NoTrials));
    }

    #[test]
    fn monotone_fixtures() {
        let b = diag(&[2.0, 1.0]);
        assert!(monotone_eig_check(&b, &b).unwrap());
        assert!(monotone_eig_check(&diag(&[3.0, 1.0]), &b).unwrap());
        assert!(matches!(
            monotone_eig_check(&b, &diag(&[3.0, 1.0])),
            Err(OracleError::NotOrdered { .. })
        ));
    }

    #[test]
    fn identity_fixtures() {
        let r = compactness_identity_check(&SymmetricMatrix::identity(2).unwrap(), 1.0).unwrap();
        assert_eq!(r.max(), 0.0);
        let r = compactness_identity_check(&diag(&[2.0, 2.0]), 1.0).unwrap();
        assert!(r.max() <= 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = SymmetricMatrix::new(sample::random_pd(&mut rng, 8)).unwrap();
        let r = compactness_identity_check(&t, -1.5).unwrap();
        assert!(r.max() <= 1e-8, "{r:?}");
        assert_eq!(
            compactness_identity_check(&t, 0.0),
            Err(OracleError::ZeroAlpha)
        );
        assert!(compactness_identity_check(&diag(&[1.0, -1.0]), 1.0).is_err());
    }
}
