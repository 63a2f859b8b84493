//! Symplectic form, symplectic eigenvalues and the Williamson normal form.
//!
//! Both the spectrum and the decomposition go through the skew-symmetric
//! matrix `S = √A · J · √A`. Its square satisfies `−S² = SᵀS`, a symmetric
//! positive definite matrix whose eigenvalues are the squared symplectic
//! eigenvalues `d_j²`, each appearing twice. This keeps every computation
//! inside the symmetric Jacobi solver.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg::{self, LinalgError};
use crate::matrix::{Matrix, SymmetricMatrix};
use crate::sample::dot;

/// Relative gap below which two eigenvalues of `−S²` are treated as equal.
pub const PAIRING_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub enum SymplecticError {
    Linalg(LinalgError),
    OddOrder {
        order: usize,
    },
    /// Sorted eigenvalues of `−S²` at positions `index`, `index + 1` are not
    /// within the pairing tolerance.
    Pairing {
        index: usize,
        relative_gap: f64,
    },
    /// The eigenspace of `−S²` could not be split into `(u, v)` pairs.
    Degeneracy {
        cluster_start: usize,
        cluster_len: usize,
    },
}

impl fmt::Display for SymplecticError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymplecticError::Linalg(e) => e.fmt(f),
            SymplecticError::OddOrder { order } => {
                write!(f, "symplectic structure needs an even order, got {order}")
            }
            SymplecticError::Pairing {
                index,
                relative_gap,
            } => write!(
                f,
                "eigenvalues {index} and {} of -S^2 do not pair (relative gap {relative_gap:e})",
                index + 1
            ),
            SymplecticError::Degeneracy {
                cluster_start,
                cluster_len,
            } => write!(
                f,
                "cannot pair eigenspace cluster of size {cluster_len} starting at {cluster_start}"
            ),
        }
    }
}

impl core::error::Error for SymplecticError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            SymplecticError::Linalg(e) => Some(e),
            _ => None,
        }
    }
}

impl From<LinalgError> for SymplecticError {
    fn from(e: LinalgError) -> Self {
        SymplecticError::Linalg(e)
    }
}

/// `J = [[0, I_n], [−I_n, 0]]`.
pub fn standard_j(n: usize) -> Matrix {
    let mut j = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// Whether `‖MᵀJM − J‖_max <= tol`.
pub fn is_symplectic(m: &Matrix, tol: f64) -> Result<bool, SymplecticError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        }
        .into());
    }
    if !m.rows().is_multiple_of(2) || m.rows() == 0 {
        return Err(SymplecticError::OddOrder { order: m.rows() });
    }
    Ok(symplectic_residual(m) <= tol)
}

/// `‖MᵀJM − J‖_max` for a square matrix of even order.
pub fn symplectic_residual(m: &Matrix) -> f64 {
    let j = standard_j(m.rows() / 2);
    m.tr_matmul(&j.matmul(m)).max_abs_diff(&j)
}

/// `√A`, `S = √A·J·√A` and the eigendecomposition of `SᵀS = −S²`.
struct SkewCore {
    sqrt_a: Matrix,
    skew: Matrix,
    gram: linalg::EigenDecomposition,
}

impl SkewCore {
    fn new(a: &SymmetricMatrix) -> Result<Self, SymplecticError> {
        linalg::cholesky_pd(a)?;
        let sqrt_a = linalg::sqrt_psd(a)?;
        let j = standard_j(a.modes());
        let skew = sqrt_a.matmul(&j).matmul(&sqrt_a);
        let gram = linalg::sym_eigen(&skew.tr_matmul(&skew))?;
        Ok(Self { sqrt_a, skew, gram })
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Symplectic eigenvalues `d_1 >= ... >= d_n > 0` of a positive definite
/// matrix of order `2n`.
///
/// Eigenvalues of `−S²` are paired off two at a time in sorted order; a pair
/// whose relative gap exceeds `1e-7` is reported as
/// [`SymplecticError::Pairing`].
pub fn symplectic_eigenvalues(a: &SymmetricMatrix) -> Result<Vec<f64>, SymplecticError> {
    let core = SkewCore::new(a)?;
    pair_gram_spectrum(&core.gram.values)
}

fn pair_gram_spectrum(values: &[f64]) -> Result<Vec<f64>, SymplecticError> {
    values
        .chunks_exact(2)
        .enumerate()
        .map(|(k, pair)| {
            let gap = relative_gap(pair[0], pair[1]);
            if gap > PAIRING_TOL {
                Err(SymplecticError::Pairing {
                    index: 2 * k,
                    relative_gap: gap,
                })
            } else {
                Ok(libm::sqrt(0.5 * (pair[0] + pair[1]).max(0.0)))
            }
        })
        .collect()
}

/// `A = Mᵀ · (D ⊕ D) · M` with `M` symplectic and `D = diag(d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WilliamsonForm {
    pub m: Matrix,
    /// Symplectic eigenvalues, descending.
    pub d: Vec<f64>,
    /// `‖Mᵀ(D ⊕ D)M − A‖_max`.
    pub residual_factor: f64,
    /// `‖MᵀJM − J‖_max`.
    pub residual_symplectic: f64,
}

impl WilliamsonForm {
    /// `Mᵀ(D ⊕ D)M`.
    pub fn reconstruct(&self) -> Matrix {
        let mut dd = self.d.clone();
        dd.extend_from_slice(&self.d);
        self.m
            .tr_matmul(&Matrix::from_diagonal(&dd).matmul(&self.m))
    }

    /// Whether both residuals meet the published bounds for the input `a`.
    pub fn within_tolerance(&self, a: &Matrix) -> bool {
        self.residual_factor <= 1e-8 * (1.0 + a.max_abs()) && self.residual_symplectic <= 1e-8
    }
}

/// Gram–Schmidt `v` against `basis` (two passes) and return the remaining norm.
fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    libm::sqrt(dot(v, v))
}

/// Constructive Williamson decomposition.
///
/// With `W = √A` and `S = W·J·W`, eigenvectors of `−S²` are grouped into
/// clusters of (relatively) equal eigenvalue. Inside a cluster a unit vector
/// `u` is chosen, its partner is `v ∝ −S·u`, and further vectors are
/// orthogonalized against the pairs found so far. The orthogonal matrix
/// `O = [u_1 … u_n | v_1 … v_n]` then satisfies `OᵀSO = [[0, D], [−D, 0]]`
/// and `M = (D ⊕ D)^{−1/2} · Oᵀ · W`.
///
/// `M` is not unique; only the residuals are meaningful.
pub fn williamson(a: &SymmetricMatrix) -> Result<WilliamsonForm, SymplecticError> {
    let n = a.modes();
    let order = a.order();
    let core = SkewCore::new(a)?;
    let values = &core.gram.values;

    let mut pairs: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::with_capacity(n);
    let mut start = 0;
    while start < order {
        let mut end = start + 1;
        while end < order && relative_gap(values[end - 1], values[end]) <= PAIRING_TOL {
            end += 1;
        }
        let len = end - start;
        let degenerate = SymplecticError::Degeneracy {
            cluster_start: start,
            cluster_len: len,
        };
        if len % 2 != 0 {
            return Err(degenerate);
        }

        let candidates: Vec<Vec<f64>> = (start..end).map(|j| core.gram.vectors.column(j)).collect();
        let mut local: Vec<Vec<f64>> = Vec::with_capacity(len);
        for _ in 0..len / 2 {
            // the candidate with the largest component outside the span so far
            let (u, norm) = candidates
                .iter()
                .map(|c| {
                    let mut r = c.clone();
                    let norm = orthogonalize(&mut r, &local);
                    (r, norm)
                })
                .fold(
                    (vec![], -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
            if norm < 1e-6 {
                return Err(degenerate);
            }
            let u: Vec<f64> = u.iter().map(|x| x / norm).collect();

            let mut v: Vec<f64> = core.skew.matvec(&u).iter().map(|x| -x).collect();
            local.push(u.clone());
            let vnorm = orthogonalize(&mut v, &local);
            if vnorm <= 0.0 {
                return Err(degenerate);
            }
            v.iter_mut().for_each(|x| *x /= vnorm);
            let d = dot(&u, &core.skew.matvec(&v));
            if !(d > 0.0) {
                return Err(degenerate);
            }
            local.push(v.clone());
            pairs.push((d, u, v));
        }
        start = end;
    }

    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let d: Vec<f64> = pairs.iter().map(|p| p.0).collect();

    // rows of Oᵀ scaled by d^{-1/2}, then multiplied by W
    let mut scaled_ot = Matrix::zeros(order, order);
    for (i, (di, u, v)) in pairs.iter().enumerate() {
        let s = 1.0 / libm::sqrt(*di);
        for k in 0..order {
            scaled_ot[(i, k)] = s * u[k];
            scaled_ot[(n + i, k)] = s * v[k];
        }
    }
    let m = scaled_ot.matmul(&core.sqrt_a);

    let mut form = WilliamsonForm {
        m,
        d,
        residual_factor: 0.0,
        residual_symplectic: 0.0,
    };
    form.residual_factor = form.reconstruct().max_abs_diff(a);
    form.residual_symplectic = symplectic_residual(&form.m);
    Ok(form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sym(m: Matrix) -> SymmetricMatrix {
        SymmetricMatrix::new(m).unwrap()
    }

    #[test]
    fn j_blocks() {
        assert_eq!(
            standard_j(1),
            Matrix::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]])
        );
        let j = standard_j(2);
        assert_eq!(j[(0, 2)], 1.0);
        assert_eq!(j[(1, 3)], 1.0);
        assert_eq!(j[(2, 0)], -1.0);
        assert_eq!(j[(3, 1)], -1.0);
        assert_eq!(j.matmul(&j), Matrix::identity(4).scale(-1.0));
        assert_eq!(j.transpose(), j.scale(-1.0));
    }

    #[test]
    fn symplectic_membership() {
        assert!(is_symplectic(&Matrix::identity(4), 0.0).unwrap());
        assert!(is_symplectic(&Matrix::from_diagonal(&[2.0, 0.5]), 1e-15).unwrap());
        assert!(!is_symplectic(&Matrix::from_diagonal(&[2.0, 2.0]), 1e-8).unwrap());
        assert_eq!(
            is_symplectic(&Matrix::identity(3), 1e-8),
            Err(SymplecticError::OddOrder { order: 3 })
        );
    }

    #[test]
    fn spectrum_of_identity_and_diagonal_pairs() {
        let d = symplectic_eigenvalues(&SymmetricMatrix::identity(6).unwrap()).unwrap();
        assert_eq!(d.len(), 3);
        assert!(d.iter().all(|x| (x - 1.0).abs() < 1e-14));

        let d =
            symplectic_eigenvalues(&SymmetricMatrix::from_diagonal(&[1.0, 4.0]).unwrap()).unwrap();
        assert!((d[0] - 2.0).abs() < 1e-14);

        let d =
            symplectic_eigenvalues(&SymmetricMatrix::from_diagonal(&[0.75, 1.5]).unwrap()).unwrap();
        assert!((d[0] - libm::sqrt(1.125)).abs() < 1e-14);
    }

    #[test]
    fn spectrum_rejects_non_pd() {
        let a = sym(Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]));
        assert!(matches!(
            symplectic_eigenvalues(&a),
            Err(SymplecticError::Linalg(LinalgError::NotPd { index: 2, .. }))
        ));
    }

    #[test]
    fn williamson_scalar_matrix() {
        let a = sym(Matrix::identity(6).scale(2.5));
        let w = williamson(&a).unwrap();
        assert!(w.d.iter().all(|x| (x - 2.5).abs() < 1e-12));
        assert!(w.residual_factor <= 1e-10);
        assert!(w.residual_symplectic <= 1e-10);
        // orthogonal as well as symplectic
        assert!(w.m.tr_matmul(&w.m).max_abs_diff(&Matrix::identity(6)) < 1e-10);
    }

    #[test]
    fn williamson_recovers_planted_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let q = sample::random_symplectic(&mut rng, 3, 0.5);
        let dd = Matrix::from_diagonal(&[3.0, 2.0, 1.0, 3.0, 2.0, 1.0]);
        let a = sym(q.tr_matmul(&dd.matmul(&q)));
        let w = williamson(&a).unwrap();
        for (got, want) in w.d.iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - want).abs() <= 1e-7, "{:?}", w.d);
        }
        assert!(w.within_tolerance(&a));
    }

    #[test]
    fn williamson_degenerate_cluster() {
        // d = (2, 2, 1) with a genuinely 4-dimensional cluster
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = sample::random_symplectic(&mut rng, 3, 0.4);
        let dd = Matrix::from_diagonal(&[2.0, 2.0, 1.0, 2.0, 2.0, 1.0]);
        let a = sym(q.tr_matmul(&dd.matmul(&q)));
        let w = williamson(&a).unwrap();
        assert!((w.d[0] - 2.0).abs() < 1e-8 && (w.d[1] - 2.0).abs() < 1e-8);
        assert!(
            w.within_tolerance(&a),
            "{} {}",
            w.residual_factor,
            w.residual_symplectic
        );
    }

    #[test]
    fn williamson_random_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = sym(sample::random_pd(&mut rng, 8));
        let w = williamson(&a).unwrap();
        assert!(
            w.within_tolerance(&a),
            "{} {}",
            w.residual_factor,
            w.residual_symplectic
        );
        let d = symplectic_eigenvalues(&a).unwrap();
        for (x, y) in w.d.iter().zip(&d) {
            assert!((x - y).abs() <= 1e-8 * y);
        }
    }
}
