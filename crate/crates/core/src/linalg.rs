//! Dense symmetric linear algebra.
//!
//! Everything here works on [`Matrix`] of any square order; the even-order
//! restriction of [`crate::SymmetricMatrix`] only matters for the symplectic
//! layer. Tolerances are relative to `‖A‖_max` so verdicts do not depend on
//! the overall scale of the input.

use alloc::vec::Vec;
use core::fmt;

use crate::matrix::Matrix;

/// Off-diagonal Frobenius norm target, relative to `‖A‖_F`.
const JACOBI_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;
/// Relative floor below which a negative eigenvalue is treated as rounding.
pub const PSD_TOL: f64 = 1e-10;
/// Relative floor for Cholesky pivots.
pub const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    NotSquare {
        rows: usize,
        cols: usize,
    },
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    NonFinite,
    /// Jacobi sweeps hit the cap; carries the remaining off-diagonal norm.
    NotConverged {
        off_diagonal: f64,
        sweeps: usize,
    },
    NotPsd {
        min_eigenvalue: f64,
        tolerance: f64,
    },
    /// Cholesky failed at the given 1-based leading minor.
    NotPd {
        index: usize,
        pivot: f64,
    },
    NotSymmetric {
        asymmetry: f64,
    },
    NotSkew {
        asymmetry: f64,
    },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::NotSquare { rows, cols } => {
                write!(f, "matrix must be square, got {rows}x{cols}")
            }
            LinalgError::ShapeMismatch { expected, got } => write!(
                f,
                "dimension mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            LinalgError::NonFinite => write!(f, "matrix has non-finite entries"),
            LinalgError::NotConverged {
                off_diagonal,
                sweeps,
            } => write!(
                f,
                "Jacobi eigensolver did not converge after {sweeps} sweeps \
                 (off-diagonal norm {off_diagonal:e})"
            ),
            LinalgError::NotPsd {
                min_eigenvalue,
                tolerance,
            } => write!(
                f,
                "matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:e} \
                 below -{tolerance:e}"
            ),
            LinalgError::NotPd { index, pivot } => write!(
                f,
                "matrix is not positive definite: leading minor {index} has pivot {pivot:e}"
            ),
            LinalgError::NotSymmetric { asymmetry } => {
                write!(f, "matrix is not symmetric (max |A - Aᵀ| = {asymmetry:e})")
            }
            LinalgError::NotSkew { asymmetry } => {
                write!(
                    f,
                    "matrix is not skew-symmetric (max |Y + Yᵀ| = {asymmetry:e})"
                )
            }
        }
    }
}

impl core::error::Error for LinalgError {}

/// Eigenvalues sorted descending and the matching orthonormal eigenvectors
/// (column `j` belongs to `values[j]`).
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl EigenDecomposition {
    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    /// `V · diag(f(λ)) · Vᵀ`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let s = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        let mut out = scaled.matmul(&self.vectors.transpose());
        symmetrize_in_place(&mut out);
        out
    }

    /// `V · diag(λ) · Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        self.map_spectrum(|l| l)
    }
}

fn symmetrize_in_place(m: &mut Matrix) {
    let n = m.rows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn check_square(a: &Matrix) -> Result<(), LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    Ok(())
}

/// Symmetric eigendecomposition by cyclic Jacobi sweeps with threshold
/// pivoting.
///
/// The input is symmetrized first. Sweeps stop once the off-diagonal
/// Frobenius norm is at most `1e-13·‖A‖_F`; after 100 sweeps the solver gives
/// up with [`LinalgError::NotConverged`]. Eigenvalues come back sorted
/// descending (stable with respect to the diagonal order, so ties keep
/// sweep order), and each eigenvector has its first entry with magnitude
/// above `1e-12` made positive.
pub fn sym_eigen(a: &Matrix) -> Result<EigenDecomposition, LinalgError> {
    check_square(a)?;
    let n = a.rows();
    let mut w = a.symmetrized();
    let mut v = Matrix::identity(n);
    let scale = w.frobenius();

    let mut off = off_diagonal_norm(&w);
    let mut sweep = 0;
    while off > JACOBI_TOL * scale {
        if sweep == JACOBI_MAX_SWEEPS {
            return Err(LinalgError::NotConverged {
                off_diagonal: off,
                sweeps: sweep,
            });
        }
        sweep += 1;
        let sum_abs: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| w[(p, q)].abs())
            .sum();
        // early sweeps skip small pivots to save work
        let threshold = if sweep < 4 {
            0.2 * sum_abs / (n * n) as f64
        } else {
            0.0
        };

        for p in 0..n {
            for q in (p + 1)..n {
                let apq = w[(p, q)];
                let g = 100.0 * apq.abs();
                let app = w[(p, p)];
                let aqq = w[(q, q)];
                if sweep > 4 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    w[(p, q)] = 0.0;
                    w[(q, p)] = 0.0;
                    continue;
                }
                if apq.abs() <= threshold || apq == 0.0 {
                    continue;
                }
                rotate(&mut w, &mut v, p, q);
            }
        }
        off = off_diagonal_norm(&w);
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag = w.diagonal();
    // slice::sort_by is stable
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));

    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        if let Some(first) = col.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                col.iter_mut().for_each(|x| *x = -*x);
            }
        }
        vectors.set_column(dst, &col);
    }
    Ok(EigenDecomposition { values, vectors })
}

fn off_diagonal_norm(w: &Matrix) -> f64 {
    let n = w.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += w[(i, j)] * w[(i, j)];
            }
        }
    }
    libm::sqrt(s)
}

/// One Jacobi rotation annihilating `w[p][q]`, accumulated into `v`.
fn rotate(w: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let n = w.rows();
    let apq = w[(p, q)];
    let h = w[(q, q)] - w[(p, p)];
    let g = 100.0 * apq.abs();
    let t = if h.abs() + g == h.abs() {
        apq / h
    } else {
        let theta = 0.5 * h / apq;
        let t = 1.0 / (theta.abs() + libm::sqrt(1.0 + theta * theta));
        if theta < 0.0 {
            -t
        } else {
            t
        }
    };
    let c = 1.0 / libm::sqrt(1.0 + t * t);
    let s = t * c;
    let tau = s / (1.0 + c);

    w[(p, p)] -= t * apq;
    w[(q, q)] += t * apq;
    w[(p, q)] = 0.0;
    w[(q, p)] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = w[(r, p)];
        let arq = w[(r, q)];
        let new_rp = arp - s * (arq + tau * arp);
        let new_rq = arq + s * (arp - tau * arq);
        w[(r, p)] = new_rp;
        w[(p, r)] = new_rp;
        w[(r, q)] = new_rq;
        w[(q, r)] = new_rq;
    }
    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = vrp - s * (vrq + tau * vrp);
        v[(r, q)] = vrq + s * (vrp - tau * vrq);
    }
}

/// Eigenvalues only, sorted descending.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<f64>, LinalgError> {
    sym_eigen(a).map(|e| e.values)
}

/// Principal square root of a positive semidefinite matrix.
///
/// Eigenvalues in `[-1e-10·‖A‖_max, 0)` are clamped to zero; anything more
/// negative is rejected with [`LinalgError::NotPsd`].
pub fn sqrt_psd(a: &Matrix) -> Result<Matrix, LinalgError> {
    let eig = sym_eigen(a)?;
    let tol = PSD_TOL * a.max_abs();
    let min = eig.min();
    if min < -tol {
        return Err(LinalgError::NotPsd {
            min_eigenvalue: min,
            tolerance: tol,
        });
    }
    Ok(eig.map_spectrum(|l| libm::sqrt(l.max(0.0))))
}

/// Lower-triangular Cholesky factor `L` with `L·Lᵀ = A`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangularFactor(Matrix);

impl LowerTriangularFactor {
    pub fn l(&self) -> &Matrix {
        &self.0
    }

    pub fn reconstruct(&self) -> Matrix {
        self.0.matmul(&self.0.transpose())
    }

    /// `log det A = 2 Σ log L_ii`.
    pub fn log_det(&self) -> f64 {
        self.0.diagonal().iter().map(|d| 2.0 * libm::log(*d)).sum()
    }
}

/// Cholesky factorization as a positive-definiteness certificate.
///
/// A pivot at or below `1e-12·‖A‖_max` fails with [`LinalgError::NotPd`]
/// naming the 1-based leading minor where it happened.
pub fn cholesky_pd(a: &Matrix) -> Result<LowerTriangularFactor, LinalgError> {
    check_square(a)?;
    let n = a.rows();
    let tol = PIVOT_TOL * a.max_abs();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = a[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if !(pivot > tol) {
            return Err(LinalgError::NotPd {
                index: j + 1,
                pivot,
            });
        }
        let ljj = libm::sqrt(pivot);
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(LowerTriangularFactor(l))
}

/// Whether the Hermitian matrix `X + iY` is positive semidefinite.
///
/// Decided on the real embedding `[[X, −Y], [Y, X]]`, whose spectrum is that
/// of `X + iY` with every eigenvalue doubled. The threshold is
/// `-1e-10·(1 + ‖X‖_max)`.
pub fn complex_hermitian_psd(x: &Matrix, y: &Matrix) -> Result<bool, LinalgError> {
    check_square(x)?;
    check_square(y)?;
    if (x.rows(), x.cols()) != (y.rows(), y.cols()) {
        return Err(LinalgError::ShapeMismatch {
            expected: (x.rows(), x.cols()),
            got: (y.rows(), y.cols()),
        });
    }
    let sym_tol = 1e-12 * (1.0 + x.max_abs());
    let asym = x.asymmetry();
    if asym > sym_tol {
        return Err(LinalgError::NotSymmetric { asymmetry: asym });
    }
    let skew = y.add(&y.transpose()).max_abs();
    if skew > 1e-12 * (1.0 + y.max_abs()) {
        return Err(LinalgError::NotSkew { asymmetry: skew });
    }
    let embedding = Matrix::from_blocks(x, &y.scale(-1.0), y, x);
    let min = sym_eigen(&embedding)?.min();
    Ok(min >= -PSD_TOL * (1.0 + x.max_abs()))
}

/// Smallest eigenvalue of the Hermitian embedding; used for evidence.
pub fn complex_hermitian_min_eigenvalue(x: &Matrix, y: &Matrix) -> Result<f64, LinalgError> {
    let embedding = Matrix::from_blocks(x, &y.scale(-1.0), y, x);
    Ok(sym_eigen(&embedding)?.min())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_vec_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn eigen_of_diagonal_and_identity() {
        let e = sym_eigen(&Matrix::from_diagonal(&[2.0, 1.0])).unwrap();
        assert_eq!(e.values, vec![2.0, 1.0]);
        let e = sym_eigen(&Matrix::identity(4)).unwrap();
        assert_eq!(e.values, vec![1.0; 4]);
        assert_eq!(e.vectors, Matrix::identity(4));
    }

    #[test]
    fn eigen_of_reflection() {
        let a = Matrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let e = sym_eigen(&a).unwrap();
        assert_vec_close(&e.values, &[1.0, -1.0], 1e-15);
        // sign convention: first significant component positive
        for j in 0..2 {
            assert!(e.vectors[(0, j)] > 0.0);
        }
    }

    #[test]
    fn eigen_orders_ascending_diagonal() {
        let e = sym_eigen(&Matrix::from_diagonal(&[1.0, 3.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(e.vectors.column(0), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn eigen_invariants_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for order in [1usize, 2, 3, 5, 8, 17, 32] {
            let a = sample::random_symmetric(&mut rng, order, 3.0);
            let e = sym_eigen(&a).unwrap();
            let vtv = e.vectors.tr_matmul(&e.vectors);
            assert!(vtv.max_abs_diff(&Matrix::identity(order)) <= 1e-10);
            let av = a.matmul(&e.vectors);
            let vd = e.vectors.matmul(&Matrix::from_diagonal(&e.values));
            assert!(av.max_abs_diff(&vd) <= 1e-8 * (1.0 + a.max_abs()));
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
            assert!(e.reconstruct().max_abs_diff(&a) <= 1e-8 * (1.0 + a.max_abs()));
        }
    }

    #[test]
    fn eigen_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = sample::random_symmetric(&mut rng, 12, 1.0);
        assert_eq!(sym_eigen(&a).unwrap(), sym_eigen(&a).unwrap());
    }

    #[test]
    fn eigen_rejects_nonsquare_and_nan() {
        assert!(matches!(
            sym_eigen(&Matrix::zeros(2, 3)),
            Err(LinalgError::NotSquare { .. })
        ));
        let mut m = Matrix::identity(2);
        m[(0, 1)] = f64::INFINITY;
        assert_eq!(sym_eigen(&m), Err(LinalgError::NonFinite));
    }

    #[test]
    fn sqrt_of_diagonal_and_identity() {
        let r = sqrt_psd(&Matrix::from_diagonal(&[4.0, 9.0])).unwrap();
        assert_eq!(r, Matrix::from_diagonal(&[2.0, 3.0]));
        assert_eq!(sqrt_psd(&Matrix::identity(3)).unwrap(), Matrix::identity(3));
    }

    #[test]
    fn sqrt_squares_back() {
        let a = Matrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let r = sqrt_psd(&a).unwrap();
        assert!(r.matmul(&r).max_abs_diff(&a) <= 1e-10);
        // closed form: eigenvalues 3 and 1
        let s3 = libm::sqrt(3.0);
        assert!((r[(0, 0)] - 0.5 * (s3 + 1.0)).abs() < 1e-14);
        assert!((r[(0, 1)] - 0.5 * (s3 - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn sqrt_clamps_tiny_negatives_and_rejects_real_ones() {
        let a = Matrix::from_diagonal(&[1.0, -1e-12]);
        let r = sqrt_psd(&a).unwrap();
        assert_eq!(r[(1, 1)], 0.0);
        let a = Matrix::from_diagonal(&[1.0, -1e-6]);
        assert!(matches!(sqrt_psd(&a), Err(LinalgError::NotPsd { .. })));
    }

    #[test]
    fn cholesky_cases() {
        let l = cholesky_pd(&Matrix::identity(3)).unwrap();
        assert_eq!(l.l(), &Matrix::identity(3));

        let a = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        match cholesky_pd(&a) {
            Err(LinalgError::NotPd { index, pivot }) => {
                assert_eq!(index, 2);
                assert!((pivot + 3.0).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }

        // pivot 1e-14 sits below 1e-12 * ‖A‖_max = 1e-12
        let a = Matrix::from_diagonal(&[1.0, 1e-14]);
        assert!(matches!(
            cholesky_pd(&a),
            Err(LinalgError::NotPd { index: 2, .. })
        ));
    }

    #[test]
    fn cholesky_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = sample::random_pd(&mut rng, 10);
        let l = cholesky_pd(&a).unwrap();
        assert!(l.reconstruct().max_abs_diff(&a) <= 1e-10 * (1.0 + a.max_abs()));
        for i in 0..10 {
            for j in (i + 1)..10 {
                assert_eq!(l.l()[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn hermitian_psd_cases() {
        let j = crate::symplectic::standard_j(1);
        let minus_j = j.scale(-1.0);
        assert!(complex_hermitian_psd(&Matrix::identity(2), &minus_j).unwrap());
        assert!(!complex_hermitian_psd(&Matrix::identity(2).scale(0.5), &minus_j).unwrap());
        assert!(complex_hermitian_psd(&Matrix::from_diagonal(&[0.75, 1.5]), &minus_j).unwrap());
    }

    #[test]
    fn hermitian_psd_errors() {
        let x = Matrix::identity(2);
        assert!(matches!(
            complex_hermitian_psd(&x, &Matrix::zeros(4, 4)),
            Err(LinalgError::ShapeMismatch { .. })
        ));
        assert!(matches!(
            complex_hermitian_psd(&x, &Matrix::identity(2)),
            Err(LinalgError::NotSkew { .. })
        ));
    }
}
