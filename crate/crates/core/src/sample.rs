//! Seeded random matrices for tests, oracles and the CLI oracle suites.
//!
//! Symplectic matrices are composed from the standard generators (shears,
//! single-mode squeezes, single-mode rotations and `R ⊕ R` with `R`
//! orthogonal), so they are symplectic by construction rather than by
//! projection.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matrix::Matrix;

pub fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

/// Symmetric matrix with `N(0, scale²)` entries on and above the diagonal.
pub fn random_symmetric<R: Rng + ?Sized>(rng: &mut R, order: usize, scale: f64) -> Matrix {
    let mut m = Matrix::zeros(order, order);
    for i in 0..order {
        for j in i..order {
            let v: f64 = StandardNormal.sample(rng);
            m[(i, j)] = scale * v;
            m[(j, i)] = scale * v;
        }
    }
    m
}

/// Haar-ish orthogonal matrix from Gram–Schmidt on a Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, order: usize) -> Matrix {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(order);
    while cols.len() < order {
        let mut v = gaussian_vec(rng, order);
        for _ in 0..2 {
            for c in &cols {
                let d = dot(&v, c);
                v.iter_mut().zip(c).for_each(|(x, y)| *x -= d * y);
            }
        }
        let norm = libm::sqrt(dot(&v, &v));
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            cols.push(v);
        }
    }
    Matrix::from_columns(&cols)
}

/// `Q · diag(λ) · Qᵀ` with `λ = exp(U(-log_spread, log_spread))`.
pub fn random_pd_with_spread<R: Rng + ?Sized>(
    rng: &mut R,
    order: usize,
    log_spread: f64,
) -> Matrix {
    let q = random_orthogonal(rng, order);
    let lambda: Vec<f64> = (0..order)
        .map(|_| libm::exp(rng.random_range(-log_spread..=log_spread)))
        .collect();
    let mut scaled = q.clone();
    for (j, l) in lambda.iter().enumerate() {
        for i in 0..order {
            scaled[(i, j)] *= l;
        }
    }
    scaled.matmul(&q.transpose()).symmetrized()
}

/// Positive definite matrix with condition number at most `e⁴`.
pub fn random_pd<R: Rng + ?Sized>(rng: &mut R, order: usize) -> Matrix {
    random_pd_with_spread(rng, order, 2.0)
}

/// Random symplectic matrix of order `2n`, a product of generators whose
/// strength scales with `strength` (`0` gives the identity).
pub fn random_symplectic<R: Rng + ?Sized>(rng: &mut R, n: usize, strength: f64) -> Matrix {
    let order = 2 * n;
    let mut m = Matrix::identity(order);

    // upper shear [[I, S], [0, I]]
    let s = random_symmetric(rng, n, strength);
    let mut upper = Matrix::identity(order);
    for i in 0..n {
        for j in 0..n {
            upper[(i, n + j)] = s[(i, j)];
        }
    }
    m = upper.matmul(&m);

    // R ⊕ R with R orthogonal
    let r = random_orthogonal(rng, n);
    m = r.block_diag(&r).matmul(&m);

    // single-mode squeezes and rotations
    let mut local = Matrix::identity(order);
    for k in 0..n {
        let sq = libm::exp(strength * rng.random_range(-1.0..=1.0));
        let theta: f64 = rng.random_range(0.0..core::f64::consts::TAU);
        let (c, sn) = (libm::cos(theta), libm::sin(theta));
        // rotation [[c, s], [-s, c]] then squeeze diag(sq, 1/sq) on (q_k, p_k)
        local[(k, k)] = sq * c;
        local[(k, n + k)] = sq * sn;
        local[(n + k, k)] = -sn / sq;
        local[(n + k, n + k)] = c / sq;
    }
    m = local.matmul(&m);

    // lower shear [[I, 0], [S, I]]
    let s = random_symmetric(rng, n, strength);
    let mut lower = Matrix::identity(order);
    for i in 0..n {
        for j in 0..n {
            lower[(n + i, j)] = s[(i, j)];
        }
    }
    lower.matmul(&m)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{is_symplectic, standard_j};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=6 {
            let m = random_symplectic(&mut rng, n, 0.7);
            assert!(is_symplectic(&m, 1e-10).unwrap(), "n = {n}");
            let j = standard_j(n);
            let mjmt = m.matmul(&j).matmul(&m.transpose());
            assert!(mjmt.max_abs_diff(&j) < 1e-10);
        }
    }

    #[test]
    fn orthogonal_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = random_orthogonal(&mut rng, 9);
        assert!(q.tr_matmul(&q).max_abs_diff(&Matrix::identity(9)) < 1e-12);
    }
}
