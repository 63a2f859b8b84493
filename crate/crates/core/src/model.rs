//! Infinite-dimensional operator models and their finite sections.
//!
//! Three kinds are supported, all acting on `H ⊕ H`:
//!
//! * **diagonal pair**: `S = diag(p_1, p_2, …) ⊕ diag(q_1, q_2, …)` with
//!   `p`, `q` expressions in `n` (1-based). The sequences are the full
//!   diagonal of `S`; `alpha` is only the reference shift used by the
//!   Hilbert–Schmidt and trace diagnostics.
//! * **infinite matrix**: `S = [[A, B], [Bᵀ, D]] + alpha·I` with entries
//!   `a(i, j)`, `b(i, j)`, `d(i, j)`; `A` and `D` are symmetrized.
//! * **integral**: `S = (F + alpha·I) ⊕ (F + alpha·I)` where
//!   `(Fx)(s) = ∫_a^b k(s, t) x(t) dt` for a real symmetric kernel.
//!
//! Integral operators are discretized by Gauss–Legendre Nyström,
//! `W^{1/2} K W^{1/2}`, plus a diagonal correction
//! `c_i = ∫ k(s_i, t) dt − Σ_j w_j k(s_i, s_j)` that restores the row
//! integrals. The correction keeps the matrix symmetric and removes most of
//! the error caused by a kink of the kernel on the diagonal (such as
//! `exp(-|s-t|)`). It is exact (zero) for smooth kernels that the rule
//! integrates exactly.

use alloc::vec::Vec;
use core::fmt;

use crate::expr::{EvalError, Expr, ExprError};
use crate::interlacing::{self, InterlacingError, InterlacingReport};
use crate::linalg;
use crate::matrix::{Matrix, MatrixError, SymmetricMatrix};
use crate::quadrature::{self, QuadratureError, Rule};
use crate::symplectic::{self, standard_j, SymplecticError};

/// Nodes per piece of the fixed rule used for the row integrals of the
/// diagonal correction (each row integral is split at its node).
const ROW_INTEGRAL_NODES: usize = 48;

/// Kernel symmetry tolerance at quadrature nodes.
pub const KERNEL_SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    DiagonalPair,
    InfiniteMatrix,
    Integral,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::DiagonalPair => "diagonal_pair",
            ModelKind::InfiniteMatrix => "infinite_matrix",
            ModelKind::Integral => "integral",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    DiagonalPair {
        p: Expr,
        q: Expr,
    },
    InfiniteMatrix {
        a: Expr,
        b: Expr,
        d: Expr,
    },
    Integral {
        kernel: Expr,
        interval: (f64, f64),
        continuity_declared: bool,
    },
}

pub type DiagonalTerms = (Vec<f64>, Vec<f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorModel {
    pub alpha: f64,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    Expr {
        field: &'static str,
        error: ExprError,
    },
    /// `at` holds `(n, NaN)` for sequences, `(i, j)` or `(s, t)` otherwise.
    Eval {
        field: &'static str,
        at: (f64, f64),
        error: EvalError,
    },
    NonFiniteAlpha(f64),
    ZeroAlpha,
    ZeroOrder,
    Quadrature(QuadratureError),
    NonsymmetricKernel {
        s: f64,
        t: f64,
        gap: f64,
    },
    Matrix(MatrixError),
    Symplectic(SymplecticError),
    Interlacing(InterlacingError),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::Expr { field, error } => write!(f, "field '{field}': {error}"),
            ModelError::Eval { field, at, error } if at.1.is_nan() => {
                write!(f, "field '{field}' at n = {}: {error}", at.0)
            }
            ModelError::Eval { field, at, error } => {
                write!(f, "field '{field}' at ({}, {}): {error}", at.0, at.1)
            }
            ModelError::NonFiniteAlpha(a) => write!(f, "alpha must be finite, got {a}"),
            ModelError::ZeroAlpha => write!(f, "alpha must be nonzero"),
            ModelError::ZeroOrder => write!(f, "truncation size must be at least 1"),
            ModelError::Quadrature(e) => e.fmt(f),
            ModelError::NonsymmetricKernel { s, t, gap } => {
                write!(
                    f,
                    "kernel is not symmetric: |k({s}, {t}) - k({t}, {s})| = {gap:e}"
                )
            }
            ModelError::Matrix(e) => e.fmt(f),
            ModelError::Symplectic(e) => e.fmt(f),
            ModelError::Interlacing(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for ModelError {}

impl From<QuadratureError> for ModelError {
    fn from(e: QuadratureError) -> Self {
        ModelError::Quadrature(e)
    }
}

impl From<MatrixError> for ModelError {
    fn from(e: MatrixError) -> Self {
        ModelError::Matrix(e)
    }
}

impl From<SymplecticError> for ModelError {
    fn from(e: SymplecticError) -> Self {
        ModelError::Symplectic(e)
    }
}

impl From<InterlacingError> for ModelError {
    fn from(e: InterlacingError) -> Self {
        ModelError::Interlacing(e)
    }
}

fn parse(field: &'static str, src: &str, vars: &[&str]) -> Result<Expr, ModelError> {
    Expr::parse(src, vars).map_err(|error| ModelError::Expr { field, error })
}

fn check_alpha(alpha: f64) -> Result<(), ModelError> {
    if alpha.is_finite() {
        Ok(())
    } else {
        Err(ModelError::NonFiniteAlpha(alpha))
    }
}

fn eval_seq(field: &'static str, e: &Expr, n: usize) -> Result<f64, ModelError> {
    let x = n as f64;
    e.eval(&[("n", x)]).map_err(|error| ModelError::Eval {
        field,
        at: (x, f64::NAN),
        error,
    })
}

fn eval_entry(field: &'static str, e: &Expr, i: usize, j: usize) -> Result<f64, ModelError> {
    let (x, y) = (i as f64, j as f64);
    e.eval(&[("i", x), ("j", y)])
        .map_err(|error| ModelError::Eval {
            field,
            at: (x, y),
            error,
        })
}

fn eval_kernel(kernel: &Expr, s: f64, t: f64) -> Result<f64, ModelError> {
    kernel
        .eval(&[("s", s), ("t", t)])
        .map_err(|error| ModelError::Eval {
            field: "kernel",
            at: (s, t),
            error,
        })
}

impl OperatorModel {
    /// `q = None` uses `p` on both halves.
    pub fn diagonal_pair(p: &str, q: Option<&str>, alpha: f64) -> Result<Self, ModelError> {
        check_alpha(alpha)?;
        let p_expr = parse("p", p, &["n"])?;
        let q_expr = match q {
            Some(q) => parse("q", q, &["n"])?,
            None => p_expr.clone(),
        };
        Ok(Self {
            alpha,
            payload: Payload::DiagonalPair {
                p: p_expr,
                q: q_expr,
            },
        })
    }

    pub fn infinite_matrix(a: &str, b: &str, d: &str, alpha: f64) -> Result<Self, ModelError> {
        check_alpha(alpha)?;
        let vars = ["i", "j"];
        Ok(Self {
            alpha,
            payload: Payload::InfiniteMatrix {
                a: parse("a_entry", a, &vars)?,
                b: parse("b_entry", b, &vars)?,
                d: parse("d_entry", d, &vars)?,
            },
        })
    }

    pub fn integral(
        kernel: &str,
        interval: (f64, f64),
        continuity_declared: bool,
        alpha: f64,
    ) -> Result<Self, ModelError> {
        check_alpha(alpha)?;
        let (a, b) = interval;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(QuadratureError::Interval { a, b }.into());
        }
        Ok(Self {
            alpha,
            payload: Payload::Integral {
                kernel: parse("kernel", kernel, &["s", "t"])?,
                interval,
                continuity_declared,
            },
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self.payload {
            Payload::DiagonalPair { .. } => ModelKind::DiagonalPair,
            Payload::InfiniteMatrix { .. } => ModelKind::InfiniteMatrix,
            Payload::Integral { .. } => ModelKind::Integral,
        }
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self {
            alpha,
            payload: self.payload.clone(),
        }
    }

    /// `(p_1..p_k, q_1..q_k)` for a diagonal pair, `None` for other kinds.
    pub fn diagonal_terms(&self, k: usize) -> Option<Result<DiagonalTerms, ModelError>> {
        let Payload::DiagonalPair { p, q } = &self.payload else {
            return None;
        };
        let run = || -> Result<DiagonalTerms, ModelError> {
            let ps = (1..=k)
                .map(|n| eval_seq("p", p, n))
                .collect::<Result<Vec<_>, _>>()?;
            let qs = (1..=k)
                .map(|n| eval_seq("q", q, n))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((ps, qs))
        };
        Some(run())
    }
}

/// Symmetric Nyström matrix `W^{1/2} K W^{1/2}` on `m` Gauss–Legendre nodes,
/// optionally with the diagonal row-integral correction.
pub fn nystrom_matrix(
    kernel: &Expr,
    interval: (f64, f64),
    m: usize,
    corrected: bool,
) -> Result<Matrix, ModelError> {
    let (a, b) = interval;
    let rule = quadrature::nystrom_nodes(a, b, m)?;
    let s = &rule.nodes;
    let mut k = Matrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let kij = eval_kernel(kernel, s[i], s[j])?;
            if i != j {
                let kji = eval_kernel(kernel, s[j], s[i])?;
                let gap = (kij - kji).abs();
                if gap > KERNEL_SYMMETRY_TOL * (1.0 + kij.abs().max(kji.abs())) {
                    return Err(ModelError::NonsymmetricKernel {
                        s: s[i],
                        t: s[j],
                        gap,
                    });
                }
            }
            k[(i, j)] = kij;
            k[(j, i)] = kij;
        }
    }
    let root_w: Vec<f64> = rule.weights.iter().map(|w| libm::sqrt(*w)).collect();
    let mut f = Matrix::from_fn(m, m, |i, j| root_w[i] * k[(i, j)] * root_w[j]);
    if corrected {
        for i in 0..m {
            let exact = row_integral(kernel, s[i], a, b)?;
            let discrete: f64 = (0..m).map(|j| rule.weights[j] * k[(i, j)]).sum();
            f[(i, i)] += exact - discrete;
        }
    }
    Ok(f)
}

/// `∫_a^b k(s, t) dt`, split at `t = s` so a diagonal kink sits on a panel
/// boundary.
fn row_integral(kernel: &Expr, s: f64, a: f64, b: f64) -> Result<f64, ModelError> {
    let mut total = 0.0;
    for (lo, hi) in [(a, s), (s, b)] {
        if hi > lo {
            let rule: Rule = quadrature::nystrom_nodes(lo, hi, ROW_INTEGRAL_NODES)?;
            for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                total += w * eval_kernel(kernel, s, *t)?;
            }
        }
    }
    Ok(total)
}

/// Finite section of order `2m`. For integral models `m` is the number of
/// quadrature nodes.
pub fn truncate(model: &OperatorModel, m: usize) -> Result<SymmetricMatrix, ModelError> {
    if m == 0 {
        return Err(ModelError::ZeroOrder);
    }
    let alpha = model.alpha;
    let matrix = match &model.payload {
        Payload::DiagonalPair { .. } => {
            let (mut p, q) = model.diagonal_terms(m).expect("diagonal kind")?;
            p.extend_from_slice(&q);
            Matrix::from_diagonal(&p)
        }
        Payload::InfiniteMatrix { a, b, d } => {
            let block = |field, e: &Expr| {
                let mut out = Matrix::zeros(m, m);
                for i in 0..m {
                    for j in 0..m {
                        out[(i, j)] = eval_entry(field, e, i + 1, j + 1)?;
                    }
                }
                Ok::<Matrix, ModelError>(out)
            };
            let a_m = block("a_entry", a)?.symmetrized();
            let b_m = block("b_entry", b)?;
            let d_m = block("d_entry", d)?.symmetrized();
            Matrix::from_blocks(&a_m, &b_m, &b_m.transpose(), &d_m).shift(alpha)
        }
        Payload::Integral {
            kernel, interval, ..
        } => {
            let f = nystrom_matrix(kernel, *interval, m, true)?.shift(alpha);
            f.block_diag(&f)
        }
    };
    Ok(SymmetricMatrix::new(matrix)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationReport {
    /// The matrix order `2m`.
    pub order: usize,
    pub lambda_desc: Vec<f64>,
    pub d_desc: Vec<f64>,
    pub interlacing: InterlacingReport,
    /// Sum of squared entries of the truncation of `S − alpha·I`.
    pub hs_partial: f64,
    /// Diagonal pairs: `Σ_k |alpha² − p_k q_k|`. Other kinds: sum of absolute
    /// entries of `(JS)² + alpha²·I` on the truncation.
    pub trace_partial: f64,
}

/// Result of one order of a scan: a report, or the reason the order was
/// skipped (not positive definite, evaluation failure, …).
#[derive(Debug, Clone, PartialEq)]
pub struct ScanEntry {
    pub order: usize,
    pub outcome: Result<TruncationReport, ModelError>,
}

fn trace_partial(model: &OperatorModel, s: &SymmetricMatrix) -> f64 {
    let alpha2 = model.alpha * model.alpha;
    let n = s.modes();
    match model.payload {
        Payload::DiagonalPair { .. } => (0..n)
            .map(|k| (alpha2 - s[(k, k)] * s[(n + k, n + k)]).abs())
            .sum(),
        _ => {
            let js = standard_j(n).matmul(s);
            js.matmul(&js).shift(alpha2).sum_abs()
        }
    }
}

/// Full report for the truncation with `m` modes.
pub fn truncation_report(model: &OperatorModel, m: usize) -> Result<TruncationReport, ModelError> {
    let s = truncate(model, m)?;
    linalg::cholesky_pd(&s).map_err(SymplecticError::from)?;
    let lambda_desc = linalg::eigenvalues(&s).map_err(SymplecticError::from)?;
    let d_desc = symplectic::symplectic_eigenvalues(&s)?;
    let interlacing =
        interlacing::interlacing_check(&lambda_desc, &d_desc, interlacing::default_slack(&s))?;
    let hs_partial = s.shift(-model.alpha).sum_sq();
    let trace_partial = trace_partial(model, &s);
    Ok(TruncationReport {
        order: 2 * m,
        lambda_desc,
        d_desc,
        interlacing,
        hs_partial,
        trace_partial,
    })
}

/// Reports for each entry of `sizes` (numbers of modes `m`, giving order
/// `2m`). Per-order failures are recorded, not propagated; only a zero
/// `alpha` aborts the scan.
pub fn truncation_scan(
    model: &OperatorModel,
    sizes: &[usize],
) -> Result<Vec<ScanEntry>, ModelError> {
    if model.alpha == 0.0 {
        return Err(ModelError::ZeroAlpha);
    }
    Ok(sizes
        .iter()
        .map(|&m| ScanEntry {
            order: 2 * m,
            outcome: truncation_report(model, m),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_fixtures() {
        let id = OperatorModel::diagonal_pair("1", None, 1.0).unwrap();
        assert_eq!(truncate(&id, 2).unwrap().as_matrix(), &Matrix::identity(4));

        let block = OperatorModel::diagonal_pair("1 - 4^(-n)", Some("1 + 2^(-n)"), 1.0).unwrap();
        assert_eq!(
            truncate(&block, 1).unwrap().as_matrix(),
            &Matrix::from_diagonal(&[0.75, 1.5])
        );

        let zero = OperatorModel::integral("0", (0.0, 1.0), true, 1.0).unwrap();
        assert_eq!(
            truncate(&zero, 3).unwrap().as_matrix(),
            &Matrix::identity(6)
        );
    }

    #[test]
    fn infinite_matrix_blocks() {
        let model = OperatorModel::infinite_matrix("1/(i+j)", "0.1*i", "i - j", 2.0).unwrap();
        let s = truncate(&model, 2).unwrap();
        assert_eq!(s[(0, 0)], 2.5);
        assert_eq!(s[(0, 1)], 1.0 / 3.0);
        assert_eq!(s[(0, 3)], 0.1);
        assert_eq!(s[(3, 0)], 0.1);
        assert_eq!(s[(1, 2)], 0.2);
        // d block antisymmetric entries cancel under symmetrization
        assert_eq!(s[(2, 3)], 0.0);
        assert_eq!(s[(3, 3)], 2.0);
    }

    #[test]
    fn constant_kernel_is_rank_one() {
        let model = OperatorModel::integral("-3", (0.0, 2.0), true, 1.0).unwrap();
        let Payload::Integral {
            kernel, interval, ..
        } = &model.payload
        else {
            unreachable!()
        };
        let f = nystrom_matrix(kernel, *interval, 8, true).unwrap();
        let e = linalg::eigenvalues(&f).unwrap();
        assert!((e[7] + 6.0).abs() < 1e-12);
        assert!(e[..7].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn correction_vanishes_for_polynomial_kernels() {
        let model = OperatorModel::integral("1 + s*t + s^2*t^2", (-1.0, 1.0), true, 1.0).unwrap();
        let Payload::Integral {
            kernel, interval, ..
        } = &model.payload
        else {
            unreachable!()
        };
        let plain = nystrom_matrix(kernel, *interval, 6, false).unwrap();
        let corrected = nystrom_matrix(kernel, *interval, 6, true).unwrap();
        assert!(plain.max_abs_diff(&corrected) < 1e-13);
    }

    #[test]
    fn nonsymmetric_kernel_rejected() {
        let model = OperatorModel::integral("s - 2*t", (0.0, 1.0), true, 1.0).unwrap();
        assert!(matches!(
            truncate(&model, 4),
            Err(ModelError::NonsymmetricKernel { .. })
        ));
    }

    #[test]
    fn scan_skips_non_pd_orders() {
        let model = OperatorModel::diagonal_pair("2 - n", None, 1.0).unwrap();
        let scan = truncation_scan(&model, &[1, 2]).unwrap();
        assert!(scan[0].outcome.is_ok());
        assert!(scan[1].outcome.is_err());
        assert_eq!(scan[1].order, 4);
        assert_eq!(
            truncation_scan(&model.with_alpha(0.0), &[1]),
            Err(ModelError::ZeroAlpha)
        );
    }

    #[test]
    fn geometric_mean_closed_form() {
        let model = OperatorModel::diagonal_pair("1 - 4^(-n)", Some("1 + 2^(-n)"), 1.0).unwrap();
        for m in [4, 8] {
            let r = truncation_report(&model, m).unwrap();
            let (p, q) = model.diagonal_terms(m).unwrap().unwrap();
            let mut want: Vec<f64> = p.iter().zip(&q).map(|(a, b)| libm::sqrt(a * b)).collect();
            want.sort_by(|a, b| b.total_cmp(a));
            for (got, want) in r.d_desc.iter().zip(&want) {
                assert!((got - want).abs() <= 1e-10 * want);
            }
            assert!(r.interlacing.all_ok);
        }
    }

    #[test]
    fn diagonal_trace_partial_is_half_of_general_formula() {
        let diag = OperatorModel::diagonal_pair("1 + 1/n^2", Some("2 - 1/n"), 1.5).unwrap();
        let s = truncate(&diag, 5).unwrap();
        let n = s.modes();
        let js = standard_j(n).matmul(&s);
        let general = js.matmul(&js).shift(2.25).sum_abs();
        let fast = truncation_report(&diag, 5).unwrap().trace_partial;
        assert!((general - 2.0 * fast).abs() < 1e-12);
    }
}
