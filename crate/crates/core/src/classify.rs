//! Gaussian-covariance (GCO) and positive absolutely-norm-attaining
//! ((AN)₊) classification of operator models.
//!
//! A symmetric invertible `S` on `H ⊕ H` is a GCO when
//!
//! 1. `Ŝ − iĴ ⪰ 0`,
//! 2. `S − I` is Hilbert–Schmidt,
//! 3. `(JS)² + I` is trace class.
//!
//! Summability cannot be decided from finitely many terms. Conditions 2 and 3
//! use a tail-window heuristic on the term sequence `t_1..t_K`:
//!
//! * **Violated** if every term in the last window is at least
//!   [`DIVERGENCE_FLOOR`] (terms bounded away from zero);
//! * **Satisfied** if the ratio of the last window sum to the previous
//!   window sum is at most [`RATIO_THRESHOLD`];
//! * **Inconclusive** otherwise.
//!
//! An (AN)₊ operator has the form `βI + K + F` with `β ≥ 0`, `K` positive
//! compact and `F` self-adjoint of finite rank. For a diagonal model `β` is
//! the common limit of the two sequences, and membership amounts to only
//! finitely many diagonal entries lying below `β`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg::{self, LinalgError, PSD_TOL};
use crate::model::{self, ModelError, ModelKind, OperatorModel, Payload};
use crate::symplectic::standard_j;

pub const DEFAULT_K_MAX: usize = 10_000;
pub const DEFAULT_TAIL_WINDOW: usize = 1_000;
pub const RATIO_THRESHOLD: f64 = 0.9;
pub const DIVERGENCE_FLOOR: f64 = 1e-6;
/// `p_k·q_k >= 1 − PRODUCT_TOL` for condition 1 on diagonal models.
pub const PRODUCT_TOL: f64 = 1e-12;
/// Tail Cauchy tolerance for the limit `β`.
pub const LIMIT_TOL: f64 = 1e-9;
/// Relative resolution below which `min(p_k, q_k) − β` counts as zero.
pub const RESOLUTION: f64 = 1e-12;
/// Truncation sizes used for condition 1 on non-diagonal models.
pub const CONDITION1_SIZES: [usize; 6] = [1, 2, 4, 8, 16, 32];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictStatus {
    Satisfied,
    Violated,
    Inconclusive,
}

impl VerdictStatus {
    pub fn name(self) -> &'static str {
        match self {
            VerdictStatus::Satisfied => "Satisfied",
            VerdictStatus::Violated => "Violated",
            VerdictStatus::Inconclusive => "Inconclusive",
        }
    }

    /// Satisfied iff all are, Violated if any is, else Inconclusive.
    pub fn all(items: &[VerdictStatus]) -> VerdictStatus {
        if items.contains(&VerdictStatus::Violated) {
            VerdictStatus::Violated
        } else if items.iter().all(|s| *s == VerdictStatus::Satisfied) {
            VerdictStatus::Satisfied
        } else {
            VerdictStatus::Inconclusive
        }
    }
}

impl fmt::Display for VerdictStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionVerdict {
    pub status: VerdictStatus,
    /// Witness value: failing term, partial sum, tail ratio or eigenvalue,
    /// as described in `detail`.
    pub evidence: f64,
    /// 1-based index (or truncation size) the evidence refers to, if any.
    pub witness_index: Option<usize>,
    pub detail: String,
}

impl ConditionVerdict {
    fn new(
        status: VerdictStatus,
        evidence: f64,
        witness_index: Option<usize>,
        detail: String,
    ) -> Self {
        Self {
            status,
            evidence,
            witness_index,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub gco_cond1: ConditionVerdict,
    pub gco_cond2: ConditionVerdict,
    pub gco_cond3: ConditionVerdict,
    pub is_gco: VerdictStatus,
    pub an_plus: ConditionVerdict,
    /// Essential-spectrum point: the sequence limit for diagonal models,
    /// `alpha` for compact-plus-scalar models, `None` if no limit was found.
    pub beta_estimate: Option<f64>,
    /// Present for integral models with `alpha = 1`.
    pub integral_precheck: Option<ConditionVerdict>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifyError {
    /// The GCO conditions are stated against the identity shift.
    AlphaNotOne(f64),
    WrongKind {
        expected: ModelKind,
        got: ModelKind,
    },
    ZeroWindow,
    /// Two tail windows must fit into `k_max` terms.
    WindowTooLarge {
        tail_window: usize,
        k_max: usize,
    },
    ZeroOrder,
    Model(ModelError),
    Linalg(LinalgError),
}

impl fmt::Display for ClassifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifyError::AlphaNotOne(a) => write!(f, "GCO checks require alpha = 1, got {a}"),
            ClassifyError::WrongKind { expected, got } => {
                write!(f, "expected a {expected} model, got {got}")
            }
            ClassifyError::ZeroWindow => write!(f, "tail window must be at least 1"),
            ClassifyError::WindowTooLarge { tail_window, k_max } => write!(
                f,
                "two tail windows of {tail_window} terms do not fit into k_max = {k_max}"
            ),
            ClassifyError::ZeroOrder => write!(f, "discretization order must be at least 1"),
            ClassifyError::Model(e) => e.fmt(f),
            ClassifyError::Linalg(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for ClassifyError {}

impl From<ModelError> for ClassifyError {
    fn from(e: ModelError) -> Self {
        ClassifyError::Model(e)
    }
}

impl From<LinalgError> for ClassifyError {
    fn from(e: LinalgError) -> Self {
        ClassifyError::Linalg(e)
    }
}

fn check_window(k_max: usize, tail_window: usize) -> Result<(), ClassifyError> {
    if tail_window == 0 {
        return Err(ClassifyError::ZeroWindow);
    }
    if 2 * tail_window > k_max {
        return Err(ClassifyError::WindowTooLarge { tail_window, k_max });
    }
    Ok(())
}

/// Tail-window summability verdict for nonnegative terms `t_1..t_K`.
pub fn summability(terms: &[f64], tail_window: usize, what: &str) -> ConditionVerdict {
    let k = terms.len();
    let w = tail_window;
    let tail = &terms[k - w..];
    let (argmin, min) =
        tail.iter().enumerate().fold(
            (0, f64::INFINITY),
            |best, (i, &t)| if t < best.1 { (i, t) } else { best },
        );
    if min >= DIVERGENCE_FLOOR {
        return ConditionVerdict::new(
            VerdictStatus::Violated,
            min,
            Some(k - w + argmin + 1),
            format!("{what}: terms stay >= {DIVERGENCE_FLOOR:e} over the last {w}; witness is the smallest tail term"),
        );
    }
    let last: f64 = tail.iter().sum();
    let prev: f64 = terms[k - 2 * w..k - w].iter().sum();
    let ratio = if last == 0.0 {
        0.0
    } else if prev == 0.0 {
        f64::INFINITY
    } else {
        last / prev
    };
    let partial: f64 = terms.iter().sum();
    if ratio <= RATIO_THRESHOLD {
        ConditionVerdict::new(
            VerdictStatus::Satisfied,
            partial,
            Some(k),
            format!(
                "{what}: partial sum to k = {k}; tail-window ratio {ratio:.6} <= {RATIO_THRESHOLD}"
            ),
        )
    } else {
        ConditionVerdict::new(
            VerdictStatus::Inconclusive,
            ratio,
            Some(k),
            format!(
                "{what}: tail-window ratio {ratio:.6} > {RATIO_THRESHOLD}, partial sum {partial:e}"
            ),
        )
    }
}

fn diagonal_terms(
    model: &OperatorModel,
    k_max: usize,
) -> Result<(Vec<f64>, Vec<f64>), ClassifyError> {
    let terms = model
        .diagonal_terms(k_max)
        .ok_or(ClassifyError::WrongKind {
            expected: ModelKind::DiagonalPair,
            got: model.kind(),
        })?;
    Ok(terms?)
}

/// Condition 1 on a diagonal model: `p_k > 0` and `p_k·q_k ≥ 1 − 1e-12` for
/// every `k ≤ k_max` (the 2×2 blocks of `Ŝ − iĴ` are `[[p, −i], [i, q]]`).
pub fn cond1_closed_form(p: &[f64], q: &[f64]) -> ConditionVerdict {
    let mut min_product = f64::INFINITY;
    for (k, (&pk, &qk)) in p.iter().zip(q).enumerate() {
        let product = pk * qk;
        if !(pk > 0.0 && product >= 1.0 - PRODUCT_TOL) {
            return ConditionVerdict::new(
                VerdictStatus::Violated,
                product,
                Some(k + 1),
                format!("p_k q_k < 1 or p_k <= 0 at k = {}", k + 1),
            );
        }
        min_product = min_product.min(product);
    }
    ConditionVerdict::new(
        VerdictStatus::Satisfied,
        min_product,
        Some(p.len()),
        format!("min p_k q_k over k <= {}", p.len()),
    )
}

/// Condition 1 from finite sections: `S_m − iJ ⪰ 0` on the Hermitian
/// embedding for each size `m` in `sizes`. Evidence is the smallest
/// eigenvalue seen, or the failing one.
pub fn cond1_by_truncation(
    model: &OperatorModel,
    sizes: &[usize],
) -> Result<ConditionVerdict, ClassifyError> {
    let mut min_eig = f64::INFINITY;
    let mut largest = 0;
    for &m in sizes {
        let s = model::truncate(model, m)?;
        let minus_j = standard_j(m).scale(-1.0);
        let eig = linalg::complex_hermitian_min_eigenvalue(&s, &minus_j)?;
        if !linalg::complex_hermitian_psd(&s, &minus_j)? {
            return Ok(ConditionVerdict::new(
                VerdictStatus::Violated,
                eig,
                Some(m),
                format!("S - iJ has a negative eigenvalue at truncation size {m}"),
            ));
        }
        min_eig = min_eig.min(eig);
        largest = largest.max(m);
    }
    if largest == 0 {
        return Ok(ConditionVerdict::new(
            VerdictStatus::Inconclusive,
            f64::NAN,
            None,
            String::from("no truncation sizes tested"),
        ));
    }
    Ok(ConditionVerdict::new(
        VerdictStatus::Satisfied,
        min_eig,
        Some(largest),
        format!("S - iJ >= 0 on finite sections up to size {largest} (min eigenvalue)"),
    ))
}

/// The three GCO conditions. Diagonal models use closed forms; other kinds
/// use finite sections for condition 1 and report conditions 2 and 3 as
/// inconclusive.
pub fn gco_conditions(
    model: &OperatorModel,
    k_max: usize,
    tail_window: usize,
) -> Result<[ConditionVerdict; 3], ClassifyError> {
    if model.alpha != 1.0 {
        return Err(ClassifyError::AlphaNotOne(model.alpha));
    }
    check_window(k_max, tail_window)?;
    match model.kind() {
        ModelKind::DiagonalPair => {
            let (p, q) = diagonal_terms(model, k_max)?;
            let hs: Vec<f64> = p
                .iter()
                .zip(&q)
                .map(|(a, b)| (a - 1.0) * (a - 1.0) + (b - 1.0) * (b - 1.0))
                .collect();
            let tr: Vec<f64> = p.iter().zip(&q).map(|(a, b)| (1.0 - a * b).abs()).collect();
            Ok([
                cond1_closed_form(&p, &q),
                summability(&hs, tail_window, "sum (p_k-1)^2 + (q_k-1)^2"),
                summability(&tr, tail_window, "sum |1 - p_k q_k|"),
            ])
        }
        kind => {
            let sizes: Vec<usize> = CONDITION1_SIZES
                .into_iter()
                .filter(|&m| m <= k_max)
                .collect();
            let cond1 = cond1_by_truncation(model, &sizes)?;
            let why = match kind {
                ModelKind::Integral => "not decided for integral models; see the integral precheck",
                _ => "not decided from finite sections of an infinite matrix",
            };
            let pending = || {
                ConditionVerdict::new(
                    VerdictStatus::Inconclusive,
                    f64::NAN,
                    None,
                    String::from(why),
                )
            };
            Ok([cond1, pending(), pending()])
        }
    }
}

fn tail_is_cauchy(x: &[f64], w: usize) -> bool {
    x[x.len() - w..]
        .windows(2)
        .all(|p| (p[0] - p[1]).abs() <= LIMIT_TOL)
}

/// (AN)₊ check for diagonal models, plus the detected limit `β`.
///
/// `β` is the common limit of `p` and `q`, required to be Cauchy within
/// `1e-9` over the tail window. Among the indices where `min(p_k, q_k) − β`
/// is resolvable (relative size above `1e-12`), the last `tail_window` are
/// inspected: violations in both halves of that window mean they never stop
/// (Violated); none at all means finitely many (Satisfied).
pub fn an_plus_check(
    model: &OperatorModel,
    k_max: usize,
    tail_window: usize,
) -> Result<(ConditionVerdict, Option<f64>), ClassifyError> {
    check_window(k_max, tail_window)?;
    if model.kind() != ModelKind::DiagonalPair {
        return Ok((
            ConditionVerdict::new(
                VerdictStatus::Inconclusive,
                f64::NAN,
                None,
                format!("no decision procedure for {} models", model.kind()),
            ),
            Some(model.alpha),
        ));
    }
    let (p, q) = diagonal_terms(model, k_max)?;
    let (pk, qk) = (p[k_max - 1], q[k_max - 1]);
    if !(tail_is_cauchy(&p, tail_window)
        && tail_is_cauchy(&q, tail_window)
        && (pk - qk).abs() <= LIMIT_TOL)
    {
        return Ok((
            ConditionVerdict::new(
                VerdictStatus::Inconclusive,
                (pk - qk).abs(),
                Some(k_max),
                String::from("p and q do not settle to a common limit over the tail window"),
            ),
            None,
        ));
    }
    let beta = 0.5 * (pk + qk);
    if beta <= 0.0 {
        return Ok((
            ConditionVerdict::new(
                VerdictStatus::Violated,
                beta,
                Some(k_max),
                String::from("limit beta is not positive"),
            ),
            Some(beta),
        ));
    }
    let resolution = RESOLUTION * beta.abs().max(1.0);
    let resolvable: Vec<(usize, f64)> = p
        .iter()
        .zip(&q)
        .enumerate()
        .map(|(k, (a, b))| (k + 1, a.min(*b) - beta))
        .filter(|(_, delta)| delta.abs() > resolution)
        .collect();
    let window = &resolvable[resolvable.len().saturating_sub(tail_window)..];
    let below = |part: &[(usize, f64)]| part.iter().filter(|(_, d)| *d < 0.0).count();
    let total_below = below(&resolvable);
    let last_violation = resolvable.iter().rev().find(|(_, d)| *d < 0.0).copied();
    let half = window.len() / 2;
    let verdict = if below(window) == 0 {
        ConditionVerdict::new(
            VerdictStatus::Satisfied,
            beta,
            last_violation.map(|(k, _)| k),
            format!(
                "{total_below} entries below beta, none in the last {} resolvable indices",
                window.len()
            ),
        )
    } else if half > 0 && below(&window[..half]) > 0 && below(&window[half..]) > 0 {
        let (k, delta) = last_violation.expect("window has violations");
        ConditionVerdict::new(
            VerdictStatus::Violated,
            delta,
            Some(k),
            format!("entries below beta throughout the last {} resolvable indices; witness min(p_k, q_k) - beta", window.len()),
        )
    } else {
        let (k, delta) = last_violation.expect("window has violations");
        ConditionVerdict::new(
            VerdictStatus::Inconclusive,
            delta,
            Some(k),
            String::from("entries below beta inside the tail window but not throughout it"),
        )
    };
    Ok((verdict, Some(beta)))
}

/// Sufficient-condition precheck for integral models at a finite
/// discretization: `F̃_m + 2I ⪰ 0` together with a declared continuous
/// kernel. Evidence is the smallest eigenvalue of `F̃_m`.
pub fn integral_gco_precheck(
    model: &OperatorModel,
    m: usize,
) -> Result<ConditionVerdict, ClassifyError> {
    let Payload::Integral {
        kernel,
        interval,
        continuity_declared,
    } = &model.payload
    else {
        return Err(ClassifyError::WrongKind {
            expected: ModelKind::Integral,
            got: model.kind(),
        });
    };
    if model.alpha != 1.0 {
        return Err(ClassifyError::AlphaNotOne(model.alpha));
    }
    if m == 0 {
        return Err(ClassifyError::ZeroOrder);
    }
    let f = model::nystrom_matrix(kernel, *interval, m, true)?;
    let min_eig = linalg::sym_eigen(&f)?.min();
    let psd = min_eig + 2.0 >= -PSD_TOL * (1.0 + f.max_abs());
    let label = format!("sufficient-condition precheck at finite order m = {m}");
    let verdict = if !psd {
        ConditionVerdict::new(
            VerdictStatus::Violated,
            min_eig,
            Some(m),
            format!("{label}: F + 2I has a negative eigenvalue (evidence: min eigenvalue of F)"),
        )
    } else if *continuity_declared {
        ConditionVerdict::new(
            VerdictStatus::Satisfied,
            min_eig,
            Some(m),
            format!("{label}: F + 2I >= 0 and kernel declared continuous"),
        )
    } else {
        ConditionVerdict::new(
            VerdictStatus::Inconclusive,
            min_eig,
            Some(m),
            format!("{label}: F + 2I >= 0 but kernel continuity not declared"),
        )
    };
    Ok(verdict)
}

/// Discretization order used by [`classify`] for the integral precheck.
pub const PRECHECK_ORDER: usize = 32;

/// Full classification.
///
/// Diagonal models are classified with `alpha` taken as 1, since their
/// sequences are the full diagonal of `S`. For other kinds with
/// `alpha ≠ 1`, `S − I` is a nonzero scalar plus a compact operator, so
/// condition 2 fails with witness `|alpha − 1|`; condition 3 fails likewise
/// with witness `|1 − alpha²|` unless `alpha = −1`.
pub fn classify(
    model: &OperatorModel,
    k_max: usize,
    tail_window: usize,
) -> Result<ClassificationReport, ClassifyError> {
    check_window(k_max, tail_window)?;
    let [gco_cond1, gco_cond2, gco_cond3] =
        if model.kind() == ModelKind::DiagonalPair || model.alpha == 1.0 {
            gco_conditions(&model.with_alpha(1.0), k_max, tail_window)?
        } else {
            let alpha = model.alpha;
            let sizes: Vec<usize> = CONDITION1_SIZES
                .into_iter()
                .filter(|&m| m <= k_max)
                .collect();
            let cond1 = cond1_by_truncation(model, &sizes)?;
            let cond2 = ConditionVerdict::new(
                VerdictStatus::Violated,
                (alpha - 1.0).abs(),
                None,
                String::from("S - I = compact + (alpha - 1) I with alpha != 1"),
            );
            let cond3 = if alpha == -1.0 {
                ConditionVerdict::new(
                    VerdictStatus::Inconclusive,
                    f64::NAN,
                    None,
                    String::from("alpha = -1: not decided"),
                )
            } else {
                ConditionVerdict::new(
                    VerdictStatus::Violated,
                    (1.0 - alpha * alpha).abs(),
                    None,
                    String::from("(JS)^2 + I = compact + (1 - alpha^2) I with alpha^2 != 1"),
                )
            };
            [cond1, cond2, cond3]
        };
    let is_gco = VerdictStatus::all(&[gco_cond1.status, gco_cond2.status, gco_cond3.status]);
    let (an_plus, beta_estimate) = an_plus_check(model, k_max, tail_window)?;
    let integral_precheck = if model.kind() == ModelKind::Integral && model.alpha == 1.0 {
        Some(integral_gco_precheck(model, PRECHECK_ORDER)?)
    } else {
        None
    };
    Ok(ClassificationReport {
        gco_cond1,
        gco_cond2,
        gco_cond3,
        is_gco,
        an_plus,
        beta_estimate,
        integral_precheck,
    })
}
