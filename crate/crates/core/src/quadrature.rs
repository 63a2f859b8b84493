//! Gauss–Legendre quadrature.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureError {
    ZeroNodes,
    /// Requires finite `a < b`.
    Interval {
        a: f64,
        b: f64,
    },
}

impl fmt::Display for QuadratureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadratureError::ZeroNodes => write!(f, "quadrature needs at least one node"),
            QuadratureError::Interval { a, b } => {
                write!(f, "interval [{a}, {b}] must be finite with a < b")
            }
        }
    }
}

impl core::error::Error for QuadratureError {}

/// Nodes (ascending) and positive weights of a rule on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// `(P_m(x), P_m'(x))` by the three-term recurrence.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `m`-point Gauss–Legendre rule on `[-1, 1]`, roots found by Newton
/// iteration from Chebyshev-like initial guesses. Nodes are mirrored so the
/// rule is exactly symmetric.
fn reference_rule(m: usize) -> Rule {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    if m == 1 {
        return Rule {
            nodes,
            weights: vec![2.0],
        };
    }
    for i in 0..m.div_ceil(2) {
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (m as f64 + 0.5));
        for _ in 0..100 {
            let (p, dp) = legendre(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(m, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        let (lo, hi) = (i, m - 1 - i);
        if lo == hi {
            nodes[lo] = 0.0;
        } else {
            nodes[lo] = -x;
            nodes[hi] = x;
        }
        weights[lo] = w;
        weights[hi] = w;
    }
    Rule { nodes, weights }
}

/// Exactly `m`-point Gauss–Legendre on `[a, b]`.
pub fn nystrom_nodes(a: f64, b: f64, m: usize) -> Result<Rule, QuadratureError> {
    if m == 0 {
        return Err(QuadratureError::ZeroNodes);
    }
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(QuadratureError::Interval { a, b });
    }
    let reference = reference_rule(m);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    Ok(Rule {
        nodes: reference.nodes.iter().map(|x| mid + half * x).collect(),
        weights: reference.weights.iter().map(|w| half * w).collect(),
    })
}
