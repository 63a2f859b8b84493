//! File formats: the matrix text format and JSON model configs.
//!
//! Matrix text format:
//!
//! ```text
//! # comment lines start with '#'
//! 4
//! 2 0 0 0
//! 0 1 0 0
//! 0 0 2 0
//! 0 0 0 1
//! ```
//!
//! The first non-comment line is the order `2n`, followed by `2n` rows of
//! `2n` whitespace-separated numbers. Blank lines are ignored.
//!
//! Model config (JSON):
//!
//! ```json
//! {"kind": "diagonal_pair", "alpha": 1, "p": "1 - 4^(-n)", "q": "1 + 2^(-n)"}
//! {"kind": "infinite_matrix", "alpha": 1, "a_entry": "...", "b_entry": "...", "d_entry": "..."}
//! {"kind": "integral", "alpha": 1, "kernel": "exp(-abs(s-t))", "interval": [0, 1],
//!  "continuity_declared": true}
//! ```

use std::fmt;
use std::fs;
use std::path::Path;

use serde::Deserialize;
use sympspec_core::matrix::MatrixError;
use sympspec_core::model::ModelError;
use sympspec_core::{Matrix, OperatorModel, SymmetricMatrix};

/// Entries may differ from their transposes by at most
/// `1e-12·(1 + ‖A‖_max)`.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug)]
pub enum InputError {
    Io {
        path: String,
        error: std::io::Error,
    },
    /// 1-based line number in the matrix file.
    Syntax {
        line: usize,
        message: String,
    },
    NotSymmetric {
        row: usize,
        col: usize,
        gap: f64,
    },
    Matrix(MatrixError),
    Json(serde_json::Error),
    Config(String),
    Model(ModelError),
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputError::Io { path, error } => write!(f, "{path}: {error}"),
            InputError::Syntax { line, message } => write!(f, "line {line}: {message}"),
            InputError::NotSymmetric { row, col, gap } => write!(
                f,
                "matrix is not symmetric: entries ({row}, {col}) and ({col}, {row}) differ by {gap:e}"
            ),
            InputError::Matrix(e) => e.fmt(f),
            InputError::Json(e) => write!(f, "invalid model config: {e}"),
            InputError::Config(msg) => write!(f, "invalid model config: {msg}"),
            InputError::Model(e) => write!(f, "invalid model: {e}"),
        }
    }
}

impl std::error::Error for InputError {}

pub fn read_file(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|error| InputError::Io {
        path: path.display().to_string(),
        error,
    })
}

fn syntax(line: usize, message: impl Into<String>) -> InputError {
    InputError::Syntax {
        line,
        message: message.into(),
    }
}

/// Parses the matrix text format into an even-order symmetric matrix.
pub fn parse_matrix(text: &str) -> Result<SymmetricMatrix, InputError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line, header) = lines
        .next()
        .ok_or_else(|| syntax(1, "missing order line"))?;
    let order: usize = header
        .parse()
        .map_err(|_| syntax(line, format!("expected the matrix order, found '{header}'")))?;
    if order == 0 {
        return Err(syntax(line, "order must be positive"));
    }

    let mut data = Vec::with_capacity(order * order);
    for row in 0..order {
        let (line, text) = lines
            .next()
            .ok_or_else(|| syntax(line, format!("expected {order} rows, found {row}")))?;
        let before = data.len();
        for token in text.split_whitespace() {
            let v: f64 = token
                .parse()
                .map_err(|_| syntax(line, format!("invalid number '{token}'")))?;
            if !v.is_finite() {
                return Err(syntax(line, format!("non-finite entry '{token}'")));
            }
            data.push(v);
        }
        let count = data.len() - before;
        if count != order {
            return Err(syntax(
                line,
                format!("expected {order} entries, found {count}"),
            ));
        }
    }
    if let Some((line, _)) = lines.next() {
        return Err(syntax(line, "unexpected content after the last row"));
    }

    let m = Matrix::from_vec(order, order, data).map_err(InputError::Matrix)?;
    let tol = SYMMETRY_TOL * (1.0 + m.max_abs());
    for i in 0..order {
        for j in i + 1..order {
            let gap = (m[(i, j)] - m[(j, i)]).abs();
            if gap > tol {
                return Err(InputError::NotSymmetric {
                    row: i + 1,
                    col: j + 1,
                    gap,
                });
            }
        }
    }
    SymmetricMatrix::new(m).map_err(InputError::Matrix)
}

pub fn load_matrix(path: &Path) -> Result<SymmetricMatrix, InputError> {
    parse_matrix(&read_file(path)?)
}

/// Writes `m` in the matrix text format with round-trip precision.
pub fn format_matrix(m: &Matrix) -> String {
    let mut out = format!("{}\n", m.rows());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindTag {
    DiagonalPair,
    InfiniteMatrix,
    Integral,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: KindTag,
    pub alpha: f64,
    pub p: Option<String>,
    pub q: Option<String>,
    pub a_entry: Option<String>,
    pub b_entry: Option<String>,
    pub d_entry: Option<String>,
    pub kernel: Option<String>,
    pub interval: Option<[f64; 2]>,
    pub continuity_declared: Option<bool>,
}

impl ModelConfig {
    fn present(&self) -> [(&'static str, bool); 8] {
        [
            ("p", self.p.is_some()),
            ("q", self.q.is_some()),
            ("a_entry", self.a_entry.is_some()),
            ("b_entry", self.b_entry.is_some()),
            ("d_entry", self.d_entry.is_some()),
            ("kernel", self.kernel.is_some()),
            ("interval", self.interval.is_some()),
            ("continuity_declared", self.continuity_declared.is_some()),
        ]
    }

    fn only(&self, kind: &str, allowed: &[&str]) -> Result<(), InputError> {
        for (name, set) in self.present() {
            if set && !allowed.contains(&name) {
                return Err(InputError::Config(format!(
                    "field '{name}' does not apply to kind '{kind}'"
                )));
            }
        }
        Ok(())
    }

    pub fn into_model(self) -> Result<OperatorModel, InputError> {
        fn required<'a>(
            v: &'a Option<String>,
            name: &str,
            kind: &str,
        ) -> Result<&'a str, InputError> {
            v.as_deref()
                .ok_or_else(|| InputError::Config(format!("kind '{kind}' requires field '{name}'")))
        }
        let model = match self.kind {
            KindTag::DiagonalPair => {
                self.only("diagonal_pair", &["p", "q"])?;
                let p = required(&self.p, "p", "diagonal_pair")?;
                OperatorModel::diagonal_pair(p, self.q.as_deref(), self.alpha)
            }
            KindTag::InfiniteMatrix => {
                let kind = "infinite_matrix";
                self.only(kind, &["a_entry", "b_entry", "d_entry"])?;
                OperatorModel::infinite_matrix(
                    required(&self.a_entry, "a_entry", kind)?,
                    required(&self.b_entry, "b_entry", kind)?,
                    required(&self.d_entry, "d_entry", kind)?,
                    self.alpha,
                )
            }
            KindTag::Integral => {
                let kind = "integral";
                self.only(kind, &["kernel", "interval", "continuity_declared"])?;
                let kernel = required(&self.kernel, "kernel", kind)?;
                let [a, b] = self.interval.ok_or_else(|| {
                    InputError::Config(String::from("kind 'integral' requires field 'interval'"))
                })?;
                OperatorModel::integral(
                    kernel,
                    (a, b),
                    self.continuity_declared.unwrap_or(false),
                    self.alpha,
                )
            }
        };
        model.map_err(InputError::Model)
    }
}

pub fn parse_model(text: &str) -> Result<OperatorModel, InputError> {
    let config: ModelConfig = serde_json::from_str(text).map_err(InputError::Json)?;
    config.into_model()
}

pub fn load_model(path: &Path) -> Result<OperatorModel, InputError> {
    parse_model(&read_file(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sympspec_core::model::ModelKind;

    #[test]
    fn matrix_round_trip() {
        let text = "# identity\n4\n1 0 0 0\n0 1 0 0\n\n0 0 1 0\n0 0 0 1\n";
        let m = parse_matrix(text).unwrap();
        assert_eq!(m.as_matrix(), &Matrix::identity(4));
        let again = parse_matrix(&format_matrix(m.as_matrix())).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn matrix_errors_point_at_lines() {
        let err = parse_matrix("2\n1 0\n0 x\n").unwrap_err();
        assert!(matches!(err, InputError::Syntax { line: 3, .. }), "{err}");
        let err = parse_matrix("2\n1 0 0\n0 1\n").unwrap_err();
        assert!(matches!(err, InputError::Syntax { line: 2, .. }));
        let err = parse_matrix("2\n1 0\n").unwrap_err();
        assert!(matches!(err, InputError::Syntax { .. }));
        let err = parse_matrix("2\n1 0\n0 1\n5\n").unwrap_err();
        assert!(matches!(err, InputError::Syntax { line: 4, .. }));
        let err = parse_matrix("2\n1 1\n0 1\n").unwrap_err();
        assert!(matches!(
            err,
            InputError::NotSymmetric { row: 1, col: 2, .. }
        ));
        let err = parse_matrix("3\n1 0 0\n0 1 0\n0 0 1\n").unwrap_err();
        assert!(matches!(
            err,
            InputError::Matrix(MatrixError::OddOrder { .. })
        ));
        assert!(parse_matrix("# only comments\n").is_err());
    }

    #[test]
    fn model_configs() {
        let m = parse_model(r#"{"kind": "diagonal_pair", "alpha": 1, "p": "1 + 1/n^2"}"#).unwrap();
        assert_eq!(m.kind(), ModelKind::DiagonalPair);
        let m = parse_model(
            r#"{"kind": "integral", "alpha": 1, "kernel": "min(s,t)", "interval": [0, 1], "continuity_declared": true}"#,
        )
        .unwrap();
        assert_eq!(m.kind(), ModelKind::Integral);
        let m = parse_model(r#"{"kind": "infinite_matrix", "alpha": 2, "a_entry": "0", "b_entry": "0", "d_entry": "0"}"#)
            .unwrap();
        assert_eq!(m.kind(), ModelKind::InfiniteMatrix);
    }

    #[test]
    fn model_config_errors() {
        for bad in [
            r#"{"kind": "diagonal_pair", "alpha": 1}"#,
            r#"{"kind": "diagonal_pair", "alpha": 1, "p": "1", "kernel": "0"}"#,
            r#"{"kind": "diagonal_pair", "alpha": 1, "p": "1", "extra": 3}"#,
            r#"{"kind": "spiral", "alpha": 1}"#,
            r#"{"kind": "integral", "alpha": 1, "kernel": "0"}"#,
            r#"{"kind": "integral", "alpha": 1, "kernel": "0", "interval": [1, 0]}"#,
            r#"{"kind": "diagonal_pair", "alpha": 1, "p": "1 + x"}"#,
            r#"{"kind": "diagonal_pair", "p": "1"}"#,
        ] {
            assert!(parse_model(bad).is_err(), "{bad}");
        }
    }
}
