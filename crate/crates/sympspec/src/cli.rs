//! The `sympspec` command line.
//!
//! Exit codes: `0` success, `1` a mathematical check failed (interlacing,
//! oracle, Williamson residuals under `--check`), `2` usage error, `3` input
//! could not be read, parsed or evaluated (including non positive definite
//! matrices).
//!
//! Numbers are printed as `{:.16e}` (17 significant digits), so output is
//! exact and byte-for-byte reproducible.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sympspec_core::classify::{self, ConditionVerdict};
use sympspec_core::interlacing::{self, InterlacingReport};
use sympspec_core::{linalg, model, oracles, sample, symplectic, Matrix, SymmetricMatrix};

use crate::io;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "sympspec",
    version,
    about = "Symplectic eigenvalues, interlacing scans and operator classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print eigenvalues and symplectic eigenvalues (descending).
    Speig {
        /// Matrix file (text format)
        #[arg(long)]
        matrix: PathBuf,
        /// Write CSV here instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Williamson normal form: symplectic eigenvalues and residuals.
    Williamson {
        /// Matrix file (text format)
        #[arg(long)]
        matrix: PathBuf,
        /// Exit with status 1 if a residual exceeds its tolerance.
        #[arg(long)]
        check: bool,
        /// Write CSV here instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Interlacing report for a matrix or a model truncation.
    Interlace {
        /// Matrix file (text format)
        #[arg(long, conflicts_with = "model", required_unless_present = "model")]
        matrix: Option<PathBuf>,
        /// Model config (JSON); needs --order
        #[arg(long, requires = "order")]
        model: Option<PathBuf>,
        /// Truncation size m (matrix order 2m).
        #[arg(long)]
        order: Option<usize>,
        /// Write CSV here instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Truncation scan over several sizes.
    Scan {
        /// Model config (JSON)
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated truncation sizes m (matrix order 2m).
        #[arg(long, value_delimiter = ',', required = true)]
        orders: Vec<usize>,
        /// Write CSV here instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// GCO and (AN)+ classification.
    Classify {
        /// Model config (JSON)
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = classify::DEFAULT_K_MAX)]
        kmax: usize,
        #[arg(long, default_value_t = classify::DEFAULT_TAIL_WINDOW)]
        tail: usize,
        /// Write CSV here instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Randomized oracle suites.
    Oracle {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Matrix order (even).
        #[arg(long, default_value_t = 8)]
        order: usize,
        /// Write CSV here instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Minmax,
    Maxmin,
    Monotone,
    Identities,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Minmax => "minmax",
            Suite::Maxmin => "maxmin",
            Suite::Monotone => "monotone",
            Suite::Identities => "identities",
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(String),
}

struct Outcome {
    body: Vec<u8>,
    passed: bool,
    notes: Vec<String>,
}

impl Outcome {
    fn new(body: Vec<u8>, passed: bool) -> Self {
        Self {
            body,
            passed,
            notes: Vec::new(),
        }
    }
}

/// Runs the CLI with `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{e}");
                EXIT_OK
            };
            return code;
        }
    };
    let output = match &cli.command {
        Command::Speig { output, .. }
        | Command::Williamson { output, .. }
        | Command::Interlace { output, .. }
        | Command::Scan { output, .. }
        | Command::Classify { output, .. }
        | Command::Oracle { output, .. } => output.clone(),
    };
    let result = match cli.command {
        Command::Speig { matrix, .. } => speig(&matrix),
        Command::Williamson { matrix, check, .. } => williamson(&matrix, check),
        Command::Interlace {
            matrix,
            model,
            order,
            ..
        } => interlace(matrix.as_deref(), model.as_deref(), order),
        Command::Scan { model, orders, .. } => scan(&model, &orders),
        Command::Classify {
            model, kmax, tail, ..
        } => classify_model(&model, kmax, tail),
        Command::Oracle {
            suite,
            trials,
            seed,
            order,
            ..
        } => oracle(suite, trials, seed, order),
    };
    match result {
        Ok(outcome) => {
            for note in &outcome.notes {
                let _ = writeln!(stderr, "sympspec: {note}");
            }
            let written = match &output {
                Some(path) => {
                    fs::write(path, &outcome.body).map_err(|e| format!("{}: {e}", path.display()))
                }
                None => stdout.write_all(&outcome.body).map_err(|e| e.to_string()),
            };
            if let Err(msg) = written {
                let _ = writeln!(stderr, "sympspec: error: cannot write output: {msg}");
                return EXIT_INPUT;
            }
            if outcome.passed {
                EXIT_OK
            } else {
                EXIT_VERDICT
            }
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "sympspec: usage error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Input(msg)) => {
            let _ = writeln!(stderr, "sympspec: error: {msg}");
            EXIT_INPUT
        }
    }
}

fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.16e}")
    }
}

fn input_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

fn load_matrix(path: &Path) -> Result<SymmetricMatrix, Failure> {
    io::load_matrix(path).map_err(|e| input_err(path, e))
}

fn load_model(path: &Path) -> Result<model::OperatorModel, Failure> {
    io::load_model(path).map_err(|e| input_err(path, e))
}

fn csv_body(rows: impl FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        rows(&mut w).expect("writing CSV to memory");
        w.flush().expect("flushing CSV to memory");
    }
    buf
}

fn speig(path: &Path) -> Result<Outcome, Failure> {
    let a = load_matrix(path)?;
    linalg::cholesky_pd(&a).map_err(|e| input_err(path, e))?;
    let lambda = linalg::eigenvalues(&a).map_err(|e| input_err(path, e))?;
    let d = symplectic::symplectic_eigenvalues(&a).map_err(|e| input_err(path, e))?;
    let mut out = String::new();
    for v in &lambda {
        out.push_str(&format!("lambda,{}\n", num(*v)));
    }
    for v in &d {
        out.push_str(&format!("d,{}\n", num(*v)));
    }
    Ok(Outcome::new(out.into_bytes(), true))
}

fn williamson(path: &Path, check: bool) -> Result<Outcome, Failure> {
    let a = load_matrix(path)?;
    let w = symplectic::williamson(&a).map_err(|e| input_err(path, e))?;
    let mut out = String::new();
    for v in &w.d {
        out.push_str(&format!("d,{}\n", num(*v)));
    }
    out.push_str(&format!("residual_factor,{}\n", num(w.residual_factor)));
    out.push_str(&format!(
        "residual_symplectic,{}\n",
        num(w.residual_symplectic)
    ));
    let passed = !check || w.within_tolerance(&a);
    Ok(Outcome::new(out.into_bytes(), passed))
}

fn interlace_csv(r: &InterlacingReport) -> Vec<u8> {
    let lambda_asc = r.lambda_asc();
    let d_asc = r.d_asc();
    csv_body(|w| {
        w.write_record([
            "j",
            "d_down",
            "lambda_down",
            "down_ok",
            "lambda_up",
            "d_up",
            "up_ok",
        ])?;
        for j in 0..r.d_desc.len() {
            w.write_record([
                (j + 1).to_string(),
                num(r.d_desc[j]),
                num(r.lambda_desc[j]),
                r.down_ok[j].to_string(),
                num(lambda_asc[j]),
                num(d_asc[j]),
                r.up_ok[j].to_string(),
            ])?;
        }
        Ok(())
    })
}

fn interlace(
    matrix: Option<&Path>,
    model_path: Option<&Path>,
    order: Option<usize>,
) -> Result<Outcome, Failure> {
    let (a, source) = match (matrix, model_path) {
        (Some(path), _) => (load_matrix(path)?, path),
        (None, Some(path)) => {
            let m =
                order.ok_or_else(|| Failure::Usage(String::from("--model requires --order")))?;
            if m == 0 {
                return Err(Failure::Usage(String::from("--order must be at least 1")));
            }
            let model = load_model(path)?;
            (
                model::truncate(&model, m).map_err(|e| input_err(path, e))?,
                path,
            )
        }
        (None, None) => {
            return Err(Failure::Usage(String::from(
                "one of --matrix or --model is required",
            )))
        }
    };
    let report = interlacing::interlace_matrix(&a).map_err(|e| input_err(source, e))?;
    Ok(Outcome::new(interlace_csv(&report), report.all_ok))
}

fn scan(path: &Path, orders: &[usize]) -> Result<Outcome, Failure> {
    if orders.contains(&0) {
        return Err(Failure::Usage(String::from(
            "--orders entries must be at least 1",
        )));
    }
    let model = load_model(path)?;
    let entries = model::truncation_scan(&model, orders).map_err(|e| input_err(path, e))?;
    let mut notes = Vec::new();
    let mut passed = true;
    let body = csv_body(|w| {
        w.write_record([
            "order",
            "min_lambda",
            "max_lambda",
            "min_d",
            "max_d",
            "all_ok",
            "hs_partial",
            "trace_partial",
        ])?;
        for entry in &entries {
            match &entry.outcome {
                Ok(r) => {
                    passed &= r.interlacing.all_ok;
                    w.write_record([
                        entry.order.to_string(),
                        num(*r.lambda_desc.last().expect("nonempty")),
                        num(r.lambda_desc[0]),
                        num(*r.d_desc.last().expect("nonempty")),
                        num(r.d_desc[0]),
                        r.interlacing.all_ok.to_string(),
                        num(r.hs_partial),
                        num(r.trace_partial),
                    ])?;
                }
                Err(e) => {
                    notes.push(format!("order {} skipped: {e}", entry.order));
                    let order = entry.order.to_string();
                    w.write_record([order.as_str(), "", "", "", "", "skipped", "", ""])?;
                }
            }
        }
        Ok(())
    });
    Ok(Outcome {
        body,
        passed,
        notes,
    })
}

fn verdict_record(item: &str, v: &ConditionVerdict) -> [String; 5] {
    [
        item.to_string(),
        v.status.to_string(),
        num(v.evidence),
        v.witness_index.map(|k| k.to_string()).unwrap_or_default(),
        v.detail.clone(),
    ]
}

fn classify_model(path: &Path, kmax: usize, tail: usize) -> Result<Outcome, Failure> {
    let model = load_model(path)?;
    let r = classify::classify(&model, kmax, tail).map_err(|e| match e {
        classify::ClassifyError::ZeroWindow | classify::ClassifyError::WindowTooLarge { .. } => {
            Failure::Usage(e.to_string())
        }
        e => input_err(path, e),
    })?;
    let body = csv_body(|w| {
        w.write_record(["item", "status", "evidence", "witness_index", "detail"])?;
        w.write_record(verdict_record("gco_cond1", &r.gco_cond1))?;
        w.write_record(verdict_record("gco_cond2", &r.gco_cond2))?;
        w.write_record(verdict_record("gco_cond3", &r.gco_cond3))?;
        w.write_record(["is_gco", r.is_gco.name(), "", "", "all three conditions"])?;
        w.write_record(verdict_record("an_plus", &r.an_plus))?;
        match r.beta_estimate {
            Some(beta) => w.write_record([
                "beta_estimate",
                "",
                &num(beta),
                "",
                "essential-spectrum point",
            ])?,
            None => w.write_record(["beta_estimate", "", "", "", "no common limit detected"])?,
        }
        if let Some(pre) = &r.integral_precheck {
            w.write_record(verdict_record("integral_precheck", pre))?;
        }
        Ok(())
    });
    Ok(Outcome::new(body, true))
}

struct OracleRow {
    class: String,
    trials: usize,
    violations: usize,
}

fn oracle(suite: Suite, trials: usize, seed: u64, order: usize) -> Result<Outcome, Failure> {
    if trials == 0 {
        return Err(Failure::Usage(String::from("--trials must be at least 1")));
    }
    if order < 2 || !order.is_multiple_of(2) {
        return Err(Failure::Usage(format!(
            "--order must be even and at least 2, got {order}"
        )));
    }
    let rows = oracle_rows(suite, trials, seed, order).map_err(Failure::Input)?;
    let passed = rows.iter().all(|r| r.violations == 0);
    let body = csv_body(|w| {
        w.write_record(["suite", "class", "trials", "violations", "status"])?;
        for r in &rows {
            w.write_record([
                suite.name(),
                &r.class,
                &r.trials.to_string(),
                &r.violations.to_string(),
                if r.violations == 0 { "pass" } else { "fail" },
            ])?;
        }
        Ok(())
    });
    Ok(Outcome::new(body, passed))
}

fn sym(m: Matrix) -> Result<SymmetricMatrix, String> {
    SymmetricMatrix::new(m).map_err(|e| e.to_string())
}

fn oracle_rows(
    suite: Suite,
    trials: usize,
    seed: u64,
    order: usize,
) -> Result<Vec<OracleRow>, String> {
    let mut rows = Vec::new();
    match suite {
        Suite::Minmax | Suite::Maxmin => {
            let a = sym(sample::random_symmetric(
                &mut ChaCha8Rng::seed_from_u64(seed),
                order,
                1.0,
            ))?;
            for j in 1..=order {
                let probe = if suite == Suite::Minmax {
                    oracles::minmax_probe(&a, j, trials, seed)
                } else {
                    oracles::maxmin_probe(&a, j, trials, seed)
                }
                .map_err(|e| e.to_string())?;
                rows.push(OracleRow {
                    class: format!("random_subspace_j{j}"),
                    trials,
                    violations: probe.violations,
                });
                rows.push(OracleRow {
                    class: format!("eigenvector_subspace_j{j}"),
                    trials: 1,
                    violations: usize::from(!probe.achieved_equality),
                });
            }
        }
        Suite::Monotone => {
            let mut identical = 0;
            let mut update = 0;
            for t in 0..trials {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
                let b = sample::random_symmetric(&mut rng, order, 1.0);
                let rank = rng.random_range(1..=order);
                let g: Vec<Vec<f64>> = (0..rank)
                    .map(|_| sample::gaussian_vec(&mut rng, order))
                    .collect();
                let a = Matrix::from_fn(order, order, |i, k| {
                    b[(i, k)] + g.iter().map(|v| v[i] * v[k]).sum::<f64>()
                });
                let (a, b) = (sym(a)?, sym(b)?);
                identical +=
                    usize::from(!oracles::monotone_eig_check(&b, &b).map_err(|e| e.to_string())?);
                update +=
                    usize::from(!oracles::monotone_eig_check(&a, &b).map_err(|e| e.to_string())?);
            }
            rows.push(OracleRow {
                class: String::from("identical"),
                trials,
                violations: identical,
            });
            rows.push(OracleRow {
                class: String::from("psd_update"),
                trials,
                violations: update,
            });
        }
        Suite::Identities => {
            let mut counts = [0usize; 3];
            for t in 0..trials {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
                let tm = sym(sample::random_pd(&mut rng, order))?;
                let magnitude = rng.random_range(-1.5f64..=1.5).exp();
                let alpha = if rng.random_bool(0.5) {
                    magnitude
                } else {
                    -magnitude
                };
                let r =
                    oracles::compactness_identity_check(&tm, alpha).map_err(|e| e.to_string())?;
                for (count, residual) in
                    counts
                        .iter_mut()
                        .zip([r.shifted_square, r.inverse, r.similarity])
                {
                    *count += usize::from(residual > r.bound);
                }
            }
            for (name, violations) in ["shifted_square", "inverse", "similarity"]
                .into_iter()
                .zip(counts)
            {
                rows.push(OracleRow {
                    class: String::from(name),
                    trials,
                    violations,
                });
            }
        }
    }
    Ok(rows)
}
