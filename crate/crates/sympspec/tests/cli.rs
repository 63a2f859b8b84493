use std::fs;
use std::process::Command;

use sympspec::cli::{EXIT_INPUT, EXIT_OK, EXIT_USAGE};

mod common;

use common::{args, golden_path, invoke, CASES};

/// Set `SYMPSPEC_BLESS=1` to rewrite the golden files from current output.
fn check_golden(name: &str, actual: &[u8]) {
    let path = golden_path(name);
    if std::env::var_os("SYMPSPEC_BLESS").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(
        expected == actual,
        "{name}: output differs from {}\n--- got ---\n{}",
        path.display(),
        String::from_utf8_lossy(actual)
    );
}

#[test]
fn golden_outputs_are_reproduced_byte_for_byte() {
    for (name, spec) in CASES {
        let argv = args(spec);
        let (code, first, err) = invoke(&argv);
        assert_eq!(code, EXIT_OK, "{name}: {err}");
        let (_, second, _) = invoke(&argv);
        assert_eq!(first, second, "{name}: repeated run differs");
        check_golden(name, &first);
    }
}

#[test]
fn block_model_verdicts_in_cli_output() {
    let (_, out, _) = invoke(&args(&["classify", "--model", "@gco_block.json"]));
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("\nis_gco,Satisfied,"));
    assert!(text.contains("\nan_plus,Violated,"));
}

#[test]
fn skipped_orders_are_reported_on_stderr() {
    let (code, out, err) = invoke(&args(&[
        "scan",
        "--model",
        "@diag_decreasing.json",
        "--orders",
        "1,2",
    ]));
    assert_eq!(code, EXIT_OK);
    assert!(String::from_utf8(out)
        .unwrap()
        .contains("\n4,,,,,skipped,,\n"));
    assert!(
        err.contains("order 4 skipped: matrix is not positive definite"),
        "{err}"
    );
}

#[test]
fn input_errors_exit_3_with_context() {
    for (spec, needle) in [
        (
            &["speig", "--matrix", "@notpd.txt"][..],
            "not positive definite",
        ),
        (
            &["williamson", "--matrix", "@notpd.txt"][..],
            "not positive definite",
        ),
        (
            &["interlace", "--matrix", "@notpd.txt"][..],
            "not positive definite",
        ),
        (
            &["speig", "--matrix", "@bad_syntax.txt"][..],
            "line 3: invalid number 'oops'",
        ),
        (
            &["classify", "--model", "@bad_expr.json"][..],
            "unknown identifier 'm' at byte 4",
        ),
        (
            &["speig", "--matrix", "@does_not_exist.txt"][..],
            "does_not_exist.txt",
        ),
        (
            &["scan", "--model", "@id4.txt", "--orders", "2"][..],
            "invalid model config",
        ),
    ] {
        let (code, out, err) = invoke(&args(spec));
        assert_eq!(code, EXIT_INPUT, "{spec:?}: {err}");
        assert!(out.is_empty());
        assert!(err.contains(needle), "{spec:?}: {err}");
    }
}

#[test]
fn usage_errors_exit_2() {
    for spec in [
        &[][..],
        &["frobnicate"][..],
        &["speig"][..],
        &["speig", "--matrix", "@id4.txt", "--bogus"][..],
        &["interlace", "--model", "@gco_block.json"][..],
        &[
            "interlace",
            "--matrix",
            "@id4.txt",
            "--model",
            "@gco_block.json",
            "--order",
            "2",
        ][..],
        &["scan", "--model", "@gco_block.json", "--orders", "0"][..],
        &[
            "classify",
            "--model",
            "@gco_block.json",
            "--kmax",
            "10",
            "--tail",
            "6",
        ][..],
        &["oracle", "--suite", "minmax", "--order", "5"][..],
        &["oracle", "--suite", "sideways"][..],
        &["oracle", "--suite", "minmax", "--trials", "0"][..],
    ] {
        let (code, _, err) = invoke(&args(spec));
        assert_eq!(code, EXIT_USAGE, "{spec:?}: {err}");
        assert!(!err.is_empty());
    }
    let (code, out, _) = invoke(&args(&["--help"]));
    assert_eq!(code, EXIT_OK);
    assert!(String::from_utf8(out).unwrap().contains("williamson"));
}

#[test]
fn output_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("sympspec-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join("speig.csv");
    let mut argv = args(&["speig", "--matrix", "@pd4.txt", "--output"]);
    argv.push(path.display().to_string());
    let (code, out, _) = invoke(&argv);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    assert_eq!(
        fs::read(&path).unwrap(),
        fs::read(golden_path("speig_pd4")).unwrap()
    );
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn binary_matches_library_entry_point() {
    let argv = args(&["classify", "--model", "@diag_three_plus.json"]);
    let output = Command::new(env!("CARGO_BIN_EXE_sympspec"))
        .args(&argv)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(EXIT_OK));
    let (_, out, _) = invoke(&argv);
    assert_eq!(output.stdout, out);

    let output = Command::new(env!("CARGO_BIN_EXE_sympspec"))
        .args(args(&["speig", "--matrix", "@notpd.txt"]))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(EXIT_INPUT));
    assert!(String::from_utf8_lossy(&output.stderr).contains("not positive definite"));
}
