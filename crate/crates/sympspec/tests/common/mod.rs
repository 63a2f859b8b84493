use std::path::{Path, PathBuf};

use sympspec::cli::run;

pub fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

pub fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{name}.csv"))
}

pub fn invoke(args: &[String]) -> (i32, Vec<u8>, String) {
    let mut argv = vec![String::from("sympspec")];
    argv.extend_from_slice(args);
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(&argv, &mut out, &mut err);
    (code, out, String::from_utf8(err).unwrap())
}

pub fn args(spec: &[&str]) -> Vec<String> {
    spec.iter()
        .map(|a| match a.strip_prefix('@') {
            Some(name) => fixture(name),
            None => a.to_string(),
        })
        .collect()
}

/// `(golden name, argv with '@' marking fixture files)`; every case exits 0.
pub const CASES: &[(&str, &[&str])] = &[
    ("speig_pd4", &["speig", "--matrix", "@pd4.txt"]),
    ("speig_id4", &["speig", "--matrix", "@id4.txt"]),
    (
        "williamson_pd4",
        &["williamson", "--matrix", "@pd4.txt", "--check"],
    ),
    ("interlace_id4", &["interlace", "--matrix", "@id4.txt"]),
    ("interlace_pd4", &["interlace", "--matrix", "@pd4.txt"]),
    (
        "interlace_gco_block",
        &["interlace", "--model", "@gco_block.json", "--order", "4"],
    ),
    (
        "scan_one_plus",
        &[
            "scan",
            "--model",
            "@diag_one_plus.json",
            "--orders",
            "2,4,8",
        ],
    ),
    (
        "scan_exp_kernel",
        &["scan", "--model", "@exp_kernel.json", "--orders", "4,8,16"],
    ),
    (
        "scan_skips",
        &[
            "scan",
            "--model",
            "@diag_decreasing.json",
            "--orders",
            "1,2,3",
        ],
    ),
    (
        "scan_infinite",
        &["scan", "--model", "@infinite.json", "--orders", "2,8"],
    ),
    (
        "classify_gco_block",
        &["classify", "--model", "@gco_block.json"],
    ),
    (
        "classify_three_minus",
        &["classify", "--model", "@diag_three_minus.json"],
    ),
    (
        "classify_three_plus",
        &["classify", "--model", "@diag_three_plus.json"],
    ),
    (
        "classify_one_plus",
        &["classify", "--model", "@diag_one_plus.json"],
    ),
    (
        "classify_exp_kernel",
        &[
            "classify",
            "--model",
            "@exp_kernel.json",
            "--kmax",
            "64",
            "--tail",
            "8",
        ],
    ),
    (
        "classify_negative_kernel",
        &[
            "classify",
            "--model",
            "@negative_kernel.json",
            "--kmax",
            "64",
            "--tail",
            "8",
        ],
    ),
    (
        "classify_infinite",
        &[
            "classify",
            "--model",
            "@infinite.json",
            "--kmax",
            "64",
            "--tail",
            "8",
        ],
    ),
    (
        "oracle_minmax",
        &[
            "oracle", "--suite", "minmax", "--trials", "25", "--seed", "7", "--order", "6",
        ],
    ),
    (
        "oracle_maxmin",
        &[
            "oracle", "--suite", "maxmin", "--trials", "25", "--seed", "7", "--order", "6",
        ],
    ),
    (
        "oracle_monotone",
        &[
            "oracle", "--suite", "monotone", "--trials", "25", "--seed", "7",
        ],
    ),
    (
        "oracle_identities",
        &[
            "oracle",
            "--suite",
            "identities",
            "--trials",
            "25",
            "--seed",
            "7",
        ],
    ),
];
