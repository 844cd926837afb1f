//! End-to-end runs of the installed binary: flag handling, exit codes,
//! format parity, config and cache behavior, reproducibility.

use std::process::Command;

fn run(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_isocalc"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        String::from_utf8(out.stdout).expect("stdout is utf-8"),
        String::from_utf8(out.stderr).expect("stderr is utf-8"),
        out.status.code().unwrap_or(-1),
    )
}

#[test]
fn gamma_row_carries_the_reference_digits() {
    let (stdout, _, code) = run(&["constants", "--k", "1", "--digits", "12", "--no-timestamp"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("gamma(1)"));
    assert!(stdout.contains("0.577215664901"));
    assert!(stdout.contains("gamma_prime(1)"));
    assert!(stdout.contains("0.422784335098"));
    assert!(stdout.contains("composite"));
    assert!(!stdout.contains("generated"));
}

#[test]
fn usage_errors_exit_two() {
    let (_, _, code) = run(&["constants", "--k", "1", "--digits", "0"]);
    assert_eq!(code, 2);
    let (_, stderr, code) = run(&["constants"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("usage"));
    let (_, _, code) = run(&["derivatives", "--k", "1", "--x-start", "5", "--x-end", "2"]);
    assert_eq!(code, 2);
    let (_, _, code) = run(&[
        "grid",
        "--function",
        "log",
        "--x",
        "2",
        "--base",
        "2",
        "--m-list",
        "0",
    ]);
    assert_eq!(code, 2);
    let (_, _, code) = run(&[
        "grid",
        "--function",
        "ln",
        "--x",
        "2",
        "--base",
        "1",
        "--m-list",
        "0",
    ]);
    assert_eq!(code, 2);
}

#[test]
fn csv_and_json_print_identical_cells() {
    let args = ["constants", "--k", "1", "--digits", "10", "--no-timestamp"];
    let (csv, _, code_csv) = run(&[&args[..], &["--format", "csv"]].concat());
    let (json, _, code_json) = run(&[&args[..], &["--format", "json"]].concat());
    assert_eq!((code_csv, code_json), (0, 0));

    let doc: serde_json::Value = serde_json::from_str(&json).expect("json parses");
    let json_rows: Vec<Vec<&str>> = doc["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| {
            row.as_array()
                .unwrap()
                .iter()
                .map(|c| c.as_str().unwrap())
                .collect()
        })
        .collect();
    let csv_rows: Vec<Vec<&str>> = csv
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(json_rows, csv_rows);
    assert!(!csv.contains('\u{2026}'), "ellipsis is text-format only");
}

#[test]
fn verify_passes_and_exits_zero() {
    let (stdout, _, code) = run(&["verify", "--no-timestamp"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.matches("true").count(), 5);
    assert!(!stdout.contains("false"));
    assert!(stdout.contains("basel_sum"));
}

#[test]
fn derivatives_mark_domain_and_shrink_like_half_inverse_square() {
    let (stdout, _, code) = run(&[
        "derivatives",
        "--k",
        "2",
        "--x-start",
        "1",
        "--x-end",
        "2",
        "--no-timestamp",
    ]);
    assert_eq!(code, 0);
    let first = stdout.lines().find(|l| l.starts_with("1 ")).unwrap();
    assert_eq!(first.matches("domain-error").count(), 3);
    let second = stdout.lines().find(|l| l.starts_with("2 ")).unwrap();
    assert!(!second.contains("domain-error"));

    let (stdout, _, code) = run(&[
        "derivatives",
        "--k",
        "1",
        "--x-start",
        "100",
        "--x-end",
        "100",
        "--no-timestamp",
    ]);
    assert_eq!(code, 0);
    assert!(
        stdout.contains("4.9669146e-5"),
        "fwd_error at x = 100:\n{stdout}"
    );
}

#[test]
fn grid_quotient_matches_direct_evaluation() {
    let (b10, _, code) = run(&[
        "grid",
        "--function",
        "ln",
        "--x",
        "2",
        "--base",
        "10",
        "--m-list",
        "0",
        "--no-timestamp",
    ]);
    assert_eq!(code, 0);
    assert!(
        b10.contains("0.405465108108"),
        "ln(3) - ln(2) at m = 0:\n{b10}"
    );

    // b^0 = 1 regardless of base, so the m = 0 row is base-independent.
    let (b2, _, _) = run(&[
        "grid",
        "--function",
        "ln",
        "--x",
        "2",
        "--base",
        "2",
        "--m-list",
        "0",
        "--no-timestamp",
    ]);
    let row = |s: &str| s.lines().find(|l| l.starts_with("0 ")).unwrap().to_string();
    assert_eq!(row(&b10), row(&b2));
}

#[test]
fn residual_table_starts_at_one_minus_ln_two() {
    let (stdout, _, code) = run(&["residuals", "--k", "1", "--n-max", "8", "--no-timestamp"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("0.306852819440"));
}

#[test]
fn config_sets_defaults_and_cache_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cache_path = dir.path().join("cache.tsv");
    let conf_path = dir.path().join("run.conf");
    std::fs::write(
        &conf_path,
        format!("digits = 10\ncache = {}\n", cache_path.display()),
    )
    .unwrap();
    let conf = conf_path.to_str().unwrap();

    let args = ["constants", "--k", "1", "--config", conf, "--no-timestamp"];
    let (cold, _, code) = run(&args);
    assert_eq!(code, 0);
    assert!(
        cold.contains("# digits = 10"),
        "config digits apply:\n{cold}"
    );
    assert!(cold.contains("0.5772156649"));
    assert!(cache_path.exists());

    let (warm, _, code) = run(&args);
    assert_eq!(code, 0);
    assert!(
        warm.contains("true"),
        "second run is served from cache:\n{warm}"
    );
    assert!(warm.contains("0.5772156649"), "cached value round-trips");

    // A damaged cache is advisory: the run recomputes and still succeeds.
    std::fs::write(&cache_path, "not a cache at all\n").unwrap();
    let (after, stderr, code) = run(&args);
    assert_eq!(code, 0);
    assert!(after.contains("0.5772156649"));
    assert!(after.contains("false"), "damaged cache forces recompute");
    assert!(stderr.contains("ignoring cache"));
}

#[test]
fn config_max_terms_caps_the_threshold_search() {
    let dir = tempfile::tempdir().unwrap();
    let conf_path = dir.path().join("run.conf");
    std::fs::write(&conf_path, "max_terms = 1000\n").unwrap();
    let (_, stderr, code) = run(&[
        "constants",
        "--e-threshold",
        "1e-6",
        "--config",
        conf_path.to_str().unwrap(),
        "--no-timestamp",
    ]);
    assert_eq!(code, 1, "cap exhaustion is a computation failure: {stderr}");
    assert!(stderr.contains("1000"));

    let (_, _, code) = run(&["constants", "--config", "no-such-file.conf", "--k", "1"]);
    assert_eq!(code, 2, "unreadable config is a usage error");
}

#[test]
fn thread_count_does_not_change_output_bytes() {
    let base = [
        "constants",
        "--k",
        "1",
        "--lambda1",
        "--digits",
        "12",
        "--no-timestamp",
    ];
    let (one, _, code_one) = run(&[&base[..], &["--threads", "1"]].concat());
    let (eight, _, code_eight) = run(&[&base[..], &["--threads", "8"]].concat());
    assert_eq!((code_one, code_eight), (0, 0));
    assert_eq!(one, eight);
}
